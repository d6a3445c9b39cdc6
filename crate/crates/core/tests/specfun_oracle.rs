//! Bessel/Hankel values against frozen 50-digit mpmath references
//! (`fixtures/gen_oracles.py`).

use phaseless::specfun::{bessel_j, bessel_y, hankel1};
use serde_json::Value;

fn oracles() -> Value {
    serde_json::from_str(include_str!("fixtures/oracles.json")).unwrap()
}

fn close(got: f64, want: f64, rel: f64, abs: f64) -> bool {
    (got - want).abs() <= rel * want.abs() + abs
}

#[test]
fn bessel_values_match_high_precision_reference() {
    let o = oracles();
    for p in o["bessel"].as_array().unwrap() {
        let x = p["x"].as_f64().unwrap();
        let cases = [
            ("j0", bessel_j(0, x).unwrap()),
            ("j1", bessel_j(1, x).unwrap()),
            ("y0", bessel_y(0, x).unwrap()),
            ("y1", bessel_y(1, x).unwrap()),
        ];
        for (name, got) in cases {
            let want = p[name].as_f64().unwrap();
            // Relative 1e-12 with an absolute floor for points sitting on a zero.
            assert!(
                close(got, want, 1e-12, 1e-15),
                "{name}({x}) = {got:e}, reference {want:e}, diff {:e}",
                got - want
            );
        }
    }
}

#[test]
fn first_zeros() {
    let o = oracles();
    let jz = o["j0_first_zero"].as_f64().unwrap();
    assert!(bessel_j(0, jz).unwrap().abs() < 1e-12);
    assert!(bessel_j(0, 2.404825557695773_f64).unwrap().abs() < 1e-12);
    let yz = o["y0_first_zero"].as_f64().unwrap();
    assert!(bessel_y(0, yz).unwrap().abs() < 1e-12);
    assert!(bessel_y(0, 0.8935769662791675_f64).unwrap().abs() < 1e-12);
}

#[test]
fn hankel_at_one() {
    let o = oracles();
    let p = o["bessel"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["x"].as_f64() == Some(1.0))
        .unwrap();
    let h0 = hankel1(0, 1.0).unwrap();
    assert!(close(h0.re, p["j0"].as_f64().unwrap(), 1e-12, 0.0));
    assert!(close(h0.im, p["y0"].as_f64().unwrap(), 1e-12, 0.0));
    let y1 = bessel_y(1, 1.0).unwrap();
    assert!(close(y1, p["y1"].as_f64().unwrap(), 1e-12, 0.0));
}

#[test]
fn wronskian_at_ten() {
    let h0 = hankel1(0, 10.0).unwrap();
    let h1 = hankel1(1, 10.0).unwrap();
    let w = h1.re * h0.im - h0.re * h1.im;
    assert!((w - 2.0 / (std::f64::consts::PI * 10.0)).abs() < 1e-13);
}

#[test]
fn dense_log_spaced_sweep() {
    let o = oracles();
    let mut worst = 0.0_f64;
    for row in o["bessel_dense"].as_array().unwrap() {
        let r: Vec<f64> = row.as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        let x = r[0];
        let got = [
            bessel_j(0, x).unwrap(),
            bessel_j(1, x).unwrap(),
            bessel_y(0, x).unwrap(),
            bessel_y(1, x).unwrap(),
        ];
        for (g, w) in got.iter().zip(&r[1..]) {
            let err = (g - w).abs() / (w.abs() + 1e-3);
            worst = worst.max(err);
            assert!(close(*g, *w, 1e-12, 1e-14), "x = {x}: {g:e} vs {w:e}");
        }
    }
    eprintln!("worst scaled error {worst:e}");
}
