//! Two-dimensional Nelder–Mead minimisation.

use crate::geometry::Vec2;

/// Minimises `f` starting from the simplex `{x0, x0 + h e1, x0 + h e2}`.
/// Non-finite values are treated as `+∞`. Returns the best point and value.
pub fn nelder_mead_2d(mut f: impl FnMut(Vec2<f64>) -> f64, x0: Vec2<f64>, h: f64, max_iter: usize, tol: f64) -> (Vec2<f64>, f64) {
    let mut eval = |p: Vec2<f64>| {
        let v = f(p);
        if v.is_finite() { v } else { f64::INFINITY }
    };
    let mut s = [x0, x0 + Vec2::new(h, 0.0), x0 + Vec2::new(0.0, h)];
    let mut v = [eval(s[0]), eval(s[1]), eval(s[2])];
    for _ in 0..max_iter {
        let mut idx = [0, 1, 2];
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        s = [s[idx[0]], s[idx[1]], s[idx[2]]];
        v = [v[idx[0]], v[idx[1]], v[idx[2]]];
        if (v[2] - v[0]).abs() <= tol && (s[2] - s[0]).norm().max((s[1] - s[0]).norm()) <= tol {
            break;
        }
        let c = (s[0] + s[1]) * 0.5;
        let xr = c + (c - s[2]);
        let fr = eval(xr);
        if fr < v[0] {
            let xe = c + (c - s[2]) * 2.0;
            let fe = eval(xe);
            (s[2], v[2]) = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < v[1] {
            (s[2], v[2]) = (xr, fr);
        } else {
            let (xc, fc) = if fr < v[2] {
                let x = c + (xr - c) * 0.5;
                (x, eval(x))
            } else {
                let x = c + (s[2] - c) * 0.5;
                (x, eval(x))
            };
            if fc < v[2].min(fr) {
                (s[2], v[2]) = (xc, fc);
            } else {
                for i in 1..3 {
                    s[i] = s[0] + (s[i] - s[0]) * 0.5;
                    v[i] = eval(s[i]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
    (s[best], v[best])
}
