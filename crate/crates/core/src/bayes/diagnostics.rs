use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Window-selection constant of the automatic windowing rule.
pub const WOLFF_S: f64 = 1.5;

/// Autocorrelation summary of a scalar series. Undefined quantities (for a
/// constant series) are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub trace: Vec<f64>,
    pub mean: f64,
    /// Normalised autocorrelation `ρ(t)`, `t = 0, 1, ...`.
    pub acf: Vec<f64>,
    /// `τ_int = 1/2 + Σ_{t=1}^{W} ρ(t)`; i.i.d. data gives 1/2.
    pub tau_int: Option<f64>,
    pub tau_int_error: Option<f64>,
    pub window: Option<usize>,
    /// `N / (2 τ_int)`.
    pub ess: Option<f64>,
}

fn autocovariance(dev: &[f64], t: usize) -> f64 {
    let n = dev.len();
    dev[..n - t].iter().zip(&dev[t..]).map(|(a, b)| a * b).sum::<f64>() / (n - t) as f64
}

/// Gamma-method analysis: the summation window `W` is the first one where
/// `exp(−W/τ̃) − τ̃/√(WN)` turns negative, with
/// `τ̃ = S / ln((2τ_W + 1)/(2τ_W − 1))`; the autocovariances then receive the
/// `C(W)/N` bias correction for the estimated mean.
pub fn chain_diagnostics(series: &[f64]) -> Result<Diagnostics> {
    let n = series.len();
    if n < 100 {
        return Err(Error::Config(format!("need at least 100 values for autocorrelation analysis, got {n}")));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("series contains non-finite values".into()));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let gamma0 = autocovariance(&dev, 0);
    let scale = series.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let undefined = Diagnostics {
        trace: series.to_vec(),
        mean,
        acf: vec![],
        tau_int: None,
        tau_int_error: None,
        window: None,
        ess: None,
    };
    if gamma0 <= (1e-14 * scale).powi(2) {
        return Ok(undefined);
    }

    let max_lag = n / 2;
    let mut gamma = vec![gamma0];
    let mut tau = 0.5;
    let mut window = max_lag;
    for w in 1..=max_lag {
        gamma.push(autocovariance(&dev, w));
        tau += gamma[w] / gamma0;
        let tau_tilde = if tau <= 0.5 { f64::MIN_POSITIVE } else { WOLFF_S / ((2.0 * tau + 1.0) / (2.0 * tau - 1.0)).ln() };
        let g = (-(w as f64) / tau_tilde).exp() - tau_tilde / ((w * n) as f64).sqrt();
        if g < 0.0 {
            window = w;
            break;
        }
    }
    let c_w = gamma0 + 2.0 * gamma[1..=window].iter().sum::<f64>();
    let corrected: Vec<f64> = gamma.iter().map(|g| g + c_w / n as f64).collect();
    let c_corr = corrected[0] + 2.0 * corrected[1..=window].iter().sum::<f64>();
    let tau_int = c_corr / (2.0 * corrected[0]);
    if !(tau_int > 0.0) {
        return Ok(undefined);
    }
    let tau_int_error = tau_int * ((4 * window + 2) as f64 / n as f64).sqrt();
    let shown = (2 * window).max(50).min(n - 1);
    while gamma.len() <= shown {
        gamma.push(autocovariance(&dev, gamma.len()));
    }
    let acf = gamma[..=shown].iter().map(|g| g / gamma0).collect();
    Ok(Diagnostics {
        trace: series.to_vec(),
        mean,
        acf,
        tau_int: Some(tau_int),
        tau_int_error: Some(tau_int_error),
        window: Some(window),
        ess: Some(n as f64 / (2.0 * tau_int)),
    })
}
