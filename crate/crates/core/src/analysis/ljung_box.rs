use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LjungBox {
    pub lags: usize,
    pub q: f64,
    pub p_value: f64,
}

/// Sample autocorrelations at lags `1..=lags`.
pub fn autocorrelations(series: &[f64], lags: usize) -> Result<Vec<f64>> {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let c0: f64 = dev.iter().map(|d| d * d).sum();
    let scale = series.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(c0 > (scale * 1e-12).powi(2) * n as f64) {
        return Err(Error::Degenerate("series is constant; autocorrelations are undefined".into()));
    }
    Ok((1..=lags)
        .map(|k| dev[k..].iter().zip(&dev).map(|(a, b)| a * b).sum::<f64>() / c0)
        .collect())
}

/// Chi-squared upper tail.
pub(crate) fn chi2_sf(x: f64, dof: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        gamma_ur(dof / 2.0, x / 2.0).clamp(0.0, 1.0)
    }
}

pub fn default_lags(n: usize) -> usize {
    (n / 5).clamp(1, 10)
}

pub fn ljung_box(series: &[f64], lags: usize) -> Result<LjungBox> {
    let n = series.len();
    if lags == 0 {
        return Err(Error::Config("Ljung-Box needs at least one lag".into()));
    }
    if n <= lags + 1 {
        return Err(Error::InsufficientData(format!(
            "Ljung-Box with {lags} lags needs more than {} samples, got {n}",
            lags + 1
        )));
    }
    crate::error::ensure_finite(series, "series")?;
    let rho = autocorrelations(series, lags)?;
    let nf = n as f64;
    let q = nf * (nf + 2.0) * rho.iter().enumerate().map(|(i, r)| r * r / (nf - (i + 1) as f64)).sum::<f64>();
    Ok(LjungBox {
        lags,
        q,
        p_value: chi2_sf(q, lags as f64),
    })
}
