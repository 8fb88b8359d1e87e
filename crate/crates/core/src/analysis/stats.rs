use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub sd: f64,
    /// `sd / |mean|`; absent when the mean is zero.
    pub cov: Option<f64>,
}

pub fn summary_stats(series: &[f64]) -> Result<SummaryStats> {
    let n = series.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "summary statistics need at least 2 samples, got {n}"
        )));
    }
    crate::error::ensure_finite(series, "series")?;
    if series.iter().all(|v| *v == series[0]) {
        let mean = series[0];
        return Ok(SummaryStats { n, mean, sd: 0.0, cov: (mean != 0.0).then_some(0.0) });
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let var = series.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    let cov = (mean != 0.0).then(|| sd / mean.abs());
    Ok(SummaryStats { n, mean, sd, cov })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleStats {
    #[serde(skip)]
    pub degrees: Vec<f64>,
    pub mean_deg: f64,
    pub sd_deg: f64,
    /// Samples with F_x = 0, reported as 90°.
    pub zero_fx_samples: usize,
}

/// Per-sample `arccot(F_x / F_y)` in degrees, mapped to `[0, 180)`.
pub fn force_angle(fx: &[f64], fy: &[f64]) -> Result<AngleStats> {
    if fx.len() != fy.len() {
        return Err(Error::LengthMismatch(format!(
            "F_x has {} samples, F_y has {}",
            fx.len(),
            fy.len()
        )));
    }
    let mut zero_fx_samples = 0;
    let degrees: Vec<f64> = fx
        .iter()
        .zip(fy)
        .map(|(&x, &y)| {
            if x == 0.0 {
                zero_fx_samples += 1;
                90.0
            } else {
                let d = y.atan2(x).to_degrees().rem_euclid(180.0);
                // rem_euclid can round up to the excluded endpoint
                if d >= 180.0 { 0.0 } else { d }
            }
        })
        .collect();
    let (mean_deg, sd_deg) = if degrees.len() >= 2 {
        let s = summary_stats(&degrees)?;
        (s.mean, s.sd)
    } else {
        (degrees.first().copied().unwrap_or(f64::NAN), 0.0)
    };
    Ok(AngleStats {
        degrees,
        mean_deg,
        sd_deg,
        zero_fx_samples,
    })
}
