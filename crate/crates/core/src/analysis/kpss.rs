use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_KPSS_SAMPLES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KpssRegression {
    /// Stationary around a constant.
    Level,
    /// Stationary around a linear trend.
    Trend,
}

impl KpssRegression {
    fn critical_values(self) -> [f64; 4] {
        match self {
            KpssRegression::Level => [0.347, 0.463, 0.574, 0.739],
            KpssRegression::Trend => [0.119, 0.146, 0.176, 0.216],
        }
    }
}

const KPSS_PVALUES: [f64; 4] = [0.10, 0.05, 0.025, 0.01];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kpss {
    pub regression: KpssRegression,
    pub statistic: f64,
    pub p_value: f64,
    pub bandwidth: usize,
    /// The statistic fell outside the tabulated range and `p_value` is a bound.
    pub out_of_table: bool,
}

pub fn default_bandwidth(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

fn residuals(series: &[f64], regression: KpssRegression) -> Vec<f64> {
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    match regression {
        KpssRegression::Level => series.iter().map(|v| v - mean).collect(),
        KpssRegression::Trend => {
            let tm = (n - 1.0) / 2.0;
            let (mut sxy, mut sxx) = (0.0, 0.0);
            for (t, v) in series.iter().enumerate() {
                let dt = t as f64 - tm;
                sxy += dt * (v - mean);
                sxx += dt * dt;
            }
            let slope = sxy / sxx;
            series
                .iter()
                .enumerate()
                .map(|(t, v)| v - mean - slope * (t as f64 - tm))
                .collect()
        }
    }
}

/// Interpolates the tabulated p-values; the table is increasing in the
/// statistic and decreasing in p.
fn interpolate(stat: f64, crit: [f64; 4]) -> (f64, bool) {
    if stat < crit[0] {
        return (KPSS_PVALUES[0], true);
    }
    if stat > crit[3] {
        return (KPSS_PVALUES[3], true);
    }
    for i in 0..3 {
        if stat <= crit[i + 1] {
            let w = (stat - crit[i]) / (crit[i + 1] - crit[i]);
            return (KPSS_PVALUES[i] + w * (KPSS_PVALUES[i + 1] - KPSS_PVALUES[i]), false);
        }
    }
    unreachable!("statistic lies inside the table")
}

pub fn kpss(series: &[f64], regression: KpssRegression, bandwidth: Option<usize>) -> Result<Kpss> {
    let n = series.len();
    if n < MIN_KPSS_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "KPSS needs at least {MIN_KPSS_SAMPLES} samples, got {n}"
        )));
    }
    crate::error::ensure_finite(series, "series")?;
    let bandwidth = bandwidth.unwrap_or_else(|| default_bandwidth(n)).min(n - 1);
    let e = residuals(series, regression);
    let scale = series.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut s = e.iter().map(|v| v * v).sum::<f64>();
    if !(s > (scale * 1e-12).powi(2) * n as f64) {
        return Ok(Kpss {
            regression,
            statistic: 0.0,
            p_value: KPSS_PVALUES[0],
            bandwidth,
            out_of_table: true,
        });
    }
    for lag in 1..=bandwidth {
        let w = 1.0 - lag as f64 / (bandwidth + 1) as f64;
        s += 2.0 * w * e[lag..].iter().zip(&e).map(|(a, b)| a * b).sum::<f64>();
    }
    let long_run = s / n as f64;
    let mut partial = 0.0;
    let eta = e
        .iter()
        .map(|v| {
            partial += v;
            partial * partial
        })
        .sum::<f64>()
        / (n as f64 * n as f64);
    let statistic = eta / long_run;
    let (p_value, out_of_table) = interpolate(statistic, regression.critical_values());
    Ok(Kpss {
        regression,
        statistic,
        p_value,
        bandwidth,
        out_of_table,
    })
}
