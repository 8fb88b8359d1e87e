use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::ols::ols;
use crate::error::{Error, Result};

pub const MIN_ADF_SAMPLES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdfRegression {
    Constant,
    ConstantTrend,
}

impl AdfRegression {
    fn deterministic_terms(self) -> usize {
        match self {
            AdfRegression::Constant => 1,
            AdfRegression::ConstantTrend => 2,
        }
    }
}

/// MacKinnon (1994) response-surface p-value for a single unit root.
pub fn mackinnon_p(tau: f64, regression: AdfRegression) -> f64 {
    let (max, min, star, small, large): (f64, f64, f64, &[f64], &[f64]) = match regression {
        AdfRegression::Constant => (
            2.74,
            -18.83,
            -1.61,
            &[2.1659, 1.4412, 0.038269],
            &[1.7339, 0.93202, -0.12745, -0.010368],
        ),
        AdfRegression::ConstantTrend => (
            0.7,
            -16.18,
            -2.89,
            &[3.2512, 1.6047, 0.049588],
            &[2.5261, 0.61654, -0.37956, -0.060285],
        ),
    };
    if tau > max {
        return 1.0;
    }
    if tau < min {
        return 0.0;
    }
    let coefs = if tau <= star { small } else { large };
    let z = coefs.iter().rev().fold(0.0, |acc, c| acc * tau + c);
    Normal::standard().cdf(z)
}

pub fn default_max_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    pub statistic: f64,
    pub p_value: f64,
    pub used_lag: usize,
    pub nobs: usize,
}

/// Regression of `Δy_t` on `[y_{t-1}, Δy_{t-1..t-lag}, 1, (t)]` over the
/// last `nobs` differences.
fn design(y: &[f64], dy: &[f64], lag: usize, nobs: usize, regression: AdfRegression) -> (DMatrix<f64>, DVector<f64>) {
    let m = dy.len();
    let k = 1 + lag + regression.deterministic_terms();
    let first = m - nobs;
    let x = DMatrix::from_fn(nobs, k, |r, c| {
        let t = first + r;
        if c == 0 {
            y[t]
        } else if c <= lag {
            dy[t - c]
        } else if c == lag + 1 {
            1.0
        } else {
            (r + 1) as f64
        }
    });
    let target = DVector::from_iterator(nobs, dy[first..].iter().copied());
    (x, target)
}

/// Augmented Dickey-Fuller test, lag chosen by AIC on a common sample.
pub fn adf(series: &[f64], regression: AdfRegression, max_lag: Option<usize>) -> Result<AdfResult> {
    let n = series.len();
    if n < MIN_ADF_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "ADF needs at least {MIN_ADF_SAMPLES} samples, got {n}"
        )));
    }
    crate::error::ensure_finite(series, "series")?;
    let dy: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    let m = dy.len();
    let nt = regression.deterministic_terms();
    let cap = (m / 2).saturating_sub(nt + 1);
    let max_lag = max_lag.unwrap_or_else(|| default_max_lag(n)).min(cap);

    // AIC search over a sample common to all candidate lags
    let common = m - max_lag;
    let mut best: Option<(f64, usize)> = None;
    for lag in 0..=max_lag {
        let (x, target) = design(series, &dy, lag, common, regression);
        if let Some(fit) = ols(&x, &target) {
            let k = x.ncols() as f64;
            let nobs = common as f64;
            let aic = nobs * ((std::f64::consts::TAU).ln() + (fit.ssr / nobs).ln() + 1.0) + 2.0 * k;
            if best.is_none_or(|(b, _)| aic < b) {
                best = Some((aic, lag));
            }
        }
    }
    let (_, used_lag) = best.ok_or_else(|| {
        Error::Degenerate("ADF regression is singular for every lag order".into())
    })?;

    let nobs = m - used_lag;
    let (x, target) = design(series, &dy, used_lag, nobs, regression);
    let fit = ols(&x, &target).ok_or_else(|| Error::Degenerate("ADF regression is singular".into()))?;
    if !(fit.se[0] > 0.0) {
        return Err(Error::Degenerate("ADF regression fits exactly; the t-statistic is undefined".into()));
    }
    let statistic = fit.beta[0] / fit.se[0];
    Ok(AdfResult {
        statistic,
        p_value: mackinnon_p(statistic, regression),
        used_lag,
        nobs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StationarityVerdict {
    Stationary,
    FirstDifferenceStationary,
    NonStationary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdfOrders {
    pub level: AdfResult,
    /// Run only when the level test does not reject.
    pub first_difference: Option<AdfResult>,
    pub verdict: StationarityVerdict,
}

impl AdfOrders {
    pub fn p0(&self) -> f64 {
        self.level.p_value
    }

    pub fn p1(&self) -> Option<f64> {
        self.first_difference.map(|r| r.p_value)
    }
}

/// ADF at d = 0 and, if needed, at d = 1.
pub fn adf_orders(series: &[f64], regression: AdfRegression, max_lag: Option<usize>, alpha: f64) -> Result<AdfOrders> {
    let level = adf(series, regression, max_lag)?;
    if level.p_value < alpha {
        return Ok(AdfOrders {
            level,
            first_difference: None,
            verdict: StationarityVerdict::Stationary,
        });
    }
    let diff: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    let d1 = adf(&diff, regression, max_lag)?;
    let verdict = if d1.p_value < alpha {
        StationarityVerdict::FirstDifferenceStationary
    } else {
        StationarityVerdict::NonStationary
    };
    Ok(AdfOrders {
        level,
        first_difference: Some(d1),
        verdict,
    })
}
