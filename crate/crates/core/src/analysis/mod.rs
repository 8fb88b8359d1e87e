//! Stability and stationarity statistics for reconstructed force series.

mod adf;
mod kpss;
mod ljung_box;
mod ols;
mod stats;

pub use adf::{
    adf, adf_orders, default_max_lag, mackinnon_p, AdfOrders, AdfRegression, AdfResult, StationarityVerdict,
    MIN_ADF_SAMPLES,
};
pub use kpss::{default_bandwidth, kpss, Kpss, KpssRegression, MIN_KPSS_SAMPLES};
pub use ljung_box::{autocorrelations, default_lags, ljung_box, LjungBox};
pub use stats::{force_angle, summary_stats, AngleStats, SummaryStats};

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forces::{ForceColumn, ForceSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestConfig {
    /// Ljung-Box lags; `min(10, n/5)` when absent.
    pub lb_lags: Option<usize>,
    pub kpss_regression: KpssRegression,
    pub adf_regression: AdfRegression,
    /// Largest ADF lag searched; `⌊12 (n/100)^¼⌋` when absent.
    pub adf_max_lag: Option<usize>,
    pub alpha: f64,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            lb_lags: None,
            kpss_regression: KpssRegression::Trend,
            adf_regression: AdfRegression::ConstantTrend,
            adf_max_lag: None,
            alpha: 0.05,
        }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lb_lags == Some(0) {
            return Err(Error::Config("Ljung-Box lags must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Statistics of one force column, in mN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub column: ForceColumn,
    pub n: usize,
    pub mean_mn: f64,
    pub sd_mn: f64,
    pub cov: Option<f64>,
    /// Angle of `(F_xi, F_yi)`; only reported for the F_x columns.
    pub angle: Option<AngleStats>,
    pub ljung_box: Option<LjungBox>,
    pub kpss: Option<Kpss>,
    pub adf: Option<AdfOrders>,
    pub verdict: Option<StationarityVerdict>,
    /// Why any of the tests above is missing.
    pub notes: Vec<String>,
}

impl StationarityReport {
    pub fn lb_pvalue(&self) -> Option<f64> {
        self.ljung_box.map(|r| r.p_value)
    }

    pub fn kpss_pvalue(&self) -> Option<f64> {
        self.kpss.map(|r| r.p_value)
    }
}

fn keep<T>(notes: &mut Vec<String>, name: &str, r: Result<T>) -> Option<T> {
    r.map_err(|e| notes.push(format!("{name}: {e}"))).ok()
}

/// Runs every statistic on one series given in N.
pub fn analyze_series(
    column: ForceColumn,
    series_n: &[f64],
    partner_fy: Option<&[f64]>,
    cfg: &TestConfig,
) -> Result<StationarityReport> {
    cfg.validate()?;
    let mn: Vec<f64> = series_n.iter().map(|v| v * 1000.0).collect();
    let s = summary_stats(&mn)?;
    let mut notes = Vec::new();
    let angle = partner_fy.and_then(|fy| keep(&mut notes, "angle", force_angle(series_n, fy)));
    let lags = cfg.lb_lags.unwrap_or_else(|| default_lags(mn.len()));
    let ljung_box = keep(&mut notes, "ljung-box", ljung_box(&mn, lags));
    let kpss = keep(&mut notes, "kpss", kpss(&mn, cfg.kpss_regression, None));
    let adf = keep(&mut notes, "adf", adf_orders(&mn, cfg.adf_regression, cfg.adf_max_lag, cfg.alpha));
    Ok(StationarityReport {
        column,
        n: s.n,
        mean_mn: s.mean,
        sd_mn: s.sd,
        cov: s.cov,
        angle,
        ljung_box,
        kpss,
        verdict: adf.map(|a| a.verdict),
        adf,
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub window: [usize; 2],
    pub config: TestConfig,
    pub columns: Vec<StationarityReport>,
}

impl SessionReport {
    pub fn column(&self, col: ForceColumn) -> Option<&StationarityReport> {
        self.columns.iter().find(|r| r.column == col)
    }
}

/// Analyses every force column over `window` (sample indices).
pub fn analyze_session(forces: &ForceSeries, window: Range<usize>, cfg: &TestConfig) -> Result<SessionReport> {
    cfg.validate()?;
    let w = forces.slice(window.clone())?;
    let columns = ForceColumn::ALL
        .into_iter()
        .map(|col| {
            let partner = match col {
                ForceColumn::Fx1 => Some(w.fy1.as_slice()),
                ForceColumn::Fx2 => Some(w.fy2.as_slice()),
                _ => None,
            };
            analyze_series(col, w.column(col), partner, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SessionReport {
        window: [window.start, window.end],
        config: *cfg,
        columns,
    })
}
