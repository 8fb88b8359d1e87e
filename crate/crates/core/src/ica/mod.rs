//! Per-pair blind separation of force contributions and instability.
//!
//! Each sensor pair is whitened, separated by FastICA into two components,
//! and the components are pinned to physical meaning by
//! [`resolve_ambiguities`]. Component means are reattached so that
//! `w_re * components + offsets` reproduces the observations.

mod fastica;
mod resolve;
mod whiten;

pub use fastica::{fastica_pair, gaussianity_threshold, FastIcaResult, IcaConfig, Orthogonalization};
pub use resolve::{resolve_ambiguities, ComponentRole, IcaStage, UnmixingEstimate};
pub use whiten::{center_whiten, Whitened, MIN_WHITEN_SAMPLES};

use serde::{Deserialize, Serialize};

use crate::calibration::CalibrationModel;
use crate::classify::{LoadingClass, LoadingKind};
use crate::error::{Error, Result};
use crate::linalg::{abs_cosine, sym_eigen, Mat2};
use crate::signal::{SensorPair, WavelengthFrame};

/// Two recovered components of one sensor pair, in pm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairComponents {
    pub pair: SensorPair,
    pub class: LoadingClass,
    /// Role of each slot; slot `k` is pinned to the pair's channel `k`.
    pub roles: [ComponentRole; 2],
    #[serde(skip)]
    pub components: [Vec<f64>; 2],
    /// Unit-diagonal mixing that maps components back to the channels.
    pub w_re: Mat2,
    /// ICA diagnostics; absent when the pair was too degenerate for ICA.
    pub estimate: Option<UnmixingEstimate>,
    /// Set when the calibration directions stood in for ICA.
    pub fallback: Option<String>,
    /// `||w_re s + offsets - x||_F / ||x||_F`.
    pub reconstruction_error: f64,
}

impl PairComponents {
    pub fn component(&self, role: ComponentRole) -> Option<&[f64]> {
        self.roles
            .iter()
            .position(|&r| r == role)
            .map(|k| self.components[k].as_slice())
    }

    pub fn converged(&self) -> bool {
        self.estimate.as_ref().is_none_or(|e| e.converged)
    }
}

/// Recovered components for both pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveredComponents {
    pub sample_rate: f64,
    pub start_time: f64,
    pub pairs: [PairComponents; 2],
}

impl RecoveredComponents {
    pub fn pair(&self, pair: SensorPair) -> &PairComponents {
        &self.pairs[pair.index()]
    }

    pub fn len(&self) -> usize {
        self.pairs[0].components[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn converged(&self) -> bool {
        self.pairs.iter().all(PairComponents::converged)
    }
}

fn pair_seed(seed: u64, pair: SensorPair) -> u64 {
    seed.wrapping_add(pair.index() as u64)
}

/// Mixing built from calibration directions when the data are too
/// degenerate to whiten. Columns follow the same slot conventions as the
/// ICA path.
fn fallback_mixing(a: &[f64], b: &[f64], class: &LoadingClass, prior: &Mat2) -> ([ComponentRole; 2], Mat2) {
    let unit = |col: [f64; 2], k: usize| {
        let c = col[k];
        if c == 0.0 {
            None
        } else {
            Some([col[0] / c, col[1] / c])
        }
    };
    let cols = match class.kind {
        LoadingKind::Multiaxial => Some((
            [ComponentRole::ForceX, ComponentRole::ForceY],
            unit(prior.column(0), 0),
            unit(prior.column(1), 1),
        )),
        LoadingKind::Uniaxial => {
            // principal direction of the (possibly rank-one) data
            let means = [whiten::mean(a), whiten::mean(b)];
            let cov = whiten::covariance(a, b, means);
            let (_, e) = sym_eigen(&cov);
            let dir = e.column(0);
            let is_x = cov.get(0, 0) + cov.get(1, 1) == 0.0
                || abs_cosine(dir, prior.column(0)) >= abs_cosine(dir, prior.column(1));
            if is_x {
                Some((
                    [ComponentRole::ForceX, ComponentRole::Instability],
                    unit(prior.column(0), 0),
                    Some([1.0, 1.0]),
                ))
            } else {
                Some((
                    [ComponentRole::Instability, ComponentRole::ForceY],
                    Some([1.0, 1.0]),
                    unit(prior.column(1), 1),
                ))
            }
        }
    };
    match cols {
        Some((roles, Some(c0), Some(c1))) if Mat2::new(c0[0], c1[0], c0[1], c1[1]).inverse().is_some() => {
            let mut m = Mat2::new(c0[0], c1[0], c0[1], c1[1]);
            m.0[0][0] = 1.0;
            m.0[1][1] = 1.0;
            (roles, m)
        }
        // Calibration without usable diagonal: leave channels as they are.
        _ => ([ComponentRole::ForceX, ComponentRole::ForceY], Mat2::IDENTITY),
    }
}

fn relative_frobenius(a: &[f64], b: &[f64], w_re: &Mat2, comps: &[Vec<f64>; 2], offsets: [f64; 2]) -> f64 {
    let (mut err, mut norm) = (0.0, 0.0);
    for t in 0..a.len() {
        let r = w_re.apply([comps[0][t], comps[1][t]]);
        err += (r[0] + offsets[0] - a[t]).powi(2) + (r[1] + offsets[1] - b[t]).powi(2);
        norm += a[t] * a[t] + b[t] * b[t];
    }
    if norm == 0.0 {
        err.sqrt()
    } else {
        (err / norm).sqrt()
    }
}

/// Separates one sensor pair.
pub fn decouple_pair(
    frame: &WavelengthFrame,
    pair: SensorPair,
    class: &LoadingClass,
    calib: &CalibrationModel,
    cfg: &IcaConfig,
) -> Result<PairComponents> {
    cfg.validate()?;
    let (a, b) = frame.pair(pair);
    let prior = calib.pair_matrix(pair);
    let offsets = calib.pair_offsets(pair);

    let (roles, w_re, estimate, fallback) = match center_whiten(a, b) {
        Ok(wh) => {
            let pair_cfg = cfg.with_seed(pair_seed(cfg.rng_seed, pair));
            let ica = fastica_pair(&wh.data, &pair_cfg)?;
            let stage = IcaStage {
                w_raw: ica.w,
                whitening: wh.whitening,
                means: wh.means,
                converged: ica.converged,
                iterations: ica.iterations,
                identifiable: ica.identifiable,
            };
            let est = resolve_ambiguities(&stage, pair, class, &prior)?;
            (est.roles, est.w_re, Some(est), None)
        }
        Err(Error::Degenerate(why)) => {
            let (roles, w_re) = fallback_mixing(a, b, class, &prior);
            (roles, w_re, None, Some(why))
        }
        Err(e) => return Err(e),
    };

    // components = w_re^-1 (x - offsets), which keeps the means attached
    let unmix = w_re
        .inverse()
        .ok_or_else(|| Error::Singular(format!("rescaled mixing of pair {} is singular", pair.label())))?;
    let (c0, c1): (Vec<f64>, Vec<f64>) = a
        .iter()
        .zip(b)
        .map(|(&x0, &x1)| {
            let s = unmix.apply([x0 - offsets[0], x1 - offsets[1]]);
            (s[0], s[1])
        })
        .unzip();
    let components = [c0, c1];
    let reconstruction_error = relative_frobenius(a, b, &w_re, &components, offsets);

    Ok(PairComponents {
        pair,
        class: class.clone(),
        roles,
        components,
        w_re,
        estimate,
        fallback,
        reconstruction_error,
    })
}

/// Separates both sensor pairs of a (filtered) frame.
pub fn decouple_frame(
    frame: &WavelengthFrame,
    classes: &[LoadingClass; 2],
    calib: &CalibrationModel,
    cfg: &IcaConfig,
) -> Result<RecoveredComponents> {
    let first = decouple_pair(frame, SensorPair::First, &classes[0], calib, cfg)?;
    let second = decouple_pair(frame, SensorPair::Second, &classes[1], calib, cfg)?;
    Ok(RecoveredComponents {
        sample_rate: frame.sample_rate(),
        start_time: frame.start_time(),
        pairs: [first, second],
    })
}
