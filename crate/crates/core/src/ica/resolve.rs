//! Physical resolution of the ICA order, scale, and sign ambiguities.
//!
//! ICA recovers sources only up to permutation and scale. Here each source
//! is pinned to the sensor it drives hardest, then rescaled so its mixing
//! coefficient on that sensor is exactly one. The recovered source is then
//! the signed wavelength contribution on that sensor in pm, and the force
//! direction follows from the sign of the calibration slope.

use serde::{Deserialize, Serialize};

use crate::classify::{LoadingClass, LoadingKind};
use crate::error::{Error, Result};
use crate::linalg::{abs_cosine, Mat2};
use crate::signal::SensorPair;

/// What a recovered component represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentRole {
    /// Contribution of the pair's F_x on the pair's first sensor.
    ForceX,
    /// Contribution of the pair's F_y on the pair's second sensor.
    ForceY,
    /// Interrogator instability common to both sensors.
    Instability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnmixingEstimate {
    pub pair: SensorPair,
    /// Whitened-space unmixing from FastICA, rows unit-norm.
    pub w_raw: Mat2,
    pub whitening: Mat2,
    pub means: [f64; 2],
    /// Observation-space mixing `(W_raw B)^-1`, columns in ICA output order.
    pub a_hat: Mat2,
    /// Rescaled mixing with unit diagonal, columns in role order:
    /// `x - means = w_re * (centered components)`.
    pub w_re: Mat2,
    /// `order[k]` is the ICA output placed in role slot `k` (channel `k`).
    pub order: [usize; 2],
    /// Sign applied to each role slot's raw output.
    pub signs: [f64; 2],
    /// Scale applied to each role slot's raw output, signed.
    pub scales: [f64; 2],
    pub roles: [ComponentRole; 2],
    pub converged: bool,
    pub iterations: usize,
    pub identifiable: bool,
}

impl UnmixingEstimate {
    /// Maps centered observations to centered components.
    pub fn unmixing(&self) -> Mat2 {
        self.w_re.inverse().expect("rescaled mixing is invertible")
    }
}

/// Everything `resolve_ambiguities` needs from the ICA stage.
#[derive(Debug, Clone, Copy)]
pub struct IcaStage {
    pub w_raw: Mat2,
    pub whitening: Mat2,
    pub means: [f64; 2],
    pub converged: bool,
    pub iterations: usize,
    pub identifiable: bool,
}

const INSTABILITY_DIRECTION: [f64; 2] = [1.0, 1.0];

fn near_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.max(b)
}

/// Channel each ICA output is pinned to, for a pair loaded on both axes.
fn assign_multiaxial(a_hat: &Mat2, prior: &Mat2) -> Result<[usize; 2]> {
    let mut channel_of = [0usize; 2];
    for (j, slot) in channel_of.iter_mut().enumerate() {
        let (m0, m1) = (a_hat.get(0, j).abs(), a_hat.get(1, j).abs());
        *slot = if near_tie(m0, m1) {
            // channel 0 carries x, channel 1 carries y
            let col = a_hat.column(j);
            if abs_cosine(col, prior.column(0)) >= abs_cosine(col, prior.column(1)) {
                0
            } else {
                1
            }
        } else if m0 > m1 {
            0
        } else {
            1
        };
    }
    if channel_of[0] == channel_of[1] {
        return Err(Error::Assignment(format!(
            "both components are dominated by channel {} (mixing estimate {:?})",
            channel_of[0] + 1,
            a_hat.0
        )));
    }
    // order[k] = output assigned to channel k
    Ok(if channel_of[0] == 0 { [0, 1] } else { [1, 0] })
}

/// Picks which output is the force and which is the instability.
///
/// Returns `order` (output per channel slot) and the roles of the slots.
fn assign_uniaxial(a_hat: &Mat2, prior: &Mat2) -> ([usize; 2], [ComponentRole; 2]) {
    let mut best: Option<(f64, usize, bool)> = None;
    for force in 0..2 {
        let inst = 1 - force;
        let fcol = a_hat.column(force);
        let (cx, cy) = (abs_cosine(fcol, prior.column(0)), abs_cosine(fcol, prior.column(1)));
        let score = cx.max(cy) + abs_cosine(a_hat.column(inst), INSTABILITY_DIRECTION);
        if best.is_none_or(|(s, _, _)| score > s) {
            best = Some((score, force, cx >= cy));
        }
    }
    let (_, force, is_x) = best.expect("two candidates scored");
    let inst = 1 - force;
    if is_x {
        ([force, inst], [ComponentRole::ForceX, ComponentRole::Instability])
    } else {
        ([inst, force], [ComponentRole::Instability, ComponentRole::ForceY])
    }
}

/// Orders, rescales, and signs the ICA outputs of one pair.
///
/// `prior` is the pair's calibration matrix (rows are sensors, columns are
/// F_x and F_y); only its column directions are used.
pub fn resolve_ambiguities(
    stage: &IcaStage,
    pair: SensorPair,
    class: &LoadingClass,
    prior: &Mat2,
) -> Result<UnmixingEstimate> {
    let unmix = stage.w_raw.mul(&stage.whitening);
    let a_hat = unmix
        .inverse()
        .ok_or_else(|| Error::Singular("ICA unmixing matrix is singular".into()))?;

    let (order, roles) = match class.kind {
        LoadingKind::Multiaxial => (
            assign_multiaxial(&a_hat, prior)?,
            [ComponentRole::ForceX, ComponentRole::ForceY],
        ),
        LoadingKind::Uniaxial => assign_uniaxial(&a_hat, prior),
    };

    let mut w_re = [[0.0; 2]; 2];
    let mut scales = [0.0; 2];
    for (k, &j) in order.iter().enumerate() {
        let coef = a_hat.get(k, j);
        if coef == 0.0 || !coef.is_finite() {
            return Err(Error::Assignment(format!(
                "component {} has no response on its assigned channel {}",
                j + 1,
                k + 1
            )));
        }
        scales[k] = coef;
        for (i, row) in w_re.iter_mut().enumerate() {
            row[k] = if i == k { 1.0 } else { a_hat.get(i, j) / coef };
        }
    }

    Ok(UnmixingEstimate {
        pair,
        w_raw: stage.w_raw,
        whitening: stage.whitening,
        means: stage.means,
        a_hat,
        w_re: Mat2(w_re),
        order,
        signs: scales.map(f64::signum),
        scales,
        roles,
        converged: stage.converged,
        iterations: stage.iterations,
        identifiable: stage.identifiable,
    })
}
