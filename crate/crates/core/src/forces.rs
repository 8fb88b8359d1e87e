//! Wavelength components to forces.

use serde::{Deserialize, Serialize};

use crate::calibration::CalibrationModel;
use crate::classify::LoadingKind;
use crate::error::{Error, Result};
use crate::ica::{ComponentRole, RecoveredComponents};
use crate::signal::{PlanarForces, SensorPair};

/// Reconstructed forces in N, with the instability trace in pm when a
/// uniaxial pair produced one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceSeries {
    pub sample_rate: f64,
    pub start_time: f64,
    pub fx1: Vec<f64>,
    pub fy1: Vec<f64>,
    pub fx2: Vec<f64>,
    pub fy2: Vec<f64>,
    pub fz: Vec<f64>,
    pub nins_pm: Option<Vec<f64>>,
}

impl ForceSeries {
    pub fn new(
        sample_rate: f64,
        start_time: f64,
        planar: PlanarForces,
        fz: Vec<f64>,
        nins_pm: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = planar.len();
        let lens = [planar.fy1.len(), planar.fx2.len(), planar.fy2.len(), fz.len()];
        if lens.iter().any(|&l| l != n) || nins_pm.as_ref().is_some_and(|v| v.len() != n) {
            return Err(Error::LengthMismatch("force columns differ in length".into()));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidInput(format!("sample rate must be positive, got {sample_rate}")));
        }
        let PlanarForces { fx1, fy1, fx2, fy2 } = planar;
        Ok(ForceSeries {
            sample_rate,
            start_time,
            fx1,
            fy1,
            fx2,
            fy2,
            fz,
            nins_pm,
        })
    }

    pub fn len(&self) -> usize {
        self.fx1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fx1.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.start_time + i as f64 / self.sample_rate
    }

    /// Named columns in output order.
    pub fn columns(&self) -> [(ForceColumn, &[f64]); 5] {
        [
            (ForceColumn::Fx1, &self.fx1),
            (ForceColumn::Fy1, &self.fy1),
            (ForceColumn::Fx2, &self.fx2),
            (ForceColumn::Fy2, &self.fy2),
            (ForceColumn::Fz, &self.fz),
        ]
    }

    pub fn column(&self, col: ForceColumn) -> &[f64] {
        match col {
            ForceColumn::Fx1 => &self.fx1,
            ForceColumn::Fy1 => &self.fy1,
            ForceColumn::Fx2 => &self.fx2,
            ForceColumn::Fy2 => &self.fy2,
            ForceColumn::Fz => &self.fz,
        }
    }

    /// Mean of the two per-pair F_x estimates.
    pub fn fused_fx(&self) -> Vec<f64> {
        self.fx1.iter().zip(&self.fx2).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// Samples whose force magnitude `|(F_x, F_y1, F_z)|` exceeds `capacity`.
    pub fn capacity_exceedances(&self, capacity: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| {
                let fx = 0.5 * (self.fx1[i] + self.fx2[i]);
                (fx * fx + self.fy1[i] * self.fy1[i] + self.fz[i] * self.fz[i]).sqrt() > capacity
            })
            .collect()
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.start >= range.end || range.end > self.len() {
            return Err(Error::InvalidInput(format!(
                "window {}..{} is empty or outside 0..{}",
                range.start,
                range.end,
                self.len()
            )));
        }
        let cut = |v: &Vec<f64>| v[range.clone()].to_vec();
        Ok(ForceSeries {
            sample_rate: self.sample_rate,
            start_time: self.time(range.start),
            fx1: cut(&self.fx1),
            fy1: cut(&self.fy1),
            fx2: cut(&self.fx2),
            fy2: cut(&self.fy2),
            fz: cut(&self.fz),
            nins_pm: self.nins_pm.as_ref().map(cut),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForceColumn {
    Fx1,
    Fy1,
    Fx2,
    Fy2,
    Fz,
}

impl ForceColumn {
    pub const ALL: [ForceColumn; 5] = [
        ForceColumn::Fx1,
        ForceColumn::Fy1,
        ForceColumn::Fx2,
        ForceColumn::Fy2,
        ForceColumn::Fz,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ForceColumn::Fx1 => "F_x1",
            ForceColumn::Fy1 => "F_y1",
            ForceColumn::Fx2 => "F_x2",
            ForceColumn::Fy2 => "F_y2",
            ForceColumn::Fz => "F_z",
        }
    }
}

fn diagonal(calib: &CalibrationModel, pair: SensorPair) -> Result<[f64; 2]> {
    let m = calib.pair_matrix(pair);
    let d = [m.get(0, 0), m.get(1, 1)];
    if d.iter().any(|v| *v == 0.0 || !v.is_finite()) {
        return Err(Error::Config(format!(
            "calibration diagonal of pair {} has a zero entry",
            pair.label()
        )));
    }
    Ok(d)
}

/// Planar forces from the recovered components, dividing each force
/// contribution by the calibration diagonal. A force absent from a
/// uniaxial pair is reported as zero.
pub fn components_to_forces(comps: &RecoveredComponents, calib: &CalibrationModel) -> Result<PlanarForces> {
    let n = comps.len();
    let mut out: [[Vec<f64>; 2]; 2] = Default::default();
    for pair in SensorPair::BOTH {
        let d = diagonal(calib, pair)?;
        let pc = comps.pair(pair);
        for (axis, role) in [ComponentRole::ForceX, ComponentRole::ForceY].into_iter().enumerate() {
            out[pair.index()][axis] = match pc.component(role) {
                Some(c) => c.iter().map(|v| v / d[axis]).collect(),
                None => vec![0.0; n],
            };
        }
    }
    let [[fx1, fy1], [fx2, fy2]] = out;
    Ok(PlanarForces { fx1, fy1, fx2, fy2 })
}

/// Instability trace from the first uniaxial pair, if any.
pub fn instability_trace(comps: &RecoveredComponents) -> Option<Vec<f64>> {
    comps
        .pairs
        .iter()
        .filter(|p| p.class.kind == LoadingKind::Uniaxial)
        .find_map(|p| p.component(ComponentRole::Instability).map(<[f64]>::to_vec))
}

/// `F_z = (F_y2 - k_n F_y1 cos α) / sin α`.
pub fn estimate_fz(fy1: &[f64], fy2: &[f64], calib: &CalibrationModel) -> Result<Vec<f64>> {
    if fy1.len() != fy2.len() {
        return Err(Error::LengthMismatch(format!(
            "F_y1 has {} samples, F_y2 has {}",
            fy1.len(),
            fy2.len()
        )));
    }
    let (s, c) = calib.alpha().sin_cos();
    if s.abs() < 1e-12 {
        return Err(Error::Config("bend angle has zero sine; F_z is unobservable".into()));
    }
    let kc = calib.k_n() * c;
    Ok(fy1.iter().zip(fy2).map(|(a, b)| (b - kc * a) / s).collect())
}

/// Full force set from components.
pub fn reconstruct(comps: &RecoveredComponents, calib: &CalibrationModel) -> Result<ForceSeries> {
    let planar = components_to_forces(comps, calib)?;
    let fz = estimate_fz(&planar.fy1, &planar.fy2, calib)?;
    ForceSeries::new(comps.sample_rate, comps.start_time, planar, fz, instability_trace(comps))
}

pub const DEFAULT_CONSISTENCY_TOLERANCE_N: f64 = 0.005;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub tolerance: f64,
    #[serde(skip)]
    pub abs_diff: Vec<f64>,
    pub max_abs_diff: f64,
    pub mean_abs_diff: f64,
    pub fraction_within: f64,
    /// The two prongs disagree beyond tolerance somewhere.
    pub flagged: bool,
}

/// Compares the F_x estimates of the two prongs.
pub fn consistency_check(fx1: &[f64], fx2: &[f64], tolerance: f64) -> Result<ConsistencyReport> {
    if fx1.len() != fx2.len() {
        return Err(Error::LengthMismatch(format!(
            "F_x1 has {} samples, F_x2 has {}",
            fx1.len(),
            fx2.len()
        )));
    }
    if !(tolerance >= 0.0) {
        return Err(Error::Config(format!("tolerance must be non-negative, got {tolerance}")));
    }
    let abs_diff: Vec<f64> = fx1.iter().zip(fx2).map(|(a, b)| (a - b).abs()).collect();
    let n = abs_diff.len();
    let within = abs_diff.iter().filter(|d| **d <= tolerance).count();
    let max_abs_diff = abs_diff.iter().fold(0.0_f64, |m, v| m.max(*v));
    let mean_abs_diff = if n == 0 { 0.0 } else { abs_diff.iter().sum::<f64>() / n as f64 };
    Ok(ConsistencyReport {
        tolerance,
        max_abs_diff,
        mean_abs_diff,
        fraction_within: if n == 0 { 1.0 } else { within as f64 / n as f64 },
        flagged: within < n,
        abs_diff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{planar_forces_from_trajectory, ForceTrajectory, ProngModel};
    use proptest::prelude::*;

    #[test]
    fn default_sensitivity_example() {
        let calib = CalibrationModel::reference_fitted();
        let d = diagonal(&calib, SensorPair::First).unwrap();
        // 0.36 pm on a 0.0036 nm/N sensor
        assert!((0.36 / d[0] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn fz_default_constants() {
        let calib = CalibrationModel::reference_fitted();
        let fz = estimate_fz(&[0.2, 0.0, -0.3], &[0.2, 0.01, -0.25], &calib).unwrap();
        assert!(fz[0].abs() < 1e-12);
        assert!((fz[1] - 0.041).abs() < 1e-12);
        assert!((fz[2] - 4.1 * 0.05).abs() < 1e-12);
    }

    #[test]
    fn fz_round_trip_through_forward_model() {
        let prong = ProngModel {
            k_n: 1.0,
            alpha: std::f64::consts::FRAC_PI_4,
            ..ProngModel::default()
        };
        let traj = ForceTrajectory::new(1.0, vec![0.2], vec![0.05], vec![0.02]).unwrap();
        let p = planar_forces_from_trajectory(&traj, &prong).unwrap();
        let want = 0.05 * std::f64::consts::FRAC_PI_4.cos() + 0.02 * std::f64::consts::FRAC_PI_4.sin();
        assert!((p.fy2[0] - want).abs() < 1e-15);
        let calib = CalibrationModel::from_pm(
            crate::linalg::Mat2::new(3.6, 0.09, 0.4, -4.2),
            crate::linalg::Mat2::new(1.6, 0.3, 0.6, -1.5),
            [0.0; 4],
            1.0,
            std::f64::consts::FRAC_PI_4,
            1.0,
        )
        .unwrap();
        let fz = estimate_fz(&p.fy1, &p.fy2, &calib).unwrap();
        assert!((fz[0] - 0.02).abs() < 1e-12);
        assert!((p.fx1[0] - 0.2).abs() < 1e-15 && (p.fy1[0] - 0.05).abs() < 1e-15);
    }

    #[test]
    fn zero_sine_rejected() {
        let calib = CalibrationModel::from_pm(
            crate::linalg::Mat2::IDENTITY,
            crate::linalg::Mat2::IDENTITY,
            [0.0; 4],
            1.0,
            0.0,
            1.0,
        );
        if let Ok(c) = calib {
            assert!(matches!(estimate_fz(&[0.0], &[0.0], &c), Err(Error::Config(_))));
        }
    }

    #[test]
    fn consistency_flags_bulge_failure() {
        let fx1 = vec![0.256; 100];
        let same = consistency_check(&fx1, &fx1, 1e-9).unwrap();
        assert_eq!(same.fraction_within, 1.0);
        assert!(!same.flagged);
        let fx2: Vec<f64> = fx1.iter().map(|v| v + 0.5).collect();
        let bad = consistency_check(&fx1, &fx2, DEFAULT_CONSISTENCY_TOLERANCE_N).unwrap();
        assert!(bad.flagged);
        assert_eq!(bad.fraction_within, 0.0);
        assert!((bad.max_abs_diff - 0.5).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn fz_matches_default_shortcut(fy1 in prop::collection::vec(-1.0..1.0f64, 1..50), d in -0.2..0.2f64) {
            let calib = CalibrationModel::reference_fitted();
            let fy2: Vec<f64> = fy1.iter().map(|v| v + d).collect();
            let fz = estimate_fz(&fy1, &fy2, &calib).unwrap();
            for (z, (a, b)) in fz.iter().zip(fy1.iter().zip(&fy2)) {
                prop_assert!((z - 4.1 * (b - a)).abs() < 1e-12);
            }
        }

        #[test]
        fn fz_is_exact_inverse(fy in -1.0..1.0f64, fz in -1.0..1.0f64, alpha in 0.1..1.4f64, kn in 0.5..2.0f64) {
            let prong = ProngModel { k_n: kn, alpha, ..ProngModel::default() };
            let traj = ForceTrajectory::new(1.0, vec![0.0], vec![fy], vec![fz]).unwrap();
            let p = planar_forces_from_trajectory(&traj, &prong).unwrap();
            let calib = CalibrationModel::from_pm(
                crate::linalg::Mat2::IDENTITY,
                crate::linalg::Mat2::IDENTITY,
                [0.0; 4],
                kn,
                alpha,
                1.0,
            ).unwrap();
            let got = estimate_fz(&p.fy1, &p.fy2, &calib).unwrap();
            prop_assert!((got[0] - fz).abs() < 1e-12);
        }
    }
}
