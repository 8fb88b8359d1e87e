//! Time-series containers, the prong mechanics, and the forward simulator.
//!
//! All wavelength shifts are carried in picometres. The simulator maps a
//! ground-truth force trajectory through the affine sensor model and adds a
//! slowly varying interrogator instability, keeping every additive term so
//! tests can compare recovered components against the truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calibration::CalibrationModel;
use crate::error::{ensure_finite, Error, Result};

/// Default measuring capacity in newtons.
pub const DEFAULT_CAPACITY_N: f64 = 1.0;

/// One of the two sensor pairs: sensors 1–2 or sensors 3–4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SensorPair {
    #[serde(rename = "1-2")]
    First,
    #[serde(rename = "3-4")]
    Second,
}

impl SensorPair {
    pub const BOTH: [SensorPair; 2] = [SensorPair::First, SensorPair::Second];

    /// Zero-based channel indices of the pair.
    pub fn channels(self) -> [usize; 2] {
        match self {
            SensorPair::First => [0, 1],
            SensorPair::Second => [2, 3],
        }
    }

    pub fn index(self) -> usize {
        match self {
            SensorPair::First => 0,
            SensorPair::Second => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SensorPair::First => "1-2",
            SensorPair::Second => "3-4",
        }
    }
}

/// Time-aligned wavelength shifts from sensors 1–4, in picometres.
#[derive(Debug, Clone, PartialEq)]
pub struct WavelengthFrame {
    sample_rate: f64,
    start_time: f64,
    channels: [Vec<f64>; 4],
}

impl WavelengthFrame {
    pub fn new(sample_rate: f64, channels: [Vec<f64>; 4]) -> Result<Self> {
        Self::with_start_time(sample_rate, 0.0, channels)
    }

    pub fn with_start_time(sample_rate: f64, start_time: f64, channels: [Vec<f64>; 4]) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sample rate must be positive and finite, got {sample_rate}"
            )));
        }
        if !start_time.is_finite() {
            return Err(Error::NonFinite("start time".into()));
        }
        let n = channels[0].len();
        if n == 0 {
            return Err(Error::InvalidInput("frame must contain at least one sample".into()));
        }
        for (i, ch) in channels.iter().enumerate() {
            if ch.len() != n {
                return Err(Error::LengthMismatch(format!(
                    "channel {} has {} samples, channel 1 has {n}",
                    i + 1,
                    ch.len()
                )));
            }
            ensure_finite(ch, &format!("channel {}", i + 1))?;
        }
        Ok(WavelengthFrame {
            sample_rate,
            start_time,
            channels,
        })
    }

    /// Frame of `n` zero samples.
    pub fn zeros(sample_rate: f64, n: usize) -> Result<Self> {
        Self::new(sample_rate, std::array::from_fn(|_| vec![0.0; n]))
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    /// Timestamp of sample `i` in seconds.
    pub fn time(&self, i: usize) -> f64 {
        self.start_time + i as f64 / self.sample_rate
    }

    /// Channel by zero-based index (sensor `index + 1`).
    pub fn channel(&self, index: usize) -> &[f64] {
        &self.channels[index]
    }

    pub fn channels(&self) -> &[Vec<f64>; 4] {
        &self.channels
    }

    pub fn into_channels(self) -> [Vec<f64>; 4] {
        self.channels
    }

    pub fn pair(&self, pair: SensorPair) -> (&[f64], &[f64]) {
        let [a, b] = pair.channels();
        (&self.channels[a], &self.channels[b])
    }

    /// New frame with the same timing and different samples.
    pub fn with_channels(&self, channels: [Vec<f64>; 4]) -> Result<Self> {
        Self::with_start_time(self.sample_rate, self.start_time, channels)
    }

    /// Samples `range` of every channel, with the start time shifted accordingly.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.start >= range.end || range.end > self.len() {
            return Err(Error::InvalidInput(format!(
                "sample range {range:?} outside frame of {} samples",
                self.len()
            )));
        }
        let start_time = self.time(range.start);
        Self::with_start_time(
            self.sample_rate,
            start_time,
            std::array::from_fn(|i| self.channels[i][range.clone()].to_vec()),
        )
    }
}

/// Tip force in instrument coordinates, newtons.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceTrajectory {
    pub sample_rate: f64,
    pub fx: Vec<f64>,
    pub fy: Vec<f64>,
    pub fz: Vec<f64>,
}

impl ForceTrajectory {
    pub fn new(sample_rate: f64, fx: Vec<f64>, fy: Vec<f64>, fz: Vec<f64>) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sample rate must be positive and finite, got {sample_rate}"
            )));
        }
        if fx.is_empty() {
            return Err(Error::InvalidInput("trajectory must contain at least one sample".into()));
        }
        if fy.len() != fx.len() || fz.len() != fx.len() {
            return Err(Error::LengthMismatch(format!(
                "force axes have lengths {}, {}, {}",
                fx.len(),
                fy.len(),
                fz.len()
            )));
        }
        ensure_finite(&fx, "F_x")?;
        ensure_finite(&fy, "F_y")?;
        ensure_finite(&fz, "F_z")?;
        Ok(ForceTrajectory {
            sample_rate,
            fx,
            fy,
            fz,
        })
    }

    pub fn zeros(sample_rate: f64, n: usize) -> Result<Self> {
        Self::new(sample_rate, vec![0.0; n], vec![0.0; n], vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.fx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fx.is_empty()
    }

    pub fn magnitude(&self, i: usize) -> f64 {
        (self.fx[i].powi(2) + self.fy[i].powi(2) + self.fz[i].powi(2)).sqrt()
    }

    /// Rejects the first sample whose force magnitude exceeds `capacity`.
    pub fn check_capacity(&self, capacity: f64) -> Result<()> {
        for i in 0..self.len() {
            let magnitude = self.magnitude(i);
            if magnitude > capacity {
                return Err(Error::CapacityExceeded {
                    index: i,
                    magnitude,
                    capacity,
                });
            }
        }
        Ok(())
    }
}

/// Linear-elastic model of one bent prong.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProngModel {
    /// Young's modulus, Pa.
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    /// Beam length, m.
    pub length: f64,
    /// Second moment of area, m^4.
    pub second_moment: f64,
    /// Cross-section area, m^2.
    pub cross_section_area: f64,
    /// Bend angle between the two sensing coordinates, rad.
    pub alpha: f64,
    /// Transfer coefficient between F_y1 and F_y2.
    pub k_n: f64,
}

impl Default for ProngModel {
    fn default() -> Self {
        let (k_n, alpha) = default_bend();
        ProngModel {
            youngs_modulus: 1.048e9,
            poisson_ratio: 0.31,
            length: 10e-3,
            second_moment: 1e-14,
            cross_section_area: 1e-7,
            alpha,
            k_n,
        }
    }
}

/// Bend constants that make the z estimate collapse to `4.1 (F_y2 - F_y1)`:
/// `sin(alpha) = 1/4.1` and `k_n cos(alpha) = 1`.
pub fn default_bend() -> (f64, f64) {
    let sin_alpha: f64 = 1.0 / 4.1;
    let alpha = sin_alpha.asin();
    (1.0 / alpha.cos(), alpha)
}

impl ProngModel {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.youngs_modulus > 0.0, "Young's modulus must be positive"),
            (
                self.poisson_ratio > 0.0 && self.poisson_ratio < 0.5,
                "Poisson ratio must lie in (0, 0.5)",
            ),
            (self.length > 0.0, "beam length must be positive"),
            (self.second_moment > 0.0, "second moment of area must be positive"),
            (self.cross_section_area > 0.0, "cross-section area must be positive"),
            (
                self.alpha > 0.0 && self.alpha < std::f64::consts::PI,
                "bend angle must lie in (0, pi)",
            ),
            (self.k_n > 0.0, "k_n must be positive"),
        ];
        for (ok, msg) in checks {
            // NaN fields fail every comparison above.
            if !ok {
                return Err(Error::InvalidInput(msg.into()));
            }
        }
        Ok(())
    }
}

/// Tip deflection of a cantilever under an end load: `-F L^3 / (3 E I)`.
pub fn beam_deflection(force: f64, model: &ProngModel) -> Result<f64> {
    model.validate()?;
    if !force.is_finite() {
        return Err(Error::NonFinite("force".into()));
    }
    Ok(-force * model.length.powi(3) / (3.0 * model.youngs_modulus * model.second_moment))
}

/// Strain of the prong under pure axial compression: `F_z / (E A)`.
pub fn axial_strain(fz: f64, model: &ProngModel) -> Result<f64> {
    model.validate()?;
    if !fz.is_finite() {
        return Err(Error::NonFinite("axial force".into()));
    }
    Ok(fz / (model.youngs_modulus * model.cross_section_area))
}

/// Per-sample forces in the two planar sensing frames.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlanarForces {
    pub fx1: Vec<f64>,
    pub fy1: Vec<f64>,
    pub fx2: Vec<f64>,
    pub fy2: Vec<f64>,
}

impl PlanarForces {
    pub fn len(&self) -> usize {
        self.fx1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fx1.is_empty()
    }

    /// (F_x, F_y) of a pair.
    pub fn pair(&self, pair: SensorPair) -> (&[f64], &[f64]) {
        match pair {
            SensorPair::First => (&self.fx1, &self.fy1),
            SensorPair::Second => (&self.fx2, &self.fy2),
        }
    }
}

/// Forward map from instrument-frame forces to the two planar frames.
pub fn planar_forces_from_trajectory(traj: &ForceTrajectory, model: &ProngModel) -> Result<PlanarForces> {
    model.validate()?;
    Ok(planar_forces(traj, model.k_n, model.alpha))
}

pub(crate) fn planar_forces(traj: &ForceTrajectory, k_n: f64, alpha: f64) -> PlanarForces {
    let (sin_a, cos_a) = alpha.sin_cos();
    let fy2 = traj
        .fy
        .iter()
        .zip(&traj.fz)
        .map(|(&fy, &fz)| k_n * fy * cos_a + fz * sin_a)
        .collect();
    PlanarForces {
        fx1: traj.fx.clone(),
        fy1: traj.fy.clone(),
        fx2: traj.fx.clone(),
        fy2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstabilityKind {
    BoundedRandomWalk,
    IidUniform,
}

/// How many independent instability sources drive the four channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstabilitySharing {
    /// One source shared by all four channels.
    Common,
    /// One source per sensor pair.
    PerPair,
    /// An independent source on every channel.
    PerChannel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    pub instability_bound_pm: f64,
    pub instability_kind: InstabilityKind,
    pub sharing: InstabilitySharing,
    /// Largest random-walk increment, pm.
    pub walk_step_pm: f64,
    pub rng_seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            instability_bound_pm: 5.0,
            instability_kind: InstabilityKind::BoundedRandomWalk,
            sharing: InstabilitySharing::PerPair,
            walk_step_pm: 0.5,
            rng_seed: 0,
        }
    }
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        NoiseSpec {
            instability_bound_pm: 0.0,
            ..NoiseSpec::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.instability_bound_pm >= 0.0 && self.instability_bound_pm.is_finite()) {
            return Err(Error::InvalidInput("instability bound must be finite and >= 0".into()));
        }
        if !(self.walk_step_pm >= 0.0 && self.walk_step_pm.is_finite()) {
            return Err(Error::InvalidInput("random-walk step must be finite and >= 0".into()));
        }
        Ok(())
    }

    fn draw(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        let bound = self.instability_bound_pm;
        if bound == 0.0 {
            return vec![0.0; n];
        }
        match self.instability_kind {
            InstabilityKind::IidUniform => (0..n).map(|_| rng.random_range(-bound..=bound)).collect(),
            InstabilityKind::BoundedRandomWalk => {
                let step = self.walk_step_pm;
                let mut level = 0.0_f64;
                (0..n)
                    .map(|_| {
                        if step > 0.0 {
                            level = (level + rng.random_range(-step..=step)).clamp(-bound, bound);
                        }
                        level
                    })
                    .collect()
            }
        }
    }

    /// Instability series for the four channels.
    pub fn generate(&self, n: usize) -> [Vec<f64>; 4] {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        match self.sharing {
            InstabilitySharing::Common => {
                let s = self.draw(&mut rng, n);
                [s.clone(), s.clone(), s.clone(), s]
            }
            InstabilitySharing::PerPair => {
                let a = self.draw(&mut rng, n);
                let b = self.draw(&mut rng, n);
                [a.clone(), a, b.clone(), b]
            }
            InstabilitySharing::PerChannel => std::array::from_fn(|_| self.draw(&mut rng, n)),
        }
    }
}

/// Additive pieces of every simulated channel.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub trajectory: ForceTrajectory,
    pub planar: PlanarForces,
    /// Contribution of the pair's F_x to each channel, pm.
    pub fx_component: [Vec<f64>; 4],
    /// Contribution of the pair's F_y to each channel, pm.
    pub fy_component: [Vec<f64>; 4],
    pub instability: [Vec<f64>; 4],
    pub offsets_pm: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedFrame {
    pub frame: WavelengthFrame,
    pub truth: GroundTruth,
}

/// Simulates the four wavelength channels produced by a force trajectory.
///
/// Channel `i` is `dw_Fx + dw_Fy + n_ins + offset`, summed in that order.
pub fn simulate_frame(
    traj: &ForceTrajectory,
    calib: &CalibrationModel,
    noise: &NoiseSpec,
) -> Result<SimulatedFrame> {
    noise.validate()?;
    traj.check_capacity(calib.capacity())?;
    let n = traj.len();
    let planar = planar_forces(traj, calib.k_n(), calib.alpha());
    let instability = noise.generate(n);
    let offsets = calib.offsets_pm();

    let mut fx_component: [Vec<f64>; 4] = Default::default();
    let mut fy_component: [Vec<f64>; 4] = Default::default();
    let mut channels: [Vec<f64>; 4] = Default::default();
    for pair in SensorPair::BOTH {
        let m = calib.pair_matrix(pair);
        let (fx, fy) = planar.pair(pair);
        for (row, ch) in pair.channels().into_iter().enumerate() {
            let (kx, ky) = (m.get(row, 0), m.get(row, 1));
            fx_component[ch] = fx.iter().map(|f| kx * f).collect();
            fy_component[ch] = fy.iter().map(|f| ky * f).collect();
            channels[ch] = (0..n)
                .map(|t| fx_component[ch][t] + fy_component[ch][t] + instability[ch][t] + offsets[ch])
                .collect();
        }
    }
    let frame = WavelengthFrame::new(traj.sample_rate, channels)?;
    Ok(SimulatedFrame {
        frame,
        truth: GroundTruth {
            trajectory: traj.clone(),
            planar,
            fx_component,
            fy_component,
            instability,
            offsets_pm: offsets,
        },
    })
}
