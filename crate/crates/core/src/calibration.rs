//! Linear sensor model, its least-squares fit from calibration runs, and the
//! baseline decoupling by direct matrix inversion.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::linalg::Mat2;
use crate::signal::{default_bend, PlanarForces, SensorPair, WavelengthFrame, DEFAULT_CAPACITY_N};

/// Smallest accepted `|det|` of a sensitivity block, in nm/N units.
pub const MIN_ABS_DET_NM: f64 = 1e-12;
/// `|det|` threshold expressed in pm/N units.
const MIN_ABS_DET_PM: f64 = MIN_ABS_DET_NM * 1e6;
/// Fits with R² below this are flagged.
pub const POOR_FIT_R2: f64 = 0.95;

const PM_PER_NM: f64 = 1000.0;

/// Affine model `dw = M F + offset` for both sensor pairs.
///
/// Rows of `K` are sensors 1 and 2, columns are (F_x1, F_y1); `C` is the
/// same for sensors 3 and 4 against (F_x2, F_y2). Stored in pm/N and pm.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationModel {
    k: Mat2,
    c: Mat2,
    offsets: [f64; 4],
    k_n: f64,
    alpha: f64,
    capacity: f64,
    diagonally_dominant: bool,
}

impl CalibrationModel {
    /// Builds a model from sensitivities in nm/N and offsets in nm.
    pub fn new(k_nm: Mat2, c_nm: Mat2, offsets_nm: [f64; 4], k_n: f64, alpha: f64, capacity: f64) -> Result<Self> {
        Self::from_pm(
            k_nm.scale(PM_PER_NM),
            c_nm.scale(PM_PER_NM),
            offsets_nm.map(|o| o * PM_PER_NM),
            k_n,
            alpha,
            capacity,
        )
    }

    /// Builds a model from sensitivities in pm/N and offsets in pm.
    pub fn from_pm(k: Mat2, c: Mat2, offsets: [f64; 4], k_n: f64, alpha: f64, capacity: f64) -> Result<Self> {
        if !(k.is_finite() && c.is_finite()) {
            return Err(Error::NonFinite("sensitivity matrix".into()));
        }
        ensure_finite(&offsets, "offsets")?;
        for (m, name) in [(&k, "K"), (&c, "C")] {
            if m.inverse_checked(MIN_ABS_DET_PM).is_none() {
                return Err(Error::Singular(format!(
                    "{name} has |det| = {:e} (nm/N)^2, model rejected",
                    m.det().abs() / (PM_PER_NM * PM_PER_NM)
                )));
            }
        }
        if !(k_n.is_finite() && k_n > 0.0) {
            return Err(Error::Config(format!("k_n must be positive, got {k_n}")));
        }
        if !alpha.is_finite() || alpha.sin().abs() < 1e-12 {
            return Err(Error::Config(format!("sin(alpha) must be nonzero, alpha = {alpha}")));
        }
        if !(capacity.is_finite() && capacity > 0.0) {
            return Err(Error::Config(format!("capacity must be positive, got {capacity}")));
        }
        let dominant = |m: &Mat2| m.get(0, 0).abs() > m.get(1, 0).abs() && m.get(1, 1).abs() > m.get(0, 1).abs();
        let diagonally_dominant = dominant(&k) && dominant(&c);
        Ok(CalibrationModel {
            k,
            c,
            offsets,
            k_n,
            alpha,
            capacity,
            diagonally_dominant,
        })
    }

    /// Reference fit of the instrumented forceps, with the
    /// default bend constants and a 1 N capacity.
    pub fn reference_fitted() -> Self {
        let (k_n, alpha) = default_bend();
        Self::new(
            Mat2::new(0.0036, 0.00009, 0.0004, -0.0042),
            Mat2::new(0.0016, 0.0003, 0.0006, -0.0015),
            [0.0071, -0.0032, 0.0025, -0.0037],
            k_n,
            alpha,
            DEFAULT_CAPACITY_N,
        )
        .expect("built-in calibration is valid")
    }

    /// Sensor 1–2 sensitivities, pm/N.
    pub fn k(&self) -> Mat2 {
        self.k
    }

    /// Sensor 3–4 sensitivities, pm/N.
    pub fn c(&self) -> Mat2 {
        self.c
    }

    pub fn pair_matrix(&self, pair: SensorPair) -> Mat2 {
        match pair {
            SensorPair::First => self.k,
            SensorPair::Second => self.c,
        }
    }

    pub fn pair_inverse(&self, pair: SensorPair) -> Mat2 {
        self.pair_matrix(pair)
            .inverse()
            .expect("invertibility checked at construction")
    }

    pub fn offsets_pm(&self) -> [f64; 4] {
        self.offsets
    }

    pub fn pair_offsets(&self, pair: SensorPair) -> [f64; 2] {
        let [a, b] = pair.channels();
        [self.offsets[a], self.offsets[b]]
    }

    pub fn k_n(&self) -> f64 {
        self.k_n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    /// Whether every sensor responds most strongly to its own axis.
    pub fn diagonally_dominant(&self) -> bool {
        self.diagonally_dominant
    }

    /// `K^-1` in N/nm.
    pub fn k_inverse_n_per_nm(&self) -> Mat2 {
        self.pair_inverse(SensorPair::First).scale(PM_PER_NM)
    }

    pub fn c_inverse_n_per_nm(&self) -> Mat2 {
        self.pair_inverse(SensorPair::Second).scale(PM_PER_NM)
    }

    /// Copy with every sensitivity entry multiplied by `1 + factors[i]`.
    pub fn perturbed(&self, k_factors: [f64; 4], c_factors: [f64; 4]) -> Result<Self> {
        let apply = |m: Mat2, f: [f64; 4]| {
            Mat2::new(
                m.get(0, 0) * (1.0 + f[0]),
                m.get(0, 1) * (1.0 + f[1]),
                m.get(1, 0) * (1.0 + f[2]),
                m.get(1, 1) * (1.0 + f[3]),
            )
        };
        Self::from_pm(
            apply(self.k, k_factors),
            apply(self.c, c_factors),
            self.offsets,
            self.k_n,
            self.alpha,
            self.capacity,
        )
    }

    pub fn to_file(&self) -> CalibrationFile {
        CalibrationFile {
            k: self.k.scale(1.0 / PM_PER_NM),
            c: self.c.scale(1.0 / PM_PER_NM),
            offsets_nm: self.offsets.map(|o| o / PM_PER_NM),
            k_n: self.k_n,
            alpha_rad: self.alpha,
            capacity_n: self.capacity,
        }
    }
}

/// On-disk calibration, nm/N and nm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationFile {
    #[serde(rename = "K")]
    pub k: Mat2,
    #[serde(rename = "C")]
    pub c: Mat2,
    pub offsets_nm: [f64; 4],
    pub k_n: f64,
    pub alpha_rad: f64,
    #[serde(rename = "capacity_N", default = "default_capacity")]
    pub capacity_n: f64,
}

fn default_capacity() -> f64 {
    DEFAULT_CAPACITY_N
}

impl CalibrationFile {
    pub fn into_model(self) -> Result<CalibrationModel> {
        CalibrationModel::new(self.k, self.c, self.offsets_nm, self.k_n, self.alpha_rad, self.capacity_n)
    }
}

impl TryFrom<CalibrationFile> for CalibrationModel {
    type Error = Error;

    fn try_from(file: CalibrationFile) -> Result<Self> {
        file.into_model()
    }
}

/// Axis loaded during a calibration run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoadAxis {
    X1,
    Y1,
    X2,
    Y2,
    Z,
}

impl std::str::FromStr for LoadAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x1" => Ok(LoadAxis::X1),
            "y1" => Ok(LoadAxis::Y1),
            "x2" => Ok(LoadAxis::X2),
            "y2" => Ok(LoadAxis::Y2),
            "z" => Ok(LoadAxis::Z),
            other => Err(Error::InvalidInput(format!("unknown load axis '{other}'"))),
        }
    }
}

/// Reference loads on one axis with the four sensor responses.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRun {
    axis: LoadAxis,
    loads: Vec<f64>,
    observed: WavelengthFrame,
}

impl CalibrationRun {
    pub fn new(axis: LoadAxis, loads: Vec<f64>, observed: WavelengthFrame) -> Result<Self> {
        if loads.len() != observed.len() {
            return Err(Error::LengthMismatch(format!(
                "{} loads for {} observations",
                loads.len(),
                observed.len()
            )));
        }
        ensure_finite(&loads, "applied load")?;
        if let Some(i) = loads.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput(format!(
                "load steps must be non-decreasing (sample {} drops from {} to {})",
                i + 1,
                loads[i],
                loads[i + 1]
            )));
        }
        Ok(CalibrationRun { axis, loads, observed })
    }

    pub fn axis(&self) -> LoadAxis {
        self.axis
    }

    pub fn loads(&self) -> &[f64] {
        &self.loads
    }

    pub fn observed(&self) -> &WavelengthFrame {
        &self.observed
    }

    pub fn distinct_levels(&self) -> usize {
        // loads are sorted
        1 + self.loads.windows(2).filter(|w| w[1] != w[0]).count()
    }
}

/// Least-squares line `dw = slope * F + intercept` for one sensor, pm/N and pm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub poor_fit: bool,
}

/// Per-sensor fits of one calibration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisFit {
    pub axis: LoadAxis,
    pub sensors: [LinearFit; 4],
}

fn ols_line(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - mx, yi - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    // A flat response is explained perfectly by a zero slope.
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        ((sxy * sxy) / (sxx * syy)).clamp(0.0, 1.0)
    };
    LinearFit {
        slope,
        intercept,
        r_squared,
        poor_fit: r_squared < POOR_FIT_R2,
    }
}

/// Ordinary least squares of every sensor channel against the applied load.
pub fn fit_axis(run: &CalibrationRun) -> Result<AxisFit> {
    let loads = run.loads();
    if loads.first() == loads.last() {
        return Err(Error::Degenerate("applied load has zero variance".into()));
    }
    let levels = run.distinct_levels();
    if levels < 3 {
        return Err(Error::InsufficientData(format!(
            "calibration needs at least 3 distinct load levels, run has {levels}"
        )));
    }
    let sensors = std::array::from_fn(|i| ols_line(loads, run.observed().channel(i)));
    Ok(AxisFit {
        axis: run.axis(),
        sensors,
    })
}

/// Collects the four planar-axis fits into a calibration model.
///
/// Columns come from the x and y runs of each pair; each sensor's offset is
/// the mean intercept over the two runs that load its pair.
pub fn assemble_model(fits: &[AxisFit], k_n: f64, alpha: f64, capacity: f64) -> Result<CalibrationModel> {
    let find = |axis: LoadAxis| {
        fits.iter()
            .find(|f| f.axis == axis)
            .ok_or_else(|| Error::InvalidInput(format!("missing calibration fit for axis {axis:?}")))
    };
    let (x1, y1, x2, y2) = (find(LoadAxis::X1)?, find(LoadAxis::Y1)?, find(LoadAxis::X2)?, find(LoadAxis::Y2)?);
    let k = Mat2::new(
        x1.sensors[0].slope,
        y1.sensors[0].slope,
        x1.sensors[1].slope,
        y1.sensors[1].slope,
    );
    let c = Mat2::new(
        x2.sensors[2].slope,
        y2.sensors[2].slope,
        x2.sensors[3].slope,
        y2.sensors[3].slope,
    );
    let mean_intercept = |a: &AxisFit, b: &AxisFit, s: usize| 0.5 * (a.sensors[s].intercept + b.sensors[s].intercept);
    let offsets = [
        mean_intercept(x1, y1, 0),
        mean_intercept(x1, y1, 1),
        mean_intercept(x2, y2, 2),
        mean_intercept(x2, y2, 3),
    ];
    CalibrationModel::from_pm(k, c, offsets, k_n, alpha, capacity)
}

/// Baseline decoupling: `F = M^-1 (dw - offset)` per sample and pair.
pub fn naive_decouple(frame: &WavelengthFrame, calib: &CalibrationModel) -> PlanarForces {
    let mut out = PlanarForces::default();
    for pair in SensorPair::BOTH {
        let inv = calib.pair_inverse(pair);
        let off = calib.pair_offsets(pair);
        let (a, b) = frame.pair(pair);
        let (fx, fy): (Vec<f64>, Vec<f64>) = a
            .iter()
            .zip(b)
            .map(|(&wa, &wb)| {
                let f = inv.apply([wa - off[0], wb - off[1]]);
                (f[0], f[1])
            })
            .unzip();
        match pair {
            SensorPair::First => {
                out.fx1 = fx;
                out.fy1 = fy;
            }
            SensorPair::Second => {
                out.fx2 = fx;
                out.fy2 = fy;
            }
        }
    }
    out
}

/// Response of the four sensors to a pure axial (z) load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZInsensitivityReport {
    /// Per-sensor slope, pm/N.
    pub slopes: [f64; 4],
    /// `|slope_4| / max |slope_1..3|`; absent when sensors 1–3 are flat.
    pub dominance_ratio: Option<f64>,
    pub threshold: f64,
    pub no_response: bool,
    pub sensor4_dominant: bool,
}

pub const DEFAULT_Z_DOMINANCE: f64 = 3.0;

/// Checks that only sensor 4 responds appreciably to a z load.
pub fn check_z_insensitivity(run: &CalibrationRun, threshold: f64) -> Result<ZInsensitivityReport> {
    if run.axis() != LoadAxis::Z {
        return Err(Error::InvalidInput(format!(
            "z-insensitivity check needs a z run, got {:?}",
            run.axis()
        )));
    }
    let fit = fit_axis(run)?;
    let slopes = fit.sensors.map(|f| f.slope);
    let others = slopes[..3].iter().fold(0.0_f64, |m, s| m.max(s.abs()));
    let s4 = slopes[3].abs();
    let no_response = others == 0.0 && s4 == 0.0;
    let dominance_ratio = (others > 0.0).then(|| s4 / others);
    let sensor4_dominant = !no_response && dominance_ratio.is_none_or(|r| r >= threshold);
    Ok(ZInsensitivityReport {
        slopes,
        dominance_ratio,
        threshold,
        no_response,
        sensor4_dominant,
    })
}
