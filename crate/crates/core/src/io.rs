//! File formats: CSV tables and JSON sidecars.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a value
//! read back is bit-identical to the one written. Line endings are LF.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::calibration::{CalibrationFile, CalibrationRun, LoadAxis};
use crate::classify::LoadingClass;
use crate::error::{Error, Result};
use crate::forces::ForceSeries;
use crate::ica::{ComponentRole, PairComponents, RecoveredComponents, UnmixingEstimate};
use crate::linalg::Mat2;
use crate::profiles::ProfileSpec;
use crate::signal::{
    ForceTrajectory, NoiseSpec, PlanarForces, ProngModel, SensorPair, SimulatedFrame, WavelengthFrame,
};

pub const FRAME_HEADER: [&str; 5] = ["t_s", "dw1_pm", "dw2_pm", "dw3_pm", "dw4_pm"];
pub const TRAJECTORY_HEADER: [&str; 4] = ["t_s", "fx_N", "fy_N", "fz_N"];
pub const RUN_HEADER: [&str; 5] = ["load_N", "dw1_pm", "dw2_pm", "dw3_pm", "dw4_pm"];
pub const FORCES_HEADER: [&str; 7] = ["t_s", "fx1_N", "fy1_N", "fx2_N", "fy2_N", "fz_N", "nins_pm"];
pub const COMPONENTS_HEADER: [&str; 3] = ["t_s", "comp1_pm", "comp2_pm"];
pub const TRUTH_HEADER: [&str; 20] = [
    "t_s", "fx_N", "fy_N", "fz_N", "fx1_N", "fy1_N", "fx2_N", "fy2_N", "dwfx1_pm", "dwfx2_pm", "dwfx3_pm",
    "dwfx4_pm", "dwfy1_pm", "dwfy2_pm", "dwfy3_pm", "dwfy4_pm", "nins1_pm", "nins2_pm", "nins3_pm", "nins4_pm",
];

/// Relative tolerance for accepting a time column as uniformly sampled.
const UNIFORM_TIME_TOL: f64 = 1e-6;

fn parse_err(line: u64, msg: impl Into<String>) -> Error {
    Error::Parse {
        line: line as usize,
        msg: msg.into(),
    }
}

/// Rows of a CSV table with a fixed header. Empty cells become `None`.
fn read_table<R: Read>(input: R, header: &[&str]) -> Result<Vec<(u64, Vec<Option<f64>>)>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let got = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(parse_err(
            1,
            format!("expected header `{}`, found `{}`", header.join(","), got.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let mut vals = Vec::with_capacity(header.len());
        for (cell, name) in rec.iter().zip(header) {
            if cell.is_empty() {
                vals.push(None);
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(line, format!("column {name}: `{cell}` is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("column {name}: non-finite value `{cell}`")));
            }
            vals.push(Some(v));
        }
        rows.push((line, vals));
    }
    Ok(rows)
}

fn required(rows: &[(u64, Vec<Option<f64>>)], header: &[&str], skip_optional: &[usize]) -> Result<()> {
    for (line, vals) in rows {
        for (i, v) in vals.iter().enumerate() {
            if v.is_none() && !skip_optional.contains(&i) {
                return Err(parse_err(*line, format!("column {} is empty", header[i])));
            }
        }
    }
    Ok(())
}

fn column(rows: &[(u64, Vec<Option<f64>>)], i: usize) -> Vec<f64> {
    rows.iter().map(|(_, v)| v[i].unwrap_or(0.0)).collect()
}

/// Infers `(start, sample_rate)` from a time column and checks it is
/// uniform. Rates within 1e-9 of an integer are snapped to it.
fn sampling(rows: &[(u64, Vec<Option<f64>>)]) -> Result<(f64, f64)> {
    let t = column(rows, 0);
    let Some(&start) = t.first() else {
        return Err(parse_err(2, "table has no data rows"));
    };
    if t.len() == 1 {
        return Ok((start, 1.0));
    }
    let span = t[t.len() - 1] - start;
    if !(span > 0.0) {
        return Err(parse_err(rows[rows.len() - 1].0, "time column is not increasing"));
    }
    let mut fs = (t.len() - 1) as f64 / span;
    let rounded = fs.round();
    if rounded > 0.0 && (fs - rounded).abs() <= 1e-9 * fs {
        fs = rounded;
    }
    let dt = 1.0 / fs;
    for (i, (line, _)) in rows.iter().enumerate() {
        let want = start + i as f64 / fs;
        if (t[i] - want).abs() > UNIFORM_TIME_TOL * dt + 4.0 * f64::EPSILON * want.abs() {
            return Err(parse_err(*line, format!("time {} breaks uniform sampling (expected {want})", t[i])));
        }
    }
    Ok((start, fs))
}

fn write_rows<W: Write>(mut out: W, header: &[&str], n: usize, mut row: impl FnMut(usize, &mut String)) -> Result<()> {
    let mut buf = String::with_capacity(64 * (n + 1));
    buf.push_str(&header.join(","));
    buf.push('\n');
    for i in 0..n {
        row(i, &mut buf);
        buf.push('\n');
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

fn push_fields(buf: &mut String, vals: &[f64]) {
    use std::fmt::Write as _;
    for (j, v) in vals.iter().enumerate() {
        if j > 0 {
            buf.push(',');
        }
        let _ = write!(buf, "{v}");
    }
}

pub fn write_frame<W: Write>(out: W, frame: &WavelengthFrame) -> Result<()> {
    let ch = frame.channels();
    write_rows(out, &FRAME_HEADER, frame.len(), |i, buf| {
        push_fields(buf, &[frame.time(i), ch[0][i], ch[1][i], ch[2][i], ch[3][i]]);
    })
}

pub fn read_frame<R: Read>(input: R) -> Result<WavelengthFrame> {
    let rows = read_table(input, &FRAME_HEADER)?;
    required(&rows, &FRAME_HEADER, &[])?;
    let (start, fs) = sampling(&rows)?;
    WavelengthFrame::with_start_time(fs, start, std::array::from_fn(|k| column(&rows, k + 1)))
}

pub fn write_trajectory<W: Write>(out: W, traj: &ForceTrajectory) -> Result<()> {
    let fs = traj.sample_rate;
    write_rows(out, &TRAJECTORY_HEADER, traj.len(), |i, buf| {
        push_fields(buf, &[i as f64 / fs, traj.fx[i], traj.fy[i], traj.fz[i]]);
    })
}

pub fn read_trajectory<R: Read>(input: R) -> Result<ForceTrajectory> {
    let rows = read_table(input, &TRAJECTORY_HEADER)?;
    required(&rows, &TRAJECTORY_HEADER, &[])?;
    let (_, fs) = sampling(&rows)?;
    ForceTrajectory::new(fs, column(&rows, 1), column(&rows, 2), column(&rows, 3))
}

/// Ground truth of a simulation as one table.
pub fn write_truth<W: Write>(out: W, sim: &SimulatedFrame) -> Result<()> {
    let t = &sim.truth;
    let traj = &t.trajectory;
    let p = &t.planar;
    write_rows(out, &TRUTH_HEADER, traj.len(), |i, buf| {
        let mut row = vec![
            sim.frame.time(i),
            traj.fx[i],
            traj.fy[i],
            traj.fz[i],
            p.fx1[i],
            p.fy1[i],
            p.fx2[i],
            p.fy2[i],
        ];
        row.extend(t.fx_component.iter().map(|c| c[i]));
        row.extend(t.fy_component.iter().map(|c| c[i]));
        row.extend(t.instability.iter().map(|c| c[i]));
        push_fields(buf, &row);
    })
}

/// Truth table columns after `t_s`, in header order.
pub fn read_truth<R: Read>(input: R) -> Result<Vec<Vec<f64>>> {
    let rows = read_table(input, &TRUTH_HEADER)?;
    required(&rows, &TRUTH_HEADER, &[])?;
    Ok((1..TRUTH_HEADER.len()).map(|k| column(&rows, k)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSidecar {
    pub loaded_axis: LoadAxis,
}

pub fn write_run<W: Write>(out: W, run: &CalibrationRun) -> Result<()> {
    let loads = run.loads();
    let ch = run.observed().channels();
    write_rows(out, &RUN_HEADER, loads.len(), |i, buf| {
        push_fields(buf, &[loads[i], ch[0][i], ch[1][i], ch[2][i], ch[3][i]]);
    })
}

pub fn read_run<R: Read>(input: R, sidecar: &RunSidecar) -> Result<CalibrationRun> {
    let rows = read_table(input, &RUN_HEADER)?;
    required(&rows, &RUN_HEADER, &[])?;
    if rows.is_empty() {
        return Err(parse_err(2, "calibration run has no data rows"));
    }
    let frame = WavelengthFrame::new(1.0, std::array::from_fn(|k| column(&rows, k + 1)))?;
    CalibrationRun::new(sidecar.loaded_axis, column(&rows, 0), frame)
}

pub fn write_forces<W: Write>(out: W, f: &ForceSeries) -> Result<()> {
    use std::fmt::Write as _;
    write_rows(out, &FORCES_HEADER, f.len(), |i, buf| {
        push_fields(buf, &[f.time(i), f.fx1[i], f.fy1[i], f.fx2[i], f.fy2[i], f.fz[i]]);
        buf.push(',');
        if let Some(n) = &f.nins_pm {
            let _ = write!(buf, "{}", n[i]);
        }
    })
}

pub fn read_forces<R: Read>(input: R) -> Result<ForceSeries> {
    let rows = read_table(input, &FORCES_HEADER)?;
    required(&rows, &FORCES_HEADER, &[6])?;
    let (start, fs) = sampling(&rows)?;
    let present = rows.iter().filter(|(_, v)| v[6].is_some()).count();
    let nins = if present == 0 {
        None
    } else if present == rows.len() {
        Some(column(&rows, 6))
    } else {
        let (line, _) = rows.iter().find(|(_, v)| v[6].is_none()).expect("some row lacks n_ins");
        return Err(parse_err(*line, "nins_pm must be filled on every row or on none"));
    };
    let planar = PlanarForces {
        fx1: column(&rows, 1),
        fy1: column(&rows, 2),
        fx2: column(&rows, 3),
        fy2: column(&rows, 4),
    };
    ForceSeries::new(fs, start, planar, column(&rows, 5), nins)
}

/// Everything about a decoupled pair except the component samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSidecar {
    pub pair: SensorPair,
    pub class: LoadingClass,
    pub roles: [ComponentRole; 2],
    pub w_re: Mat2,
    pub estimate: Option<UnmixingEstimate>,
    pub fallback: Option<String>,
    pub reconstruction_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentsSidecar {
    pub pairs: [PairSidecar; 2],
}

impl ComponentsSidecar {
    pub fn from_components(c: &RecoveredComponents) -> Self {
        ComponentsSidecar {
            pairs: c.pairs.clone().map(|p| PairSidecar {
                pair: p.pair,
                class: p.class,
                roles: p.roles,
                w_re: p.w_re,
                estimate: p.estimate,
                fallback: p.fallback,
                reconstruction_error: p.reconstruction_error,
            }),
        }
    }
}

pub fn write_pair_components<W: Write>(out: W, c: &RecoveredComponents, pair: SensorPair) -> Result<()> {
    let p = c.pair(pair);
    write_rows(out, &COMPONENTS_HEADER, c.len(), |i, buf| {
        let t = c.start_time + i as f64 / c.sample_rate;
        push_fields(buf, &[t, p.components[0][i], p.components[1][i]]);
    })
}

/// Rebuilds components from the two per-pair tables and their sidecar.
pub fn read_components<R1: Read, R2: Read>(first: R1, second: R2, sidecar: ComponentsSidecar) -> Result<RecoveredComponents> {
    let a = read_table(first, &COMPONENTS_HEADER)?;
    let b = read_table(second, &COMPONENTS_HEADER)?;
    required(&a, &COMPONENTS_HEADER, &[])?;
    required(&b, &COMPONENTS_HEADER, &[])?;
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(format!(
            "component tables have {} and {} rows",
            a.len(),
            b.len()
        )));
    }
    let (start, fs) = sampling(&a)?;
    let [sa, sb] = sidecar.pairs;
    if sa.pair != SensorPair::First || sb.pair != SensorPair::Second {
        return Err(Error::InvalidInput("component sidecar lists pairs out of order".into()));
    }
    let build = |s: PairSidecar, rows: &[(u64, Vec<Option<f64>>)]| PairComponents {
        pair: s.pair,
        class: s.class,
        roles: s.roles,
        components: [column(rows, 1), column(rows, 2)],
        w_re: s.w_re,
        estimate: s.estimate,
        fallback: s.fallback,
        reconstruction_error: s.reconstruction_error,
    };
    Ok(RecoveredComponents {
        sample_rate: fs,
        start_time: start,
        pairs: [build(sa, &a), build(sb, &b)],
    })
}

/// Simulator configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulatorConfig {
    pub calibration: CalibrationFile,
    /// Must agree with the calibration's `k_n` and `alpha_rad` when given.
    #[serde(default)]
    pub prong: Option<ProngModel>,
    #[serde(default)]
    pub noise: NoiseSpec,
    pub seed: u64,
    /// Trajectory to generate when no trajectory file is supplied.
    #[serde(default)]
    pub profile: Option<ProfileSpec>,
}

impl SimulatorConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = &self.prong {
            p.validate()?;
            let c = &self.calibration;
            if (p.k_n - c.k_n).abs() > 1e-12 * c.k_n.abs() || (p.alpha - c.alpha_rad).abs() > 1e-12 {
                return Err(Error::Config(format!(
                    "prong bend (k_n {}, alpha {}) disagrees with the calibration (k_n {}, alpha {})",
                    p.k_n, p.alpha, c.k_n, c.alpha_rad
                )));
            }
        }
        self.noise.validate()
    }
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
