//! Subcommand implementations. Every command loads all of its inputs,
//! computes everything in memory and only then writes its outputs.

use std::path::{Path, PathBuf};

use serde::Serialize;

use fbgforce::analysis::{analyze_session, SessionReport};
use fbgforce::calibration::{
    assemble_model, check_z_insensitivity, fit_axis, AxisFit, CalibrationModel, ZInsensitivityReport,
    DEFAULT_Z_DOMINANCE,
};
use fbgforce::classify::{classify_frame, LoadingClass};
use fbgforce::forces::{consistency_check, reconstruct, ConsistencyReport, ForceSeries};
use fbgforce::ica::{decouple_frame, RecoveredComponents};
use fbgforce::io::{self as fio, ComponentsSidecar, RunSidecar, SimulatorConfig};
use fbgforce::linalg::Mat2;
use fbgforce::pipeline::{naive_forces, run_pipeline, DecoupleMode, PipelineSettings};
use fbgforce::preprocess::{filter_instability, filter_report, FilterReport};
use fbgforce::profiles::ProfileKind;
use fbgforce::signal::{default_bend, SensorPair, WavelengthFrame, DEFAULT_CAPACITY_N};

use crate::config::{default_simulator_config, PipelineConfig};
use crate::error::{CliError, CliResult};
use crate::output::{sha256_hex, FileEntry, Manifest, Outputs};
use crate::report::{render, rows_from_session, TableFile, TableRow};
use crate::{
    AnalyzeArgs, CalibrateArgs, ClassifyArgs, Ctx, DecoupleArgs, FilterArgs, ForcesArgs, ModeArg, PipelineArgs,
    ProfileArg, ReportArgs, SimulateArgs, WindowArgs,
};

pub const COMPONENT_FILES: [&str; 2] = ["components_12.csv", "components_34.csv"];
pub const COMPONENT_SIDECAR: &str = "components.json";

/// Reads input files and remembers their hashes for the manifest.
#[derive(Default)]
struct Loader {
    inputs: Vec<FileEntry>,
}

impl Loader {
    fn load<T>(&mut self, path: &Path, parse: impl FnOnce(&[u8]) -> fbgforce::Result<T>) -> CliResult<T> {
        let fail = |source| CliError::Input {
            path: path.to_path_buf(),
            source,
        };
        let bytes = std::fs::read(path).map_err(|e| fail(e.into()))?;
        let value = parse(&bytes).map_err(fail)?;
        self.inputs.push(FileEntry {
            file: path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned()),
            sha256: sha256_hex(&bytes),
        });
        Ok(value)
    }

    fn frame(&mut self, path: &Path) -> CliResult<WavelengthFrame> {
        self.load(path, |b| fio::read_frame(b))
    }

    fn calibration(&mut self, path: &Path) -> CliResult<CalibrationModel> {
        self.load(path, |b| {
            let file: fbgforce::calibration::CalibrationFile = serde_json::from_slice(b)?;
            file.into_model()
        })
    }

    fn json<T: for<'de> serde::Deserialize<'de>>(&mut self, path: &Path) -> CliResult<T> {
        self.load(path, |b| Ok(serde_json::from_slice(b)?))
    }
}

fn require(flag: Option<PathBuf>, from_config: Option<PathBuf>, what: &str) -> CliResult<PathBuf> {
    flag.or(from_config)
        .ok_or_else(|| CliError::Usage(format!("no {what} given (flag or config file)")))
}

fn effective_seed(ctx: &Ctx, cfg: &PipelineConfig) -> Option<u64> {
    ctx.seed.or(cfg.seed)
}

fn ica_seed(ctx: &Ctx, cfg: &PipelineConfig) -> CliResult<u64> {
    effective_seed(ctx, cfg)
        .ok_or_else(|| CliError::Usage("ICA needs a seed: pass --seed or set `seed` in the config".into()))
}

fn validate(settings: &PipelineSettings) -> CliResult<()> {
    settings.filter.validate()?;
    settings.classifier.validate()?;
    settings.ica.validate()?;
    settings.analysis.validate()?;
    if !(settings.consistency_tolerance_n >= 0.0 && settings.consistency_tolerance_n.is_finite()) {
        return Err(CliError::Usage("consistency_tolerance_n must be finite and >= 0".into()));
    }
    Ok(())
}

fn parse_window(text: &str) -> CliResult<(Option<usize>, Option<usize>)> {
    let bad = || CliError::Usage(format!("window must look like a:b, got '{text}'"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let num = |s: &str| -> CliResult<Option<usize>> {
        let s = s.trim();
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| bad())
        }
    };
    Ok((num(a)?, num(b)?))
}

/// Resolves the analysis window against a series of `n` samples.
fn window_for(n: usize, flag: Option<&str>, configured: Option<[usize; 2]>) -> CliResult<[usize; 2]> {
    let [a, b] = match flag {
        Some(text) => {
            let (a, b) = parse_window(text)?;
            [a.unwrap_or(0), b.unwrap_or(n)]
        }
        None => configured.unwrap_or([0, n]),
    };
    if a >= b || b > n {
        return Err(CliError::Usage(format!("window {a}:{b} does not fit {n} samples")));
    }
    Ok([a, b])
}

fn apply_window_args(settings: &mut PipelineSettings, args: &WindowArgs) {
    if let Some(a) = args.alpha {
        settings.analysis.alpha = a;
    }
}

// Shared emitters: staged commands and `pipeline` go through the same
// code so their files are byte-identical.

fn emit_filter(out: &mut Outputs, filtered: &WavelengthFrame, report: &FilterReport) -> CliResult<()> {
    out.add_csv("filtered.csv", |b| fio::write_frame(b, filtered))?;
    out.add_json("filter_report.json", report)
}

fn emit_classes(out: &mut Outputs, classes: &[LoadingClass; 2]) -> CliResult<()> {
    out.add_json("classification.json", classes)
}

fn emit_components(out: &mut Outputs, comps: &RecoveredComponents) -> CliResult<()> {
    for (pair, name) in SensorPair::BOTH.into_iter().zip(COMPONENT_FILES) {
        out.add_csv(name, |b| fio::write_pair_components(b, comps, pair))?;
    }
    out.add_json(COMPONENT_SIDECAR, &ComponentsSidecar::from_components(comps))
}

#[derive(Debug, Serialize)]
struct ForcesSummary<'a> {
    mode: DecoupleMode,
    samples: usize,
    capacity_n: f64,
    capacity_exceedances: usize,
    first_exceedance: Option<usize>,
    consistency: Option<&'a ConsistencyReport>,
}

fn emit_forces(
    out: &mut Outputs,
    stem: &str,
    mode: DecoupleMode,
    forces: &ForceSeries,
    consistency: Option<&ConsistencyReport>,
    calib: &CalibrationModel,
) -> CliResult<()> {
    let over = forces.capacity_exceedances(calib.capacity());
    let summary = ForcesSummary {
        mode,
        samples: forces.len(),
        capacity_n: calib.capacity(),
        capacity_exceedances: over.len(),
        first_exceedance: over.first().copied(),
        consistency,
    };
    if let Some(i) = summary.first_exceedance {
        eprintln!(
            "warning: {} samples exceed the {} N capacity (first at sample {i})",
            over.len(),
            calib.capacity()
        );
    }
    out.add_csv(&format!("{stem}.csv"), |b| fio::write_forces(b, forces))?;
    out.add_json(&format!("{stem}.json"), &summary)
}

fn not_converged(comps: &RecoveredComponents) -> Option<CliError> {
    let stuck: Vec<&str> = comps
        .pairs
        .iter()
        .filter(|p| !p.converged())
        .map(|p| p.pair.label())
        .collect();
    (!stuck.is_empty()).then(|| CliError::NotConverged(format!("ICA did not converge for pair {}", stuck.join(", "))))
}

pub fn simulate(ctx: &Ctx, args: SimulateArgs) -> CliResult<()> {
    let mut loader = Loader::default();
    let mut cfg: SimulatorConfig = match &ctx.config {
        Some(p) => loader.json(p)?,
        None => default_simulator_config(),
    };
    let seed = ctx.seed.unwrap_or(cfg.seed);
    cfg.seed = seed;
    // one seed drives both draws; the offset keeps the two streams apart
    cfg.noise.rng_seed = seed.wrapping_add(1);

    let traj = match &args.trajectory {
        Some(path) => {
            cfg.profile = None;
            loader.load(path, |b| fio::read_trajectory(b))?
        }
        None => {
            let mut spec = cfg.profile.unwrap_or_default();
            if let Some(p) = args.profile {
                spec.kind = match p {
                    ProfileArg::Zero => ProfileKind::Zero,
                    ProfileArg::Tearing => ProfileKind::Tearing,
                    ProfileArg::Mixed => ProfileKind::Mixed,
                    ProfileArg::PureFz => ProfileKind::PureFz,
                    ProfileArg::Ramp => ProfileKind::Ramp,
                };
            }
            if let Some(n) = args.samples {
                spec.samples = n;
            }
            if let Some(a) = args.amplitude {
                spec.amplitude_n = a;
            }
            spec.seed = seed;
            cfg.profile = Some(spec);
            spec.generate()?
        }
    };
    cfg.validate()?;
    let calib = cfg.calibration.clone().into_model()?;
    let sim = fbgforce::signal::simulate_frame(&traj, &calib, &cfg.noise)?;

    let mut out = Outputs::default();
    out.add_csv("frame.csv", |b| fio::write_frame(b, &sim.frame))?;
    out.add_csv("truth.csv", |b| fio::write_truth(b, &sim))?;
    out.add_csv("trajectory.csv", |b| fio::write_trajectory(b, &traj))?;
    // the generating calibration, ready for the processing commands
    out.add_json("calibration.json", &cfg.calibration)?;
    let mut manifest = Manifest::new("simulate", Some(seed), cfg, loader.inputs)?;
    manifest.outputs = out.entries();
    out.add_json("manifest.json", &manifest)?;
    out.commit(&ctx.output)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct FitReport {
    fits: Vec<AxisFit>,
    z_check: Option<ZInsensitivityReport>,
    diagonally_dominant: bool,
    k_inverse_n_per_nm: Mat2,
    c_inverse_n_per_nm: Mat2,
}

pub fn calibrate(ctx: &Ctx, args: CalibrateArgs) -> CliResult<()> {
    let mut loader = Loader::default();
    let mut load_run = |path: &Path| -> CliResult<_> {
        let sidecar: RunSidecar = loader.json(&path.with_extension("json"))?;
        loader.load(path, |b| fio::read_run(b, &sidecar))
    };
    let runs = args.runs.iter().map(|p| load_run(p)).collect::<CliResult<Vec<_>>>()?;
    let z_run = args.z_run.as_deref().map(&mut load_run).transpose()?;

    let (bend_k_n, bend_alpha) = default_bend();
    let fits = runs.iter().map(fit_axis).collect::<fbgforce::Result<Vec<_>>>()?;
    let model = assemble_model(
        &fits,
        args.k_n.unwrap_or(bend_k_n),
        args.alpha.unwrap_or(bend_alpha),
        args.capacity.unwrap_or(DEFAULT_CAPACITY_N),
    )?;
    let z_check = z_run
        .as_ref()
        .map(|r| check_z_insensitivity(r, DEFAULT_Z_DOMINANCE))
        .transpose()?;
    for f in &fits {
        for (s, fit) in f.sensors.iter().enumerate() {
            if fit.poor_fit {
                eprintln!("warning: {:?} run, sensor {}: R² = {:.4}", f.axis, s + 1, fit.r_squared);
            }
        }
    }
    let report = FitReport {
        fits,
        z_check,
        diagonally_dominant: model.diagonally_dominant(),
        k_inverse_n_per_nm: model.k_inverse_n_per_nm(),
        c_inverse_n_per_nm: model.c_inverse_n_per_nm(),
    };
    let mut out = Outputs::default();
    out.add_json("calibration.json", &model.to_file())?;
    out.add_json("fit_report.json", &report)?;
    out.commit(&ctx.output)?;
    Ok(())
}

pub fn filter(ctx: &Ctx, args: FilterArgs) -> CliResult<()> {
    let cfg = PipelineConfig::load(ctx.config.as_deref())?;
    let mut settings = cfg.settings.clone();
    if let Some(e) = args.epsilon_pm {
        settings.filter.epsilon_pm = e;
    }
    settings.filter.validate()?;
    let frame = Loader::default().frame(&require(args.input, cfg.input, "input frame")?)?;

    let filtered = filter_instability(&frame, &settings.filter)?;
    let report = filter_report(&frame, &filtered)?;
    let mut out = Outputs::default();
    emit_filter(&mut out, &filtered, &report)?;
    out.commit(&ctx.output)?;
    Ok(())
}

pub fn classify(ctx: &Ctx, args: ClassifyArgs) -> CliResult<()> {
    let cfg = PipelineConfig::load(ctx.config.as_deref())?;
    let mut settings = cfg.settings.clone();
    if let Some(b) = args.removed_bins {
        settings.classifier.removed_bins = b;
    }
    if let Some(t) = args.r2_threshold {
        settings.classifier.r2_threshold = t;
    }
    settings.classifier.validate()?;
    let frame = Loader::default().frame(&require(args.input, cfg.input, "input frame")?)?;

    let classes = classify_frame(&frame, &settings.classifier)?;
    let mut out = Outputs::default();
    emit_classes(&mut out, &classes)?;
    out.commit(&ctx.output)?;
    Ok(())
}

pub fn decouple(ctx: &Ctx, args: DecoupleArgs) -> CliResult<()> {
    let cfg = PipelineConfig::load(ctx.config.as_deref())?;
    let mut settings = cfg.settings.clone();
    if let Some(a2) = args.a2 {
        settings.ica.a2 = a2;
    }
    if let Some(m) = args.max_iter {
        settings.ica.max_iterations = m;
    }
    settings.ica.rng_seed = ica_seed(ctx, &cfg)?;
    settings.ica.validate()?;
    let mut loader = Loader::default();
    let calib = loader.calibration(&require(args.calibration, cfg.calibration, "calibration")?)?;
    let classes: [LoadingClass; 2] = loader.json(&args.classification)?;
    let frame = loader.frame(&require(args.input, cfg.input, "input frame")?)?;

    let comps = decouple_frame(&frame, &classes, &calib, &settings.ica)?;
    let mut out = Outputs::default();
    emit_components(&mut out, &comps)?;
    out.commit(&ctx.output)?;
    not_converged(&comps).map_or(Ok(()), Err)
}

pub fn forces(ctx: &Ctx, args: ForcesArgs) -> CliResult<()> {
    let cfg = PipelineConfig::load(ctx.config.as_deref())?;
    validate(&cfg.settings)?;
    let mut loader = Loader::default();
    let calib = loader.calibration(&require(args.calibration, cfg.calibration, "calibration")?)?;

    let mut out = Outputs::default();
    if let Some(dir) = &args.components {
        let sidecar: ComponentsSidecar = loader.json(&dir.join(COMPONENT_SIDECAR))?;
        let first = loader.load(&dir.join(COMPONENT_FILES[0]), |b| Ok(b.to_vec()))?;
        let second = loader.load(&dir.join(COMPONENT_FILES[1]), |b| Ok(b.to_vec()))?;
        let comps = fio::read_components(first.as_slice(), second.as_slice(), sidecar)
            .map_err(|source| CliError::Input {
                path: dir.clone(),
                source,
            })?;
        let forces = reconstruct(&comps, &calib)?;
        let consistency = consistency_check(&forces.fx1, &forces.fx2, cfg.settings.consistency_tolerance_n)?;
        emit_forces(&mut out, "forces", DecoupleMode::Ica, &forces, Some(&consistency), &calib)?;
    } else if let Some(path) = &args.frame {
        let frame = loader.frame(path)?;
        let forces = naive_forces(&frame, &calib)?;
        emit_forces(&mut out, "forces", DecoupleMode::Naive, &forces, None, &calib)?;
    }
    out.commit(&ctx.output)?;
    Ok(())
}

fn session(forces: &ForceSeries, settings: &PipelineSettings, window: Option<&str>) -> CliResult<SessionReport> {
    let [a, b] = window_for(forces.len(), window, settings.window)?;
    Ok(analyze_session(forces, a..b, &settings.analysis)?)
}

pub fn analyze(ctx: &Ctx, args: AnalyzeArgs) -> CliResult<()> {
    let cfg = PipelineConfig::load(ctx.config.as_deref())?;
    let mut settings = cfg.settings.clone();
    apply_window_args(&mut settings, &args.window);
    settings.analysis.validate()?;
    let forces = Loader::default().load(&require(args.input, cfg.input, "force file")?, |b| fio::read_forces(b))?;

    let report = session(&forces, &settings, args.window.window.as_deref())?;
    let mut out = Outputs::default();
    out.add_json("analysis.json", &report)?;
    out.commit(&ctx.output)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct PipelineRecord {
    settings: PipelineSettings,
}

pub fn pipeline(ctx: &Ctx, args: PipelineArgs) -> CliResult<()> {
    let cfg = PipelineConfig::load(ctx.config.as_deref())?;
    let mut settings = cfg.settings.clone();
    if let Some(m) = args.decouple_mode {
        settings.decouple_mode = match m {
            ModeArg::Ica => DecoupleMode::Ica,
            ModeArg::Naive => DecoupleMode::Naive,
            ModeArg::Both => DecoupleMode::Both,
        };
    }
    let seed = if settings.decouple_mode.uses_ica() {
        Some(ica_seed(ctx, &cfg)?)
    } else {
        effective_seed(ctx, &cfg)
    };
    settings.ica.rng_seed = seed.unwrap_or(0);
    validate(&settings)?;
    let mut loader = Loader::default();
    let calib = loader.calibration(&require(args.calibration, cfg.calibration.clone(), "calibration")?)?;
    let frame = loader.frame(&require(args.input, cfg.input.clone(), "input frame")?)?;
    // checked before running so a bad window fails as a usage error
    window_for(frame.len(), None, settings.window)?;

    let run = run_pipeline(&frame, &calib, &settings)?;

    let mut out = Outputs::default();
    emit_filter(&mut out, &run.filtered, &run.filter_report)?;
    emit_classes(&mut out, &run.classes)?;
    if let Some(ica) = &run.ica {
        emit_components(&mut out, &ica.components)?;
        emit_forces(&mut out, "forces", DecoupleMode::Ica, &ica.forces, Some(&ica.consistency), &calib)?;
    }
    if let Some(naive) = &run.naive {
        let stem = if run.ica.is_some() { "forces_naive" } else { "forces" };
        emit_forces(&mut out, stem, DecoupleMode::Naive, naive, None, &calib)?;
    }
    if let Some(cmp) = &run.comparison {
        out.add_json("comparison.json", cmp)?;
    }
    out.add_json("analysis.json", &run.analysis)?;
    let mut manifest = Manifest::new("pipeline", seed, PipelineRecord { settings }, loader.inputs)?;
    manifest.outputs = out.entries();
    out.add_json("manifest.json", &manifest)?;
    out.commit(&ctx.output)?;

    match &run.ica {
        Some(ica) => not_converged(&ica.components).map_or(Ok(()), Err),
        None => Ok(()),
    }
}

#[derive(Debug, Serialize)]
struct ReportFile<'a> {
    rows: &'a [TableRow],
    analysis: Option<&'a SessionReport>,
}

pub fn report(ctx: &Ctx, args: ReportArgs) -> CliResult<()> {
    let cfg = PipelineConfig::load(ctx.config.as_deref())?;
    let mut settings = cfg.settings.clone();
    apply_window_args(&mut settings, &args.window);
    settings.analysis.validate()?;
    let mut loader = Loader::default();

    let (rows, analysis) = if let Some(path) = &args.table {
        let table: TableFile = loader.json(path)?;
        (table.rows, None)
    } else {
        let path = args.input.as_deref().expect("clap requires one source");
        let forces = loader.load(path, |b| fio::read_forces(b))?;
        let s = session(&forces, &settings, args.window.window.as_deref())?;
        (rows_from_session(&s), Some(s))
    };
    let text = render(&rows);
    let mut out = Outputs::default();
    out.add_json(
        "report.json",
        &ReportFile {
            rows: &rows,
            analysis: analysis.as_ref(),
        },
    )?;
    out.commit(&ctx.output)?;
    print!("{text}");
    Ok(())
}
