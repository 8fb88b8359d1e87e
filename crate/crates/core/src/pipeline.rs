//! End-to-end processing of one recording.

use serde::{Deserialize, Serialize};

use crate::analysis::{analyze_session, SessionReport, TestConfig};
use crate::calibration::{naive_decouple, CalibrationModel};
use crate::classify::{classify_frame, ClassifierConfig, LoadingClass};
use crate::error::Error;
use crate::forces::{
    consistency_check, estimate_fz, reconstruct, ConsistencyReport, ForceColumn, ForceSeries,
    DEFAULT_CONSISTENCY_TOLERANCE_N,
};
use crate::ica::{decouple_frame, IcaConfig, RecoveredComponents};
use crate::preprocess::{filter_instability, filter_report, FilterConfig, FilterReport};
use crate::signal::{SensorPair, WavelengthFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoupleMode {
    #[default]
    Ica,
    Naive,
    Both,
}

impl DecoupleMode {
    pub fn uses_ica(self) -> bool {
        matches!(self, DecoupleMode::Ica | DecoupleMode::Both)
    }

    pub fn uses_naive(self) -> bool {
        matches!(self, DecoupleMode::Naive | DecoupleMode::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSettings {
    pub filter: FilterConfig,
    pub classifier: ClassifierConfig,
    pub ica: IcaConfig,
    pub analysis: TestConfig,
    pub decouple_mode: DecoupleMode,
    /// Analysis window in samples; the whole record when absent.
    pub window: Option<[usize; 2]>,
    pub consistency_tolerance_n: f64,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        PipelineSettings {
            filter: FilterConfig::default(),
            classifier: ClassifierConfig::default(),
            ica: IcaConfig::default(),
            analysis: TestConfig::default(),
            decouple_mode: DecoupleMode::Ica,
            window: None,
            consistency_tolerance_n: DEFAULT_CONSISTENCY_TOLERANCE_N,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Filter,
    Classify,
    Decouple,
    Forces,
    Analyze,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Stage::Filter => "filter",
            Stage::Classify => "classify",
            Stage::Decouple => "decouple",
            Stage::Forces => "forces",
            Stage::Analyze => "analyze",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed: {source}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, StageError>;
}

impl<T> AtStage<T> for crate::Result<T> {
    fn at(self, stage: Stage) -> Result<T, StageError> {
        self.map_err(|source| StageError { stage, source })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcaOutput {
    pub components: RecoveredComponents,
    pub forces: ForceSeries,
    pub consistency: ConsistencyReport,
}

/// Side-by-side view of the two decoupling paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// RMS of (ICA - naive) per force column, N.
    pub rms_difference: Vec<(ForceColumn, f64)>,
    /// Pearson correlation between the two ICA components of each pair.
    pub ica_component_correlation: [Option<f64>; 2],
    /// Pearson correlation between the naive F_x and F_y of each pair.
    pub naive_force_correlation: [Option<f64>; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub filtered: WavelengthFrame,
    pub filter_report: FilterReport,
    pub classes: [LoadingClass; 2],
    pub ica: Option<IcaOutput>,
    pub naive: Option<ForceSeries>,
    pub analysis: SessionReport,
    pub comparison: Option<Comparison>,
}

impl PipelineOutput {
    /// Forces the analysis ran on: ICA when available, naive otherwise.
    pub fn primary_forces(&self) -> &ForceSeries {
        match (&self.ica, &self.naive) {
            (Some(i), _) => &i.forces,
            (None, Some(n)) => n,
            (None, None) => unreachable!("at least one decoupling path runs"),
        }
    }

    pub fn converged(&self) -> bool {
        self.ica.as_ref().is_none_or(|i| i.components.converged())
    }
}

pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len();
    if n < 2 || b.len() != n {
        return None;
    }
    let ma = a.iter().sum::<f64>() / n as f64;
    let mb = b.iter().sum::<f64>() / n as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    (saa > 0.0 && sbb > 0.0).then(|| sab / (saa * sbb).sqrt())
}

pub fn rms_difference(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    (a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64).sqrt()
}

/// Naive path: calibration inverse, then the z estimate.
pub fn naive_forces(frame: &WavelengthFrame, calib: &CalibrationModel) -> crate::Result<ForceSeries> {
    let planar = naive_decouple(frame, calib);
    let fz = estimate_fz(&planar.fy1, &planar.fy2, calib)?;
    ForceSeries::new(frame.sample_rate(), frame.start_time(), planar, fz, None)
}

fn compare(ica: &IcaOutput, naive: &ForceSeries) -> Comparison {
    let rms_difference = ForceColumn::ALL
        .into_iter()
        .map(|c| (c, rms_difference(ica.forces.column(c), naive.column(c))))
        .collect();
    let ica_component_correlation = SensorPair::BOTH.map(|p| {
        let pc = ica.components.pair(p);
        pearson(&pc.components[0], &pc.components[1])
    });
    let naive_force_correlation = [pearson(&naive.fx1, &naive.fy1), pearson(&naive.fx2, &naive.fy2)];
    Comparison {
        rms_difference,
        ica_component_correlation,
        naive_force_correlation,
    }
}

pub fn run_pipeline(
    frame: &WavelengthFrame,
    calib: &CalibrationModel,
    settings: &PipelineSettings,
) -> Result<PipelineOutput, StageError> {
    let filtered = filter_instability(frame, &settings.filter).at(Stage::Filter)?;
    let filter_report = filter_report(frame, &filtered).at(Stage::Filter)?;
    let classes = classify_frame(&filtered, &settings.classifier).at(Stage::Classify)?;

    let ica = if settings.decouple_mode.uses_ica() {
        let components = decouple_frame(&filtered, &classes, calib, &settings.ica).at(Stage::Decouple)?;
        let forces = reconstruct(&components, calib).at(Stage::Forces)?;
        let consistency =
            consistency_check(&forces.fx1, &forces.fx2, settings.consistency_tolerance_n).at(Stage::Forces)?;
        Some(IcaOutput {
            components,
            forces,
            consistency,
        })
    } else {
        None
    };
    let naive = if settings.decouple_mode.uses_naive() {
        Some(naive_forces(&filtered, calib).at(Stage::Forces)?)
    } else {
        None
    };
    let comparison = match (&ica, &naive) {
        (Some(i), Some(n)) => Some(compare(i, n)),
        _ => None,
    };

    let primary = ica.as_ref().map(|i| &i.forces).or(naive.as_ref()).expect("a decoupling path ran");
    let window = settings.window.unwrap_or([0, primary.len()]);
    let analysis = analyze_session(primary, window[0]..window[1], &settings.analysis).at(Stage::Analyze)?;

    Ok(PipelineOutput {
        filtered,
        filter_report,
        classes,
        ica,
        naive,
        analysis,
        comparison,
    })
}
