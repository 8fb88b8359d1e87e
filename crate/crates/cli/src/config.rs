//! Configuration files accepted through `--config`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use fbgforce::calibration::CalibrationModel;
use fbgforce::io::SimulatorConfig;
use fbgforce::pipeline::PipelineSettings;
use fbgforce::signal::NoiseSpec;

use crate::error::{CliError, CliResult};

/// Processing configuration shared by every stage command and `pipeline`.
///
/// Relative paths are taken relative to the directory holding the file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub calibration: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub seed: Option<u64>,
    pub settings: PipelineSettings,
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let input = |source| CliError::Input {
        path: path.to_path_buf(),
        source,
    };
    let bytes = std::fs::read(path).map_err(|e| input(e.into()))?;
    serde_json::from_slice(&bytes).map_err(|e| input(e.into()))
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(PipelineConfig::default());
        };
        let mut cfg: PipelineConfig = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.calibration, &mut cfg.input].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

pub fn default_simulator_config() -> SimulatorConfig {
    SimulatorConfig {
        calibration: CalibrationModel::reference_fitted().to_file(),
        prong: None,
        noise: NoiseSpec::default(),
        seed: 0,
        profile: None,
    }
}
