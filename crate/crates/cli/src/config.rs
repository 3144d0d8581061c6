//! Settings resolution: command-line flags, then the JSON config file,
//! then built-in defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use spacobi::linalg::StepSizes;
use spacobi::select::{log_ladder, FitSettings};
use spacobi::{ProxKind, Scaling};

use crate::args::{ModelArgs, Selection};
use crate::CliError;

/// Everything a config file may set. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub val: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub seed: Option<u64>,

    pub gamma: Option<f64>,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub gamma3: Option<f64>,
    pub q: Option<ProxKind>,
    pub nu1: Option<f64>,
    pub nu2: Option<f64>,
    pub nu3: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub neighbors: Option<usize>,
    pub phi: Option<f64>,
    pub scaling: Option<Scaling>,
    pub eps: Option<f64>,
    pub adaptive: Option<bool>,

    pub gamma_ladder: Option<Vec<f64>>,
    pub gamma2_ladder: Option<Vec<f64>>,
    pub gamma3_ladder: Option<Vec<f64>>,
    pub selection: Option<Selection>,
    pub bootstraps: Option<usize>,

    pub n: Option<usize>,
    pub p: Option<usize>,
    pub p_true: Option<usize>,
    pub k: Option<usize>,
    pub r: Option<usize>,
    pub sigma: Option<f64>,
    pub noise_variance: Option<f64>,
    pub mean_grid: Option<Vec<i64>>,
    pub replicates: Option<usize>,
}

/// Default γ ladder: five points from e³ to e⁵·⁵.
pub fn default_gamma_ladder() -> Vec<f64> {
    log_ladder(3.0, 5.5, 5)
}

/// Default γ3 ladder: sixteen points from e⁰ to e⁷·⁵.
pub fn default_gamma3_ladder() -> Vec<f64> {
    log_ladder(0.0, 7.5, 16)
}

pub const DEFAULT_GAMMA: f64 = 50.0;

pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn pick<T: Clone>(flag: &Option<T>, file: &Option<T>, default: T) -> T {
    flag.clone().or_else(|| file.clone()).unwrap_or(default)
}

pub fn pick_opt<T: Clone>(flag: &Option<T>, file: &Option<T>) -> Option<T> {
    flag.clone().or_else(|| file.clone())
}

pub fn settings(m: &ModelArgs, f: &FileConfig) -> FitSettings {
    let d = FitSettings::default();
    FitSettings {
        nu: StepSizes {
            nu1: pick(&m.nu1, &f.nu1, d.nu.nu1),
            nu2: pick(&m.nu2, &f.nu2, d.nu.nu2),
            nu3: pick(&m.nu3, &f.nu3, d.nu.nu3),
        },
        q: pick(&m.q, &f.q, d.q),
        tol: pick(&m.tol, &f.tol, d.tol),
        max_iter: pick(&m.max_iter, &f.max_iter, d.max_iter),
        adaptive: pick(&m.adaptive, &f.adaptive, d.adaptive),
        scaling: pick(&m.scaling.map(Scaling::from), &f.scaling, d.scaling),
        neighbors: pick(&m.neighbors, &f.neighbors, d.neighbors),
        phi: pick(&m.phi, &f.phi, d.phi),
        eps: pick(&m.eps, &f.eps, d.eps),
        ..d
    }
}

/// An input path that must exist before the run starts.
pub fn input_path(flag: &Option<PathBuf>, file: &Option<PathBuf>, what: &str) -> Result<PathBuf, CliError> {
    let path = pick_opt(flag, file).ok_or_else(|| CliError::Parse(format!("missing --{what}")))?;
    if !path.is_file() {
        return Err(CliError::Io(format!("{}: no such file", path.display())));
    }
    Ok(path)
}

/// The output directory, created if needed.
pub fn output_dir(flag: &Option<PathBuf>, file: &Option<PathBuf>) -> Result<PathBuf, CliError> {
    let dir = pick_opt(flag, file).unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}
