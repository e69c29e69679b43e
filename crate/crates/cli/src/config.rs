//! Experiment configs (TOML) and seed resolution.

use nullfreq::datagen::MixtureSpec;
use nullfreq::experiments::{Design, ExperimentConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Seed used when neither `--seed`, `NULLFREQ_SEED` nor the config sets one.
pub const DEFAULT_SEED: u64 = 20110;

pub const GAMMA_SWEEP: &str = include_str!("../../../configs/gamma_sweep.toml");
pub const CONSISTENCY_TABLE: &str = include_str!("../../../configs/consistency_table.toml");
pub const DEPENDENCE_SWEEP: &str = include_str!("../../../configs/dependence_sweep.toml");
pub const FDR_MISSPEC: &str = include_str!("../../../configs/fdr_misspec.toml");
pub const SAMPLE: &str = include_str!("../../../configs/sample.toml");

/// Config of the `sample` design: one synthetic data set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub spec: MixtureSpec,
    #[serde(default)]
    pub lag: usize,
    pub seed: Option<u64>,
}

/// Raw seed field of an experiment config, read before full parsing so an
/// absent seed can fall back to [`DEFAULT_SEED`] instead of the library's 0.
#[derive(Deserialize)]
struct SeedProbe {
    seed: Option<u64>,
}

pub fn builtin(design: Design) -> &'static str {
    match design {
        Design::GammaSweep => GAMMA_SWEEP,
        Design::ConsistencyTable => CONSISTENCY_TABLE,
        Design::DependenceSweep => DEPENDENCE_SWEEP,
        Design::FdrMisspec => FDR_MISSPEC,
    }
}

fn toml_error(file: &str, e: toml::de::Error) -> CliError {
    CliError::Config { file: file.to_string(), message: e.message().trim().to_string() + &span_hint(&e) }
}

fn span_hint(e: &toml::de::Error) -> String {
    e.span().map(|s| format!(" (at byte {})", s.start)).unwrap_or_default()
}

/// `flag` (which already folds in `NULLFREQ_SEED`) wins over the config's
/// seed, which wins over [`DEFAULT_SEED`].
pub fn resolve_seed(flag: Option<u64>, from_config: Option<u64>) -> u64 {
    flag.or(from_config).unwrap_or(DEFAULT_SEED)
}

pub fn parse_experiment(text: &str, file: &str, seed_flag: Option<u64>) -> Result<ExperimentConfig> {
    let probe: SeedProbe = toml::from_str(text).map_err(|e| toml_error(file, e))?;
    let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| toml_error(file, e))?;
    cfg.seed = resolve_seed(seed_flag, probe.seed);
    cfg.validate().map_err(|e| CliError::from_core(file, e))?;
    Ok(cfg)
}

pub fn parse_sample(text: &str, file: &str, seed_flag: Option<u64>) -> Result<SampleConfig> {
    let mut cfg: SampleConfig = toml::from_str(text).map_err(|e| toml_error(file, e))?;
    cfg.seed = Some(resolve_seed(seed_flag, cfg.seed));
    cfg.spec.validate_at("spec").map_err(|e| CliError::from_core(file, e))?;
    Ok(cfg)
}

pub fn read_config(path: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config { file: path.to_string(), message: e.to_string() })
}
