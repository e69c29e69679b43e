//! Monte-Carlo studies: gamma sweep, consistency in `n`, dependence sweep and
//! the misspecified-null FDR demonstration.
//!
//! Replicates run in parallel on the current rayon pool. Each replicate draws
//! from its own stream (`RngSeed::derive(cell).replicate(r)`) and results are
//! reduced in replicate order, so output is identical for any thread count.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::datagen::{generate, generate_dependent, MixtureSpec, RngSeed, SdDist};
use crate::error::{Error, Result};
use crate::mtp::{bh_reject, confusion, pvalues_from_z};
use crate::null::{estimate_null, estimate_null_at, FrequencyScanner, NullParams, DEFAULT_GAMMA};
use crate::proportion::{NullSource, ProportionGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Design {
    GammaSweep,
    ConsistencyTable,
    DependenceSweep,
    FdrMisspec,
}

impl Design {
    pub fn name(self) -> &'static str {
        match self {
            Design::GammaSweep => "gamma_sweep",
            Design::ConsistencyTable => "consistency_table",
            Design::DependenceSweep => "dependence_sweep",
            Design::FdrMisspec => "fdr_misspec",
        }
    }
}

fn default_gamma() -> f64 {
    DEFAULT_GAMMA
}

fn default_q() -> f64 {
    0.05
}

fn default_misspecified() -> NullParams {
    NullParams::standard()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub design: Design,
    pub spec: MixtureSpec,
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    /// Frequency exponent for the null estimators.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// `gamma_sweep`: exponents to evaluate on every data set.
    #[serde(default)]
    pub gammas: Vec<f64>,
    /// `gamma_sweep`: non-null sd drawn from `U(a, a + 0.5)` for each `a`.
    #[serde(default)]
    pub a_values: Vec<f64>,
    /// `consistency_table`: sample sizes.
    #[serde(default)]
    pub ns: Vec<usize>,
    /// `dependence_sweep`: moving-average lags.
    #[serde(default)]
    pub lags: Vec<usize>,
    /// `fdr_misspec`: BH level.
    #[serde(default = "default_q")]
    pub q: f64,
    /// `fdr_misspec`: null used for the misspecified arm.
    #[serde(default = "default_misspecified")]
    pub misspecified_null: NullParams,
    /// Also estimate the proportion (plug-in) in null-estimation designs.
    #[serde(default)]
    pub estimate_proportion: bool,
    #[serde(default = "default_gamma")]
    pub gamma_proportion: f64,
}

impl ExperimentConfig {
    /// Config with defaults for everything but the design, spec and replicate count.
    pub fn new(design: Design, spec: MixtureSpec, replicates: usize) -> Self {
        ExperimentConfig {
            design,
            spec,
            replicates,
            seed: 0,
            gamma: DEFAULT_GAMMA,
            gammas: Vec::new(),
            a_values: Vec::new(),
            ns: Vec::new(),
            lags: Vec::new(),
            q: default_q(),
            misspecified_null: NullParams::standard(),
            estimate_proportion: false,
            gamma_proportion: DEFAULT_GAMMA,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate_at("spec")?;
        if self.replicates == 0 {
            return Err(Error::config("replicates", "must be at least 1"));
        }
        let gamma_ok = |g: f64| g > 0.0 && g < 0.5;
        if !gamma_ok(self.gamma) {
            return Err(Error::config("gamma", "must lie in (0, 0.5)"));
        }
        if !gamma_ok(self.gamma_proportion) {
            return Err(Error::config("gamma_proportion", "must lie in (0, 0.5)"));
        }
        for (i, &g) in self.gammas.iter().enumerate() {
            if !gamma_ok(g) {
                return Err(Error::config(format!("gammas[{i}]"), format!("{g} is outside (0, 0.5)")));
            }
        }
        let sigma0 = self.spec.null.sigma0();
        for (i, &a) in self.a_values.iter().enumerate() {
            if !(a.is_finite() && a >= sigma0 * (1.0 - 1e-12)) {
                return Err(Error::config(format!("a_values[{i}]"), format!("{a} is below sigma0 = {sigma0}")));
            }
        }
        for (i, &n) in self.ns.iter().enumerate() {
            if n < 2 {
                return Err(Error::config(format!("ns[{i}]"), "must be at least 2"));
            }
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::config("q", "must lie in (0, 1)"));
        }
        if NullParams::new(self.misspecified_null.mu0, self.misspecified_null.sigma0_sq).is_err() {
            return Err(Error::config("misspecified_null", "needs finite mu0 and positive sigma0_sq"));
        }
        match self.design {
            Design::GammaSweep if self.gammas.is_empty() => {
                Err(Error::config("gammas", "gamma_sweep needs at least one gamma"))
            }
            Design::ConsistencyTable if self.ns.is_empty() => {
                Err(Error::config("ns", "consistency_table needs at least one n"))
            }
            Design::DependenceSweep if self.lags.is_empty() => {
                Err(Error::config("lags", "dependence_sweep needs at least one lag"))
            }
            _ => Ok(()),
        }
    }
}

/// One design cell of a [`MetricTable`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub a: Option<f64>,
    pub gamma: f64,
    pub n: usize,
    pub lag: Option<usize>,
    pub replicates: usize,
    pub failures: usize,
    /// Error of `sigma0_hat` on the standard-deviation scale.
    pub mse_sigma0: Option<f64>,
    pub rmse_sigma0: Option<f64>,
    pub mse_sigma0_sq: Option<f64>,
    pub rmse_sigma0_sq: Option<f64>,
    pub mse_mu0: Option<f64>,
    pub rmse_mu0: Option<f64>,
    pub mse_epsilon: Option<f64>,
    pub rmse_epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTable {
    pub design: Design,
    pub seed: u64,
    pub rows: Vec<MetricRow>,
}

fn fmt_opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

const METRICS: [&str; 8] = [
    "mse_sigma0",
    "rmse_sigma0",
    "mse_sigma0_sq",
    "rmse_sigma0_sq",
    "mse_mu0",
    "rmse_mu0",
    "mse_epsilon",
    "rmse_epsilon",
];

impl MetricRow {
    fn metrics(&self) -> [Option<f64>; 8] {
        [
            self.mse_sigma0,
            self.rmse_sigma0,
            self.mse_sigma0_sq,
            self.rmse_sigma0_sq,
            self.mse_mu0,
            self.rmse_mu0,
            self.mse_epsilon,
            self.rmse_epsilon,
        ]
    }
}

impl MetricTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("design,a,gamma,n,lag,replicates,failures,");
        s.push_str(&METRICS.join(","));
        s.push_str(",seed\n");
        for r in &self.rows {
            let _ = write!(
                s,
                "{},{},{},{},{},{},{}",
                self.design.name(),
                fmt_opt(r.a),
                r.gamma,
                r.n,
                fmt_opt(r.lag),
                r.replicates,
                r.failures
            );
            for m in r.metrics() {
                let _ = write!(s, ",{}", fmt_opt(m));
            }
            let _ = writeln!(s, ",{}", self.seed);
        }
        s
    }

    /// One row per (cell, metric), for plotting.
    pub fn to_long_csv(&self) -> String {
        let mut s = String::from("design,a,gamma,n,lag,metric,value\n");
        for r in &self.rows {
            for (name, v) in METRICS.iter().zip(r.metrics()) {
                if let Some(v) = v {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{}",
                        self.design.name(),
                        fmt_opt(r.a),
                        r.gamma,
                        r.n,
                        fmt_opt(r.lag),
                        name,
                        v
                    );
                }
            }
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metric table serializes")
    }
}

/// Estimates from one replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicateEstimate {
    pub null: NullParams,
    pub epsilon_hat: Option<f64>,
    pub epsilon_true: f64,
}

#[derive(Default)]
struct ErrorAccumulator {
    ok: usize,
    failures: usize,
    sigma0: f64,
    sigma0_sq: f64,
    mu0: f64,
    eps: f64,
    eps_count: usize,
}

impl ErrorAccumulator {
    fn push(&mut self, truth: NullParams, est: &Result<ReplicateEstimate>) {
        match est {
            Ok(e) => {
                self.ok += 1;
                self.sigma0 += (e.null.sigma0() - truth.sigma0()).powi(2);
                self.sigma0_sq += (e.null.sigma0_sq - truth.sigma0_sq).powi(2);
                self.mu0 += (e.null.mu0 - truth.mu0).powi(2);
                if let Some(eh) = e.epsilon_hat {
                    self.eps += (eh - e.epsilon_true).powi(2);
                    self.eps_count += 1;
                }
            }
            Err(_) => self.failures += 1,
        }
    }

    fn row(&self, a: Option<f64>, gamma: f64, n: usize, lag: Option<usize>) -> MetricRow {
        let mean = |s: f64, c: usize| if c > 0 { Some(s / c as f64) } else { None };
        let (ms, ms2, mm, me) = (
            mean(self.sigma0, self.ok),
            mean(self.sigma0_sq, self.ok),
            mean(self.mu0, self.ok),
            mean(self.eps, self.eps_count),
        );
        MetricRow {
            a,
            gamma,
            n,
            lag,
            replicates: self.ok + self.failures,
            failures: self.failures,
            mse_sigma0: ms,
            rmse_sigma0: ms.map(f64::sqrt),
            mse_sigma0_sq: ms2,
            rmse_sigma0_sq: ms2.map(f64::sqrt),
            mse_mu0: mm,
            rmse_mu0: mm.map(f64::sqrt),
            mse_epsilon: me,
            rmse_epsilon: me.map(f64::sqrt),
        }
    }
}

/// Seed of design cell `cell` under base seed `seed`.
pub fn cell_seed(seed: u64, cell: usize) -> RngSeed {
    RngSeed::new(seed).derive(cell as u64)
}

/// Null (and optionally plug-in proportion) estimates for one replicate.
pub fn run_replicate(
    cfg: &ExperimentConfig,
    spec: &MixtureSpec,
    lag: usize,
    seed: RngSeed,
) -> Result<ReplicateEstimate> {
    let (data, truth) = generate_dependent(spec, lag, seed)?;
    let (null, _) = estimate_null(&data, cfg.gamma)?;
    let epsilon_hat = if cfg.estimate_proportion {
        let grid = ProportionGrid::new(&data, cfg.gamma_proportion)?;
        Some(grid.estimate(null, NullSource::PlugIn)?.epsilon_hat)
    } else {
        None
    };
    Ok(ReplicateEstimate { null, epsilon_hat, epsilon_true: truth.epsilon_n() })
}

fn replicate_cell(
    cfg: &ExperimentConfig,
    spec: &MixtureSpec,
    lag: usize,
    seed: RngSeed,
) -> Vec<Result<ReplicateEstimate>> {
    (0..cfg.replicates).into_par_iter().map(|r| run_replicate(cfg, spec, lag, seed.replicate(r as u64))).collect()
}

fn aggregate(truth: NullParams, results: &[Result<ReplicateEstimate>]) -> ErrorAccumulator {
    let mut acc = ErrorAccumulator::default();
    for r in results {
        acc.push(truth, r);
    }
    acc
}

/// MSE of both null estimators over a grid of `gamma` for each `a`.
///
/// All exponents are evaluated on the same data set within a replicate.
pub fn run_gamma_sweep(cfg: &ExperimentConfig) -> Result<MetricTable> {
    cfg.validate()?;
    let a_values = if cfg.a_values.is_empty() {
        match cfg.spec.nonnull_sigma {
            SdDist::Uniform { low, .. } => vec![low],
            SdDist::Fixed { value } => vec![value],
        }
    } else {
        cfg.a_values.clone()
    };
    let mut rows = Vec::new();
    for (ai, &a) in a_values.iter().enumerate() {
        let spec = MixtureSpec { nonnull_sigma: SdDist::Uniform { low: a, high: a + 0.5 }, ..cfg.spec };
        let seed = cell_seed(cfg.seed, ai);
        let per_rep: Vec<Vec<Result<ReplicateEstimate>>> = (0..cfg.replicates)
            .into_par_iter()
            .map(|r| match generate(&spec, seed.replicate(r as u64)) {
                Ok((data, truth)) => {
                    let mut scanner = match FrequencyScanner::for_data(&data) {
                        Ok(s) => s,
                        Err(e) => return cfg.gammas.iter().map(|_| Err(e.clone())).collect(),
                    };
                    cfg.gammas
                        .iter()
                        .map(|&g| {
                            let choice = scanner.select(g)?;
                            let null = estimate_null_at(&data, choice)?;
                            Ok(ReplicateEstimate { null, epsilon_hat: None, epsilon_true: truth.epsilon_n() })
                        })
                        .collect()
                }
                Err(e) => cfg.gammas.iter().map(|_| Err(e.clone())).collect(),
            })
            .collect();
        for (gi, &g) in cfg.gammas.iter().enumerate() {
            let mut acc = ErrorAccumulator::default();
            for rep in &per_rep {
                acc.push(spec.null, &rep[gi]);
            }
            rows.push(acc.row(Some(a), g, spec.n, None));
        }
    }
    Ok(MetricTable { design: Design::GammaSweep, seed: cfg.seed, rows })
}

/// MSE of the null estimators at `gamma` for each sample size in `ns`.
pub fn run_consistency_table(cfg: &ExperimentConfig) -> Result<MetricTable> {
    cfg.validate()?;
    let ns = if cfg.ns.is_empty() { vec![cfg.spec.n] } else { cfg.ns.clone() };
    let mut rows = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        let spec = MixtureSpec { n, ..cfg.spec };
        let results = replicate_cell(cfg, &spec, 0, cell_seed(cfg.seed, i));
        rows.push(aggregate(spec.null, &results).row(None, cfg.gamma, n, None));
    }
    Ok(MetricTable { design: Design::ConsistencyTable, seed: cfg.seed, rows })
}

/// RMSE of the null estimators under block-wise dependent noise, per lag.
///
/// Non-null parameters are redrawn in every replicate.
pub fn run_dependence_sweep(cfg: &ExperimentConfig) -> Result<MetricTable> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for (i, &lag) in cfg.lags.iter().enumerate() {
        let results = replicate_cell(cfg, &cfg.spec, lag, cell_seed(cfg.seed, i));
        rows.push(aggregate(cfg.spec.null, &results).row(None, cfg.gamma, cfg.spec.n, Some(lag)));
    }
    Ok(MetricTable { design: Design::DependenceSweep, seed: cfg.seed, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FdrCycle {
    pub cycle: usize,
    pub tp_true_null: usize,
    pub fp_true_null: usize,
    pub tp_misspecified: usize,
    pub fp_misspecified: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdrMisspecReport {
    pub seed: u64,
    pub q: f64,
    pub true_null: NullParams,
    pub misspecified_null: NullParams,
    pub cycles: Vec<FdrCycle>,
    pub mean_tp_true_null: f64,
    pub mean_tp_misspecified: f64,
    /// Cycles where the true null found more true positives.
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    /// One-sided sign test `P(Bin(wins + losses, 1/2) >= wins)`; ties dropped.
    pub sign_test_p_value: f64,
}

/// Exact one-sided sign-test p-value.
pub fn sign_test_p_value(wins: usize, losses: usize) -> f64 {
    let m = wins + losses;
    if m == 0 {
        return 1.0;
    }
    let ln_half = -(m as f64) * std::f64::consts::LN_2;
    let p: f64 = (wins..=m).map(|k| (ln_binomial(m as u64, k as u64) + ln_half).exp()).sum();
    p.min(1.0)
}

impl FdrMisspecReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("cycle,tp_true_null,fp_true_null,tp_misspecified,fp_misspecified\n");
        for c in &self.cycles {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                c.cycle, c.tp_true_null, c.fp_true_null, c.tp_misspecified, c.fp_misspecified
            );
        }
        s
    }

    /// Per-cycle true positives of both arms, ordered by the true-null count.
    pub fn to_sorted_curves_csv(&self) -> String {
        let mut c = self.cycles.clone();
        c.sort_by_key(|c| (c.tp_true_null, c.cycle));
        let mut s = String::from("rank,arm,true_positives\n");
        for (rank, c) in c.iter().enumerate() {
            let _ = writeln!(s, "{rank},true_null,{}", c.tp_true_null);
            let _ = writeln!(s, "{rank},misspecified_null,{}", c.tp_misspecified);
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fdr report serializes")
    }
}

/// BH at level `q` on p-values under the true null and under a misspecified
/// null, per cycle, with true-positive counts for each.
pub fn run_fdr_misspec(cfg: &ExperimentConfig) -> Result<FdrMisspecReport> {
    cfg.validate()?;
    let seed = cell_seed(cfg.seed, 0);
    let cycles: Vec<Result<FdrCycle>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let (data, truth) = generate(&cfg.spec, seed.replicate(r as u64))?;
            let arm = |null: NullParams| -> Result<_> {
                let rej = bh_reject(&pvalues_from_z(&data, null), cfg.q)?;
                confusion(&rej, &truth)
            };
            let t = arm(cfg.spec.null)?;
            let m = arm(cfg.misspecified_null)?;
            Ok(FdrCycle {
                cycle: r,
                tp_true_null: t.true_positives,
                fp_true_null: t.false_positives,
                tp_misspecified: m.true_positives,
                fp_misspecified: m.false_positives,
            })
        })
        .collect();
    let cycles = cycles.into_iter().collect::<Result<Vec<_>>>()?;
    let k = cycles.len() as f64;
    let mean_t = cycles.iter().map(|c| c.tp_true_null as f64).sum::<f64>() / k;
    let mean_m = cycles.iter().map(|c| c.tp_misspecified as f64).sum::<f64>() / k;
    let wins = cycles.iter().filter(|c| c.tp_true_null > c.tp_misspecified).count();
    let losses = cycles.iter().filter(|c| c.tp_true_null < c.tp_misspecified).count();
    Ok(FdrMisspecReport {
        seed: cfg.seed,
        q: cfg.q,
        true_null: cfg.spec.null,
        misspecified_null: cfg.misspecified_null,
        mean_tp_true_null: mean_t,
        mean_tp_misspecified: mean_m,
        wins,
        losses,
        ties: cycles.len() - wins - losses,
        sign_test_p_value: sign_test_p_value(wins, losses),
        cycles,
    })
}

/// Result of any design.
#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentOutput {
    Table(MetricTable),
    Fdr(FdrMisspecReport),
}

impl ExperimentOutput {
    /// Named artifacts (file name, contents) to write to disk.
    pub fn artifacts(&self) -> Vec<(String, String)> {
        match self {
            ExperimentOutput::Table(t) => {
                let d = t.design.name();
                vec![
                    (format!("{d}.csv"), t.to_csv()),
                    (format!("{d}.json"), t.to_json()),
                    (format!("{d}_long.csv"), t.to_long_csv()),
                ]
            }
            ExperimentOutput::Fdr(r) => vec![
                ("fdr_misspec.csv".to_string(), r.to_csv()),
                ("fdr_misspec.json".to_string(), r.to_json()),
                ("fdr_misspec_sorted_long.csv".to_string(), r.to_sorted_curves_csv()),
            ],
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        match self {
            ExperimentOutput::Table(t) => serde_json::to_value(t),
            ExperimentOutput::Fdr(r) => serde_json::to_value(r),
        }
        .expect("experiment output serializes")
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    Ok(match cfg.design {
        Design::GammaSweep => ExperimentOutput::Table(run_gamma_sweep(cfg)?),
        Design::ConsistencyTable => ExperimentOutput::Table(run_consistency_table(cfg)?),
        Design::DependenceSweep => ExperimentOutput::Table(run_dependence_sweep(cfg)?),
        Design::FdrMisspec => ExperimentOutput::Fdr(run_fdr_misspec(cfg)?),
    })
}
