use std::path::Path;
use std::time::Instant;

use nullfreq::datagen::generate_dependent;
use nullfreq::dist::t_to_z;
use nullfreq::experiments::{self, Design};
use nullfreq::mtp::{bh_reject, PValueVector};
use nullfreq::proportion::{NullSource, ProportionGrid};
use nullfreq::{estimate_null, NullParams, SampleVector};
use serde_json::json;

use crate::config;
use crate::error::{CliError, Result};
use crate::input::read_column;
use crate::report::RunReport;

fn sample(values: Vec<f64>) -> Result<SampleVector> {
    Ok(SampleVector::new(values)?)
}

pub fn estimate_null_cmd(path: &str, gamma: f64) -> Result<RunReport> {
    let start = Instant::now();
    let col = read_column(path, 2)?;
    let data = sample(col.values)?;
    let (fit, choice) = estimate_null(&data, gamma)?;
    let outputs = json!({
        "mu0": fit.mu0,
        "sigma0": fit.sigma0(),
        "sigma0_sq": fit.sigma0_sq,
        "t_hat": choice.t_hat,
        "gamma": gamma,
        "threshold": choice.threshold,
    });
    Ok(RunReport::new("estimate-null", json!({ "gamma": gamma }), Some(col.digest), outputs)
        .with_elapsed(start.elapsed()))
}

/// Plug-in estimate unless `known` gives the null.
pub fn estimate_proportion_cmd(
    path: &str,
    gamma_null: f64,
    gamma: f64,
    known: Option<(f64, f64)>,
) -> Result<RunReport> {
    let start = Instant::now();
    let col = read_column(path, 2)?;
    let data = sample(col.values)?;
    let (fit, source) = match known {
        Some((mu0, sigma0)) => (NullParams::from_sd(mu0, sigma0)?, NullSource::Given),
        None => (estimate_null(&data, gamma_null)?.0, NullSource::PlugIn),
    };
    let est = ProportionGrid::new(&data, gamma)?.estimate(fit, source)?;
    let config = json!({
        "gamma": gamma,
        "gamma_null": known.is_none().then_some(gamma_null),
        "known_null": known.map(|(m, s)| json!({ "mu0": m, "sigma0": s })),
    });
    let outputs = json!({
        "epsilon_hat": est.epsilon_hat,
        "t_max": est.t_max,
        "argmax_t": est.argmax_t,
        "mu0": fit.mu0,
        "sigma0": fit.sigma0(),
        "null_source": est.null_source,
    });
    let mut r = RunReport::new("estimate-proportion", config, Some(col.digest), outputs);
    if est.exceeds_one {
        r.warnings.push(format!("estimate {:.4} exceeds 1; the null is probably a poor fit", est.epsilon_hat));
    }
    Ok(r.with_elapsed(start.elapsed()))
}

pub fn bh_cmd(path: &str, q: f64) -> Result<RunReport> {
    let start = Instant::now();
    let col = read_column(path, 1)?;
    let p = PValueVector::new(col.values)
        .map_err(|e| CliError::Input { path: path.to_string(), message: e.to_string() })?;
    let rej = bh_reject(&p, q)?;
    let outputs = json!({
        "rejections": rej.len(),
        "threshold": rej.threshold,
        "rejected": rej.rejected,
    });
    Ok(RunReport::new("bh", json!({ "q": q }), Some(col.digest), outputs).with_elapsed(start.elapsed()))
}

/// t statistics to z-scores; the z-scores go to `out` (or the report).
pub fn zscore_cmd(path: &str, df: u32, out: Option<&Path>) -> Result<RunReport> {
    let start = Instant::now();
    let col = read_column(path, 1)?;
    let z = col.values.iter().map(|&y| t_to_z(y, df)).collect::<nullfreq::Result<Vec<f64>>>()?;
    let outputs = match out {
        Some(p) => {
            write_file(p, &lines(&z))?;
            json!({ "written": p.display().to_string(), "values": z.len() })
        }
        None => json!({ "z": z }),
    };
    Ok(RunReport::new("zscore", json!({ "df": df }), Some(col.digest), outputs).with_elapsed(start.elapsed()))
}

fn lines(v: &[f64]) -> String {
    let mut s = String::with_capacity(v.len() * 20);
    for x in v {
        s.push_str(&x.to_string());
        s.push('\n');
    }
    s
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path.display(), e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimDesign {
    Experiment(Design),
    Sample,
}

/// Runs an experiment design (or draws one synthetic sample) and writes the
/// artifacts into `out`.
pub fn simulate_cmd(
    design: Option<SimDesign>,
    config_path: Option<&str>,
    seed: Option<u64>,
    out: &Path,
) -> Result<RunReport> {
    let start = Instant::now();
    let (text, file) = match config_path {
        Some(p) => (config::read_config(p)?, p.to_string()),
        None => {
            let d = design.ok_or_else(|| CliError::Config {
                file: "<none>".into(),
                message: "give --design, --config or both".into(),
            })?;
            let text = match d {
                SimDesign::Experiment(e) => config::builtin(e),
                SimDesign::Sample => config::SAMPLE,
            };
            (text.to_string(), "<built-in>".to_string())
        }
    };
    let is_sample = design == Some(SimDesign::Sample);
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out.display(), e))?;

    if is_sample {
        let cfg = config::parse_sample(&text, &file, seed)?;
        let s = cfg.seed.expect("seed resolved");
        let (data, truth) = generate_dependent(&cfg.spec, cfg.lag, nullfreq::datagen::RngSeed::new(s))
            .map_err(|e| CliError::from_core(&file, e))?;
        let mut truth_csv = String::from("index,mu,sigma,is_null\n");
        for (i, r) in truth.records.iter().enumerate() {
            truth_csv.push_str(&format!("{i},{},{},{}\n", r.mu, r.sigma, r.is_null));
        }
        let artifacts = [("sample.txt", lines(data.values())), ("truth.csv", truth_csv)];
        let mut written = Vec::new();
        for (name, body) in &artifacts {
            let p = out.join(name);
            write_file(&p, body)?;
            written.push(p.display().to_string());
        }
        let outputs = json!({
            "design": "sample",
            "n": data.len(),
            "nonnull": truth.nonnull_count(),
            "epsilon_n": truth.epsilon_n(),
            "artifacts": written,
        });
        let config = serde_json::to_value(&cfg).expect("config serializes");
        return Ok(RunReport::new("simulate", config, None, outputs).with_elapsed(start.elapsed()));
    }

    let cfg = config::parse_experiment(&text, &file, seed)?;
    if let Some(SimDesign::Experiment(d)) = design {
        if d != cfg.design {
            return Err(CliError::Config {
                file,
                message: format!("design: config says {}, --design says {}", cfg.design.name(), d.name()),
            });
        }
    }
    let result = experiments::run(&cfg).map_err(|e| CliError::from_core(&file, e))?;
    let mut written = Vec::new();
    for (name, body) in result.artifacts() {
        let p = out.join(&name);
        write_file(&p, &body)?;
        written.push(p.display().to_string());
    }
    let mut outputs = result.to_json_value();
    outputs["artifacts"] = json!(written);
    let config = serde_json::to_value(&cfg).expect("config serializes");
    let mut r = RunReport::new("simulate", config, None, outputs);
    if let experiments::ExperimentOutput::Table(t) = &result {
        let failures: usize = t.rows.iter().map(|r| r.failures).sum();
        if failures > 0 {
            r.warnings.push(format!("{failures} replicates failed and were left out of the averages"));
        }
    }
    Ok(r.with_elapsed(start.elapsed()))
}
