use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nullfreq::experiments::Design;
use nullfreq_cli::commands::{self, SimDesign};
use nullfreq_cli::{CliError, RunReport};

/// Empirical null and non-null proportion estimates for z-scores.
///
/// Exit codes: 0 success, 1 I/O error, 2 input error, 3 estimation failure, 4 config error.
#[derive(Parser)]
#[command(name = "nullfreq", version)]
struct Cli {
    /// Print the run report as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the null mean and standard deviation.
    EstimateNull {
        /// File with one z-score per line.
        path: String,
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
    },
    /// Estimate the proportion of non-null effects.
    ///
    /// Uses the estimated null unless both --mu0 and --sigma0 are given.
    EstimateProportion {
        /// File with one z-score per line.
        path: String,
        /// Exponent for the proportion's frequency range.
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        /// Exponent for the plug-in null estimate.
        #[arg(long, default_value_t = 0.1)]
        gamma_null: f64,
        /// Known null mean.
        #[arg(long, requires = "sigma0", allow_hyphen_values = true)]
        mu0: Option<f64>,
        /// Known null standard deviation.
        #[arg(long, requires = "mu0")]
        sigma0: Option<f64>,
    },
    /// Run a simulation design and write CSV/JSON artifacts.
    Simulate {
        /// Design to run; required for `sample`, otherwise read from --config.
        #[arg(long, value_enum)]
        design: Option<DesignArg>,
        /// TOML config; defaults to the built-in config of --design.
        #[arg(long)]
        config: Option<String>,
        /// Base seed; overrides the config.
        #[arg(long, env = "NULLFREQ_SEED")]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads for replicates (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Benjamini–Hochberg step-up on a file of p-values.
    Bh {
        /// File with one p-value per line.
        path: String,
        #[arg(long, default_value_t = 0.05)]
        q: f64,
    },
    /// Convert t statistics to z-scores through their p-values.
    Zscore {
        /// File with one t statistic per line.
        path: String,
        /// Degrees of freedom of the t statistics.
        #[arg(long)]
        df: u32,
        /// Write the z-scores here instead of into the report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DesignArg {
    GammaSweep,
    ConsistencyTable,
    DependenceSweep,
    FdrMisspec,
    Sample,
}

impl From<DesignArg> for SimDesign {
    fn from(d: DesignArg) -> Self {
        match d {
            DesignArg::GammaSweep => SimDesign::Experiment(Design::GammaSweep),
            DesignArg::ConsistencyTable => SimDesign::Experiment(Design::ConsistencyTable),
            DesignArg::DependenceSweep => SimDesign::Experiment(Design::DependenceSweep),
            DesignArg::FdrMisspec => SimDesign::Experiment(Design::FdrMisspec),
            DesignArg::Sample => SimDesign::Sample,
        }
    }
}

fn run(cmd: Command) -> Result<RunReport, CliError> {
    match cmd {
        Command::EstimateNull { path, gamma } => commands::estimate_null_cmd(&path, gamma),
        Command::EstimateProportion { path, gamma, gamma_null, mu0, sigma0 } => {
            commands::estimate_proportion_cmd(&path, gamma_null, gamma, mu0.zip(sigma0))
        }
        Command::Simulate { design, config, seed, out, threads } => {
            let job = || commands::simulate_cmd(design.map(Into::into), config.as_deref(), seed, &out);
            match threads {
                Some(k) => rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build()
                    .map_err(|e| CliError::Config { file: "--threads".into(), message: e.to_string() })?
                    .install(job),
                None => job(),
            }
        }
        Command::Bh { path, q } => commands::bh_cmd(&path, q),
        Command::Zscore { path, df, out } => commands::zscore_cmd(&path, df, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(report) => {
            if cli.json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Estimation(nullfreq::Error::FrequencyNotFound { .. }) = e {
                eprintln!("hint: rerun with a larger --gamma");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
