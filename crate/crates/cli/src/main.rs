//! Batch front end: schedules, norm reports, verification suites and ray
//! sampling for plots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use lfcnorm::suites::{run_suite, Suite};
use lfcnorm::vectors::p_norm;
use lfcnorm::{Config, Error, NormLab, ParamSchedule, SparseVector};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "lfcnorm",
    version,
    about = "Smooth LFC renormings of l_p: batch interface"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit the delta/theta schedule up to k_max as JSON
    Params {
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate p_norm, nu, psi and the final norm of one vector
    Eval {
        #[command(flatten)]
        common: Common,
        /// Vector file: {"entries": [["label", value], ...]}
        #[arg(long)]
        vector: PathBuf,
    },
    /// Run a verification suite (exit 3 if any check fails)
    Verify {
        #[command(flatten)]
        common: Common,
        /// sandwich, lfc, oracle, smoothness, combinatorics or schedule
        #[arg(long)]
        suite: String,
    },
    /// Sample the norms along x + t·d as CSV
    Ray {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        vector: PathBuf,
        #[arg(long)]
        direction: PathBuf,
        /// Number of intervals; steps + 1 rows are written
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        t_max: f64,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// JSON config file; flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    #[arg(long)]
    smoothness_order: Option<u32>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    bisect_tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the primary output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a run manifest (carries a timestamp)
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Infeasible(String),
    Verification(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Infeasible(_) => 2,
            Failure::Verification(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Infeasible(m) | Failure::Verification(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ScheduleInfeasible(_) => Failure::Infeasible(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    config: Config,
    inputs: Vec<String>,
    output: Option<String>,
    timestamp: u64,
}

#[derive(Serialize)]
struct ScheduleOut {
    epsilon: f64,
    k_max: usize,
    delta: Vec<f64>,
    theta: Vec<f64>,
    accuracy_factor: f64,
    digest: String,
}

impl Common {
    fn config(&self) -> Result<Config, Failure> {
        let mut c = match &self.config {
            Some(path) => serde_json::from_str(&read(path)?)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
            None => Config::default(),
        };
        macro_rules! apply {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        apply!(p, q, epsilon, smoothness_order, k_max, bisect_tol, seed);
        c.validate()?;
        Ok(c)
    }

    fn emit(&self, text: &str) -> Result<(), Failure> {
        match &self.out {
            Some(path) => fs::write(path, text)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn write_manifest(
        &self,
        command: &str,
        config: Config,
        inputs: &[&Path],
    ) -> Result<(), Failure> {
        let Some(path) = &self.manifest else {
            return Ok(());
        };
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        let m = RunManifest {
            command,
            config,
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            output: self.out.as_ref().map(|p| p.display().to_string()),
            timestamp,
        };
        fs::write(path, to_json(&m)?)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_vector(path: &Path) -> Result<SparseVector, Failure> {
    SparseVector::from_json(&read(path)?)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::Usage(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Params { common } => {
            let config = common.config()?;
            let s = ParamSchedule::build(&config)?;
            let export = s.export();
            common.emit(&to_json(&ScheduleOut {
                epsilon: export.epsilon,
                k_max: config.k_max,
                delta: export.delta,
                theta: export.theta,
                accuracy_factor: s.accuracy_factor(),
                digest: s.digest(),
            })?)?;
            common.write_manifest("params", config, &[])
        }
        Command::Eval { common, vector } => {
            let config = common.config()?;
            let x = read_vector(&vector)?;
            let lab = NormLab::from_config(&config)?;
            common.emit(&to_json(&lab.report(&x)?)?)?;
            common.write_manifest("eval", config, &[&vector])
        }
        Command::Verify { common, suite } => {
            let config = common.config()?;
            let suite: Suite = suite.parse()?;
            let summary = run_suite(suite, &config)?;
            common.emit(&to_json(&summary)?)?;
            common.write_manifest("verify", config, &[])?;
            if summary.passed {
                Ok(())
            } else {
                Err(Failure::Verification(format!("suite {suite} failed")))
            }
        }
        Command::Ray {
            common,
            vector,
            direction,
            steps,
            t_max,
        } => {
            let config = common.config()?;
            if !t_max.is_finite() {
                return Err(Failure::Usage(format!("t_max must be finite, got {t_max}")));
            }
            let x = read_vector(&vector)?;
            let d = read_vector(&direction)?;
            let lab = NormLab::from_config(&config)?;
            let mut csv = String::from("t,p_norm,nu,final_norm\n");
            for i in 0..=steps {
                let t = if steps == 0 {
                    0.0
                } else {
                    t_max * i as f64 / steps as f64
                };
                let y = x.add(&d.scaled(t));
                writeln!(
                    csv,
                    "{t:.16e},{:.16e},{:.16e},{:.16e}",
                    p_norm(&y, config.p),
                    lab.nu(&y),
                    lab.final_norm(&y)
                )
                .expect("writing to a String");
            }
            common.emit(&csv)?;
            common.write_manifest("ray", config, &[&vector, &direction])
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
