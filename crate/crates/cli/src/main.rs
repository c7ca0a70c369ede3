//! `nlwave` command line: reads a JSON config, runs one pipeline and writes
//! a self-describing output bundle.
//!
//! Exit status 0 on success, 2 on invalid input, 3 when a solver does not
//! converge or a solution fails certification. Failures also leave
//! `error.json` in the output directory and print the same JSON on stderr.

mod config;
mod modes;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde::{Deserialize, Serialize};

use config::{Config, Mode};

#[derive(Debug, Parser)]
#[command(name = "nlwave", version, about = "Travelling TE/TM waves in nonlinear cylindrical media")]
struct Args {
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorKind {
    Validation,
    NonConvergence,
}

#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub log: Vec<String>,
}

impl CliError {
    pub fn validation(message: String) -> Self {
        Self { kind: ErrorKind::Validation, message, log: Vec::new() }
    }

    pub fn non_convergence(message: String) -> Self {
        Self { kind: ErrorKind::NonConvergence, message, log: Vec::new() }
    }

    fn exit_code(&self) -> u8 {
        match self.kind {
            ErrorKind::Validation => 2,
            ErrorKind::NonConvergence => 3,
        }
    }
}

impl From<nlwave::Error> for CliError {
    fn from(e: nlwave::Error) -> Self {
        use nlwave::Error as E;
        let message = e.to_string();
        match e {
            E::NoConvergence { .. } | E::Bracket { .. } => Self::non_convergence(message),
            E::Search { log, .. } => Self { kind: ErrorKind::NonConvergence, message, log },
            _ => Self::validation(message),
        }
    }
}

/// Mode, seed and the fully resolved config, embedded in every bundle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Echo {
    pub mode: Mode,
    pub seed: u64,
    pub config: Config,
}

pub struct Run {
    pub echo: Echo,
    pub out: PathBuf,
    pub quiet: bool,
}

impl Run {
    pub fn progress(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("[nlwave] {}", msg.as_ref());
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    pub fn write_json(&self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::validation(e.to_string()))?;
        nlwave::io::write_atomic(&self.path(name), &bytes).map_err(CliError::from)
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        nlwave::io::write_atomic(&self.path(name), bytes).map_err(CliError::from)
    }
}

fn load_config(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read config {}: {e}", path.display())))?;
    Config::parse(&text).map(Config::resolve)
}

fn prepare_out(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::validation(format!("output directory {} is not writable: {e}", out.display())))?;
    let probe = out.join(".nlwave-write-test");
    std::fs::write(&probe, b"")
        .and_then(|_| std::fs::remove_file(&probe))
        .map_err(|e| CliError::validation(format!("output directory {} is not writable: {e}", out.display())))
}

fn run(args: &Args) -> Result<(), CliError> {
    prepare_out(&args.out)?;
    let config = load_config(&args.config)?;
    let run = Run { echo: Echo { mode: args.mode, seed: args.seed, config }, out: args.out.clone(), quiet: args.quiet };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| CliError::validation(format!("cannot start {} workers: {e}", args.jobs)))?;
    pool.install(|| match args.mode {
        Mode::TeShoot => modes::te_shoot(&run),
        Mode::TmSolve => modes::tm_solve(&run),
        Mode::Verify => modes::verify(&run),
        Mode::Spectrum => modes::spectrum(&run),
        Mode::OrliczCheck => modes::orlicz_check(&run),
    })
}

#[derive(Serialize)]
struct Diagnostic<'a> {
    status: &'static str,
    exit_code: u8,
    mode: Mode,
    #[serde(flatten)]
    error: &'a CliError,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code();
            let diag = Diagnostic { status: "error", exit_code: code, mode: args.mode, error: &e };
            let text = serde_json::to_string_pretty(&diag).unwrap_or_else(|_| format!("{{\"message\": {:?}}}", e.message));
            eprintln!("{text}");
            // the directory may be the thing that failed
            let _ = nlwave::io::write_atomic(&args.out.join("error.json"), text.as_bytes());
            ExitCode::from(code)
        }
    }
}
