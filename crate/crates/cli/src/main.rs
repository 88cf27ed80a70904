//! `widom`: runs one experiment config and writes `result.json` (and
//! `series.csv` for series-producing tasks) into the output directory.
//!
//! Exit codes: 0 success, 1 config error, 2 solver failure, 3 failed verdict.

mod config;
mod suites;
mod tasks;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;
use sha2::{Digest, Sha256};

use config::Task;
use tasks::{Failure, Status};

#[derive(Debug, Parser)]
#[command(name = "widom", version, about = "Capacity, Green functions and Chebyshev polynomials of planar sets")]
struct Args {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's output.dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run this task instead of the one in the config.
    #[arg(long, value_enum)]
    task: Option<Task>,
    /// Print nothing on success.
    #[arg(long)]
    quiet: bool,
}

fn config_error(msg: &str) -> ExitCode {
    eprintln!("config error: {msg}");
    ExitCode::from(1)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => return config_error(&format!("{}: {e}", args.config.display())),
    };
    let mut cfg = match config::parse(&text, &args.config) {
        Ok(c) => c,
        Err(e) => return config_error(&e),
    };
    if let Some(t) = args.task {
        cfg.task = t;
    }
    let out_dir = args.out.clone().or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let hash = hex(&Sha256::digest(text.as_bytes()));

    let (status, result, error, csv, summary) = match tasks::run(&cfg) {
        Ok(o) => (o.status, o.result, None, o.csv, o.summary),
        Err(Failure::Config(msg)) => return config_error(&msg),
        Err(Failure::Solver(msg)) => (Status::SolverFailure, json!(null), Some(msg), None, Vec::new()),
    };
    let envelope = json!({
        "tool": "widom",
        "version": env!("CARGO_PKG_VERSION"),
        "config_sha256": hash,
        "task": cfg.task.name(),
        "status": status.name(),
        "result": result,
        "error": error,
    });

    let write = || -> std::io::Result<()> {
        fs::create_dir_all(&out_dir)?;
        let mut body = serde_json::to_string_pretty(&envelope)?;
        body.push('\n');
        fs::write(out_dir.join("result.json"), body)?;
        if let Some(rows) = &csv {
            fs::write(out_dir.join("series.csv"), rows)?;
        }
        Ok(())
    };
    if let Err(e) = write() {
        eprintln!("cannot write results to {}: {e}", out_dir.display());
        return ExitCode::from(2);
    }

    if let Some(msg) = &error {
        eprintln!("solver failure: {msg}");
    }
    if !args.quiet || status != Status::Ok {
        for line in &summary {
            println!("{line}");
        }
    }
    match status {
        Status::Ok => ExitCode::SUCCESS,
        Status::SolverFailure => ExitCode::from(2),
        Status::VerdictFailure => ExitCode::from(3),
    }
}
