mod args;
mod commands;
mod render;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use ncwig::Error;
use serde_json::json;

use crate::args::{Cli, RunConfig};
use crate::commands::Outcome;

const EXIT_USAGE: u8 = 1;
const EXIT_PRECONDITION: u8 = 2;
const EXIT_INCONSISTENT: u8 = 3;

fn init_threads() {
    if let Some(n) = std::env::var("NCWIG_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// The configuration as actually used: explicit flags, then the input's
/// parameters, then defaults.
fn resolved_config(cfg: &RunConfig, out: &Outcome) -> serde_json::Value {
    let mut c = cfg.clone();
    if let Some(p) = &out.params {
        c.hbar = Some(p.hbar());
        if p.d() == 2 {
            c.theta = Some(p.theta());
            c.eta = Some(p.eta());
        }
    }
    c.npts = out.npts;
    c.format = Some(cfg.format.unwrap_or(out.default_format));
    serde_json::to_value(&c).expect("config serializes")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    init_threads();
    let out = match commands::run(&cli.command, &cli.config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(match e {
                Error::InternalInconsistency(_) => EXIT_INCONSISTENT,
                _ => EXIT_PRECONDITION,
            });
        }
    };
    let report = json!({
        "version": ncwig::VERSION,
        "command": out.command,
        "config": resolved_config(&cli.config, &out),
        "params": out.params,
        "result": out.result,
    });
    let format = cli.config.format.unwrap_or(out.default_format);
    let text = match render::render(&report, out.table.as_ref(), format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_PRECONDITION);
        }
    };
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(text.as_bytes());
    let _ = stdout.flush();
    if let Some(msg) = out.failure {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_INCONSISTENT);
    }
    ExitCode::SUCCESS
}
