mod cli;
mod commands;
mod input;
mod plot;
mod report;
mod selftest;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use herglotz_core::Error;

use crate::cli::Cli;
use crate::commands::Ctx;
use crate::input::{Inputs, UsageError};
use crate::report::RunReport;

/// Usage errors exit 1, mathematical failures 2.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 1;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Io(_) | Error::Json(_) | Error::Validation(_) | Error::Domain(_)) => 1,
        Some(_) => 2,
        None => 1,
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("HERGLOTZ_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("HERGLOTZ_THREADS must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err("HERGLOTZ_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }

    let name = cli.command.name();
    let mut ctx = Ctx { inputs: Inputs::new(&argv), report: RunReport::new(name, cli.global.seed.unwrap_or(0)), global: cli.global.clone() };
    let start = Instant::now();
    let mut outcome = commands::dispatch(&cli.command, &mut ctx);
    if outcome.is_ok() {
        if let Some(dir) = ctx.global.plot_dir.clone() {
            outcome = plot::emit_plotdata(&ctx.report, &dir)
                .map(|paths| ctx.report.artifacts.extend(paths.iter().map(|p| p.display().to_string())))
                .map_err(|e| input::usage(format!("{e:#}")));
        }
    }
    let mut report = ctx.report;
    report.inputs_digest = ctx.inputs.digest();
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;

    let mut code = match &outcome {
        Ok(()) if report.pass => 0,
        Ok(()) => 2,
        Err(e) => {
            report.pass = false;
            report.error = Some(format!("{e:#}"));
            exit_code(e)
        }
    };
    if let Some(path) = &ctx.global.report {
        if let Err(e) = commands::write_report(&report, path) {
            eprintln!("error: {e:#}");
            code = code.max(1);
        }
    }

    let mut err = std::io::stderr().lock();
    for note in &report.notes {
        let _ = writeln!(err, "note: {note}");
    }
    match &report.error {
        Some(msg) => {
            let _ = writeln!(err, "error: {msg}");
        }
        None if !report.pass => {
            for c in report.failures() {
                let _ = writeln!(err, "FAIL {}: {:e} (tol {:e})", c.name, c.value, c.tol.unwrap_or(f64::NAN));
            }
        }
        None => {}
    }
    ExitCode::from(code)
}
