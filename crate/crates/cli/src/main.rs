use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::new()
        .filter_level(match cli.verbose {
            0 => log::LevelFilter::Warn,
            1 => log::LevelFilter::Info,
            _ => log::LevelFilter::Debug,
        })
        .format_timestamp(None)
        .init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(&format!("--threads: {e}"), 1);
        }
    }
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let res = match &cli.command {
        Command::BuildIndex(a) => commands::build_index(a, &mut out),
        Command::Categorize(a) => commands::categorize(a, &mut out),
        Command::Train(a) => commands::train(a, &mut out),
        Command::Classify(a) => commands::classify(a, &mut out),
        Command::Evaluate(a) => commands::evaluate(a, &mut out),
        Command::CalibrateAlpha(a) => commands::calibrate_alpha(a, &mut out),
        Command::Synth(a) => commands::synth(a, &mut out),
    };
    let flushed = out.flush();
    match res {
        Ok(()) => match flushed {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(&format!("writing output: {e}"), 2),
        },
        Err(commands::Failure::Core(e)) => {
            let code = if e.is_config() { 1 } else { 2 };
            fail(&chain(&e), code)
        }
        Err(commands::Failure::Config(msg)) => fail(&msg, 1),
        Err(commands::Failure::Io(e)) => fail(&format!("writing output: {e}"), 2),
    }
}

/// The error with its source chain, on one line.
fn chain(e: &dyn std::error::Error) -> String {
    let mut s = e.to_string();
    let mut cur = e.source();
    while let Some(c) = cur {
        let m = c.to_string();
        if !s.contains(&m) {
            s.push_str(": ");
            s.push_str(&m);
        }
        cur = c.source();
    }
    s
}

/// Prints `{"error":"config"|"data","message":...}` on one stderr line.
fn fail(msg: &str, code: u8) -> ExitCode {
    let kind = if code == 1 { "config" } else { "data" };
    let line = serde_json::json!({ "error": kind, "message": msg });
    eprintln!("{line}");
    ExitCode::from(code)
}
