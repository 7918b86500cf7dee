//! `jdpinn`: estimate, train, price and validate from the command line.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure,
//! 4 validation failure.

mod args;
mod commands;
mod error;
mod manifest;
mod param_file;

use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;

use args::{Cli, Command};
use error::{CliError, EXIT_OK, EXIT_USAGE};
use manifest::{default_path, RunManifest, TOOLKIT};

fn dispatch(cmd: &Command, artifacts: &mut Vec<PathBuf>) -> Result<(), CliError> {
    match cmd {
        Command::Estimate(a) => commands::estimate(a, artifacts),
        Command::Train(a) => commands::train_cmd(a, artifacts),
        Command::Price(a) => commands::price(a, artifacts),
        Command::Validate(a) => commands::validate(a, artifacts),
        Command::DelaySweep(a) => commands::delay(a, artifacts),
        Command::Compare(a) => commands::compare(a, artifacts),
        Command::Simulate(a) => commands::simulate(a, artifacts),
        Command::Replay(_) => Err(CliError::Usage("a manifest cannot record a replay".into())),
    }
}

fn report(e: &CliError) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}

/// Runs `cmd` and, when `record` is set, writes its manifest.
fn execute(cmd: Command, argv: Vec<String>, record: bool) -> i32 {
    let Some(run) = cmd.run_options().cloned() else {
        return report(&CliError::Usage("nothing to run".into()));
    };
    if run.threads == 0 {
        return report(&CliError::Usage("--threads must be at least 1".into()));
    }
    // Fails only when a pool already exists, as in a replay.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(run.threads)
        .build_global();

    let started = Instant::now();
    let mut artifacts = Vec::new();
    let mut code = match dispatch(&cmd, &mut artifacts) {
        Ok(()) => EXIT_OK,
        Err(e) => report(&e),
    };
    if record {
        let path = default_path(run.manifest.as_deref(), &artifacts, cmd.name());
        let manifest = RunManifest {
            toolkit: TOOLKIT.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: cmd.name().to_string(),
            argv,
            working_dir: std::env::current_dir().unwrap_or_default(),
            seed: cmd.seed(),
            threads: run.threads,
            config: cmd,
            artifacts,
            wall_clock_seconds: started.elapsed().as_secs_f64(),
            exit_code: code,
        };
        if let Err(e) = manifest.write(&path) {
            let c = report(&e);
            if code == EXIT_OK {
                code = c;
            }
        }
    }
    code
}

fn replay(path: &std::path::Path) -> i32 {
    let manifest = match RunManifest::read(path) {
        Ok(m) => m,
        Err(e) => return report(&e),
    };
    if let Err(e) = std::env::set_current_dir(&manifest.working_dir) {
        return report(&CliError::io(&manifest.working_dir, e));
    }
    execute(manifest.config, manifest.argv, false)
}

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    let code = match cli.command {
        Command::Replay(a) => {
            // Resolve before the working directory changes.
            let path = std::path::absolute(&a.manifest).unwrap_or(a.manifest);
            replay(&path)
        }
        cmd => execute(cmd, argv, true),
    };
    std::process::exit(code);
}
