use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use hyperortho_cli::{execute, run, Cli, EXIT_USAGE};

fn configure_threads() {
    if let Some(n) = std::env::var("HYPERORTHO_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    configure_threads();
    let (outcome, out_path) = match Cli::try_parse() {
        Ok(cli) => (execute(&cli), cli.out),
        Err(_) => (run(std::env::args_os()), None),
    };
    eprint!("{}", outcome.stderr);
    let mut code = outcome.code;
    match out_path {
        Some(path) if !outcome.stdout.is_empty() => {
            if let Err(e) = std::fs::write(&path, &outcome.stdout) {
                eprintln!("error: cannot write {}: {e}", path.display());
                code = EXIT_USAGE;
            }
        }
        _ => {
            let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
        }
    }
    ExitCode::from(code as u8)
}
