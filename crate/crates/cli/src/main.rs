//! `rotopat` — batch driver for the rotating-acquisition photoacoustic
//! laboratory. Subcommands mirror the experiment modes; configuration comes
//! from a flat `[section] key = value` file.

use std::path::PathBuf;
use std::process::ExitCode;

use rotopat_core::error::Error;
use rotopat_core::harness::{format_selftest, run, selftest, ExperimentConfig, Mode};

const USAGE: &str = "\
usage: rotopat <command> [--config FILE] [--out DIR] [--seed N] [--threads N]

commands:
  simulate           write measured traces for the configured phantom
  reconstruct        recover the absorption map from traces
  check-geometry     evaluate the coverage and uniqueness conditions
  analyze-operator   assemble the linearized operator and its spectrum
  stability-sweep    empirical stability ratios over random pairs
  selftest           quick numerical sanity checks (no config needed)

options:
  --config FILE      experiment configuration (required except for selftest)
  --out DIR          output directory (overrides the config)
  --seed N           random seed (overrides the config)
  --threads N        size of the worker pool (default: all cores)
  --help             this text
  --version          print the version
";

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_SELFTEST: u8 = 4;

struct Args {
    command: String,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    threads: Option<usize>,
}

fn parse_args(mut argv: std::env::Args) -> Result<Args, String> {
    argv.next(); // program name
    let mut command = None;
    let mut config = None;
    let mut out = None;
    let mut seed = None;
    let mut threads = None;
    while let Some(arg) = argv.next() {
        match arg.as_str() {
            "--help" | "-h" => return Err(String::new()),
            "--version" | "-V" => {
                println!("rotopat {}", env!("CARGO_PKG_VERSION"));
                std::process::exit(0);
            }
            "--config" | "-c" => {
                let v = argv.next().ok_or("--config needs a file argument")?;
                config = Some(PathBuf::from(v));
            }
            "--out" => {
                let v = argv.next().ok_or("--out needs a directory argument")?;
                out = Some(PathBuf::from(v));
            }
            "--seed" => {
                let v = argv.next().ok_or("--seed needs an integer argument")?;
                seed = Some(v.parse().map_err(|_| format!("bad seed '{v}'"))?);
            }
            "--threads" => {
                let v = argv.next().ok_or("--threads needs an integer argument")?;
                threads = Some(v.parse().map_err(|_| format!("bad thread count '{v}'"))?);
            }
            other if command.is_none() && !other.starts_with('-') => {
                command = Some(other.to_string());
            }
            other => return Err(format!("unexpected argument '{other}'")),
        }
    }
    Ok(Args {
        command: command.ok_or("missing command")?,
        config,
        out,
        seed,
        threads,
    })
}

fn main() -> ExitCode {
    let args = match parse_args(std::env::args()) {
        Ok(a) => a,
        Err(msg) => {
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            eprint!("{USAGE}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: could not size the worker pool: {e}");
            return ExitCode::from(EXIT_SOLVER);
        }
    }

    if args.command == "selftest" {
        let outcomes = selftest();
        let all_pass = match format_selftest(&outcomes, std::io::stdout().lock()) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_SOLVER);
            }
        };
        return if all_pass {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(EXIT_SELFTEST)
        };
    }

    let Some(mode) = Mode::parse(&args.command) else {
        eprintln!("error: unknown command '{}'", args.command);
        eprint!("{USAGE}");
        return ExitCode::from(EXIT_CONFIG);
    };

    let Some(config_path) = args.config else {
        eprintln!("error: --config is required for '{}'", args.command);
        return ExitCode::from(EXIT_CONFIG);
    };
    let text = match std::fs::read_to_string(&config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let mut config = match ExperimentConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    config.mode = mode;
    if let Some(out) = args.out {
        config.out = Some(out);
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }

    match run(&config) {
        Ok(summary) => {
            println!(
                "{} finished in {} ms -> {}",
                summary.mode.name(),
                summary.wall_ms,
                summary.out_dir.display()
            );
            for note in &summary.notes {
                println!("  {note}");
            }
            ExitCode::SUCCESS
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_SOLVER)
        }
    }
}
