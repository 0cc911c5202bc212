use std::path::PathBuf;
use std::process::ExitCode;

use chrono::Utc;
use clap::{Parser, ValueEnum};
use landau_cli::error::{CliError, EXIT_CERTIFICATE, EXIT_CONFIG, EXIT_PASS};
use landau_cli::report::write_artifacts;
use landau_cli::{run, ExperimentConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sub {
    Spectrum,
    Clusters,
    Sharpness,
    Projnorm,
    Lap,
    Sumbound,
    Carleman,
    Verify,
}

impl Sub {
    fn name(self) -> &'static str {
        match self {
            Sub::Spectrum => "spectrum",
            Sub::Clusters => "clusters",
            Sub::Sharpness => "sharpness",
            Sub::Projnorm => "projnorm",
            Sub::Lap => "lap",
            Sub::Sumbound => "sumbound",
            Sub::Carleman => "carleman",
            Sub::Verify => "verify",
        }
    }
}

/// Numerical experiments on the perturbed Landau Hamiltonian.
#[derive(Debug, Parser)]
#[command(name = "landau-lab", version)]
struct Args {
    #[arg(value_enum)]
    subcommand: Sub,
    /// TOML experiment config (schema_version = 1)
    #[arg(long)]
    config: PathBuf,
    /// output directory; defaults to out_dir from the config, then landau-out/<subcommand>
    #[arg(long)]
    out: Option<PathBuf>,
    /// worker threads for sweep fan-out
    #[arg(long)]
    threads: Option<usize>,
    /// overrides the config seed
    #[arg(long)]
    seed: Option<u64>,
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let sub = args.subcommand.name();
    let source = match std::fs::read(&args.config) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("config error: {}: {e}", args.config.display());
            return exit(EXIT_CONFIG);
        }
    };
    let mut cfg = match std::str::from_utf8(&source).map_err(|e| CliError::Config(e.to_string())).and_then(ExperimentConfig::from_toml) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return exit(e.exit_code());
        }
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(n) = args.threads {
        if n == 0 {
            eprintln!("config error: --threads must be positive");
            return exit(EXIT_CONFIG);
        }
        // only fails if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = args
        .out
        .or_else(|| cfg.out_dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("landau-out").join(sub));

    let started = Utc::now();
    let outcome = match run(sub, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{sub}: {e}");
            return exit(e.exit_code());
        }
    };
    if let Err(e) = write_artifacts(&out, &cfg, &source, &outcome, started) {
        eprintln!("{e}");
        return exit(e.exit_code());
    }
    for c in &outcome.checks {
        eprintln!("{:<6} {} = {:.6e} (limit {:.3e})", if c.passed { "ok" } else { "FAIL" }, c.name, c.value, c.limit);
    }
    eprintln!("{sub}: {} -> {}", if outcome.passed() { "pass" } else { "certificate failure" }, out.display());
    exit(if outcome.passed() { EXIT_PASS } else { EXIT_CERTIFICATE })
}
