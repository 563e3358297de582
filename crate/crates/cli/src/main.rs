//! `rfcw`: rate curves, phase scans, finite-n verification and field
//! convergence for the random-field Curie-Weiss model.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Outcome;
use crate::config::{ConfigError, FieldsConfig, PhaseScanConfig, RateCurveConfig, ScanFormat, VerifyConfig};

const EXIT_VIOLATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "rfcw", version, about = "Large deviations and phase diagrams of the random-field Curie-Weiss model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// CSV of x, I(x), G(x), f*(x) on [-1.05, 1.05].
    RateCurve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Phase labels on a (beta, h) lattice and along the critical line.
    PhaseScan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        format: Option<ScanFormat>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact finite-n rates against the rate function, plus oracle checks.
    /// Runs a built-in suite without --config.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical free energies f_n against their limit.
    Fields {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_threads() -> Result<(), ConfigError> {
    let Ok(raw) = std::env::var("RFCW_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ConfigError(format!("RFCW_THREADS: expected a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| ConfigError(format!("RFCW_THREADS: {e}")))
}

/// `out.csv` for one document, `out_0.csv`, `out_1.csv`, ... for several.
fn document_paths(out: &Path, count: usize) -> Vec<PathBuf> {
    if count == 1 {
        return vec![out.to_path_buf()];
    }
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = out.extension().and_then(|s| s.to_str()).map(|e| format!(".{e}")).unwrap_or_default();
    (0..count).map(|i| out.with_file_name(format!("{stem}_{i}{ext}"))).collect()
}

fn emit(outcome: &Outcome, out: Option<&Path>) -> Result<(), ConfigError> {
    match out {
        Some(path) => {
            for (doc, p) in outcome.documents.iter().zip(document_paths(path, outcome.documents.len())) {
                std::fs::write(&p, doc).map_err(|e| ConfigError(format!("{}: {e}", p.display())))?;
                eprintln!("wrote {}", p.display());
            }
        }
        None => print!("{}", outcome.documents.join("\n")),
    }
    for note in &outcome.notes {
        eprintln!("{note}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome, ConfigError> {
    configure_threads()?;
    let (outcome, out) = match cli.command {
        Command::RateCurve { config, beta, h, out } => {
            let mut cfg: RateCurveConfig = config::load(&config)?;
            if let Some(b) = beta {
                cfg.beta = b;
            }
            if let Some(h) = h {
                cfg.model = config::with_field_strength(&cfg.model, h)?;
            }
            cfg.out = out.or(cfg.out);
            cfg.validate()?;
            (commands::rate_curve(&cfg)?, cfg.out)
        }
        Command::PhaseScan { config, format, out } => {
            let mut cfg: PhaseScanConfig = config::load(&config)?;
            cfg.format = format.unwrap_or(cfg.format);
            cfg.out = out.or(cfg.out);
            cfg.validate()?;
            (commands::phase(&cfg)?, cfg.out)
        }
        Command::Verify { config, beta, seed, out } => {
            let mut cfg = match config {
                Some(path) => config::load::<VerifyConfig>(&path)?,
                None => VerifyConfig::default_suite(),
            };
            for case in &mut cfg.cases {
                if let Some(b) = beta {
                    case.beta = b;
                }
                if let Some(s) = seed {
                    case.seeds = vec![s];
                }
            }
            cfg.out = out.or(cfg.out);
            cfg.validate()?;
            (commands::verify(&cfg)?, cfg.out)
        }
        Command::Fields { config, beta, h, seed, out } => {
            let mut cfg: FieldsConfig = config::load(&config)?;
            if let Some(b) = beta {
                cfg.beta = b;
            }
            if let Some(h) = h {
                cfg.models = cfg.models.iter().map(|m| config::with_field_strength(m, h)).collect::<Result<_, _>>()?;
            }
            if let Some(s) = seed {
                cfg.seeds = vec![s];
            }
            cfg.out = out.or(cfg.out);
            cfg.validate()?;
            (commands::fields(&cfg)?, cfg.out)
        }
    };
    emit(&outcome, out.as_deref())?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) if outcome.violation => ExitCode::from(EXIT_VIOLATION),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
