use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use shift_index::cli::{run, Command, RunConfig};

/// Ellipticity, index and uniformization checks for operators with shifts on flat tori.
#[derive(Debug, Parser)]
#[command(name = "shift-index", version)]
struct Args {
    /// Operator spec (JSON or TOML).
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    command: Command,
    /// Fourier truncation per coordinate.
    #[arg(long = "K")]
    k: Option<usize>,
    /// Hermite truncation.
    #[arg(long = "H")]
    h: Option<usize>,
    /// Fiber window for symbol evaluation.
    #[arg(long = "N")]
    n: Option<usize>,
    /// Sampling grid resolution.
    #[arg(long)]
    grid: Option<usize>,
    /// Cosphere radius for the topological index.
    #[arg(long)]
    radius: Option<f64>,
    /// Relative tolerance of the ellipticity certificate.
    #[arg(long)]
    tol: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Report path; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Single-threaded, fixed reduction order.
    #[arg(long)]
    fixed_order: bool,
    /// Corpus directory for `--command corpus`.
    #[arg(long)]
    corpus_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let a = Args::parse();
    let cfg = RunConfig {
        command: a.command,
        spec: a.spec,
        corpus_dir: a.corpus_dir,
        k: a.k,
        h: a.h,
        n: a.n,
        grid: a.grid,
        radius: a.radius,
        tol: a.tol,
        jobs: a.jobs,
        out: a.out,
        fixed_order: a.fixed_order,
    };
    match run(&cfg) {
        Ok((report, code)) => {
            if cfg.out.is_none() {
                print!("{}", report.to_json());
            }
            if let Some(e) = &report.error {
                eprintln!("error: {e}");
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
