use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ising_sle::experiment::run_from_file;

/// Sample critical Ising / FK-Ising interfaces and compare their driving
/// functions with SLE.
#[derive(Parser, Debug)]
#[command(name = "ising-sle", version)]
struct Args {
    /// Experiment config (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the `seed` key of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run_from_file(&args.config, &args.out, args.seed, args.workers) {
        Ok(out) => {
            println!("kappa = {:.4} +- {:.4} from {} drives", out.kappa.kappa, out.kappa.stderr, out.ensemble.len());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
