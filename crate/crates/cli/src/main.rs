use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cornerlab_cli::{load_config, run, RunOptions};

/// Run a cornerlab experiment from a JSON config.
#[derive(Parser, Debug)]
#[command(name = "cornerlab", version)]
struct Args {
    /// Experiment config (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; overrides `outputs.dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads, also the bound on concurrent sweep jobs.
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// Seed for perturbation families; overrides `seed`.
    #[arg(long, value_name = "K")]
    seed: Option<u64>,
    /// Multiplies every verdict tolerance.
    #[arg(long, value_name = "X")]
    tolerance_scale: Option<f64>,
    /// Exit with code 3 when a verdict is violated.
    #[arg(long)]
    check: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let opts = RunOptions {
        out: args.out,
        jobs: args.jobs,
        seed: args.seed,
        tolerance_scale: args.tolerance_scale,
        check: args.check,
    };
    let result = load_config(&args.config).and_then(|(cfg, base)| run(&cfg, &base, &opts));
    match result {
        Ok(o) => {
            println!("{}", o.out_dir.display());
            ExitCode::from(o.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
