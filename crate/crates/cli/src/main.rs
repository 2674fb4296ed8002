use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use finsec_cli::{parse_config, run, CliError, Mode, RunOptions};

/// Stability of the finite section method for convolution type operators on L^p(R).
#[derive(Parser)]
#[command(name = "finsec", version)]
struct Args {
    mode: Mode,
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "FINSEC_THREADS")]
    threads: Option<usize>,
    /// Seed of the randomised norm estimator; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: cannot size the thread pool: {e}");
        }
    }
    let result = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Read(args.config.display().to_string(), e.to_string()))
        .and_then(|text| parse_config(&text))
        .and_then(|cfg| {
            let opts = RunOptions { mode: Some(args.mode), out: args.out, seed: args.seed, threads: args.threads };
            run(cfg, &opts)
        });
    match result {
        Ok(o) => {
            print!("{}", o.summary);
            println!("report: {}", o.out_dir.join("report.json").display());
            ExitCode::from(o.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
