use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dissipforge_cli::{parse_config, run, CliError, RunOptions};

#[derive(Parser, Debug)]
#[command(name = "dissipforge", version, about = "Run a dissipative-engineering scenario from a JSON config")]
struct Args {
    /// Scenario config file.
    #[arg(required_unless_present = "config", conflicts_with = "config")]
    path: Option<PathBuf>,
    /// Scenario config file (alternative to the positional argument).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Print nothing on success.
    #[arg(long)]
    quiet: bool,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("DISSIPFORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("DISSIPFORGE_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let path = args.path.or(args.config).expect("clap enforces one config path");
    let outcome = configure_threads().and_then(|_| {
        let cfg = parse_config(&path)?;
        run(
            &cfg,
            &RunOptions {
                seed: args.seed,
                output: args.output,
            },
        )
    });
    match outcome {
        Ok(summary) => {
            if !args.quiet {
                println!(
                    "{} finished in {:.3} s; wrote {}",
                    summary.scenario.name(),
                    summary.wall_time_s,
                    summary.output_dir.display()
                );
                if let Ok(json) = serde_json::to_string(&summary.metrics) {
                    println!("{json}");
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("dissipforge: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
