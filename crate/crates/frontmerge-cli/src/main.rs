use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use frontmerge_cli::artifacts::OutDir;
use frontmerge_cli::{load_scenario, CliError, Config, Pipeline, Stage};

/// Runs the merging-fronts pipeline and writes CSV tables plus a JSON report.
///
/// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 partial sweep.
#[derive(Parser, Debug)]
#[command(name = "frontmerge", version)]
struct Args {
    /// Stage to run; defaults to `all`.
    #[arg(value_enum)]
    stage: Option<Stage>,
    /// Same as the positional stage.
    #[arg(long = "stage", value_enum, conflicts_with = "stage")]
    stage_flag: Option<Stage>,
    /// Scenario file; defaults apply to absent keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory, overriding `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Test-function jitter seed, overriding `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(args: Args) -> Result<i32, CliError> {
    let mut cfg = match &args.config {
        Some(p) => load_scenario(p)?,
        None => Config::default(),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = &args.out {
        cfg.out = o.to_string_lossy().into_owned();
    }
    if let Some(n) = args.jobs {
        if n == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(e.to_string()))?;
    }
    let stage = args.stage.or(args.stage_flag).unwrap_or(Stage::All);
    let out = OutDir::create(&cfg.out)?;
    let outcome = Pipeline::new(&cfg, out)?.run(stage)?;
    Ok(outcome.code)
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
