use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use tdff_core::pipeline;
use tdff_core::Config;

/// Template-based face recognition on precomputed embeddings.
#[derive(Parser, Debug)]
#[command(name = "tdff", version)]
struct Cli {
    /// Path to the TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Log progress at debug level
    #[arg(long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check metadata against every feature file
    Validate,
    /// Generate a synthetic dataset from the [synthetic] section
    Synth,
    /// Fuse per-stream features into the fused feature file
    Fuse,
    /// Train template SVMs for every split
    Train,
    /// Score verification pairs and identification probes
    Score,
    /// Compute metrics from stored scores
    Eval,
    /// Run every stage end to end
    Run,
}

fn init_tracing(verbose: bool) {
    let default = if verbose { "debug" } else { "info" };
    let filter = EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new(default));
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .init();
}

fn execute(cli: &Cli, config: &Config) -> anyhow::Result<bool> {
    match cli.command {
        Command::Validate => {
            let mut ok = true;
            for (stream, report) in pipeline::stage_validate(config)? {
                if report.is_ok() {
                    println!("{stream}: ok");
                } else {
                    ok = false;
                    println!("{stream}: {} issue(s)", report.issues.len());
                    for issue in &report.issues {
                        println!("  {issue}");
                    }
                }
            }
            return Ok(ok);
        }
        Command::Synth => {
            let rows = pipeline::stage_synth(config)?;
            println!(
                "wrote {rows} metadata rows to {}",
                config.data.metadata.display()
            );
        }
        Command::Fuse => {
            let n = pipeline::stage_fuse(config)?;
            println!("fused {n} media into {}", config.fused_path().display());
        }
        Command::Train => {
            let n = pipeline::stage_train(config)?;
            println!("trained {n} models");
        }
        Command::Score => {
            let n = pipeline::stage_score(config)?;
            println!("wrote {n} scores");
        }
        Command::Eval => print!("{}", pipeline::stage_eval(config)?.to_text()),
        Command::Run => print!("{}", pipeline::run_pipeline(config)?.to_text()),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_tracing(cli.verbose);

    let result = (|| -> anyhow::Result<bool> {
        let path = cli.config.as_ref().context("--config PATH is required")?;
        let config = Config::load(path).with_context(|| format!("loading {}", path.display()))?;
        pipeline::with_threads(cli.threads.unwrap_or(0), || execute(&cli, &config))?
    })();

    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
