use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use tubelog_cli::artifacts::atlases;
use tubelog_cli::{exit, run_construct, run_render, run_verify, write_construction, write_figures, write_report, Artifacts, Emit, RunConfig};

#[derive(Parser)]
#[command(name = "tubelog", version, about = "Construct, verify and draw finite-depth hedgehogs with smooth combs")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// JSON run configuration; defaults apply when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configured depth N.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Override the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Only run checks whose names contain this text.
    #[arg(long, global = true)]
    check: Option<String>,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Verb {
    /// Search for the parameters and persist the ledger and curves.
    Construct,
    /// Run the checks on persisted artifacts and write report.json.
    Verify,
    /// Draw the figures from persisted artifacts.
    Render,
    /// construct, verify and render in one go.
    All,
}

/// Usage errors and missing artifacts.
struct Usage(anyhow::Error);

fn load_config(cli: &Cli) -> Result<RunConfig, Usage> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(Usage)?,
        None => RunConfig::default(),
    };
    if let Some(d) = cli.depth {
        config.depth = d;
    }
    if let Some(o) = &cli.out {
        config.output_dir = o.clone();
    }
    Ok(config)
}

fn load_artifacts(config: &RunConfig) -> Result<Artifacts, Usage> {
    let a = Artifacts::load(&config.output_dir)
        .context("missing artifacts; run `tubelog construct` first")
        .map_err(Usage)?;
    if a.requested_depth != config.depth {
        return Err(Usage(anyhow::anyhow!(
            "artifacts were built for depth {}, config asks for {}",
            a.requested_depth,
            config.depth
        )));
    }
    Ok(a)
}

fn run(cli: &Cli) -> anyhow::Result<Result<i32, Usage>> {
    let config = match load_config(cli) {
        Ok(c) => c,
        Err(u) => return Ok(Err(u)),
    };
    let dir = config.output_dir.clone();
    let artifacts = if matches!(cli.verb, Verb::Construct | Verb::All) {
        let a = run_construct(&config);
        match (&a.exhausted, a.reached_depth()) {
            (Some(why), Some(d)) => eprintln!("frontier at depth {d}: {why}"),
            (Some(why), None) => eprintln!("no stage certified: {why}"),
            (None, _) => eprintln!("certified a_0, ..., a_{}", config.depth),
        }
        a
    } else {
        match load_artifacts(&config) {
            Ok(a) => a,
            Err(u) => return Ok(Err(u)),
        }
    };
    let atlases = atlases(&config, &artifacts)?;
    let mut code = exit::OK;
    if matches!(cli.verb, Verb::Construct | Verb::All) {
        write_construction(&config, &artifacts, &atlases)?;
        if !artifacts.complete() {
            code = exit::FRONTIER;
        }
    }
    if matches!(cli.verb, Verb::Verify | Verb::All) {
        let report = run_verify(&config, &artifacts, &atlases, cli.check.as_deref());
        print!("{}", report.summary());
        if config.emits(Emit::Report) {
            write_report(&dir, &report)?;
        }
        if !report.all_passed() && code == exit::OK {
            code = exit::CHECK_FAILED;
        }
    }
    if matches!(cli.verb, Verb::Render | Verb::All) {
        write_figures(&dir, &run_render(&config, &artifacts, &atlases))?;
    }
    Ok(Ok(code))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(&cli) {
        Ok(Ok(code)) => ExitCode::from(code as u8),
        Ok(Err(Usage(e))) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::USAGE as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::CHECK_FAILED as u8)
        }
    }
}
