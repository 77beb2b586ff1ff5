//! Configuration, orchestration and output for the `tubelog` command:
//! `construct` searches for the parameters, `verify` runs the checks and
//! `render` draws the figures.

pub mod artifacts;
pub mod checks;
pub mod config;
pub mod render;
pub mod report;

use std::path::Path;

use tubelog::comb::CombAtlas;

pub use artifacts::{run_construct, Artifacts};
pub use config::{Emit, RunConfig};
pub use report::{CheckRecord, VerificationReport};

use artifacts::write_file;
use report::ConstructionSummary;

pub const REPORT_FILE: &str = "report.json";

/// Exit statuses of the binary.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const FRONTIER: i32 = 2;
    pub const USAGE: i32 = 3;
}

/// Run the checks whose names contain `filter` (all when `None`).
pub fn run_verify(
    config: &RunConfig,
    artifacts: &Artifacts,
    atlases: &[CombAtlas],
    filter: Option<&str>,
) -> VerificationReport {
    let ctx = checks::Context {
        config,
        artifacts,
        atlases,
    };
    let (checks, constants) = checks::run_checks(&ctx, filter);
    VerificationReport {
        config: config.clone(),
        ledger: artifacts.ledger.clone(),
        construction: ConstructionSummary {
            requested_depth: artifacts.requested_depth,
            reached_depth: artifacts.reached_depth(),
            complete: artifacts.complete(),
            exhausted: artifacts.exhausted.clone(),
            stages: artifacts.stages.clone(),
        },
        checks,
        constants,
    }
}

/// The figures `emit` asks for, as `(file name, contents)`.
pub fn run_render(config: &RunConfig, artifacts: &Artifacts, atlases: &[CombAtlas]) -> Vec<(String, String)> {
    let ledger = &artifacts.ledger;
    let top = atlases.last();
    let mut out = Vec::new();
    if config.emits(Emit::Svg) {
        out.push(("foliation.svg".into(), render::foliation(config, ledger)));
        out.push(("boundaries.svg".into(), render::boundaries(config, ledger)));
        out.push(("comb.svg".into(), render::comb(config, top)));
    }
    if config.emits(Emit::DiskSvg) {
        out.push(("disk.svg".into(), render::disk(config, ledger, top)));
    }
    out
}

/// Persist the ledger and, if asked for, one CSV per atlas depth.
pub fn write_construction(config: &RunConfig, artifacts: &Artifacts, atlases: &[CombAtlas]) -> anyhow::Result<()> {
    let dir = &config.output_dir;
    artifacts.save(dir)?;
    if config.emits(Emit::Csv) {
        for atlas in atlases {
            write_file(&dir.join(artifacts::csv_name(atlas.depth)), &artifacts::curves_csv(atlas)?)?;
        }
    }
    Ok(())
}

pub fn write_report(dir: &Path, report: &VerificationReport) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    write_file(&dir.join(REPORT_FILE), &report.to_json())
}

pub fn write_figures(dir: &Path, figures: &[(String, String)]) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, text) in figures {
        write_file(&dir.join(name), text)?;
    }
    Ok(())
}
