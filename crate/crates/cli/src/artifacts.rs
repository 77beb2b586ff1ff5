//! `construct`: the parameter search, the comb atlases and their files.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use tubelog::comb::{construct, CombAtlas, StageRecord};
use tubelog::ParameterLedger;

use crate::config::RunConfig;

pub const LEDGER_FILE: &str = "ledger.json";

/// What `construct` persists and the other verbs read back.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifacts {
    pub requested_depth: usize,
    pub ledger: ParameterLedger,
    pub stages: Vec<StageRecord>,
    /// Why the search stopped short of the requested depth.
    pub exhausted: Option<String>,
}

impl Artifacts {
    /// Deepest `n` with `a_0, ..., a_n` chosen.
    pub fn reached_depth(&self) -> Option<usize> {
        self.ledger.depth().checked_sub(1)
    }

    pub fn complete(&self) -> bool {
        self.exhausted.is_none() && self.reached_depth() >= Some(self.requested_depth)
    }

    /// Depth of the deepest atlas the ledger supports, capped at the
    /// requested one.
    pub fn atlas_depth(&self) -> Option<usize> {
        self.reached_depth().map(|d| d.min(self.requested_depth))
    }

    pub fn path(dir: &Path) -> PathBuf {
        dir.join(LEDGER_FILE)
    }

    pub fn save(&self, dir: &Path) -> anyhow::Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let text = serde_json::to_string_pretty(self)?;
        write_file(&Self::path(dir), &text)
    }

    pub fn load(dir: &Path) -> anyhow::Result<Self> {
        let path = Self::path(dir);
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

pub fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn run_construct(config: &RunConfig) -> Artifacts {
    let c = construct(&config.construction(), config.depth);
    Artifacts {
        requested_depth: c.requested_depth,
        exhausted: c.exhausted.as_ref().map(|e| e.to_string()),
        ledger: c.ledger,
        stages: c.stages,
    }
}

/// Atlases of depth `0, ..., atlas_depth` on the configured height grid.
pub fn atlases(config: &RunConfig, artifacts: &Artifacts) -> anyhow::Result<Vec<CombAtlas>> {
    let Some(top) = artifacts.atlas_depth() else {
        return Ok(Vec::new());
    };
    (0..=top)
        .map(|d| {
            CombAtlas::build(&artifacts.ledger, d, config.strip(), config.grids.comb_samples)
                .with_context(|| format!("building the depth {d} atlas"))
        })
        .collect()
}

/// Digits joined by `:`, e.g. `-1:0:1`; the empty prefix is `root`.
pub fn prefix_label(prefix: &[i8]) -> String {
    if prefix.is_empty() {
        return "root".into();
    }
    prefix.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(":")
}

#[derive(Serialize)]
struct CurveRow<'a> {
    prefix: &'a str,
    t: String,
    re: String,
    im: String,
    d1_re: String,
    d1_im: String,
}

/// One row per sample: `prefix, t, re, im, d1_re, d1_im`. Reals are
/// written in the shortest exponent form that parses back to the same
/// double.
pub fn curves_csv(atlas: &CombAtlas) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in &atlas.curves {
        let label = prefix_label(&c.prefix);
        for p in &c.points {
            w.serialize(CurveRow {
                prefix: &label,
                t: sci(p.t),
                re: sci(p.value.re),
                im: sci(p.value.im),
                d1_re: sci(p.derivs[0].re),
                d1_im: sci(p.derivs[0].im),
            })?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn sci(x: f64) -> String {
    format!("{x:e}")
}

pub fn csv_name(depth: usize) -> String {
    format!("curves_depth{depth}.csv")
}
