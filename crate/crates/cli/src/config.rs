//! Run configuration, read from one JSON file.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use tubelog::comb::construct::PredicateGrids;
use tubelog::comb::{AlphaSchedule, ConstructionConfig, Strip};

/// Tolerance names with their defaults. A config may override any of them
/// but may not add new names.
pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("axis_reality", 1e-14),
    ("c1_stability", 0.10),
    ("child_zero", 1e-12),
    ("cylinder_match", 1e-8),
    ("derivative_rel", 1e-6),
    ("gap_growth", 0.05),
    ("invariance_margin", 1e-8),
    ("monodromy", 1e-10),
    ("normalization", 1e-10),
    ("orbit_return", 1e-6),
    ("periodicity", 1e-12),
    ("residual", 1e-12),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Emit {
    Report,
    Csv,
    Svg,
    DiskSvg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    /// Densities used by the stage predicates during the search.
    pub predicates: PredicateGrids,
    /// Random points per `(a, h)` pair in the identity checks.
    pub identity_samples: usize,
    /// Heights per tooth in the atlas, the CSV files and the regularity
    /// checks.
    pub comb_samples: usize,
    /// Minimum points per period of each boundary polyline.
    pub boundary_points: usize,
    /// Seeded `(t, z)` pairs in the invariance check.
    pub flow_samples: usize,
    /// Band of deepest-level heights the flow samples are drawn from.
    pub flow_band: [f64; 2],
    /// Largest periodic-orbit set that is enumerated.
    pub orbit_limit: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Grids {
            predicates: PredicateGrids::default(),
            identity_samples: 200,
            comb_samples: 16,
            boundary_points: 512,
            flow_samples: 20,
            flow_band: [0.05, 1.5],
            orbit_limit: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub depth: usize,
    pub alpha_schedule: AlphaSchedule,
    pub h0: f64,
    /// Half-plane margin `M`.
    pub margin: f64,
    /// Largest `a_n` the search may try; a JSON number or decimal string.
    #[serde(serialize_with = "decimal_out", deserialize_with = "decimal_in")]
    pub a_cap: u64,
    pub grids: Grids,
    pub tolerances: BTreeMap<String, f64>,
    pub output_dir: PathBuf,
    pub emit: BTreeSet<Emit>,
    /// Seed for every random sample.
    pub seed: u64,
    /// Exponent for the Holder check; the certified one when absent.
    pub holder_alpha: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            depth: 2,
            alpha_schedule: AlphaSchedule::Default,
            h0: 10.0,
            margin: 1.0,
            a_cap: 1 << 60,
            grids: Grids::default(),
            tolerances: DEFAULT_TOLERANCES.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            output_dir: PathBuf::from("out"),
            emit: [Emit::Report, Emit::Csv, Emit::Svg, Emit::DiskSvg].into_iter().collect(),
            seed: 20_240_601,
            holder_alpha: None,
        }
    }
}

fn decimal_out<S: Serializer>(x: &u64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

fn decimal_in<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Either {
        Number(u64),
        Text(String),
    }
    match Either::deserialize(d)? {
        Either::Number(n) => Ok(n),
        Either::Text(s) => s.trim().parse().map_err(serde::de::Error::custom),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut config: RunConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        config.fill_tolerances();
        config.validate()?;
        Ok(config)
    }

    /// Add the default for every tolerance the file left out.
    pub fn fill_tolerances(&mut self) {
        for &(k, v) in DEFAULT_TOLERANCES {
            self.tolerances.entry(k.to_string()).or_insert(v);
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if !self.alpha_schedule.is_valid() {
            bail!("alpha_schedule must be strictly increasing inside (0, 1)");
        }
        if !(self.h0 > 2.0 && self.h0.is_finite()) {
            bail!("h0 must be a finite number above 2");
        }
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            bail!("margin must be positive");
        }
        if self.a_cap < 5 || self.a_cap > i64::MAX as u64 {
            bail!("a_cap must lie in [5, 2^63)");
        }
        for (name, &tol) in &self.tolerances {
            if !DEFAULT_TOLERANCES.iter().any(|(k, _)| k == name) {
                bail!("unknown tolerance {name:?}");
            }
            if !(tol > 0.0 && tol.is_finite()) {
                bail!("tolerance {name:?} must be positive");
            }
        }
        let g = &self.grids;
        if g.comb_samples < 2 || g.identity_samples == 0 || g.boundary_points < 2 {
            bail!("grids need at least two comb samples, one identity sample and two boundary points");
        }
        if !(0.0 < g.flow_band[0] && g.flow_band[0] < g.flow_band[1]) {
            bail!("flow_band must satisfy 0 < lo < hi");
        }
        if let Some(alpha) = self.holder_alpha {
            if !(alpha > 0.0 && alpha < 1.0) {
                bail!("holder_alpha must lie in (0, 1)");
            }
        }
        Ok(())
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances
            .get(name)
            .copied()
            .or_else(|| DEFAULT_TOLERANCES.iter().find(|(k, _)| *k == name).map(|&(_, v)| v))
            .unwrap_or_else(|| panic!("no tolerance named {name}"))
    }

    pub fn emits(&self, e: Emit) -> bool {
        self.emit.contains(&e)
    }

    pub fn construction(&self) -> ConstructionConfig {
        ConstructionConfig {
            h0: self.h0,
            margin: self.margin,
            alpha: self.alpha_schedule.clone(),
            a_cap: self.a_cap,
            grids: self.grids.predicates.clone(),
            ..ConstructionConfig::default()
        }
    }

    /// Figures are cut at `Im = h_0 + N + 2`.
    pub fn figure_cut(&self) -> f64 {
        self.h0 + self.depth as f64 + 2.0
    }

    pub fn strip(&self) -> Strip {
        Strip::STANDARD
    }
}
