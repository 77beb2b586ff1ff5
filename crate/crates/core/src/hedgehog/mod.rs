//! Finite-depth hedgehogs: the nested domains `G_n(H̄)` with
//! `G_n = K_0 ∘ ... ∘ K_n`, membership, invariance under the folded
//! semiflows, periodic-orbit evidence and transport to the unit disk by
//! `E(z) = e^{2 pi i z}`.

pub mod boundary;
pub mod evidence;

pub use boundary::{BoundaryPoint, HedgehogApprox};
pub use evidence::{
    containment_margins, invariance_check, legal_flow_samples, legal_time, nonlinearisability_evidence, FlowSample, InvarianceReport,
    InvarianceRow, NonlinearisabilityReport, OrbitRow, ReturnCheck, SampleDraw,
};

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::folding::ladder::anchored_im;
use crate::ledger::ParameterLedger;
use crate::uniformizer::{Anchored, NormalizedUniformizer};

/// A point counts as inside when its deepest imaginary part is at least
/// `-MEMBERSHIP_TOLERANCE`.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub member: bool,
    /// Imaginary part at the level where the verdict was reached: the
    /// deepest level for members, the first level below the tolerance
    /// otherwise. `-inf` when an inversion failed.
    #[serde(with = "crate::hexfloat")]
    pub margin: f64,
    /// Index of that level.
    pub level: usize,
    /// Why an inversion failed, if one did.
    pub failure: Option<String>,
}

/// Membership of `z` in `G_depth(H̄)`. Needs `a_0, ..., a_depth`.
pub fn contains(z: Complex64, depth: usize, ledger: &ParameterLedger) -> Result<Membership> {
    let maps = ledger.uniformizers(depth + 1)?;
    Ok(membership(&maps, Anchored::plain(z)))
}

/// Invert `maps[0]`, then `maps[1]`, ... on base sheets, stopping at the
/// first coordinate below the real axis.
pub fn membership(maps: &[NormalizedUniformizer], start: Anchored) -> Membership {
    assert!(!maps.is_empty(), "membership needs at least one level");
    let mut p = start;
    let mut margin = f64::NAN;
    for (j, k) in maps.iter().enumerate() {
        let failed = |why: String| Membership {
            member: false,
            margin: f64::NEG_INFINITY,
            level: j,
            failure: Some(why),
        };
        let pre = match k.locate_anchored(p) {
            Ok(pre) => pre,
            Err(e) => return failed(e.to_string()),
        };
        if pre.level != 0 {
            return failed(format!("preimage lies on sheet level {}", pre.level));
        }
        margin = anchored_im(pre.point);
        if margin < -MEMBERSHIP_TOLERANCE {
            return Membership {
                member: false,
                margin,
                level: j,
                failure: None,
            };
        }
        p = pre.point;
    }
    Membership {
        member: true,
        margin,
        level: maps.len() - 1,
        failure: None,
    }
}

/// `E(z)` as `log|E|` and an argument in `[0, 2 pi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskPoint {
    #[serde(with = "crate::hexfloat")]
    pub log_modulus: f64,
    #[serde(with = "crate::hexfloat")]
    pub arg: f64,
}

impl DiskPoint {
    /// Underflows to zero once `log_modulus < -745`.
    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.log_modulus.exp(), self.arg)
    }
}

pub fn disk_transport_log(z: Complex64) -> DiskPoint {
    DiskPoint {
        log_modulus: -TAU * z.im,
        arg: TAU * (z.re - z.re.floor()),
    }
}

/// `E(z) = e^{2 pi i z}`. Above height 100 the modulus goes through its
/// logarithm so that it underflows gracefully.
pub fn disk_transport(z: Complex64) -> Complex64 {
    if z.im > 100.0 {
        return disk_transport_log(z).to_complex();
    }
    let x = z.re - z.re.floor();
    Complex64::from_polar((-TAU * z.im).exp(), TAU * x)
}
