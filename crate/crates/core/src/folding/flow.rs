//! Folded semiflows `F_{0,n,t}` and their periodic orbits.
//!
//! `F_{n,n,t}` is the translation by `t`. For `j < n`, write
//! `a_j t = m + r` with `m` an integer and `|r| <= 2/a_{j+1}`; then
//! `F_{j,n,t} = K_j ∘ T^m ∘ (lift of F_{j+1,n,r}) ∘ K_j^{-1}`, and the deck
//! map contributes exactly `m / a_j` after applying `K_j`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::ladder::ComposedMap;
use super::time::{nearest_integer, RationalTime, TimeSetDescriptor};
use crate::error::{Error, Result};
use crate::ledger::ParameterLedger;
use crate::surface::{follow, RemovedRegions, SurfacePoint, DEFAULT_CROSSING_BUDGET};
use crate::uniformizer::{NormalizedUniformizer, Offset};

/// Exclusion radius around ramification points at the level whose flow
/// runs for times `|r| <= 2/a`.
pub fn exclusion_radius(a_next: u64) -> f64 {
    3.0 / a_next as f64
}

fn exclusion(msg: impl Into<String>) -> Error {
    Error::OrbitHitsExclusion(msg.into())
}

fn level_flow(
    maps: &[NormalizedUniformizer],
    a_next: &[u64],
    s: &BigRational,
    w: Complex64,
    budget: u32,
) -> Result<Complex64> {
    let Some((k, deeper)) = maps.split_first() else {
        return Ok(w + super::time::ratio_to_f64(s));
    };
    let scaled = s * BigRational::from_integer(BigInt::from(k.divisor()));
    let m = nearest_integer(&scaled);
    let r = &scaled - BigRational::from_integer(m.clone());
    let shift = m.to_f64().unwrap_or(f64::NAN) / k.divisor_f64();
    if r.is_zero() {
        return Ok(w + shift);
    }
    let pre = k.locate(w)?;
    if pre.level.unsigned_abs() > budget as u64 {
        return Err(Error::SheetBudgetExceeded {
            level: pre.level,
            budget,
        });
    }
    if let Offset::Log(_) = pre.point.offset {
        return Err(exclusion(format!("preimage of {w} is a needle point at level {}", k.divisor())));
    }
    let p = SurfacePoint::from_preimage(pre);
    let eps = exclusion_radius(a_next[0]);
    if p.distance_to_tip() < eps {
        return Err(exclusion(format!(
            "preimage of {w} is within {eps} of a ramification point"
        )));
    }
    let target = level_flow(deeper, &a_next[1..], &r, p.coord, budget)?;
    let mut regions = RemovedRegions::new(1.0 / a_next[0] as f64);
    regions.budget = budget;
    let moved = follow(p, target, &regions).map_err(|e| match e {
        Error::PathHitsRamification { .. } | Error::LeftDomain { .. } => exclusion(e.to_string()),
        other => other,
    })?;
    Ok(moved.eval(k)? + shift)
}

/// `F_{0,n,t}(z)`. Needs `a_0, ..., a_n` in the ledger.
pub fn semiflow_apply(n: usize, t: &RationalTime, z: Complex64, ledger: &ParameterLedger) -> Result<Complex64> {
    semiflow_apply_with_budget(n, t, z, ledger, DEFAULT_CROSSING_BUDGET)
}

pub fn semiflow_apply_with_budget(
    n: usize,
    t: &RationalTime,
    z: Complex64,
    ledger: &ParameterLedger,
    budget: u32,
) -> Result<Complex64> {
    if n == 0 {
        return Ok(z + t.to_f64());
    }
    let all_a = ledger.a_values();
    let set = TimeSetDescriptor::new(0, n, &all_a)?;
    if !set.contains(t) {
        return Err(Error::IllegalTime(t.to_string(), n));
    }
    let maps = ledger.uniformizers(n)?;
    level_flow(&maps, &all_a[1..=n], t.value(), z, budget)
}

/// `P_n = z_n + (1/a_n) Z`, one point per class mod 1, where `z_n` is the
/// image of the upper end of a level-1 cylinder.
pub fn cylinder_end_orbit(k: &NormalizedUniformizer) -> Vec<Complex64> {
    let end = k.cylinder_end(1);
    let base = Complex64::new(end.re - end.re.floor(), end.im);
    (0..k.divisor())
        .map(|i| {
            let mut p = base + i as f64 / k.divisor_f64();
            p.re -= p.re.floor();
            p
        })
        .collect()
}

/// `O_{0,n+1} = K_0 ... K_{n-1}(P_n)` reduced mod 1. The classes mod 1 are
/// the images of `z_n + k/a_n` for `0 <= k < a_0 ... a_n`; more than
/// `limit` of them is an error.
pub fn periodic_orbit_set(n: usize, ledger: &ParameterLedger, limit: usize) -> Result<Vec<Complex64>> {
    let kn = ledger.uniformizer(n)?;
    let g = ComposedMap::from_ledger(ledger, n)?;
    let count = ledger.product(n + 1)?;
    let total = count.to_usize().filter(|&c| c <= limit).ok_or(Error::TooManyPoints {
        count: count.to_string(),
        limit,
    })?;
    let end = kn.cylinder_end(1);
    let base = Complex64::new(end.re - end.re.floor(), end.im);
    (0..total)
        .map(|k| {
            let mut w = g.value(base + k as f64 / kn.divisor_f64())?;
            w.re -= w.re.floor();
            Ok(w)
        })
        .collect()
}

/// Distance between two points of the cylinder `C / Z`.
pub fn distance_mod_one(z: Complex64, w: Complex64) -> f64 {
    let d = z - w;
    Complex64::new(d.re - d.re.round(), d.im).norm()
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitClosure {
    /// Steps until the orbit returned to its start mod 1, if it did.
    pub period: Option<usize>,
    /// Largest distance of an iterate from the orbit set, mod 1.
    pub max_deviation: f64,
}

/// Iterate `F_{0,n+1,t}` from `start` up to `max_steps` times, measuring how
/// far iterates stray from `set` and when the orbit closes up.
pub fn orbit_closure(
    n: usize,
    t: &RationalTime,
    start: Complex64,
    set: &[Complex64],
    max_steps: usize,
    tol: f64,
    ledger: &ParameterLedger,
) -> Result<OrbitClosure> {
    orbit_closure_at(n + 1, t, start, set, max_steps, tol, ledger)
}

/// As [`orbit_closure`], iterating `F_{0,level,t}`.
pub fn orbit_closure_at(
    level: usize,
    t: &RationalTime,
    start: Complex64,
    set: &[Complex64],
    max_steps: usize,
    tol: f64,
    ledger: &ParameterLedger,
) -> Result<OrbitClosure> {
    let mut z = start;
    let mut max_deviation: f64 = 0.0;
    for step in 1..=max_steps {
        z = semiflow_apply(level, t, z, ledger)?;
        let dev = set
            .iter()
            .map(|&p| distance_mod_one(z, p))
            .fold(f64::INFINITY, f64::min);
        max_deviation = max_deviation.max(dev);
        if distance_mod_one(z, start) < tol {
            return Ok(OrbitClosure {
                period: Some(step),
                max_deviation,
            });
        }
    }
    Ok(OrbitClosure {
        period: None,
        max_deviation,
    })
}
