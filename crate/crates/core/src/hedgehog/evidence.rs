//! Invariance of `G_n(H̄)` under `F_{0,n+1}` and the periodic-orbit
//! evidence of non-linearisability.

use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{contains, membership};
use crate::error::{Error, Result};
use crate::folding::flow::{orbit_closure_at, periodic_orbit_set, semiflow_apply};
use crate::folding::ladder::ComposedMap;
use crate::folding::time::{RationalTime, TimeSetDescriptor};
use crate::ledger::ParameterLedger;
use crate::uniformizer::Anchored;

/// Images under the flow count as inside down to this margin.
pub const INVARIANCE_TOLERANCE: f64 = 1e-8;
/// Largest distance mod 1 of a flowed orbit point from the orbit set.
pub const RETURN_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct FlowSample {
    pub time: RationalTime,
    pub z: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceRow {
    pub time: RationalTime,
    #[serde(with = "crate::hexfloat::complex")]
    pub z: Complex64,
    /// `None` when the flow is undefined at `(t, z)`.
    pub image: Option<[String; 2]>,
    #[serde(with = "crate::hexfloat")]
    pub margin: f64,
    pub member: bool,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub depth: usize,
    pub rows: Vec<InvarianceRow>,
    #[serde(with = "crate::hexfloat")]
    pub worst_margin: f64,
    pub passed: bool,
}

/// Flow every sample by `F_{0,depth+1,t}` and test the image for
/// membership in `G_depth(H̄)`. Needs `a_0, ..., a_{depth+1}`.
pub fn invariance_check(depth: usize, samples: &[FlowSample], ledger: &ParameterLedger) -> Result<InvarianceReport> {
    let maps = ledger.uniformizers(depth + 1)?;
    ledger.divisor(depth + 1)?;
    let mut rows = Vec::with_capacity(samples.len());
    let mut worst = f64::INFINITY;
    for s in samples {
        let (image, margin, member, note) = match semiflow_apply(depth + 1, &s.time, s.z, ledger) {
            Ok(w) => {
                let m = membership(&maps, Anchored::plain(w));
                let member = m.margin >= -INVARIANCE_TOLERANCE && m.failure.is_none();
                (Some(w), m.margin, member, m.failure)
            }
            Err(e) => (None, f64::NEG_INFINITY, false, Some(e.to_string())),
        };
        worst = worst.min(margin);
        rows.push(InvarianceRow {
            time: s.time.clone(),
            z: s.z,
            image: image.map(|w| [crate::hexfloat::format(w.re), crate::hexfloat::format(w.im)]),
            margin,
            member,
            note,
        });
    }
    let passed = !rows.is_empty() && rows.iter().all(|r| r.member);
    Ok(InvarianceReport {
        depth,
        rows,
        worst_margin: worst,
        passed,
    })
}

/// A random member of `A_{0,n}`: the last remainder is drawn from
/// `[-2/a_n, 2/a_n]` on a grid of step `1/(30 a_n)`, and each level above
/// adds an integer (in `{-1, 0, 1}`, or `{-2, ..., 2}` at the top) before
/// dividing by its `a`. Needs `a_0, ..., a_n`.
pub fn legal_time(rng: &mut impl Rng, n: usize, a: &[u64]) -> Result<RationalTime> {
    if a.len() <= n {
        return Err(Error::DepthUnavailable {
            needed: n + 1,
            available: a.len(),
        });
    }
    let big = |x: i64| BigRational::from_integer(BigInt::from(x));
    if n == 0 {
        return Ok(RationalTime::ratio(rng.gen_range(-60..=60), 30));
    }
    let mut r = BigRational::new(BigInt::from(rng.gen_range(-60..=60)), BigInt::from(30 * a[n]));
    for k in (0..n).rev() {
        let m = if k == 0 { rng.gen_range(-2..=2) } else { rng.gen_range(-1..=1) };
        r = (big(m) + r) / big(a[k] as i64);
    }
    let t = RationalTime(r);
    debug_assert!(TimeSetDescriptor::new(0, n, a)?.contains(&t));
    Ok(t)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleDraw {
    pub samples: Vec<FlowSample>,
    /// Draws where the flow was undefined (too close to a ramification
    /// point, or off the crossing budget).
    pub rejected: usize,
}

/// Seeded `(t, z)` pairs with `t` in `A_{0,depth+1}`, `z = G_depth(x + iy)`
/// for `x` uniform over one top-level period and `y` in `deep_band`, and
/// the flow defined at `(t, z)`. Gives up after `50 * count` draws.
pub fn legal_flow_samples(
    depth: usize,
    count: usize,
    seed: u64,
    deep_band: (f64, f64),
    ledger: &ParameterLedger,
) -> Result<SampleDraw> {
    let a = ledger.a_values();
    let map = ComposedMap::from_ledger(ledger, depth + 1)?;
    if a.len() < depth + 2 {
        return Err(Error::DepthUnavailable {
            needed: depth + 2,
            available: a.len(),
        });
    }
    let cells: f64 = a[1..=depth].iter().map(|&x| x as f64).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(count);
    let mut rejected = 0;
    for _ in 0..50 * count {
        if samples.len() == count {
            break;
        }
        let xi = Complex64::new(rng.gen_range(0.0..cells), rng.gen_range(deep_band.0..deep_band.1));
        let time = legal_time(&mut rng, depth + 1, &a)?;
        let Ok(z) = map.value(xi) else {
            rejected += 1;
            continue;
        };
        if semiflow_apply(depth + 1, &time, z, ledger).is_err() {
            rejected += 1;
            continue;
        }
        samples.push(FlowSample { time, z });
    }
    Ok(SampleDraw { samples, rejected })
}

/// Orbit points flowed by `F_{0,n}` at `t = 1/(a_0 ... a_n)` for `a_n`
/// steps, each iterate compared with the orbit set mod 1. At level `n` this
/// time is the translation by `1/a_n`, which permutes `P_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnCheck {
    pub time: RationalTime,
    pub steps: usize,
    #[serde(with = "crate::hexfloat")]
    pub max_deviation: f64,
    /// Steps until some start point came back to itself mod 1, if any did.
    pub period: Option<usize>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRow {
    pub n: usize,
    pub points: usize,
    #[serde(with = "crate::hexfloat")]
    pub min_height: f64,
    /// `h_0 + n`.
    #[serde(with = "crate::hexfloat")]
    pub required_height: f64,
    pub height_ok: bool,
    /// `log max |E(p)|` over the orbit set.
    #[serde(with = "crate::hexfloat")]
    pub log_disk_radius: f64,
    /// `-2 pi (h_0 + n)`.
    #[serde(with = "crate::hexfloat")]
    pub log_radius_bound: f64,
    pub radius_ok: bool,
    /// At `n = 0`, whether the orbit clears `h_0 - 1`, the bound that the
    /// choice of `a_0` guarantees.
    pub clears_h0_minus_one: Option<bool>,
    pub returns: ReturnCheck,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonlinearisabilityReport {
    pub max_depth: usize,
    pub rows: Vec<OrbitRow>,
    /// Depths `n <= max_depth` whose `a_n` is not in the ledger.
    pub missing: Vec<usize>,
    /// `log_disk_radius` strictly decreasing in `n`.
    pub radii_decreasing: bool,
    pub passed: bool,
}

/// Heights of `O_{0,n+1}`, their images under `E` and their return under
/// the flow, for `n <= max_depth`. Orbit sets larger than `limit` points
/// are an error.
pub fn nonlinearisability_evidence(
    max_depth: usize,
    ledger: &ParameterLedger,
    limit: usize,
) -> Result<NonlinearisabilityReport> {
    let h0 = ledger.stages[0].h;
    let available = ledger.depth();
    let mut rows = Vec::new();
    let mut missing = Vec::new();
    for n in 0..=max_depth {
        if n >= available {
            missing.push(n);
            continue;
        }
        let set = periodic_orbit_set(n, ledger, limit)?;
        let min_height = set.iter().map(|p| p.im).fold(f64::INFINITY, f64::min);
        let required = h0 + n as f64;
        let log_radius = -TAU * min_height;
        let bound = -TAU * required;
        let returns = return_check(n, &set, ledger)?;
        rows.push(OrbitRow {
            n,
            points: set.len(),
            min_height,
            required_height: required,
            height_ok: min_height >= required,
            log_disk_radius: log_radius,
            log_radius_bound: bound,
            radius_ok: log_radius <= bound,
            clears_h0_minus_one: (n == 0).then_some(min_height >= h0 - 1.0),
            returns,
        });
    }
    let radii_decreasing = rows.windows(2).all(|w| w[1].log_disk_radius < w[0].log_disk_radius);
    let passed = missing.is_empty()
        && radii_decreasing
        && rows
            .iter()
            .all(|r| r.height_ok && r.radius_ok && r.returns.passed);
    Ok(NonlinearisabilityReport {
        max_depth,
        rows,
        missing,
        radii_decreasing,
        passed,
    })
}

fn return_check(n: usize, set: &[Complex64], ledger: &ParameterLedger) -> Result<ReturnCheck> {
    let den = ledger.product(n + 1)?;
    let time = RationalTime(BigRational::new(BigInt::from(1), den));
    let steps = ledger.divisor(n)? as usize;
    let mut max_deviation: f64 = 0.0;
    let mut period = None;
    for &p in set {
        let c = orbit_closure_at(n, &time, p, set, steps, RETURN_TOLERANCE, ledger)?;
        max_deviation = max_deviation.max(c.max_deviation);
        period = period.or(c.period);
    }
    Ok(ReturnCheck {
        time,
        steps,
        max_deviation,
        period,
        passed: max_deviation < RETURN_TOLERANCE,
    })
}

/// Membership of every point in `G_n(H̄)` for each `n <= max_depth`; the
/// worst margin per depth, or `None` when `a_n` is missing.
pub fn containment_margins(points: &[Complex64], max_depth: usize, ledger: &ParameterLedger) -> Vec<Option<(usize, f64)>> {
    (0..=max_depth)
        .map(|n| {
            let mut outside = 0;
            let mut worst = f64::INFINITY;
            for &z in points {
                let m = contains(z, n, ledger).ok()?;
                if !m.member {
                    outside += 1;
                }
                worst = worst.min(m.margin);
            }
            Some((outside, worst))
        })
        .collect()
}
