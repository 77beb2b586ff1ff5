//! Sampled regularity of `Phi(theta, t)`: the bi-Holder upper bound, the
//! Lipschitz bound for the inverse, truncation errors and contraction of
//! the level maps.

use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::curve::{phi, CombAtlas, CombPointKey};
use super::digits::{all_prefixes, digit_weight, first_difference, theta_distance, theta_of};
use crate::error::Result;
use crate::folding::time::ratio_to_f64;
use crate::ledger::ParameterLedger;
use crate::uniformizer::NormalizedUniformizer;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The exponent asked for is above the largest certified one.
    NotCertified,
}

impl CheckStatus {
    fn from_ratio(worst: f64) -> Self {
        if worst <= 1.0 {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        }
    }
}

/// Worst value of `lhs / rhs` over the sampled pairs; at most 1 passes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub pairs: usize,
    #[serde(with = "crate::hexfloat")]
    pub worst_ratio: f64,
    pub status: CheckStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    #[serde(with = "crate::hexfloat")]
    pub alpha: f64,
    /// `M = ||sigma_(0, 0, ...)||_{C^1} + 1`.
    #[serde(with = "crate::hexfloat")]
    pub m: f64,
    /// `3 * 3^alpha + M`.
    #[serde(with = "crate::hexfloat")]
    pub constant: f64,
    pub all_pairs: PairReport,
    /// Child against its `0`-extension, bound `(a_0 ... a_n)^{-alpha_n}`.
    pub adjacent: PairReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    /// `|(theta, t) - (theta', t')| / ((13/3) |Phi - Phi'|)`.
    pub all_pairs: PairReport,
    /// `(4/5) delta / |Phi - Phi'|` at equal heights, `delta` the weight of
    /// the first differing digit.
    pub separation: PairReport,
}

struct Sample {
    theta: f64,
    prefix: Vec<i8>,
    t: f64,
    value: Complex64,
}

fn samples(atlas: &CombAtlas) -> Result<Vec<Sample>> {
    let mut out = Vec::new();
    for c in &atlas.curves {
        let theta = ratio_to_f64(&theta_of(&c.prefix, &atlas.a)?);
        for p in &c.points {
            out.push(Sample {
                theta,
                prefix: c.prefix.clone(),
                t: p.t,
                value: p.value,
            });
        }
    }
    Ok(out)
}

fn base_c1_norm(atlas: &CombAtlas) -> f64 {
    let zero = vec![0; atlas.depth];
    atlas
        .curve(&zero)
        .map(|c| {
            c.points
                .iter()
                .map(|p| p.value.norm().max(p.derivs[0].norm()))
                .fold(0.0, f64::max)
        })
        .unwrap_or(f64::NAN)
}

/// `|Phi(theta', t') - Phi(theta, t)| <= (3 3^alpha + M) |(theta', t') -
/// (theta, t)|^alpha` over all pairs of atlas samples. `certified` is the
/// largest certified exponent; a larger `alpha` is reported as not
/// certified.
pub fn verify_holder(atlas: &CombAtlas, alpha: f64, certified: f64) -> Result<HolderReport> {
    let pts = samples(atlas)?;
    let m = base_c1_norm(atlas) + 1.0;
    let constant = 3.0 * 3f64.powf(alpha) + m;
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            let d = (p.theta - q.theta).hypot(p.t - q.t);
            if d == 0.0 {
                continue;
            }
            worst = worst.max((p.value - q.value).norm() / (constant * d.powf(alpha)));
            pairs += 1;
        }
    }
    let mut status = CheckStatus::from_ratio(worst);
    if alpha > certified {
        status = CheckStatus::NotCertified;
    }
    Ok(HolderReport {
        alpha,
        m,
        constant,
        all_pairs: PairReport {
            pairs,
            worst_ratio: worst,
            status,
        },
        adjacent: adjacent_pairs(atlas, alpha)?,
    })
}

/// Each tooth of the atlas against the tooth of its `0`-extension at the
/// same height, with bound `(a_0 ... a_n)^{-alpha}`.
fn adjacent_pairs(atlas: &CombAtlas, alpha: f64) -> Result<PairReport> {
    let n = atlas.depth;
    if n == 0 {
        return Ok(PairReport {
            pairs: 0,
            worst_ratio: 0.0,
            status: CheckStatus::Pass,
        });
    }
    let ln_p: f64 = atlas.a.iter().map(|&a| (a as f64).ln()).sum();
    let bound = (-alpha * ln_p).exp();
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for c in &atlas.curves {
        let mut parent = c.prefix.clone();
        *parent.last_mut().expect("depth >= 1") = 0;
        let p = atlas.curve(&parent).expect("atlas holds every prefix");
        for (x, y) in c.points.iter().zip(&p.points) {
            worst = worst.max((x.value - y.value).norm() / bound);
            pairs += 1;
        }
    }
    Ok(PairReport {
        pairs,
        worst_ratio: worst,
        status: CheckStatus::from_ratio(worst),
    })
}

/// `|(theta, t) - (theta', t')| <= (13/3) |Phi(theta, t) - Phi(theta', t')|`
/// over all pairs, and the `(4/5) delta` separation at equal heights.
pub fn verify_lipschitz_inverse(atlas: &CombAtlas) -> Result<LipschitzReport> {
    let pts = samples(atlas)?;
    let mut worst: f64 = 0.0;
    let mut sep: f64 = 0.0;
    let (mut pairs, mut sep_pairs) = (0, 0);
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            let d = (p.theta - q.theta).hypot(p.t - q.t);
            let img = (p.value - q.value).norm();
            if d == 0.0 {
                continue;
            }
            worst = worst.max(d / (13.0 / 3.0 * img));
            pairs += 1;
            if p.t == q.t {
                if let Some(i0) = first_difference(&p.prefix, &q.prefix) {
                    let delta = ratio_to_f64(&digit_weight(i0, &atlas.a)?);
                    sep = sep.max(0.8 * delta / img);
                    sep_pairs += 1;
                }
            }
        }
    }
    Ok(LipschitzReport {
        all_pairs: PairReport {
            pairs,
            worst_ratio: worst,
            status: CheckStatus::from_ratio(worst),
        },
        separation: PairReport {
            pairs: sep_pairs,
            worst_ratio: sep,
            status: CheckStatus::from_ratio(sep),
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub depth: usize,
    /// Deepest truncation used in place of the limit.
    pub limit_depth: usize,
    /// `|Phi_d - Phi_{d+1}| / ((1/20) / (a_0 ... a_d))`.
    pub successive: PairReport,
    /// `|Phi_d - Phi_D| / (0.1 / (a_0 ... a_{d+1}))`, `D` the limit depth.
    pub assembled: PairReport,
}

/// Truncation errors of `Phi_d` on the given heights, for every `theta`
/// with `D + 1` digits, where `Phi_D` is the deepest truncation the ledger
/// supports (`D >= d + 1`). Needs `a_0, ..., a_{d+2}`.
pub fn verify_truncation(ledger: &ParameterLedger, d: usize, heights: &[f64]) -> Result<TruncationReport> {
    let a = ledger.a_values();
    if a.len() < d + 3 {
        return Err(crate::error::Error::DepthUnavailable {
            needed: d + 3,
            available: a.len(),
        });
    }
    let limit = a.len() - 2;
    let inv = |count: usize| -> Result<f64> {
        let p = ledger.product(count)?;
        Ok(ratio_to_f64(&BigRational::new(1.into(), p)))
    };
    let succ_bound = inv(d + 1)? / 20.0;
    let full_bound = 0.1 * inv(d + 2)?;
    let (mut succ, mut full): (f64, f64) = (0.0, 0.0);
    let mut pairs = 0;
    for p in all_prefixes(limit + 1) {
        let theta = theta_of(&p, &a)?;
        for &t in heights {
            let key = CombPointKey { theta: theta.clone(), t };
            let v0 = phi(&key, d, ledger)?.value;
            let v1 = phi(&key, d + 1, ledger)?.value;
            let vl = if limit == d + 1 { v1 } else { phi(&key, limit, ledger)?.value };
            succ = succ.max((v0 - v1).norm() / succ_bound);
            full = full.max((v0 - vl).norm() / full_bound);
            pairs += 1;
        }
    }
    Ok(TruncationReport {
        depth: d,
        limit_depth: limit,
        successive: PairReport {
            pairs,
            worst_ratio: succ,
            status: CheckStatus::from_ratio(succ),
        },
        assembled: PairReport {
            pairs,
            worst_ratio: full,
            status: CheckStatus::from_ratio(full),
        },
    })
}

/// `|K(z) - K(z')| >= |z - z'| / a` over all pairs of `points`; reports the
/// worst `(|z - z'| / a) / |K(z) - K(z')|`.
pub fn verify_contraction(k: &NormalizedUniformizer, points: &[Complex64]) -> Result<PairReport> {
    let images = points.iter().map(|&z| k.eval(z)).collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = (points[i] - points[j]).norm();
            if d == 0.0 {
                continue;
            }
            worst = worst.max(d / k.divisor_f64() / (images[i] - images[j]).norm());
            pairs += 1;
        }
    }
    Ok(PairReport {
        pairs,
        worst_ratio: worst,
        status: CheckStatus::from_ratio(worst),
    })
}

/// `theta` values of an atlas, in curve order.
pub fn atlas_thetas(atlas: &CombAtlas) -> Result<Vec<BigRational>> {
    atlas.curves.iter().map(|c| theta_of(&c.prefix, &atlas.a)).collect()
}

/// Smallest gap between distinct `theta` values of the atlas.
pub fn min_theta_gap(atlas: &CombAtlas) -> Result<f64> {
    let t = atlas_thetas(atlas)?;
    let mut gap = f64::INFINITY;
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            gap = gap.min(theta_distance(&t[i], &t[j]));
        }
    }
    Ok(gap)
}
