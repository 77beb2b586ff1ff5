//! Teeth of the comb: images `G(xi_x)` of vertical half-lines, cut by a
//! horizontal strip and parametrized by height, `sigma(t) = s(t) + i t`.
//!
//! With `g_k = G^{(k)}(x + i y(t))` and `D = Re g_1`:
//! `s' = -Im g_1 / D`, `s'' = -Re(conj(g_1) g_2) / D^3`, and `s'''` by one
//! more step of the same chain (each `d/dt` is `(1/D) d/dy`).

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::digits::{all_prefixes, digits_of_theta, x_of, Prefix};
use crate::error::{Error, Result};
use crate::folding::time::ratio_to_f64;
use crate::folding::ComposedMap;
use crate::ledger::ParameterLedger;
use crate::uniformizer::NormalizedUniformizer;

const SOLVE_TOL: f64 = 1e-12;
const NEWTON_STEPS: usize = 20;

/// Horizontal strip `lo <= Im z <= hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    pub lo: f64,
    pub hi: f64,
}

impl Strip {
    /// `1 <= Im z <= 2`, where the comb lives.
    pub const STANDARD: Strip = Strip { lo: 1.0, hi: 2.0 };

    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(0.0 < lo && lo < hi, "strip needs 0 < lo < hi");
        Strip { lo, hi }
    }

    /// `count` equally spaced heights including both edges.
    pub fn grid(&self, count: usize) -> Vec<f64> {
        assert!(count >= 2, "a grid needs both edges");
        (0..count)
            .map(|k| {
                if k + 1 == count {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * k as f64 / (count - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub t: f64,
    /// `s(t) + i t`; the imaginary part is `t` exactly.
    pub value: Complex64,
    /// `sigma'`, `sigma''`, `sigma'''`.
    pub derivs: [Complex64; 3],
    /// `log y` of the deepest point `x + i y` over the sample.
    pub log_y: f64,
    /// Height on the line the solver worked on (see [`ToothSolver`]).
    pub line_y: f64,
    /// `log |G'|` at that point.
    pub log_abs_derivative: f64,
    /// `dv/dy = Re G'` at that point, in log form; `None` when it is not
    /// positive.
    pub log_dv_dy: Option<f64>,
}

impl CurvePoint {
    pub fn y(&self) -> Option<f64> {
        let y = self.log_y.exp();
        (y > 0.0).then_some(y)
    }

    /// `log |d s / d x|`, the sensitivity of the tooth to moving its
    /// vertical line: `|G'|^2 / Re G'`.
    pub fn log_abscissa_sensitivity(&self) -> Option<f64> {
        self.log_dv_dy.map(|l| 2.0 * self.log_abs_derivative - l)
    }

    /// Value and derivatives as one array, `[sigma, sigma', sigma'', sigma''']`.
    pub fn jet(&self) -> [Complex64; 4] {
        [self.value, self.derivs[0], self.derivs[1], self.derivs[2]]
    }
}

/// Solves `Im G(x + i y) = t` along one vertical line.
///
/// Integer abscissas are first pushed through the deepest maps, which send
/// the line over `m` onto the line over `m / a`; those levels are then
/// inverted in closed form on their trough axes.
#[derive(Clone, Debug)]
pub struct ToothSolver {
    map: ComposedMap,
    x: f64,
    /// Levels pushed through, deepest first.
    dropped: Vec<NormalizedUniformizer>,
}

impl ToothSolver {
    pub fn new(map: ComposedMap, x: &BigRational) -> Self {
        let mut levels = map.levels().to_vec();
        let mut x = x.clone();
        let mut dropped = Vec::new();
        while x.is_integer() {
            let Some(k) = levels.pop() else { break };
            x /= BigRational::from_integer(k.divisor().into());
            dropped.push(k);
        }
        ToothSolver {
            map: ComposedMap::new(levels),
            x: ratio_to_f64(&x),
            dropped,
        }
    }

    /// Abscissa of the line actually solved on.
    pub fn x(&self) -> f64 {
        self.x
    }

    /// `v(y) = Im G(x + i y)` for the reduced map.
    pub fn height(&self, y: f64) -> Result<f64> {
        Ok(self.map.value(Complex64::new(self.x, y))?.im)
    }

    fn height_or_bracket(&self, y: f64) -> Result<f64> {
        self.height(y)
            .map_err(|e| Error::BracketFailure(format!("v({} + {y} i): {e}", self.x)))
    }

    fn bracket(&self, t: f64, hint: Option<f64>) -> Result<(f64, f64)> {
        let v0 = self.height_or_bracket(0.0)?;
        if v0 >= t {
            return Err(Error::BracketFailure(format!(
                "v({} + 0i) = {v0} is not below {t}",
                self.x
            )));
        }
        let mut lo = 0.0;
        let mut hi = hint.filter(|h| *h > 0.0).unwrap_or(1.0);
        for _ in 0..2200 {
            if self.height_or_bracket(hi)? > t {
                return Ok((lo, hi));
            }
            lo = hi;
            hi *= 2.0;
        }
        Err(Error::BracketFailure(format!("v({} + i y) stays below {t}", self.x)))
    }

    /// Point of the tooth at height `t`; `hint` is a nearby `y` on the
    /// reduced line.
    pub fn point(&self, t: f64, hint: Option<f64>) -> Result<CurvePoint> {
        let one = Complex64::new(1.0, 0.0);
        let (y, w, [g1, g2, g3], slope) = if self.map.is_empty() {
            (t, Complex64::new(self.x, t), [one, Complex64::zero(), Complex64::zero()], (0.0, one))
        } else {
            let y = self.solve(t, hint)?;
            let z = Complex64::new(self.x, y);
            let d = self.map.log_derivative(z)?;
            (y, self.map.value(z)?, self.map.derivatives3(z)?, (d.modulus.log_abs, d.phase))
        };
        let d = g1.re;
        let s1 = -g1.im / d;
        let n = -(g1.conj() * g2).re;
        let dd = d * d * d;
        let s2 = n / dd;
        // derivatives in y of n and d^3, then one factor 1/d for d/dt
        let dn = (g1.conj() * g3).im;
        let ddd = -3.0 * d * d * g2.im;
        let s3 = (dn * dd - n * ddd) / (dd * dd) / d;
        let mut log_y = y.ln();
        let mut log_abs_derivative = slope.0;
        let mut log_dv_dy = (slope.1.re > 0.0).then(|| slope.0 + slope.1.re.ln());
        for k in self.dropped.iter().rev() {
            let p = k.axis_preimage(log_y);
            log_y = p.log_y;
            log_abs_derivative += p.log_derivative;
            log_dv_dy = log_dv_dy.map(|l| l + p.log_derivative);
        }
        Ok(CurvePoint {
            t,
            value: Complex64::new(w.re, t),
            derivs: [Complex64::new(s1, 1.0), Complex64::new(s2, 0.0), Complex64::new(s3, 0.0)],
            log_y,
            line_y: y,
            log_abs_derivative,
            log_dv_dy,
        })
    }

    /// Reduced height `y` with `v(y) = t`: bisection down to a relative
    /// width of `1e-3`, then safeguarded Newton.
    fn solve(&self, t: f64, hint: Option<f64>) -> Result<f64> {
        let (mut lo, mut hi) = self.bracket(t, hint)?;
        for _ in 0..60 {
            if hi - lo <= 1e-3 * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.height_or_bracket(mid)? > t {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let mut y = 0.5 * (lo + hi);
        let tol = SOLVE_TOL * t.abs().max(1.0);
        for _ in 0..NEWTON_STEPS + 60 {
            let z = Complex64::new(self.x, y);
            let v = self.map.value(z)?.im - t;
            if v.abs() <= tol {
                return Ok(y);
            }
            if v > 0.0 {
                hi = y;
            } else {
                lo = y;
            }
            let g1 = self.map.derivatives3(z)?[0];
            let next = y - v / g1.re;
            y = if next > lo && next < hi && g1.re > 0.0 {
                next
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= f64::EPSILON * hi {
                if (self.height(y)? - t).abs() <= 1e3 * tol {
                    return Ok(y);
                }
                break;
            }
        }
        Err(Error::BracketFailure(format!(
            "no convergence for Im G({} + i y) = {t}",
            self.x
        )))
    }
}

/// A tooth `Gamma(prefix)` sampled on a height grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CombCurve {
    pub prefix: Prefix,
    pub x_value: BigRational,
    pub points: Vec<CurvePoint>,
}

impl CombCurve {
    /// Largest `|Re sigma|` over the samples.
    pub fn max_abs_re(&self) -> f64 {
        self.points.iter().map(|p| p.value.re.abs()).fold(0.0, f64::max)
    }

    /// Every sample has `dv/dy > 0`.
    pub fn is_graph(&self) -> bool {
        self.points.iter().all(|p| p.log_dv_dy.is_some())
    }
}

/// Solver for the tooth of `prefix`: `G = K_0 ... K_{n-1}` on the line at
/// `x(prefix)`. Needs `a_0, ..., a_n`.
pub fn tooth_solver(prefix: &[i8], ledger: &ParameterLedger) -> Result<ToothSolver> {
    let a = ledger.a_values();
    let x = x_of(prefix, &a)?;
    let map = ComposedMap::from_ledger(ledger, prefix.len())?;
    Ok(ToothSolver::new(map, &x))
}

pub fn sample_tooth(prefix: &[i8], ledger: &ParameterLedger, grid: &[f64]) -> Result<CombCurve> {
    let a = ledger.a_values();
    let x_value = x_of(prefix, &a)?;
    let solver = tooth_solver(prefix, ledger)?;
    let mut hint = None;
    let mut points = Vec::with_capacity(grid.len());
    for &t in grid {
        let p = solver.point(t, hint)?;
        hint = Some(p.line_y);
        points.push(p);
    }
    Ok(CombCurve {
        prefix: prefix.to_vec(),
        x_value,
        points,
    })
}

/// `max_k<=r max_t |sigma_1^{(k)}(t) - sigma_2^{(k)}(t)|`.
pub fn cr_distance(c1: &CombCurve, c2: &CombCurve, r: usize) -> Result<f64> {
    assert!(r <= 3, "derivatives are available to order 3");
    if c1.points.len() != c2.points.len() || c1.points.iter().zip(&c2.points).any(|(p, q)| p.t != q.t) {
        return Err(Error::GridMismatch);
    }
    let mut worst: f64 = 0.0;
    for (p, q) in c1.points.iter().zip(&c2.points) {
        let (jp, jq) = (p.jet(), q.jet());
        for k in 0..=r {
            worst = worst.max((jp[k] - jq[k]).norm());
        }
    }
    Ok(worst)
}

/// All `3^depth` teeth of one stage on a common grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CombAtlas {
    pub depth: usize,
    pub strip: Strip,
    pub grid: Vec<f64>,
    /// `a_0, ..., a_depth`.
    pub a: Vec<u64>,
    /// In the order of [`all_prefixes`].
    pub curves: Vec<CombCurve>,
}

impl CombAtlas {
    pub fn build(ledger: &ParameterLedger, depth: usize, strip: Strip, samples: usize) -> Result<Self> {
        let a = ledger.a_values();
        if a.len() < depth + 1 {
            return Err(Error::DepthUnavailable {
                needed: depth + 1,
                available: a.len(),
            });
        }
        let grid = strip.grid(samples);
        let curves = all_prefixes(depth)
            .iter()
            .map(|p| sample_tooth(p, ledger, &grid))
            .collect::<Result<Vec<_>>>()?;
        Ok(CombAtlas {
            depth,
            strip,
            grid,
            a: a[..=depth].to_vec(),
            curves,
        })
    }

    pub fn curve(&self, prefix: &[i8]) -> Option<&CombCurve> {
        self.curves.iter().find(|c| c.prefix == prefix)
    }
}

/// Point of the comb in `(theta, t)` coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct CombPointKey {
    pub theta: BigRational,
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhiValue {
    pub value: Complex64,
    /// Digits actually used: `e_0, ..., e_depth`.
    pub prefix: Prefix,
    /// `0.1 / (a_0 ... a_{depth+1})`: distance bound to the limit value.
    pub truncation_bound: f64,
}

/// `Phi(theta, t)` through the tooth of `e_0, ..., e_depth`, i.e. `theta`
/// truncated after `depth + 1` digits. Needs `a_0, ..., a_{depth+1}`.
pub fn phi(key: &CombPointKey, depth: usize, ledger: &ParameterLedger) -> Result<PhiValue> {
    let a = ledger.a_values();
    if a.len() < depth + 2 {
        return Err(Error::DepthUnavailable {
            needed: depth + 2,
            available: a.len(),
        });
    }
    let digits = digits_of_theta(&key.theta, &a, a.len() - 1)?;
    let mut prefix: Prefix = digits.into_iter().take(depth + 1).collect();
    prefix.resize(depth + 1, 0);
    let solver = tooth_solver(&prefix, ledger)?;
    let p = solver.point(key.t, None)?;
    let product = ledger.product(depth + 2)?;
    let bound = 0.1 * ratio_to_f64(&BigRational::new(1.into(), product));
    Ok(PhiValue {
        value: p.value,
        prefix,
        truncation_bound: bound,
    })
}
