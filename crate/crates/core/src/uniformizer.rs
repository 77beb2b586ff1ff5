//! The uniformizer `K(z) = (1/2 pi i) log(-log(1 - e^{2 pi i z}))` and its
//! normalized family `(1/a) K_delta`.
//!
//! `delta` is never stored. Everything is expressed through
//! `lambda = -log(1 - e^{-2 pi delta})` and `A = log(lambda)`, with
//! `e^{-2 pi delta} = 1 - e^{-lambda}`.
//!
//! Sheet levels follow the inner value: on level `m` the inner value is
//! `u = -PLog(1 - w) + 2 pi i m`. Crossing a slit below its tip from right
//! to left raises the level by one.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logmag::LogMagnitude;
use crate::numeric::{expm1, ln_1p, nearest, over_two_pi_i, two_pi_i, TAU};

const LN_TAU: f64 = 1.837_877_066_409_345_5;

/// Branch indices of the two logarithms in `K`, relative to the base
/// formula `z + (1/2 pi i) PLog(-PLog(1 - w) / w)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BranchState {
    /// Multiple of `2 pi i` added to the inner value; equals the sheet level.
    pub inner: i64,
    /// Multiple of `2 pi i` added to the outer logarithm.
    pub outer: i64,
}

impl BranchState {
    pub const BASE: BranchState = BranchState { inner: 0, outer: 0 };
}

/// Offset of a chart point from its integer anchor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Offset {
    Linear(Complex64),
    /// The offset is `exp(value)`; used when it is below `f64` range.
    Log(Complex64),
}

impl Offset {
    /// Best `f64` approximation (underflows to zero for `Log`).
    pub fn value(self) -> Complex64 {
        match self {
            Offset::Linear(d) => d,
            Offset::Log(l) => l.exp(),
        }
    }

    pub fn im_sign(self) -> f64 {
        match self {
            Offset::Linear(d) => d.im,
            Offset::Log(l) => l.im.sin(),
        }
    }

    /// `log|offset|`.
    pub fn log_abs(self) -> f64 {
        match self {
            Offset::Linear(d) => d.norm().ln(),
            Offset::Log(l) => l.re,
        }
    }

    /// Imaginary part as a `LogMagnitude`.
    pub fn im_log(self) -> LogMagnitude {
        match self {
            Offset::Linear(d) => LogMagnitude::from_f64(d.im),
            Offset::Log(l) => {
                LogMagnitude::from_f64(l.im.sin()) * LogMagnitude::from_log(l.re)
            }
        }
    }
}

/// A chart point `anchor + offset`, keeping full relative precision of the
/// offset even when it is far below the spacing of `f64` near `anchor`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Anchored {
    pub anchor: i64,
    pub offset: Offset,
}

impl Anchored {
    pub fn plain(z: Complex64) -> Self {
        let n = nearest(z.re);
        Anchored {
            anchor: n,
            offset: Offset::Linear(z - n as f64),
        }
    }

    pub fn to_complex(self) -> Complex64 {
        self.offset.value() + self.anchor as f64
    }

    pub fn im(self) -> f64 {
        self.offset.value().im
    }

    /// Translate by a real amount.
    pub fn shifted(self, s: f64) -> Self {
        if s.fract() == 0.0 && s.abs() < 9.0e15 {
            Anchored {
                anchor: self.anchor + s as i64,
                offset: self.offset,
            }
        } else {
            Anchored::plain(Complex64::new(self.anchor as f64 + s, 0.0) + self.offset.value())
        }
    }
}

/// Where a value lands on the surface under the inverse map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preimage {
    /// Sheet level; 0 is the base sheet.
    pub level: i64,
    /// Index of the slit whose cylinder stack holds the point (only
    /// meaningful when `level != 0`).
    pub slit: i64,
    /// Base-chart point (level 0) or cylinder chart point with real part
    /// in `[0, 1)`.
    pub point: Anchored,
}

/// Derivative stored as modulus in log space and a unit phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledDerivative {
    pub modulus: LogMagnitude,
    pub phase: Complex64,
}

impl ScaledDerivative {
    pub fn to_complex(self) -> Complex64 {
        self.phase * self.modulus.to_f64()
    }
}

/// Output of [`NormalizedUniformizer::threshold_segment`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdSegment {
    pub v: f64,
    /// Height on the imaginary axis where `Im norm_K = v`; may underflow.
    pub y0: f64,
    pub log_y0: f64,
    /// `log(w_0)`, where `w_0` is the inner value at the top of the segment.
    pub log_w0: f64,
    /// `log((e^{w_0} - 1) / w_0)`, a lower bound for `log|a norm_K'|` on
    /// the segment.
    pub logbound: LogMagnitude,
    /// `(log(w_0) - 2 pi a (h - v)) / (2 pi)`.
    pub slack: f64,
}

/// Output of [`NormalizedUniformizer::axis_preimage`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisPreimage {
    /// `log u` at the point.
    pub log_u: f64,
    pub log_y: f64,
    /// `log |norm_K'(i y)|` (the derivative is real and positive there).
    pub log_derivative: f64,
}

impl AxisPreimage {
    /// `y`, or `None` when it is below `f64` range.
    pub fn y(&self) -> Option<f64> {
        let y = self.log_y.exp();
        (y > 0.0).then_some(y)
    }
}

/// Sampling grid for the asymptotic gap, over one period in `x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapGrid {
    pub im_min: f64,
    pub im_max: f64,
    pub rows: usize,
    pub columns: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapEstimate {
    pub sup: f64,
    pub argmax: Complex64,
    /// `(Im z, sup over the row)`.
    pub rows: Vec<(f64, f64)>,
}

/// One normalized map `(1/a) K_delta` with `delta = delta(a, h)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedUniformizer {
    a: u64,
    h: f64,
    log_lambda: f64,
}

fn wrap(z: Complex64) -> Complex64 {
    let mut im = z.im % TAU;
    if im > PI {
        im -= TAU;
    } else if im <= -PI {
        im += TAU;
    }
    Complex64::new(z.re, im)
}

fn split(z: Complex64) -> (i64, Complex64) {
    let n = nearest(z.re);
    (n, z - n as f64)
}

/// `-PLog(1 - e^{arg})`.
fn inner_value(arg: Complex64, at: Complex64) -> Result<Complex64> {
    if arg.re > 30.0 {
        let tail = ln_1p(-(-arg).exp());
        return Ok(-wrap(arg + Complex64::new(0.0, PI) + tail));
    }
    let one_minus_w = -expm1(arg);
    if one_minus_w == Complex64::new(0.0, 0.0) {
        return Err(Error::AtRamification(at));
    }
    Ok(-one_minus_w.ln())
}

/// `PLog(1 - e^{-v})`.
fn log_one_minus_exp_neg(v: Complex64) -> Complex64 {
    if v.re > 0.7 {
        ln_1p(-(-v).exp())
    } else if v.re < -30.0 {
        wrap(-v + Complex64::new(0.0, PI) + ln_1p(-v.exp()))
    } else {
        (-expm1(-v)).ln()
    }
}

/// `K(d + i delta) - i delta - d`-style core: returns `K(d + i delta)` on
/// the given branch for a reduced offset `d`.
fn raw_omega(d: Complex64, ln_q: f64, branch: BranchState, at: Complex64) -> Result<Complex64> {
    let arg = two_pi_i(d) + ln_q;
    let shift = Complex64::new(0.0, -ln_q / TAU);
    let log_ratio = if branch.inner == 0 && arg.re < -7.0 {
        let w = arg.exp();
        let s = w * (0.5 + w * (1.0 / 3.0 + w * (0.25 + w * (0.2 + w / 6.0))));
        ln_1p(s)
    } else {
        let u = inner_value(arg, at)? + Complex64::new(0.0, TAU * branch.inner as f64);
        if u == Complex64::new(0.0, 0.0) {
            return Err(Error::OutsideDomain(at));
        }
        wrap(u.ln() - arg)
    };
    let log_ratio = log_ratio + Complex64::new(0.0, TAU * branch.outer as f64);
    Ok(d + shift + over_two_pi_i(log_ratio))
}

/// Unnormalized `K` (`delta = 0`) on a branch.
///
/// For the base branch this is `z + (1/2 pi i) PLog(-PLog(1 - w) / w)`,
/// which is analytic on the whole slit plane.
pub fn base_k(z: Complex64, branch: BranchState) -> Result<Complex64> {
    let (n, d) = split(z);
    if branch.inner == 0 && d.re == 0.0 && d.im <= 0.0 {
        return Err(if d.im == 0.0 {
            Error::AtRamification(z)
        } else {
            Error::OnSlit(z)
        });
    }
    Ok(raw_omega(d, 0.0, branch, z)? + n as f64)
}

/// Solve for `A = log(lambda)` given `(a, h)`.
pub fn solve_lambda(a: u64, h: f64) -> Result<NormalizedUniformizer> {
    NormalizedUniformizer::new(a, h)
}

impl NormalizedUniformizer {
    /// Solve `lambda = e^{2 pi a h} log(2 - e^{-lambda})` by fixed-point
    /// iteration in `A = log(lambda)`.
    pub fn new(a: u64, h: f64) -> Result<Self> {
        if a == 0 || !(h > 2.0) || !h.is_finite() {
            return Err(Error::InvalidParameters { a, h });
        }
        let base = TAU * a as f64 * h;
        let step = |log_lambda: f64| {
            let tail = -0.5 * (-log_lambda.exp()).exp();
            base + (LN_2 + tail.ln_1p()).ln()
        };
        let mut log_lambda = base + LN_2.ln();
        for _ in 0..100 {
            let next = step(log_lambda);
            let done = (next - log_lambda).abs() < 1e-14 * next.abs().max(1.0);
            log_lambda = next;
            if done {
                return Ok(NormalizedUniformizer { a, h, log_lambda });
            }
        }
        Err(Error::LambdaNonConvergence { a, h })
    }

    pub fn divisor(&self) -> u64 {
        self.a
    }

    pub fn divisor_f64(&self) -> f64 {
        self.a as f64
    }

    pub fn height(&self) -> f64 {
        self.h
    }

    /// `A = log(lambda)`.
    pub fn log_lambda(&self) -> f64 {
        self.log_lambda
    }

    /// `lambda`, infinite when `A > 709`.
    pub fn lambda(&self) -> f64 {
        self.log_lambda.exp()
    }

    /// `log(e^{-2 pi delta}) = log(1 - e^{-lambda})`; zero at working
    /// precision in the valid regime.
    pub fn ln_q(&self) -> f64 {
        (-(-self.lambda()).exp()).ln_1p()
    }

    /// Imaginary part of the unnormalized troughs, `-A / (2 pi)`.
    pub fn trough_height(&self) -> f64 {
        -self.log_lambda / TAU
    }

    /// Residual of `(1/2 pi)(A - log log(1 + e^{-2 pi delta})) = a h`,
    /// measured in `A`.
    pub fn residual(&self) -> f64 {
        let q = -(-self.lambda()).exp();
        let loglog = (LN_2 + (0.5 * q).ln_1p()).ln();
        self.log_lambda - loglog - TAU * self.divisor_f64() * self.h
    }

    fn normalize(&self, omega: Complex64) -> Complex64 {
        Complex64::new(omega.re, omega.im + self.log_lambda / TAU) / self.divisor_f64()
    }

    /// `norm_K` on the base sheet.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.eval_on_branch(z, BranchState::BASE)
    }

    /// `norm_K` on an arbitrary branch of the formula.
    pub fn eval_on_branch(&self, z: Complex64, branch: BranchState) -> Result<Complex64> {
        let (n, d) = split(z);
        if branch.inner == 0 && d.re == 0.0 && d.im <= 0.0 {
            if d.im == 0.0 && branch.outer == 0 {
                return Ok(Complex64::new(n as f64 / self.divisor_f64(), 0.0));
            }
            return Err(Error::OnSlit(z));
        }
        let omega = raw_omega(d, self.ln_q(), branch, z)? + n as f64;
        Ok(self.normalize(omega))
    }

    /// Value on the level-`level` cylinder of the stack over slit `slit`,
    /// at cylinder chart point `x` (real part mod 1). `x` with infinite
    /// imaginary part is the upper end of the cylinder.
    pub fn eval_on_cylinder(&self, slit: i64, level: i64, x: Complex64) -> Result<Complex64> {
        if level == 0 {
            return self.eval(x + slit as f64);
        }
        let x = Complex64::new(x.re - x.re.floor(), x.im);
        let arg = two_pi_i(x) + self.ln_q();
        let u = inner_value(arg, x)? + Complex64::new(0.0, TAU * level as f64);
        let omega = over_two_pi_i(u.ln()) + slit as f64;
        Ok(self.normalize(omega))
    }

    /// `norm_K` at an anchored base-sheet point, including offsets below
    /// `f64` range.
    pub fn eval_anchored(&self, p: Anchored) -> Result<Complex64> {
        match p.offset {
            Offset::Linear(d) => {
                let (n, d) = split(d);
                let z = Complex64::new((p.anchor + n) as f64, 0.0) + d;
                if d == Complex64::new(0.0, 0.0) {
                    return Ok(Complex64::new((p.anchor + n) as f64 / self.divisor_f64(), 0.0));
                }
                if d.re == 0.0 && d.im < 0.0 {
                    return Err(Error::OnSlit(z));
                }
                let omega = raw_omega(d, self.ln_q(), BranchState::BASE, z)? + (p.anchor + n) as f64;
                Ok(self.normalize(omega))
            }
            Offset::Log(l) => {
                let u = self.needle_inner(l);
                let omega = over_two_pi_i(u.ln()) + p.anchor as f64;
                Ok(self.normalize(omega))
            }
        }
    }

    /// Inner value `u` at a base point `n + e^l` with `e^l` below `f64`
    /// range, including the `delta` shift exactly.
    fn needle_inner(&self, l: Complex64) -> Complex64 {
        // 1 - q e^{2 pi i d} = e^{-lambda} - 2 pi i d (up to O(d^2))
        let log_d_term = l + Complex64::new(LN_TAU, -PI / 2.0);
        let lambda = self.lambda();
        if !lambda.is_finite() || log_d_term.re + lambda > 700.0 {
            let tail = if lambda.is_finite() {
                ln_1p((-log_d_term - lambda).exp())
            } else {
                Complex64::new(0.0, 0.0)
            };
            return -wrap(log_d_term + tail);
        }
        let s = (log_d_term + lambda).exp();
        Complex64::new(lambda, 0.0) - ln_1p(s)
    }

    /// Closed-form preimage of an anchored value. The anchor contributes
    /// `a * anchor` to the result anchor, exactly.
    pub fn locate_anchored(&self, p: Anchored) -> Result<Preimage> {
        let af = self.divisor_f64();
        let target = p.to_complex();
        let (rho, theta, turns, re_rest) = match p.offset {
            Offset::Linear(d) => {
                let raw = af * d.re;
                let theta = wrap(Complex64::new(0.0, TAU * raw)).im;
                let turns = nearest(raw - theta / TAU);
                (self.log_lambda - TAU * af * d.im, theta, turns, raw)
            }
            Offset::Log(l) => {
                let c = (l + Complex64::new((TAU * af).ln(), PI / 2.0)).exp();
                (self.log_lambda + c.re, c.im, 0, c.im / TAU)
            }
        };
        let scaled_anchor = p.anchor.checked_mul(self.a as i64).ok_or(Error::AnchorOverflow)?;
        let u = if rho > 700.0 {
            let log_im = rho + theta.sin().abs().ln();
            if log_im > (TAU * 1e6).ln() {
                return Err(Error::NotOnBaseSheet {
                    value: target,
                    level: log_im.exp() / TAU,
                });
            }
            if log_im >= PI.ln() || rho > 709.0 {
                return Err(Error::Underflow(target));
            }
            Complex64::from_polar(rho.exp(), theta)
        } else {
            Complex64::from_polar(rho.exp(), theta)
        };
        let level = ((u.im + PI) / TAU).floor() as i64;
        let v = u - Complex64::new(0.0, TAU * level as f64);
        if level != 0 {
            let x = over_two_pi_i(log_one_minus_exp_neg(v));
            if !x.re.is_finite() {
                return Err(Error::Underflow(target));
            }
            let x = Complex64::new(x.re - x.re.floor(), x.im);
            let slit = scaled_anchor.checked_add(turns).ok_or(Error::AnchorOverflow)?;
            return Ok(Preimage {
                level,
                slit,
                point: Anchored {
                    anchor: 0,
                    offset: Offset::Linear(x),
                },
            });
        }
        let offset = if v.re > 650.0 {
            // zeta = (i / 2 pi)(e^{-v} - e^{-lambda})
            let lambda = self.lambda();
            let corr = if lambda.is_finite() {
                (-expm1(v - lambda)).ln()
            } else {
                Complex64::new(0.0, 0.0)
            };
            if !corr.re.is_finite() {
                // exactly at the trough
                return Ok(Preimage {
                    level: 0,
                    slit: 0,
                    point: Anchored {
                        anchor: scaled_anchor,
                        offset: Offset::Linear(Complex64::new(0.0, 0.0)),
                    },
                });
            }
            Offset::Log(wrap(-v + Complex64::new(-LN_TAU, PI / 2.0) + corr))
        } else {
            let log_w = if rho < -20.0 {
                // log(1 - e^{-v}) = log v - v/2 + v^2/24 + O(v^4)
                Complex64::new(rho, theta) - v * 0.5 + v * v / 24.0
            } else {
                log_one_minus_exp_neg(v)
            };
            Offset::Linear(over_two_pi_i(log_w) + Complex64::new(0.0, self.ln_q() / TAU))
        };
        let re_omega0 = match offset {
            Offset::Linear(z0) => {
                if z0 == Complex64::new(0.0, 0.0) {
                    0.0
                } else {
                    raw_omega(z0, self.ln_q(), BranchState::BASE, target)?.re
                }
            }
            Offset::Log(l) => over_two_pi_i(self.needle_inner(l).ln()).re,
        };
        let anchor = scaled_anchor
            .checked_add(nearest(re_rest - re_omega0))
            .ok_or(Error::AnchorOverflow)?;
        Ok(Preimage {
            level: 0,
            slit: 0,
            point: Anchored { anchor, offset },
        })
    }

    /// Closed-form preimage of a plain value.
    pub fn locate(&self, w: Complex64) -> Result<Preimage> {
        self.locate_anchored(Anchored::plain(w))
    }

    /// Initial guess `a (w - i h)` suggested by the asymptotics.
    pub fn asymptotic_hint(&self, w: Complex64) -> Complex64 {
        (w - Complex64::new(0.0, self.h)) * self.divisor_f64()
    }

    /// Base-sheet preimage of `w`, polished by Newton iteration.
    ///
    /// With a hint, Newton starts from the hint first and the closed form
    /// is used only if that fails.
    pub fn invert(&self, w: Complex64, hint: Option<Complex64>) -> Result<Complex64> {
        let tol = 1e-13 * w.norm().max(1.0);
        if let Some(h0) = hint {
            if let Ok(z) = self.newton(w, h0) {
                if (self.eval(z)? - w).norm() < tol && self.locate(w).map(|p| p.level == 0).unwrap_or(false) {
                    let closed = self.locate(w)?;
                    if (closed.point.to_complex() - z).norm() < 1e-8 {
                        return Ok(z);
                    }
                }
            }
        }
        let pre = self.locate(w)?;
        if pre.level != 0 {
            return Err(Error::NotOnBaseSheet {
                value: w,
                level: pre.level as f64,
            });
        }
        let z0 = match pre.point.offset {
            Offset::Linear(_) => pre.point.to_complex(),
            Offset::Log(_) => return Err(Error::Underflow(w)),
        };
        if (self.eval(z0)? - w).norm() < tol {
            return Ok(z0);
        }
        self.newton(w, z0)
    }

    fn newton(&self, w: Complex64, start: Complex64) -> Result<Complex64> {
        let tol = 1e-14 * w.norm().max(1.0);
        let mut z = start;
        let mut r = self.eval(z).map_err(|_| Error::NewtonDivergence(w))? - w;
        for _ in 0..50 {
            if r.norm() < tol {
                return Ok(z);
            }
            let d = self.derivative(z)?.to_complex();
            if !d.norm().is_finite() || d.norm() == 0.0 {
                break;
            }
            let mut step = -r / d;
            let mut accepted = false;
            for _ in 0..30 {
                let cand = z + step;
                if let Ok(val) = self.eval(cand) {
                    let rc = val - w;
                    if rc.norm() < r.norm() {
                        z = cand;
                        r = rc;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if r.norm() < 1e-12 * w.norm().max(1.0) {
            Ok(z)
        } else {
            Err(Error::NewtonDivergence(w))
        }
    }

    /// Inner value `u = -log(1 - e^{2 pi i (z + i delta)})` on the base
    /// sheet; `e^{2 pi i K} = u` up to the normalization.
    pub fn inner(&self, z: Complex64) -> Result<Complex64> {
        let (_, d) = split(z);
        inner_value(two_pi_i(d) + self.ln_q(), z)
    }

    /// Derivative of `norm_K` on the base sheet: `(e^u - 1) / (a u)`.
    pub fn derivative(&self, z: Complex64) -> Result<ScaledDerivative> {
        let (_, d) = split(z);
        if d.re == 0.0 && d.im <= 0.0 {
            return Err(if d.im == 0.0 {
                Error::AtRamification(z)
            } else {
                Error::OnSlit(z)
            });
        }
        let u = inner_value(two_pi_i(d) + self.ln_q(), z)?;
        Ok(self.derivative_from_inner(u))
    }

    /// First three derivatives of `norm_K` on the base sheet as plain
    /// complex numbers (infinite where they overflow).
    pub fn derivatives3(&self, z: Complex64) -> Result<[Complex64; 3]> {
        self.derivative(z)?;
        let u = self.inner(z)?;
        let eu = u.exp();
        let e = expm1(u);
        let p = e / u;
        let q = eu - p;
        let c = Complex64::new(0.0, TAU);
        let af = self.divisor_f64();
        Ok([
            p / af,
            c * p * q / af,
            c * c * p * (q * q + eu * e - p * q) / af,
        ])
    }

    /// `(e^u - 1) / (a u)` in log-magnitude form.
    pub fn derivative_from_inner(&self, u: Complex64) -> ScaledDerivative {
        let ln_a = self.divisor_f64().ln();
        if u.re > 700.0 {
            let tail = ln_1p(-(-u).exp());
            let log_num = Complex64::new(u.re, u.im) + tail;
            let l = log_num - u.ln();
            return ScaledDerivative {
                modulus: LogMagnitude::from_log(l.re - ln_a),
                phase: Complex64::from_polar(1.0, l.im),
            };
        }
        let g = if u.norm() < 1e-8 {
            Complex64::new(1.0, 0.0) + u * 0.5
        } else {
            expm1(u) / u
        };
        ScaledDerivative {
            modulus: LogMagnitude::from_log(g.norm().ln() - ln_a),
            phase: g / g.norm(),
        }
    }

    /// `log|a norm_K'|` from `log(u)` for real positive `u`, i.e. on the
    /// vertical line above a trough.
    pub fn log_abs_scaled_derivative_on_axis(log_u: f64) -> f64 {
        let u = log_u.exp();
        if u < 1e-8 {
            (0.5 * u).ln_1p()
        } else if u > 40.0 {
            u + (-(-u).exp()).ln_1p() - log_u
        } else {
            u.exp_m1().ln() - log_u
        }
    }

    /// `log(u)` on the vertical line above a trough where `Im norm_K = v`.
    pub fn log_inner_at_height(&self, v: f64) -> f64 {
        self.log_lambda - TAU * self.divisor_f64() * v
    }

    /// `Im norm_K` on the vertical line above a trough from `log(u)`.
    pub fn height_from_log_inner(&self, log_u: f64) -> f64 {
        (self.log_lambda - log_u) / (TAU * self.divisor_f64())
    }

    /// Point `i y` on the vertical line over a trough with
    /// `Im norm_K(i y) = v`, given `log v`. Stays accurate when `v` and `y`
    /// are far below `f64` range.
    pub fn axis_preimage(&self, log_v: f64) -> AxisPreimage {
        let af = self.divisor_f64();
        let x = TAU * af * log_v.exp();
        // u = lambda e^{-x}; m = lambda - u = lambda (1 - e^{-x})
        let log_u = self.log_lambda - x;
        let log_s = if x < 1e-8 {
            log_v + (TAU * af).ln() + (-0.5 * x).ln_1p()
        } else {
            (-(-x).exp_m1()).ln()
        };
        let log_m = self.log_lambda + log_s;
        let u = log_u.exp();
        let log_y = if u <= 30.0 {
            let y = (-(-(-u).exp_m1()).ln() + self.ln_q()) / TAU;
            y.ln()
        } else {
            // 2 pi y = e^{-u} - e^{-lambda} up to a relative e^{-u}
            let m = log_m.exp();
            let log_d = if log_m < -20.0 {
                -self.lambda() + log_m + 0.5 * m
            } else if m > 30.0 {
                -u + (-(-m).exp()).ln_1p()
            } else {
                -self.lambda() + m.exp_m1().ln()
            };
            log_d - LN_TAU
        };
        AxisPreimage {
            log_u,
            log_y,
            log_derivative: Self::log_abs_scaled_derivative_on_axis(log_u) - af.ln(),
        }
    }

    /// Segment `[x_0, x_0 + i y_0]` over a trough on which
    /// `Im norm_K <= v`, with the derivative lower bound on it.
    pub fn threshold_segment(&self, v: f64) -> Result<ThresholdSegment> {
        if !(v > 0.0 && v < self.h) {
            return Err(Error::BracketFailure(format!("threshold height {v} outside (0, {})", self.h)));
        }
        let log_w0 = self.log_inner_at_height(v);
        let w0 = log_w0.exp();
        let (y0, log_y0) = if w0 > 30.0 {
            let x = (-w0).exp();
            let log_y0 = -w0 + (0.5 * x).ln_1p() - LN_TAU;
            (log_y0.exp(), log_y0)
        } else {
            let y0 = -(-(-w0).exp()).ln_1p() / TAU;
            (y0, y0.ln())
        };
        let logbound = LogMagnitude::from_log(Self::log_abs_scaled_derivative_on_axis(log_w0));
        Ok(ThresholdSegment {
            v,
            y0,
            log_y0,
            log_w0,
            logbound,
            slack: (log_w0 - TAU * self.divisor_f64() * (self.h - v)) / TAU,
        })
    }

    /// Limit of `norm_K` through the upper end of the level-`m` cylinder
    /// over slit 0.
    pub fn cylinder_end(&self, m: i64) -> Complex64 {
        assert!(m != 0, "cylinder level must be non-zero");
        self.cylinder_end_on(0, m)
    }

    pub fn cylinder_end_on(&self, slit: i64, m: i64) -> Complex64 {
        let u = Complex64::new(0.0, TAU * m as f64);
        self.normalize(over_two_pi_i(u.ln()) + slit as f64)
    }

    /// `a |norm_K(z) - (z / a + i h)|`.
    pub fn gap_at(&self, z: Complex64) -> Result<f64> {
        let k = self.eval(z)?;
        Ok((k - (z / self.divisor_f64() + Complex64::new(0.0, self.h))).norm() * self.divisor_f64())
    }

    /// Empirical supremum of the gap over one period.
    pub fn asymptotic_gap(&self, grid: GapGrid) -> Result<GapEstimate> {
        let mut sup = 0.0;
        let mut argmax = Complex64::new(0.0, grid.im_min);
        let mut rows = Vec::with_capacity(grid.rows);
        for r in 0..grid.rows {
            let y = if grid.rows == 1 {
                grid.im_min
            } else {
                grid.im_min + (grid.im_max - grid.im_min) * r as f64 / (grid.rows - 1) as f64
            };
            let mut row_sup: f64 = 0.0;
            for c in 0..grid.columns {
                let z = Complex64::new(c as f64 / grid.columns as f64, y);
                let g = self.gap_at(z)?;
                row_sup = row_sup.max(g);
                if g > sup {
                    sup = g;
                    argmax = z;
                }
            }
            rows.push((y, row_sup));
        }
        Ok(GapEstimate { sup, argmax, rows })
    }
}

/// `(log(2 pi) - log(log 2)) / (2 pi)`: depth of level-1 cylinder ends
/// below `h`, in units of `1/a`.
pub fn cylinder_end_depth_constant() -> f64 {
    (LN_TAU - LN_2.ln()) / TAU
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lambda_for_unit_frequency() {
        let u = solve_lambda(1, 2.5).unwrap();
        let oracle = 5.0 * PI + LN_2.ln();
        assert!((u.log_lambda() - oracle).abs() < 1e-13);
        assert!(u.residual().abs() < 1e-12);
    }

    #[test]
    fn tail_matches_series() {
        let z = c(0.5, 4.0);
        let k = base_k(z, BranchState::BASE).unwrap();
        let w = two_pi_i(z).exp();
        let series = over_two_pi_i(w * 0.5);
        assert!((k - z).norm() <= 2e-12);
        assert!((k - z - series).norm() < 2e-15);
    }

    #[test]
    fn imaginary_axis_stays_imaginary() {
        for y in [0.01, 0.3, 1.0, 3.0] {
            let k = base_k(c(0.0, y), BranchState::BASE).unwrap();
            assert_eq!(k.re, 0.0);
        }
    }

    #[test]
    fn troughs_and_peaks() {
        let u = solve_lambda(3, 2.5).unwrap();
        for n in -3..=3 {
            let k = u.eval(c(n as f64, 0.0)).unwrap();
            assert_eq!(k.im, 0.0);
            assert!((k.re - n as f64 / 3.0).abs() < 1e-12);
            let p = u.eval(c(n as f64 + 0.5, 0.0)).unwrap();
            assert!((p.im - 2.5).abs() < 1e-10);
            assert!((p.re - (n as f64 + 0.5) / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_inverse_round_trips() {
        let u = solve_lambda(2, 3.0).unwrap();
        for z in [c(1.3, 2.0), c(-0.2, 0.05), c(0.49, -0.3), c(3.0, 1e-9), c(0.001, 0.0)] {
            let w = u.eval(z).unwrap();
            let p = u.locate(w).unwrap();
            assert_eq!(p.level, 0);
            assert!((p.point.to_complex() - z).norm() < 1e-10, "{z} -> {:?}", p);
        }
    }

    #[test]
    fn needle_values_continue_the_linear_chart() {
        let u = solve_lambda(5, 10.0).unwrap();
        let d = c(0.0, 1e-250);
        let lin = u.eval_anchored(Anchored { anchor: 2, offset: Offset::Linear(d) }).unwrap();
        let log = u.eval_anchored(Anchored { anchor: 2, offset: Offset::Log(d.ln()) }).unwrap();
        assert!((lin - log).norm() < 1e-13);
    }

    #[test]
    fn axis_preimage_matches_evaluation() {
        for (a, h) in [(1, 2.5), (5, 10.0), (3, 3.0)] {
            let u = solve_lambda(a, h).unwrap();
            for v in [0.5, 1.7, h - 0.5, h + 2.0] {
                let p = u.axis_preimage(f64::ln(v));
                let Some(y) = p.y() else { continue };
                if y < 1e-300 {
                    continue;
                }
                let k = u.eval(c(0.0, y)).unwrap();
                assert!((k.im - v).abs() < 1e-9 * v.max(1.0), "a = {a}, v = {v}: {}", k.im);
                let d = u.derivative(c(0.0, y)).unwrap();
                assert!((d.modulus.log_abs - p.log_derivative).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn axis_preimage_below_range() {
        let u = solve_lambda(5, 10.0).unwrap();
        let p = u.axis_preimage(f64::ln(1.0));
        assert!(p.y().is_none());
        // log(-log y) = log(u + log 2 pi) up to e^{-u}
        let oracle = (p.log_u.exp() + LN_TAU).ln();
        assert!(((-p.log_y).ln() - oracle).abs() < 1e-14);
        // a value far below range still maps to a finite log height
        let deep = u.axis_preimage(-1e100);
        assert!(deep.log_y.is_finite() && deep.log_y < -1e100);
    }

    #[test]
    fn cylinder_end_constant() {
        let u = solve_lambda(1, 2.5).unwrap();
        let e = u.cylinder_end(1);
        assert!((e.re - 0.25).abs() < 1e-14);
        assert!((e.im - (u.log_lambda() - LN_TAU) / TAU).abs() < 1e-14);
        assert!((2.5 - e.im - cylinder_end_depth_constant()).abs() < 1e-13);
    }
}
