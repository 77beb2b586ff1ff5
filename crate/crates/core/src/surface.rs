//! The tube-log surface: a slit plane with a stack of slit cylinders
//! glued along every slit `{n} x (-i inf, 0)`.
//!
//! Cylinder charts use real part in `[0, 1)`, with the cylinder's own slit
//! at real part `0`. Moving leftwards across a slit below its tip raises the
//! level by one, moving rightwards lowers it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{nearest, over_two_pi_i, two_pi_i, TAU};
use crate::uniformizer::{BranchState, NormalizedUniformizer, Preimage};

pub const DEFAULT_CROSSING_BUDGET: u32 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SheetAddress {
    /// Slit whose stack holds the sheet; `None` for the base plane.
    pub slit: Option<i64>,
    pub level: i64,
}

impl SheetAddress {
    pub const BASE: SheetAddress = SheetAddress { slit: None, level: 0 };

    pub fn cylinder(slit: i64, level: i64) -> Self {
        if level == 0 {
            Self::BASE
        } else {
            SheetAddress { slit: Some(slit), level }
        }
    }

    pub fn is_base(&self) -> bool {
        self.slit.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub address: SheetAddress,
    pub coord: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemovedRegions {
    /// Radius of the removed disks around ramification points.
    pub epsilon: f64,
    /// Lower cut: points with `Im < y_cut` are outside the domain.
    pub y_cut: Option<f64>,
    pub budget: u32,
}

impl RemovedRegions {
    pub fn new(epsilon: f64) -> Self {
        assert!(epsilon > 0.0, "removed radius must be positive");
        RemovedRegions {
            epsilon,
            y_cut: None,
            budget: DEFAULT_CROSSING_BUDGET,
        }
    }

    pub fn with_cut(mut self, y_cut: f64) -> Self {
        assert!(y_cut.is_finite(), "lower cut must be finite");
        self.y_cut = Some(y_cut);
        self
    }
}

/// Embed a point of the base plane.
pub fn lift_base(z: Complex64) -> Result<SurfacePoint> {
    if z.im < 0.0 && z.re == z.re.round() {
        return Err(Error::OnSlit(z));
    }
    Ok(SurfacePoint {
        address: SheetAddress::BASE,
        coord: z,
    })
}

/// Deck transformation `T^k`.
pub fn deck(p: SurfacePoint, k: i64) -> SurfacePoint {
    match p.address.slit {
        None => SurfacePoint {
            coord: p.coord + k as f64,
            ..p
        },
        Some(s) => SurfacePoint {
            address: SheetAddress::cylinder(s + k, p.address.level),
            ..p
        },
    }
}

impl SurfacePoint {
    pub fn from_preimage(pre: Preimage) -> Self {
        SurfacePoint {
            address: SheetAddress::cylinder(pre.slit, pre.level),
            coord: pre.point.to_complex(),
        }
    }

    /// Distance to the nearest ramification point in the flat metric.
    pub fn distance_to_tip(&self) -> f64 {
        let c = self.coord;
        (c - nearest(c.re) as f64).norm()
    }

    pub fn in_removed(&self, r: &RemovedRegions) -> bool {
        self.distance_to_tip() < r.epsilon
    }

    /// `norm_K` on the sheet of this point.
    pub fn eval(&self, u: &NormalizedUniformizer) -> Result<Complex64> {
        match self.address.slit {
            None => u.eval(self.coord),
            Some(s) => u.eval_on_cylinder(s, self.address.level, self.coord),
        }
    }
}

fn check_point(coord: Complex64, r: &RemovedRegions) -> Result<()> {
    if (coord - nearest(coord.re) as f64).norm() < r.epsilon {
        return Err(Error::PathHitsRamification { epsilon: r.epsilon });
    }
    if let Some(cut) = r.y_cut {
        if coord.im < cut {
            return Err(Error::LeftDomain { y_cut: cut });
        }
    }
    Ok(())
}

/// Follow the straight chart segment from `p.coord` to `target`, switching
/// sheets at every slit crossed below its tip.
pub fn follow(p: SurfacePoint, target: Complex64, r: &RemovedRegions) -> Result<SurfacePoint> {
    check_point(p.coord, r)?;
    let start = p.coord;
    let delta = target - start;
    if !delta.re.is_finite() || !delta.im.is_finite() {
        return Err(Error::OutsideDomain(target));
    }
    let steps = ((delta.norm() / (0.25 * r.epsilon)).ceil() as usize).max(1);
    let mut address = p.address;
    // chart coordinate = unwrapped path position + shift
    let mut shift = 0.0;
    let mut prev = start;
    for k in 1..=steps {
        let next = if k == steps {
            target
        } else {
            start + delta * (k as f64 / steps as f64)
        };
        let (a, b) = (prev + shift, next + shift);
        let leftwards = b.re < a.re;
        let slit_re = if leftwards { a.re.floor() } else { b.re.floor() };
        let crosses = if leftwards {
            b.re < slit_re && slit_re <= a.re
        } else {
            a.re < slit_re && slit_re <= b.re
        };
        if crosses {
            let y = a.im + (b.im - a.im) * (slit_re - a.re) / (b.re - a.re);
            // representative shift that keeps cylinder charts near [0, 1)
            let wrap = if leftwards { 1.0 - slit_re } else { -slit_re };
            if y < 0.0 {
                let change = if leftwards { 1 } else { -1 };
                match address.slit {
                    None => {
                        address = SheetAddress::cylinder(slit_re as i64, change);
                        shift += wrap;
                    }
                    Some(s) => {
                        let level = address.level + change;
                        address = SheetAddress::cylinder(s, level);
                        shift += if level == 0 { s as f64 - slit_re } else { wrap };
                    }
                }
                if address.level.unsigned_abs() > r.budget as u64 {
                    return Err(Error::SheetBudgetExceeded {
                        level: address.level,
                        budget: r.budget,
                    });
                }
            } else if address.slit.is_some() {
                shift += wrap;
            }
        }
        check_point(next + shift, r)?;
        prev = next;
    }
    let mut coord = target + shift;
    if address.slit.is_some() {
        coord.re -= coord.re.floor();
    }
    Ok(SurfacePoint { address, coord })
}

/// Lifted translation `z -> z + t` on the surface.
pub fn translate(p: SurfacePoint, t: f64, r: &RemovedRegions) -> Result<SurfacePoint> {
    follow(p, p.coord + t, r)
}

/// Result of analytic continuation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Continued {
    pub value: Complex64,
    pub branch: BranchState,
    pub address: SheetAddress,
    /// Chart coordinate on `address` (cylinder charts reduced mod 1).
    pub coord: Complex64,
}

struct Tracker {
    inner: Complex64,
    outer: Complex64,
    one_minus_w: Complex64,
    ratio: Complex64,
    branch: BranchState,
}

fn principal_pieces(z: Complex64) -> (Complex64, Complex64, Complex64) {
    let arg = two_pi_i(z);
    let one_minus_w = -crate::numeric::expm1(arg);
    let inner = -one_minus_w.ln();
    (one_minus_w, inner, arg)
}

fn quarter_turn_ok(old: Complex64, new: Complex64) -> bool {
    (new / old).arg().abs() < std::f64::consts::FRAC_PI_2
}

/// Continue `norm_K` along the polyline `path`, which starts on the base
/// sheet, with every vertex given in the unwrapped base-plane projection.
pub fn continue_norm_k(path: &[Complex64], u: &NormalizedUniformizer) -> Result<Continued> {
    let start = *path.first().expect("path needs a starting vertex");
    lift_base(start)?;
    let (omw, inner, arg) = principal_pieces(start);
    if omw == Complex64::new(0.0, 0.0) {
        return Err(Error::AtRamification(start));
    }
    let ratio = inner * (-arg).exp();
    let mut tr = Tracker {
        inner,
        outer: ratio.ln(),
        one_minus_w: omw,
        ratio,
        branch: BranchState::BASE,
    };
    let mut here = start;
    for &vertex in &path[1..] {
        let from = here;
        // arg w turns by at most pi/8 per step
        let max_ds = 1.0 / (16.0 * (vertex - from).norm()).max(1.0);
        let mut s: f64 = 0.0;
        while 1.0 - s > 1e-14 {
            let mut ds = (1.0 - s).min(max_ds);
            loop {
                if ds < 1e-12 {
                    return Err(Error::StepUnderflow);
                }
                let z = from + (vertex - from) * (s + ds).min(1.0);
                let (omw, inner_p, arg) = principal_pieces(z);
                if omw == Complex64::new(0.0, 0.0) || !quarter_turn_ok(tr.one_minus_w, omw) {
                    ds *= 0.5;
                    continue;
                }
                let k = nearest((tr.inner - inner_p).im / TAU);
                let inner = inner_p + Complex64::new(0.0, TAU * k as f64);
                let ratio = inner * (-arg).exp();
                if inner == Complex64::new(0.0, 0.0) || !quarter_turn_ok(tr.ratio, ratio) {
                    ds *= 0.5;
                    continue;
                }
                let lp = ratio.ln();
                let k2 = nearest((tr.outer - lp).im / TAU);
                tr = Tracker {
                    inner,
                    outer: lp + Complex64::new(0.0, TAU * k2 as f64),
                    one_minus_w: omw,
                    ratio,
                    branch: BranchState { inner: k, outer: k2 },
                };
                s += ds;
                break;
            }
        }
        here = vertex;
    }
    let omega = here + over_two_pi_i(tr.outer);
    let value = Complex64::new(omega.re, omega.im + u.log_lambda() / TAU) / u.divisor_f64();
    let level = tr.branch.inner;
    let (address, coord) = if level == 0 {
        (SheetAddress::BASE, here)
    } else {
        let slit = nearest(omega.re - tr.inner.arg() / TAU);
        (
            SheetAddress::cylinder(slit, level),
            Complex64::new(here.re - here.re.floor(), here.im),
        )
    };
    Ok(Continued {
        value,
        branch: tr.branch,
        address,
        coord,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn crossing_and_return() {
        let r = RemovedRegions::new(0.1);
        let p = lift_base(c(0.9, -1.0)).unwrap();
        let q = translate(p, 0.2, &r).unwrap();
        assert_eq!(q.address, SheetAddress::cylinder(1, -1));
        assert!((q.coord - c(0.1, -1.0)).norm() < 1e-12);
        let back = translate(q, -0.2, &r).unwrap();
        assert_eq!(back.address, SheetAddress::BASE);
        assert!((back.coord - p.coord).norm() < 1e-12);
    }

    #[test]
    fn passing_above_the_tip_stays_on_the_base() {
        let r = RemovedRegions::new(0.1);
        let p = lift_base(c(0.4, 2.0)).unwrap();
        let q = translate(p, 0.2, &r).unwrap();
        assert_eq!(q.address, SheetAddress::BASE);
        assert!((q.coord - c(0.6, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn removed_disk_stops_the_path() {
        let r = RemovedRegions::new(0.1);
        let p = lift_base(c(0.85, 0.01)).unwrap();
        assert!(matches!(translate(p, 0.1, &r), Err(Error::PathHitsRamification { .. })));
    }
}
