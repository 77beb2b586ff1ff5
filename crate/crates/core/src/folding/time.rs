//! Exact times for the folded flows and the nested time sets
//! `A_{j,n} = a_j^{-1} (Z + A_{j+1,n} ∩ [-2/a_{j+1}, 2/a_{j+1}])`, `A_{n,n} = R`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A rational time, kept exact.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalTime(pub BigRational);

impl RationalTime {
    pub fn zero() -> Self {
        RationalTime(BigRational::zero())
    }

    pub fn integer(n: i64) -> Self {
        RationalTime(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        RationalTime(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// `integer + sum_i digits[i] / (a_0 ... a_i)`.
    pub fn from_digits(integer: i64, digits: &[i8], a: &[u64]) -> Result<Self> {
        if digits.len() > a.len() {
            return Err(Error::DepthUnavailable {
                needed: digits.len(),
                available: a.len(),
            });
        }
        let mut value = BigRational::from_integer(BigInt::from(integer));
        let mut den = BigInt::one();
        for (d, &ai) in digits.iter().zip(a) {
            assert!((-1..=1).contains(d), "digits must be in {{-1, 0, 1}}");
            den *= BigInt::from(ai);
            value += BigRational::new(BigInt::from(*d), den.clone());
        }
        Ok(RationalTime(value))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl std::ops::Add for &RationalTime {
    type Output = RationalTime;
    fn add(self, rhs: Self) -> RationalTime {
        RationalTime(&self.0 + &rhs.0)
    }
}

impl std::ops::Neg for &RationalTime {
    type Output = RationalTime;
    fn neg(self) -> RationalTime {
        RationalTime(-&self.0)
    }
}

/// Exact rationals in JSON: `{"num": "-3", "den": "25"}`.
#[derive(Serialize, Deserialize)]
struct RationalText {
    num: String,
    den: String,
}

impl Serialize for RationalTime {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RationalText {
            num: self.0.numer().to_string(),
            den: self.0.denom().to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalTime {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let t = RationalText::deserialize(d)?;
        let num: BigInt = t.num.parse().map_err(D::Error::custom)?;
        let den: BigInt = t.den.parse().map_err(D::Error::custom)?;
        if den.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(RationalTime(BigRational::new(num, den)))
    }
}

impl fmt::Display for RationalTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Nearest `f64` to an exact rational, also for huge numerators and
/// denominators.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let shift = r.denom().bits() as i64 - r.numer().bits() as i64 + 60;
    let scaled = if shift >= 0 {
        (r.numer() << shift as usize).div_floor(r.denom())
    } else {
        r.numer().div_floor(&(r.denom() << (-shift) as usize))
    };
    scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-shift as i32)
}

/// One unfolding step: `a_j t = m + r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Unfolding {
    pub level: usize,
    pub integer: BigInt,
    pub remainder: BigRational,
}

/// The set `A_{j,n}`, carrying `a_j, ..., a_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeSetDescriptor {
    pub j: usize,
    pub n: usize,
    /// `a_j, ..., a_n`.
    pub a: Vec<u64>,
}

impl TimeSetDescriptor {
    /// `A_{j,n}` from the full sequence `a_0, a_1, ...`.
    pub fn new(j: usize, n: usize, all_a: &[u64]) -> Result<Self> {
        assert!(j <= n, "time set needs j <= n");
        if all_a.len() <= n && j < n {
            return Err(Error::DepthUnavailable {
                needed: n + 1,
                available: all_a.len(),
            });
        }
        let a = if j == n { Vec::new() } else { all_a[j..=n].to_vec() };
        Ok(TimeSetDescriptor { j, n, a })
    }

    fn a_at(&self, level: usize) -> BigInt {
        BigInt::from(self.a[level - self.j])
    }

    /// The chain of unfoldings `a_k r_{k-1} = m_k + r_k`, `k = j..n-1`, when
    /// `t` is a member.
    pub fn unfold(&self, t: &RationalTime) -> Option<Vec<Unfolding>> {
        let mut steps = Vec::with_capacity(self.n - self.j);
        let mut r = t.0.clone();
        for k in self.j..self.n {
            let scaled = &r * BigRational::from_integer(self.a_at(k));
            // the bound 2/a_{k+1} <= 2/5 < 1/2 leaves one candidate
            let m = nearest_integer(&scaled);
            let rest = &scaled - BigRational::from_integer(m.clone());
            let bound = BigRational::new(BigInt::from(2), self.a_at(k + 1));
            if rest.abs() > bound {
                return None;
            }
            steps.push(Unfolding {
                level: k,
                integer: m,
                remainder: rest.clone(),
            });
            r = rest;
        }
        Some(steps)
    }

    pub fn contains(&self, t: &RationalTime) -> bool {
        self.j == self.n || self.unfold(t).is_some()
    }
}

/// Nearest integer, ties away from zero.
pub fn nearest_integer(r: &BigRational) -> BigInt {
    let twice = r * BigRational::from_integer(BigInt::from(2));
    let floor = twice.floor().to_integer();
    // floor(2r) = 2m or 2m + 1
    let (q, rem) = floor.div_mod_floor(&BigInt::from(2));
    if rem.is_zero() {
        q
    } else if r.is_negative() && twice == BigRational::from_integer(floor.clone()) {
        q
    } else {
        q + 1
    }
}

/// Membership of `t mod 1` in the level-`n` approximation of the Cantor
/// time set `C = ∩ A_{0,n} / Z`.
pub fn cantor_approximant_contains(t: &RationalTime, n: usize, all_a: &[u64]) -> Result<bool> {
    let frac = RationalTime(&t.0 - t.0.floor());
    Ok(TimeSetDescriptor::new(0, n, all_a)?.contains(&frac))
}
