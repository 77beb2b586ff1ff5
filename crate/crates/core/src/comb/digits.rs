//! Digit sequences over `{-1, 0, 1}` and their two exact encodings: the
//! abscissa `x(prefix)` of the half-line carrying a tooth, and the
//! transversal coordinate `theta(prefix)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::folding::time::nearest_integer;

pub type Prefix = Vec<i8>;

fn check_digits(prefix: &[i8]) {
    assert!(
        prefix.iter().all(|d| (-1..=1).contains(d)),
        "digits must be in {{-1, 0, 1}}"
    );
}

fn need(a: &[u64], count: usize) -> Result<()> {
    if a.len() < count {
        return Err(Error::DepthUnavailable {
            needed: count,
            available: a.len(),
        });
    }
    Ok(())
}

fn int(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `x(e_0, ..., e_{n-1}) = e_0 a_2...a_{n-1} + ... + e_{n-2} + e_{n-1}/a_n`,
/// built as `x(p, e) = a_{n-1} x(p) + e/a_n`. Needs `a_0, ..., a_n`.
pub fn x_of(prefix: &[i8], a: &[u64]) -> Result<BigRational> {
    check_digits(prefix);
    need(a, prefix.len() + 1)?;
    let mut x = BigRational::zero();
    for (k, &e) in prefix.iter().enumerate() {
        x = x * int(a[k]) + BigRational::new(BigInt::from(e), BigInt::from(a[k + 1]));
    }
    Ok(x)
}

/// `theta(e_0, ..., e_{n-1}) = sum_i e_i / (a_0 ... a_{i+1})`. Needs
/// `a_0, ..., a_n`.
pub fn theta_of(prefix: &[i8], a: &[u64]) -> Result<BigRational> {
    check_digits(prefix);
    need(a, prefix.len() + 1)?;
    let mut den = BigInt::from(a[0]);
    let mut theta = BigRational::zero();
    for (i, &e) in prefix.iter().enumerate() {
        den *= BigInt::from(a[i + 1]);
        theta += BigRational::new(BigInt::from(e), den.clone());
    }
    Ok(theta)
}

/// `1 / (a_0 ... a_{i+1})`: the weight of digit `i` in `theta`.
pub fn digit_weight(i: usize, a: &[u64]) -> Result<BigRational> {
    need(a, i + 2)?;
    let den: BigInt = a[..i + 2].iter().map(|&x| BigInt::from(x)).product();
    Ok(BigRational::new(BigInt::one(), den))
}

/// All `3^n` prefixes of length `n`, lexicographic with `-1 < 0 < 1`.
pub fn all_prefixes(n: usize) -> Vec<Prefix> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (-1..=1).map(move |e| {
                    let mut q = p.clone();
                    q.push(e);
                    q
                })
            })
            .collect();
    }
    out
}

/// Index of the first differing digit, if any.
pub fn first_difference(p: &[i8], q: &[i8]) -> Option<usize> {
    p.iter().zip(q).position(|(a, b)| a != b)
}

/// Recover the digits of a finite `theta` with at most `max_len` digits.
pub fn digits_of_theta(theta: &BigRational, a: &[u64], max_len: usize) -> Result<Prefix> {
    need(a, max_len + 1)?;
    let mut rest = theta.clone();
    let mut digits = Vec::new();
    let mut scale = int(a[0]);
    for i in 0..max_len {
        if rest.is_zero() {
            break;
        }
        scale *= int(a[i + 1]);
        // the tail after digit i is at most a third of its weight
        let d = nearest_integer(&(&rest * &scale));
        let d = d.to_i8().filter(|d| d.abs() <= 1).ok_or_else(|| Error::UnrealizableTheta(theta.to_string()))?;
        rest -= BigRational::new(BigInt::from(d), BigInt::one()) / &scale;
        digits.push(d);
    }
    if !rest.is_zero() {
        return Err(Error::UnrealizableTheta(theta.to_string()));
    }
    Ok(digits)
}

/// `|theta - theta'|` as `f64`.
pub fn theta_distance(p: &BigRational, q: &BigRational) -> f64 {
    crate::folding::time::ratio_to_f64(&(p - q).abs())
}
