//! Small complex helpers that keep precision near the places where the
//! uniformizer is delicate (|w| tiny, w close to 1).

use num_complex::Complex64;

pub const TAU: f64 = std::f64::consts::TAU;
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// `e^z - 1` without cancellation for small `z`.
pub fn expm1(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    Complex64::new(z.re.exp_m1() * c - 2.0 * half * half, z.re.exp() * s)
}

/// Principal `log(1 + z)` without cancellation for small `z`.
pub fn ln_1p(z: Complex64) -> Complex64 {
    let x = z.re;
    let y = z.im;
    let re = if x.abs() < 0.5 && y.abs() < 0.5 {
        0.5 * (x * (2.0 + x) + y * y).ln_1p()
    } else {
        Complex64::new(1.0 + x, y).norm().ln()
    };
    Complex64::new(re, y.atan2(1.0 + x))
}

/// `z / (2 pi i)`.
pub fn over_two_pi_i(z: Complex64) -> Complex64 {
    Complex64::new(z.im / TAU, -z.re / TAU)
}

/// `2 pi i z`.
pub fn two_pi_i(z: Complex64) -> Complex64 {
    Complex64::new(-TAU * z.im, TAU * z.re)
}

/// Nearest integer with ties going up, as an `i64`.
pub fn nearest(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm1_small_argument_keeps_relative_precision() {
        let z = Complex64::new(1e-20, -3e-21);
        let e = expm1(z);
        assert!((e - z).norm() <= 1e-36);
    }

    #[test]
    fn expm1_matches_exp_for_large_arguments() {
        let z = Complex64::new(1.3, -2.2);
        assert!((expm1(z) - (z.exp() - 1.0)).norm() < 1e-15);
    }

    #[test]
    fn ln_1p_small_and_large() {
        let z = Complex64::new(-2e-18, 5e-19);
        assert!((ln_1p(z) - z).norm() < 1e-33);
        let z = Complex64::new(3.0, -4.0);
        assert!((ln_1p(z) - (z + 1.0).ln()).norm() < 1e-15);
    }

    #[test]
    fn two_pi_i_round_trip() {
        let z = Complex64::new(0.25, -1.5);
        assert!((over_two_pi_i(two_pi_i(z)) - z).norm() < 1e-15);
        assert!((two_pi_i(z) - Complex64::new(0.0, TAU) * z).norm() < 1e-14);
    }
}
