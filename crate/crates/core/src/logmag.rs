use std::cmp::Ordering;
use std::fmt;
use std::ops::{Div, Mul, Neg};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    fn times(self, other: Sign) -> Sign {
        match (self, other) {
            (Sign::Zero, _) | (_, Sign::Zero) => Sign::Zero,
            (a, b) if a == b => Sign::Positive,
            _ => Sign::Negative,
        }
    }

    fn as_f64(self) -> f64 {
        match self {
            Sign::Negative => -1.0,
            Sign::Zero => 0.0,
            Sign::Positive => 1.0,
        }
    }
}

/// A real number stored as sign and natural log of its modulus.
///
/// Used for quantities such as `e^{e^{300}}` or `exp(-e^{280})` that no
/// `f64` can hold, while still allowing exact comparisons whenever both
/// sides are representable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogMagnitude {
    pub sign: Sign,
    #[serde(with = "crate::hexfloat")]
    pub log_abs: f64,
}

impl LogMagnitude {
    pub const ZERO: LogMagnitude = LogMagnitude {
        sign: Sign::Zero,
        log_abs: f64::NEG_INFINITY,
    };
    pub const ONE: LogMagnitude = LogMagnitude {
        sign: Sign::Positive,
        log_abs: 0.0,
    };

    /// `e^{log_abs}`.
    pub fn from_log(log_abs: f64) -> Self {
        if log_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogMagnitude {
                sign: Sign::Positive,
                log_abs,
            }
        }
    }

    pub fn with_sign(sign: Sign, log_abs: f64) -> Self {
        if sign == Sign::Zero || log_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogMagnitude { sign, log_abs }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else if x > 0.0 {
            LogMagnitude {
                sign: Sign::Positive,
                log_abs: x.ln(),
            }
        } else {
            LogMagnitude {
                sign: Sign::Negative,
                log_abs: (-x).ln(),
            }
        }
    }

    /// Nearest `f64`; overflows to infinity and underflows to zero.
    pub fn to_f64(self) -> f64 {
        self.sign.as_f64() * self.log_abs.exp()
    }

    /// True when `to_f64` is finite and, if the value is non-zero, non-zero.
    pub fn is_representable(self) -> bool {
        self.sign == Sign::Zero || (self.log_abs < 709.0 && self.log_abs > -708.0)
    }

    pub fn abs(self) -> Self {
        if self.sign == Sign::Zero {
            self
        } else {
            Self::from_log(self.log_abs)
        }
    }

    pub fn recip(self) -> Self {
        assert!(self.sign != Sign::Zero, "reciprocal of zero");
        LogMagnitude {
            sign: self.sign,
            log_abs: -self.log_abs,
        }
    }

    pub fn powf(self, p: f64) -> Self {
        assert!(self.sign != Sign::Negative, "real power of a negative value");
        if self.sign == Sign::Zero {
            return if p > 0.0 { self } else { Self::ONE };
        }
        Self::from_log(self.log_abs * p)
    }

    /// Signed sum, carried out in log space.
    pub fn add(self, other: Self) -> Self {
        if self.sign == Sign::Zero {
            return other;
        }
        if other.sign == Sign::Zero {
            return self;
        }
        let (big, small) = if self.log_abs >= other.log_abs {
            (self, other)
        } else {
            (other, self)
        };
        let ratio = (small.log_abs - big.log_abs).exp();
        if big.sign == small.sign {
            Self::with_sign(big.sign, big.log_abs + ratio.ln_1p())
        } else if ratio == 1.0 {
            Self::ZERO
        } else {
            Self::with_sign(big.sign, big.log_abs + (-ratio).ln_1p())
        }
    }

    pub fn sub(self, other: Self) -> Self {
        self.add(-other)
    }
}

impl Mul for LogMagnitude {
    type Output = LogMagnitude;
    fn mul(self, rhs: Self) -> Self {
        Self::with_sign(self.sign.times(rhs.sign), self.log_abs + rhs.log_abs)
    }
}

impl Div for LogMagnitude {
    type Output = LogMagnitude;
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl Neg for LogMagnitude {
    type Output = LogMagnitude;
    fn neg(self) -> Self {
        let sign = match self.sign {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        };
        LogMagnitude { sign, ..self }
    }
}

impl PartialOrd for LogMagnitude {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let rank = |s: Sign| match s {
            Sign::Negative => 0,
            Sign::Zero => 1,
            Sign::Positive => 2,
        };
        match rank(self.sign).cmp(&rank(other.sign)) {
            Ordering::Equal => match self.sign {
                Sign::Zero => Some(Ordering::Equal),
                Sign::Positive => self.log_abs.partial_cmp(&other.log_abs),
                Sign::Negative => other.log_abs.partial_cmp(&self.log_abs),
            },
            o => Some(o),
        }
    }
}

impl fmt::Display for LogMagnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Sign::Zero => write!(f, "0"),
            Sign::Positive => write!(f, "exp({})", self.log_abs),
            Sign::Negative => write!(f, "-exp({})", self.log_abs),
        }
    }
}

/// A positive number `exp(-exp(log_neg_log))`, for scales such as
/// `exp(-e^{280})` whose logarithm is itself out of `f64` range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TinyScale {
    #[serde(with = "crate::hexfloat")]
    pub log_neg_log: f64,
}

impl TinyScale {
    pub fn from_log_neg_log(log_neg_log: f64) -> Self {
        TinyScale { log_neg_log }
    }

    /// From `log(x)`, which must be negative.
    pub fn from_log(log_x: f64) -> Self {
        assert!(log_x < 0.0, "tiny scales are below one");
        TinyScale {
            log_neg_log: (-log_x).ln(),
        }
    }

    pub fn from_value(x: f64) -> Self {
        assert!(x > 0.0 && x < 1.0, "tiny scales lie in (0, 1)");
        Self::from_log(x.ln())
    }

    /// `log(x)`; `-inf` once `exp(log_neg_log)` overflows.
    pub fn log(self) -> f64 {
        -self.log_neg_log.exp()
    }

    pub fn value(self) -> f64 {
        self.log().exp()
    }

    pub fn as_log_magnitude(self) -> LogMagnitude {
        LogMagnitude::from_log(self.log())
    }

    /// `x^p` for `p > 0`.
    pub fn powf(self, p: f64) -> Self {
        assert!(p > 0.0, "power must be positive");
        TinyScale {
            log_neg_log: self.log_neg_log + p.ln(),
        }
    }
}

impl PartialOrd for TinyScale {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        other.log_neg_log.partial_cmp(&self.log_neg_log)
    }
}

impl fmt::Display for TinyScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp(-exp({}))", self.log_neg_log)
    }
}
