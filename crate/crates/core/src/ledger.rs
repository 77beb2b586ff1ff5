//! Parameters of the inductive construction, stage by stage.

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logmag::{LogMagnitude, TinyScale};
use crate::uniformizer::NormalizedUniformizer;

/// Whether the stages were produced by the certified search or typed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Certified,
    /// Hand-picked parameters for exercising the maps; no predicate was
    /// checked.
    Exploratory,
}

/// Open rectangle `|Re w - center| < half_width`, `im_lo < Im w < im_hi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub prefix: Vec<i8>,
    #[serde(with = "crate::hexfloat")]
    pub center: f64,
    pub half_width: LogMagnitude,
    #[serde(with = "crate::hexfloat")]
    pub im_lo: f64,
    #[serde(with = "crate::hexfloat")]
    pub im_hi: f64,
}

impl Rectangle {
    pub fn contains(&self, w: num_complex::Complex64) -> bool {
        w.im > self.im_lo
            && w.im < self.im_hi
            && LogMagnitude::from_f64((w.re - self.center).abs()) < self.half_width
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    /// `a_n`, once chosen; a decimal string in JSON.
    #[serde(with = "decimal")]
    pub a: Option<u64>,
    #[serde(with = "crate::hexfloat")]
    pub h: f64,
    #[serde(with = "crate::hexfloat")]
    pub alpha: f64,
    /// `A_n = log(lambda)` for the chosen `a_n`.
    #[serde(with = "crate::hexfloat::option")]
    pub log_lambda: Option<f64>,
    /// `h'_n`: the segments `[x, x + i h'_n]` reach above `Im = 2`.
    pub h_prime: Option<TinyScale>,
    /// `tau_n`: half-width of the strips around the parent abscissas.
    pub tau: Option<TinyScale>,
    /// `Y_n`: `Im K_{n-1}(i Y_n) = h_{n-1} - 1/2`.
    pub y_cap: Option<TinyScale>,
    /// `R(prefix)` for prefixes of length `n - 1`.
    pub rectangles: Vec<Rectangle>,
}

impl Stage {
    pub fn open(h: f64, alpha: f64) -> Self {
        Stage {
            a: None,
            h,
            alpha,
            log_lambda: None,
            h_prime: None,
            tau: None,
            y_cap: None,
            rectangles: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterLedger {
    #[serde(with = "crate::hexfloat")]
    pub h0: f64,
    /// Half-plane margin `M`.
    #[serde(with = "crate::hexfloat")]
    pub margin: f64,
    pub provenance: Provenance,
    pub stages: Vec<Stage>,
}

/// `alpha_n = 1 - 1/(n + 2)`.
pub fn default_alpha(n: usize) -> f64 {
    1.0 - 1.0 / (n as f64 + 2.0)
}

impl ParameterLedger {
    /// Empty certified ledger: only `h_0` is fixed.
    pub fn start(h0: f64, margin: f64, alpha0: f64) -> Self {
        ParameterLedger {
            h0,
            margin,
            provenance: Provenance::Certified,
            stages: vec![Stage::open(h0, alpha0)],
        }
    }

    /// Ledger with the given `(a_n, h_n)` and nothing certified.
    pub fn exploratory(stages: &[(u64, f64)]) -> Result<Self> {
        assert!(!stages.is_empty(), "need at least one stage");
        let mut out = Vec::with_capacity(stages.len());
        for (n, &(a, h)) in stages.iter().enumerate() {
            let u = NormalizedUniformizer::new(a, h)?;
            let mut s = Stage::open(h, default_alpha(n));
            s.a = Some(a);
            s.log_lambda = Some(u.log_lambda());
            out.push(s);
        }
        Ok(ParameterLedger {
            h0: stages[0].1,
            margin: 1.0,
            provenance: Provenance::Exploratory,
            stages: out,
        })
    }

    /// Number of leading stages whose `a_n` is chosen.
    pub fn depth(&self) -> usize {
        self.stages.iter().take_while(|s| s.a.is_some()).count()
    }

    pub fn a_values(&self) -> Vec<u64> {
        self.stages.iter().map_while(|s| s.a).collect()
    }

    pub fn divisor(&self, n: usize) -> Result<u64> {
        self.stages.get(n).and_then(|s| s.a).ok_or(Error::DepthUnavailable {
            needed: n + 1,
            available: self.depth(),
        })
    }

    pub fn uniformizer(&self, n: usize) -> Result<NormalizedUniformizer> {
        let a = self.divisor(n)?;
        NormalizedUniformizer::new(a, self.stages[n].h)
    }

    /// `K_0, ..., K_{count-1}`.
    pub fn uniformizers(&self, count: usize) -> Result<Vec<NormalizedUniformizer>> {
        (0..count).map(|n| self.uniformizer(n)).collect()
    }

    /// `a_0 a_1 ... a_{count-1}`.
    pub fn product(&self, count: usize) -> Result<BigInt> {
        let mut p = BigInt::one();
        for n in 0..count {
            p *= BigInt::from(self.divisor(n)?);
        }
        Ok(p)
    }

    /// Copy with `a_n` replaced, for negative controls.
    pub fn with_a(&self, n: usize, a: u64) -> Self {
        let mut out = self.clone();
        out.stages[n].a = Some(a);
        out.stages[n].log_lambda = NormalizedUniformizer::new(a, out.stages[n].h)
            .ok()
            .map(|u| u.log_lambda());
        out
    }
}

mod decimal {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<u64>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| s.parse().map_err(D::Error::custom))
            .transpose()
    }
}
