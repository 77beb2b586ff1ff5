//! Compositions `G = K_0 ∘ K_1 ∘ ... ∘ K_n` and their inverse towers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::ParameterLedger;
use crate::logmag::LogMagnitude;
use crate::uniformizer::{Anchored, NormalizedUniformizer, Offset, ScaledDerivative};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComposedMap {
    levels: Vec<NormalizedUniformizer>,
}

/// A point of the composed domain, stored as its whole tower of per-level
/// coordinates so that no entry needs to leave `O(1)` scale.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderPoint {
    /// Value of the whole composition.
    pub value: Complex64,
    /// `coords[j]` lies in the domain of `K_j`.
    pub coords: Vec<Anchored>,
}

impl LadderPoint {
    /// Deepest coordinate, in the domain of the last map.
    pub fn deepest(&self) -> Anchored {
        *self.coords.last().expect("non-empty tower")
    }
}

impl ComposedMap {
    pub fn new(levels: Vec<NormalizedUniformizer>) -> Self {
        ComposedMap { levels }
    }

    /// `K_0, ..., K_{count-1}` from a ledger.
    pub fn from_ledger(ledger: &ParameterLedger, count: usize) -> Result<Self> {
        Ok(ComposedMap::new(ledger.uniformizers(count)?))
    }

    pub fn levels(&self) -> &[NormalizedUniformizer] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Apply `K_last`, then the one before, up to `K_0`, recording each
    /// intermediate point.
    pub fn apply(&self, z: Complex64) -> Result<LadderPoint> {
        let mut coords = vec![Anchored::plain(z); self.levels.len()];
        let mut w = z;
        for (j, k) in self.levels.iter().enumerate().rev() {
            coords[j] = Anchored::plain(w);
            w = k.eval(w)?;
        }
        Ok(LadderPoint { value: w, coords })
    }

    pub fn value(&self, z: Complex64) -> Result<Complex64> {
        let mut w = z;
        for k in self.levels.iter().rev() {
            w = k.eval(w)?;
        }
        Ok(w)
    }

    /// Invert level by level on base sheets. Every intermediate point must
    /// land on a base sheet; offsets below `f64` range are carried in log
    /// form.
    pub fn invert(&self, w: Complex64) -> Result<LadderPoint> {
        let mut coords = Vec::with_capacity(self.levels.len());
        let mut p = Anchored::plain(w);
        for k in &self.levels {
            let pre = k.locate_anchored(p)?;
            if pre.level != 0 {
                return Err(Error::NotOnBaseSheet {
                    value: p.to_complex(),
                    level: pre.level as f64,
                });
            }
            coords.push(pre.point);
            p = pre.point;
        }
        Ok(LadderPoint { value: w, coords })
    }

    /// `G'` with its modulus in log form, so that it survives overflow.
    pub fn log_derivative(&self, z: Complex64) -> Result<ScaledDerivative> {
        let mut out = ScaledDerivative {
            modulus: LogMagnitude::ONE,
            phase: Complex64::new(1.0, 0.0),
        };
        let mut w = z;
        for k in self.levels.iter().rev() {
            let d = k.derivative(w)?;
            out.modulus = out.modulus * d.modulus;
            out.phase *= d.phase;
            w = k.eval(w)?;
        }
        Ok(out)
    }

    /// Solve `G(i y) = i t` level by level in closed form.
    pub fn axis_point(&self, t: f64) -> AxisChain {
        assert!(t > 0.0, "axis heights must be positive");
        let mut log_v = t.ln();
        let mut log_derivative = 0.0;
        for k in &self.levels {
            let p = k.axis_preimage(log_v);
            log_derivative += p.log_derivative;
            log_v = p.log_y;
        }
        AxisChain {
            log_y: log_v,
            log_derivative,
        }
    }

    /// `G'`, `G''`, `G'''` by the chain rule.
    pub fn derivatives3(&self, z: Complex64) -> Result<[Complex64; 3]> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let (mut d1, mut d2, mut d3) = (one, zero, zero);
        let mut w = z;
        for k in self.levels.iter().rev() {
            let [k1, k2, k3] = k.derivatives3(w)?;
            let n1 = k1 * d1;
            let n2 = k2 * d1 * d1 + k1 * d2;
            let n3 = k3 * d1 * d1 * d1 + 3.0 * k2 * d1 * d2 + k1 * d3;
            d1 = n1;
            d2 = n2;
            d3 = n3;
            w = k.eval(w)?;
        }
        Ok([d1, d2, d3])
    }
}

/// Deepest point `i y` of the imaginary axis with `Im G(i y) = t`, and the
/// derivative there, in log form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisChain {
    pub log_y: f64,
    /// `log G'(i y)`; `G'` is real and positive on the axis.
    pub log_derivative: f64,
}

/// Signed imaginary part of an anchored point (exact sign even when the
/// magnitude underflows).
pub fn anchored_im(p: Anchored) -> f64 {
    match p.offset {
        Offset::Linear(d) => d.im,
        Offset::Log(l) => {
            let s = l.im.sin();
            let v = (l.re).exp() * s;
            if v == 0.0 {
                s.signum() * 0.0
            } else {
                v
            }
        }
    }
}
