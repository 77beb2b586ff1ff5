//! Sampled boundary `G_n(R)` of `G_n(H̄)`.
//!
//! At the deepest level the real line is cut into unit cells `[c, c + 1]`.
//! A cell is parametrised so that both needles are resolved: the half
//! `c + e^{-s}` uses `log s` as the parameter, which runs from `log log 2`
//! (the peak over `c + 1/2`) to past `A = log lambda` (the tip, at height
//! 0), and the other half mirrors it. One period at the top level is
//! `a_1 ... a_n` cells, because `G_n(x + a_1 ... a_n) = G_n(x) + 1/a_0`.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::folding::ladder::ComposedMap;
use crate::ledger::ParameterLedger;
use crate::uniformizer::{Anchored, NormalizedUniformizer, Offset};

const MAX_CELLS: usize = 4096;
const MAX_REFINE: u32 = 10;
/// Offsets `e^{-s}` with `s` beyond this go into log form.
const LOG_OFFSET_FROM: f64 = 700.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub value: Complex64,
    /// Real preimage at the deepest level.
    pub deepest: Anchored,
}

impl BoundaryPoint {
    /// Needle samples sit within `e^{-700}` of an integer at the deepest
    /// level. Above depth 0 the rounding of `value` is far wider than the
    /// needle, so such a value need not invert back onto the base sheet.
    pub fn resolvable(&self) -> bool {
        matches!(self.deepest.offset, Offset::Linear(_))
    }
}

#[derive(Clone, Debug)]
pub struct HedgehogApprox {
    pub depth: usize,
    /// `a_0, ..., a_depth`.
    pub a: Vec<u64>,
    /// `h_0, ..., h_depth`.
    pub h: Vec<f64>,
    /// One period of `G_n(R)` in parameter order, from `G_n(0) = 0` to
    /// `G_n(a_1 ... a_n) = 1/a_0`.
    pub boundary: Vec<BoundaryPoint>,
    /// Samples whose evaluation failed and were left out.
    pub dropped: usize,
    maps: Vec<NormalizedUniformizer>,
}

struct CellSampler<'a> {
    upper: ComposedMap,
    deepest: &'a NormalizedUniformizer,
    sigma_mid: f64,
    sigma_tip: f64,
    tolerance: f64,
    dropped: usize,
}

impl CellSampler<'_> {
    fn real_point(&self, cell: i64, u: f64) -> Anchored {
        let zero = Offset::Linear(Complex64::new(0.0, 0.0));
        if u <= 0.0 {
            return Anchored {
                anchor: cell,
                offset: zero,
            };
        }
        if u >= 1.0 {
            return Anchored {
                anchor: cell + 1,
                offset: zero,
            };
        }
        let (anchor, v, sign) = if u <= 0.5 {
            (cell, 2.0 * u, 1.0)
        } else {
            (cell + 1, 2.0 * (1.0 - u), -1.0)
        };
        let s = (self.sigma_tip + (self.sigma_mid - self.sigma_tip) * v).exp();
        let offset = if s < LOG_OFFSET_FROM {
            Offset::Linear(Complex64::new(sign * (-s).exp(), 0.0))
        } else {
            Offset::Log(Complex64::new(-s, if sign > 0.0 { 0.0 } else { PI }))
        };
        Anchored { anchor, offset }
    }

    fn point(&self, cell: i64, u: f64) -> Option<BoundaryPoint> {
        let deepest = self.real_point(cell, u);
        let w = self.deepest.eval_anchored(deepest).ok()?;
        let value = self.upper.value(w).ok()?;
        value.re.is_finite().then_some(BoundaryPoint { value, deepest })
    }

    fn refine(&mut self, cell: i64, ends: [(f64, BoundaryPoint); 2], level: u32, out: &mut Vec<BoundaryPoint>) {
        let [(u0, p0), (u1, p1)] = ends;
        if level >= MAX_REFINE {
            return;
        }
        let um = 0.5 * (u0 + u1);
        let Some(pm) = self.point(cell, um) else {
            self.dropped += 1;
            return;
        };
        let chord_mid = 0.5 * (p0.value + p1.value);
        if (pm.value - chord_mid).norm() <= self.tolerance {
            return;
        }
        self.refine(cell, [(u0, p0), (um, pm)], level + 1, out);
        out.push(pm);
        self.refine(cell, [(um, pm), (u1, p1)], level + 1, out);
    }

    fn cell(&mut self, cell: i64, samples: usize) -> Vec<BoundaryPoint> {
        let mut coarse = Vec::with_capacity(samples + 1);
        for i in 0..=samples {
            let u = i as f64 / samples as f64;
            match self.point(cell, u) {
                Some(p) => coarse.push((u, p)),
                None => self.dropped += 1,
            }
        }
        let mut out = Vec::with_capacity(coarse.len());
        for pair in coarse.windows(2) {
            out.push(pair[0].1);
            self.refine(cell, [pair[0], pair[1]], 0, &mut out);
        }
        if let Some(last) = coarse.last() {
            out.push(last.1);
        }
        out
    }
}

impl HedgehogApprox {
    /// Sample one top-level period of `G_depth(R)` with at least
    /// `min_points` points, refined until each chord midpoint is within
    /// `1e-4 / a_0` of the curve.
    pub fn build(ledger: &ParameterLedger, depth: usize, min_points: usize) -> Result<Self> {
        let maps = ledger.uniformizers(depth + 1)?;
        let a: Vec<u64> = maps.iter().map(|k| k.divisor()).collect();
        let cells = ledger.product(depth + 1)? / a[0];
        let cells = cells.to_usize().filter(|&c| c <= MAX_CELLS).ok_or(Error::TooManyPoints {
            count: cells.to_string(),
            limit: MAX_CELLS,
        })?;
        let deepest = &maps[depth];
        let mut sampler = CellSampler {
            upper: ComposedMap::new(maps[..depth].to_vec()),
            deepest,
            sigma_mid: LN_2.ln(),
            sigma_tip: deepest.log_lambda() + 1.0,
            tolerance: 1e-4 / a[0] as f64,
            dropped: 0,
        };
        let per_cell = min_points.div_ceil(cells).max(8);
        let mut boundary: Vec<BoundaryPoint> = Vec::new();
        for c in 0..cells {
            let pts = sampler.cell(c as i64, per_cell);
            // neighbouring cells share their tip
            let skip = usize::from(c > 0 && !pts.is_empty() && boundary.last().map(|p| p.value) == Some(pts[0].value));
            boundary.extend_from_slice(&pts[skip..]);
        }
        boundary.dedup_by(|x, y| x.value == y.value);
        let dropped = sampler.dropped;
        Ok(HedgehogApprox {
            depth,
            a,
            h: maps.iter().map(|k| k.height()).collect(),
            boundary,
            dropped,
            maps,
        })
    }

    pub fn maps(&self) -> &[NormalizedUniformizer] {
        &self.maps
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.boundary.iter().map(|p| p.value).collect()
    }

    /// The boundary over `Re` in `[0, periods / a_0]`, by translation.
    pub fn periods(&self, periods: usize) -> Vec<Complex64> {
        let step = 1.0 / self.a[0] as f64;
        let mut out = Vec::with_capacity(self.boundary.len() * periods);
        for k in 0..periods {
            let shift = k as f64 * step;
            let skip = usize::from(k > 0);
            out.extend(self.boundary[skip..].iter().map(|p| p.value + shift));
        }
        out
    }

    pub fn lowest(&self) -> Complex64 {
        self.extreme(|a, b| a.im < b.im)
    }

    pub fn highest(&self) -> Complex64 {
        self.extreme(|a, b| a.im > b.im)
    }

    fn extreme(&self, better: impl Fn(Complex64, Complex64) -> bool) -> Complex64 {
        let mut best = self.boundary[0].value;
        for p in &self.boundary {
            if better(p.value, best) {
                best = p.value;
            }
        }
        best
    }

    /// `G_n(p + i dy)` for a deepest-level point `p`.
    pub fn lift(&self, p: Anchored, dy: f64) -> Result<Complex64> {
        let z = p.to_complex() + Complex64::new(0.0, dy);
        let upper = ComposedMap::new(self.maps.clone());
        upper.value(z)
    }
}
