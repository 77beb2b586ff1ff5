//! Stage-by-stage choice of `a_n`: a doubling search over numeric
//! surrogates of conditions (a)-(f), followed by the quantities the next
//! stage starts from (`h_{n+1}`, `h'_{n+1}`, `tau_{n+1}`, `Y_{n+1}`, `R`).

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::curve::{cr_distance, sample_tooth, CombCurve, Strip, ToothSolver};
use super::digits::{all_prefixes, x_of};
use crate::error::{Error, Result};
use crate::folding::time::ratio_to_f64;
use crate::folding::ComposedMap;
use crate::ledger::{default_alpha, ParameterLedger, Rectangle, Stage};
use crate::logmag::{LogMagnitude, TinyScale};
use crate::numeric::TAU;

const LN_TAU: f64 = 1.837_877_066_409_345_5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaSchedule {
    /// `alpha_n = 1 - 1/(n + 2)`.
    Default,
    /// `alpha_0, alpha_1, ...`; the last entry repeats.
    Explicit(Vec<f64>),
}

impl AlphaSchedule {
    pub fn alpha(&self, n: usize) -> f64 {
        match self {
            AlphaSchedule::Default => default_alpha(n),
            AlphaSchedule::Explicit(v) => *v.get(n).or(v.last()).expect("non-empty schedule"),
        }
    }

    /// Strictly increasing inside `(0, 1)`.
    pub fn is_valid(&self) -> bool {
        match self {
            AlphaSchedule::Default => true,
            AlphaSchedule::Explicit(v) => {
                !v.is_empty() && v.iter().all(|a| *a > 0.0 && *a < 1.0) && v.windows(2).all(|w| w[0] < w[1])
            }
        }
    }
}

/// Sampling densities for the predicates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PredicateGrids {
    /// Heights `v` on the threshold-segment grid.
    pub segment_heights: usize,
    /// Angles on each removed circle.
    pub circle_angles: usize,
    /// Cylinder levels `-budget..=budget` checked on each circle.
    pub sheet_budget: u32,
    /// Heights per tooth.
    pub curve_samples: usize,
    /// Abscissas per period in the height scans.
    pub period_columns: usize,
    pub height_step: f64,
}

impl Default for PredicateGrids {
    fn default() -> Self {
        PredicateGrids {
            segment_heights: 64,
            circle_angles: 64,
            sheet_budget: 8,
            curve_samples: 64,
            period_columns: 64,
            height_step: 0.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstructionConfig {
    pub h0: f64,
    /// Half-plane margin `M`.
    pub margin: f64,
    pub alpha: AlphaSchedule,
    pub a_cap: u64,
    /// Factor by which strict inequalities must hold.
    pub margin_factor: f64,
    pub strip: Strip,
    pub grids: PredicateGrids,
}

impl Default for ConstructionConfig {
    fn default() -> Self {
        ConstructionConfig {
            h0: 10.0,
            margin: 1.0,
            alpha: AlphaSchedule::Default,
            a_cap: 1 << 60,
            margin_factor: 1.05,
            strip: Strip::STANDARD,
            grids: PredicateGrids::default(),
        }
    }
}

/// One evaluated predicate. `margin >= 0` (or `> 0` for strict ones) is a
/// pass; log-scale predicates report their margin in natural-log units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredicateRecord {
    pub stage: usize,
    pub name: String,
    pub statement: String,
    pub grid: String,
    #[serde(with = "crate::hexfloat")]
    pub margin: f64,
    pub passed: bool,
    /// Smallest `log a_n` this predicate would accept, when known in closed
    /// form.
    #[serde(with = "crate::hexfloat::option")]
    pub required_ln_a: Option<f64>,
    pub note: Option<String>,
}

impl PredicateRecord {
    fn new(stage: usize, name: &str, statement: &str, grid: String, margin: f64, strict: bool) -> Self {
        let passed = if strict { margin > 0.0 } else { margin >= 0.0 };
        PredicateRecord {
            stage,
            name: name.into(),
            statement: statement.into(),
            grid,
            margin,
            passed,
            required_ln_a: None,
            note: None,
        }
    }

    fn failed(stage: usize, name: &str, statement: &str, grid: String, err: &Error) -> Self {
        PredicateRecord {
            note: Some(err.to_string()),
            ..Self::new(stage, name, statement, grid, f64::NEG_INFINITY, true)
        }
    }

    fn requiring(mut self, ln_a: f64) -> Self {
        self.required_ln_a = Some(ln_a);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    /// Chosen `a_n`, or `None` when the search was exhausted.
    pub a: Option<u64>,
    pub candidates_tried: usize,
    /// Predicates at the chosen value, or at the last candidate tried.
    pub predicates: Vec<PredicateRecord>,
    /// Checks on the quantities handed to the next stage.
    pub hypotheses: Vec<PredicateRecord>,
}

impl StageRecord {
    pub fn failing(&self) -> Vec<String> {
        self.predicates
            .iter()
            .chain(&self.hypotheses)
            .filter(|p| !p.passed)
            .map(|p| p.name.clone())
            .collect()
    }
}

/// Outcome of [`construct`].
#[derive(Clone, Debug, PartialEq)]
pub struct Construction {
    /// Chosen stages plus the open stage the search stopped at.
    pub ledger: ParameterLedger,
    pub stages: Vec<StageRecord>,
    pub requested_depth: usize,
    /// Set when some stage up to the requested depth could not be chosen.
    pub exhausted: Option<Error>,
}

impl Construction {
    /// Deepest `n` with `a_0, ..., a_n` chosen.
    pub fn reached_depth(&self) -> Option<usize> {
        self.ledger.depth().checked_sub(1)
    }

    pub fn complete(&self) -> bool {
        self.exhausted.is_none()
    }
}

fn ln_product(a: &[u64]) -> f64 {
    a.iter().map(|&x| (x as f64).ln()).sum()
}

fn recip_product(ledger: &ParameterLedger, count: usize) -> Result<f64> {
    Ok(ratio_to_f64(&BigRational::new(BigInt::one(), ledger.product(count)?)))
}

/// `ln(e^x + e^y)`.
fn log_add_exp(x: f64, y: f64) -> f64 {
    let m = x.max(y);
    m + ((x - m).exp() + (y - m).exp()).ln()
}

fn pred_min_a(n: usize, a: u64) -> PredicateRecord {
    PredicateRecord::new(n, "min_a", "a_n >= 5", "exact".into(), a as f64 - 5.0, false)
        .requiring(5f64.ln())
}

/// `|a_n K_n'| > margin_factor` on the segments over the troughs, for
/// `Im K_n` up to `h_n - 1/2`.
fn pred_segment_derivative(n: usize, ledger: &ParameterLedger, config: &ConstructionConfig) -> PredicateRecord {
    let statement = "|a_n K_n'| > 1 on the trough segments up to Im K_n = h_n - 1/2";
    let count = config.grids.segment_heights;
    let grid = format!("{count} heights v in (0, h_n - 1/2]");
    let k = match ledger.uniformizer(n) {
        Ok(k) => k,
        Err(e) => return PredicateRecord::failed(n, "segment_derivative", statement, grid, &e),
    };
    let top = k.height() - 0.5;
    let mut worst = f64::INFINITY;
    for i in 1..=count {
        let v = top * i as f64 / count as f64;
        match k.threshold_segment(v) {
            Ok(s) => worst = worst.min(s.logbound.log_abs),
            Err(e) => return PredicateRecord::failed(n, "segment_derivative", statement, grid, &e),
        }
    }
    PredicateRecord::new(n, "segment_derivative", statement, grid, worst - config.margin_factor.ln(), true)
}

/// (a): every point of the circle of radius `3/a_n` around a tip of
/// `K_{n-1}` maps below `Im = -M`, on every sheet in the budget. Measured as
/// `log|u|` against `A_{n-1} + 2 pi a_{n-1} M`.
fn pred_exclusion(n: usize, ledger: &ParameterLedger, config: &ConstructionConfig) -> PredicateRecord {
    let statement = "K_{n-1} maps the removed disks of radius 3/a_n below Im = -M";
    let angles = config.grids.circle_angles;
    let budget = config.grids.sheet_budget as i64;
    let grid = format!("{angles} angles x levels -{budget}..={budget}");
    let (k, a) = match (ledger.uniformizer(n - 1), ledger.divisor(n)) {
        (Ok(k), Ok(a)) => (k, a),
        (Err(e), _) | (_, Err(e)) => return PredicateRecord::failed(n, "exclusion", statement, grid, &e),
    };
    let threshold = k.log_lambda() + TAU * k.divisor_f64() * config.margin;
    let rho = 3.0 / a as f64;
    let mut worst = f64::INFINITY;
    for i in 0..angles {
        let phi = TAU * (i as f64 + 0.5) / angles as f64;
        let z = Complex64::from_polar(rho, phi);
        let u = match k.inner(z) {
            Ok(u) => u,
            Err(e) => return PredicateRecord::failed(n, "exclusion", statement, grid, &e),
        };
        for level in -budget..=budget {
            let ul = u + Complex64::new(0.0, TAU * level as f64);
            worst = worst.min(ul.norm().ln());
        }
    }
    // log|u| ~ log log(a / (6 pi)) on the circle
    PredicateRecord::new(n, "exclusion", statement, grid, worst - threshold, true)
        .requiring(threshold.exp() + (6.0 * std::f64::consts::PI).ln())
}

/// (b): `1/a_n < tau_n`, with the margin factor.
fn pred_width(n: usize, ledger: &ParameterLedger, config: &ConstructionConfig) -> PredicateRecord {
    let statement = "1/a_n < tau_n";
    let grid = "closed form".to_string();
    let tau = match ledger.stages.get(n).and_then(|s| s.tau) {
        Some(t) => t,
        None => {
            return PredicateRecord::failed(n, "width", statement, grid, &Error::DepthUnavailable {
                needed: n + 1,
                available: n,
            })
        }
    };
    let a = ledger.divisor(n).unwrap_or(0) as f64;
    let required = -tau.log() + config.margin_factor.ln();
    PredicateRecord::new(n, "width", statement, grid, a.ln() - required, true).requiring(required)
}

fn teeth(ledger: &ParameterLedger, depth: usize, grid: &[f64]) -> Result<Vec<CombCurve>> {
    all_prefixes(depth).iter().map(|p| sample_tooth(p, ledger, grid)).collect()
}

/// (c) and (e): every child tooth is close to its parent, in `C^r` with
/// `r = min(n, 3)` and in `C^0`.
fn pred_closeness(n: usize, ledger: &ParameterLedger, config: &ConstructionConfig) -> [PredicateRecord; 2] {
    let c_statement = "C^r distance child to parent <= 1/2^n, r = min(n, 3)";
    let e_statement = "C^0 distance child to parent <= (1/20)/(a_0 ... a_{n-1})";
    let samples = config.grids.curve_samples;
    let grid_text = format!("{} children x {samples} heights in [{}, {}]", 3usize.pow(n as u32), config.strip.lo, config.strip.hi);
    let grid = config.strip.grid(samples);
    let sampled = teeth(ledger, n - 1, &grid).and_then(|parents| Ok((parents, teeth(ledger, n, &grid)?)));
    let (parents, children) = match sampled {
        Ok(s) => s,
        Err(e) => {
            return [
                PredicateRecord::failed(n, "cr_closeness", c_statement, grid_text.clone(), &e),
                PredicateRecord::failed(n, "parent_closeness", e_statement, grid_text, &e),
            ]
        }
    };
    let r = n.min(3);
    let (mut worst_r, mut worst_0) = (0.0f64, 0.0f64);
    for child in &children {
        let parent = &parents[all_prefixes(n - 1)
            .iter()
            .position(|p| p[..] == child.prefix[..n - 1])
            .expect("every child has a parent")];
        match (cr_distance(child, parent, r), cr_distance(child, parent, 0)) {
            (Ok(dr), Ok(d0)) => {
                worst_r = worst_r.max(dr);
                worst_0 = worst_0.max(d0);
            }
            (Err(e), _) | (_, Err(e)) => {
                return [
                    PredicateRecord::failed(n, "cr_closeness", c_statement, grid_text.clone(), &e),
                    PredicateRecord::failed(n, "parent_closeness", e_statement, grid_text, &e),
                ]
            }
        }
    }
    let bound_e = match recip_product(ledger, n) {
        Ok(b) => b / 20.0,
        Err(e) => return [
            PredicateRecord::failed(n, "cr_closeness", c_statement, grid_text.clone(), &e),
            PredicateRecord::failed(n, "parent_closeness", e_statement, grid_text, &e),
        ],
    };
    [
        PredicateRecord::new(n, "cr_closeness", c_statement, grid_text.clone(), 0.5f64.powi(n as i32) - worst_r, false),
        PredicateRecord::new(n, "parent_closeness", e_statement, grid_text, bound_e - worst_0, false),
    ]
}

/// Largest `log |ds/dx|` over the teeth of depth `n - 1`, read through
/// `G_{n-1} = K_0 ... K_{n-1}` on the lines `a_{n-1} x(prefix)`.
pub fn log_sensitivity(ledger: &ParameterLedger, n: usize, grid: &[f64]) -> Result<f64> {
    assert!(n >= 1, "sensitivity is defined from stage 1");
    let a = ledger.a_values();
    let scale = BigRational::from_integer(BigInt::from(ledger.divisor(n - 1)?));
    let map = ComposedMap::from_ledger(ledger, n)?;
    let mut worst = f64::NEG_INFINITY;
    for p in all_prefixes(n - 1) {
        let solver = ToothSolver::new(map.clone(), &(x_of(&p, &a)? * &scale));
        let mut hint = None;
        for &t in grid {
            let q = solver.point(t, hint)?;
            hint = Some(q.line_y);
            let s = q
                .log_abscissa_sensitivity()
                .ok_or_else(|| Error::BracketFailure(format!("dv/dy <= 0 on the tooth {p:?} at t = {t}")))?;
            worst = worst.max(s);
        }
    }
    Ok(worst)
}

/// (d): `||f||_{C^1} / a_n <= (1/(a_0 ... a_n))^{alpha_n}`, in logs.
fn pred_holder_step(n: usize, ledger: &ParameterLedger, config: &ConstructionConfig) -> PredicateRecord {
    let statement = "||f||_{C^1} / a_n <= (a_0 ... a_n)^{-alpha_n}";
    let samples = config.grids.curve_samples;
    let grid_text = format!("{} parents x {samples} heights", 3usize.pow(n as u32 - 1));
    let grid = config.strip.grid(samples);
    let log_f = match log_sensitivity(ledger, n, &grid) {
        Ok(f) => f,
        Err(e) => return PredicateRecord::failed(n, "holder_step", statement, grid_text, &e),
    };
    let a = ledger.a_values();
    let alpha = ledger.stages[n].alpha;
    let ln_a = (a[n] as f64).ln();
    let margin = -alpha * ln_product(&a[..=n]) - (log_f - ln_a);
    let required = (log_f + alpha * ln_product(&a[..n])) / (1.0 - alpha);
    let mut rec = PredicateRecord::new(n, "holder_step", statement, grid_text, margin, false).requiring(required);
    rec.note = Some(format!("log ||f||_C1 = {log_f:e}"));
    rec
}

/// (f): the cylinder-end orbit `P_n` lies above `Im = h_n - 1`.
fn pred_orbit_height(n: usize, ledger: &ParameterLedger) -> PredicateRecord {
    let statement = "P_n lies in Im z >= h_n - 1";
    let k = match ledger.uniformizer(n) {
        Ok(k) => k,
        Err(e) => return PredicateRecord::failed(n, "orbit_height", statement, "a_n points".into(), &e),
    };
    // P_n is a translate of one cylinder end, so one point per level suffices
    let low = k.cylinder_end(1).im.min(k.cylinder_end(-1).im);
    PredicateRecord::new(n, "orbit_height", statement, "levels -1, 1".into(), low - (k.height() - 1.0), false)
}

/// All predicates of stage `n` at the `a_n` stored in the ledger.
pub fn stage_predicates(ledger: &ParameterLedger, n: usize, config: &ConstructionConfig) -> Vec<PredicateRecord> {
    let a = match ledger.divisor(n) {
        Ok(a) => a,
        Err(e) => return vec![PredicateRecord::failed(n, "min_a", "a_n >= 5", "exact".into(), &e)],
    };
    let mut out = vec![pred_min_a(n, a), pred_segment_derivative(n, ledger, config)];
    if n >= 1 {
        out.push(pred_exclusion(n, ledger, config));
        out.push(pred_width(n, ledger, config));
        let [c, e] = pred_closeness(n, ledger, config);
        out.push(c);
        out.push(pred_holder_step(n, ledger, config));
        out.push(e);
    }
    out.push(pred_orbit_height(n, ledger));
    out
}

fn tiny_from_log(log_x: f64) -> Option<TinyScale> {
    (log_x < 0.0).then(|| TinyScale::from_log(log_x))
}

/// Lowest `y` on the scan with `min_x Im G(x + i y) > target`.
fn height_scan(g: &ComposedMap, target: f64, config: &ConstructionConfig) -> Result<f64> {
    let cols = config.grids.period_columns;
    let step = config.grids.height_step;
    let mut y = step;
    while y < 1e4 {
        if min_height(g, y, cols)? > target {
            return Ok(y);
        }
        y += step;
    }
    Err(Error::BracketFailure(format!("Im G stays below {target} up to Im z = 1e4")))
}

fn min_height(g: &ComposedMap, y: f64, cols: usize) -> Result<f64> {
    let mut low = f64::INFINITY;
    for i in 0..cols {
        low = low.min(g.value(Complex64::new(i as f64 / cols as f64, y))?.im);
    }
    Ok(low)
}

/// Open stage `n + 1` of a ledger whose stage `n` is chosen, and check the
/// quantities just computed.
pub fn open_next_stage(
    ledger: &ParameterLedger,
    n: usize,
    config: &ConstructionConfig,
) -> Result<(ParameterLedger, Vec<PredicateRecord>)> {
    let k = ledger.uniformizer(n)?;
    let g = ComposedMap::from_ledger(ledger, n + 1)?;
    let factor = config.margin_factor;
    let target = ledger.h0 + n as f64 + 1.0;
    let y_star = height_scan(&g, target, config)?;
    let h_next = factor * y_star + 1.0;
    let cols = config.grids.period_columns;
    let mut checks = vec![PredicateRecord::new(
        n + 1,
        "hypothesis_height",
        "Im G_n(x + i(h_{n+1} - 1)) > h_0 + n + 1",
        format!("{cols} abscissas per period"),
        min_height(&g, h_next - 1.0, cols)? - target,
        true,
    )];

    // h'_{n+1}: the segments [x, x + i h'] reach height 2 (n = 0) or h'_n
    let log_v = if n == 0 {
        (2.0 * factor).ln()
    } else {
        ledger.stages[n]
            .h_prime
            .map(|h| h.log())
            .ok_or(Error::DepthUnavailable { needed: n + 1, available: n })?
    };
    let h_prime = tiny_from_log(k.axis_preimage(log_v).log_y);

    // tau_{n+1}: below height eta, |x| < tau keeps Im K_n under the strip
    let log_eta = if n == 0 {
        0.0
    } else {
        ComposedMap::from_ledger(ledger, n)?.axis_point(config.strip.lo).log_y
    };
    let x = k.log_lambda() - TAU * k.divisor_f64() * log_eta.exp();
    let tau = TinyScale::from_log_neg_log(factor.ln() + log_add_exp(x, LN_TAU.ln()));

    let y_cap = tiny_from_log(k.axis_preimage((k.height() - 0.5).ln()).log_y);

    let mut next = ledger.clone();
    let mut stage = Stage::open(h_next, config.alpha.alpha(n + 1));
    stage.h_prime = h_prime;
    stage.tau = Some(tau);
    stage.y_cap = y_cap;
    if n == 0 {
        // the image of the tau-strip, up to a quarter above the strip
        let top = config.strip.hi + 0.25;
        let log_d = k.axis_preimage(top.ln()).log_derivative;
        stage.rectangles.push(Rectangle {
            prefix: Vec::new(),
            center: 0.0,
            half_width: LogMagnitude::from_log(tau.log() + log_d + factor.ln()),
            im_lo: config.strip.lo - 0.25,
            im_hi: top,
        });
    }
    checks.push(PredicateRecord::new(
        n + 1,
        "hypothesis_reach",
        "h'_{n+1} is below Im = 1 on the trough axis",
        "closed form".into(),
        if h_prime.is_some() { 1.0 } else { -1.0 },
        true,
    ));
    next.stages.truncate(n + 1);
    next.stages.push(stage);
    Ok((next, checks))
}

/// Doubling search for `a_n` on a ledger whose stages below `n` are chosen
/// and whose stage `n` is open. Returns the extended ledger when a value
/// passes.
pub fn search_stage(
    ledger: &ParameterLedger,
    n: usize,
    config: &ConstructionConfig,
) -> (StageRecord, Option<ParameterLedger>) {
    assert_eq!(ledger.depth(), n, "stages below n must be chosen, stage n open");
    let start = if n == 0 { 5 } else { ledger.divisor(n - 1).expect("chosen").max(5) };
    let mut record = StageRecord {
        stage: n,
        a: None,
        candidates_tried: 0,
        predicates: Vec::new(),
        hypotheses: Vec::new(),
    };
    let mut a = start;
    while a <= config.a_cap {
        let candidate = ledger.with_a(n, a);
        record.candidates_tried += 1;
        record.predicates = stage_predicates(&candidate, n, config);
        if record.predicates.iter().all(|p| p.passed) {
            record.a = Some(a);
            return match open_next_stage(&candidate, n, config) {
                Ok((next, checks)) => {
                    record.hypotheses = checks;
                    (record, Some(next))
                }
                Err(e) => {
                    record.hypotheses = vec![PredicateRecord::failed(n + 1, "hypothesis_height", "next stage", String::new(), &e)];
                    (record, Some(candidate))
                }
            };
        }
        match a.checked_mul(2) {
            Some(next) => a = next,
            None => break,
        }
    }
    (record, None)
}

/// [`search_stage`] as a fallible step.
pub fn choose_stage(ledger: &ParameterLedger, n: usize, config: &ConstructionConfig) -> Result<(ParameterLedger, StageRecord)> {
    let (record, next) = search_stage(ledger, n, config);
    match next {
        Some(l) => Ok((l, record)),
        None => Err(Error::SearchExhausted {
            stage: n,
            a_cap: config.a_cap,
            failing: record.failing(),
        }),
    }
}

/// Stages `0..=depth`, stopping at the first exhausted search.
pub fn construct(config: &ConstructionConfig, depth: usize) -> Construction {
    let mut ledger = ParameterLedger::start(config.h0, config.margin, config.alpha.alpha(0));
    let mut stages = Vec::new();
    for n in 0..=depth {
        let (record, next) = search_stage(&ledger, n, config);
        let failing = record.failing();
        stages.push(record);
        match next {
            Some(l) if failing.is_empty() => ledger = l,
            _ => {
                return Construction {
                    ledger,
                    stages,
                    requested_depth: depth,
                    exhausted: Some(Error::SearchExhausted {
                        stage: n,
                        a_cap: config.a_cap,
                        failing,
                    }),
                }
            }
        }
    }
    Construction {
        ledger,
        stages,
        requested_depth: depth,
        exhausted: None,
    }
}
