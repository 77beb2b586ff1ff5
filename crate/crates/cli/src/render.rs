//! SVG figures, written by hand: polylines, markers and a caption.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_complex::Complex64;
use tubelog::comb::CombAtlas;
use tubelog::folding::periodic_orbit_set;
use tubelog::hedgehog::HedgehogApprox;
use tubelog::ParameterLedger;

use crate::config::RunConfig;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const PAD: f64 = 40.0;
const CAPTION: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// A figure over the box `[x0, x1] x [y0, y1]` of the plane.
struct Figure {
    x: (f64, f64),
    y: (f64, f64),
    body: String,
    caption: Vec<String>,
}

impl Figure {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        Figure {
            x,
            y,
            body: String::new(),
            caption: Vec::new(),
        }
    }

    fn px(&self, z: Complex64) -> (f64, f64) {
        let sx = (WIDTH - 2.0 * PAD) / (self.x.1 - self.x.0);
        let sy = (HEIGHT - 2.0 * PAD) / (self.y.1 - self.y.0);
        (PAD + (z.re - self.x.0) * sx, HEIGHT - PAD - (z.im - self.y.0) * sy)
    }

    fn inside(&self, z: Complex64) -> bool {
        z.re.is_finite() && z.im.is_finite() && z.re >= self.x.0 && z.re <= self.x.1 && z.im >= self.y.0 && z.im <= self.y.1
    }

    /// Draw `points`, broken wherever they leave the box.
    fn polyline(&mut self, points: &[Complex64], color: &str, width: f64) {
        let mut run: Vec<(f64, f64)> = Vec::new();
        for &z in points {
            if self.inside(z) {
                run.push(self.px(z));
            } else {
                self.flush(&mut run, color, width);
            }
        }
        self.flush(&mut run, color, width);
    }

    fn flush(&mut self, run: &mut Vec<(f64, f64)>, color: &str, width: f64) {
        if run.len() >= 2 {
            let pts: Vec<String> = run.iter().map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
            let _ = writeln!(
                self.body,
                r#"<polyline fill="none" stroke="{color}" stroke-width="{width}" points="{}"/>"#,
                pts.join(" ")
            );
        }
        run.clear();
    }

    fn marker(&mut self, z: Complex64, color: &str) {
        if self.inside(z) {
            let (x, y) = self.px(z);
            let _ = writeln!(self.body, r#"<circle cx="{x:.3}" cy="{y:.3}" r="3" fill="{color}"/>"#);
        }
    }

    fn caption(&mut self, line: impl Into<String>) {
        self.caption.push(line.into());
    }

    fn frame(&mut self) {
        let (a, b) = (self.px(Complex64::new(self.x.0, self.y.0)), self.px(Complex64::new(self.x.1, self.y.1)));
        let _ = writeln!(
            self.body,
            r##"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="#999"/>"##,
            a.0,
            b.1,
            b.0 - a.0,
            a.1 - b.1
        );
        let labels = [
            (a.0, a.1 + 16.0, "start", format!("{:.4}", self.x.0)),
            (b.0, a.1 + 16.0, "end", format!("{:.4}", self.x.1)),
            (a.0 - 4.0, a.1, "end", format!("{:.4}", self.y.0)),
            (a.0 - 4.0, b.1 + 4.0, "end", format!("{:.4}", self.y.1)),
        ];
        for (x, y, anchor, text) in labels {
            let _ = writeln!(
                self.body,
                r#"<text x="{x:.3}" y="{y:.3}" font-size="11" text-anchor="{anchor}">{text}</text>"#
            );
        }
    }

    fn finish(self) -> String {
        let total = HEIGHT + CAPTION + 14.0 * self.caption.len().saturating_sub(3) as f64;
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{total}" viewBox="0 0 {WIDTH} {total}" font-family="sans-serif">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        out.push_str(&self.body);
        for (i, line) in self.caption.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"<text x="{PAD}" y="{:.1}" font-size="12">{}</text>"#,
                HEIGHT + 4.0 + 14.0 * i as f64,
                escape(line)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Images under `K_0` of horizontal lines over three periods. The vertical
/// range is fitted to the images, which for large `a_0 h_0` all sit in a
/// thin band just below and above `h_0`.
pub fn foliation(config: &RunConfig, ledger: &ParameterLedger) -> String {
    let cut = config.figure_cut();
    let Ok(k) = ledger.uniformizer(0) else {
        let mut f = Figure::new((0.0, 1.0), (0.0, cut));
        f.caption("no a_0 is certified: nothing to draw");
        return f.finish();
    };
    let heights = [0.8, 0.4, 0.2, 0.1, 0.05, 0.02, 0.005, 1e-4, 1e-12, 1e-100];
    let samples = 1200;
    let lines: Vec<Vec<Complex64>> = heights
        .iter()
        .map(|&y| {
            (0..=samples)
                .filter_map(|j| k.eval(Complex64::new(3.0 * j as f64 / samples as f64, y)).ok())
                .filter(|w| w.im.is_finite() && w.im <= cut)
                .collect()
        })
        .collect();
    let (lo, hi) = lines
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), w| (lo.min(w.im), hi.max(w.im)));
    let (lo, hi) = if lo < hi { (lo, hi) } else { (0.0, cut) };
    let pad = 0.02 * (hi - lo);
    let mut f = Figure::new((0.0, 3.0 / k.divisor_f64()), (lo - pad, hi + pad));
    f.frame();
    for (i, line) in lines.iter().enumerate() {
        f.polyline(line, COLORS[i % COLORS.len()], 1.0);
    }
    f.caption(format!(
        "K_0(x + iy) for 0 <= x <= 3, y in {{0.8, 0.4, 0.2, 0.1, 0.05, 0.02, 0.005, 1e-4, 1e-12, 1e-100}}; a_0 = {}, h_0 = {}",
        k.divisor(),
        k.height()
    ));
    f.caption(format!(
        "each image is 1/a_0 = {:.4} periodic; vertical range fitted to {:.4} <= Im <= {:.4}, cut at h_0 + N + 2 = {cut}",
        1.0 / k.divisor_f64(),
        lo,
        hi
    ));
    f.finish()
}

/// `G_n(R)` over `0 <= Re <= 1` for every drawable `n <= N`.
fn boundaries_data(config: &RunConfig, ledger: &ParameterLedger) -> (Vec<(usize, Vec<Complex64>)>, Vec<String>) {
    let mut curves = Vec::new();
    let mut notes = Vec::new();
    let top = config.depth.min(ledger.depth().saturating_sub(1));
    if ledger.depth() == 0 {
        notes.push("no a_0 is certified: no boundary".into());
        return (curves, notes);
    }
    for n in 0..=top {
        match HedgehogApprox::build(ledger, n, config.grids.boundary_points) {
            Ok(h) => curves.push((n, h.periods(h.a[0] as usize))),
            Err(e) => notes.push(format!("G_{n} not drawn: {e}")),
        }
    }
    if top < config.depth {
        notes.push(format!("depths {} to {} are not certified", top + 1, config.depth));
    }
    (curves, notes)
}

pub fn boundaries(config: &RunConfig, ledger: &ParameterLedger) -> String {
    let cut = config.figure_cut();
    let mut f = Figure::new((0.0, 1.0), (0.0, cut));
    f.frame();
    let (curves, notes) = boundaries_data(config, ledger);
    for (n, pts) in &curves {
        f.polyline(pts, COLORS[n % COLORS.len()], 1.0);
    }
    let drawn: Vec<String> = curves.iter().map(|(n, _)| format!("G_{n}(R)")).collect();
    f.caption(format!("boundaries {} over 0 <= Re <= 1; cut at Im = {cut}", drawn.join(", ")));
    f.caption("colours by depth: blue 0, red 1, green 2");
    for n in notes {
        f.caption(n);
    }
    f.finish()
}

pub fn comb(config: &RunConfig, atlas: Option<&CombAtlas>) -> String {
    let strip = config.strip();
    let mut f = Figure::new((-0.5, 0.5), (strip.lo, strip.hi));
    f.frame();
    match atlas {
        Some(a) => {
            for c in &a.curves {
                let pts: Vec<Complex64> = c.points.iter().map(|p| p.value).collect();
                f.polyline(&pts, COLORS[0], 1.0);
            }
            f.caption(format!(
                "{} teeth of depth {} in the strip {} <= Im <= {}, {} heights each",
                a.curves.len(),
                a.depth,
                strip.lo,
                strip.hi,
                a.grid.len()
            ));
            if a.depth < config.depth {
                f.caption(format!("depth {} is not certified; drawn at depth {}", config.depth, a.depth));
            }
        }
        None => f.caption("no a_0 is certified: no teeth"),
    }
    f.finish()
}

/// `E(z) = e^{2 pi i z}` drawn with radius `1 - Im z / H` in place of
/// `e^{-2 pi Im z}`, which is below `1e-27` everywhere of interest.
pub fn disk(config: &RunConfig, ledger: &ParameterLedger, atlas: Option<&CombAtlas>) -> String {
    let cut = config.figure_cut();
    let mut f = Figure::new((-1.05, 1.05), (-1.05, 1.05));
    let radial = |z: Complex64| {
        let r = 1.0 - z.im / cut;
        (r >= 0.0).then(|| Complex64::from_polar(r, TAU * z.re))
    };
    let map = |pts: &[Complex64]| -> Vec<Complex64> {
        pts.iter()
            .map(|&z| radial(z).unwrap_or(Complex64::new(f64::NAN, f64::NAN)))
            .collect()
    };
    let circle: Vec<Complex64> = (0..=360).map(|i| Complex64::from_polar(1.0, TAU * i as f64 / 360.0)).collect();
    f.polyline(&circle, "#999", 0.5);
    let (curves, notes) = boundaries_data(config, ledger);
    for (n, pts) in &curves {
        f.polyline(&map(pts), COLORS[n % COLORS.len()], 0.8);
    }
    if let Some(a) = atlas {
        for c in &a.curves {
            let pts: Vec<Complex64> = c.points.iter().map(|p| p.value).collect();
            f.polyline(&map(&pts), "#000", 1.2);
        }
    }
    f.caption(format!(
        "E(z) = exp(2 pi i z) drawn at radius 1 - Im z / H, H = h_0 + N + 2 = {cut}, angle 2 pi Re z"
    ));
    let top = config.depth.min(ledger.depth().saturating_sub(1));
    let mut radii = Vec::new();
    for n in 0..=top {
        if ledger.depth() == 0 {
            break;
        }
        match periodic_orbit_set(n, ledger, config.grids.orbit_limit) {
            Ok(set) => {
                for &p in &set {
                    if let Some(w) = radial(p) {
                        f.marker(w, COLORS[(n + 3) % COLORS.len()]);
                    }
                }
                let low = set.iter().map(|p| p.im).fold(f64::INFINITY, f64::min);
                radii.push(format!("O_{{0,{}}}: log|E| <= {:.4}", n + 1, -TAU * low));
            }
            Err(e) => radii.push(format!("O_{{0,{}}} not drawn: {e}", n + 1)),
        }
    }
    f.caption(format!("orbit markers; true radii {}", radii.join("; ")));
    f.caption("black: comb teeth; coloured: boundaries by depth");
    for n in notes {
        f.caption(n);
    }
    f.finish()
}
