//! Self-contained SVG line chart of average regret against the horizon.

use std::fmt::Write as _;
use std::path::Path;

use super::run::ExperimentSummary;
use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

#[derive(Clone, Copy, Debug, Default)]
pub struct PlotOptions {
    pub log_log: bool,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
        if log {
            lo = lo.log10();
            hi = hi.log10();
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        } else {
            let pad = 0.05 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
        Axis { lo, hi, log }
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    /// Tick positions (in data units) and labels.
    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let decades: Vec<(f64, String)> = (self.lo.ceil() as i32..=self.hi.floor() as i32)
                .map(|k| (10f64.powi(k), format!("1e{k}")))
                .collect();
            if decades.len() >= 2 {
                return decades;
            }
        }
        (0..5)
            .map(|i| {
                let u = self.lo + (self.hi - self.lo) * i as f64 / 4.0;
                let v = if self.log { 10f64.powf(u) } else { u };
                (v, format!("{v:.3e}"))
            })
            .collect()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// SVG text of the chart: mean average regret per horizon with a
/// ±1 standard deviation band. A single horizon gives a lone marker.
/// Falls back to linear axes when log axes would hide every point.
pub fn render_svg(summary: &ExperimentSummary, opts: &PlotOptions) -> Result<String> {
    if summary.horizons.is_empty() {
        return Err(Error::InvalidInput(
            "summary has no horizons to plot".into(),
        ));
    }
    let mut log = opts.log_log;
    let mut pts: Vec<(f64, f64, f64, f64)> = summary
        .horizons
        .iter()
        .map(|h| {
            let m = h.mean_avg_regret;
            (
                h.horizon as f64,
                m,
                m - h.std_avg_regret,
                m + h.std_avg_regret,
            )
        })
        .collect();
    if log {
        let positive: Vec<_> = pts
            .iter()
            .copied()
            .filter(|p| p.0 > 0.0 && p.1 > 0.0)
            .collect();
        if positive.is_empty() {
            log = false;
        } else {
            let floor = positive.iter().map(|p| p.1).fold(f64::INFINITY, f64::min) * 0.5;
            pts = positive
                .into_iter()
                .map(|(x, m, lo, hi)| (x, m, lo.max(floor), hi))
                .collect();
        }
    }

    let xa = Axis::new(pts.iter().map(|p| p.0), log);
    let ya = Axis::new(pts.iter().flat_map(|p| [p.2, p.3]), log);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + pw * xa.unit(x);
    let py = |y: f64| TOP + ph * (1.0 - ya.unit(y));

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{} ({})</text>"#,
        WIDTH / 2.0,
        escape(&summary.name),
        escape(&summary.algorithm)
    )
    .unwrap();

    // axes and ticks
    let (x0, x1, y0, y1) = (LEFT, LEFT + pw, TOP + ph, TOP);
    writeln!(
        s,
        r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}" stroke="black"/>"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}" stroke="black"/>"#
    )
    .unwrap();
    for (v, label) in xa.ticks() {
        let x = px(v);
        writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            y0 + 5.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
            y0 + 18.0
        )
        .unwrap();
    }
    for (v, label) in ya.ticks() {
        let y = py(v);
        writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/>"#,
            x0 - 5.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
            x0 - 8.0,
            y + 4.0
        )
        .unwrap();
    }
    let scale = if log { " (log)" } else { "" };
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">horizon T{scale}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">average regret{scale}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    )
    .unwrap();

    if pts.len() > 1 {
        let upper = pts.iter().map(|p| format!("{:.2},{:.2}", px(p.0), py(p.3)));
        let lower = pts
            .iter()
            .rev()
            .map(|p| format!("{:.2},{:.2}", px(p.0), py(p.2)));
        let band: Vec<String> = upper.chain(lower).collect();
        writeln!(
            s,
            r#"<polygon points="{}" fill="steelblue" fill-opacity="0.2" stroke="none"/>"#,
            band.join(" ")
        )
        .unwrap();
        let line: Vec<String> = pts
            .iter()
            .map(|p| format!("{:.2},{:.2}", px(p.0), py(p.1)))
            .collect();
        writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
            line.join(" ")
        )
        .unwrap();
    }
    for p in &pts {
        writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#,
            px(p.0),
            py(p.1)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_plot(summary: &ExperimentSummary, path: &Path, opts: &PlotOptions) -> Result<()> {
    let svg = render_svg(summary, opts)?;
    std::fs::write(path, svg)?;
    Ok(())
}
