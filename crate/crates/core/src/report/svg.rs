//! WER-vs-SNR line plots as standalone SVG documents.

use std::fmt::Write;

use crate::gaincurve::{GainResult, WerCurve};
use crate::util::format_fixed;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PlotError {
    #[error("nothing to plot: at least one curve is required")]
    EmptyInput,
    #[error("invalid axis bounds [{0}, {1}]")]
    BadBounds(f64, f64),
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Plotting rectangle in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotArea {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
}

/// Data bounds plus the pixel area they map onto.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axes {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub area: PlotArea,
}

impl Axes {
    /// Pixel position of (`snr_db`, `wer`); y grows downward.
    pub fn map(&self, snr_db: f64, wer: f64) -> (f64, f64) {
        let fx = (snr_db - self.x.0) / (self.x.1 - self.x.0);
        let fy = (wer - self.y.0) / (self.y.1 - self.y.0);
        (
            self.area.left + fx * self.area.width,
            self.area.top + (1.0 - fy) * self.area.height,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    pub title: Option<String>,
    /// SNR bounds; defaults to the span of all curves.
    pub x_range: Option<(f64, f64)>,
    /// WER bounds; defaults to 0 up to a round number above the data.
    pub y_range: Option<(f64, f64)>,
    pub width: f64,
    pub height: f64,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self {
            title: None,
            x_range: None,
            y_range: None,
            width: 720.0,
            height: 440.0,
        }
    }
}

const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 180.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 52.0;

impl PlotOptions {
    /// Axes for `curves` under these options.
    pub fn axes(&self, curves: &[WerCurve]) -> Result<Axes, PlotError> {
        if curves.is_empty() {
            return Err(PlotError::EmptyInput);
        }
        let x = self.x_range.unwrap_or_else(|| {
            let lo = curves
                .iter()
                .map(WerCurve::min_snr)
                .fold(f64::INFINITY, f64::min);
            let hi = curves
                .iter()
                .map(WerCurve::max_snr)
                .fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        });
        let y = self.y_range.unwrap_or_else(|| {
            let top = curves
                .iter()
                .flat_map(|c| c.points().iter().map(|p| p.wer))
                .fold(0.0, f64::max);
            let step = nice_step(top.max(1.0));
            (0.0, ((top / step).ceil() * step).max(step))
        });
        for (lo, hi) in [x, y] {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(PlotError::BadBounds(lo, hi));
            }
        }
        Ok(Axes {
            x,
            y,
            area: PlotArea {
                left: MARGIN_LEFT,
                top: MARGIN_TOP,
                width: self.width - MARGIN_LEFT - MARGIN_RIGHT,
                height: self.height - MARGIN_TOP - MARGIN_BOTTOM,
            },
        })
    }
}

/// A 1, 2 or 5 × 10^k step giving roughly five to ten ticks over `span`.
fn nice_step(span: f64) -> f64 {
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    let m = if r <= 1.0 {
        1.0
    } else if r <= 2.0 {
        2.0
    } else if r <= 5.0 {
        5.0
    } else {
        10.0
    };
    m * mag
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = nice_step(hi - lo);
    let first = (lo / step - 1e-9).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn px(v: f64) -> String {
    format_fixed(v, 2)
}

fn tick_label(v: f64) -> String {
    let s = format_fixed(v, 2);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Renders one polyline per curve with a legend, and for every gain a dashed
/// line at its reference WER plus an arrow from the reference SNR to the
/// crossing labelled with the gain.
pub fn render_curves_svg(
    curves: &[WerCurve],
    gains: &[GainResult],
    opts: &PlotOptions,
) -> Result<String, PlotError> {
    let axes = opts.axes(curves)?;
    let a = axes.area;
    let mut s = String::new();
    let w = &mut s;
    // writing into a String cannot fail
    let _ = writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="12">"#,
        px(opts.width),
        px(opts.height),
        px(opts.width),
        px(opts.height)
    );
    let _ = writeln!(
        w,
        r#"<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7" markerHeight="7" orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="black"/></marker></defs>"#
    );
    let _ = writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if let Some(title) = &opts.title {
        let _ = writeln!(
            w,
            r#"<text class="title" x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            px(a.left + a.width / 2.0),
            escape(title)
        );
    }

    let _ = writeln!(w, r#"<g class="axes" stroke="black" fill="none">"#);
    let _ = writeln!(
        w,
        r#"<rect x="{}" y="{}" width="{}" height="{}"/>"#,
        px(a.left),
        px(a.top),
        px(a.width),
        px(a.height)
    );
    let _ = writeln!(w, "</g>");
    let _ = writeln!(w, r#"<g class="ticks">"#);
    let bottom = a.top + a.height;
    for t in ticks(axes.x.0, axes.x.1) {
        let (x, _) = axes.map(t, axes.y.0);
        let _ = writeln!(
            w,
            r##"<line x1="{x}" y1="{b}" x2="{x}" y2="{t}" stroke="#dddddd"/><text x="{x}" y="{l}" text-anchor="middle">{v}</text>"##,
            x = px(x),
            b = px(bottom),
            t = px(a.top),
            l = px(bottom + 16.0),
            v = tick_label(t)
        );
    }
    for t in ticks(axes.y.0, axes.y.1) {
        let (_, y) = axes.map(axes.x.0, t);
        let _ = writeln!(
            w,
            r##"<line x1="{l}" y1="{y}" x2="{r}" y2="{y}" stroke="#dddddd"/><text x="{tx}" y="{ty}" text-anchor="end">{v}</text>"##,
            l = px(a.left),
            r = px(a.left + a.width),
            y = px(y),
            tx = px(a.left - 6.0),
            ty = px(y + 4.0),
            v = tick_label(t)
        );
    }
    let _ = writeln!(w, "</g>");
    let _ = writeln!(
        w,
        r#"<text class="xlabel" x="{}" y="{}" text-anchor="middle">SNR (dB)</text>"#,
        px(a.left + a.width / 2.0),
        px(opts.height - 10.0)
    );
    let _ = writeln!(
        w,
        r#"<text class="ylabel" x="16" y="{y}" text-anchor="middle" transform="rotate(-90 16 {y})">WER (%)</text>"#,
        y = px(a.top + a.height / 2.0)
    );

    let _ = writeln!(w, r#"<g class="curves" fill="none" stroke-width="2">"#);
    for (i, c) in curves.iter().enumerate() {
        let pts: Vec<String> = c
            .points()
            .iter()
            .map(|p| {
                let (x, y) = axes.map(p.snr_db, p.wer);
                format!("{},{}", px(x), px(y))
            })
            .collect();
        let _ = writeln!(
            w,
            r#"<polyline stroke="{}" points="{}"><title>{}</title></polyline>"#,
            PALETTE[i % PALETTE.len()],
            pts.join(" "),
            escape(c.label())
        );
    }
    let _ = writeln!(w, "</g>");

    if !gains.is_empty() {
        let _ = writeln!(w, r#"<g class="gains" stroke="black">"#);
        for g in gains {
            let (x_ref, y) = axes.map(g.ref_snr_db, g.ref_wer);
            let (x_cross, _) = axes.map(g.crossing_snr_db, g.ref_wer);
            let label = if g.bounded {
                format!("&gt;= {} dB", format_fixed(g.gain_db, 1))
            } else {
                format!("{} dB", format_fixed(g.gain_db, 1))
            };
            let _ = writeln!(
                w,
                r#"<line class="ref" x1="{}" y1="{y}" x2="{}" y2="{y}" stroke-dasharray="5,4"/>"#,
                px(a.left),
                px(a.left + a.width),
                y = px(y)
            );
            let _ = writeln!(
                w,
                r#"<line class="gain" x1="{}" y1="{y}" x2="{}" y2="{y}" stroke-width="1.5" marker-end="url(#arrow)"/>"#,
                px(x_ref),
                px(x_cross),
                y = px(y)
            );
            let _ = writeln!(
                w,
                r#"<text x="{}" y="{}" text-anchor="middle" stroke="none">{}</text>"#,
                px((x_ref + x_cross) / 2.0),
                px(y - 6.0),
                label
            );
        }
        let _ = writeln!(w, "</g>");
    }

    let _ = writeln!(w, r#"<g class="legend">"#);
    let lx = a.left + a.width + 16.0;
    for (i, c) in curves.iter().enumerate() {
        let ly = a.top + 12.0 + 20.0 * i as f64;
        let _ = writeln!(
            w,
            r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            px(lx),
            px(lx + 24.0),
            PALETTE[i % PALETTE.len()],
            px(lx + 30.0),
            px(ly + 4.0),
            escape(c.label()),
            y = px(ly)
        );
    }
    let _ = writeln!(w, "</g>");
    let _ = writeln!(w, "</svg>");
    Ok(s)
}
