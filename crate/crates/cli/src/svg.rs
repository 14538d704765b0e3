//! Hand-emitted SVG renderings of profiles and attributions.
//!
//! No charting dependency: the files are built by string concatenation
//! with fixed formatting, so identical inputs give identical bytes. Fixed
//! viewBox `0 0 800 480`, axis ticks at round numbers.

use anyhow::{bail, Result};
use refx_core::{AttributionSet, Profile, ProfileKind};
use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 780.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 430.0;

const PALETTE: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Round tick positions covering `[lo, hi]` with a 1/2/5-decade step.
fn nice_ticks(lo: f64, hi: f64, target: usize) -> (Vec<f64>, usize) {
    let (lo, hi) = if lo == hi {
        (lo - 1.0, hi + 1.0)
    } else {
        (lo, hi)
    };
    let raw_step = (hi - lo) / target.max(2) as f64;
    let magnitude = 10f64.powf(raw_step.abs().log10().floor());
    let norm = raw_step / magnitude;
    let step = if norm <= 1.0 {
        magnitude
    } else if norm <= 2.0 {
        2.0 * magnitude
    } else if norm <= 5.0 {
        5.0 * magnitude
    } else {
        10.0 * magnitude
    };
    let decimals = (-step.log10().floor() as i64).max(0) as usize;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    let ticks = (first..=last).map(|k| k as f64 * step).collect();
    (ticks, decimals)
}

struct Canvas {
    svg: String,
}

impl Canvas {
    fn new() -> Self {
        let mut svg = String::new();
        let _ = write!(
            svg,
            r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="13">
<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>
"#
        );
        Canvas { svg }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        let _ = writeln!(
            self.svg,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="{width}"/>"#
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, content: &str) {
        let _ = writeln!(
            self.svg,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{}</text>"#,
            escape_xml(content)
        );
    }

    fn finish(mut self) -> Vec<u8> {
        self.svg.push_str("</svg>\n");
        self.svg.into_bytes()
    }
}

fn draw_axes(
    canvas: &mut Canvas,
    x_range: (f64, f64),
    y_range: (f64, f64),
    x_label: &str,
    y_label: &str,
) -> (impl Fn(f64) -> f64, impl Fn(f64) -> f64) {
    let (x_lo, x_hi) = if x_range.0 == x_range.1 {
        (x_range.0 - 1.0, x_range.1 + 1.0)
    } else {
        x_range
    };
    let (y_lo, y_hi) = if y_range.0 == y_range.1 {
        (y_range.0 - 1.0, y_range.1 + 1.0)
    } else {
        y_range
    };
    let to_x = move |v: f64| LEFT + (v - x_lo) / (x_hi - x_lo) * (RIGHT - LEFT);
    let to_y = move |v: f64| BOTTOM - (v - y_lo) / (y_hi - y_lo) * (BOTTOM - TOP);

    canvas.line(LEFT, BOTTOM, RIGHT, BOTTOM, "#333333", 1.0);
    canvas.line(LEFT, TOP, LEFT, BOTTOM, "#333333", 1.0);

    let (x_ticks, xd) = nice_ticks(x_lo, x_hi, 7);
    for t in &x_ticks {
        let x = to_x(*t);
        canvas.line(x, BOTTOM, x, BOTTOM + 5.0, "#333333", 1.0);
        canvas.text(x, BOTTOM + 20.0, "middle", &format!("{t:.*}", xd));
    }
    let (y_ticks, yd) = nice_ticks(y_lo, y_hi, 6);
    for t in &y_ticks {
        let y = to_y(*t);
        canvas.line(LEFT - 5.0, y, LEFT, y, "#333333", 1.0);
        canvas.text(LEFT - 8.0, y + 4.0, "end", &format!("{t:.*}", yd));
    }
    canvas.text((LEFT + RIGHT) / 2.0, HEIGHT - 10.0, "middle", x_label);
    canvas.text(14.0, TOP + 10.0, "start", y_label);
    (to_x, to_y)
}

/// Render one or more profile curves as polylines with a legend naming
/// each curve's reference (and instance for ICE curves).
pub fn profiles_svg(profiles: &[Profile]) -> Result<Vec<u8>> {
    if profiles.is_empty() {
        bail!("nothing to render: no profile curves");
    }
    let feature = &profiles[0].feature;
    let x_lo = profiles
        .iter()
        .flat_map(|p| p.grid.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let x_hi = profiles
        .iter()
        .flat_map(|p| p.grid.iter().copied())
        .fold(f64::NEG_INFINITY, f64::max);
    let y_lo = profiles
        .iter()
        .flat_map(|p| p.values.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let y_hi = profiles
        .iter()
        .flat_map(|p| p.values.iter().copied())
        .fold(f64::NEG_INFINITY, f64::max);

    let mut canvas = Canvas::new();
    let kind = match profiles[0].kind {
        ProfileKind::Pdp => "partial dependence",
        ProfileKind::Ale => "accumulated local effects",
        ProfileKind::Ice => "ceteris paribus",
    };
    let (to_x, to_y) = draw_axes(&mut canvas, (x_lo, x_hi), (y_lo, y_hi), feature, kind);

    for (i, profile) in profiles.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = profile
            .grid
            .iter()
            .zip(&profile.values)
            .map(|(&x, &y)| format!("{:.2},{:.2}", to_x(x), to_y(y)))
            .collect();
        let _ = writeln!(
            canvas.svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.8" points="{}"/>"#,
            points.join(" ")
        );
        let label = match profile.instance {
            Some(idx) => format!("{}[{idx}]", profile.reference_label),
            None => profile.reference_label.clone(),
        };
        let ly = TOP + 16.0 + i as f64 * 18.0;
        canvas.line(RIGHT - 150.0, ly - 4.0, RIGHT - 126.0, ly - 4.0, color, 2.0);
        canvas.text(RIGHT - 120.0, ly, "start", &label);
    }
    Ok(canvas.finish())
}

/// Render an attribution set as horizontal bars sorted by |contribution|,
/// positive bars growing right from the zero axis and negative bars left.
pub fn attribution_svg(set: &AttributionSet) -> Result<Vec<u8>> {
    if set.features.is_empty() {
        bail!("nothing to render: no attributions");
    }
    let mut order: Vec<usize> = (0..set.features.len()).collect();
    order.sort_by(|&a, &b| {
        set.contributions[b]
            .abs()
            .total_cmp(&set.contributions[a].abs())
            .then(a.cmp(&b))
    });

    let v_lo = set.contributions.iter().copied().fold(0.0f64, f64::min);
    let v_hi = set.contributions.iter().copied().fold(0.0f64, f64::max);
    let (v_lo, v_hi) = if v_lo == v_hi {
        (v_lo - 1.0, v_hi + 1.0)
    } else {
        (v_lo, v_hi)
    };
    let bar_left = 180.0f64;
    let scale = (RIGHT - bar_left) / (v_hi - v_lo);
    let x_zero = bar_left + (0.0 - v_lo) * scale;

    let mut canvas = Canvas::new();
    let n = order.len() as f64;
    let slot = ((BOTTOM - TOP - 30.0) / n).min(46.0);

    // round-number value ticks along the top
    let (ticks, decimals) = nice_ticks(v_lo, v_hi, 7);
    for t in &ticks {
        let x = bar_left + (t - v_lo) * scale;
        canvas.line(x, TOP, x, BOTTOM, "#eeeeee", 1.0);
        canvas.text(x, BOTTOM + 20.0, "middle", &format!("{t:.*}", decimals));
    }
    canvas.line(x_zero, TOP, x_zero, BOTTOM, "#333333", 1.0);

    for (row, &k) in order.iter().enumerate() {
        let value = set.contributions[k];
        let y = TOP + 10.0 + row as f64 * slot;
        let height = (slot - 8.0).max(6.0);
        let width = value.abs() * scale;
        let x = if value < 0.0 { x_zero - width } else { x_zero };
        let color = if value < 0.0 { "#d62728" } else { "#1f77b4" };
        let _ = writeln!(
            canvas.svg,
            r#"<rect class="bar" x="{x:.2}" y="{y:.2}" width="{width:.2}" height="{height:.2}" fill="{color}"/>"#
        );
        canvas.text(
            bar_left - 10.0,
            y + height / 2.0 + 4.0,
            "end",
            &set.features[k],
        );
    }

    let note = format!(
        "{}: baseline {}, prediction {} (reference: {}, n={})",
        set.method.tag(),
        trim_float(set.baseline),
        trim_float(set.prediction),
        set.reference_label,
        set.reference_rows
    );
    canvas.text(LEFT, HEIGHT - 10.0, "start", &note);
    Ok(canvas.finish())
}

fn trim_float(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v:.4}")
    }
}
