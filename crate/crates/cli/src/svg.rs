//! Static SVG heatmap of `log10 g²(0)` over a 2-D sweep.

use std::fmt::Write as _;

use magnon_core::experiments::{Channel, SweepGrid};

use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct HeatmapStyle {
    pub plot_width: f64,
    pub plot_height: f64,
    /// Numeric when the grid has it, analytic otherwise.
    pub channel: Option<Channel>,
    pub title: Option<String>,
}

impl Default for HeatmapStyle {
    fn default() -> Self {
        Self {
            plot_width: 480.0,
            plot_height: 480.0,
            channel: None,
            title: None,
        }
    }
}

const LEFT: f64 = 80.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const BAR_GAP: f64 = 30.0;
const BAR_WIDTH: f64 = 20.0;
const RIGHT: f64 = 80.0;
const MISSING: &str = "#bdbdbd";

/// Viridis anchors, evenly spaced on [0, 1].
const PALETTE: [(u8, u8, u8); 5] = [
    (68, 1, 84),
    (59, 82, 139),
    (33, 145, 140),
    (94, 201, 98),
    (253, 231, 37),
];

fn color(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.5 };
    let x = t * (PALETTE.len() - 1) as f64;
    let k = (x.floor() as usize).min(PALETTE.len() - 2);
    let f = x - k as f64;
    let mix = |a: u8, b: u8| (a as f64 + f * (b as f64 - a as f64)).round() as u8;
    let (a, b) = (PALETTE[k], PALETTE[k + 1]);
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Position of `x` in index units along monotone `values`.
fn fractional_index(values: &[f64], x: f64) -> f64 {
    let n = values.len();
    let inc = values[n - 1] > values[0];
    for k in 0..n - 1 {
        let (a, b) = (values[k], values[k + 1]);
        let inside = if inc { x >= a && x <= b } else { x <= a && x >= b };
        if inside {
            return k as f64 + (x - a) / (b - a);
        }
    }
    if (x - values[0]).abs() <= (x - values[n - 1]).abs() {
        0.0
    } else {
        (n - 1) as f64
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_heatmap(grid: &SweepGrid, style: &HeatmapStyle) -> Result<String, CliError> {
    let Some(axis2) = grid.axis2.as_ref() else {
        return Err(CliError::Usage(
            "heatmaps need a 2-D sweep; write the 1-D result as CSV and plot it as a line".into(),
        ));
    };
    let channel = match style.channel {
        Some(Channel::Both) | None => {
            if grid.channel.numeric() {
                Channel::Numeric
            } else {
                Channel::Analytic
            }
        }
        Some(c) => c,
    };
    let (n1, n2) = grid.shape();
    let logs: Vec<Option<f64>> = grid
        .values(channel)
        .into_iter()
        .map(|v| v.filter(|x| *x > 0.0 && x.is_finite()).map(f64::log10))
        .collect();
    let present: Vec<f64> = logs.iter().flatten().copied().collect();
    let lo = present.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = present.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let scale = |v: f64| if span > 0.0 { (v - lo) / span } else { 0.5 };

    let (w, h) = (style.plot_width, style.plot_height);
    let (cw, ch) = (w / n1 as f64, h / n2 as f64);
    let total_w = LEFT + w + BAR_GAP + BAR_WIDTH + RIGHT;
    let total_h = TOP + h + BOTTOM;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{total_w}" height="{total_h}" viewBox="0 0 {total_w} {total_h}" font-family="sans-serif" font-size="12">"#
    );
    if let Some(t) = &style.title {
        let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, LEFT + w / 2.0, escape(t));
    }

    let _ = writeln!(s, r#"<g class="cells" shape-rendering="crispEdges">"#);
    for i in 0..n1 {
        for j in 0..n2 {
            let fill = logs[i * n2 + j].map_or(MISSING.to_string(), |v| color(scale(v)));
            let x = LEFT + i as f64 * cw;
            let y = TOP + h - (j + 1) as f64 * ch;
            let _ = writeln!(
                s,
                r#"<rect class="cell" x="{x:.3}" y="{y:.3}" width="{cw:.3}" height="{ch:.3}" fill="{fill}"/>"#
            );
        }
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{w}" height="{h}" fill="none" stroke="black"/>"#
    );

    let (x0, x1) = (grid.axis1.values[0], grid.axis1.values[n1 - 1]);
    let (y0, y1) = (axis2.values[0], axis2.values[n2 - 1]);
    let base = TOP + h;
    for (x, v) in [(LEFT + cw / 2.0, x0), (LEFT + w - cw / 2.0, x1)] {
        let _ = writeln!(s, r#"<text x="{x:.3}" y="{}" text-anchor="middle">{v}</text>"#, base + 16.0);
    }
    for (y, v) in [(base - ch / 2.0, y0), (TOP + ch / 2.0, y1)] {
        let _ = writeln!(s, r#"<text x="{}" y="{y:.3}" text-anchor="end" dominant-baseline="middle">{v}</text>"#, LEFT - 6.0);
    }
    let _ = writeln!(
        s,
        r#"<text class="axis-label" x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + w / 2.0,
        base + 40.0,
        grid.axis1.axis.name()
    );
    let _ = writeln!(
        s,
        r#"<text class="axis-label" x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
        TOP + h / 2.0,
        TOP + h / 2.0,
        axis2.axis.name()
    );

    let bx = LEFT + w + BAR_GAP;
    let _ = writeln!(s, r#"<defs><linearGradient id="colorbar" x1="0" y1="1" x2="0" y2="0">"#);
    if span > 0.0 {
        for k in 0..PALETTE.len() {
            let t = k as f64 / (PALETTE.len() - 1) as f64;
            let _ = writeln!(s, r#"<stop offset="{t}" stop-color="{}"/>"#, color(t));
        }
    } else {
        let _ = writeln!(s, r#"<stop offset="0" stop-color="{}"/>"#, color(0.5));
    }
    let _ = writeln!(s, "</linearGradient></defs>");
    let _ = writeln!(
        s,
        r#"<rect class="colorbar" x="{bx}" y="{TOP}" width="{BAR_WIDTH}" height="{h}" fill="url(#colorbar)" stroke="black"/>"#
    );
    if present.is_empty() {
        let _ = writeln!(s, r#"<text x="{}" y="{}">no data</text>"#, bx + BAR_WIDTH + 4.0, TOP + h / 2.0);
    } else {
        let _ = writeln!(s, r#"<text x="{}" y="{}" dominant-baseline="middle">{hi:.3}</text>"#, bx + BAR_WIDTH + 4.0, TOP);
        let _ = writeln!(s, r#"<text x="{}" y="{}" dominant-baseline="middle">{lo:.3}</text>"#, bx + BAR_WIDTH + 4.0, base);
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">log10 g2(0)</text>"#,
        bx + BAR_WIDTH / 2.0,
        TOP - 10.0
    );

    if let Some(m) = grid.minimum(channel) {
        let fx = fractional_index(&grid.axis1.values, m.refined.0);
        let fy = fractional_index(&axis2.values, m.refined.1.unwrap_or(axis2.values[m.index.1]));
        let px = LEFT + (fx + 0.5) * cw;
        let py = TOP + h - (fy + 0.5) * ch;
        let _ = writeln!(
            s,
            r#"<g class="crosshair" stroke="white" stroke-width="1.5" stroke-dasharray="6 4"><line x1="{px:.3}" y1="{TOP}" x2="{px:.3}" y2="{base}"/><line x1="{LEFT}" y1="{py:.3}" x2="{}" y2="{py:.3}"/></g>"#,
            LEFT + w
        );
    }
    let _ = writeln!(s, "</svg>");
    Ok(s)
}
