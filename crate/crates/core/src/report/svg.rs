//! Static grouped bar charts. No scripting, no external resources.

use std::fmt::Write as _;

const PALETTE: [&str; 4] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759"];
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 60.0;
const MARGIN_BOTTOM: f64 = 120.0;
const PLOT_HEIGHT: f64 = 300.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

impl Series {
    pub fn new(name: &str, values: Vec<f64>) -> Self {
        Self { name: name.to_string(), values }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Smallest 1/2/5 x 10^k step giving at most five ticks up to `max`.
fn tick_step(max: f64) -> f64 {
    let raw = max / 5.0;
    let p = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * p).find(|s| *s >= raw).unwrap_or(10.0 * p)
}

/// One `<g class="group">` per entry of `groups`, one bar per series inside
/// it. Non-finite and negative values draw as empty bars. `description`
/// goes into the `<desc>` element.
pub fn bar_chart(title: &str, y_label: &str, groups: &[String], series: &[Series], description: &str) -> String {
    assert!(series.iter().all(|s| s.values.len() == groups.len()), "series length mismatch");
    let bar_w = if groups.len() > 12 { 8.0 } else { 24.0 };
    let gap = bar_w;
    let group_w = bar_w * series.len().max(1) as f64 + gap;
    let plot_w = (group_w * groups.len() as f64).max(480.0);
    let width = MARGIN_LEFT + plot_w + MARGIN_RIGHT;
    let height = MARGIN_TOP + PLOT_HEIGHT + MARGIN_BOTTOM;

    let max = series
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let step = if max > 0.0 { tick_step(max) } else { 1.0 };
    let top = (max / step).ceil().max(1.0) * step;
    let y = |v: f64| MARGIN_TOP + PLOT_HEIGHT * (1.0 - v / top);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = writeln!(out, "<desc>{}</desc>", escape(description));
    let _ = writeln!(out, r##"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="#ffffff"/>"##);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="24" font-size="15" text-anchor="middle">{}</text>"#,
        width / 2.0,
        escape(title)
    );

    // axes and gridlines
    let mut t = 0.0;
    while t <= top + step * 1e-9 {
        let ty = y(t);
        let _ = writeln!(
            out,
            r##"<line x1="{MARGIN_LEFT}" y1="{ty:.2}" x2="{:.2}" y2="{ty:.2}" stroke="#dddddd"/>"##,
            MARGIN_LEFT + plot_w
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 6.0,
            ty + 4.0,
            format_tick(t, step)
        );
        t += step;
    }
    let _ = writeln!(
        out,
        r##"<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{:.2}" stroke="#333333"/>"##,
        MARGIN_TOP + PLOT_HEIGHT
    );
    let _ = writeln!(
        out,
        r##"<line x1="{MARGIN_LEFT}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#333333"/>"##,
        MARGIN_TOP + PLOT_HEIGHT,
        MARGIN_LEFT + plot_w,
        MARGIN_TOP + PLOT_HEIGHT
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        MARGIN_TOP + PLOT_HEIGHT / 2.0,
        MARGIN_TOP + PLOT_HEIGHT / 2.0,
        escape(y_label)
    );

    for (g, label) in groups.iter().enumerate() {
        let x0 = MARGIN_LEFT + group_w * g as f64 + gap / 2.0;
        let _ = writeln!(out, r#"<g class="group" data-label="{}">"#, escape(label));
        for (s, ser) in series.iter().enumerate() {
            let v = ser.values[g];
            let shown = if v.is_finite() { v.max(0.0) } else { 0.0 };
            let x = x0 + bar_w * s as f64;
            let _ = writeln!(
                out,
                r#"<rect x="{x:.2}" y="{:.2}" width="{bar_w:.2}" height="{:.2}" fill="{}"><title>{}: {}</title></rect>"#,
                y(shown),
                MARGIN_TOP + PLOT_HEIGHT - y(shown),
                PALETTE[s % PALETTE.len()],
                escape(&ser.name),
                v
            );
        }
        let lx = x0 + bar_w * series.len() as f64 / 2.0;
        let ly = MARGIN_TOP + PLOT_HEIGHT + 12.0;
        let _ = writeln!(
            out,
            r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="end" transform="rotate(-45 {lx:.2} {ly:.2})">{}</text>"#,
            escape(label)
        );
        out += "</g>\n";
    }

    for (s, ser) in series.iter().enumerate() {
        let lx = MARGIN_LEFT + 10.0 + 170.0 * s as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{lx:.1}" y="36" width="10" height="10" fill="{}"/><text x="{:.1}" y="45">{}</text>"#,
            PALETTE[s % PALETTE.len()],
            lx + 14.0,
            escape(&ser.name)
        );
    }
    out += "</svg>\n";
    out
}

fn format_tick(v: f64, step: f64) -> String {
    let decimals = if step >= 1.0 { 0 } else { (-step.log10().floor()) as usize };
    format!("{v:.decimals$}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks() {
        assert_eq!(tick_step(17.5), 5.0);
        assert_eq!(tick_step(1.0), 0.2);
        assert_eq!(tick_step(100.0), 20.0);
        assert_eq!(format_tick(0.4, 0.2), "0.4");
    }

    #[test]
    fn groups_and_escaping() {
        let svg = bar_chart(
            "a <b>",
            "y",
            &["x&y".into(), "z".into()],
            &[Series::new("s", vec![1.0, f64::NAN])],
            "{\"k\":1}",
        );
        assert_eq!(svg.matches(r#"<g class="group""#).count(), 2);
        assert!(svg.contains("a &lt;b&gt;"));
        assert!(svg.contains("x&amp;y"));
        assert!(!svg.contains("<script"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
