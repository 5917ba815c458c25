//! Static line chart of actual (red) against predicted (blue) values.

use std::fmt::Write as _;

use chrono::NaiveDate;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

pub const ACTUAL_COLOR: &str = "red";
pub const PREDICTED_COLOR: &str = "blue";

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Plot coordinates for `values`, evenly spaced along x, `lo..hi` mapped onto
/// the plot height.
fn points(values: &[f64], lo: f64, hi: f64) -> String {
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let n = values.len();
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let x = if n == 1 {
                LEFT + plot_w / 2.0
            } else {
                LEFT + plot_w * i as f64 / (n - 1) as f64
            };
            let y = TOP + plot_h * (1.0 - (v - lo) / (hi - lo));
            format!("{x:.2},{y:.2}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Renders the chart. Output depends only on the arguments.
pub fn render(title: &str, dates: &[NaiveDate], actual: &[f64], predicted: &[f64]) -> String {
    assert_eq!(dates.len(), actual.len());
    assert_eq!(dates.len(), predicted.len());
    let (mut lo, mut hi) = actual
        .iter()
        .chain(predicted)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
            (l.min(v), h.max(v))
        });
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        // Flat or empty series: give the axis some height.
        let mid = if lo.is_finite() { lo } else { 0.0 };
        lo = mid - 1.0;
        hi = mid + 1.0;
    }
    let bottom = HEIGHT - BOTTOM;
    let right = WIDTH - RIGHT;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, "<title>{}</title>", escape(title));
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{bottom}" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        LEFT - 6.0,
        TOP + 4.0,
        fmt_value(hi)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        LEFT - 6.0,
        bottom + 4.0,
        fmt_value(lo)
    );
    if let (Some(first), Some(last)) = (dates.first(), dates.last()) {
        let _ = writeln!(
            s,
            r#"<text x="{LEFT}" y="{}" text-anchor="start">{first}</text>"#,
            bottom + 18.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{right}" y="{}" text-anchor="end">{last}</text>"#,
            bottom + 18.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">date</text>"#,
        (LEFT + right) / 2.0,
        HEIGHT - 12.0
    );
    let mid_y = (TOP + bottom) / 2.0;
    let _ = writeln!(
        s,
        r#"<text x="20" y="{mid_y}" text-anchor="middle" transform="rotate(-90 20 {mid_y})">value</text>"#
    );

    let _ = writeln!(
        s,
        r#"<polyline class="actual" fill="none" stroke="{ACTUAL_COLOR}" stroke-width="1.5" points="{}"/>"#,
        points(actual, lo, hi)
    );
    let _ = writeln!(
        s,
        r#"<polyline class="predicted" fill="none" stroke="{PREDICTED_COLOR}" stroke-width="1.5" points="{}"/>"#,
        points(predicted, lo, hi)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" fill="{ACTUAL_COLOR}" text-anchor="end">actual</text>"#,
        right - 80.0,
        TOP - 8.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{right}" y="{}" fill="{PREDICTED_COLOR}" text-anchor="end">predicted</text>"#,
        TOP - 8.0
    );
    s.push_str("</svg>\n");
    s
}

fn fmt_value(v: f64) -> String {
    if v.abs() >= 1e5 || (v != 0.0 && v.abs() < 1e-3) {
        format!("{v:.3e}")
    } else {
        format!("{v:.3}")
    }
}
