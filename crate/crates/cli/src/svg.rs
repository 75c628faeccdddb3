//! Hand-rolled SVG plots: line charts (optionally log-scale in y) and
//! space-time heatmaps.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e-3 && v.abs() < 1e4 {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

fn range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if lo > hi {
        return None;
    }
    if lo == hi {
        let pad = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
        return Some((lo - pad, hi + pad));
    }
    Some((lo, hi))
}

fn header(out: &mut String, title: &str) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    )
    .unwrap();
}

fn axis_labels(out: &mut String, xlabel: &str, ylabel: &str) {
    writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
        HEIGHT - 15.0,
        escape(xlabel)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="18" y="{y}" text-anchor="middle" transform="rotate(-90 18 {y})">{}</text>"#,
        escape(ylabel),
        y = TOP + (HEIGHT - TOP - BOTTOM) / 2.0
    )
    .unwrap();
}

/// Line chart of one or more series. With `log_y`, nonpositive values are
/// dropped and ticks sit at powers of ten.
pub fn line_plot(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[Series],
    log_y: bool,
) -> String {
    let ty = |y: f64| if log_y { y.log10() } else { y };
    let keep = |&(x, y): &(f64, f64)| x.is_finite() && y.is_finite() && (!log_y || y > 0.0);
    let (x0, x1) = range(
        series
            .iter()
            .flat_map(|s| s.points.iter().filter(|p| keep(p)).map(|p| p.0)),
    )
    .unwrap_or((0.0, 1.0));
    let (mut y0, mut y1) = range(
        series
            .iter()
            .flat_map(|s| s.points.iter().filter(|p| keep(p)).map(|p| ty(p.1))),
    )
    .unwrap_or((0.0, 1.0));
    if log_y {
        y0 = y0.floor();
        y1 = y1.ceil().max(y0 + 1.0);
    }
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut out = String::new();
    header(&mut out, title);
    writeln!(
        out,
        r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
    )
    .unwrap();
    for i in 0..=5 {
        let x = x0 + (x1 - x0) * i as f64 / 5.0;
        writeln!(
            out,
            r##"<line x1="{p}" y1="{b}" x2="{p}" y2="{b2}" stroke="#333"/><text x="{p}" y="{t}" text-anchor="middle">{}</text>"##,
            fmt_tick(x),
            p = sx(x),
            b = TOP + ph,
            b2 = TOP + ph + 5.0,
            t = TOP + ph + 18.0
        )
        .unwrap();
    }
    let y_ticks: Vec<f64> = if log_y {
        let step = ((y1 - y0) / 8.0).ceil().max(1.0);
        let mut v = Vec::new();
        let mut e = y0;
        while e <= y1 + 1e-9 {
            v.push(e);
            e += step;
        }
        v
    } else {
        (0..=5).map(|i| y0 + (y1 - y0) * i as f64 / 5.0).collect()
    };
    for y in y_ticks {
        let label = if log_y {
            format!("1e{}", y as i64)
        } else {
            fmt_tick(y)
        };
        writeln!(
            out,
            r##"<line x1="{l}" y1="{p}" x2="{l2}" y2="{p}" stroke="#333"/><line x1="{LEFT}" y1="{p}" x2="{r}" y2="{p}" stroke="#ddd"/><text x="{t}" y="{p4}" text-anchor="end">{label}</text>"##,
            l = LEFT - 5.0,
            l2 = LEFT,
            r = LEFT + pw,
            p = sy(y),
            p4 = sy(y) + 4.0,
            t = LEFT - 8.0
        )
        .unwrap();
    }
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| keep(p))
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(ty(y))))
            .collect();
        writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        )
        .unwrap();
        if series.len() > 1 {
            let ly = TOP + 14.0 + 16.0 * i as f64;
            writeln!(
                out,
                r#"<line x1="{a}" y1="{ly}" x2="{b}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{c}" y="{t}">{}</text>"#,
                escape(&s.label),
                a = LEFT + pw - 120.0,
                b = LEFT + pw - 100.0,
                c = LEFT + pw - 95.0,
                t = ly + 4.0
            )
            .unwrap();
        }
    }
    axis_labels(&mut out, xlabel, ylabel);
    out.push_str("</svg>\n");
    out
}

/// Monotone purple-to-yellow colour map on `[0, 1]`.
pub fn colour(s: f64) -> (u8, u8, u8) {
    const STOPS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let s = if s.is_finite() {
        s.clamp(0.0, 1.0)
    } else {
        0.0
    };
    let pos = s * (STOPS.len() - 1) as f64;
    let i = (pos.floor() as usize).min(STOPS.len() - 2);
    let f = pos - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |u: f64, v: f64| (u + (v - u) * f).round() as u8;
    (mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Heatmap of `values[t][i]` with space on the horizontal axis and time
/// increasing upward.
pub fn heatmap(title: &str, xs: &[f64], ts: &[f64], values: &[Vec<f64>]) -> String {
    let (lo, hi) = range(values.iter().flatten().copied()).unwrap_or((0.0, 1.0));
    let pw = WIDTH - LEFT - RIGHT - 60.0;
    let ph = HEIGHT - TOP - BOTTOM;
    let cw = pw / xs.len().max(1) as f64;
    let chh = ph / ts.len().max(1) as f64;
    let mut out = String::new();
    header(&mut out, title);
    for (j, row) in values.iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            let (r, g, b) = colour((v - lo) / (hi - lo));
            writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({r},{g},{b})"/>"#,
                LEFT + i as f64 * cw,
                TOP + ph - (j + 1) as f64 * chh,
                cw + 0.3,
                chh + 0.3
            )
            .unwrap();
        }
    }
    writeln!(
        out,
        r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
    )
    .unwrap();
    if let (Some(a), Some(b)) = (xs.first(), xs.last()) {
        for (x, v) in [(LEFT, a), (LEFT + pw, b)] {
            writeln!(
                out,
                r#"<text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
                TOP + ph + 18.0,
                fmt_tick(*v)
            )
            .unwrap();
        }
    }
    if let (Some(a), Some(b)) = (ts.first(), ts.last()) {
        for (y, v) in [(TOP + ph, a), (TOP, b)] {
            writeln!(
                out,
                r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
                LEFT - 8.0,
                y + 4.0,
                fmt_tick(*v)
            )
            .unwrap();
        }
    }
    // colour bar
    let bx = LEFT + pw + 20.0;
    for k in 0..50 {
        let (r, g, b) = colour(k as f64 / 49.0);
        writeln!(
            out,
            r#"<rect x="{bx}" y="{:.2}" width="14" height="{:.2}" fill="rgb({r},{g},{b})"/>"#,
            TOP + ph - (k + 1) as f64 * ph / 50.0,
            ph / 50.0 + 0.3
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{}" y="{}">{}</text>"#,
        bx,
        TOP + ph + 18.0,
        fmt_tick(lo)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="{}">{}</text>"#,
        bx,
        TOP - 6.0,
        fmt_tick(hi)
    )
    .unwrap();
    axis_labels(&mut out, "x", "t");
    out.push_str("</svg>\n");
    out
}
