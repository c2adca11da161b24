//! Self-contained SVG line plots.

use std::fmt::Write;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Plots each series as a polyline with markers. With `log_y` the y axis is
/// base-10 logarithmic and non-positive points are dropped.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, log_y: bool, series: &[Series]) -> String {
    let ty = |y: f64| if log_y { y.log10() } else { y };
    let keep = |&&(_, y): &&(f64, f64)| !log_y || y > 0.0;
    let (x0, x1) = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (mut y0, mut y1) = bounds(series.iter().flat_map(|s| s.points.iter().filter(keep).map(|p| ty(p.1))));
    if log_y {
        y0 = y0.floor();
        y1 = y1.ceil().max(y0 + 1.0);
    }
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let py = |y: f64| H - BOTTOM - (ty(y) - y0) / (y1 - y0) * (H - TOP - BOTTOM);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{title}</text>"#, (LEFT + W - RIGHT) / 2.0).unwrap();
    let (bx, by) = (H - BOTTOM, W - RIGHT);
    writeln!(s, r#"<path d="M{LEFT},{TOP} V{bx} H{by}" fill="none" stroke="black"/>"#).unwrap();

    let xticks: Vec<f64> = if x1 - x0 <= 20.0 {
        (x0.ceil() as i64..=x1.floor() as i64).map(|v| v as f64).collect()
    } else {
        (0..=5).map(|i| x0 + (x1 - x0) * i as f64 / 5.0).collect()
    };
    for x in xticks {
        let p = px(x);
        writeln!(s, r#"<line x1="{p:.1}" y1="{bx}" x2="{p:.1}" y2="{}" stroke="black"/>"#, bx + 5.0).unwrap();
        writeln!(s, r#"<text x="{p:.1}" y="{}" text-anchor="middle">{x}</text>"#, bx + 18.0).unwrap();
    }
    let yticks: Vec<f64> = if log_y {
        (y0 as i64..=y1 as i64).map(|e| 10f64.powi(e as i32)).collect()
    } else {
        (0..=5).map(|i| y0 + (y1 - y0) * i as f64 / 5.0).collect()
    };
    for y in yticks {
        let p = py(y);
        let label = if log_y { format!("1e{}", y.log10().round()) } else { format!("{y:.1}") };
        writeln!(s, r#"<line x1="{}" y1="{p:.1}" x2="{LEFT}" y2="{p:.1}" stroke="black"/>"#, LEFT - 5.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{label}</text>"#, LEFT - 8.0, p + 4.0).unwrap();
    }
    writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{xlabel}</text>"#, (LEFT + by) / 2.0, H - 10.0).unwrap();
    writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{ylabel}</text>"#,
        (TOP + bx) / 2.0,
        (TOP + bx) / 2.0
    )
    .unwrap();

    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = ser.points.iter().filter(keep).map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y))).collect();
        writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, pts.join(" ")).unwrap();
        for p in &pts {
            let (cx, cy) = p.split_once(',').unwrap();
            writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>"#).unwrap();
        }
        let ly = TOP + 10.0 + 20.0 * i as f64;
        writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, by + 15.0, by + 35.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, by + 40.0, ly + 4.0, ser.label).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_plot_drops_zero_rates() {
        let series = [Series {
            label: "fbs".into(),
            points: vec![(5.0, 1e-3), (9.0, 1e-4), (13.0, 0.0)],
        }];
        let svg = line_plot("t", "d", "rate", true, &series);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.contains(">1e-4<") && svg.contains(">1e-3<"));
    }

    #[test]
    fn empty_plot_is_valid() {
        let svg = line_plot("t", "d", "distance", false, &[]);
        assert!(svg.contains("</svg>"));
    }
}
