use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub label: String,
    /// `(data_passes, gap)`; nonpositive gaps are not drawn.
    pub points: Vec<(f64, f64)>,
}

/// Axis ranges in data units; the y range is in `log10(gap)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotLayout {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

const W: f64 = 800.0;
const H: f64 = 500.0;
const PAD_L: f64 = 70.0;
const PAD_R: f64 = 160.0;
const PAD_T: f64 = 20.0;
const PAD_B: f64 = 50.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let span = hi - lo;
    let span = if span > 0.0 { span } else { lo.abs().max(1.0) };
    (lo - 0.05 * span, hi + 0.05 * span)
}

/// Writes an SVG of `log10(gap)` against data passes, one polyline per series.
pub fn emit_plot_svg(series: &[PlotSeries], path: impl AsRef<Path>) -> Result<PlotLayout> {
    let drawn: Vec<(&str, Vec<(f64, f64)>)> = series
        .iter()
        .map(|s| {
            let pts = s
                .points
                .iter()
                .filter(|(x, y)| x.is_finite() && *y > 0.0 && y.is_finite())
                .map(|(x, y)| (*x, y.log10()))
                .collect::<Vec<_>>();
            (s.label.as_str(), pts)
        })
        .filter(|(_, pts)| !pts.is_empty())
        .collect();
    if drawn.is_empty() {
        return Err(Error::invalid("nothing to plot: no series with positive values"));
    }
    let all = drawn.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in all {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    let (x_min, x_max) = padded(x0, x1);
    let (y_min, y_max) = padded(y0, y1);
    let layout = PlotLayout { x_min, x_max, y_min, y_max };

    let sx = |x: f64| PAD_L + (x - x_min) / (x_max - x_min) * (W - PAD_L - PAD_R);
    let sy = |y: f64| H - PAD_B - (y - y_min) / (y_max - y_min) * (H - PAD_T - PAD_B);
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let (ax0, ax1, ay0, ay1) = (sx(x_min), sx(x_max), sy(y_min), sy(y_max));
    let _ = writeln!(svg, r#"<path d="M{ax0:.2},{ay1:.2} L{ax0:.2},{ay0:.2} L{ax1:.2},{ay0:.2}" stroke="black" fill="none"/>"#);
    for i in 0..=4 {
        let fx = x_min + (x_max - x_min) * i as f64 / 4.0;
        let fy = y_min + (y_max - y_min) * i as f64 / 4.0;
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{fx:.3}</text>"#, sx(fx), ay0 + 18.0);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{fy:.2}</text>"#, ax0 - 6.0, sy(fy) + 4.0);
    }
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">data passes</text>"#, (ax0 + ax1) / 2.0, H - 8.0);
    let _ = writeln!(svg, r#"<text x="16" y="{:.2}" transform="rotate(-90 16 {:.2})" text-anchor="middle">log10 gap</text>"#, (ay0 + ay1) / 2.0, (ay0 + ay1) / 2.0);
    for (i, (label, pts)) in drawn.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
        let _ = writeln!(svg, r#"<polyline class="series" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, coords.join(" "));
        let ly = PAD_T + 16.0 * (i as f64 + 1.0);
        let _ = writeln!(svg, r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#, W - PAD_R + 10.0, W - PAD_R + 30.0);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, W - PAD_R + 36.0, ly + 4.0, escape(label));
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg)?;
    Ok(layout)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Series from a trace or mean-trace CSV, one per `algorithm` value. The gap is the
/// `criterion` column when filled, else `objective_at_avg - f_star` (or the raw
/// objective when no `f_star` is given).
pub fn read_plot_series<R: Read>(input: R, f_star: Option<f64>) -> Result<Vec<PlotSeries>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers().map_err(|e| Error::Parse { line: 1, message: e.to_string() })?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let need = |name: &str| col(name).ok_or_else(|| Error::Parse { line: 1, message: format!("missing column `{name}`") });
    let (ai, xi, oi) = (need("algorithm")?, need("data_passes")?, need("objective_at_avg")?);
    let ci = col("criterion");
    let mut by_alg: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut order = Vec::new();
    for (no, rec) in reader.records().enumerate() {
        let line = no + 2;
        let rec = rec.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Parse { line, message: format!("`{s}` is not a number") });
        let x = num(&rec[xi])?;
        let y = match ci.map(|c| &rec[c]).filter(|s| !s.is_empty()) {
            Some(c) => num(c)?,
            None => num(&rec[oi])? - f_star.unwrap_or(0.0),
        };
        let alg = rec[ai].to_string();
        if !by_alg.contains_key(&alg) {
            order.push(alg.clone());
        }
        by_alg.entry(alg).or_default().push((x, y));
    }
    Ok(order.into_iter().map(|label| PlotSeries { points: by_alg.remove(&label).unwrap_or_default(), label }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_series_two_polylines_and_margins() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.svg");
        let series = vec![
            PlotSeries { label: "a".into(), points: vec![(0.0, 1.0), (10.0, 1e-4)] },
            PlotSeries { label: "b".into(), points: vec![(2.0, 0.1), (20.0, 1e-2), (30.0, -1.0)] },
        ];
        let l = emit_plot_svg(&series, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.matches("<polyline").count(), 2);
        // x data 0..20, y data -4..0
        assert!((l.x_min - -1.0).abs() < 1e-12 && (l.x_max - 21.0).abs() < 1e-12);
        assert!((l.y_min - -4.2).abs() < 1e-12 && (l.y_max - 0.2).abs() < 1e-12);
    }

    #[test]
    fn empty_input_is_an_error_and_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.svg");
        assert!(emit_plot_svg(&[], &path).is_err());
        assert!(!path.exists());
        let flat = vec![PlotSeries { label: "a".into(), points: vec![(1.0, 0.0)] }];
        assert!(emit_plot_svg(&flat, &path).is_err());
        assert!(!path.exists());
    }

    #[test]
    fn series_from_csv() {
        let text = "algorithm,data_passes,objective_at_avg,criterion\nx,1,2.0,\nx,2,1.5,\ny,1,3,0.5\n";
        let s = read_plot_series(text.as_bytes(), Some(1.0)).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].points, vec![(1.0, 1.0), (2.0, 0.5)]);
        assert_eq!(s[1].points, vec![(1.0, 0.5)]);
    }
}
