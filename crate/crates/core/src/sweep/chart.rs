//! SVG line charts of risk against the swept bound.

use std::fmt::Write as _;
use std::path::Path;

use super::{SweepError, SweepResult, SweptTerms};
use crate::variability::Redraw;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

/// The bound the reference configuration uses; marked on the daily series.
const REFERENCE_BOUND: f64 = 2.0;

fn series_color(freq: Redraw) -> &'static str {
    match freq {
        Redraw::Daily => "#1f77b4",
        Redraw::Hourly => "#ff7f0e",
    }
}

fn term_symbol(terms: SweptTerms) -> &'static str {
    match terms {
        SweptTerms::Single(crate::variability::Term::U) => "U",
        SweptTerms::Single(crate::variability::Term::Nu1) => "ν1",
        SweptTerms::Single(crate::variability::Term::Nu2) => "ν2",
        SweptTerms::Joint => "ν1, ν2",
    }
}

fn nice_ceiling(v: f64) -> f64 {
    if v <= 0.0 {
        return 10.0;
    }
    let step = if v <= 20.0 { 5.0 } else { 10.0 };
    ((v / step).ceil() * step).min(100.0).max(step)
}

/// Renders a single-term sweep as a standalone SVG document.
pub fn render_chart(result: &SweepResult) -> Result<String, SweepError> {
    if result.terms == SweptTerms::Joint {
        return Err(SweepError::Invalid("joint sweeps cannot be drawn as a line chart".into()));
    }
    let finite: Vec<f64> = result.rows.iter().map(|r| r.swept_bound()).filter(|b| b.is_finite()).collect();
    if finite.is_empty() {
        return Err(SweepError::Invalid("nothing to plot".into()));
    }
    let x_min = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let mut x_max = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if x_max <= x_min {
        x_max = x_min + 1.0;
    }
    let y_max = nice_ceiling(result.rows.iter().map(|r| r.risk_pct).fold(0.0, f64::max) * 1.05);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |y: f64| TOP + plot_h - y / y_max * plot_h;
    let symbol = term_symbol(result.terms);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">Population risk as the bound on {symbol} varies</text>"#,
        LEFT + plot_w / 2.0
    );

    // Axes and grid.
    let _ = writeln!(svg, r##"<g stroke="#333" stroke-width="1">"##);
    let _ = writeln!(svg, r#"<line x1="{LEFT:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}"/>"#, TOP + plot_h, LEFT + plot_w, TOP + plot_h);
    let _ = writeln!(svg, r#"<line x1="{LEFT:.1}" y1="{TOP:.1}" x2="{LEFT:.1}" y2="{:.1}"/>"#, TOP + plot_h);
    let _ = writeln!(svg, "</g>");
    let mut x_ticks: Vec<f64> = finite.clone();
    x_ticks.dedup();
    for x in &x_ticks {
        let px = sx(*x);
        let _ = writeln!(svg, r##"<line x1="{px:.1}" y1="{:.1}" x2="{px:.1}" y2="{:.1}" stroke="#333"/>"##, TOP + plot_h, TOP + plot_h + 5.0);
        let _ = writeln!(svg, r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">±{x}</text>"#, TOP + plot_h + 19.0);
    }
    let y_step = y_max / 5.0;
    for i in 0..=5 {
        let y = y_step * f64::from(i);
        let py = sy(y);
        let _ = writeln!(svg, r##"<line x1="{LEFT:.1}" y1="{py:.1}" x2="{:.1}" y2="{py:.1}" stroke="#ddd"/>"##, LEFT + plot_w);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{y:.0}</text>"#, LEFT - 8.0, py + 4.0);
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">Bound on {symbol} (sd)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 18.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">% with dFEV1 ≥ {}% at least once</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        result.threshold
    );

    // Series, legend and reference marker.
    let mut legend_y = TOP + 10.0;
    for freq in [Redraw::Daily, Redraw::Hourly] {
        let points: Vec<(f64, f64)> = result
            .series(freq)
            .iter()
            .filter(|r| r.swept_bound().is_finite())
            .map(|r| (sx(r.swept_bound()), sy(r.risk_pct)))
            .collect();
        if points.is_empty() {
            continue;
        }
        let color = series_color(freq);
        let coords: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="series-{}" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            freq.label(),
            coords.join(" ")
        );
        for (x, y) in &points {
            let _ = writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#);
        }
        let lx = LEFT + plot_w + 15.0;
        let _ = writeln!(svg, r#"<line x1="{lx:.1}" y1="{legend_y:.1}" x2="{:.1}" y2="{legend_y:.1}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}">{} draws</text>"#, lx + 26.0, legend_y + 4.0, capitalize(freq.label()));
        legend_y += 20.0;
    }
    if let Some(reference) = result
        .series(Redraw::Daily)
        .into_iter()
        .find(|r| r.swept_bound() == REFERENCE_BOUND)
    {
        let (x, y) = (sx(reference.swept_bound()), sy(reference.risk_pct));
        let _ = writeln!(
            svg,
            r#"<rect class="reference" x="{:.2}" y="{:.2}" width="10" height="10" fill="red"/>"#,
            x - 5.0,
            y - 5.0
        );
        let lx = LEFT + plot_w + 15.0;
        let _ = writeln!(svg, r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="red"/>"#, lx + 5.0, legend_y - 5.0);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}">±2 sd, daily</text>"#, lx + 26.0, legend_y + 4.0);
    }
    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().collect::<String>() + c.as_str(),
        None => String::new(),
    }
}

pub fn emit_chart(result: &SweepResult, path: impl AsRef<Path>) -> Result<(), SweepError> {
    let svg = render_chart(result)?;
    let path = path.as_ref();
    std::fs::write(path, svg).map_err(|source| SweepError::Io { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::{default_grid, SweepRow};
    use crate::variability::Term;

    fn result_for(grid: &[f64]) -> SweepResult {
        let mut rows = Vec::new();
        for freq in [Redraw::Daily, Redraw::Hourly] {
            for (i, b) in grid.iter().enumerate() {
                rows.push(SweepRow {
                    term: SweptTerms::Single(Term::Nu1),
                    bound_u: 2.0,
                    bound_nu1: *b,
                    bound_nu2: 2.0,
                    frequency: freq,
                    risk_pct: 5.0 + i as f64 * if freq == Redraw::Daily { 2.0 } else { 9.0 },
                    n_exceed: 1,
                    n_total: 10_000,
                    master_seed: 1,
                });
            }
        }
        SweepResult { terms: SweptTerms::Single(Term::Nu1), threshold: 10.0, rows, failures: vec![] }
    }

    #[test]
    fn two_polylines_of_nine_points() {
        let svg = render_chart(&result_for(&default_grid())).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        for line in svg.lines().filter(|l| l.starts_with("<polyline")) {
            let points = line.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
            assert_eq!(points.split(' ').count(), 9);
        }
        assert!(svg.contains("Daily draws") && svg.contains("Hourly draws"));
    }

    #[test]
    fn reference_marker_iff_two_in_grid() {
        assert!(render_chart(&result_for(&default_grid())).unwrap().contains(r#"class="reference""#));
        let without = render_chart(&result_for(&[0.0, 1.0, 3.0])).unwrap();
        assert!(!without.contains(r#"class="reference""#));
    }

    #[test]
    fn deterministic_and_rejects_joint() {
        let r = result_for(&default_grid());
        assert_eq!(render_chart(&r).unwrap(), render_chart(&r).unwrap());
        let joint = SweepResult { terms: SweptTerms::Joint, ..r };
        assert!(matches!(render_chart(&joint), Err(SweepError::Invalid(_))));
    }
}
