//! Static SVG charts of experiment reports.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::verify::ExperimentReport;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Plot(e.to_string())
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
    (lo - pad, hi + pad)
}

/// Line chart with markers; one colour per series.
pub fn line_chart(path: &Path, title: &str, x_desc: &str, y_desc: &str, series: &[Series]) -> Result<()> {
    let pts = series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return Err(Error::Plot(format!("no finite points for {title}")));
    }
    let (x0, x1) = padded(x0, x1);
    let (y0, y1) = padded(y0, y1);

    let root = SVGBackend::new(path, (900, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(70)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(plot_err)?;
    chart.configure_mesh().x_desc(x_desc).y_desc(y_desc).draw().map_err(plot_err)?;
    for (i, s) in series.iter().enumerate() {
        let colour = Palette99::pick(i).to_rgba();
        let pts: Vec<(f64, f64)> = s.points.iter().copied().filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
        chart
            .draw_series(LineSeries::new(pts.clone(), colour.stroke_width(2)))
            .map_err(plot_err)?
            .label(s.label.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], colour.stroke_width(2)));
        chart.draw_series(pts.into_iter().map(|p| Circle::new(p, 3, colour.filled()))).map_err(plot_err)?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .position(SeriesLabelPosition::UpperRight)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

fn cell(report: &ExperimentReport, row: &[String], col: &str) -> Result<String> {
    let j = report.column(col).ok_or_else(|| Error::Plot(format!("report {} has no column {col}", report.id)))?;
    Ok(row[j].clone())
}

fn value(report: &ExperimentReport, row: &[String], col: &str) -> Result<f64> {
    let s = cell(report, row, col)?;
    s.parse().map_err(|_| Error::Plot(format!("column {col} holds non-numeric {s:?}")))
}

/// `ln(max comparison ratio)` against `ln n`, one series per measure, `p` and comparison.
pub fn ratio_vs_resolution(report: &ExperimentReport) -> Result<Vec<Series>> {
    let keys: &[&str] = match report.id.as_str() {
        "estimate_sweep" => &["measure", "p", "comparison"],
        "weighted_sweep" => &["case", "measure"],
        other => return Err(Error::Plot(format!("no resolution chart for {other}"))),
    };
    let mut groups: BTreeMap<String, BTreeMap<u64, f64>> = BTreeMap::new();
    for row in &report.rows {
        // Rejected weight cases leave the ratio cells empty.
        let Ok(v) = cell(report, row, "comparison_ratio")?.parse::<f64>() else { continue };
        if !v.is_finite() || v <= 0.0 {
            continue;
        }
        let label = keys
            .iter()
            .map(|k| {
                let c = cell(report, row, k)?;
                Ok(match c.parse::<f64>() {
                    Ok(x) if *k != "case" => format!("{k}={x}"),
                    _ => c,
                })
            })
            .collect::<Result<Vec<_>>>()?
            .join(" ");
        let n = value(report, row, "n")? as u64;
        let e = groups.entry(label).or_default().entry(n).or_insert(0.0);
        *e = e.max(v);
    }
    Ok(groups
        .into_iter()
        .map(|(label, s)| Series { label, points: s.into_iter().map(|(n, v)| ((n as f64).ln(), v.ln())).collect() })
        .collect())
}

/// `ln S_K` against `K`.
pub fn partial_sums(report: &ExperimentReport) -> Result<Vec<Series>> {
    let mut points = Vec::new();
    for row in &report.rows {
        let s = value(report, row, "lower_bound_sum")?;
        if s > 0.0 {
            points.push((value(report, row, "k")?, s.ln()));
        }
    }
    Ok(vec![Series { label: "ln S_K".into(), points }])
}

/// `ln(max ratio over fields)` against `ln kappa`, one series per measure and kind.
pub fn ratio_vs_kappa(report: &ExperimentReport) -> Result<Vec<Series>> {
    let mut groups: BTreeMap<String, BTreeMap<String, (f64, f64)>> = BTreeMap::new();
    for row in &report.rows {
        let label = format!("{} {}", cell(report, row, "kind")?, cell(report, row, "measure")?);
        let k = value(report, row, "kappa")?;
        let r = value(report, row, "ratio")?;
        let e = groups.entry(label).or_default().entry(cell(report, row, "kappa")?).or_insert((k, 0.0));
        e.1 = e.1.max(r);
    }
    Ok(groups
        .into_iter()
        .map(|(label, s)| {
            let mut points: Vec<(f64, f64)> = s.into_values().filter(|p| p.1 > 0.0).map(|(k, r)| (k.ln(), r.ln())).collect();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series { label, points }
        })
        .collect())
}

/// Writes the charts that exist for this report into `dir`; returns their paths.
pub fn plot_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let (name, title, x, y, series) = match report.id.as_str() {
        "estimate_sweep" | "weighted_sweep" => (
            format!("{}_ratio_vs_resolution.svg", report.id),
            "largest comparison ratio vs resolution",
            "ln n",
            "ln max ratio",
            ratio_vs_resolution(report)?,
        ),
        "counterexample" => ("counterexample_partial_sums.svg".into(), "weighted partial sums", "K", "ln S_K", partial_sums(report)?),
        "maximal_boundedness" => (
            "maximal_boundedness_ratio_vs_kappa.svg".into(),
            "maximal operator ratio vs aperture",
            "ln kappa",
            "ln max ratio",
            ratio_vs_kappa(report)?,
        ),
        _ => return Ok(Vec::new()),
    };
    let path = dir.join(name);
    line_chart(&path, title, x, y, &series)?;
    Ok(vec![path])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::report::num;

    #[test]
    fn counterexample_chart_is_written() {
        let mut r = ExperimentReport::new("counterexample", &["k", "lower_bound_sum"]);
        for k in 2..8 {
            r.row(vec![k.to_string(), num(2f64.powi(k))]);
        }
        let s = partial_sums(&r).unwrap();
        assert_eq!(s[0].points.len(), 6);
        assert!((s[0].points[1].1 - 3.0 * 2f64.ln()).abs() < 1e-12);
        let dir = tempfile::tempdir().unwrap();
        let paths = plot_report(&r, dir.path()).unwrap();
        let svg = std::fs::read_to_string(&paths[0]).unwrap();
        assert!(svg.starts_with("<svg"));
    }

    #[test]
    fn sweep_groups_take_the_max_over_cells() {
        let mut r = ExperimentReport::new("estimate_sweep", &["measure", "p", "comparison", "n", "comparison_ratio"]);
        for (n, v) in [(64, 0.5), (64, 0.25), (128, 0.5)] {
            r.row(vec!["m".into(), num(2.0), "fractional".into(), n.to_string(), num(v)]);
        }
        let s = ratio_vs_resolution(&r).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].label, "m p=2 fractional");
        assert_eq!(s[0].points.len(), 2);
        assert!((s[0].points[0].1 - 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn empty_chart_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(line_chart(&dir.path().join("x.svg"), "t", "x", "y", &[]).is_err());
    }
}
