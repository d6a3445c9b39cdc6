//! CSV and SVG output for shape summaries.

use std::fmt::Write as _;
use std::path::Path;

use super::{Histogram, ShapeSummary};
use crate::error::{Error, Result};
use crate::io::write_csv;

/// Columns `theta, mean, std, band_low, band_high` and `r_true` when a
/// truth was supplied.
pub fn save_summary(summary: &ShapeSummary, path: &Path) -> Result<()> {
    let mut header: Vec<String> = ["theta", "mean", "std", "band_low", "band_high"].map(String::from).to_vec();
    if summary.true_radius.is_some() {
        header.push("r_true".into());
    }
    let rows = (0..summary.angles.len()).map(|q| {
        let mut row = vec![
            summary.angles[q],
            summary.mean_radius[q],
            summary.std_radius[q],
            summary.band_low[q],
            summary.band_high[q],
        ];
        if let Some(t) = &summary.true_radius {
            row.push(t[q]);
        }
        row
    });
    write_csv(path, &header, rows)
}

/// Columns `bin_left, bin_right, count`.
pub fn save_histogram(hist: &Histogram, path: &Path) -> Result<()> {
    let header = ["bin_left", "bin_right", "count"].map(String::from).to_vec();
    let rows = hist.counts.iter().enumerate().map(|(b, &c)| vec![hist.edges[b], hist.edges[b + 1], c as f64]);
    write_csv(path, &header, rows)
}

fn polar_path(angles: &[f64], radii: &[f64], scale: f64, centre: f64) -> String {
    let mut d = String::new();
    for (q, (t, r)) in angles.iter().zip(radii).enumerate() {
        let (x, y) = (centre + scale * r * t.cos(), centre - scale * r * t.sin());
        let _ = write!(d, "{}{x:.3},{y:.3} ", if q == 0 { "M" } else { "L" });
    }
    d.push('Z');
    d
}

/// Polar plot: the `±2σ` band as an even-odd filled ring, the mean in blue
/// and the truth (if any) dashed in black.
pub fn summary_svg(summary: &ShapeSummary) -> String {
    const SIZE: f64 = 400.0;
    let rmax = summary
        .band_high
        .iter()
        .chain(summary.true_radius.iter().flatten())
        .fold(0.0f64, |m, &r| m.max(r));
    let scale = 0.45 * SIZE / rmax.max(1e-12);
    let c = SIZE / 2.0;
    let low: Vec<f64> = summary.band_low.iter().map(|r| r.max(0.0)).collect();
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n"
    );
    let _ = writeln!(svg, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<path d=\"{} {}\" fill=\"#9ecae1\" fill-opacity=\"0.6\" fill-rule=\"evenodd\" stroke=\"none\"/>",
        polar_path(&summary.angles, &summary.band_high, scale, c),
        polar_path(&summary.angles, &low, scale, c)
    );
    let _ = writeln!(
        svg,
        "<path d=\"{}\" fill=\"none\" stroke=\"#08519c\" stroke-width=\"2\"/>",
        polar_path(&summary.angles, &summary.mean_radius, scale, c)
    );
    if let Some(t) = &summary.true_radius {
        let _ = writeln!(
            svg,
            "<path d=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>",
            polar_path(&summary.angles, t, scale, c)
        );
    }
    if let Some(e) = summary.mean_shape_l2 {
        let _ = writeln!(svg, "<text x=\"10\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">relative L2 error {e:.4}</text>");
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn write_summary_svg(summary: &ShapeSummary, path: &Path) -> Result<()> {
    std::fs::write(path, summary_svg(summary)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use crate::postprocess::{align_sample, radius_histogram, summarize};
    use crate::shape::Circle;

    fn summary() -> ShapeSummary {
        let a = align_sample(&[0.0; 8], Vec2::zero(), 24).unwrap();
        let b = align_sample(&[0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], Vec2::zero(), 24).unwrap();
        summarize(&[a, b], Some(&Circle::<f64>::unit()), Vec2::zero()).unwrap()
    }

    #[test]
    fn summary_csv_has_truth_column() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("summary.csv");
        save_summary(&summary(), &p).unwrap();
        let (header, rows) = crate::io::read_csv(&p, 6).unwrap();
        assert_eq!(header.last().unwrap(), "r_true");
        assert_eq!(rows.len(), 24);
    }

    #[test]
    fn histogram_csv_rows() {
        let s = summary();
        let a = align_sample(&[0.0; 8], Vec2::zero(), 24).unwrap();
        let h = radius_histogram(&[a.clone(), a], 1.0, 4).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.csv");
        save_histogram(&h, &p).unwrap();
        let (_, rows) = crate::io::read_csv(&p, 3).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows.iter().map(|r| r[2]).sum::<f64>(), 2.0);
        assert!(s.mean_shape_l2.is_some());
    }

    #[test]
    fn svg_is_well_formed() {
        let svg = summary_svg(&summary());
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<path").count(), 3);
    }
}
