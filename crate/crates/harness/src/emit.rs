//! CSV and SVG output. Every file is written to a temporary sibling and
//! renamed into place.

use std::fmt::Write as _;
use std::path::Path;

use granot_core::ensemble::write_atomic;

use crate::error::Result;
use crate::report::SeriesRow;

pub const SERIES_CSV_HEADER: &str = "tau,w2,bound,theta_a,theta_b,m4_a,m4_b";

pub fn series_csv(rows: &[SeriesRow]) -> String {
    let mut s = String::from(SERIES_CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.tau, r.w2, r.bound, r.theta_a, r.theta_b, r.m4_a, r.m4_b
        );
    }
    s
}

/// Self-contained line plot of `w2` and `bound` against `tau`.
pub fn series_svg(title: &str, rows: &[SeriesRow]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 48.0;
    let finite = |x: f64| if x.is_finite() { Some(x) } else { None };
    let t_max = rows.iter().filter_map(|r| finite(r.tau)).fold(0.0, f64::max).max(1e-12);
    let y_max = rows
        .iter()
        .flat_map(|r| [finite(r.w2), finite(r.bound)])
        .flatten()
        .fold(0.0, f64::max)
        .max(1e-12);
    let t_min = rows.iter().filter_map(|r| finite(r.tau)).fold(t_max, f64::min);
    let span = (t_max - t_min).max(1e-12);
    let points = |f: &dyn Fn(&SeriesRow) -> f64| -> String {
        rows.iter()
            .filter(|r| f(r).is_finite())
            .map(|r| {
                let x = M + (r.tau - t_min) / span * (W - 2.0 * M);
                let y = H - M - f(r) / y_max * (H - 2.0 * M);
                format!("{x:.2},{y:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    let title = title.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(s, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">");
    let _ = writeln!(s, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(s, "<text x=\"{M}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">{title}</text>");
    let _ = writeln!(
        s,
        "<path d=\"M{M},{M} L{M},{b} L{r},{b}\" fill=\"none\" stroke=\"black\"/>",
        b = H - M,
        r = W - M
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">tau {t_min:.3} .. {t_max:.3}</text>",
        W / 2.0 - 40.0,
        H - 16.0
    );
    let _ = writeln!(
        s,
        "<text x=\"4\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{y_max:.3e}</text>",
        M - 4.0
    );
    let _ = writeln!(s, "<polyline id=\"w2\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"{}\"/>", points(&|r| r.w2));
    let _ = writeln!(
        s,
        "<polyline id=\"bound\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" stroke-dasharray=\"6 4\" points=\"{}\"/>",
        points(&|r| r.bound)
    );
    let _ = writeln!(s, "<text x=\"{}\" y=\"{M}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#1f77b4\">W2</text>", W - M - 60.0);
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#d62728\">bound</text>",
        W - M - 60.0,
        M + 14.0
    );
    s.push_str("</svg>\n");
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    Ok(write_atomic(path, text.as_bytes())?)
}

/// Writes the time-series CSV and, if requested, the SVG plot.
pub fn emit_timeseries(rows: &[SeriesRow], csv: &Path, svg: Option<&Path>, title: &str) -> Result<()> {
    write_text(csv, &series_csv(rows))?;
    if let Some(svg) = svg {
        write_text(svg, &series_svg(title, rows))?;
    }
    Ok(())
}
