//! CSV and SVG output for sweep reports. Both are deterministic: the same
//! report always produces the same bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::diagnostics::{SweepReport, ValueKind};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "epsilon,alpha,kind,value,t_final,dx,dt,cfl,coefficient";

/// Marker written in the value column of a failed row.
pub const FAILURE_MARKER: &str = "FAILED";

/// CSV text for several reports under one header.
pub fn csv_string(reports: &[&SweepReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for report in reports {
        let m = &report.metadata;
        for row in report.rows() {
            let alpha = row.alpha.map(|a| a.to_string()).unwrap_or_default();
            let value = row
                .value
                .map(|v| format!("{v:e}"))
                .unwrap_or_else(|| FAILURE_MARKER.to_string());
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{:e},{},{}",
                row.eps, alpha, row.kind, value, m.t_final, m.dx, row.dt, m.cfl, m.coefficient
            );
        }
    }
    out
}

fn write(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

pub fn emit_csv(report: &SweepReport, path: &Path) -> Result<()> {
    write(path, &csv_string(&[report]))
}

pub fn emit_csv_many(reports: &[&SweepReport], path: &Path) -> Result<()> {
    write(path, &csv_string(reports))
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 130.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// A named series of `(eps, value)` points.
pub struct Series<'a> {
    pub label: String,
    pub report: &'a SweepReport,
}

/// SVG chart of one or more sweeps: log-x in `eps`, log-y for norms.
pub fn svg_string(title: &str, series: &[Series<'_>]) -> String {
    let log_y = series
        .iter()
        .flat_map(|s| s.report.rows())
        .all(|r| r.kind == ValueKind::Norm);
    let points: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.report
                .values()
                .into_iter()
                .filter(|&(_, v)| !log_y || v > 0.0)
                .map(|(e, v)| (e.log10(), if log_y { v.log10() } else { v }))
                .collect()
        })
        .collect();
    let all: Vec<(f64, f64)> = points.iter().flatten().copied().collect();
    let bounds = |f: fn(&(f64, f64)) -> f64| {
        let lo = all.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = all.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-12 {
            (lo - 0.5, hi + 0.5)
        } else {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        }
    };
    let (x0, x1) = bounds(|p| p.0);
    let (y0, y1) = bounds(|p| p.1);
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_T + ph - (y - y0) / (y1 - y0) * ph;
    let y_label = match (log_y, series.first().map(|s| s.report.rows().first().map(|r| r.kind))) {
        (true, _) => "log10 ||u_eps||_L2",
        (false, Some(Some(ValueKind::Error))) => "||u_eps - u_exact||_L2",
        _ => "value",
    };
    let axis_note = if log_y { "log-x, log-y" } else { "log-x, linear y" };

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-family="sans-serif" font-size="14">{} ({axis_note})</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="10">{:.3}</text>"#,
            sx(fx),
            MARGIN_T + ph + 15.0,
            fx
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="10">{:.4}</text>"#,
            MARGIN_L - 5.0,
            sy(fy) + 3.0,
            fy
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="12">log10 eps</text>"#,
        MARGIN_L + pw / 2.0,
        HEIGHT - 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 18 {:.2})">{y_label}</text>"#,
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0
    );
    for (i, (serie, pts)) in series.iter().zip(&points).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        for &(x, y) in pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, sx(x), sy(y));
        }
        let ly = MARGIN_T + 12.0 + 16.0 * i as f64;
        let lx = WIDTH - MARGIN_R + 10.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 18.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
            lx + 22.0,
            ly + 4.0,
            escape(&serie.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn emit_svg(report: &SweepReport, path: &Path) -> Result<()> {
    let title = format!("{} at t = {}", report.metadata.coefficient, report.metadata.t_final);
    let series = [Series {
        label: report.metadata.coefficient.clone(),
        report,
    }];
    write(path, &svg_string(&title, &series))
}

pub fn emit_svg_many(title: &str, series: &[Series<'_>], path: &Path) -> Result<()> {
    write(path, &svg_string(title, series))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{SweepMetadata, SweepRow};

    fn report(n: usize) -> SweepReport {
        let rows = (0..n)
            .map(|i| SweepRow {
                eps: 0.1 / (i + 1) as f64,
                alpha: None,
                kind: ValueKind::Error,
                value: Some(0.01 / (i + 1) as f64),
                dt: 0.002,
                energy_gain: None,
                failure: None,
            })
            .collect();
        SweepReport::new(
            rows,
            SweepMetadata {
                t_final: 2.0,
                dx: 0.002,
                cfl: 1.0,
                coefficient: "heaviside".into(),
                notes: vec![],
            },
        )
    }

    #[test]
    fn csv_shapes() {
        assert_eq!(csv_string(&[&report(0)]), format!("{CSV_HEADER}\n"));
        let text = csv_string(&[&report(6)]);
        assert_eq!(text.lines().count(), 7);
        assert_eq!(text.lines().nth(1).unwrap(), "0.1,,error,1e-2,2,0.002,2e-3,1,heaviside");
    }

    #[test]
    fn failed_rows_carry_the_marker() {
        let mut r = report(2);
        let mut rows = r.rows().to_vec();
        rows[1].value = None;
        rows[1].failure = Some("diverged".into());
        r = SweepReport::new(rows, r.metadata.clone());
        assert!(csv_string(&[&r]).lines().nth(2).unwrap().contains(FAILURE_MARKER));
    }

    #[test]
    fn outputs_are_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let r = report(6);
        let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        emit_csv(&r, &a).unwrap();
        emit_csv(&r, &b).unwrap();
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
        let (a, b) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
        emit_svg(&r, &a).unwrap();
        emit_svg(&r, &b).unwrap();
        let body = fs::read_to_string(&a).unwrap();
        assert_eq!(body, fs::read_to_string(&b).unwrap());
        assert!(body.contains("<polyline"));
        assert!(body.contains("log-x, linear y"));
    }

    #[test]
    fn io_errors_name_the_path() {
        let err = emit_csv(&report(1), Path::new("/nonexistent/dir/out.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/out.csv"));
    }
}
