//! CSV tables, Markdown summaries and SVG log-log plots.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::Norm;
use crate::study::{FamilyResult, StudyReport};
use crate::CliError;

pub const CSV_HEADER: &str = "n,h_bar_e,E_sigma,E_sigma_div,E_u,N_dofs,seconds";

/// Formats a float with 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn family_csv(fam: &FamilyResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push_str("\r\n");
    for l in &fam.levels {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{}\r\n",
            l.n,
            num(l.h_bar_e),
            num(l.errors.sigma),
            num(l.errors.sigma_div),
            num(l.errors.u),
            l.n_dofs,
            num(l.seconds)
        );
    }
    out
}

fn stem(report: &StudyReport) -> String {
    format!("test_{}_k{}", report.config.test, report.config.k)
}

pub fn csv_path(report: &StudyReport, fam: &FamilyResult) -> PathBuf {
    report.config.out_dir.join(format!("{}_{}.csv", stem(report), fam.family.name()))
}

pub fn svg_path(report: &StudyReport, norm: Norm) -> PathBuf {
    report.config.out_dir.join(format!("{}_{}.svg", stem(report), norm.column()))
}

pub fn summary_path(report: &StudyReport) -> PathBuf {
    report.config.out_dir.join(format!("summary_{}.md", stem(report)))
}

pub fn markdown(report: &StudyReport) -> String {
    let c = &report.config;
    let mut s = String::new();
    let _ = writeln!(s, "# Test {}, k = {}\n", c.test, c.k);
    let families: Vec<&str> = c.families.iter().map(|f| f.name()).collect();
    let levels: Vec<String> = c.levels.iter().map(|n| n.to_string()).collect();
    let _ = writeln!(s, "- families: {}", families.join(", "));
    let _ = writeln!(s, "- levels: {}", levels.join(", "));
    let _ = writeln!(s, "- seed: {}, solver tolerance: {:e}, exactness threshold: {:e}\n", c.seed, c.solver_tol, c.exact_tol);

    let _ = writeln!(s, "## Fitted rates\n");
    let _ = writeln!(s, "| family | E_sigma | E_sigma_div | E_u |");
    let _ = writeln!(s, "|---|---|---|---|");
    for f in &report.families {
        let _ = writeln!(s, "| {} | {} | {} | {} |", f.family.name(), f.rates[0], f.rates[1], f.rates[2]);
    }
    let _ = writeln!(s);

    for f in &report.families {
        let _ = writeln!(s, "## {}\n", f.family.name());
        let _ = writeln!(s, "| n | h_bar_e | E_sigma | E_sigma_div | E_u | N_dofs |");
        let _ = writeln!(s, "|---|---|---|---|---|---|");
        for l in &f.levels {
            let _ = writeln!(
                s,
                "| {} | {:.4e} | {:.4e} | {:.4e} | {:.4e} | {} |",
                l.n, l.h_bar_e, l.errors.sigma, l.errors.sigma_div, l.errors.u, l.n_dofs
            );
            if let Some(reason) = &l.failure {
                let _ = writeln!(s, "\nLevel {} failed: {reason}\n", l.n);
            }
        }
        let _ = writeln!(s);
    }

    if !report.expectations.is_empty() {
        let _ = writeln!(s, "## Expectations\n");
        for e in &report.expectations {
            let _ = writeln!(s, "- {} {}", if e.passed { "PASS" } else { "FAIL" }, e.description);
        }
    }
    s
}

const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

/// Log-log plot of one norm, one curve per family, with a reference
/// triangle of slope `k + 1`. Every marker carries its CSV values in
/// `data-h` and `data-e`; non-positive or missing errors are not drawn.
pub fn svg(report: &StudyReport, norm: Norm) -> String {
    let (w, h) = (640.0, 480.0);
    let (left, right, top, bottom) = (80.0, 150.0, 40.0, 60.0);
    let series: Vec<(&FamilyResult, Vec<(usize, f64, f64)>)> = report
        .families
        .iter()
        .map(|f| {
            let pts = f
                .levels
                .iter()
                .filter(|l| l.h_bar_e > 0.0 && l.error(norm) > 0.0)
                .map(|l| (l.n, l.h_bar_e, l.error(norm)))
                .collect();
            (f, pts)
        })
        .collect();
    let all: Vec<(f64, f64)> = series.iter().flat_map(|(_, p)| p.iter().map(|&(_, x, y)| (x, y))).collect();
    let bounds = |v: Vec<f64>| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min).log10().floor();
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max).log10().ceil();
        if lo.is_finite() && hi.is_finite() {
            (lo, hi.max(lo + 1.0))
        } else {
            (-2.0, 0.0)
        }
    };
    let (x0, x1) = bounds(all.iter().map(|p| p.0).collect());
    let (y0, y1) = bounds(all.iter().map(|p| p.1).collect());
    let pw = w - left - right;
    let ph = h - top - bottom;
    let px = |x: f64| left + (x.log10() - x0) / (x1 - x0) * pw;
    let py = |y: f64| top + (y1 - y.log10()) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">Test {}, k = {}: {}</text>"#,
        left + pw / 2.0,
        report.config.test,
        report.config.k,
        norm.column()
    );
    for d in (x0 as i32)..=(x1 as i32) {
        let x = px(10f64.powi(d));
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{top}" x2="{x:.2}" y2="{}" stroke="#dddddd"/>"##, top + ph);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">1e{d}</text>"#, top + ph + 18.0);
    }
    for d in (y0 as i32)..=(y1 as i32) {
        let y = py(10f64.powi(d));
        let _ = writeln!(s, r##"<line x1="{left}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#dddddd"/>"##, left + pw);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">1e{d}</text>"#, left - 6.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">mean edge length</text>"#, left + pw / 2.0, h - 16.0);
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        norm.column()
    );

    for (i, (fam, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let name = fam.family.name();
        let _ = writeln!(s, r#"<g class="series" data-family="{name}">"#);
        if pts.len() > 1 {
            let path: Vec<String> = pts.iter().map(|&(_, x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.join(" "));
        }
        for &(n, x, y) in pts {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{color}" data-n="{n}" data-h="{}" data-e="{}"/>"#,
                px(x),
                py(y),
                num(x),
                num(y)
            );
        }
        let ly = top + 14.0 + 18.0 * i as f64;
        let lx = left + pw + 14.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.5"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{name}</text>"#, lx + 26.0, ly + 4.0);
        let _ = writeln!(s, "</g>");
    }

    // Reference triangle below the finest point of the first plotted curve.
    if let Some(&(_, hx, ey)) = series.iter().find_map(|(_, p)| p.last()) {
        let slope = (report.config.k + 1) as f64;
        let (a, b) = (hx, hx * 2.0);
        let base = ey / 4.0;
        let top_e = base * 2f64.powf(slope);
        let _ = writeln!(
            s,
            r#"<polygon class="reference-slope" data-slope="{slope}" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="none" stroke="black" stroke-dasharray="4 2"/>"#,
            px(a),
            py(base),
            px(b),
            py(base),
            px(b),
            py(top_e)
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{slope}</text>"#, px(b) + 4.0, py((base * top_e).sqrt()) + 4.0);
    }
    let _ = writeln!(s, "</svg>");
    s
}

/// Writes all CSV, Markdown and SVG files; returns their paths.
pub fn write_report(report: &StudyReport) -> Result<Vec<PathBuf>, CliError> {
    let dir: &Path = &report.config.out_dir;
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for fam in &report.families {
        let p = csv_path(report, fam);
        std::fs::write(&p, family_csv(fam))?;
        files.push(p);
    }
    for norm in Norm::ALL {
        let p = svg_path(report, norm);
        std::fs::write(&p, svg(report, norm))?;
        files.push(p);
    }
    let p = summary_path(report);
    std::fs::write(&p, markdown(report))?;
    files.push(p);
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::StudyConfig;
    use crate::study::LevelResult;
    use hrvem::analysis::{Errors, Rate, TestCase};
    use hrvem::mesh::MeshFamily;

    fn report() -> StudyReport {
        let level = |n: usize, h: f64, e: f64| LevelResult {
            n,
            h_bar_e: h,
            errors: Errors { sigma: e, sigma_div: 0.0, u: f64::NAN },
            reference: Errors { sigma: 1.0, sigma_div: 1.0, u: 1.0 },
            n_dofs: 10 * n,
            seconds: 0.0,
            failure: None,
        };
        StudyReport {
            config: StudyConfig::new(TestCase::B, vec![MeshFamily::QuadS], 1, vec![4, 8]),
            families: vec![FamilyResult {
                family: MeshFamily::QuadS,
                levels: vec![level(4, 0.25, 0.1), level(8, 0.125, 0.025)],
                rates: [Rate::Slope(2.0), Rate::Exact, Rate::Insufficient],
            }],
            expectations: Vec::new(),
        }
    }

    #[test]
    fn csv_rows() {
        let r = report();
        let text = family_csv(&r.families[0]);
        let lines: Vec<&str> = text.split("\r\n").collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(
            lines[1],
            "4,2.5000000000000000e-1,1.0000000000000001e-1,0.0000000000000000e0,NaN,40,0.0000000000000000e0"
        );
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[3], "");
    }

    #[test]
    fn svg_points_carry_csv_values() {
        let r = report();
        let text = svg(&r, Norm::Sigma);
        assert!(text.contains(r#"data-h="1.2500000000000000e-1" data-e="2.5000000000000001e-2""#));
        assert_eq!(text.matches("<circle").count(), 2);
        assert!(text.contains(r#"data-slope="2""#));
        // zero and NaN errors are not plotted
        assert_eq!(svg(&r, Norm::SigmaDiv).matches("<circle").count(), 0);
        assert_eq!(svg(&r, Norm::U).matches("<circle").count(), 0);
        assert!(!text.contains("href"));
    }

    #[test]
    fn markdown_lists_rates() {
        let text = markdown(&report());
        assert!(text.contains("| QuadS | 2.00 | exact | n/a |"));
    }
}
