//! Minimal SVG line charts for curve overlays and sensitivity plots.

use std::fmt::Write;

use super::crossval::SensitivityReport;

/// A named polyline, or a single marker when `marker` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub marker: bool,
}

const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const W: f64 = 480.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;

/// Chart with both axes on [0, 1].
pub fn curves_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    chart(title, x_label, y_label, (0.0, 1.0), series)
}

/// Mean AUC-ROC and AUC-PR against training fraction.
pub fn sensitivity_svg(report: &SensitivityReport) -> String {
    let pick = |f: fn(&super::crossval::SensitivityRow) -> Option<f64>| {
        report
            .rows
            .iter()
            .filter_map(|r| f(r).map(|v| (r.fraction, v)))
            .collect::<Vec<_>>()
    };
    let series = [
        Series {
            name: "mean AUC-ROC".into(),
            points: pick(|r| r.mean_auc_roc),
            marker: false,
        },
        Series {
            name: "mean AUC-PR".into(),
            points: pick(|r| r.mean_auc_pr),
            marker: false,
        },
    ];
    let max_x = report
        .rows
        .iter()
        .map(|r| r.fraction)
        .fold(0.0, f64::max)
        .max(1e-9);
    chart(
        &format!("Training-fraction sensitivity ({})", report.model_id),
        "training fraction",
        "AUC",
        (0.0, max_x),
        &series,
    )
}

fn chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    x_range: (f64, f64),
    series: &[Series],
) -> String {
    let (x0, x1) = x_range;
    let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - y * (H - 2.0 * PAD);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        esc(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = x0 + t * (x1 - x0);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            px(xv),
            H - PAD + 15.0,
            trim(xv)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            PAD - 5.0,
            py(t) + 4.0,
            trim(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 12.0,
        esc(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        esc(y_label)
    );
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        if ser.marker {
            for &(x, y) in &ser.points {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="5" fill="{color}"/>"#,
                    px(x),
                    py(y)
                );
            }
        } else if !ser.points.is_empty() {
            let pts: Vec<String> = ser
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
        }
        let ly = PAD + 15.0 + 16.0 * i as f64;
        let lx = W - PAD - 150.0;
        let _ = writeln!(
            s,
            r#"<rect x="{lx}" y="{}" width="10" height="10" fill="{color}"/>"#,
            ly - 9.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}">{}</text>"#,
            lx + 14.0,
            esc(&ser.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn trim(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_lines_and_markers() {
        let svg = curves_svg(
            "ROC <test>",
            "FPR",
            "TPR",
            &[
                Series {
                    name: "model2".into(),
                    points: vec![(0.0, 0.0), (0.5, 0.8), (1.0, 1.0)],
                    marker: false,
                },
                Series {
                    name: "model1".into(),
                    points: vec![(0.1, 0.6)],
                    marker: true,
                },
            ],
        );
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.contains("ROC &lt;test&gt;"));
    }
}
