//! Static SVG line charts of sweep results.

use std::fmt::Write as _;

use mimdetect_core::{RateSource, SweepKind, SweepRow};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

struct Series {
    label: &'static str,
    color: &'static str,
    dashed: bool,
    value: fn(&SweepRow) -> f64,
}

const SERIES: [Series; 4] = [
    Series {
        label: "miss, Bayes",
        color: "#1f77b4",
        dashed: false,
        value: |r| r.rates_bayes.alpha,
    },
    Series {
        label: "miss, MIM",
        color: "#d62728",
        dashed: false,
        value: |r| r.rates_mim.alpha,
    },
    Series {
        label: "false alarm, Bayes",
        color: "#1f77b4",
        dashed: true,
        value: |r| r.rates_bayes.beta,
    },
    Series {
        label: "false alarm, MIM",
        color: "#d62728",
        dashed: true,
        value: |r| r.rates_mim.beta,
    },
];

fn x_label(kind: SweepKind) -> &'static str {
    match kind {
        SweepKind::PriorRatio => "log10(w_A / w_B)",
        SweepKind::MeanSeparation => "E(p_B(x))",
    }
}

/// Quadrature rates as lines, Monte Carlo rates as markers. The y axis is
/// the rate on [0, 1].
pub fn sweep_svg(kind: SweepKind, rows: &[SweepRow]) -> String {
    let xs: Vec<f64> = rows.iter().map(|r| r.sweep_value).collect();
    let (mut x_lo, mut x_hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    });
    if !x_lo.is_finite() {
        (x_lo, x_hi) = (0.0, 1.0);
    }
    if x_hi - x_lo < 1e-12 {
        let pad = x_lo.abs().max(1.0) * 0.1;
        (x_lo, x_hi) = (x_lo - pad, x_hi + pad);
    }
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| TOP + (1.0 - y) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );

    for i in 0..=5 {
        let y = i as f64 / 5.0;
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#ddd"/><text x="{2:.2}" y="{3:.2}" text-anchor="end">{y:.1}</text>"##,
            py(y),
            LEFT + plot_w,
            LEFT - 6.0,
            py(y) + 4.0,
        );
    }
    let mut ticks: Vec<f64> = xs.clone();
    ticks.dedup();
    if ticks.len() > 8 {
        let stride = ticks.len().div_ceil(8);
        ticks = ticks.into_iter().step_by(stride).collect();
    }
    for x in ticks {
        let label = (x * 1e4).round() / 1e4;
        let _ = writeln!(
            s,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="black"/><text x="{0:.2}" y="{3:.2}" text-anchor="middle">{label}</text>"#,
            px(x),
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 20.0,
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0,
        x_label(kind)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{0:.2}" text-anchor="middle" transform="rotate(-90 18 {0:.2})">rate</text>"#,
        TOP + plot_h / 2.0
    );

    for (i, series) in SERIES.iter().enumerate() {
        let dash = if series.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let points: Vec<String> = rows
            .iter()
            .filter(|r| r.source == RateSource::Quadrature)
            .map(|r| format!("{:.2},{:.2}", px(r.sweep_value), py((series.value)(r))))
            .collect();
        if !points.is_empty() {
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"{dash}/>"#,
                points.join(" "),
                series.color
            );
        }
        for r in rows.iter().filter(|r| r.source == RateSource::MonteCarlo) {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="none" stroke="{}"/>"#,
                px(r.sweep_value),
                py((series.value)(r)),
                series.color
            );
        }
        let ly = TOP + 10.0 + i as f64 * 20.0;
        let lx = LEFT + plot_w + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="2"{dash}/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 24.0,
            series.color,
            lx + 30.0,
            ly + 4.0,
            series.label
        );
    }
    let ly = TOP + 10.0 + SERIES.len() as f64 * 20.0;
    let lx = LEFT + plot_w + 12.0;
    let _ = writeln!(
        s,
        r#"<circle cx="{:.2}" cy="{ly:.2}" r="3" fill="none" stroke="black"/><text x="{:.2}" y="{:.2}">Monte Carlo</text>"#,
        lx + 12.0,
        lx + 30.0,
        ly + 4.0
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use mimdetect_core::{ErrorRates, PriorPair};

    fn row(x: f64, source: RateSource) -> SweepRow {
        let p = PriorPair::new(0.5, 0.5).unwrap();
        let rates = ErrorRates::new(0.25, 0.5, p).unwrap();
        SweepRow {
            sweep_value: x,
            source,
            s0: 1.0,
            rates_bayes: rates,
            rates_mim: rates,
        }
    }

    #[test]
    fn single_point_plot_is_well_formed() {
        let svg = sweep_svg(
            SweepKind::PriorRatio,
            &[row(3.0, RateSource::MonteCarlo), row(3.0, RateSource::Quadrature)],
        );
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
        assert_eq!(svg.matches("<polyline").count(), 4);
        assert!(svg.contains("log10(w_A / w_B)"));
    }
}
