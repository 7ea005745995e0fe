//! Step plots of performance profiles on a log2 ratio axis.

use std::fmt::Write as _;

use super::ProfileCurve;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 130.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// SVG document with one step curve per solver.
pub fn profile_svg(title: &str, curves: &[ProfileCurve]) -> String {
    let max_ratio = curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p.0))
        .filter(|a| a.is_finite())
        .fold(2.0f64, f64::max);
    let x_max = max_ratio.log2().ceil().max(1.0);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |alpha: f64| MARGIN_LEFT + alpha.max(1.0).log2() / x_max * plot_w;
    let sy = |rho: f64| MARGIN_TOP + (1.0 - rho) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for i in 0..=(x_max as usize) {
        let x = sx(2f64.powi(i as i32));
        let _ = writeln!(
            out,
            r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#ddd"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
            MARGIN_TOP,
            MARGIN_TOP + plot_h,
            MARGIN_TOP + plot_h + 16.0,
            1u64 << i
        );
    }
    for i in 0..=4 {
        let rho = i as f64 / 4.0;
        let y = sy(rho);
        let _ = writeln!(
            out,
            r##"<line x1="{MARGIN_LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{rho:.2}</text>"##,
            MARGIN_LEFT + plot_w,
            MARGIN_LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">performance ratio (log2 scale)</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    for (i, curve) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut path = String::new();
        let mut previous = curve.at(1.0);
        let _ = write!(path, "M{:.2},{:.2}", sx(1.0), sy(previous));
        for &(alpha, rho) in curve.points.iter().filter(|p| p.0 > 1.0 && p.0.is_finite()) {
            if rho != previous {
                let _ = write!(path, " H{:.2} V{:.2}", sx(alpha), sy(rho));
                previous = rho;
            }
        }
        let _ = write!(path, " H{:.2}", sx(2f64.powf(x_max)));
        let _ = writeln!(
            out,
            r#"<path d="{path}" fill="none" stroke="{color}" stroke-width="2"/>"#
        );
        let ly = MARGIN_TOP + 10.0 + 18.0 * i as f64;
        let lx = WIDTH - MARGIN_RIGHT + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&curve.solver)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_path_per_curve() {
        let curves = vec![
            ProfileCurve {
                solver: "a".into(),
                points: vec![(1.0, 0.5), (3.0, 1.0)],
            },
            ProfileCurve {
                solver: "b<c".into(),
                points: vec![(1.0, 0.5), (3.0, 0.5)],
            },
        ];
        let svg = profile_svg("tau = 1e-3", &curves);
        assert_eq!(svg.matches("<path").count(), 2);
        assert!(svg.contains("b&lt;c"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
