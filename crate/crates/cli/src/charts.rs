//! Tiny SVG charts for spectra tables: axis lines, stems, and polylines
//! built from primitives only.

use std::fmt::Write;

const W: f64 = 800.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;

struct Axes {
    x_min: f64,
    x_max: f64,
    y_max: f64,
}

impl Axes {
    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let sx = (W - 2.0 * MARGIN) / (self.x_max - self.x_min).max(1e-12);
        let sy = (H - 2.0 * MARGIN) / self.y_max.max(1e-12);
        (MARGIN + (x - self.x_min) * sx, H - MARGIN - y * sy)
    }
}

fn open_chart(out: &mut String, title: &str) {
    write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" \
         width=\"{W}\" height=\"{H}\">\n<style>\n\
         .axis {{ stroke: #444444; stroke-width: 1.2; }}\n\
         .stem {{ stroke: #2a6fb0; stroke-width: 2; }}\n\
         .head {{ fill: #2a6fb0; }}\n\
         .label {{ font: 13px sans-serif; fill: #333333; }}\n\
         .title {{ font: 15px sans-serif; fill: #111111; }}\n\
         </style>\n<text class=\"title\" x=\"{MARGIN}\" y=\"24\">{title}</text>\n",
    )
    .unwrap();
}

fn axes_elements(out: &mut String, axes: &Axes, x_label: &str, y_label: &str) {
    let (x0, y0) = axes.map(axes.x_min, 0.0);
    let (x1, _) = axes.map(axes.x_max, 0.0);
    let (_, y1) = axes.map(axes.x_min, axes.y_max);
    write!(
        out,
        "<line class=\"axis\" x1=\"{x0:.1}\" y1=\"{y0:.1}\" x2=\"{x1:.1}\" y2=\"{y0:.1}\"/>\n\
         <line class=\"axis\" x1=\"{x0:.1}\" y1=\"{y0:.1}\" x2=\"{x0:.1}\" y2=\"{y1:.1}\"/>\n\
         <text class=\"label\" x=\"{:.1}\" y=\"{:.1}\">{x_label}</text>\n\
         <text class=\"label\" x=\"{:.1}\" y=\"{:.1}\">{y_label} max {:.4e}</text>\n",
        x1 - 30.0,
        y0 + 34.0,
        x0,
        y1 - 10.0,
        axes.y_max,
    )
    .unwrap();
}

/// One vertical stem per value, drawn over index k = 0, 1, ...
pub fn stem_chart(title: &str, values: &[f64]) -> String {
    let y_max = values.iter().cloned().fold(0.0, f64::max);
    let axes = Axes { x_min: 0.0, x_max: (values.len().max(2) - 1) as f64, y_max };
    let mut out = String::new();
    open_chart(&mut out, title);
    axes_elements(&mut out, &axes, "k", "sigma_k");
    for (k, &v) in values.iter().enumerate() {
        let (x, y0) = axes.map(k as f64, 0.0);
        let (_, y) = axes.map(k as f64, v);
        write!(
            out,
            "<line class=\"stem\" x1=\"{x:.1}\" y1=\"{y0:.1}\" x2=\"{x:.1}\" y2=\"{y:.1}\"/>\n\
             <circle class=\"head\" cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"3\"/>\n",
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

const PALETTE: [&str; 6] = ["#2a6fb0", "#b0502a", "#2a8f5b", "#7a4fb0", "#b08f2a", "#4b4b4b"];

/// One polyline per labeled series over shared (x, y) coordinates.
pub fn family_chart(title: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_max = 0.0f64;
    for (_, pts) in series {
        for &(x, y) in pts {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_max = y_max.max(y);
        }
    }
    if !x_min.is_finite() {
        x_min = 0.0;
        x_max = 1.0;
    }
    let axes = Axes { x_min, x_max, y_max };
    let mut out = String::new();
    open_chart(&mut out, title);
    axes_elements(&mut out, &axes, "k", "value");
    for (i, (label, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        for (j, &(x, y)) in pts.iter().enumerate() {
            let (px, py) = axes.map(x, y);
            write!(d, "{}{:.1} {:.1}", if j == 0 { "M " } else { " L " }, px, py).unwrap();
        }
        write!(
            out,
            "<path fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" d=\"{d}\"/>\n"
        )
        .unwrap();
        if let Some(&(x, y)) = pts.last() {
            let (px, py) = axes.map(x, y);
            write!(
                out,
                "<text class=\"label\" x=\"{:.1}\" y=\"{:.1}\" fill=\"{color}\">{label}</text>\n",
                px + 6.0,
                py
            )
            .unwrap();
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stem_chart_has_one_stem_per_value() {
        let svg = stem_chart("spectrum", &[0.0, 0.4, 1.1]);
        assert_eq!(svg.matches("class=\"stem\"").count(), 3);
        assert!(svg.contains("</svg>"));
    }

    #[test]
    fn family_chart_has_one_path_per_series() {
        let series = vec![
            ("l=1".to_string(), vec![(1.0, 2.0), (2.0, 1.0)]),
            ("l=2".to_string(), vec![(1.0, 1.5), (2.0, 0.6)]),
        ];
        let svg = family_chart("scaling", &series);
        assert_eq!(svg.matches("<path ").count(), 2);
        assert!(svg.contains("l=2"));
    }
}
