//! Minimal self-contained SVG charts.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn frame(title: &str, out: &mut String) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n\
         <line x1=\"{PAD}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{}\" stroke=\"black\"/>\n",
        W / 2.0,
        escape(title),
        H - PAD,
        W - PAD,
        H - PAD,
        H - PAD
    );
}

fn legend(names: &[&str], out: &mut String) {
    for (k, name) in names.iter().enumerate() {
        let y = PAD + 14.0 * k as f64;
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/><text x=\"{}\" y=\"{}\">{}</text>",
            W - PAD - 150.0,
            y - 9.0,
            COLORS[k % COLORS.len()],
            W - PAD - 135.0,
            y,
            escape(name)
        );
    }
}

/// Grouped bar chart of bin counts; every group has the same number of bins
/// over `[0, 1]`.
pub fn histogram(title: &str, groups: &[(&str, &[usize])]) -> String {
    let mut out = String::new();
    frame(title, &mut out);
    let bins = groups.first().map_or(0, |g| g.1.len());
    let max = groups
        .iter()
        .flat_map(|g| g.1.iter())
        .copied()
        .max()
        .unwrap_or(0)
        .max(1) as f64;
    let plot_w = W - 2.0 * PAD;
    let plot_h = H - 2.0 * PAD - 20.0;
    let slot = plot_w / bins.max(1) as f64;
    let bar = slot / (groups.len() as f64 + 1.0);
    for (g, (_, counts)) in groups.iter().enumerate() {
        for (b, &c) in counts.iter().enumerate() {
            let h = plot_h * c as f64 / max;
            let _ = writeln!(
                out,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                PAD + slot * b as f64 + bar * (g as f64 + 0.5),
                H - PAD - h,
                bar,
                h,
                COLORS[g % COLORS.len()]
            );
        }
    }
    for b in 0..=bins {
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">{:.1}</text>",
            PAD + slot * b as f64,
            H - PAD + 14.0,
            b as f64 / bins.max(1) as f64
        );
    }
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\">max {}</text>", PAD + 4.0, PAD - 4.0, max);
    legend(&groups.iter().map(|g| g.0).collect::<Vec<_>>(), &mut out);
    out.push_str("</svg>\n");
    out
}

/// Line chart of `(x, y)` series.
pub fn lines(title: &str, x_label: &str, y_label: &str, series: &[(&str, Vec<(f64, f64)>)]) -> String {
    let mut out = String::new();
    frame(title, &mut out);
    let pts = series.iter().flat_map(|s| s.1.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts.filter(|p| p.0.is_finite() && p.1.is_finite()) {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let sx = |x: f64| PAD + (W - 2.0 * PAD) * (x - x0) / (x1 - x0);
    let sy = |y: f64| H - PAD - (H - 2.0 * PAD - 20.0) * (y - y0) / (y1 - y0);
    for (k, (_, s)) in series.iter().enumerate() {
        let path: Vec<String> = s
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>",
            COLORS[k % COLORS.len()],
            path.join(" ")
        );
    }
    let _ = write!(
        out,
        "<text x=\"{PAD}\" y=\"{}\">{x0:.3}</text><text x=\"{}\" y=\"{}\" text-anchor=\"end\">{x1:.3}</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{y0:.3}</text><text x=\"{}\" y=\"{}\" text-anchor=\"end\">{y1:.3}</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text><text x=\"12\" y=\"{}\" transform=\"rotate(-90 12 {})\" text-anchor=\"middle\">{}</text>\n",
        H - PAD + 14.0,
        W - PAD,
        H - PAD + 14.0,
        PAD - 4.0,
        sy(y0),
        PAD - 4.0,
        sy(y1),
        W / 2.0,
        H - 10.0,
        escape(x_label),
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
    legend(&series.iter().map(|s| s.0).collect::<Vec<_>>(), &mut out);
    out.push_str("</svg>\n");
    out
}
