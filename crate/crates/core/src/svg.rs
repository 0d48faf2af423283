//! Static SVG emitters: persistence diagrams with the intrinsic stability
//! bands, and the three-panel classical/intrinsic/exact comparison.

use crate::homology::DecoratedDiagram;

const SIZE: f64 = 360.0;
const PAD: f64 = 40.0;

fn scale(extent: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| PAD + (x / extent) * (SIZE - 2.0 * PAD)
}

fn flip(y: f64) -> f64 {
    SIZE - y
}

/// A diagram with the gray guarantee regions: the birth strip `x <= 2s`,
/// one death band `[d, d + 2s]` per known death, and the diagonal band of
/// width `s`.
pub fn diagram_svg(diag: &DecoratedDiagram, known_deaths: &[f64], s: f64) -> String {
    let extent = diag
        .intervals
        .iter()
        .map(|iv| iv.death)
        .chain(known_deaths.iter().copied())
        .fold(1e-9f64, f64::max)
        * 1.3;
    let sx = scale(extent);
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n"
    ));
    out.push_str(&format!(
        "  <rect width=\"{SIZE}\" height=\"{SIZE}\" fill=\"white\"/>\n"
    ));
    if s > 0.0 {
        // birth strip
        out.push_str(&format!(
            "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"gray\" opacity=\"0.25\"/>\n",
            sx(0.0),
            flip(sx(extent)),
            sx(2.0 * s) - sx(0.0),
            sx(extent) - sx(0.0)
        ));
        // death bands
        for &d in known_deaths {
            out.push_str(&format!(
                "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"gray\" opacity=\"0.35\"/>\n",
                sx(0.0),
                flip(sx(d + 2.0 * s)),
                sx(extent) - sx(0.0),
                sx(d + 2.0 * s) - sx(d)
            ));
        }
        // diagonal band of width s
        out.push_str(&format!(
            "  <polygon points=\"{},{} {},{} {},{} {},{}\" fill=\"gray\" opacity=\"0.25\"/>\n",
            sx(0.0),
            flip(sx(0.0)),
            sx(extent),
            flip(sx(extent)),
            sx(extent),
            flip(sx(extent) + (sx(s) - sx(0.0))),
            sx(0.0),
            flip(sx(0.0) + (sx(s) - sx(0.0)))
        ));
    }
    // axes and diagonal
    out.push_str(&format!(
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        sx(0.0),
        flip(sx(0.0)),
        sx(extent),
        flip(sx(0.0))
    ));
    out.push_str(&format!(
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        sx(0.0),
        flip(sx(0.0)),
        sx(0.0),
        flip(sx(extent))
    ));
    out.push_str(&format!(
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n",
        sx(0.0),
        flip(sx(0.0)),
        sx(extent),
        flip(sx(extent))
    ));
    for &d in known_deaths {
        out.push_str(&format!(
            "  <circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"none\" stroke=\"red\"/>\n",
            sx(0.0),
            flip(sx(d))
        ));
    }
    for iv in &diag.intervals {
        let color = if iv.censored { "orange" } else { "steelblue" };
        out.push_str(&format!(
            "  <circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{color}\"/>\n",
            sx(iv.birth),
            flip(sx(iv.death))
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Three panels: the classical matching region (side 4s boxes), the
/// intrinsic region (birth strip and one-sided death bands), and the exact
/// realized deaths.
pub fn stability_panels_svg(known_deaths: &[f64], diag_s: &DecoratedDiagram, s: f64) -> String {
    let extent = diag_s
        .intervals
        .iter()
        .map(|iv| iv.death)
        .chain(known_deaths.iter().copied())
        .fold(1e-9f64, f64::max)
        * 1.3;
    let sx = scale(extent);
    let panel_w = SIZE;
    let total_w = 3.0 * panel_w;
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{total_w}\" height=\"{SIZE}\" viewBox=\"0 0 {total_w} {SIZE}\">\n"
    ));
    out.push_str(&format!("  <rect width=\"{total_w}\" height=\"{SIZE}\" fill=\"white\"/>\n"));
    let titles = ["classical stability", "intrinsic stability", "obtainable"];
    for (panel, title) in titles.iter().enumerate() {
        let ox = panel as f64 * panel_w;
        out.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">{title}</text>\n",
            ox + SIZE / 2.0,
            SIZE - 8.0
        ));
        // regions per panel
        for &d in known_deaths {
            match panel {
                0 => out.push_str(&format!(
                    "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"gray\" opacity=\"0.4\"/>\n",
                    ox + sx(0.0),
                    flip(sx(d + 2.0 * s)),
                    sx(2.0 * s) - sx(0.0),
                    sx(d + 2.0 * s) - sx(d - 2.0 * s)
                )),
                1 => out.push_str(&format!(
                    "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"gray\" opacity=\"0.4\"/>\n",
                    ox + sx(0.0),
                    flip(sx(d + 2.0 * s)),
                    sx(2.0 * s) - sx(0.0),
                    sx(d + 2.0 * s) - sx(d)
                )),
                _ => out.push_str(&format!(
                    "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"gray\" stroke-width=\"3\"/>\n",
                    ox + sx(0.0),
                    flip(sx(d)),
                    ox + sx(2.0 * s),
                    flip(sx(d))
                )),
            }
        }
        // diagonal band (width s on panels 1 and 2, 2s on panel 0)
        let band = if panel == 0 { 2.0 * s } else { s };
        out.push_str(&format!(
            "  <polygon points=\"{},{} {},{} {},{} {},{}\" fill=\"gray\" opacity=\"0.3\"/>\n",
            ox + sx(0.0),
            flip(sx(0.0)),
            ox + sx(extent),
            flip(sx(extent)),
            ox + sx(extent),
            flip(sx(extent) + (sx(band) - sx(0.0))),
            ox + sx(0.0),
            flip(sx(0.0) + (sx(band) - sx(0.0)))
        ));
        out.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
            ox + sx(0.0),
            flip(sx(0.0)),
            ox + sx(extent),
            flip(sx(extent))
        ));
        for &d in known_deaths {
            out.push_str(&format!(
                "  <circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"none\" stroke=\"red\"/>\n",
                ox + sx(0.0),
                flip(sx(d))
            ));
        }
        for iv in &diag_s.intervals {
            out.push_str(&format!(
                "  <circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"steelblue\"/>\n",
                ox + sx(iv.birth),
                flip(sx(iv.death))
            ));
        }
    }
    out.push_str("</svg>\n");
    out
}
