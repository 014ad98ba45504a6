//! Static SVG 1.1 snapshots of plane links.

use std::fmt::Write;

use crate::geom::P2;
use crate::germ::{Component, PolygonalGerm};

const SIZE: f64 = 400.0;
const MARGIN: f64 = 20.0;
const COLORS: [&str; 6] = ["#1f4e9c", "#b03a2e", "#1e8449", "#7d3c98", "#b9770e", "#2e4053"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders the links of `components` at `t`, scaled to fit a square canvas.
pub fn render_components(components: &[Component], t: f64, title: &str) -> String {
    let links: Vec<(bool, Vec<P2>)> =
        components.iter().map(|c| (c.closed, c.vertices.iter().map(|v| v.eval(t)).collect())).collect();
    let all: Vec<P2> = links.iter().flat_map(|l| l.1.iter().copied()).collect();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in all.iter().chain(std::iter::once(&[0.0, 0.0])) {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    // SVG y grows downward.
    let map = |p: &P2| [MARGIN + (p[0] - lo[0]) * scale, SIZE - MARGIN - (p[1] - lo[1]) * scale];
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">",
        SIZE
    );
    let _ = writeln!(s, "  <title>{}</title>", escape(title));
    let _ = writeln!(s, "  <rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{0}\" fill=\"#ffffff\"/>", SIZE);
    let o = map(&[0.0, 0.0]);
    let _ = writeln!(s, "  <circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"2\" fill=\"#999999\"/>", o[0], o[1]);
    for (i, (closed, pts)) in links.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = pts.iter().map(|p| {
            let m = map(p);
            format!("{:.3},{:.3}", m[0], m[1])
        }).collect();
        let tag = if *closed { "polygon" } else { "polyline" };
        let _ = writeln!(
            s,
            "  <{} points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
            tag,
            coords.join(" "),
            color
        );
        for (k, p) in pts.iter().enumerate() {
            let m = map(p);
            let _ = writeln!(s, "  <circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"3\" fill=\"{}\"/>", m[0], m[1], color);
            let _ = writeln!(
                s,
                "  <text x=\"{:.3}\" y=\"{:.3}\" font-size=\"10\" fill=\"{}\">{}</text>",
                m[0] + 4.0,
                m[1] - 4.0,
                color,
                k
            );
        }
    }
    let _ = writeln!(s, "  <text x=\"{}\" y=\"14\" font-size=\"12\">t = {:e}</text>", MARGIN, t);
    s.push_str("</svg>\n");
    s
}

pub fn render_germ(g: &PolygonalGerm, t: f64, title: &str) -> String {
    render_components(&g.components, t, title)
}
