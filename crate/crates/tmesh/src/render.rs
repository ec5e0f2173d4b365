//! SVG rendering of meshes: one line element per edge, optional per-level
//! stroke colors, l-edge order labels, and highlighted support rectangles.
//! Output bytes are deterministic for fixed input and options.

use crate::coord::to_f64;
use crate::mesh::{LEdgeId, Rect, TMesh};
use std::fmt::Write as _;

const LEVEL_COLORS: [&str; 6] = [
    "#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#8c564b",
];

#[derive(Debug, Clone, Default)]
pub struct RenderOptions {
    pub color_by_level: bool,
    /// Text placed at the midpoint of the given l-edges.
    pub labels: Vec<(LEdgeId, String)>,
    /// Rectangles drawn translucently under the mesh.
    pub highlights: Vec<Rect>,
    /// Pixels per coordinate unit; 40 when unset.
    pub scale: Option<f64>,
}

pub fn render_svg(mesh: &TMesh, opts: &RenderOptions) -> String {
    let scale = opts.scale.unwrap_or(40.0);
    let margin = scale * 0.5;
    let d = &mesh.domain;
    let (x0, x1) = (to_f64(&d.x0), to_f64(&d.x1));
    let (y0, y1) = (to_f64(&d.y0), to_f64(&d.y1));
    let width = (x1 - x0) * scale + 2.0 * margin;
    let height = (y1 - y0) * scale + 2.0 * margin;
    let tx = |x: f64| (x - x0) * scale + margin;
    let ty = |y: f64| (y1 - y) * scale + margin;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width:.2}\" height=\"{height:.2}\" viewBox=\"0 0 {width:.2} {height:.2}\">"
    );
    let _ = writeln!(
        out,
        "  <rect width=\"{width:.2}\" height=\"{height:.2}\" fill=\"#ffffff\"/>"
    );
    for r in &opts.highlights {
        let rx = tx(to_f64(&r.x0));
        let ry = ty(to_f64(&r.y1));
        let rw = (to_f64(&r.x1) - to_f64(&r.x0)) * scale;
        let rh = (to_f64(&r.y1) - to_f64(&r.y0)) * scale;
        let _ = writeln!(
            out,
            "  <rect x=\"{rx:.4}\" y=\"{ry:.4}\" width=\"{rw:.4}\" height=\"{rh:.4}\" fill=\"#ffd54f\" fill-opacity=\"0.55\"/>"
        );
    }
    for e in &mesh.ledges {
        let color = if opts.color_by_level {
            let level = e.level.unwrap_or(0) as usize;
            LEVEL_COLORS[level.min(LEVEL_COLORS.len() - 1)]
        } else {
            LEVEL_COLORS[0]
        };
        for pair in e.vertices.windows(2) {
            let a = mesh.vertex(pair[0]);
            let b = mesh.vertex(pair[1]);
            let _ = writeln!(
                out,
                "  <line x1=\"{:.4}\" y1=\"{:.4}\" x2=\"{:.4}\" y2=\"{:.4}\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                tx(to_f64(&a.x)),
                ty(to_f64(&a.y)),
                tx(to_f64(&b.x)),
                ty(to_f64(&b.y)),
            );
        }
    }
    for (id, text) in &opts.labels {
        let e = mesh.ledge(*id);
        let mid = (to_f64(&e.lo) + to_f64(&e.hi)) / 2.0;
        let (lx, ly) = match e.orientation {
            crate::mesh::Orientation::Horizontal => (tx(mid), ty(to_f64(&e.fixed)) - 3.0),
            crate::mesh::Orientation::Vertical => (tx(to_f64(&e.fixed)) + 3.0, ty(mid)),
        };
        let _ = writeln!(
            out,
            "  <text x=\"{lx:.4}\" y=\"{ly:.4}\" font-size=\"{:.2}\" fill=\"#555555\">{text}</text>",
            scale * 0.3
        );
    }
    out.push_str("</svg>\n");
    out
}
