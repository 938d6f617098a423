//! SVG export of developed patterns: circumcircles and triangle edges of a
//! k x k block of holonomy translates of the fundamental domain. Output is
//! byte-stable for identical inputs.

use crate::mesh::TorusTriangulation;
use crate::pattern::{C64, CirclePattern, rho_pow};

fn coord(x: f64) -> String {
    format!("{:.6}", x)
}

const CLASS_STYLE: [&str; 3] = [
    "stroke:#1f77b4;stroke-width:0.006",
    "stroke:#d62728;stroke-width:0.006",
    "stroke:#2ca02c;stroke-width:0.006;stroke-dasharray:0.02 0.012",
];

pub fn export_svg(mesh: &TorusTriangulation, pat: &CirclePattern, k: usize) -> String {
    let k = k.max(1);
    let mut circles = String::new();
    let mut edges = String::new();
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    let mut seen_edge = vec![false; mesh.n_edges];
    for n in 0..k as i64 {
        for m in 0..k as i64 {
            let (ra, rb) = rho_pow(&pat.dev.rho, m, n);
            let map = |z: C64| ra * z + rb;
            for f in 0..mesh.n_faces {
                let c = map(pat.dev.centers[f]);
                let r = ra.norm() * pat.dev.radii[f];
                circles.push_str(&format!(
                    "  <circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" style=\"stroke:#bbbbbb;stroke-width:0.004\"/>\n",
                    coord(c.re),
                    coord(c.im),
                    coord(r)
                ));
                for corner in 0..3 {
                    let h = 3 * f + corner;
                    let e = mesh.he_edge[h];
                    let a = map(pat.dev.corners[f][corner]);
                    let b = map(pat.dev.corners[f][(corner + 1) % 3]);
                    for z in [a, b] {
                        xmin = xmin.min(z.re);
                        xmax = xmax.max(z.re);
                        ymin = ymin.min(z.im);
                        ymax = ymax.max(z.im);
                    }
                    // Draw each quotient edge once per tile.
                    if (m, n) == (0, 0) {
                        if seen_edge[e] {
                            continue;
                        }
                        seen_edge[e] = true;
                    } else if mesh.he_twin[h] < h {
                        continue;
                    }
                    let style = CLASS_STYLE[mesh.edge_class[e] as usize - 1];
                    edges.push_str(&format!(
                        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" style=\"{}\"/>\n",
                        coord(a.re),
                        coord(a.im),
                        coord(b.re),
                        coord(b.im),
                        style
                    ));
                }
            }
        }
    }
    let pad = 0.05 * ((xmax - xmin).max(ymax - ymin)).max(1e-9);
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">\n{}{}</svg>\n",
        coord(xmin - pad),
        coord(ymin - pad),
        coord(xmax - xmin + 2.0 * pad),
        coord(ymax - ymin + 2.0 * pad),
        circles,
        edges
    )
}
