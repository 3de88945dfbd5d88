//! SVG rendering of 2-D projections in regularized coordinates.

use std::fmt::Write as _;

use nalgebra::DVector;

use crate::domain::SampleSet;
use crate::error::{Error, Result};
use crate::factorization;
use crate::model::ConvexModel;

/// Outline of the shadow of `{S δ : |δ|∞ ≤ 1}` on the `(i, j)` plane.
///
/// The shadow is a 2-D zonotope; its vertices are walked by adding the
/// generators `(S[i][k], S[j][k])` sorted by angle. Used for display only.
pub fn display_hull(shape: &factorization::ShapeMatrix, i: usize, j: usize) -> Vec<[f64; 2]> {
    let s = &shape.entries;
    let mut gens: Vec<[f64; 2]> = (0..s.ncols())
        .map(|k| [s[(i, k)], s[(j, k)]])
        .filter(|g| g[0] != 0.0 || g[1] != 0.0)
        .map(|g| if g[1] < 0.0 || (g[1] == 0.0 && g[0] < 0.0) { [-g[0], -g[1]] } else { g })
        .collect();
    gens.sort_by(|a, b| a[1].atan2(a[0]).total_cmp(&b[1].atan2(b[0])));
    let mut p = gens.iter().fold([0.0, 0.0], |acc, g| [acc[0] - g[0], acc[1] - g[1]]);
    let mut out = Vec::with_capacity(2 * gens.len());
    for sign in [2.0, -2.0] {
        for g in &gens {
            out.push(p);
            p = [p[0] + sign * g[0], p[1] + sign * g[1]];
        }
    }
    out
}

fn ellipse_outline(r: f64, points: usize) -> Vec<[f64; 2]> {
    let c = (1.0 - r * r).max(0.0).sqrt();
    (0..points)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / points as f64;
            let (s, co) = t.sin_cos();
            [co, r * co + c * s]
        })
        .collect()
}

fn star(x: f64, y: f64, size: f64) -> String {
    let mut pts = String::new();
    for k in 0..10 {
        let rad = if k % 2 == 0 { size } else { size * 0.45 };
        let t = std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * k as f64 / 5.0;
        let _ = write!(pts, "{:.5},{:.5} ", x + rad * t.cos(), y + rad * t.sin());
    }
    pts.trim_end().to_string()
}

fn path(points: &[[f64; 2]]) -> String {
    let mut d = String::new();
    for (k, p) in points.iter().enumerate() {
        let _ = write!(d, "{}{:.6},{:.6} ", if k == 0 { "M" } else { "L" }, p[0], p[1]);
    }
    d.push('Z');
    d
}

/// Self-contained SVG of the model projected onto axes `i` and `j`.
///
/// Ellipsoids are drawn exactly. Parallelepipeds are drawn as the shadow
/// outline, labeled as a display hull. Overlay samples are circles when the
/// full model encloses them and stars otherwise.
pub fn projection_svg(model: &ConvexModel, i: usize, j: usize, overlay: Option<&SampleSet>) -> Result<String> {
    let n = model.dim();
    for k in [i, j] {
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, dim: n });
        }
    }
    if i == j {
        return Err(Error::InvalidArgument("projection plane needs two distinct axes".into()));
    }
    let spec = model.spec();
    let names = spec.names();
    let iv = spec.intervals();
    let (outline, caption) = match model.shape() {
        None => {
            (ellipse_outline(model.project_2d(i, j)?[(0, 1)], 360), format!("{} projection", model.variant().label()))
        }
        Some(s) => (display_hull(s, i, j), format!("{} display hull (visualization only)", model.variant().label())),
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="-1.1 -1.1 2.2 2.2" width="600" height="600">"#
    );
    let _ = writeln!(svg, "<title>{caption}: {} vs {}</title>", escape(&names[i]), escape(&names[j]));
    let _ = writeln!(svg, r#"<rect x="-1.1" y="-1.1" width="2.2" height="2.2" style="fill:#ffffff"/>"#);
    let _ = writeln!(svg, r#"<g transform="scale(1,-1)">"#);
    let _ = writeln!(
        svg,
        r#"<rect x="-1" y="-1" width="2" height="2" style="fill:none;stroke:#888888;stroke-width:0.006"/>"#
    );
    let _ = writeln!(svg, r#"<line x1="-1" y1="0" x2="1" y2="0" style="stroke:#cccccc;stroke-width:0.004"/>"#);
    let _ = writeln!(svg, r#"<line x1="0" y1="-1" x2="0" y2="1" style="stroke:#cccccc;stroke-width:0.004"/>"#);
    let _ = writeln!(
        svg,
        r#"<path class="domain" d="{}" style="fill:#4a90d9;fill-opacity:0.2;stroke:#1f5fa8;stroke-width:0.01"/>"#,
        path(&outline)
    );
    if let Some(samples) = overlay {
        let aligned = samples.aligned_to(spec)?;
        let marks = model.memberships(&aligned)?;
        let rows = aligned.rows();
        let (mi, ri) = (iv[i].midpoint(), iv[i].radius());
        let (mj, rj) = (iv[j].midpoint(), iv[j].radius());
        for (s, m) in marks.iter().enumerate() {
            let x = (rows[(s, i)] - mi) / ri;
            let y = (rows[(s, j)] - mj) / rj;
            if m.inside {
                let _ = writeln!(
                    svg,
                    r#"<circle class="inside" cx="{x:.6}" cy="{y:.6}" r="0.018" style="fill:none;stroke:#222222;stroke-width:0.006"/>"#
                );
            } else {
                let _ = writeln!(
                    svg,
                    r#"<polygon class="outside" points="{}" style="fill:#d0021b;stroke:none"/>"#,
                    star(x, y, 0.03)
                );
            }
        }
    }
    let _ = writeln!(svg, "</g>");
    let label = r#"style="font-family:sans-serif;font-size:0.045px;fill:#333333""#;
    let _ = writeln!(svg, r#"<text x="-1" y="1.07" {label}>{}</text>"#, iv[i].lower);
    let _ = writeln!(svg, r#"<text x="1" y="1.07" text-anchor="end" {label}>{}</text>"#, iv[i].upper);
    let _ = writeln!(svg, r#"<text x="0" y="1.07" text-anchor="middle" {label}>{}</text>"#, escape(&names[i]));
    let _ = writeln!(svg, r#"<text x="-1.02" y="1" text-anchor="end" {label}>{}</text>"#, iv[j].lower);
    let _ = writeln!(svg, r#"<text x="-1.02" y="-0.97" text-anchor="end" {label}>{}</text>"#, iv[j].upper);
    let _ = writeln!(svg, r#"<text x="-1.02" y="0" text-anchor="end" {label}>{}</text>"#, escape(&names[j]));
    let _ = writeln!(svg, r#"<text x="0" y="-1.04" text-anchor="middle" {label}>{}</text>"#, escape(&caption));
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Corners of the projected domain, `S δ` restricted to the `(i, j)` plane
/// for every sign vector `δ`. Exponential in `n`; meant for small models.
pub fn projected_vertices(model: &ConvexModel, i: usize, j: usize) -> Vec<[f64; 2]> {
    let n = model.dim();
    let p = model.factor();
    (0..1usize << n)
        .map(|mask| {
            let d = DVector::from_fn(n, |k, _| if mask >> k & 1 == 1 { 1.0 } else { -1.0 });
            let u = p * d;
            [u[i], u[j]]
        })
        .collect()
}
