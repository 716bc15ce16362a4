//! SVG pictures of planar bodies and their Hilbert balls.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;

use crate::body::ConvexBody;
use crate::error::{HilbertError, Result};
use crate::hilbert::{ball_boundary_samples, sample_directions};
use crate::projective::ProjectivePoint;

pub const CANVAS: f64 = 512.0;
pub const MARGIN: f64 = 0.05;
/// Samples per ball curve and per curved outline.
pub const CURVE_SAMPLES: usize = 256;

/// Chart coordinates of everything drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderGeometry {
    pub outline: Vec<[f64; 2]>,
    pub basepoint: [f64; 2],
    pub balls: Vec<(f64, Vec<[f64; 2]>)>,
}

fn xy(v: &DVector<f64>) -> [f64; 2] {
    [v[0], v[1]]
}

/// Outline, basepoint and ball curves in the storage chart of a planar body.
pub fn render_geometry(
    body: &ConvexBody,
    basepoint: &ProjectivePoint,
    radii: &[f64],
) -> Result<RenderGeometry> {
    if body.dim() != 2 {
        return Err(HilbertError::UnsupportedDimension(body.dim()));
    }
    let chart = body.storage_chart();
    if !body.bounded_in(chart) {
        return Err(HilbertError::UnboundedInChart);
    }
    let xr = body.interior_representative(basepoint)?;
    let outline = match body.as_polytope() {
        Some(_) => body.vertices_in(chart)?.iter().map(xy).collect(),
        None => {
            let emb = chart.embedding_matrix();
            sample_directions(2, CURVE_SAMPLES)
                .iter()
                .map(|w| {
                    let d = &emb * DVector::from_vec(vec![w[0], w[1], 0.0]);
                    let (_, ta) = body.chord_params(&xr, &d)?;
                    chart.coords_of(&(&xr + d * ta)).map(|v| xy(&v))
                })
                .collect::<Result<_>>()?
        }
    };
    let balls = radii
        .iter()
        .map(|&r| {
            let pts = ball_boundary_samples(body, basepoint, r, CURVE_SAMPLES)?;
            let pts = pts
                .iter()
                .map(|p| chart.coords(p).map(|v| xy(&v)))
                .collect::<Result<_>>()?;
            Ok((r, pts))
        })
        .collect::<Result<_>>()?;
    Ok(RenderGeometry {
        outline,
        basepoint: xy(&chart.coords(basepoint)?),
        balls,
    })
}

fn num(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn path(points: &[[f64; 2]], to_canvas: &impl Fn([f64; 2]) -> [f64; 2]) -> String {
    let mut d = String::new();
    for (i, p) in points.iter().enumerate() {
        let [x, y] = to_canvas(*p);
        let _ = write!(
            d,
            "{}{} {} ",
            if i == 0 { "M" } else { "L" },
            num(x),
            num(y)
        );
    }
    d.push('Z');
    d
}

/// SVG document on a fixed 512 by 512 canvas with a 5% margin; the body
/// outline is fitted to the canvas.
pub fn svg_string(body: &ConvexBody, basepoint: &ProjectivePoint, radii: &[f64]) -> Result<String> {
    let g = render_geometry(body, basepoint, radii)?;
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &g.outline {
        for i in 0..2 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    let inner = CANVAS * (1.0 - 2.0 * MARGIN);
    let scale = inner / (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let mid = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    let to_canvas = |p: [f64; 2]| {
        [
            CANVAS / 2.0 + scale * (p[0] - mid[0]),
            CANVAS / 2.0 - scale * (p[1] - mid[1]),
        ]
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="512" height="512" viewBox="0 0 512 512">"#
    );
    let _ = writeln!(
        out,
        r#"  <path class="body" d="{}" fill="none" stroke="black" stroke-width="1.5"/>"#,
        path(&g.outline, &to_canvas)
    );
    for (r, pts) in &g.balls {
        let _ = writeln!(
            out,
            r#"  <path class="ball" data-radius="{}" d="{}" fill="none" stroke="steelblue" stroke-width="1"/>"#,
            num(*r),
            path(pts, &to_canvas)
        );
    }
    let [cx, cy] = to_canvas(g.basepoint);
    let _ = writeln!(
        out,
        r#"  <circle class="basepoint" cx="{}" cy="{}" r="3" fill="crimson"/>"#,
        num(cx),
        num(cy)
    );
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn render_svg(
    body: &ConvexBody,
    basepoint: &ProjectivePoint,
    radii: &[f64],
    out: &Path,
) -> Result<()> {
    std::fs::write(out, svg_string(body, basepoint, radii)?)?;
    Ok(())
}
