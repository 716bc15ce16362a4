//! Seeded random bodies, points and maps for experiments and checks.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::body::ConvexBody;
use crate::projective::{det_normalize, ProjectiveMap, ProjectivePoint};

/// Convex hull of 3 to 10 points at random angles and radii in `[0.5, 1.5]`.
pub fn random_polygon<R: Rng + ?Sized>(rng: &mut R) -> ConvexBody {
    loop {
        let k = rng.gen_range(3..=10);
        let pts: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                let t = rng.gen_range(0.0..std::f64::consts::TAU);
                let r = rng.gen_range(0.5..1.5);
                vec![r * t.cos(), r * t.sin()]
            })
            .collect();
        if let Ok(body) = ConvexBody::from_vertices(&pts) {
            // Skip slivers whose hull is numerically flat.
            let chart = body.storage_chart().clone();
            if let Ok(m) = crate::benzecri::central_moments(&body, &chart) {
                if m.volume > 1e-3 {
                    return body;
                }
            }
        }
    }
}

/// Interior point of a body: a Dirichlet combination of the vertices of a
/// polytope, or a uniformly random radius fraction in `[0, 0.95)` of an ellipsoid
/// along a random direction.
pub fn random_interior_point<R: Rng + ?Sized>(body: &ConvexBody, rng: &mut R) -> ProjectivePoint {
    let chart = body.storage_chart();
    let n = body.dim();
    match body.as_polytope() {
        Some(p) => {
            let weights: Vec<f64> = p.rays().iter().map(|_| Exp1.sample(rng)).collect();
            let total: f64 = weights.iter().sum();
            let mut v = DVector::zeros(n + 1);
            for (w, r) in weights.iter().zip(p.rays()) {
                v += r / chart.covector().dot(r) * (w / total);
            }
            ProjectivePoint::new(v).expect("convex combination is nonzero")
        }
        None => {
            let c = crate::benzecri::centroid(body, chart)
                .expect("stored bodies are bounded in their chart");
            let mut dir = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
            dir /= dir.norm();
            let edge = crate::hilbert::ball_boundary_along(body, &chart.embed(&c), 40.0, &[dir])
                .expect("center is interior");
            let e = chart.coords(&edge[0]).expect("finite");
            let s: f64 = rng.gen_range(0.0..0.95);
            chart.embed(&(&c + (e - &c) * s))
        }
    }
}

/// `I + s N` with Gaussian `N`, redrawn until its condition number is below 50.
pub fn random_map<R: Rng + ?Sized>(n: usize, spread: f64, rng: &mut R) -> ProjectiveMap {
    loop {
        let m = DMatrix::from_fn(n + 1, n + 1, |i, j| {
            let g: f64 = StandardNormal.sample(rng);
            if i == j {
                1.0 + spread * g
            } else {
                spread * g
            }
        });
        let sv = crate::linalg::sorted_singular_values(&m);
        if sv[n] > 0.0 && sv[0] / sv[n] < 50.0 {
            if let Ok(g) = det_normalize(&m) {
                return g;
            }
        }
    }
}
