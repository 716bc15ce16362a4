//! Closed forms computed independently of the library's routes.

use std::f64::consts::PI;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hilbertlab::benzecri::{central_moments, sandwich_radii, standardize};
use hilbertlab::body::{ConvexBody, MarkedBody};
use hilbertlab::hilbert::distance_value;
use hilbertlab::{AffineChart, ProjectivePoint};

/// Hilbert distance in the open positive orthant of `P^2`:
/// half the spread of the log coordinate ratios.
fn simplex_distance(x: &[f64; 3], y: &[f64; 3]) -> f64 {
    let logs: Vec<f64> = (0..3).map(|i| (y[i] / x[i]).ln()).collect();
    let (lo, hi) = logs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    0.5 * (hi - lo)
}

#[test]
fn triangle_distance_is_log_ratio_spread() {
    // Triangle with vertices (0,0), (1,0), (0,1): barycentric coordinates are
    // (u, v, 1 - u - v), and the projective change of coordinates carries it to
    // the positive orthant.
    let tri = ConvexBody::from_vertices(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..500 {
        let mut bary = || {
            let w: [f64; 3] = [0, 1, 2].map(|_| rng.gen_range(0.01..1.0));
            let s: f64 = w.iter().sum();
            w.map(|x| x / s)
        };
        let (a, b) = (bary(), bary());
        let d = distance_value(
            &tri,
            &ProjectivePoint::from_affine(&[a[0], a[1]]),
            &ProjectivePoint::from_affine(&[b[0], b[1]]),
        )
        .unwrap();
        let expected = simplex_distance(&a, &b);
        assert!(
            (d - expected).abs() <= 1e-10 * (1.0 + expected),
            "{d} vs {expected}"
        );
    }
}

#[test]
fn square_axis_distance_is_cross_ratio() {
    let sq = ConvexBody::from_vertices(&[
        vec![1.0, 1.0],
        vec![-1.0, 1.0],
        vec![-1.0, -1.0],
        vec![1.0, -1.0],
    ])
    .unwrap();
    for (s, t) in [(-0.9f64, 0.3f64), (0.0, 0.99), (0.25, 0.5)] {
        // Chord [-1, 1] along the x axis.
        let expected = 0.5
            * (((1.0 - s) * (1.0 + t)) / ((1.0 + s) * (1.0 - t)))
                .ln()
                .abs();
        let d = distance_value(
            &sq,
            &ProjectivePoint::from_affine(&[s, 0.0]),
            &ProjectivePoint::from_affine(&[t, 0.0]),
        )
        .unwrap();
        assert!((d - expected).abs() < 1e-12, "{d} vs {expected}");
    }
}

#[test]
fn polygon_moments_match_shoelace() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..20 {
        // Points on a circle are in convex position; the shoelace sums need them in order.
        let mut angles: Vec<f64> = (0..rng.gen_range(3..9))
            .map(|_| rng.gen_range(0.0..2.0 * PI))
            .collect();
        angles.sort_by(f64::total_cmp);
        let pts: Vec<[f64; 2]> = angles
            .iter()
            .map(|t| [2.0 + t.cos(), -1.0 + t.sin()])
            .collect();
        let (mut area, mut cx, mut cy, mut ixx) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..pts.len() {
            let ([x0, y0], [x1, y1]) = (pts[i], pts[(i + 1) % pts.len()]);
            let c = x0 * y1 - x1 * y0;
            area += c / 2.0;
            cx += (x0 + x1) * c / 6.0;
            cy += (y0 + y1) * c / 6.0;
            ixx += (x0 * x0 + x0 * x1 + x1 * x1) * c / 12.0;
        }
        let (cx, cy) = (cx / area, cy / area);
        let ixx_central = ixx - area * cx * cx;

        let body =
            ConvexBody::from_vertices(&pts.iter().map(|p| p.to_vec()).collect::<Vec<_>>()).unwrap();
        let m = central_moments(&body, &AffineChart::standard(2)).unwrap();
        assert!((m.volume - area).abs() < 1e-12 * area.max(1.0));
        assert!((m.centroid - DVector::from_vec(vec![cx, cy])).amax() < 1e-12);
        assert!((m.second_moment[(0, 0)] - ixx_central).abs() < 1e-12);
    }
}

#[test]
fn standard_triangle_radii() {
    // A standard triangle is equilateral about its centroid, with per-axis
    // second moment equal to that of the unit disk: (3 sqrt 3 / 2) r^4 = pi / 4.
    let r = (PI / (6.0 * 3f64.sqrt())).powf(0.25);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..10 {
        let pts: Vec<Vec<f64>> = (0..3)
            .map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)])
            .collect();
        let Ok(tri) = ConvexBody::from_vertices(&pts) else {
            continue;
        };
        let u = [0, 1, 2].map(|_| rng.gen_range(0.1..1.0));
        let s: f64 = u.iter().sum();
        let x: Vec<f64> = (0..2)
            .map(|k| (0..3).map(|i| u[i] / s * pts[i][k]).sum())
            .collect();
        let mb = MarkedBody::new(tri, ProjectivePoint::from_affine(&x)).unwrap();
        let std = mb.transformed(&standardize(&mb).unwrap().map).unwrap();
        let radii = sandwich_radii(std.body()).unwrap();
        assert!((radii.inner - r).abs() < 1e-9, "{} vs {r}", radii.inner);
        assert!((radii.outer - 2.0 * r).abs() < 1e-9);
    }
}
