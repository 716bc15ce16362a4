//! The Hilbert metric of a properly convex body.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::body::ConvexBody;
use crate::error::{HilbertError, Result};
use crate::projective::{apply_map, ProjectiveMap, ProjectivePoint};

/// A Hilbert distance together with the chord endpoints it was read from.
#[derive(Debug, Clone, Serialize)]
pub struct HilbertDistance {
    pub value: f64,
    /// `(a, b)` ordered `b, x, y, a` along the chord; absent when `x = y`.
    pub endpoints: Option<(ProjectivePoint, ProjectivePoint)>,
}

/// `1/2 log [a:b:x:y]` for chord parameters `t_b < 0 = x < 1 = y < t_a`.
pub(crate) fn log_cross_ratio(tb: f64, ta: f64) -> f64 {
    0.5 * (ta.ln() + (1.0 - tb).ln() - (ta - 1.0).ln() - (-tb).ln())
}

pub fn distance(
    body: &ConvexBody,
    x: &ProjectivePoint,
    y: &ProjectivePoint,
) -> Result<HilbertDistance> {
    let xr = body.interior_representative(x)?;
    let yr = body.interior_representative(y)?;
    if x == y {
        return Ok(HilbertDistance {
            value: 0.0,
            endpoints: None,
        });
    }
    let d = &yr - &xr;
    let (tb, ta) = body.chord_params(&xr, &d)?;
    let a = ProjectivePoint::new(&xr + &d * ta)?;
    let b = ProjectivePoint::new(&xr + &d * tb)?;
    Ok(HilbertDistance {
        value: log_cross_ratio(tb, ta).max(0.0),
        endpoints: Some((a, b)),
    })
}

/// Distance value only, skipping endpoint construction.
pub fn distance_value(body: &ConvexBody, x: &ProjectivePoint, y: &ProjectivePoint) -> Result<f64> {
    let xr = body.interior_representative(x)?;
    let yr = body.interior_representative(y)?;
    distance_between_representatives(body, &xr, &yr)
}

pub(crate) fn distance_between_representatives(
    body: &ConvexBody,
    xr: &DVector<f64>,
    yr: &DVector<f64>,
) -> Result<f64> {
    let d = yr - xr;
    if d.norm() <= 1e-14 * xr.norm() {
        return Ok(0.0);
    }
    let (tb, ta) = body.chord_params(xr, &d)?;
    Ok(log_cross_ratio(tb, ta).max(0.0))
}

/// `d(x, g x)` for an automorphism `g`.
pub fn displacement(body: &ConvexBody, g: &ProjectiveMap, x: &ProjectivePoint) -> Result<f64> {
    if !body.is_automorphism(g)? {
        return Err(HilbertError::NotAnAutomorphism);
    }
    displacement_unchecked(body, g, x)
}

/// `d(x, g x)` without testing that `g` preserves the body; `g x` must be interior.
pub fn displacement_unchecked(
    body: &ConvexBody,
    g: &ProjectiveMap,
    x: &ProjectivePoint,
) -> Result<f64> {
    let gx = apply_map(g, x)?;
    distance_value(body, x, &gx)
}

/// Unit directions in the storage chart: evenly spaced angles for `n = 2`,
/// seeded Gaussian directions otherwise.
pub fn sample_directions(n: usize, k: usize) -> Vec<DVector<f64>> {
    if n == 2 {
        return (0..k)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                DVector::from_vec(vec![t.cos(), t.sin()])
            })
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    (0..k)
        .map(|_| {
            let v = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            let norm: f64 = v.norm();
            v / norm
        })
        .collect()
}

/// Points at Hilbert distance `r` from `center` along the given chart directions.
pub fn ball_boundary_along(
    body: &ConvexBody,
    center: &ProjectivePoint,
    r: f64,
    directions: &[DVector<f64>],
) -> Result<Vec<ProjectivePoint>> {
    if !(r > 0.0) {
        return Err(HilbertError::DegenerateConfiguration(
            "radius must be positive".into(),
        ));
    }
    let xr = body.interior_representative(center)?;
    let emb = body.storage_chart().embedding_matrix();
    let n = body.dim();
    let kk = (2.0 * r).exp();
    directions
        .iter()
        .map(|w| {
            if w.len() != n {
                return Err(HilbertError::DimensionMismatch {
                    expected: n,
                    got: w.len(),
                });
            }
            let mut dw = DVector::zeros(n + 1);
            dw.rows_mut(0, n).copy_from(w);
            let d = &emb * dw;
            let (tb, ta) = body.chord_params(&xr, &d)?;
            // Solve [t_a : t_b : 0 : t] = e^{2r} for t in (0, t_a).
            let (a, b) = (ta, -tb);
            let t = a * b * (kk - 1.0) / (a + kk * b);
            ProjectivePoint::new(&xr + d * t)
        })
        .collect()
}

/// `k` points on the boundary of the Hilbert ball of radius `r` about `center`.
pub fn ball_boundary_samples(
    body: &ConvexBody,
    center: &ProjectivePoint,
    r: f64,
    k: usize,
) -> Result<Vec<ProjectivePoint>> {
    if k < 3 {
        return Err(HilbertError::DegenerateConfiguration(
            "at least 3 samples are required".into(),
        ));
    }
    ball_boundary_along(body, center, r, &sample_directions(body.dim(), k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::{make_family, Boost, Containment, FamilyParams, FamilyTag};

    fn pt(u: &[f64]) -> ProjectivePoint {
        ProjectivePoint::from_affine(u)
    }

    fn square() -> ConvexBody {
        ConvexBody::from_vertices(&[
            vec![1.0, 1.0],
            vec![-1.0, 1.0],
            vec![-1.0, -1.0],
            vec![1.0, -1.0],
        ])
        .unwrap()
    }

    #[test]
    fn disk_and_square_examples() {
        let half_ln3 = 0.5 * 3f64.ln();
        let disk = ConvexBody::unit_ball(2);
        let d = distance(&disk, &pt(&[0.0, 0.0]), &pt(&[0.5, 0.0])).unwrap();
        assert!((d.value - half_ln3).abs() < 1e-14);
        assert!((d.value - 0.5f64.atanh()).abs() < 1e-14);
        let d = distance(&square(), &pt(&[0.0, 0.0]), &pt(&[0.5, 0.0])).unwrap();
        assert!((d.value - half_ln3).abs() < 1e-14);
        let (a, b) = d.endpoints.unwrap();
        assert!(a.approx_eq(&pt(&[1.0, 0.0]), 1e-12) && b.approx_eq(&pt(&[-1.0, 0.0]), 1e-12));
        let x = pt(&[0.2, -0.3]);
        assert_eq!(distance(&square(), &x, &x).unwrap().value, 0.0);
    }

    #[test]
    fn value_matches_cross_ratio() {
        let body = square();
        let (x, y) = (pt(&[0.1, 0.7]), pt(&[-0.4, 0.2]));
        let d = distance(&body, &x, &y).unwrap();
        let (a, b) = d.endpoints.clone().unwrap();
        let cr = crate::projective::cross_ratio(&a, &b, &x, &y).unwrap();
        assert!((d.value - 0.5 * cr.ln()).abs() < 1e-12);
    }

    #[test]
    fn outside_points_rejected() {
        let disk = ConvexBody::unit_ball(2);
        assert_eq!(
            distance(&disk, &pt(&[0.0, 0.0]), &pt(&[1.0, 0.0])).unwrap_err(),
            HilbertError::PointOutsideBody
        );
    }

    #[test]
    fn boost_displacement() {
        let params = FamilyParams {
            boosts: vec![Boost {
                axis: 0,
                rapidity: 0.3,
            }],
            ..Default::default()
        };
        let fam = make_family(FamilyTag::Ellipsoid, 2, &params).unwrap();
        let d = displacement(&fam.body, &fam.generators[0], &fam.basepoint).unwrap();
        assert!((d - 0.3).abs() < 1e-12);
        let stretch = ProjectiveMap::from_rows(&[
            vec![2.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert_eq!(
            displacement(&fam.body, &stretch, &fam.basepoint).unwrap_err(),
            HilbertError::NotAnAutomorphism
        );
    }

    #[test]
    fn klein_ball_is_a_circle() {
        let disk = ConvexBody::unit_ball(2);
        let pts = ball_boundary_samples(&disk, &pt(&[0.0, 0.0]), 0.5, 16).unwrap();
        assert_eq!(pts.len(), 16);
        for p in &pts {
            let u = disk.storage_chart().coords(p).unwrap();
            assert!((u.norm() - 0.5f64.tanh()).abs() < 1e-12);
        }
    }

    #[test]
    fn large_balls_hug_the_boundary() {
        let body = square();
        let c = pt(&[0.3, -0.2]);
        for p in ball_boundary_samples(&body, &c, 20.0, 12).unwrap() {
            assert_ne!(body.contains(&p), Containment::Exterior);
            let u = body.storage_chart().coords(&p).unwrap();
            let gap = 1.0 - u[0].abs().max(u[1].abs());
            assert!(gap <= 1e-6, "{gap}");
        }
        assert_eq!(
            ball_boundary_samples(&body, &pt(&[0.0, 0.0]), 1.0, 4)
                .unwrap()
                .len(),
            4
        );
    }
}
