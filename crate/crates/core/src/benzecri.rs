//! Centroids, second moments, inertia ellipsoids and the standardization of
//! marked bodies.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::body::{ConvexBody, Ellipsoid, MarkedBody, Polytope, Shape};
use crate::error::{HilbertError, Result};
use crate::linalg;
use crate::projective::{det_normalize, AffineChart, ProjectiveMap};

/// Tolerance for `is_standard` on the exact path.
pub const EXACT_STANDARD_TOL: f64 = 1e-6;
/// Tolerance for `is_standard` when moments are estimated by sampling.
pub const MONTE_CARLO_STANDARD_TOL: f64 = 1e-4;

const MAX_NEWTON_STEPS: usize = 100;
const DAMPING_FLOOR: f64 = 1.0 / 1048576.0;
const FD_STEP: f64 = 1e-6;

/// Volume of the unit ball of `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// `c_n`: the second moment `int_B x_1^2` of the unit ball of `R^n`.
pub fn unit_ball_moment(n: usize) -> f64 {
    unit_ball_volume(n) / (n + 2) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "path", rename_all = "snake_case")]
pub enum Exactness {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentData {
    #[serde(serialize_with = "linalg::ser_vector")]
    pub centroid: DVector<f64>,
    /// `int (u - p)(u - p)^T du` about the requested point `p`.
    #[serde(serialize_with = "linalg::ser_matrix")]
    pub second_moment: DMatrix<f64>,
    #[serde(serialize_with = "linalg::ser_vector")]
    pub about: DVector<f64>,
    pub volume: f64,
    pub exactness: Exactness,
}

/// Affine chart data of an ellipsoid: `(u - c)^T A (u - c) < kappa`.
fn quadric_in_chart(
    e: &Ellipsoid,
    chart: &AffineChart,
) -> Result<(DMatrix<f64>, DVector<f64>, f64)> {
    let n = chart.dim();
    let k = chart.embedding_matrix();
    let qc = k.transpose() * e.form() * &k;
    let a = qc.view((0, 0), (n, n)).into_owned();
    let (vals, _) = linalg::sym_eigen(&a);
    if vals[0] <= 1e-12 * vals[n - 1].abs() {
        return Err(HilbertError::UnboundedInChart);
    }
    let b = qc.view((0, n), (n, 1)).column(0).into_owned();
    let center = -a.clone().try_inverse().expect("positive definite") * b;
    let kappa = center.dot(&(&a * &center)) - qc[(n, n)];
    Ok((a, center, kappa))
}

/// Linear map `L` with the ellipsoid equal to `c + L (unit ball)`.
fn ellipsoid_axes(a: &DMatrix<f64>, kappa: f64) -> DMatrix<f64> {
    linalg::sym_fn(&(a / kappa), |l| 1.0 / l.sqrt())
}

fn ensure_bounded(body: &ConvexBody, chart: &AffineChart) -> Result<()> {
    if chart.dim() != body.dim() {
        return Err(HilbertError::DimensionMismatch {
            expected: body.dim(),
            got: chart.dim(),
        });
    }
    if !body.bounded_in(chart) {
        return Err(HilbertError::UnboundedInChart);
    }
    Ok(())
}

/// Exact volume, centroid and second moment about `about` of a polytope,
/// summed over its triangulation.
fn polytope_moments(p: &Polytope, chart: &AffineChart, about: &DVector<f64>) -> Result<MomentData> {
    let n = chart.dim();
    let pts: Vec<DVector<f64>> = p
        .rays()
        .iter()
        .map(|r| chart.coords_of(r).map(|u| u - about))
        .collect::<Result<_>>()?;
    let fact: f64 = (1..=n).map(|i| i as f64).product();
    let mut vol = 0.0;
    let mut first = DVector::zeros(n);
    let mut second = DMatrix::zeros(n, n);
    for s in p.simplices() {
        let e = DMatrix::from_fn(n, n, |r, c| pts[s[c + 1]][r] - pts[s[0]][r]);
        let v = linalg::det(&e).abs() / fact;
        let mut sum = DVector::zeros(n);
        let mut outer = DMatrix::zeros(n, n);
        for &i in s {
            sum += &pts[i];
            outer += &pts[i] * pts[i].transpose();
        }
        vol += v;
        first += &sum * (v / (n + 1) as f64);
        second += (outer + &sum * sum.transpose()) * (v / ((n + 1) * (n + 2)) as f64);
    }
    Ok(MomentData {
        centroid: first / vol + about,
        second_moment: second,
        about: about.clone(),
        volume: vol,
        exactness: Exactness::Exact,
    })
}

fn ellipsoid_moments(
    e: &Ellipsoid,
    chart: &AffineChart,
    about: &DVector<f64>,
) -> Result<MomentData> {
    let n = chart.dim();
    let (a, center, kappa) = quadric_in_chart(e, chart)?;
    let l = ellipsoid_axes(&a, kappa);
    let vol = unit_ball_volume(n) * linalg::det(&l).abs();
    let shift = &center - about;
    let second = &l * l.transpose() * (vol / (n + 2) as f64) + &shift * shift.transpose() * vol;
    Ok(MomentData {
        centroid: center,
        second_moment: second,
        about: about.clone(),
        volume: vol,
        exactness: Exactness::Exact,
    })
}

/// Exact moments of `body` in `chart` about the affine point `about`.
pub fn second_moment_matrix(
    body: &ConvexBody,
    about: &DVector<f64>,
    chart: &AffineChart,
) -> Result<MomentData> {
    ensure_bounded(body, chart)?;
    if about.len() != body.dim() {
        return Err(HilbertError::DimensionMismatch {
            expected: body.dim(),
            got: about.len(),
        });
    }
    match body.shape() {
        Shape::Polytope(p) => polytope_moments(p, chart, about),
        Shape::Ellipsoid(e) => ellipsoid_moments(e, chart, about),
    }
}

/// Center of mass of `body` in affine coordinates of `chart`.
pub fn centroid(body: &ConvexBody, chart: &AffineChart) -> Result<DVector<f64>> {
    Ok(second_moment_matrix(body, &DVector::zeros(body.dim()), chart)?.centroid)
}

/// Moments about the centroid.
pub fn central_moments(body: &ConvexBody, chart: &AffineChart) -> Result<MomentData> {
    let c = centroid(body, chart)?;
    second_moment_matrix(body, &c, chart)
}

/// The ellipsoid `center + T (unit ball)` with the same second moments as the body.
#[derive(Debug, Clone, Serialize)]
pub struct InertiaEllipsoid {
    #[serde(serialize_with = "linalg::ser_vector")]
    pub center: DVector<f64>,
    /// Symmetric positive-definite shape matrix.
    #[serde(serialize_with = "linalg::ser_matrix")]
    pub shape: DMatrix<f64>,
}

impl InertiaEllipsoid {
    /// Symmetric `T` solving `det(T) c_n T^2 = M`.
    pub fn from_moments(center: DVector<f64>, m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        let cn = unit_ball_moment(n);
        let (vals, _) = linalg::sym_eigen(m);
        if vals[0] <= 0.0 {
            return Err(HilbertError::DegenerateBody(
                "second moment is not positive definite".into(),
            ));
        }
        let log_p = vals.iter().map(|mu| (mu / cn).ln()).sum::<f64>() / (n + 2) as f64;
        let p = log_p.exp();
        let shape = linalg::sym_fn(m, |mu| (mu / (cn * p)).sqrt());
        Ok(Self { center, shape })
    }

    /// Semi-axis lengths in increasing order.
    pub fn semi_axes(&self) -> Vec<f64> {
        linalg::sym_eigen(&self.shape).0.iter().cloned().collect()
    }

    /// The ellipsoid as a body of `P^n`, given the chart its coordinates live in.
    pub fn to_body(&self, chart: &AffineChart) -> Result<ConvexBody> {
        let n = self.center.len();
        let s_inv = self
            .shape
            .clone()
            .try_inverse()
            .ok_or_else(|| HilbertError::DegenerateBody("flat ellipsoid".into()))?;
        let s = s_inv.transpose() * &s_inv;
        let sc = &s * &self.center;
        let mut q = DMatrix::zeros(n + 1, n + 1);
        q.view_mut((0, 0), (n, n)).copy_from(&s);
        q.view_mut((0, n), (n, 1)).copy_from(&(-&sc));
        q.view_mut((n, 0), (1, n)).copy_from(&(-sc.transpose()));
        q[(n, n)] = self.center.dot(&sc) - 1.0;
        let k_inv = chart
            .embedding_matrix()
            .try_inverse()
            .expect("embedding is invertible");
        ConvexBody::ellipsoid(k_inv.transpose() * q * k_inv)
    }
}

pub fn inertia_ellipsoid(body: &ConvexBody, chart: &AffineChart) -> Result<InertiaEllipsoid> {
    let m = central_moments(body, chart)?;
    InertiaEllipsoid::from_moments(m.centroid, &m.second_moment)
}

/// Residuals of the four conditions defining a standard pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StandardPairCertificate {
    pub bounded: bool,
    /// `|centroid - x|` in the standard chart.
    pub centroid_offset: Option<f64>,
    /// `|x - O|` in the standard chart.
    pub basepoint_offset: Option<f64>,
    /// `|M - c_n I|_F / c_n` for the central second moment `M`.
    pub inertia_deviation: Option<f64>,
    pub tolerance: f64,
    pub valid: bool,
}

pub fn is_standard(mb: &MarkedBody, tol: f64) -> StandardPairCertificate {
    let body = mb.body();
    let n = body.dim();
    let chart = AffineChart::standard(n);
    let bounded = body.bounded_in(&chart);
    let x = chart.coords(mb.basepoint()).ok();
    let basepoint_offset = x.as_ref().map(|u| u.norm());
    let (mut centroid_offset, mut inertia_deviation) = (None, None);
    if bounded {
        if let Ok(m) = central_moments(body, &chart) {
            centroid_offset = x.as_ref().map(|u| (&m.centroid - u).norm());
            let cn = unit_ball_moment(n);
            inertia_deviation =
                Some((&m.second_moment - DMatrix::<f64>::identity(n, n) * cn).norm() / cn);
        }
    }
    let ok = |r: Option<f64>| r.is_some_and(|v| v <= tol);
    let valid = bounded && ok(centroid_offset) && ok(basepoint_offset) && ok(inertia_deviation);
    StandardPairCertificate {
        bounded,
        centroid_offset,
        basepoint_offset,
        inertia_deviation,
        tolerance: tol,
        valid,
    }
}

/// A standardizing map with its audit trail.
#[derive(Debug, Clone, Serialize)]
pub struct Standardization {
    pub map: ProjectiveMap,
    /// Covector of the chart in which the basepoint is the centroid, scaled to `xi . x = 1`.
    #[serde(serialize_with = "linalg::ser_vector")]
    pub chart_covector: DVector<f64>,
    pub newton_iterations: usize,
    /// Final norm of the centroid equation residual.
    pub residual: f64,
    pub certificate: StandardPairCertificate,
}

/// Homogeneous centroid (normalized to `xi . c = 1`) of a polytope in the chart `xi`,
/// or `None` if the chart meets the closure.
fn homogeneous_centroid(p: &Polytope, xi: &DVector<f64>) -> Option<DVector<f64>> {
    let k = xi.len();
    let mut w = Vec::with_capacity(p.rays().len());
    for r in p.rays() {
        let s = xi.dot(r);
        if s <= 1e-12 * xi.norm() {
            return None;
        }
        w.push(r / s);
    }
    let mut total = 0.0;
    let mut acc = DVector::zeros(k);
    for s in p.simplices() {
        let m = DMatrix::from_fn(k, k, |r, c| w[s[c]][r]);
        let v = linalg::det(&m).abs();
        let mut mean = DVector::zeros(k);
        for &i in s {
            mean += &w[i];
        }
        acc += mean * (v / k as f64);
        total += v;
    }
    Some(acc / total)
}

/// Solves for the chart `xi` (with `xi . xh = 1`) in which `xh` is the centroid.
fn solve_chart(p: &Polytope, xh: &DVector<f64>) -> Result<(DVector<f64>, usize, f64)> {
    let k = xh.len();
    let n = k - 1;
    let seed = p.facets().iter().fold(DVector::zeros(k), |acc, a| acc + a);
    let xi0 = &seed / seed.dot(xh);
    let w = linalg::complement_basis(xh);
    let residual = |z: &DVector<f64>| -> Option<DVector<f64>> {
        let xi = &xi0 + &w * z;
        homogeneous_centroid(p, &xi).map(|c| w.transpose() * (c - xh))
    };
    let mut z = DVector::zeros(n);
    let mut r = residual(&z)
        .ok_or_else(|| HilbertError::DegenerateBody("initial chart meets the body".into()))?;
    let mut iterations = 0;
    while r.norm() > 1e-15 {
        if iterations == MAX_NEWTON_STEPS {
            return Err(HilbertError::NonConvergence(format!(
                "{MAX_NEWTON_STEPS} Newton steps, residual {:.3e}",
                r.norm()
            )));
        }
        iterations += 1;
        let h = FD_STEP * (&xi0 + &w * &z).norm();
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[j] += h;
            zm[j] -= h;
            match (residual(&zp), residual(&zm)) {
                (Some(a), Some(b)) => jac.set_column(j, &((a - b) / (2.0 * h))),
                (Some(a), None) => jac.set_column(j, &((a - &r) / h)),
                (None, Some(b)) => jac.set_column(j, &((&r - b) / h)),
                (None, None) => {
                    return Err(HilbertError::NonConvergence(
                        "Jacobian stencil left the chart cone".into(),
                    ))
                }
            }
        }
        let step = jac
            .lu()
            .solve(&(-&r))
            .ok_or_else(|| HilbertError::NonConvergence("singular Jacobian".into()))?;
        let mut lambda = 1.0;
        loop {
            let cand = &z + &step * lambda;
            if let Some(rc) = residual(&cand) {
                if rc.norm() < r.norm() {
                    z = cand;
                    r = rc;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < DAMPING_FLOOR {
                // No further decrease available: accept a residual already at
                // rounding level, otherwise report failure.
                if r.norm() <= 1e-11 {
                    return Ok((&xi0 + &w * &z, iterations, r.norm()));
                }
                return Err(HilbertError::NonConvergence(format!(
                    "damping floor reached, residual {:.3e}",
                    r.norm()
                )));
            }
        }
    }
    Ok((&xi0 + &w * &z, iterations, r.norm()))
}

/// A projective map carrying `(Omega, x)` to a standard pair.
pub fn standardize(mb: &MarkedBody) -> Result<Standardization> {
    let body = mb.body();
    let n = body.dim();
    let rep = body.interior_representative(mb.basepoint())?;
    let xh = &rep / rep.norm();
    let (xi, iterations, residual) = match body.shape() {
        Shape::Ellipsoid(e) => {
            let qx = e.form() * &xh;
            (&qx / qx.dot(&xh), 0, 0.0)
        }
        Shape::Polytope(p) => solve_chart(p, &xh)?,
    };
    let chart = AffineChart::new(xi.clone())?;
    let frame = linalg::frame(&xi);
    let b = frame.rows(0, n).into_owned();
    let bx = &b * &xh;
    let mut g0 = DMatrix::zeros(n + 1, n + 1);
    g0.view_mut((0, 0), (n, n + 1))
        .copy_from(&(&b - &bx * xi.transpose()));
    g0.row_mut(n).copy_from(&xi.transpose());
    let moments = second_moment_matrix(body, &chart.coords_of(&xh)?, &chart)?;
    let t = InertiaEllipsoid::from_moments(DVector::zeros(n), &moments.second_moment)?.shape;
    let mut scale = DMatrix::identity(n + 1, n + 1);
    scale.view_mut((0, 0), (n, n)).copy_from(
        &t.try_inverse()
            .ok_or_else(|| HilbertError::DegenerateBody("flat inertia ellipsoid".into()))?,
    );
    let map = det_normalize(&(scale * g0))?;
    let certificate = is_standard(&mb.transformed(&map)?, EXACT_STANDARD_TOL);
    Ok(Standardization {
        map,
        chart_covector: xi,
        newton_iterations: iterations,
        residual,
        certificate,
    })
}

/// Distance of a map from `O(n)` acting on the standard chart: zero exactly
/// for `diag(k, +-1)` with `k` orthogonal, after scaling.
pub fn orthogonal_defect(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows() - 1;
    let corner = m[(n, n)];
    if corner.abs() < 1e-300 {
        return f64::INFINITY;
    }
    let s = m / corner;
    let k = s.view((0, 0), (n, n)).into_owned();
    let off = s
        .view((0, n), (n, 1))
        .norm()
        .max(s.view((n, 0), (1, n)).norm());
    off.max(linalg::dist_to_identity(&(k.transpose() * &k)))
}

/// Radii of the largest centered ball inside and smallest centered ball
/// containing a body, in the standard chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichRadii {
    pub inner: f64,
    pub outer: f64,
}

pub fn sandwich_radii(body: &ConvexBody) -> Result<SandwichRadii> {
    let n = body.dim();
    let mb = MarkedBody::new(body.clone(), crate::projective::ProjectivePoint::origin(n))
        .map_err(|_| HilbertError::NotStandard)?;
    if !is_standard(&mb, EXACT_STANDARD_TOL).valid {
        return Err(HilbertError::NotStandard);
    }
    let chart = AffineChart::standard(n);
    match body.shape() {
        Shape::Polytope(p) => {
            let inner = p
                .facets()
                .iter()
                .map(|a| a[n].abs() / a.rows(0, n).norm())
                .fold(f64::INFINITY, f64::min);
            let outer = p
                .rays()
                .iter()
                .map(|r| chart.coords_of(r).map(|u| u.norm()))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok(SandwichRadii { inner, outer })
        }
        Shape::Ellipsoid(e) => {
            let (a, _, kappa) = quadric_in_chart(e, &chart)?;
            let (vals, _) = linalg::sym_eigen(&(a / kappa));
            Ok(SandwichRadii {
                inner: 1.0 / vals[n - 1].sqrt(),
                outer: 1.0 / vals[0].sqrt(),
            })
        }
    }
}

/// Moments of `body` about `about` estimated by rejection sampling in the
/// chart bounding box. Samples are drawn in fixed-size chunks, each chunk
/// seeded from `seed` and its index, so the result does not depend on the
/// thread count.
pub fn monte_carlo_moments(
    body: &ConvexBody,
    chart: &AffineChart,
    about: &DVector<f64>,
    samples: usize,
    seed: u64,
) -> Result<MomentData> {
    ensure_bounded(body, chart)?;
    let n = body.dim();
    // Inside test as a list of linear inequalities or one quadric.
    enum Test {
        Half(Vec<(Vec<f64>, f64)>),
        Quad(DMatrix<f64>, Vec<f64>, f64),
    }
    let (lo, hi, test) = match body.shape() {
        Shape::Polytope(p) => {
            let verts: Vec<DVector<f64>> = p
                .rays()
                .iter()
                .map(|r| chart.coords_of(r))
                .collect::<Result<_>>()?;
            let lo: Vec<f64> = (0..n)
                .map(|i| verts.iter().map(|v| v[i]).fold(f64::INFINITY, f64::min))
                .collect();
            let hi: Vec<f64> = (0..n)
                .map(|i| verts.iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max))
                .collect();
            let k = chart.embedding_matrix();
            // Chart representatives lie in the cone or in its negative.
            let sign = chart.covector().dot(&p.rays()[0]).signum();
            let hs = p
                .facets()
                .iter()
                .map(|alpha| {
                    let c = k.transpose() * alpha * sign;
                    (c.rows(0, n).iter().cloned().collect(), c[n])
                })
                .collect();
            (lo, hi, Test::Half(hs))
        }
        Shape::Ellipsoid(e) => {
            let (a, center, kappa) = quadric_in_chart(e, chart)?;
            let inv = a.clone().try_inverse().expect("positive definite");
            let half: Vec<f64> = (0..n).map(|i| (kappa * inv[(i, i)]).sqrt()).collect();
            let lo = (0..n).map(|i| center[i] - half[i]).collect();
            let hi = (0..n).map(|i| center[i] + half[i]).collect();
            (
                lo,
                hi,
                Test::Quad(a, center.iter().cloned().collect(), kappa),
            )
        }
    };
    let inside = |u: &[f64], d: &mut [f64]| -> bool {
        match &test {
            Test::Half(hs) => hs
                .iter()
                .all(|(a, b)| a.iter().zip(u).map(|(x, y)| x * y).sum::<f64>() + b > 0.0),
            Test::Quad(a, c, kappa) => {
                for i in 0..n {
                    d[i] = u[i] - c[i];
                }
                let mut f = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        f += d[i] * a[(i, j)] * d[j];
                    }
                }
                f < *kappa
            }
        }
    };
    const CHUNK: usize = 1 << 16;
    let chunks = samples.div_ceil(CHUNK);
    let about_v: Vec<f64> = about.iter().cloned().collect();
    let partial: Vec<(usize, Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut u = vec![0.0; n];
            let mut d = vec![0.0; n];
            let mut hits = 0;
            let mut s1 = vec![0.0; n];
            let mut s2 = vec![0.0; n * n];
            for _ in 0..count {
                for i in 0..n {
                    u[i] = rng.gen_range(lo[i]..hi[i]);
                }
                if !inside(&u, &mut d) {
                    continue;
                }
                hits += 1;
                for i in 0..n {
                    s1[i] += u[i];
                    let di = u[i] - about_v[i];
                    for j in 0..n {
                        s2[i * n + j] += di * (u[j] - about_v[j]);
                    }
                }
            }
            (hits, s1, s2)
        })
        .collect();
    let mut hits = 0;
    let mut s1 = DVector::zeros(n);
    let mut s2 = DMatrix::zeros(n, n);
    for (h, a, b) in partial {
        hits += h;
        s1 += DVector::from_vec(a);
        s2 += DMatrix::from_row_slice(n, n, &b);
    }
    if hits == 0 {
        return Err(HilbertError::DegenerateBody(
            "no Monte Carlo sample landed inside".into(),
        ));
    }
    let box_vol: f64 = (0..n).map(|i| hi[i] - lo[i]).product();
    let volume = box_vol * hits as f64 / samples as f64;
    Ok(MomentData {
        centroid: s1 / hits as f64,
        second_moment: s2 * (volume / hits as f64),
        about: about.clone(),
        volume,
        exactness: Exactness::MonteCarlo { samples, seed },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::ProjectivePoint;
    use std::f64::consts::PI;

    fn square() -> ConvexBody {
        ConvexBody::from_vertices(&[
            vec![1.0, 1.0],
            vec![-1.0, 1.0],
            vec![-1.0, -1.0],
            vec![1.0, -1.0],
        ])
        .unwrap()
    }

    fn triangle() -> ConvexBody {
        ConvexBody::from_vertices(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
    }

    #[test]
    fn ball_constants() {
        assert!((unit_ball_moment(2) - PI / 4.0).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn centroid_examples() {
        let std = AffineChart::standard(2);
        let c = centroid(&triangle(), &std).unwrap();
        assert!((c - DVector::from_vec(vec![1.0 / 3.0, 1.0 / 3.0])).norm() < 1e-15);
        assert!(centroid(&ConvexBody::unit_ball(2), &std).unwrap().norm() < 1e-15);
        assert!(centroid(&square(), &std).unwrap().norm() < 1e-15);
    }

    #[test]
    fn moment_examples() {
        let std = AffineChart::standard(2);
        let o = DVector::zeros(2);
        let disk = second_moment_matrix(&ConvexBody::unit_ball(2), &o, &std).unwrap();
        assert!((disk.second_moment - DMatrix::identity(2, 2) * (PI / 4.0)).norm() < 1e-12);
        let sq = second_moment_matrix(&square(), &o, &std).unwrap();
        assert!((sq.second_moment - DMatrix::identity(2, 2) * (4.0 / 3.0)).norm() < 1e-14);
        assert!((sq.volume - 4.0).abs() < 1e-14);
    }

    #[test]
    fn inertia_examples() {
        let std = AffineChart::standard(2);
        let e = inertia_ellipsoid(&ConvexBody::unit_ball(2), &std).unwrap();
        assert!(linalg::dist_to_identity(&e.shape) < 1e-12);
        let big = ConvexBody::ellipsoid(DMatrix::from_diagonal(&DVector::from_vec(vec![
            1.0, 1.0, -4.0,
        ])))
        .unwrap();
        let e = inertia_ellipsoid(&big, &std).unwrap();
        assert!((e.shape - DMatrix::identity(2, 2) * 2.0).norm() < 1e-12);
        let rho = (16.0 / (3.0 * PI)).powf(0.25);
        let e = inertia_ellipsoid(&square(), &std).unwrap();
        assert!((e.shape - DMatrix::identity(2, 2) * rho).norm() < 1e-12);
        assert!((rho - 1.1415).abs() < 1e-4);
    }

    #[test]
    fn inertia_body_matches_moments() {
        let std = AffineChart::standard(2);
        let m = central_moments(&triangle(), &std).unwrap();
        let e = inertia_ellipsoid(&triangle(), &std)
            .unwrap()
            .to_body(&std)
            .unwrap();
        let me = central_moments(&e, &std).unwrap();
        assert!((me.second_moment - &m.second_moment).norm() < 1e-12);
        assert!((me.centroid - &m.centroid).norm() < 1e-12);
    }

    #[test]
    fn certificate_examples() {
        let o = ProjectivePoint::origin(2);
        let disk = MarkedBody::new(ConvexBody::unit_ball(2), o.clone()).unwrap();
        assert!(is_standard(&disk, 1e-9).valid);
        let sq = is_standard(&MarkedBody::new(square(), o).unwrap(), 1e-6);
        assert!(!sq.valid && sq.centroid_offset.unwrap() < 1e-12);
        let off = MarkedBody::new(
            ConvexBody::unit_ball(2),
            ProjectivePoint::from_affine(&[0.5, 0.0]),
        )
        .unwrap();
        let c = is_standard(&off, 1e-6);
        assert!(!c.valid && (c.centroid_offset.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn standardize_disk_and_polar_chart() {
        let disk = MarkedBody::new(ConvexBody::unit_ball(2), ProjectivePoint::origin(2)).unwrap();
        let s = standardize(&disk).unwrap();
        assert!(s.certificate.valid);
        assert!(orthogonal_defect(s.map.matrix()) < 1e-12);
        let x = ProjectivePoint::from_affine(&[0.5, 0.0]);
        let off = MarkedBody::new(ConvexBody::unit_ball(2), x.clone()).unwrap();
        let s = standardize(&off).unwrap();
        assert!(s.certificate.valid, "{:?}", s.certificate);
        let q = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, -1.0]));
        let polar = q * x.coords();
        let cos = polar.dot(&s.chart_covector).abs() / (polar.norm() * s.chart_covector.norm());
        assert!((cos - 1.0).abs() < 1e-12);
    }

    #[test]
    fn standardize_triangle() {
        let t = triangle();
        let c = centroid(&t, &AffineChart::standard(2)).unwrap();
        let mb = MarkedBody::new(t, ProjectivePoint::from_affine(c.as_slice())).unwrap();
        let s = standardize(&mb).unwrap();
        assert!(s.certificate.valid, "{:?}", s.certificate);
        let swap = ProjectiveMap::from_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let s2 = standardize(&mb.transformed(&swap).unwrap()).unwrap();
        let k = s2.map.compose(&swap).compose(&s.map.inverse());
        assert!(orthogonal_defect(k.matrix()) < 1e-9);
    }

    #[test]
    fn standardize_off_center_square() {
        let mb = MarkedBody::new(square(), ProjectivePoint::from_affine(&[0.7, -0.4])).unwrap();
        let s = standardize(&mb).unwrap();
        assert!(s.certificate.valid, "{:?}", s.certificate);
        assert!(s.newton_iterations > 0);
    }

    #[test]
    fn sandwich_examples() {
        let disk = sandwich_radii(&ConvexBody::unit_ball(2)).unwrap();
        assert!((disk.inner - 1.0).abs() < 1e-12 && (disk.outer - 1.0).abs() < 1e-12);
        let mb = MarkedBody::new(square(), ProjectivePoint::origin(2)).unwrap();
        let s = standardize(&mb).unwrap();
        let std_sq = square().transformed(&s.map).unwrap();
        let r = sandwich_radii(&std_sq).unwrap();
        let rho = (16.0 / (3.0 * PI)).powf(0.25);
        assert!((r.inner - 1.0 / rho).abs() < 1e-9);
        assert!((r.outer - 2f64.sqrt() / rho).abs() < 1e-9);
        assert_eq!(
            sandwich_radii(&square()).unwrap_err(),
            HilbertError::NotStandard
        );
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let std = AffineChart::standard(2);
        let c = DVector::from_vec(vec![1.0 / 3.0, 1.0 / 3.0]);
        let a = monte_carlo_moments(&triangle(), &std, &c, 200_000, 7).unwrap();
        let b = monte_carlo_moments(&triangle(), &std, &c, 200_000, 7).unwrap();
        assert_eq!(a.second_moment, b.second_moment);
        let exact = second_moment_matrix(&triangle(), &c, &std).unwrap();
        assert!(
            (a.second_moment - &exact.second_moment).amax() < 0.03 * exact.second_moment.amax()
        );
        assert!((a.volume - 0.5).abs() < 0.01);
    }
}
