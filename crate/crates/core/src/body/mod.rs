//! Properly convex open subsets of projective space: polytopes and ellipsoids.

mod ellipsoid;
mod family;
mod polytope;
mod spec;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use ellipsoid::Ellipsoid;
pub use family::{
    boost, make_family, rotation, BodyFamily, Boost, FamilyParams, FamilyTag, PlaneRotation,
};
pub use polytope::Polytope;
pub use spec::{BodySpec, ChartKind};

use crate::error::{HilbertError, Result};
use crate::projective::{AffineChart, ProjectiveMap, ProjectivePoint};

/// Width of the boundary band, in chart units of the storage chart.
pub const BOUNDARY_TOL: f64 = 1e-10;
/// Tolerance for matching forms or vertex sets in automorphism tests.
pub const AUTOMORPHISM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Containment {
    Interior,
    Boundary,
    Exterior,
}

#[derive(Debug, Clone)]
pub enum Shape {
    Polytope(Polytope),
    Ellipsoid(Ellipsoid),
}

/// Description of the body inside its storage chart.
#[derive(Debug, Clone)]
enum ChartModel {
    /// Unit-normal half-planes `a . u + b >= 0`.
    Halfspaces(Vec<(DVector<f64>, f64)>),
    /// `(u - c)^T A (u - c) < kappa`.
    Quadric {
        a: DMatrix<f64>,
        center: DVector<f64>,
        kappa: f64,
    },
    /// Not properly convex: no chart contains the closure.
    Unbounded,
}

/// A convex open subset of `P^n` given by a polytope or an ellipsoid.
#[derive(Debug, Clone)]
pub struct ConvexBody {
    shape: Shape,
    n: usize,
    chart: AffineChart,
    model: ChartModel,
}

impl ConvexBody {
    fn build(mut shape: Shape) -> Result<Self> {
        let (n, xi) = match &mut shape {
            Shape::Polytope(p) => {
                let n = p.facets[0].len() - 1;
                // The cone and its negative are the same projective set; keep
                // the one on which the last coordinate is positive when possible.
                if p.proper && p.rays.iter().all(|r| r[n] < -1e-9) {
                    p.rays.iter_mut().for_each(|r| *r = -r.clone());
                    p.facets.iter_mut().for_each(|a| *a = -a.clone());
                }
                let xi = if !p.proper || p.rays.iter().all(|r| r[n] > 1e-9) {
                    AffineChart::standard(n).covector().clone()
                } else {
                    p.facets
                        .iter()
                        .fold(DVector::zeros(n + 1), |acc, a| acc + a)
                };
                (n, xi)
            }
            Shape::Ellipsoid(e) => {
                let n = e.form().nrows() - 1;
                let std = AffineChart::standard(n).covector().clone();
                let xi = if e.bounded_in(&std) {
                    std
                } else {
                    e.negative_axis()
                };
                (n, xi)
            }
        };
        let chart = AffineChart::new(xi)?;
        let k = chart.embedding_matrix();
        let model = match &shape {
            Shape::Polytope(p) if !p.proper => ChartModel::Unbounded,
            Shape::Polytope(p) => {
                let hs = p
                    .facets
                    .iter()
                    .map(|alpha| {
                        let c = k.transpose() * alpha;
                        let a = c.rows(0, n).into_owned();
                        let norm = a.norm();
                        (a / norm, c[n] / norm)
                    })
                    .collect();
                ChartModel::Halfspaces(hs)
            }
            Shape::Ellipsoid(e) => {
                let qc = k.transpose() * e.form() * &k;
                let a = qc.view((0, 0), (n, n)).into_owned();
                let b = qc.view((0, n), (n, 1)).into_owned();
                let center = -a
                    .clone()
                    .try_inverse()
                    .ok_or(HilbertError::NotProperlyConvex)?
                    * &b;
                let center = center.column(0).into_owned();
                let kappa = center.dot(&(&a * &center)) - qc[(n, n)];
                ChartModel::Quadric { a, center, kappa }
            }
        };
        Ok(Self {
            shape,
            n,
            chart,
            model,
        })
    }

    /// Polytope `{u : a_i . u <= b_i}` of the standard chart; rows are `[a_i, b_i]`.
    pub fn from_halfspaces(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows
            .first()
            .map(|r| r.len())
            .ok_or_else(|| HilbertError::DegenerateBody("no half-spaces".into()))?;
        if k < 2 {
            return Err(HilbertError::UnsupportedDimension(0));
        }
        let mut cov: Vec<DVector<f64>> = Vec::with_capacity(rows.len() + 1);
        for r in rows {
            if r.len() != k {
                return Err(HilbertError::DimensionMismatch {
                    expected: k,
                    got: r.len(),
                });
            }
            cov.push(DVector::from_fn(
                k,
                |i, _| if i + 1 < k { -r[i] } else { r[i] },
            ));
        }
        let mut chart = DVector::zeros(k);
        chart[k - 1] = 1.0;
        cov.push(chart);
        Self::from_cone(&cov)
    }

    /// Projectivization of the cone `{v : alpha_i . v >= 0}`.
    pub fn from_cone(covectors: &[DVector<f64>]) -> Result<Self> {
        Self::build(Shape::Polytope(Polytope::from_cone(covectors)?))
    }

    /// Convex hull of points of the standard chart.
    pub fn from_vertices(points: &[Vec<f64>]) -> Result<Self> {
        let rays: Vec<DVector<f64>> = points
            .iter()
            .map(|p| {
                let mut v = p.clone();
                v.push(1.0);
                DVector::from_vec(v)
            })
            .collect();
        Self::from_rays(&rays)
    }

    /// Convex hull of homogeneous vectors lying in a common open half-space.
    pub fn from_rays(rays: &[DVector<f64>]) -> Result<Self> {
        Self::build(Shape::Polytope(Polytope::from_rays(rays)?))
    }

    pub fn ellipsoid(q: DMatrix<f64>) -> Result<Self> {
        Self::build(Shape::Ellipsoid(Ellipsoid::new(q)?))
    }

    /// The unit ball of the standard chart (the Klein model).
    pub fn unit_ball(n: usize) -> Self {
        Self::build(Shape::Ellipsoid(Ellipsoid::unit_ball(n))).expect("bounded")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn as_polytope(&self) -> Option<&Polytope> {
        match &self.shape {
            Shape::Polytope(p) => Some(p),
            Shape::Ellipsoid(_) => None,
        }
    }

    pub fn as_ellipsoid(&self) -> Option<&Ellipsoid> {
        match &self.shape {
            Shape::Ellipsoid(e) => Some(e),
            Shape::Polytope(_) => None,
        }
    }

    /// The chart in which the body is stored; its closure lies in this chart
    /// whenever the body is properly convex.
    pub fn storage_chart(&self) -> &AffineChart {
        &self.chart
    }

    pub fn is_properly_convex(&self) -> bool {
        !matches!(self.model, ChartModel::Unbounded)
    }

    fn require_proper(&self) -> Result<()> {
        if self.is_properly_convex() {
            Ok(())
        } else {
            Err(HilbertError::NotProperlyConvex)
        }
    }

    fn check_dim(&self, k: usize) -> Result<()> {
        if k != self.n + 1 {
            return Err(HilbertError::DimensionMismatch {
                expected: self.n + 1,
                got: k,
            });
        }
        Ok(())
    }

    /// True when the closure of the body lies in the chart `{xi != 0}`.
    pub fn bounded_in(&self, chart: &AffineChart) -> bool {
        if chart.dim() != self.n || !self.is_properly_convex() {
            return false;
        }
        let xi = chart.covector();
        match &self.shape {
            Shape::Polytope(p) => {
                let levels: Vec<f64> = p.rays.iter().map(|r| chart.level(r)).collect();
                levels.iter().all(|&l| l > 1e-9) || levels.iter().all(|&l| l < -1e-9)
            }
            Shape::Ellipsoid(e) => e.bounded_in(xi),
        }
    }

    /// Vertices of a polytope in affine coordinates of `chart`.
    pub fn vertices_in(&self, chart: &AffineChart) -> Result<Vec<DVector<f64>>> {
        let p = self
            .as_polytope()
            .ok_or_else(|| HilbertError::DegenerateBody("not a polytope".into()))?;
        if !self.bounded_in(chart) {
            return Err(HilbertError::UnboundedInChart);
        }
        p.rays.iter().map(|r| chart.coords_of(r)).collect()
    }

    /// Classifies `p` as interior, boundary or exterior.
    pub fn contains(&self, p: &ProjectivePoint) -> Containment {
        if p.coords().len() != self.n + 1 {
            return Containment::Exterior;
        }
        let s = match &self.model {
            ChartModel::Unbounded => {
                let poly = self.as_polytope().expect("only polytopes are unbounded");
                let v = p.coords();
                let m = poly
                    .facets
                    .iter()
                    .map(|a| a.dot(v))
                    .fold(f64::INFINITY, f64::min);
                let mneg = poly
                    .facets
                    .iter()
                    .map(|a| -a.dot(v))
                    .fold(f64::INFINITY, f64::min);
                m.max(mneg)
            }
            _ => {
                let Ok(u) = self.chart.coords(p) else {
                    return Containment::Exterior;
                };
                self.signed_depth(&u)
            }
        };
        if s > BOUNDARY_TOL {
            Containment::Interior
        } else if s >= -BOUNDARY_TOL {
            Containment::Boundary
        } else {
            Containment::Exterior
        }
    }

    /// Approximate signed distance of chart point `u` to the boundary,
    /// positive inside.
    fn signed_depth(&self, u: &DVector<f64>) -> f64 {
        match &self.model {
            ChartModel::Halfspaces(hs) => hs
                .iter()
                .map(|(a, b)| a.dot(u) + b)
                .fold(f64::INFINITY, f64::min),
            ChartModel::Quadric { a, center, kappa } => {
                let d = u - center;
                let ad = a * &d;
                let f = d.dot(&ad) - kappa;
                let g = 2.0 * ad.norm();
                if g == 0.0 {
                    -f.signum() * f64::INFINITY
                } else {
                    -f / g
                }
            }
            ChartModel::Unbounded => f64::NAN,
        }
    }

    /// Representative of an interior point with `xi . v = 1` in the storage chart.
    pub fn interior_representative(&self, p: &ProjectivePoint) -> Result<DVector<f64>> {
        self.check_dim(p.coords().len())?;
        self.require_proper()?;
        if self.contains(p) != Containment::Interior {
            return Err(HilbertError::PointOutsideBody);
        }
        Ok(p.coords() / self.chart.covector().dot(p.coords()))
    }

    fn inside_vector(&self, v: &DVector<f64>) -> bool {
        match &self.shape {
            Shape::Polytope(p) => p.facets.iter().all(|a| a.dot(v) > 0.0),
            Shape::Ellipsoid(e) => e.value(v) < 0.0,
        }
    }

    /// Parameters `(t_b, t_a)` with `t_b < 0 < 1 < t_a` such that `X + t D`
    /// meets the boundary, for interior representatives `X` and `X + D`.
    pub(crate) fn chord_params(&self, x: &DVector<f64>, d: &DVector<f64>) -> Result<(f64, f64)> {
        match &self.shape {
            Shape::Polytope(p) => {
                let mut lo = f64::NEG_INFINITY;
                let mut hi = f64::INFINITY;
                for alpha in &p.facets {
                    let ax = alpha.dot(x);
                    let ad = alpha.dot(d);
                    if ad < 0.0 {
                        hi = hi.min(ax / -ad);
                    } else if ad > 0.0 {
                        lo = lo.max(-ax / ad);
                    }
                }
                if !lo.is_finite() || !hi.is_finite() {
                    return Err(HilbertError::NotProperlyConvex);
                }
                Ok((lo, hi))
            }
            Shape::Ellipsoid(e) => {
                let q = e.form();
                let qd = q * d;
                let qa = d.dot(&qd);
                let qb = x.dot(&qd);
                let qc = e.value(x);
                if qa <= 0.0 || qc >= 0.0 {
                    return Err(HilbertError::PointOutsideBody);
                }
                let s = (qb * qb - qa * qc).sqrt();
                let prod = qc / qa;
                if qb >= 0.0 {
                    let tb = (-qb - s) / qa;
                    Ok((tb, prod / tb))
                } else {
                    let ta = (-qb + s) / qa;
                    Ok((prod / ta, ta))
                }
            }
        }
    }

    /// Same as the closed-form chord parameters, found by bracketing and bisection
    /// on the membership test.
    pub fn chord_params_bisection(&self, x: &DVector<f64>, d: &DVector<f64>) -> Result<(f64, f64)> {
        let find = |dir: f64| -> Result<f64> {
            let mut inside = 0.0;
            let mut outside = dir;
            let mut steps = 0;
            while self.inside_vector(&(x + d * outside)) {
                inside = outside;
                outside *= 2.0;
                steps += 1;
                if steps > 1100 {
                    return Err(HilbertError::NotProperlyConvex);
                }
            }
            for _ in 0..400 {
                let mid = 0.5 * (inside + outside);
                if mid == inside || mid == outside {
                    break;
                }
                if self.inside_vector(&(x + d * mid)) {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            Ok(0.5 * (inside + outside))
        };
        Ok((find(-1.0)?, find(1.0)?))
    }

    fn chord_setup(
        &self,
        x: &ProjectivePoint,
        y: &ProjectivePoint,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        let xr = self.interior_representative(x)?;
        let yr = self.interior_representative(y)?;
        if x == y {
            return Err(HilbertError::DegenerateConfiguration(
                "x and y coincide".into(),
            ));
        }
        let d = &yr - &xr;
        Ok((xr, d))
    }

    /// Boundary points `(a, b)` of the line through `x` and `y`, ordered
    /// `b, x, y, a` along the chord.
    pub fn chord_endpoints(
        &self,
        x: &ProjectivePoint,
        y: &ProjectivePoint,
    ) -> Result<(ProjectivePoint, ProjectivePoint)> {
        let (xr, d) = self.chord_setup(x, y)?;
        let (tb, ta) = self.chord_params(&xr, &d)?;
        Ok((
            ProjectivePoint::new(&xr + &d * ta)?,
            ProjectivePoint::new(&xr + &d * tb)?,
        ))
    }

    /// Chord endpoints by bisection; a cross-check of [`Self::chord_endpoints`].
    pub fn chord_endpoints_bisection(
        &self,
        x: &ProjectivePoint,
        y: &ProjectivePoint,
    ) -> Result<(ProjectivePoint, ProjectivePoint)> {
        let (xr, d) = self.chord_setup(x, y)?;
        let (tb, ta) = self.chord_params_bisection(&xr, &d)?;
        Ok((
            ProjectivePoint::new(&xr + &d * ta)?,
            ProjectivePoint::new(&xr + &d * tb)?,
        ))
    }

    /// True iff `g` maps the body onto itself.
    pub fn is_automorphism(&self, g: &ProjectiveMap) -> Result<bool> {
        self.check_dim(g.matrix().nrows())?;
        let m = g.matrix();
        match &self.shape {
            Shape::Ellipsoid(e) => {
                let q = e.form();
                let gq = m.transpose() * q * m;
                let lambda = gq.dot(q) / q.dot(q);
                Ok(lambda > 0.0 && (&gq - q * lambda).norm() <= AUTOMORPHISM_TOL * gq.norm())
            }
            Shape::Polytope(p) if !p.proper => {
                let inv_t = m
                    .clone()
                    .try_inverse()
                    .ok_or_else(|| HilbertError::InvalidMatrix("singular".into()))?
                    .transpose();
                let images: Vec<DVector<f64>> = p
                    .facets
                    .iter()
                    .map(|a| {
                        let v = &inv_t * a;
                        let n = v.norm();
                        v / n
                    })
                    .collect();
                Ok(matches_as_sets(&images, &p.facets, false))
            }
            Shape::Polytope(p) => {
                let images: Vec<DVector<f64>> = p
                    .rays
                    .iter()
                    .map(|r| {
                        let v = m * r;
                        let n = v.norm();
                        v / n
                    })
                    .collect();
                Ok(matches_as_sets(&images, &p.rays, true)
                    || matches_as_sets(
                        &images.iter().map(|v| -v).collect::<Vec<_>>(),
                        &p.rays,
                        true,
                    ))
            }
        }
    }

    /// The image body `g . Omega`.
    pub fn transformed(&self, g: &ProjectiveMap) -> Result<Self> {
        self.check_dim(g.matrix().nrows())?;
        let m = g.matrix();
        let shape = match &self.shape {
            Shape::Polytope(p) => Shape::Polytope(p.transformed(m)?),
            Shape::Ellipsoid(e) => Shape::Ellipsoid(e.transformed(m)?),
        };
        Self::build(shape)
    }
}

/// Whether `images` is a permutation of `targets` (unit vectors), exactly or up to
/// sign per vector when `signed` is false.
fn matches_as_sets(images: &[DVector<f64>], targets: &[DVector<f64>], signed: bool) -> bool {
    if images.len() != targets.len() {
        return false;
    }
    let mut used = vec![false; targets.len()];
    for v in images {
        let hit = targets.iter().enumerate().position(|(j, t)| {
            !used[j]
                && ((v - t).norm() <= AUTOMORPHISM_TOL
                    || (!signed && (v + t).norm() <= AUTOMORPHISM_TOL))
        });
        match hit {
            Some(j) => used[j] = true,
            None => return false,
        }
    }
    true
}

/// Classifies `p` relative to `body`.
pub fn contains(body: &ConvexBody, p: &ProjectivePoint) -> Containment {
    body.contains(p)
}

pub fn chord_endpoints(
    body: &ConvexBody,
    x: &ProjectivePoint,
    y: &ProjectivePoint,
) -> Result<(ProjectivePoint, ProjectivePoint)> {
    body.chord_endpoints(x, y)
}

pub fn is_properly_convex(body: &ConvexBody) -> Result<bool> {
    Ok(body.is_properly_convex())
}

pub fn is_automorphism(body: &ConvexBody, g: &ProjectiveMap) -> Result<bool> {
    body.is_automorphism(g)
}

/// A body together with an interior basepoint.
#[derive(Debug, Clone)]
pub struct MarkedBody {
    body: ConvexBody,
    basepoint: ProjectivePoint,
}

impl MarkedBody {
    pub fn new(body: ConvexBody, basepoint: ProjectivePoint) -> Result<Self> {
        body.interior_representative(&basepoint)?;
        Ok(Self { body, basepoint })
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn basepoint(&self) -> &ProjectivePoint {
        &self.basepoint
    }

    /// The image pair `(g . Omega, g . x)`.
    pub fn transformed(&self, g: &ProjectiveMap) -> Result<Self> {
        let body = self.body.transformed(g)?;
        let basepoint = crate::projective::apply_map(g, &self.basepoint)?;
        Self::new(body, basepoint)
    }
}
