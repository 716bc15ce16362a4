//! Polyhedral cones `{v : alpha_i . v >= 0}` whose projectivization is a
//! convex polytope of `P^n`.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::error::{HilbertError, Result};
use crate::linalg;

/// Feasibility slack for unit rays against unit covectors.
const FEAS_TOL: f64 = 1e-10;
/// Incidence tolerance between a ray and a facet.
const INCIDENCE_TOL: f64 = 1e-9;
const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Polytope {
    /// Unit covectors of the true facets.
    pub(crate) facets: Vec<DVector<f64>>,
    /// Unit extreme rays, oriented so every facet is nonnegative on them.
    pub(crate) rays: Vec<DVector<f64>>,
    /// Ray indices lying on each facet.
    pub(crate) incidence: Vec<Vec<usize>>,
    /// Pulling triangulation as lists of `n + 1` ray indices.
    pub(crate) simplices: Vec<Vec<usize>>,
    /// False when the cone contains a line (the set is not properly convex).
    pub(crate) proper: bool,
}

fn unit(v: &DVector<f64>) -> Option<DVector<f64>> {
    let n = v.norm();
    (n > 0.0 && n.is_finite()).then(|| v / n)
}

fn push_unique(list: &mut Vec<DVector<f64>>, v: DVector<f64>, tol: f64) {
    if !list.iter().any(|w| (w - &v).norm() <= tol) {
        list.push(v);
    }
}

/// Extreme rays of the pointed cone `{v in R^k : A v >= 0}` (`A` of rank `k`).
fn extreme_rays(rows: &[DVector<f64>], k: usize) -> Vec<DVector<f64>> {
    let mut rays = Vec::new();
    if k == 1 {
        for s in [1.0, -1.0] {
            let r = DVector::from_element(1, s);
            if rows.iter().all(|a| a.dot(&r) >= -FEAS_TOL) {
                rays.push(r);
            }
        }
        return rays;
    }
    for subset in (0..rows.len()).combinations(k - 1) {
        let m = DMatrix::from_fn(k - 1, k, |i, j| rows[subset[i]][j]);
        let Some(r) = linalg::null_vector(&m, 1e-10) else {
            continue;
        };
        for cand in [r.clone(), -r] {
            if rows.iter().all(|a| a.dot(&cand) >= -FEAS_TOL) {
                push_unique(&mut rays, cand, 1e-9);
                break;
            }
        }
    }
    rays
}

fn rank_of(rays: &[DVector<f64>], idx: &[usize]) -> usize {
    if idx.is_empty() {
        return 0;
    }
    let k = rays[idx[0]].len();
    let m = DMatrix::from_fn(idx.len(), k, |i, j| rays[idx[i]][j]);
    linalg::rank(&m, RANK_TOL)
}

/// Pulling triangulation of the face `face` (affine dimension `dim`).
fn pull(
    face: &[usize],
    dim: usize,
    rays: &[DVector<f64>],
    incidence: &[Vec<usize>],
    prefix: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if dim == 0 {
        let mut s = prefix.clone();
        s.push(face[0]);
        out.push(s);
        return;
    }
    let apex = face[0];
    let mut subfaces: Vec<Vec<usize>> = Vec::new();
    for inc in incidence {
        let sub: Vec<usize> = face.iter().cloned().filter(|i| inc.contains(i)).collect();
        if sub.len() < dim || sub.len() == face.len() || sub.contains(&apex) {
            continue;
        }
        if rank_of(rays, &sub) != dim || subfaces.contains(&sub) {
            continue;
        }
        subfaces.push(sub);
    }
    prefix.push(apex);
    for sub in subfaces {
        pull(&sub, dim - 1, rays, incidence, prefix, out);
    }
    prefix.pop();
}

impl Polytope {
    /// Builds the canonical form of the cone `{v : alpha . v >= 0}`.
    pub fn from_cone(covectors: &[DVector<f64>]) -> Result<Self> {
        let k = covectors
            .first()
            .map(|c| c.len())
            .ok_or_else(|| HilbertError::DegenerateBody("no half-spaces".into()))?;
        let mut rows = Vec::new();
        for c in covectors {
            if c.len() != k {
                return Err(HilbertError::DimensionMismatch {
                    expected: k,
                    got: c.len(),
                });
            }
            if let Some(u) = unit(c) {
                push_unique(&mut rows, u, 1e-12);
            }
        }
        let a = DMatrix::from_fn(rows.len(), k, |i, j| rows[i][j]);
        let r = linalg::rank(&a, RANK_TOL);
        if r < k {
            // Cone with a lineality space. Check the interior in the quotient
            // and report a non-properly-convex body.
            let svd = a.clone().svd(false, true);
            let vt = svd.v_t.expect("requested");
            let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
            order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
            let basis: Vec<DVector<f64>> =
                order[..r].iter().map(|&i| vt.row(i).transpose()).collect();
            let reduced: Vec<DVector<f64>> = rows
                .iter()
                .map(|row| DVector::from_iterator(r, basis.iter().map(|b| b.dot(row))))
                .collect();
            let rr = extreme_rays(&reduced, r);
            let m = DMatrix::from_fn(rr.len(), r, |i, j| rr[i][j]);
            if rr.is_empty() || linalg::rank(&m, RANK_TOL) < r {
                return Err(HilbertError::DegenerateBody("empty interior".into()));
            }
            return Ok(Self {
                facets: rows,
                rays: vec![],
                incidence: vec![],
                simplices: vec![],
                proper: false,
            });
        }
        let rays = extreme_rays(&rows, k);
        let all: Vec<usize> = (0..rays.len()).collect();
        if rank_of(&rays, &all) < k {
            return Err(HilbertError::DegenerateBody("empty interior".into()));
        }
        let mut facets = Vec::new();
        let mut incidence: Vec<Vec<usize>> = Vec::new();
        for row in &rows {
            let inc: Vec<usize> = (0..rays.len())
                .filter(|&j| row.dot(&rays[j]).abs() <= INCIDENCE_TOL)
                .collect();
            if rank_of(&rays, &inc) == k - 1 && !incidence.contains(&inc) {
                facets.push(row.clone());
                incidence.push(inc);
            }
        }
        let mut simplices = Vec::new();
        pull(
            &all,
            k - 1,
            &rays,
            &incidence,
            &mut Vec::new(),
            &mut simplices,
        );
        Ok(Self {
            facets,
            rays,
            incidence,
            simplices,
            proper: true,
        })
    }

    /// Convex hull of homogeneous rays lying in a common open half-space.
    pub fn from_rays(rays: &[DVector<f64>]) -> Result<Self> {
        let k = rays
            .first()
            .map(|r| r.len())
            .ok_or_else(|| HilbertError::DegenerateBody("no vertices".into()))?;
        let n = k - 1;
        if n > 4 {
            return Err(HilbertError::UnsupportedDimension(n));
        }
        let mut units = Vec::new();
        for r in rays {
            if r.len() != k {
                return Err(HilbertError::DimensionMismatch {
                    expected: k,
                    got: r.len(),
                });
            }
            let u = unit(r).ok_or_else(|| HilbertError::DegenerateBody("zero vertex".into()))?;
            push_unique(&mut units, u, 1e-12);
        }
        if units.len() < k {
            return Err(HilbertError::DegenerateBody("too few vertices".into()));
        }
        let facets = if n == 2 {
            gift_wrap(&units)?
        } else {
            facet_enumeration(&units)
        };
        if facets.is_empty() {
            return Err(HilbertError::DegenerateBody(
                "vertices do not span a full-dimensional body".into(),
            ));
        }
        Self::from_cone(&facets)
    }

    pub fn facets(&self) -> &[DVector<f64>] {
        &self.facets
    }

    pub fn rays(&self) -> &[DVector<f64>] {
        &self.rays
    }

    /// Indices of the rays on each facet.
    pub fn incidence(&self) -> &[Vec<usize>] {
        &self.incidence
    }

    pub fn simplices(&self) -> &[Vec<usize>] {
        &self.simplices
    }

    /// Strict interior test for the cone or its negative.
    pub fn interior_sign(&self, v: &DVector<f64>, tol: f64) -> Option<f64> {
        let u = v / v.norm();
        for s in [1.0, -1.0] {
            if self.facets.iter().all(|a| s * a.dot(&u) > tol) {
                return Some(s);
            }
        }
        None
    }

    pub fn transformed(&self, m: &DMatrix<f64>) -> Result<Self> {
        let inv_t = m
            .clone()
            .try_inverse()
            .ok_or_else(|| HilbertError::InvalidMatrix("singular".into()))?
            .transpose();
        let facets: Vec<DVector<f64>> = self.facets.iter().map(|a| &inv_t * a).collect();
        Self::from_cone(&facets)
    }
}

/// Facets of the hull of unit rays for `n = 2`, by gift-wrapping in a chart
/// where all rays are finite.
fn gift_wrap(rays: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
    let mut xi = DVector::zeros(3);
    for r in rays {
        xi += r;
    }
    if rays.iter().any(|r| xi.dot(r) <= 1e-12 * xi.norm()) {
        return Err(HilbertError::DegenerateBody(
            "vertices are not in a common affine chart".into(),
        ));
    }
    let chart = crate::projective::AffineChart::new(xi)?;
    let pts: Vec<DVector<f64>> = rays
        .iter()
        .map(|r| chart.coords_of(r))
        .collect::<Result<_>>()?;
    let cross = |o: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let scale = pts.iter().map(|p| p.norm()).fold(1.0, f64::max);
    let eps = 1e-12 * scale * scale;
    // Start from the lowest-then-leftmost point.
    let start = (0..pts.len())
        .min_by(|&i, &j| {
            pts[i][1]
                .total_cmp(&pts[j][1])
                .then(pts[i][0].total_cmp(&pts[j][0]))
        })
        .expect("nonempty");
    let mut hull = vec![start];
    let mut current = start;
    loop {
        let mut cand = if current == 0 { 1 } else { 0 };
        for j in 0..pts.len() {
            if j == current {
                continue;
            }
            let c = cross(&pts[current], &pts[cand], &pts[j]);
            let farther = (&pts[j] - &pts[current]).norm() > (&pts[cand] - &pts[current]).norm();
            if c < -eps || (c.abs() <= eps && farther) {
                cand = j;
            }
        }
        if cand == start {
            break;
        }
        if hull.len() > pts.len() {
            return Err(HilbertError::DegenerateBody(
                "gift-wrapping failed to close".into(),
            ));
        }
        hull.push(cand);
        current = cand;
    }
    if hull.len() < 3 {
        return Err(HilbertError::DegenerateBody("collinear vertices".into()));
    }
    let mut centre = DVector::zeros(3);
    for &i in &hull {
        centre += &rays[i] / chart.covector().dot(&rays[i]);
    }
    let mut facets = Vec::new();
    for (i, &p) in hull.iter().enumerate() {
        let q = hull[(i + 1) % hull.len()];
        let m = DMatrix::from_fn(2, 3, |r, c| if r == 0 { rays[p][c] } else { rays[q][c] });
        if let Some(mut a) = linalg::null_vector(&m, 1e-12) {
            if a.dot(&centre) < 0.0 {
                a = -a;
            }
            facets.push(a);
        }
    }
    Ok(facets)
}

/// Facets of the hull of unit rays by enumerating hyperplanes through
/// `n`-subsets of vertices.
fn facet_enumeration(rays: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let k = rays[0].len();
    let mut facets = Vec::new();
    for subset in (0..rays.len()).combinations(k - 1) {
        let m = DMatrix::from_fn(k - 1, k, |i, j| rays[subset[i]][j]);
        let Some(a) = linalg::null_vector(&m, 1e-10) else {
            continue;
        };
        for cand in [a.clone(), -a] {
            if rays.iter().all(|r| cand.dot(r) >= -FEAS_TOL) {
                push_unique(&mut facets, cand, 1e-9);
                break;
            }
        }
    }
    facets
}
