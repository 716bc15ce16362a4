//! Projective points, affine charts, projective maps and the cross-ratio.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{HilbertError, Result};
use crate::linalg;

/// Entries below this (relative to the unit-normalized vector) are treated as
/// zero when fixing the sign convention.
const SIGN_FLOOR: f64 = 1e-12;
/// Default tolerance for projective equality of normalized coordinates.
pub const POINT_TOL: f64 = 1e-9;
/// Singular-value ratio above which four points are not collinear.
pub const COLLINEARITY_TOL: f64 = 1e-9;
/// Relative determinant floor below which a matrix is singular.
pub const SINGULAR_TOL: f64 = 1e-14;

/// A point of real projective space, stored as a unit vector whose first
/// non-negligible entry is positive.
#[derive(Debug, Clone)]
pub struct ProjectivePoint {
    coords: DVector<f64>,
}

impl ProjectivePoint {
    pub fn new(v: DVector<f64>) -> Result<Self> {
        let norm = v.norm();
        if !(norm.is_finite()) || norm == 0.0 {
            return Err(HilbertError::DegenerateConfiguration(
                "homogeneous coordinates must be finite and nonzero".into(),
            ));
        }
        let mut coords = v / norm;
        if let Some(first) = coords.iter().find(|c| c.abs() > SIGN_FLOOR) {
            if *first < 0.0 {
                coords = -coords;
            }
        }
        Ok(Self { coords })
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(v))
    }

    /// Point of the standard chart with affine coordinates `u`.
    pub fn from_affine(u: &[f64]) -> Self {
        let mut v = u.to_vec();
        v.push(1.0);
        Self::new(DVector::from_vec(v)).expect("last coordinate is 1")
    }

    /// The origin `[0:...:0:1]` of the standard chart of `P^n`.
    pub fn origin(n: usize) -> Self {
        let mut v = DVector::zeros(n + 1);
        v[n] = 1.0;
        Self { coords: v }
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    /// Dimension `n` of the ambient projective space.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.coords.len() == other.coords.len()
            && ((&self.coords - &other.coords).norm() <= tol
                || (&self.coords + &other.coords).norm() <= tol)
    }
}

impl PartialEq for ProjectivePoint {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, POINT_TOL)
    }
}

impl Serialize for ProjectivePoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProjectivePoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        ProjectivePoint::from_slice(&v).map_err(serde::de::Error::custom)
    }
}

/// The complement of the hyperplane `{xi . v = 0}`.
///
/// Affine coordinates of `p` are taken on the representative with
/// `xi . p = 1`, expressed in an orthonormal frame of `xi^perp`. For the
/// standard chart this is `p -> (p_1/p_{n+1}, ..., p_n/p_{n+1})`.
#[derive(Debug, Clone)]
pub struct AffineChart {
    xi: DVector<f64>,
    frame: DMatrix<f64>,
}

impl AffineChart {
    pub fn new(xi: DVector<f64>) -> Result<Self> {
        let norm = xi.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(HilbertError::DegenerateConfiguration(
                "chart covector must be nonzero".into(),
            ));
        }
        let frame = linalg::frame(&xi);
        Ok(Self { xi, frame })
    }

    /// The chart `{x_{n+1} = 1}` of `P^n`.
    pub fn standard(n: usize) -> Self {
        let mut xi = DVector::zeros(n + 1);
        xi[n] = 1.0;
        Self::new(xi).expect("nonzero")
    }

    pub fn covector(&self) -> &DVector<f64> {
        &self.xi
    }

    pub fn dim(&self) -> usize {
        self.xi.len() - 1
    }

    pub fn is_standard(&self) -> bool {
        let n = self.dim();
        self.xi.rows(0, n).norm() == 0.0 && self.xi[n] > 0.0
    }

    /// `xi . v / |xi|` for unit `v`: zero exactly on the hyperplane at infinity.
    pub fn level(&self, v: &DVector<f64>) -> f64 {
        self.xi.dot(v) / (self.xi.norm() * v.norm())
    }

    pub fn contains_point(&self, p: &ProjectivePoint) -> bool {
        self.level(p.coords()).abs() > 1e-12
    }

    /// Affine coordinates of a homogeneous vector.
    pub fn coords_of(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        let s = self.xi.dot(v);
        if self.level(v).abs() <= 1e-12 {
            return Err(HilbertError::PointAtInfinity);
        }
        let n = self.dim();
        let img = &self.frame * (v / s);
        Ok(img.rows(0, n).into_owned())
    }

    pub fn coords(&self, p: &ProjectivePoint) -> Result<DVector<f64>> {
        self.coords_of(p.coords())
    }

    /// Homogeneous representative (with `xi . v = 1`) of affine coordinates `u`.
    pub fn embed_vector(&self, u: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let mut w = DVector::zeros(n + 1);
        w.rows_mut(0, n).copy_from(u);
        w[n] = 1.0 / self.xi.norm();
        self.frame.transpose() * w
    }

    pub fn embed(&self, u: &DVector<f64>) -> ProjectivePoint {
        ProjectivePoint::new(self.embed_vector(u)).expect("embedding is nonzero")
    }

    /// Matrix `K` with `K * (u, 1) = embed_vector(u)`.
    pub fn embedding_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut d = DMatrix::identity(n + 1, n + 1);
        d[(n, n)] = 1.0 / self.xi.norm();
        self.frame.transpose() * d
    }
}

/// An element of `SL±(n+1, R)` acting on `P^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMap {
    matrix: DMatrix<f64>,
    det_sign: i8,
}

/// Scales `m` to `|det| = 1`, keeping the sign of the determinant.
pub fn det_normalize(m: &DMatrix<f64>) -> Result<ProjectiveMap> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(HilbertError::InvalidMatrix(
            "matrix must be square and nonempty".into(),
        ));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(HilbertError::InvalidMatrix("non-finite entry".into()));
    }
    let k = m.nrows();
    let scale = m.norm();
    if scale == 0.0 {
        return Err(HilbertError::InvalidMatrix("zero matrix".into()));
    }
    // Work on m/|m| so the singularity test does not depend on the scale.
    let unit = m / scale;
    let d = linalg::det(&unit);
    if d.abs() <= SINGULAR_TOL || !d.is_finite() {
        return Err(HilbertError::InvalidMatrix(format!(
            "numerically singular (det {d:.3e})"
        )));
    }
    let factor = d.abs().powf(1.0 / k as f64);
    Ok(ProjectiveMap {
        matrix: unit / factor,
        det_sign: if d > 0.0 { 1 } else { -1 },
    })
}

impl ProjectiveMap {
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        det_normalize(&m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = linalg::from_rows(rows)
            .ok_or_else(|| HilbertError::InvalidMatrix("ragged or empty rows".into()))?;
        det_normalize(&m)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n + 1, n + 1),
            det_sign: 1,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn det_sign(&self) -> i8 {
        self.det_sign
    }

    /// Dimension `n` of the projective space acted on.
    pub fn dim(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn compose(&self, other: &Self) -> Self {
        det_normalize(&(&self.matrix * &other.matrix)).expect("product of invertible maps")
    }

    pub fn inverse(&self) -> Self {
        let inv = self
            .matrix
            .clone()
            .try_inverse()
            .expect("det-normalized maps are invertible");
        det_normalize(&inv).expect("inverse is invertible")
    }

    pub fn apply_vector(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        linalg::to_rows(&self.matrix)
    }
}

impl Serialize for ProjectiveMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProjectiveMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        ProjectiveMap::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Image of `p` under `g`.
pub fn apply_map(g: &ProjectiveMap, p: &ProjectivePoint) -> Result<ProjectivePoint> {
    if g.matrix.nrows() != p.coords().len() {
        return Err(HilbertError::DimensionMismatch {
            expected: g.matrix.nrows(),
            got: p.coords().len(),
        });
    }
    ProjectivePoint::new(g.apply_vector(p.coords()))
}

/// Affine coordinates of `p` in `chart`.
pub fn chart_coords(chart: &AffineChart, p: &ProjectivePoint) -> Result<DVector<f64>> {
    chart.coords(p)
}

/// Covector of the coordinate (or diagonal sign) chart in which the smallest
/// `|xi . p|` among the given unit points is largest.
fn best_common_chart(points: &[&ProjectivePoint]) -> Option<DVector<f64>> {
    let k = points[0].coords().len();
    let mut candidates: Vec<DVector<f64>> = (0..k)
        .map(|i| {
            let mut e = DVector::zeros(k);
            e[i] = 1.0;
            e
        })
        .collect();
    if k <= 6 {
        for mask in 0..(1u32 << (k - 1)) {
            let s = DVector::from_fn(k, |i, _| {
                if i > 0 && mask & (1 << (i - 1)) != 0 {
                    -1.0
                } else {
                    1.0
                }
            });
            candidates.push(s / (k as f64).sqrt());
        }
    }
    let score = |xi: &DVector<f64>| {
        points
            .iter()
            .map(|p| xi.dot(p.coords()).abs())
            .fold(f64::INFINITY, f64::min)
    };
    let mut best = None;
    let mut best_score = 1e-12;
    for c in candidates {
        let s = score(&c);
        if s > best_score {
            best_score = s;
            best = Some(c);
        }
    }
    best
}

/// The cross-ratio `[a:b:x:y] = |a-x| |b-y| / (|a-y| |b-x|)` of four collinear points.
pub fn cross_ratio(
    a: &ProjectivePoint,
    b: &ProjectivePoint,
    x: &ProjectivePoint,
    y: &ProjectivePoint,
) -> Result<f64> {
    let k = a.coords().len();
    for p in [b, x, y] {
        if p.coords().len() != k {
            return Err(HilbertError::DimensionMismatch {
                expected: k,
                got: p.coords().len(),
            });
        }
    }
    if a.approx_eq(y, 1e-12) || b.approx_eq(x, 1e-12) {
        return Err(HilbertError::DegenerateConfiguration(
            "a = y or b = x".into(),
        ));
    }
    let stacked = DMatrix::from_fn(4, k, |i, j| [a, b, x, y][i].coords()[j]);
    let sv = linalg::sorted_singular_values(&stacked);
    if sv.len() >= 3 && sv[2] > COLLINEARITY_TOL * sv[0] {
        return Err(HilbertError::CollinearityViolation(sv[2] / sv[0]));
    }
    let xi = best_common_chart(&[a, b, x, y]).ok_or_else(|| {
        HilbertError::DegenerateConfiguration("no chart contains all four points".into())
    })?;
    let chart = AffineChart::new(xi)?;
    let ua = chart.coords(a)?;
    let ub = chart.coords(b)?;
    let ux = chart.coords(x)?;
    let uy = chart.coords(y)?;
    let num = (&ua - &ux).norm() * (&ub - &uy).norm();
    let den = (&ua - &uy).norm() * (&ub - &ux).norm();
    if den == 0.0 {
        return Err(HilbertError::DegenerateConfiguration(
            "vanishing denominator".into(),
        ));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(u: &[f64]) -> ProjectivePoint {
        ProjectivePoint::from_affine(u)
    }

    #[test]
    fn cross_ratio_hand_value() {
        let cr = cross_ratio(
            &pt(&[0.0, 0.0]),
            &pt(&[3.0, 0.0]),
            &pt(&[1.0, 0.0]),
            &pt(&[2.0, 0.0]),
        )
        .unwrap();
        assert!((cr - 0.25).abs() < 1e-14);
    }

    #[test]
    fn cross_ratio_coincident_inner_points_is_one() {
        let cr = cross_ratio(
            &pt(&[-1.0, 0.5]),
            &pt(&[1.0, 0.5]),
            &pt(&[0.2, 0.5]),
            &pt(&[0.2, 0.5]),
        )
        .unwrap();
        assert!((cr - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cross_ratio_errors() {
        let r = cross_ratio(
            &pt(&[0.0, 0.0]),
            &pt(&[3.0, 0.0]),
            &pt(&[1.0, 1.0]),
            &pt(&[2.0, 0.0]),
        );
        assert!(matches!(r, Err(HilbertError::CollinearityViolation(_))));
        let r = cross_ratio(
            &pt(&[0.0, 0.0]),
            &pt(&[3.0, 0.0]),
            &pt(&[1.0, 0.0]),
            &pt(&[0.0, 0.0]),
        );
        assert!(matches!(r, Err(HilbertError::DegenerateConfiguration(_))));
    }

    #[test]
    fn cross_ratio_with_points_off_coordinate_charts() {
        // Line at infinity of the standard chart: no coordinate chart holds all four.
        let p = |v: [f64; 3]| ProjectivePoint::from_slice(&v).unwrap();
        let a = p([1.0, 0.0, 0.0]);
        let b = p([0.0, 1.0, 0.0]);
        let x = p([1.0, 1.0, 0.0]);
        let y = p([1.0, 2.0, 0.0]);
        // On the line, parametrize by t = v2/v1 in the chart v1 + v2 = 1... compare with direct 1-D formula.
        // Chart s = v2/(v1+v2): a=0, b=1, x=1/2, y=2/3.
        let expect = ((0.0f64 - 0.5).abs() * (1.0f64 - 2.0 / 3.0).abs())
            / ((0.0f64 - 2.0 / 3.0).abs() * (1.0f64 - 0.5).abs());
        let cr = cross_ratio(&a, &b, &x, &y).unwrap();
        assert!((cr - expect).abs() < 1e-12, "{cr} vs {expect}");
    }

    #[test]
    fn det_normalize_examples() {
        let id = det_normalize(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(id.det_sign(), 1);
        assert!(linalg::dist_to_identity(id.matrix()) < 1e-15);

        let two = det_normalize(&(DMatrix::identity(3, 3) * 2.0)).unwrap();
        assert_eq!(two.det_sign(), 1);
        assert!(linalg::dist_to_identity(two.matrix()) < 1e-14);

        let refl = det_normalize(&DMatrix::from_diagonal(&DVector::from_vec(vec![
            -1.0, 1.0, 1.0,
        ])))
        .unwrap();
        assert_eq!(refl.det_sign(), -1);
        assert!((refl.matrix()[(0, 0)] + 1.0).abs() < 1e-15);

        let sing = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(
            det_normalize(&sing),
            Err(HilbertError::InvalidMatrix(_))
        ));
    }

    #[test]
    fn apply_map_examples() {
        let p = ProjectivePoint::from_slice(&[1.0, 1.0, 1.0]).unwrap();
        let id = ProjectiveMap::identity(2);
        assert_eq!(apply_map(&id, &p).unwrap(), p);
        let d = ProjectiveMap::from_matrix(DMatrix::from_diagonal(&DVector::from_vec(vec![
            2.0, 1.0, 0.5,
        ])))
        .unwrap();
        let img = apply_map(&d, &p).unwrap();
        assert_eq!(img, ProjectivePoint::from_slice(&[4.0, 2.0, 1.0]).unwrap());
    }

    #[test]
    fn chart_coords_examples() {
        let std = AffineChart::standard(2);
        let o = ProjectivePoint::from_slice(&[0.0, 0.0, 1.0]).unwrap();
        assert!(chart_coords(&std, &o).unwrap().norm() < 1e-15);
        let p = ProjectivePoint::from_slice(&[2.0, 4.0, 2.0]).unwrap();
        let u = chart_coords(&std, &p).unwrap();
        assert!((u[0] - 1.0).abs() < 1e-14 && (u[1] - 2.0).abs() < 1e-14);
        let inf = ProjectivePoint::from_slice(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(chart_coords(&std, &inf), Err(HilbertError::PointAtInfinity));
    }

    #[test]
    fn chart_round_trip_in_tilted_chart() {
        let chart = AffineChart::new(DVector::from_vec(vec![0.3, -0.4, 1.2])).unwrap();
        let p = ProjectivePoint::from_slice(&[0.2, 0.7, 1.0]).unwrap();
        let u = chart.coords(&p).unwrap();
        assert_eq!(chart.embed(&u), p);
        let v = chart.embed_vector(&u);
        assert!((chart.covector().dot(&v) - 1.0).abs() < 1e-14);
    }
}
