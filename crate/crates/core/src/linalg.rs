//! Small dense linear-algebra helpers shared by the geometry modules.

use nalgebra::{DMatrix, DVector};

/// Determinant of a small square matrix by Laplace-free LU.
pub fn det(m: &DMatrix<f64>) -> f64 {
    m.clone().lu().determinant()
}

/// Numerical rank: number of singular values above `rel_tol * sigma_max`.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Singular values sorted in decreasing order.
pub fn sorted_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().singular_values().iter().cloned().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Generalized cross product of the `k-1` rows of a `(k-1) x k` matrix.
///
/// The result is orthogonal to every row and vanishes exactly when the rows
/// are linearly dependent.
pub fn cross_rows(rows: &DMatrix<f64>) -> DVector<f64> {
    let k = rows.ncols();
    debug_assert_eq!(rows.nrows() + 1, k);
    let mut out = DVector::zeros(k);
    for j in 0..k {
        let minor = rows.clone().remove_column(j);
        let d = if minor.nrows() == 0 { 1.0 } else { det(&minor) };
        out[j] = if j % 2 == 0 { d } else { -d };
    }
    out
}

/// Kernel direction of a `(k-1) x k` system, or `None` when the rows do not
/// have full rank (relative to the product of row norms).
pub fn null_vector(rows: &DMatrix<f64>, rel_tol: f64) -> Option<DVector<f64>> {
    let v = cross_rows(rows);
    let scale: f64 = rows.row_iter().map(|r| r.norm()).product();
    let nv = v.norm();
    if scale == 0.0 || nv <= rel_tol * scale {
        None
    } else {
        Some(v / nv)
    }
}

/// Orthogonal matrix `R` with `R * (xi / |xi|) = e_last`, depending smoothly
/// on `xi` away from `-e_last` and equal to the identity at `xi = e_last`.
pub fn frame(xi: &DVector<f64>) -> DMatrix<f64> {
    let k = xi.len();
    let unit = xi / xi.norm();
    let mut flip = DMatrix::identity(k, k);
    flip[(k - 1, k - 1)] = -1.0;
    let mut w = unit.clone();
    w[k - 1] += 1.0;
    let ww = w.dot(&w);
    if ww < 1e-24 {
        return flip;
    }
    let house = DMatrix::identity(k, k) - (&w * w.transpose()) * (2.0 / ww);
    flip * house
}

/// Orthonormal basis of the orthogonal complement of `x`, as columns.
pub fn complement_basis(x: &DVector<f64>) -> DMatrix<f64> {
    let k = x.len();
    let r = frame(x);
    r.rows(0, k - 1).transpose()
}

/// Symmetric eigen-decomposition with eigenvalues sorted increasingly.
pub fn sym_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = DVector::from_iterator(n, idx.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = DMatrix::zeros(n, n);
    for (c, &i) in idx.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// `f(M)` for symmetric `M`, applying `f` to the eigenvalues.
pub fn sym_fn(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let (vals, vecs) = sym_eigen(m);
    let d = DMatrix::from_diagonal(&vals.map(f));
    &vecs * d * vecs.transpose()
}

/// Frobenius norm of `m - I`.
pub fn dist_to_identity(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    (m - DMatrix::<f64>::identity(n, n)).norm()
}

/// Row-major nested vectors, the JSON layout for matrices.
pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().cloned().collect()).collect()
}

pub fn from_rows(rows: &[Vec<f64>]) -> Option<DMatrix<f64>> {
    let r = rows.len();
    if r == 0 {
        return None;
    }
    let c = rows[0].len();
    if c == 0 || rows.iter().any(|row| row.len() != c) {
        return None;
    }
    Some(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

/// Serializes a vector as a JSON array.
pub fn ser_vector<S: serde::Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
    serde::Serialize::serialize(v.as_slice(), s)
}

/// Serializes a matrix as row-major nested arrays.
pub fn ser_matrix<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&to_rows(m), s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_maps_covector_to_last_axis() {
        for xi in [
            DVector::from_vec(vec![0.0, 0.0, 1.0]),
            DVector::from_vec(vec![1.0, 2.0, 3.0]),
            DVector::from_vec(vec![0.3, -0.2, -1.0]),
            DVector::from_vec(vec![0.0, 0.0, -1.0]),
        ] {
            let r = frame(&xi);
            let img = &r * (&xi / xi.norm());
            assert!((img[2] - 1.0).abs() < 1e-12 && img[0].abs() < 1e-12 && img[1].abs() < 1e-12);
            assert!(dist_to_identity(&(r.transpose() * &r)) < 1e-12);
        }
        let std = frame(&DVector::from_vec(vec![0.0, 0.0, 2.0]));
        assert!(dist_to_identity(&std) < 1e-15);
    }

    #[test]
    fn cross_rows_is_orthogonal() {
        let rows = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, -1.0, 0.5, 2.0]);
        let v = cross_rows(&rows);
        assert!(rows.row(0).dot(&v.transpose()).abs() < 1e-12);
        assert!(rows.row(1).dot(&v.transpose()).abs() < 1e-12);
        let dep = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert!(null_vector(&dep, 1e-12).is_none());
    }

    #[test]
    fn symmetric_square_root() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let s = sym_fn(&m, f64::sqrt);
        assert!((&s * &s - &m).norm() < 1e-12);
    }
}
