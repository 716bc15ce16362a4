//! Exact integer matrices of determinant +-1.

use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::projective::ProjectiveMap;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntMatrix {
    k: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.k)
            .map(|i| (0..self.k).map(|j| self.get(i, j).to_string()).collect())
            .collect();
        write!(f, "{rows:?}")
    }
}

impl IntMatrix {
    pub fn identity(k: usize) -> Self {
        let mut data = vec![BigInt::zero(); k * k];
        for i in 0..k {
            data[i * k + i] = BigInt::one();
        }
        Self { k, data }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let k = rows.len();
        Self {
            k,
            data: rows
                .iter()
                .flat_map(|r| r.iter().map(|&x| BigInt::from(x)))
                .collect(),
        }
    }

    /// The integer matrix of a map whose entries are all integers (to `1e-9`)
    /// with determinant exactly `+-1`.
    pub fn from_map(g: &ProjectiveMap) -> Option<Self> {
        let m = g.matrix();
        let k = m.nrows();
        let mut data = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                let x = m[(i, j)];
                let r = x.round();
                if (x - r).abs() > 1e-9 * r.abs().max(1.0) || r.abs() > 1e15 {
                    return None;
                }
                data.push(BigInt::from(r as i64));
            }
        }
        let out = Self { k, data };
        out.det().abs().is_one().then_some(out)
    }

    pub fn size(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.k + j]
    }

    pub fn is_identity(&self) -> bool {
        (0..self.k).all(|i| {
            (0..self.k).all(|j| {
                if i == j {
                    self.get(i, j).is_one()
                } else {
                    self.get(i, j).is_zero()
                }
            })
        })
    }

    pub fn mul(&self, other: &Self) -> Self {
        let k = self.k;
        let mut data = vec![BigInt::zero(); k * k];
        for i in 0..k {
            for l in 0..k {
                let a = self.get(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..k {
                    data[i * k + j] += a * other.get(l, j);
                }
            }
        }
        Self { k, data }
    }

    /// Determinant by cofactor expansion (matrices here are small).
    pub fn det(&self) -> BigInt {
        fn rec(m: &IntMatrix, rows: &[usize], cols: &[usize]) -> BigInt {
            if rows.len() == 1 {
                return m.get(rows[0], cols[0]).clone();
            }
            let mut acc = BigInt::zero();
            for (c, &col) in cols.iter().enumerate() {
                let a = m.get(rows[0], col);
                if a.is_zero() {
                    continue;
                }
                let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != col).collect();
                let minor = a * rec(m, &rows[1..], &rest);
                if c % 2 == 0 {
                    acc += minor;
                } else {
                    acc -= minor;
                }
            }
            acc
        }
        let idx: Vec<usize> = (0..self.k).collect();
        rec(self, &idx, &idx)
    }

    /// Exact inverse via the adjugate; valid because `det = +-1`.
    pub fn inverse(&self) -> Self {
        let k = self.k;
        let det = self.det();
        if k == 1 {
            return Self { k, data: vec![det] };
        }
        let mut data = vec![BigInt::zero(); k * k];
        for i in 0..k {
            for j in 0..k {
                let rows: Vec<usize> = (0..k).filter(|&r| r != j).collect();
                let cols: Vec<usize> = (0..k).filter(|&c| c != i).collect();
                let sub = Self {
                    k: k - 1,
                    data: rows
                        .iter()
                        .flat_map(|&r| cols.iter().map(move |&c| (r, c)))
                        .map(|(r, c)| self.get(r, c).clone())
                        .collect(),
                };
                let cof = sub.det();
                let signed = if (i + j) % 2 == 0 { cof } else { -cof };
                data[i * k + j] = signed * &det;
            }
        }
        Self { k, data }
    }

    /// `g^-1 h^-1 g h`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.inverse().mul(&other.inverse()).mul(self).mul(other)
    }

    /// Floating copy; entries beyond `f64` range become infinite.
    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.k, self.k, |i, j| {
            self.get(i, j).to_f64().unwrap_or(f64::INFINITY)
        })
    }

    /// Largest number of decimal digits among the entries.
    pub fn max_digits(&self) -> usize {
        self.data
            .iter()
            .map(|x| x.abs().to_string().len())
            .max()
            .unwrap_or(0)
    }

    pub fn to_rows(&self) -> Vec<Vec<String>> {
        (0..self.k)
            .map(|i| (0..self.k).map(|j| self.get(i, j).to_string()).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_commutator() {
        let a = IntMatrix::from_rows(&[vec![1, 2], vec![0, 1]]);
        let b = IntMatrix::from_rows(&[vec![1, 0], vec![2, 1]]);
        assert!(a.mul(&a.inverse()).is_identity());
        let c = a.commutator(&b);
        assert_eq!(c, IntMatrix::from_rows(&[vec![21, 8], vec![-8, -3]]));
        let h = IntMatrix::from_rows(&[vec![1, 1, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert!(h.inverse().mul(&h).is_identity());
        assert_eq!(h.det(), BigInt::one());
    }

    #[test]
    fn detects_integer_maps() {
        let g = ProjectiveMap::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(IntMatrix::from_map(&g).is_some());
        let r = ProjectiveMap::from_rows(&[vec![0.6, -0.8], vec![0.8, 0.6]]).unwrap();
        assert!(IntMatrix::from_map(&r).is_none());
    }
}
