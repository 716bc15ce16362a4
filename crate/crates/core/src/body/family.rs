//! Built-in bodies with known automorphisms.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ConvexBody;
use crate::error::{HilbertError, Result};
use crate::projective::{det_normalize, ProjectiveMap, ProjectivePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyTag {
    Ellipsoid,
    Simplex,
    Polygon,
}

impl FromStr for FamilyTag {
    type Err = HilbertError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ellipsoid" => Ok(Self::Ellipsoid),
            "simplex" => Ok(Self::Simplex),
            "polygon" => Ok(Self::Polygon),
            other => Err(HilbertError::UnsupportedFamily(other.to_string())),
        }
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ellipsoid => "ellipsoid",
            Self::Simplex => "simplex",
            Self::Polygon => "polygon",
        })
    }
}

/// Hyperbolic translation of the unit ball along a coordinate axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boost {
    pub axis: usize,
    pub rapidity: f64,
}

/// Rotation in the plane of two coordinate axes of the chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneRotation {
    pub axes: (usize, usize),
    pub angle: f64,
}

/// Generator parameters. Fields that do not apply to the chosen family must
/// be left empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyParams {
    /// Ellipsoid: boosts of the unit ball.
    pub boosts: Vec<Boost>,
    /// Ellipsoid: rotations about the center.
    pub rotations: Vec<PlaneRotation>,
    /// Simplex: logarithms of the `n + 1` diagonal entries.
    pub log_diagonals: Vec<Vec<f64>>,
    /// Simplex: permutations of the `n + 1` coordinates, as images of `0..=n`.
    pub permutations: Vec<Vec<usize>>,
    /// Polygon: number of sides of the regular polygon (default 4).
    pub sides: Option<usize>,
    /// Polygon: rotations by `2 pi s / sides`.
    pub turns: Vec<usize>,
    /// Polygon: reflections in the line through the center and vertex `s`.
    pub reflections: Vec<usize>,
}

/// A body with an interior basepoint and a list of its automorphisms.
#[derive(Debug, Clone)]
pub struct BodyFamily {
    pub tag: FamilyTag,
    pub body: ConvexBody,
    pub basepoint: ProjectivePoint,
    pub generators: Vec<ProjectiveMap>,
}

fn reject_unused(tag: FamilyTag, used: &[&str], p: &FamilyParams) -> Result<()> {
    let present = [
        ("boosts", !p.boosts.is_empty()),
        ("rotations", !p.rotations.is_empty()),
        ("log_diagonals", !p.log_diagonals.is_empty()),
        ("permutations", !p.permutations.is_empty()),
        ("sides", p.sides.is_some()),
        ("turns", !p.turns.is_empty()),
        ("reflections", !p.reflections.is_empty()),
    ];
    for (name, set) in present {
        if set && !used.contains(&name) {
            return Err(HilbertError::UnsupportedFamily(format!(
                "parameter `{name}` does not apply to the {tag} family"
            )));
        }
    }
    Ok(())
}

fn check_axis(axis: usize, n: usize) -> Result<()> {
    if axis >= n {
        return Err(HilbertError::UnsupportedFamily(format!(
            "axis {axis} out of range for n = {n}"
        )));
    }
    Ok(())
}

/// Boost of the unit ball moving the center to `tanh(t) e_axis`.
pub fn boost(n: usize, axis: usize, t: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(n + 1, n + 1);
    m[(axis, axis)] = t.cosh();
    m[(n, n)] = t.cosh();
    m[(axis, n)] = t.sinh();
    m[(n, axis)] = t.sinh();
    m
}

/// Rotation by `angle` in the `(i, j)` coordinate plane of the chart.
pub fn rotation(n: usize, i: usize, j: usize, angle: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(n + 1, n + 1);
    let (s, c) = angle.sin_cos();
    m[(i, i)] = c;
    m[(j, j)] = c;
    m[(i, j)] = -s;
    m[(j, i)] = s;
    m
}

/// Builds the body, basepoint and automorphism generators of a family.
pub fn make_family(tag: FamilyTag, n: usize, params: &FamilyParams) -> Result<BodyFamily> {
    if n < 2 {
        return Err(HilbertError::UnsupportedDimension(n));
    }
    let mut mats: Vec<DMatrix<f64>> = Vec::new();
    let (body, basepoint) = match tag {
        FamilyTag::Ellipsoid => {
            reject_unused(tag, &["boosts", "rotations"], params)?;
            for b in &params.boosts {
                check_axis(b.axis, n)?;
                mats.push(boost(n, b.axis, b.rapidity));
            }
            for r in &params.rotations {
                let (i, j) = r.axes;
                check_axis(i, n)?;
                check_axis(j, n)?;
                if i == j {
                    return Err(HilbertError::UnsupportedFamily(
                        "rotation axes must differ".into(),
                    ));
                }
                mats.push(rotation(n, i, j, r.angle));
            }
            (ConvexBody::unit_ball(n), ProjectivePoint::origin(n))
        }
        FamilyTag::Simplex => {
            reject_unused(tag, &["log_diagonals", "permutations"], params)?;
            for d in &params.log_diagonals {
                if d.len() != n + 1 {
                    return Err(HilbertError::DimensionMismatch {
                        expected: n + 1,
                        got: d.len(),
                    });
                }
                mats.push(DMatrix::from_diagonal(&DVector::from_iterator(
                    n + 1,
                    d.iter().map(|x| x.exp()),
                )));
            }
            for p in &params.permutations {
                let mut sorted = p.clone();
                sorted.sort_unstable();
                if sorted != (0..=n).collect::<Vec<_>>() {
                    return Err(HilbertError::UnsupportedFamily(format!(
                        "{p:?} is not a permutation of 0..={n}"
                    )));
                }
                mats.push(DMatrix::from_fn(n + 1, n + 1, |i, j| {
                    if p[j] == i {
                        1.0
                    } else {
                        0.0
                    }
                }));
            }
            let cone: Vec<DVector<f64>> = (0..=n)
                .map(|i| DVector::from_fn(n + 1, |j, _| if i == j { 1.0 } else { 0.0 }))
                .collect();
            let basepoint = ProjectivePoint::new(DVector::from_element(n + 1, 1.0))?;
            (ConvexBody::from_cone(&cone)?, basepoint)
        }
        FamilyTag::Polygon => {
            reject_unused(tag, &["sides", "turns", "reflections"], params)?;
            if n != 2 {
                return Err(HilbertError::UnsupportedDimension(n));
            }
            let k = params.sides.unwrap_or(4);
            if k < 3 {
                return Err(HilbertError::UnsupportedFamily(format!(
                    "a polygon needs at least 3 sides, got {k}"
                )));
            }
            let vertex_angle = |j: usize| PI * (2 * j + 1) as f64 / k as f64;
            let verts: Vec<Vec<f64>> = (0..k)
                .map(|j| vec![vertex_angle(j).cos(), vertex_angle(j).sin()])
                .collect();
            for &s in &params.turns {
                mats.push(rotation(2, 0, 1, 2.0 * PI * s as f64 / k as f64));
            }
            for &s in &params.reflections {
                let (sn, cs) = (2.0 * vertex_angle(s % k)).sin_cos();
                mats.push(DMatrix::from_row_slice(
                    3,
                    3,
                    &[cs, sn, 0.0, sn, -cs, 0.0, 0.0, 0.0, 1.0],
                ));
            }
            (
                ConvexBody::from_vertices(&verts)?,
                ProjectivePoint::origin(2),
            )
        }
    };
    if mats.is_empty() {
        mats.push(DMatrix::identity(n + 1, n + 1));
    }
    let generators = mats.iter().map(det_normalize).collect::<Result<Vec<_>>>()?;
    Ok(BodyFamily {
        tag,
        body,
        basepoint,
        generators,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ellipsoid_boost_preserves_form() {
        let params = FamilyParams {
            boosts: vec![Boost {
                axis: 0,
                rapidity: 0.3,
            }],
            ..Default::default()
        };
        let fam = make_family(FamilyTag::Ellipsoid, 2, &params).unwrap();
        let g = fam.generators[0].matrix();
        let q = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, -1.0]));
        assert!((g.transpose() * &q * g - &q).norm() < 1e-12);
        assert!(fam.body.is_automorphism(&fam.generators[0]).unwrap());
    }

    #[test]
    fn simplex_generators_permute_vertices() {
        let params = FamilyParams {
            log_diagonals: vec![vec![1.0, 0.0, -1.0], vec![0.5, 0.25, -0.75]],
            permutations: vec![vec![1, 0, 2], vec![1, 2, 0]],
            ..Default::default()
        };
        let fam = make_family(FamilyTag::Simplex, 2, &params).unwrap();
        assert_eq!(fam.generators.len(), 4);
        for g in &fam.generators {
            assert!(fam.body.is_automorphism(g).unwrap());
        }
        assert_eq!(
            fam.body.contains(&fam.basepoint),
            super::super::Containment::Interior
        );
    }

    #[test]
    fn polygon_symmetries() {
        let bare = make_family(FamilyTag::Polygon, 2, &FamilyParams::default()).unwrap();
        assert_eq!(bare.generators.len(), 1);
        assert!(crate::linalg::dist_to_identity(bare.generators[0].matrix()) == 0.0);
        let params = FamilyParams {
            sides: Some(6),
            turns: vec![1, 2],
            reflections: vec![0, 3],
            ..Default::default()
        };
        let fam = make_family(FamilyTag::Polygon, 2, &params).unwrap();
        for g in &fam.generators {
            assert!(fam.body.is_automorphism(g).unwrap());
        }
    }

    #[test]
    fn family_errors() {
        assert!(matches!(
            "torus".parse::<FamilyTag>(),
            Err(HilbertError::UnsupportedFamily(_))
        ));
        let wrong = FamilyParams {
            sides: Some(5),
            ..Default::default()
        };
        assert!(matches!(
            make_family(FamilyTag::Ellipsoid, 2, &wrong),
            Err(HilbertError::UnsupportedFamily(_))
        ));
        assert_eq!(
            make_family(FamilyTag::Polygon, 3, &FamilyParams::default()).unwrap_err(),
            HilbertError::UnsupportedDimension(3)
        );
        assert_eq!(
            make_family(FamilyTag::Simplex, 1, &FamilyParams::default()).unwrap_err(),
            HilbertError::UnsupportedDimension(1)
        );
    }
}
