//! JSON form of bodies.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{ConvexBody, Shape};
use crate::error::{HilbertError, Result};
use crate::linalg;

/// How coordinates in a body description are to be read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartKind {
    /// Affine coordinates of the standard chart; half-space rows `[a, b]` mean `a . u <= b`.
    #[default]
    Standard,
    /// Homogeneous coordinates; half-space rows `alpha` mean `alpha . v >= 0`.
    Homogeneous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum BodySpec {
    Hpolytope {
        #[serde(default)]
        chart: ChartKind,
        halfspaces: Vec<Vec<f64>>,
    },
    Vpolytope {
        #[serde(default)]
        chart: ChartKind,
        vertices: Vec<Vec<f64>>,
    },
    Ellipsoid {
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
    },
}

fn vectors(rows: &[Vec<f64>]) -> Vec<DVector<f64>> {
    rows.iter().map(|r| DVector::from_column_slice(r)).collect()
}

impl BodySpec {
    pub fn build(&self) -> Result<ConvexBody> {
        match self {
            BodySpec::Hpolytope {
                chart: ChartKind::Standard,
                halfspaces,
            } => ConvexBody::from_halfspaces(halfspaces),
            BodySpec::Hpolytope {
                chart: ChartKind::Homogeneous,
                halfspaces,
            } => ConvexBody::from_cone(&vectors(halfspaces)),
            BodySpec::Vpolytope {
                chart: ChartKind::Standard,
                vertices,
            } => ConvexBody::from_vertices(vertices),
            BodySpec::Vpolytope {
                chart: ChartKind::Homogeneous,
                vertices,
            } => ConvexBody::from_rays(&vectors(vertices)),
            BodySpec::Ellipsoid { q } => {
                let m = linalg::from_rows(q)
                    .ok_or_else(|| HilbertError::Schema("Q must be a rectangular matrix".into()))?;
                ConvexBody::ellipsoid(m)
            }
        }
    }
}

impl ConvexBody {
    /// Half-space (or form) description that rebuilds this body.
    pub fn to_spec(&self) -> BodySpec {
        match &self.shape {
            Shape::Ellipsoid(e) => BodySpec::Ellipsoid {
                q: linalg::to_rows(e.form()),
            },
            Shape::Polytope(p) if self.chart.is_standard() && p.proper => {
                let n = self.n;
                let halfspaces = p
                    .facets
                    .iter()
                    .map(|a| (0..=n).map(|i| if i < n { -a[i] } else { a[n] }).collect())
                    .collect();
                BodySpec::Hpolytope {
                    chart: ChartKind::Standard,
                    halfspaces,
                }
            }
            Shape::Polytope(p) => BodySpec::Hpolytope {
                chart: ChartKind::Homogeneous,
                halfspaces: p
                    .facets
                    .iter()
                    .map(|a| a.iter().cloned().collect())
                    .collect(),
            },
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: BodySpec = serde_json::from_str(s)?;
        spec.build()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_spec()).expect("plain data serializes")
    }
}

impl Serialize for ConvexBody {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_spec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConvexBody {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        BodySpec::deserialize(d)?
            .build()
            .map_err(serde::de::Error::custom)
    }
}
