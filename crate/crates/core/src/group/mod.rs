//! Finitely generated groups of projective maps: word balls, the proximity
//! gauge, epsilon-generated subgroups and nilpotency tests.

mod exact;
mod lcs;
pub mod orbit;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use ordered_float::OrderedFloat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use exact::IntMatrix;
pub use lcs::{
    commutator, commutator_word, nilpotency_witness, nilpotency_witness_with, word_is_nontrivial,
    zassenhaus_descent, ArithmeticPath, CommutatorWitness, Descent, LayerSummary, LcsOptions,
    NilpotencyVerdict, Verdict,
};

use crate::body::MarkedBody;
use crate::error::{HilbertError, Result};
use crate::hilbert::displacement_unchecked;
use crate::linalg;
use crate::projective::ProjectiveMap;

/// Gauge below which two group elements are identified.
pub const DEDUP_TOL: f64 = 1e-9;
/// Gauge below which a listed inverse counts as present.
pub const INVERSE_TOL: f64 = 1e-10;
/// Default cap on the number of word-ball elements.
pub const DEFAULT_BALL_CAP: usize = 1_000_000;

/// `max(|g^-1 h - I|_F, |h^-1 g - I|_F)`, a left-invariant proximity gauge.
pub fn proximity_gauge(g: &ProjectiveMap, h: &ProjectiveMap) -> Result<f64> {
    if g.matrix().shape() != h.matrix().shape() {
        return Err(HilbertError::DimensionMismatch {
            expected: g.matrix().nrows(),
            got: h.matrix().nrows(),
        });
    }
    Ok(gauge_matrices(g.matrix(), h.matrix()))
}

pub(crate) fn gauge_matrices(g: &DMatrix<f64>, h: &DMatrix<f64>) -> f64 {
    // Entries far outside the f64 range of the inverse count as infinitely far.
    let (Some(gi), Some(hi)) = (g.clone().try_inverse(), h.clone().try_inverse()) else {
        return f64::INFINITY;
    };
    linalg::dist_to_identity(&(gi * h)).max(linalg::dist_to_identity(&(hi * g)))
}

/// `gauge(g, I) = |g - I|` up to the max with `|g^-1 - I|`.
pub fn gauge_to_identity(g: &ProjectiveMap) -> f64 {
    let inv = g.matrix().clone().try_inverse().expect("invertible");
    linalg::dist_to_identity(g.matrix()).max(linalg::dist_to_identity(&inv))
}

/// Set of matrices keyed by a fixed linear functional, for gauge-based dedup.
pub(crate) struct MatrixIndex {
    weights: DMatrix<f64>,
    keys: BTreeMap<OrderedFloat<f64>, Vec<usize>>,
}

impl MatrixIndex {
    pub(crate) fn new(k: usize) -> Self {
        // Any fixed generic weights work; these are irrational-looking and unit-norm.
        let w = DMatrix::from_fn(k, k, |i, j| {
            ((i * k + j) as f64 * 0.754_877_666 + 0.1).sin()
        });
        let norm = w.norm();
        Self {
            weights: w / norm,
            keys: BTreeMap::new(),
        }
    }

    fn key(&self, m: &DMatrix<f64>) -> f64 {
        self.weights.dot(m)
    }

    /// Index of a stored matrix within gauge `tol` of `m`.
    pub(crate) fn find(
        &self,
        m: &DMatrix<f64>,
        stored: &[DMatrix<f64>],
        tol: f64,
    ) -> Option<usize> {
        let key = self.key(m);
        // gauge < tol implies |m - s|_F <= |s|_op tol <= |m|_F tol (1 + tol).
        let width = 2.0 * tol * m.norm() + 1e-300;
        self.keys
            .range(OrderedFloat(key - width)..=OrderedFloat(key + width))
            .flat_map(|(_, ids)| ids.iter().copied())
            .find(|&i| gauge_matrices(&stored[i], m) < tol)
    }

    pub(crate) fn insert(&mut self, m: &DMatrix<f64>, id: usize) {
        self.keys
            .entry(OrderedFloat(self.key(m)))
            .or_default()
            .push(id);
    }
}

/// A finite list of generators, flagged symmetric when closed under inverses.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "Vec<ProjectiveMap>", into = "Vec<ProjectiveMap>")]
pub struct GeneratorSet {
    elements: Vec<ProjectiveMap>,
    symmetric: bool,
    inverse_of: Vec<Option<usize>>,
}

impl From<Vec<ProjectiveMap>> for GeneratorSet {
    fn from(v: Vec<ProjectiveMap>) -> Self {
        Self::new(v)
    }
}

impl From<GeneratorSet> for Vec<ProjectiveMap> {
    fn from(s: GeneratorSet) -> Self {
        s.elements
    }
}

impl GeneratorSet {
    pub fn new(elements: Vec<ProjectiveMap>) -> Self {
        let inverse_of: Vec<Option<usize>> = elements
            .iter()
            .map(|g| {
                let gi = g.inverse();
                elements.iter().position(|h| {
                    h.matrix().shape() == gi.matrix().shape()
                        && gauge_matrices(h.matrix(), gi.matrix()) < INVERSE_TOL
                })
            })
            .collect();
        let symmetric = inverse_of.iter().all(Option::is_some);
        Self {
            elements,
            symmetric,
            inverse_of,
        }
    }

    /// Adds every missing inverse right after its element.
    pub fn symmetrized(&self) -> Self {
        if self.symmetric {
            return self.clone();
        }
        let mut out: Vec<ProjectiveMap> = Vec::new();
        for g in &self.elements {
            for h in [g.clone(), g.inverse()] {
                if !out.iter().any(|o| {
                    o.matrix().shape() == h.matrix().shape()
                        && gauge_matrices(o.matrix(), h.matrix()) < INVERSE_TOL
                }) {
                    out.push(h);
                }
            }
        }
        Self::new(out)
    }

    pub fn elements(&self) -> &[ProjectiveMap] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Index of the inverse of generator `i`, when listed.
    pub fn inverse_index(&self, i: usize) -> Option<usize> {
        self.inverse_of[i]
    }

    /// Matrix size `n + 1`, if any generator is present.
    pub fn matrix_size(&self) -> Option<usize> {
        self.elements.first().map(|g| g.matrix().nrows())
    }

    /// Product `s_{w_1} s_{w_2} ... s_{w_k}`.
    pub fn evaluate(&self, word: &[usize], k: usize) -> ProjectiveMap {
        word.iter().fold(ProjectiveMap::identity(k - 1), |acc, &i| {
            acc.compose(&self.elements[i])
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WordBallElement {
    pub map: ProjectiveMap,
    /// Generator indices of a shortest word found for the element.
    pub word: Vec<usize>,
}

/// All products of at most `m` generators, deduplicated, identity first.
pub fn word_ball(s: &GeneratorSet, m: usize) -> Result<Vec<WordBallElement>> {
    word_ball_with_cap(s, m, DEFAULT_BALL_CAP)
}

pub fn word_ball_with_cap(s: &GeneratorSet, m: usize, cap: usize) -> Result<Vec<WordBallElement>> {
    if !s.is_symmetric() {
        return Err(HilbertError::NotSymmetric);
    }
    let Some(k) = s.matrix_size() else {
        return Err(HilbertError::DegenerateConfiguration(
            "empty generator set has no ambient dimension".into(),
        ));
    };
    if let Some(bad) = s.elements.iter().find(|g| g.matrix().nrows() != k) {
        return Err(HilbertError::DimensionMismatch {
            expected: k,
            got: bad.matrix().nrows(),
        });
    }
    let mut out = vec![WordBallElement {
        map: ProjectiveMap::identity(k - 1),
        word: vec![],
    }];
    let mut mats = vec![out[0].map.matrix().clone()];
    let mut index = MatrixIndex::new(k);
    index.insert(&mats[0], 0);
    let mut frontier = vec![0usize];
    for _ in 0..m {
        let candidates: Vec<(usize, usize, ProjectiveMap)> = frontier
            .par_iter()
            .flat_map_iter(|&p| {
                let parent = &out[p].map;
                s.elements
                    .iter()
                    .enumerate()
                    .map(move |(j, g)| (p, j, parent.compose(g)))
            })
            .collect();
        let mut next = Vec::new();
        for (p, j, g) in candidates {
            if index.find(g.matrix(), &mats, DEDUP_TOL).is_some() {
                continue;
            }
            if out.len() >= cap {
                return Err(HilbertError::BallCapExceeded(cap));
            }
            let id = out.len();
            let mut word = out[p].word.clone();
            word.push(j);
            index.insert(g.matrix(), id);
            mats.push(g.matrix().clone());
            out.push(WordBallElement { map: g, word });
            next.push(id);
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(out)
}

/// A word-ball element with its displacement at the basepoint.
#[derive(Debug, Clone, Serialize)]
pub struct DisplacedElement {
    pub map: ProjectiveMap,
    pub word: Vec<usize>,
    pub displacement: f64,
}

/// Word-ball elements with their displacements, in ball order.
pub fn displacement_table(
    mb: &MarkedBody,
    s: &GeneratorSet,
    m: usize,
    cap: usize,
) -> Result<Vec<DisplacedElement>> {
    for g in s.elements() {
        if !mb.body().is_automorphism(g)? {
            return Err(HilbertError::NotAnAutomorphism);
        }
    }
    let n = mb.body().dim();
    let ball = if s.is_empty() {
        vec![WordBallElement {
            map: ProjectiveMap::identity(n),
            word: vec![],
        }]
    } else {
        word_ball_with_cap(&s.symmetrized(), m, cap)?
    };
    ball.into_par_iter()
        .map(|e| {
            let d = displacement_unchecked(mb.body(), &e.map, mb.basepoint())?;
            Ok(DisplacedElement {
                map: e.map,
                word: e.word,
                displacement: d,
            })
        })
        .collect()
}

/// Slack for `displacement <= eps` comparisons.
pub(crate) fn within(d: f64, eps: f64) -> bool {
    d <= eps * (1.0 + 1e-9) + 1e-12
}

/// Elements of the depth-`m` word ball displacing the basepoint by at most `eps`, symmetrized.
pub fn epsilon_subgroup_generators(
    mb: &MarkedBody,
    s: &GeneratorSet,
    eps: f64,
    m: usize,
) -> Result<GeneratorSet> {
    let table = displacement_table(mb, s, m, DEFAULT_BALL_CAP)?;
    Ok(epsilon_subgroup_from_table(&table, eps))
}

pub fn epsilon_subgroup_from_table(table: &[DisplacedElement], eps: f64) -> GeneratorSet {
    let picked: Vec<ProjectiveMap> = table
        .iter()
        .filter(|e| within(e.displacement, eps))
        .map(|e| e.map.clone())
        .collect();
    GeneratorSet::new(picked).symmetrized()
}
