//! Lower central series layers, nilpotency verdicts and commutator descent.

use std::collections::HashSet;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exact::IntMatrix;
use super::{GeneratorSet, MatrixIndex, DEDUP_TOL};
use crate::error::{HilbertError, Result};
use crate::linalg;
use crate::projective::{det_normalize, ProjectiveMap};

/// `g^-1 h^-1 g h`, det-normalized.
pub fn commutator(g: &ProjectiveMap, h: &ProjectiveMap) -> Result<ProjectiveMap> {
    if g.matrix().shape() != h.matrix().shape() {
        return Err(HilbertError::DimensionMismatch {
            expected: g.matrix().nrows(),
            got: h.matrix().nrows(),
        });
    }
    let gi = g
        .matrix()
        .clone()
        .try_inverse()
        .ok_or_else(|| HilbertError::InvalidMatrix("singular".into()))?;
    let hi = h
        .matrix()
        .clone()
        .try_inverse()
        .ok_or_else(|| HilbertError::InvalidMatrix("singular".into()))?;
    det_normalize(&(gi * hi * g.matrix() * h.matrix()))
}

/// Expands the right-normed commutator `[s_{i_1}, [s_{i_2}, ... s_{i_k}]]` into a
/// word in the generators of a symmetric set.
pub fn commutator_word(indices: &[usize], s: &GeneratorSet) -> Vec<usize> {
    let inv = |w: &[usize]| -> Vec<usize> {
        w.iter()
            .rev()
            .map(|&i| s.inverse_index(i).expect("symmetric set"))
            .collect()
    };
    match indices {
        [] => vec![],
        [i] => vec![*i],
        [j, rest @ ..] => {
            let t = commutator_word(rest, s);
            let mut w = inv(&[*j]);
            w.extend(inv(&t));
            w.push(*j);
            w.extend(t);
            w
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArithmeticPath {
    ExactInteger,
    Floating,
}

/// A nontrivial iterated commutator of generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutatorWitness {
    /// `[i_1, ..., i_k]` standing for `[s_{i_1}, [s_{i_2}, ... [s_{i_{k-1}}, s_{i_k}]]]`.
    pub indices: Vec<usize>,
    /// The same element as a word in the generators.
    pub word: Vec<usize>,
    /// Gauge to the identity; absent when it overflows `f64`.
    pub gauge: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Nilpotent { class: usize },
    NotNilpotent { witness: CommutatorWitness },
    Inconclusive { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSummary {
    /// Commutator weight of the layer (1 for the generators).
    pub weight: usize,
    /// Number of distinct nontrivial elements kept.
    pub size: usize,
    pub max_gauge: Option<f64>,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NilpotencyVerdict {
    #[serde(flatten)]
    pub verdict: Verdict,
    pub path: ArithmeticPath,
    pub layers: Vec<LayerSummary>,
}

impl NilpotencyVerdict {
    pub fn class(&self) -> Option<usize> {
        match self.verdict {
            Verdict::Nilpotent { class } => Some(class),
            _ => None,
        }
    }

    pub fn is_nilpotent(&self) -> bool {
        self.class().is_some()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LcsOptions {
    /// Largest class accepted as nilpotent.
    pub class_bound: usize,
    /// Gauge below which a floating element counts as the identity.
    pub tol: f64,
    /// Maximum number of elements kept per layer.
    pub layer_cap: usize,
}

impl Default for LcsOptions {
    fn default() -> Self {
        Self {
            class_bound: 6,
            tol: 1e-9,
            layer_cap: 2048,
        }
    }
}

#[derive(Clone)]
struct Node<E> {
    elem: E,
    indices: Vec<usize>,
    gauge: f64,
}

trait Arith: Sync {
    type E: Clone + Send + Sync;
    fn commutator(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn gauge(&self, a: &Self::E) -> f64;
    fn is_trivial(&self, a: &Self::E, gauge: f64) -> bool;
    fn dedup(&self, nodes: Vec<Node<Self::E>>) -> Vec<Node<Self::E>>;
    /// Whether truncation keeps the smallest elements.
    fn keep_small(&self) -> bool;
}

/// Matrix with its inverse.
#[derive(Clone)]
struct Pair<M> {
    m: M,
    inv: M,
}

struct Exact;

impl Arith for Exact {
    type E = Pair<IntMatrix>;

    fn commutator(&self, a: &Self::E, b: &Self::E) -> Self::E {
        Pair {
            m: a.inv.mul(&b.inv).mul(&a.m).mul(&b.m),
            inv: b.inv.mul(&a.inv).mul(&b.m).mul(&a.m),
        }
    }

    fn gauge(&self, a: &Self::E) -> f64 {
        let m = a.m.to_f64();
        let i = a.inv.to_f64();
        linalg::dist_to_identity(&m).max(linalg::dist_to_identity(&i))
    }

    fn is_trivial(&self, a: &Self::E, _gauge: f64) -> bool {
        a.m.is_identity()
    }

    fn dedup(&self, nodes: Vec<Node<Self::E>>) -> Vec<Node<Self::E>> {
        let mut seen = HashSet::new();
        nodes
            .into_iter()
            .filter(|n| seen.insert(n.elem.m.clone()))
            .collect()
    }

    fn keep_small(&self) -> bool {
        true
    }
}

struct Floating {
    k: usize,
}

impl Arith for Floating {
    type E = Pair<DMatrix<f64>>;

    fn commutator(&self, a: &Self::E, b: &Self::E) -> Self::E {
        Pair {
            m: &a.inv * &b.inv * &a.m * &b.m,
            inv: &b.inv * &a.inv * &b.m * &a.m,
        }
    }

    fn gauge(&self, a: &Self::E) -> f64 {
        let g = linalg::dist_to_identity(&a.m).max(linalg::dist_to_identity(&a.inv));
        if g.is_finite() {
            g
        } else {
            f64::INFINITY
        }
    }

    fn is_trivial(&self, _a: &Self::E, gauge: f64) -> bool {
        gauge < 0.0
    }

    fn dedup(&self, nodes: Vec<Node<Self::E>>) -> Vec<Node<Self::E>> {
        let mut index = MatrixIndex::new(self.k);
        let mut stored: Vec<DMatrix<f64>> = Vec::new();
        let mut out = Vec::new();
        for n in nodes {
            if !n.gauge.is_finite() {
                out.push(n);
                continue;
            }
            if index.find(&n.elem.m, &stored, DEDUP_TOL).is_none() {
                index.insert(&n.elem.m, stored.len());
                stored.push(n.elem.m.clone());
                out.push(n);
            }
        }
        out
    }

    fn keep_small(&self) -> bool {
        false
    }
}

struct Layer<E> {
    nodes: Vec<Node<E>>,
    truncated: bool,
    /// Some element had a gauge in the ambiguous band `[tol, 10 tol]`.
    ambiguous: bool,
}

fn summarize<E>(weight: usize, layer: &Layer<E>) -> LayerSummary {
    let max = layer.nodes.iter().map(|n| n.gauge).fold(0.0, f64::max);
    LayerSummary {
        weight,
        size: layer.nodes.len(),
        max_gauge: max.is_finite().then_some(max),
        truncated: layer.truncated,
    }
}

fn finish_layer<A: Arith>(a: &A, raw: Vec<Node<A::E>>, tol: f64, cap: usize) -> Layer<A::E> {
    let mut ambiguous = false;
    let kept: Vec<Node<A::E>> = raw
        .into_iter()
        .filter(|n| {
            if a.is_trivial(&n.elem, n.gauge) || n.gauge < tol {
                return false;
            }
            if n.gauge <= 10.0 * tol {
                ambiguous = true;
            }
            true
        })
        .collect();
    let mut nodes = a.dedup(kept);
    let truncated = nodes.len() > cap;
    if truncated {
        if a.keep_small() {
            nodes.sort_by(|x, y| x.gauge.total_cmp(&y.gauge));
        } else {
            nodes.sort_by(|x, y| y.gauge.total_cmp(&x.gauge));
        }
        nodes.truncate(cap);
    }
    Layer {
        nodes,
        truncated,
        ambiguous,
    }
}

fn first_layer<A: Arith>(a: &A, gens: Vec<A::E>, tol: f64, cap: usize) -> Layer<A::E> {
    let raw = gens
        .into_iter()
        .enumerate()
        .map(|(i, e)| {
            let gauge = a.gauge(&e);
            Node {
                elem: e,
                indices: vec![i],
                gauge,
            }
        })
        .collect();
    finish_layer(a, raw, tol, cap)
}

fn next_layer<A: Arith>(
    a: &A,
    gens: &[A::E],
    prev: &Layer<A::E>,
    tol: f64,
    cap: usize,
) -> Layer<A::E> {
    let raw: Vec<Node<A::E>> = (0..gens.len())
        .into_par_iter()
        .flat_map_iter(|j| {
            prev.nodes.iter().map(move |t| {
                let elem = a.commutator(&gens[j], &t.elem);
                let gauge = a.gauge(&elem);
                let mut indices = Vec::with_capacity(t.indices.len() + 1);
                indices.push(j);
                indices.extend_from_slice(&t.indices);
                Node {
                    elem,
                    indices,
                    gauge,
                }
            })
        })
        .collect();
    finish_layer(a, raw, tol, cap)
}

fn witness<E>(node: &Node<E>, s: &GeneratorSet) -> CommutatorWitness {
    CommutatorWitness {
        indices: node.indices.clone(),
        word: commutator_word(&node.indices, s),
        gauge: node.gauge.is_finite().then_some(node.gauge),
    }
}

fn run_lcs<A: Arith>(
    a: &A,
    gens: Vec<A::E>,
    s: &GeneratorSet,
    opts: &LcsOptions,
    exact: bool,
) -> (Verdict, Vec<LayerSummary>) {
    let mut summaries = Vec::new();
    let mut layer = first_layer(a, gens.clone(), opts.tol, opts.layer_cap);
    summaries.push(summarize(1, &layer));
    if layer.ambiguous {
        return (
            Verdict::Inconclusive {
                reason: "a generator is within 10 tol of the identity".into(),
            },
            summaries,
        );
    }
    if layer.nodes.is_empty() {
        return (Verdict::Nilpotent { class: 1 }, summaries);
    }
    let mut truncated = layer.truncated;
    for weight in 2..=opts.class_bound + 1 {
        let next = next_layer(a, &gens, &layer, opts.tol, opts.layer_cap);
        summaries.push(summarize(weight, &next));
        if next.nodes.iter().any(|n| !n.gauge.is_finite()) && !exact {
            return (
                Verdict::Inconclusive {
                    reason: format!("matrix entries overflow at commutator weight {weight}"),
                },
                summaries,
            );
        }
        if next.ambiguous && !exact {
            return (
                Verdict::Inconclusive {
                    reason: format!("weight-{weight} commutators within 10 tol of the identity"),
                },
                summaries,
            );
        }
        if next.nodes.is_empty() {
            if truncated {
                return (
                    Verdict::Inconclusive {
                        reason: "a layer was truncated before the series vanished".into(),
                    },
                    summaries,
                );
            }
            return (Verdict::Nilpotent { class: weight - 1 }, summaries);
        }
        truncated |= next.truncated;
        if weight == opts.class_bound + 1 {
            let pick = if exact {
                &next.nodes[0]
            } else {
                let growing = next.nodes.iter().map(|n| n.gauge).fold(0.0, f64::max)
                    >= layer.nodes.iter().map(|n| n.gauge).fold(0.0, f64::max);
                if !growing {
                    return (
                        Verdict::Inconclusive {
                            reason: format!(
                                "weight-{weight} commutators are nontrivial but shrinking"
                            ),
                        },
                        summaries,
                    );
                }
                next.nodes
                    .iter()
                    .max_by(|x, y| x.gauge.total_cmp(&y.gauge))
                    .expect("nonempty")
            };
            return (
                Verdict::NotNilpotent {
                    witness: witness(pick, s),
                },
                summaries,
            );
        }
        layer = next;
    }
    unreachable!("loop returns at the class bound")
}

fn exact_generators(s: &GeneratorSet) -> Option<Vec<Pair<IntMatrix>>> {
    s.elements()
        .iter()
        .map(|g| {
            IntMatrix::from_map(g).map(|m| Pair {
                inv: m.inverse(),
                m,
            })
        })
        .collect()
}

fn float_generators(s: &GeneratorSet) -> Vec<Pair<DMatrix<f64>>> {
    s.elements()
        .iter()
        .map(|g| Pair {
            m: g.matrix().clone(),
            inv: g.matrix().clone().try_inverse().expect("invertible"),
        })
        .collect()
}

/// Lower-central-series verdict with default options and the given class bound and tolerance.
pub fn nilpotency_witness(s: &GeneratorSet, class_bound: usize, tol: f64) -> NilpotencyVerdict {
    nilpotency_witness_with(
        s,
        &LcsOptions {
            class_bound,
            tol,
            ..Default::default()
        },
    )
}

/// Computes layers `L_1 = S`, `L_{k+1} = {[s, t] : s in S, t in L_k}` of the
/// symmetrized generating set. Integer generators of determinant `+-1` are
/// handled exactly; witness indices refer to the symmetrized set.
pub fn nilpotency_witness_with(s: &GeneratorSet, opts: &LcsOptions) -> NilpotencyVerdict {
    let s = s.symmetrized();
    let Some(k) = s.matrix_size() else {
        return NilpotencyVerdict {
            verdict: Verdict::Nilpotent { class: 1 },
            path: ArithmeticPath::ExactInteger,
            layers: vec![LayerSummary {
                weight: 1,
                size: 0,
                max_gauge: Some(0.0),
                truncated: false,
            }],
        };
    };
    if let Some(gens) = exact_generators(&s) {
        let (verdict, layers) = run_lcs(&Exact, gens, &s, opts, true);
        return NilpotencyVerdict {
            verdict,
            path: ArithmeticPath::ExactInteger,
            layers,
        };
    }
    let (verdict, layers) = run_lcs(&Floating { k }, float_generators(&s), &s, opts, false);
    NilpotencyVerdict {
        verdict,
        path: ArithmeticPath::Floating,
        layers,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Descent {
    /// Three consecutive layer ratios at most 1/2, or the series vanished.
    Contracting { ratio: f64, ratios: Vec<f64> },
    NonContracting {
        ratio: f64,
        weight: usize,
        witness: CommutatorWitness,
        ratios: Vec<f64>,
    },
}

const DESCENT_LAYERS: usize = 8;
const DESCENT_CAP: usize = 512;

/// Ratios of the largest commutator gauge in consecutive layers.
pub fn zassenhaus_descent(s: &GeneratorSet, tol: f64) -> Descent {
    let s = s.symmetrized();
    let Some(k) = s.matrix_size() else {
        return Descent::Contracting {
            ratio: 0.0,
            ratios: vec![],
        };
    };
    let a = Floating { k };
    let gens = float_generators(&s);
    let mut layer = first_layer(&a, gens.clone(), tol, DESCENT_CAP);
    let mut ratios = Vec::new();
    let mut run = 0;
    let mut worst: Option<(f64, usize, CommutatorWitness)> = None;
    let max_of =
        |l: &Layer<Pair<DMatrix<f64>>>| l.nodes.iter().map(|n| n.gauge).fold(0.0, f64::max);
    if layer.nodes.is_empty() {
        return Descent::Contracting { ratio: 0.0, ratios };
    }
    for weight in 2..=DESCENT_LAYERS {
        let next = next_layer(&a, &gens, &layer, tol, DESCENT_CAP);
        let prev_max = max_of(&layer);
        if next.nodes.is_empty() {
            ratios.push(0.0);
            let last = ratios.iter().rev().take(3).cloned().fold(0.0, f64::max);
            return Descent::Contracting {
                ratio: last,
                ratios,
            };
        }
        let cur_max = max_of(&next);
        let ratio = if cur_max.is_finite() {
            cur_max / prev_max
        } else {
            f64::INFINITY
        };
        ratios.push(if ratio.is_finite() { ratio } else { f64::MAX });
        if ratio <= 0.5 {
            run += 1;
            if run == 3 {
                let last = ratios.iter().rev().take(3).cloned().fold(0.0, f64::max);
                return Descent::Contracting {
                    ratio: last,
                    ratios,
                };
            }
        } else {
            run = 0;
            if worst.as_ref().is_none_or(|(r, _, _)| ratio > *r) {
                let top = next
                    .nodes
                    .iter()
                    .max_by(|x, y| x.gauge.total_cmp(&y.gauge))
                    .expect("nonempty");
                worst = Some((ratio, weight, witness(top, &s)));
            }
        }
        if !cur_max.is_finite() {
            break;
        }
        layer = next;
    }
    match worst {
        Some((ratio, weight, witness)) => Descent::NonContracting {
            ratio: ratio.min(f64::MAX),
            weight,
            witness,
            ratios,
        },
        None => {
            // Ratios stayed below 1/2 but the run never reached three layers.
            let top = layer
                .nodes
                .iter()
                .max_by(|x, y| x.gauge.total_cmp(&y.gauge))
                .expect("nonempty");
            let r = ratios.last().cloned().unwrap_or(0.0);
            Descent::NonContracting {
                ratio: r,
                weight: DESCENT_LAYERS,
                witness: witness(top, &s),
                ratios,
            }
        }
    }
}

/// Whether `word` evaluates (exactly, for integer sets) to a nontrivial element.
pub fn word_is_nontrivial(s: &GeneratorSet, word: &[usize]) -> Option<bool> {
    let s = s.symmetrized();
    let gens: Vec<IntMatrix> = s
        .elements()
        .iter()
        .map(IntMatrix::from_map)
        .collect::<Option<_>>()?;
    let k = gens.first()?.size();
    let m = word
        .iter()
        .fold(IntMatrix::identity(k), |acc, &i| acc.mul(&gens[i]));
    Some(!m.is_identity())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::gauge_matrices;

    fn map(rows: &[&[f64]]) -> ProjectiveMap {
        ProjectiveMap::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn heisenberg() -> GeneratorSet {
        GeneratorSet::new(vec![
            map(&[&[1.0, 1.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]),
            map(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 1.0], &[0.0, 0.0, 1.0]]),
        ])
    }

    fn sanov() -> GeneratorSet {
        GeneratorSet::new(vec![
            map(&[&[1.0, 2.0], &[0.0, 1.0]]),
            map(&[&[1.0, 0.0], &[2.0, 1.0]]),
        ])
    }

    #[test]
    fn commutator_examples() {
        let h = heisenberg();
        let c = commutator(&h.elements()[0], &h.elements()[1]).unwrap();
        let e13 = map(&[&[1.0, 0.0, 1.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert!(gauge_matrices(c.matrix(), e13.matrix()) < 1e-14);
        let d1 = map(&[&[2.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 0.5]]);
        let d2 = map(&[&[1.0, 0.0, 0.0], &[0.0, 3.0, 0.0], &[0.0, 0.0, 1.0 / 3.0]]);
        assert!(super::super::gauge_to_identity(&commutator(&d1, &d2).unwrap()) < 1e-14);
    }

    #[test]
    fn verdict_examples() {
        let v = nilpotency_witness(&heisenberg(), 6, 1e-9);
        assert_eq!(v.verdict, Verdict::Nilpotent { class: 2 });
        assert_eq!(v.path, ArithmeticPath::ExactInteger);
        let d = GeneratorSet::new(vec![
            map(&[&[2.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 0.5]]),
            map(&[&[1.0, 0.0, 0.0], &[0.0, 3.0, 0.0], &[0.0, 0.0, 1.0 / 3.0]]),
        ]);
        let v = nilpotency_witness(&d, 6, 1e-9);
        assert_eq!(v.verdict, Verdict::Nilpotent { class: 1 });
        assert_eq!(v.path, ArithmeticPath::Floating);
        let v = nilpotency_witness(&sanov(), 6, 1e-9);
        let Verdict::NotNilpotent { witness } = &v.verdict else {
            panic!("{v:?}")
        };
        assert_eq!(witness.indices.len(), 7);
        assert_eq!(word_is_nontrivial(&sanov(), &witness.word), Some(true));
        assert_eq!(
            nilpotency_witness(&GeneratorSet::new(vec![]), 6, 1e-9).class(),
            Some(1)
        );
    }

    #[test]
    fn descent_examples() {
        let small = GeneratorSet::new(vec![
            map(&[&[1.0, 0.03, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]),
            map(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.03], &[0.0, 0.0, 1.0]]),
        ]);
        assert!(matches!(
            zassenhaus_descent(&small, 1e-12),
            Descent::Contracting { .. }
        ));
        let id = GeneratorSet::new(vec![ProjectiveMap::identity(2)]);
        assert_eq!(
            zassenhaus_descent(&id, 1e-12),
            Descent::Contracting {
                ratio: 0.0,
                ratios: vec![]
            }
        );
        assert!(matches!(
            zassenhaus_descent(&sanov(), 1e-12),
            Descent::NonContracting { .. }
        ));
    }
}
