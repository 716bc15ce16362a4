//! Orbit growth of finite permutation actions under symmetric generating sets.

use std::collections::{HashSet, VecDeque};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HilbertError, Result};

/// Images `p[0], ..., p[n-1]` of the points `0..n`.
pub type Permutation = Vec<usize>;

fn check_permutation(p: &[usize], size: usize) -> Result<()> {
    if p.len() != size {
        return Err(HilbertError::DimensionMismatch {
            expected: size,
            got: p.len(),
        });
    }
    let mut seen = vec![false; size];
    for &x in p {
        if x >= size || std::mem::replace(&mut seen[x], true) {
            return Err(HilbertError::DegenerateConfiguration(format!(
                "{p:?} is not a permutation of 0..{size}"
            )));
        }
    }
    Ok(())
}

fn invert(p: &[usize]) -> Permutation {
    let mut q = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        q[x] = i;
    }
    q
}

/// A group acting on `0..size`, given by the permutations of its generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationAction {
    size: usize,
    generators: Vec<Permutation>,
}

impl PermutationAction {
    pub fn new(size: usize, generators: Vec<Permutation>) -> Result<Self> {
        for g in &generators {
            check_permutation(g, size)?;
        }
        Ok(Self { size, generators })
    }

    /// The action of the group generated by `s`.
    pub fn generated_by(size: usize, s: &[Permutation]) -> Result<Self> {
        Self::new(size, s.to_vec())
    }

    /// Cyclic group `Z/n` acting by translation.
    pub fn cyclic(n: usize) -> Self {
        Self {
            size: n,
            generators: vec![(0..n).map(|i| (i + 1) % n).collect()],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn is_transitive(&self) -> bool {
        self.size == 0
            || orbit_distances(&self.generators, self.size, 0)
                .iter()
                .all(Option::is_some)
    }
}

/// Breadth-first search from `e` in the Schreier graph of `s`. Fills `dist`
/// (`usize::MAX` when unreached), the generator and point each point was first
/// reached from, and the visiting order; returns the number of points reached.
fn bfs_into<G: Generators + ?Sized>(
    s: &G,
    e: usize,
    dist: &mut [usize],
    parent: &mut [(usize, usize)],
    order: &mut [usize],
) -> usize {
    dist.fill(usize::MAX);
    dist[e] = 0;
    order[0] = e;
    let (mut head, mut tail) = (0, 1);
    while head < tail {
        let x = order[head];
        head += 1;
        for i in 0..s.generator_count() {
            let y = s.image(i, x);
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                parent[y] = (x, i);
                order[tail] = y;
                tail += 1;
            }
        }
    }
    tail
}

/// Distances from `e` (`None` when unreached) and the `(point, generator)`
/// each point was first reached from.
fn bfs<G: Generators + ?Sized>(
    s: &G,
    size: usize,
    e: usize,
) -> (Vec<Option<usize>>, Vec<Option<(usize, usize)>>) {
    let mut dist = vec![0; size];
    let mut parent = vec![(0, 0); size];
    let mut order = vec![0; size];
    bfs_into(s, e, &mut dist, &mut parent, &mut order);
    let parent = (0..size)
        .map(|y| (y != e && dist[y] != usize::MAX).then_some(parent[y]))
        .collect();
    (
        dist.into_iter()
            .map(|d| (d != usize::MAX).then_some(d))
            .collect(),
        parent,
    )
}

fn orbit_distances(s: &[Permutation], size: usize, e: usize) -> Vec<Option<usize>> {
    bfs(s, size, e).0
}

/// Whether every permutation in `targets` lies in the group generated by `s`.
fn generates(s: &[Permutation], targets: &[Permutation], size: usize) -> bool {
    let id: Permutation = (0..size).collect();
    let mut missing: Vec<&Permutation> = targets
        .iter()
        .filter(|t| **t != id && !s.contains(t))
        .collect();
    if missing.is_empty() {
        return true;
    }
    let mut seen = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(p) = queue.pop_front() {
        for g in s {
            let q: Permutation = p.iter().map(|&x| g[x]).collect();
            if seen.insert(q.clone()) {
                missing.retain(|t| **t != q);
                if missing.is_empty() {
                    return true;
                }
                queue.push_back(q);
            }
        }
    }
    false
}

/// Word in `S` and the image of the base point under it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitWitness {
    /// Indices into `S`, applied left to right.
    pub word: Vec<usize>,
    pub image: usize,
}

/// Elements of `S_*^m` (`S_* = S` plus the identity) sending `e` to distinct
/// points: one shortest word for each point of `S_*^m . e`, in breadth-first
/// order. There are at least `min(m + 1, |E|)` of them.
pub fn orbit_spread(
    action: &PermutationAction,
    s: &[Permutation],
    m: usize,
    e: usize,
) -> Result<Vec<OrbitWitness>> {
    let size = action.size;
    if e >= size {
        return Err(HilbertError::DegenerateConfiguration(format!(
            "point {e} outside 0..{size}"
        )));
    }
    for g in s {
        check_permutation(g, size)?;
    }
    if s.iter().any(|g| !s.contains(&invert(g))) {
        return Err(HilbertError::NotSymmetric);
    }
    let reached = action_orbit_size(action, e);
    if reached < size {
        return Err(HilbertError::NotTransitive { reached, size });
    }
    if !generates(s, &action.generators, size) {
        return Err(HilbertError::NotGenerating(
            "some generator of the action is not a product of S".into(),
        ));
    }
    Ok(spread_unchecked(s, size, m, e))
}

fn action_orbit_size(action: &PermutationAction, e: usize) -> usize {
    orbit_distances(&action.generators, action.size, e)
        .iter()
        .filter(|d| d.is_some())
        .count()
}

fn spread_unchecked<G: Generators + ?Sized>(
    s: &G,
    size: usize,
    m: usize,
    e: usize,
) -> Vec<OrbitWitness> {
    let (dist, parent) = bfs(s, size, e);
    let mut points: Vec<usize> = (0..size)
        .filter(|&y| dist[y].is_some_and(|d| d <= m))
        .collect();
    points.sort_by_key(|&y| (dist[y], y));
    points
        .into_iter()
        .map(|y| {
            let mut word = Vec::new();
            let mut z = y;
            while let Some((x, i)) = parent[z] {
                word.push(i);
                z = x;
            }
            word.reverse();
            OrbitWitness { word, image: y }
        })
        .collect()
}

/// `N_k = |S_*^k . e|` for `k = 0, 1, ...` until it stops growing.
pub fn orbit_growth(s: &[Permutation], size: usize, e: usize) -> Vec<usize> {
    let dist = orbit_distances(s, size, e);
    let radius = dist.iter().flatten().max().copied().unwrap_or(0);
    (0..=radius)
        .map(|k| dist.iter().filter(|d| d.is_some_and(|d| d <= k)).count())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    Involution,
    Pair,
}

const UNSET: u8 = u8::MAX;
const MAX_POINTS: usize = 8;

/// Coset table of a free product of involutions and free generators acting
/// on `0..points`; pair columns also store the inverse permutation.
#[derive(Clone)]
pub struct ActionTable {
    points: usize,
    columns: &'static [Column],
    fwd: [[u8; MAX_POINTS]; 4],
    bwd: [[u8; MAX_POINTS]; 4],
}

impl ActionTable {
    pub fn size(&self) -> usize {
        self.points
    }

    /// The symmetric set `S`: each involution column, then each pair column
    /// followed by its inverse.
    pub fn generators(&self) -> Vec<Permutation> {
        (0..self.generator_count())
            .map(|i| (0..self.points).map(|x| self.image(i, x)).collect())
            .collect()
    }
}

/// Read access to a list of permutations of `0..n`.
trait Generators {
    fn generator_count(&self) -> usize;
    fn image(&self, i: usize, x: usize) -> usize;
}

impl Generators for [Permutation] {
    fn generator_count(&self) -> usize {
        self.len()
    }

    fn image(&self, i: usize, x: usize) -> usize {
        self[i][x]
    }
}

/// Every pattern has exactly four generators.
struct FlatTable([[u8; MAX_POINTS]; 4]);

impl Generators for FlatTable {
    fn generator_count(&self) -> usize {
        4
    }

    fn image(&self, i: usize, x: usize) -> usize {
        self.0[i][x] as usize
    }
}

impl ActionTable {
    fn flat(&self) -> FlatTable {
        let mut out = [[0; MAX_POINTS]; 4];
        let mut i = 0;
        for (c, kind) in self.columns.iter().enumerate() {
            out[i] = self.fwd[c];
            i += 1;
            if *kind == Column::Pair {
                out[i] = self.bwd[c];
                i += 1;
            }
        }
        FlatTable(out)
    }
}

impl Generators for ActionTable {
    fn generator_count(&self) -> usize {
        self.columns
            .iter()
            .map(|c| if *c == Column::Pair { 2 } else { 1 })
            .sum()
    }

    fn image(&self, i: usize, x: usize) -> usize {
        let mut i = i;
        for (c, kind) in self.columns.iter().enumerate() {
            match kind {
                Column::Involution if i == 0 => return self.fwd[c][x] as usize,
                Column::Pair if i == 0 => return self.fwd[c][x] as usize,
                Column::Pair if i == 1 => return self.bwd[c][x] as usize,
                Column::Involution => i -= 1,
                Column::Pair => i -= 2,
            }
        }
        unreachable!("generator index in range")
    }
}

struct Enumerator {
    columns: &'static [Column],
    /// Entries of one point in scan order: column and backward flag.
    slots: Vec<(usize, bool)>,
    max_points: usize,
}

impl Enumerator {
    fn new(columns: &'static [Column], max_points: usize) -> Self {
        let slots = columns
            .iter()
            .enumerate()
            .flat_map(|(c, kind)| {
                let back = (*kind == Column::Pair).then_some((c, true));
                std::iter::once((c, false)).chain(back)
            })
            .collect();
        Self {
            columns,
            slots,
            max_points,
        }
    }

    fn root(&self) -> ActionTable {
        ActionTable {
            points: 1,
            columns: self.columns,
            fwd: [[UNSET; MAX_POINTS]; 4],
            bwd: [[UNSET; MAX_POINTS]; 4],
        }
    }

    /// First undefined entry at or after `cursor` in scan order.
    fn next_slot(&self, t: &ActionTable, mut cursor: usize) -> Option<usize> {
        let per = self.slots.len();
        while cursor / per < t.points {
            let x = cursor / per;
            let (c, back) = self.slots[cursor % per];
            let v = if back { t.bwd[c][x] } else { t.fwd[c][x] };
            if v == UNSET {
                return Some(cursor);
            }
            cursor += 1;
        }
        None
    }

    /// Targets for the entry at `cursor`: defined points whose matching entry is
    /// free, then a new point.
    fn targets(&self, t: &ActionTable, cursor: usize) -> impl Iterator<Item = usize> + '_ {
        let (c, back) = self.slots[cursor % self.slots.len()];
        let kind = self.columns[c];
        let limit = if t.points < self.max_points {
            t.points + 1
        } else {
            t.points
        };
        let points = t.points;
        let (fwd, bwd) = (t.fwd[c], t.bwd[c]);
        (0..limit).filter(move |&y| {
            y == points
                || match (kind, back) {
                    (Column::Involution, _) | (Column::Pair, true) => fwd[y] == UNSET,
                    (Column::Pair, false) => bwd[y] == UNSET,
                }
        })
    }

    fn set(&self, t: &mut ActionTable, cursor: usize, y: usize, value: u8) {
        let x = cursor / self.slots.len();
        let (c, back) = self.slots[cursor % self.slots.len()];
        let (xv, yv) = if value == UNSET {
            (UNSET, UNSET)
        } else {
            (value, x as u8)
        };
        match (self.columns[c], back) {
            (Column::Involution, _) => {
                t.fwd[c][x] = xv;
                t.fwd[c][y] = yv;
            }
            (Column::Pair, false) => {
                t.fwd[c][x] = xv;
                t.bwd[c][y] = yv;
            }
            (Column::Pair, true) => {
                t.bwd[c][x] = xv;
                t.fwd[c][y] = yv;
            }
        }
    }

    fn dfs<F: Fn(&ActionTable) + Sync>(&self, t: &mut ActionTable, cursor: usize, f: &F) {
        let Some(cursor) = self.next_slot(t, cursor) else {
            return f(t);
        };
        let targets: Targets = self.targets(t, cursor).collect();
        for &y in &targets.items[..targets.len] {
            let fresh = y == t.points;
            if fresh {
                t.points += 1;
            }
            self.set(t, cursor, y, y as u8);
            self.dfs(t, cursor + 1, f);
            self.set(t, cursor, y, UNSET);
            if fresh {
                t.points -= 1;
            }
        }
    }

    /// Partial tables after `depth` choices, then depth-first search on each in parallel.
    fn run<F: Fn(&ActionTable) + Sync>(&self, depth: usize, f: &F) {
        let mut frontier = vec![(self.root(), 0)];
        for _ in 0..depth {
            let mut next = Vec::new();
            for (t, cursor) in frontier {
                match self.next_slot(&t, cursor) {
                    None => f(&t),
                    Some(cursor) => {
                        for y in self.targets(&t, cursor).collect::<Vec<_>>() {
                            let mut u = t.clone();
                            if y == u.points {
                                u.points += 1;
                            }
                            self.set(&mut u, cursor, y, y as u8);
                            next.push((u, cursor + 1));
                        }
                    }
                }
            }
            frontier = next;
        }
        frontier
            .into_par_iter()
            .for_each(|(mut t, cursor)| self.dfs(&mut t, cursor, f));
    }
}

/// Fixed-capacity list of candidate targets for one table entry.
struct Targets {
    len: usize,
    items: [usize; MAX_POINTS + 1],
}

impl FromIterator<usize> for Targets {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut out = Targets {
            len: 0,
            items: [0; MAX_POINTS + 1],
        };
        for y in iter {
            out.items[out.len] = y;
            out.len += 1;
        }
        out
    }
}

/// Generator patterns covering every symmetric set of at most four
/// permutations: each element is an involution (possibly the identity) or one
/// half of an inverse pair.
const PATTERNS: [&[Column]; 3] = [
    &[Column::Involution; 4],
    &[Column::Involution, Column::Involution, Column::Pair],
    &[Column::Pair, Column::Pair],
];

/// Calls `f` once for every transitive action on at most `max_points` points
/// by a symmetric set `S` of at most four permutations, up to relabellings
/// fixing the point 0. Sets with fewer than four distinct elements appear
/// padded with repeats or the identity.
pub fn for_each_transitive_action<F: Fn(&ActionTable) + Sync>(max_points: usize, f: F) {
    assert!(
        (1..=MAX_POINTS).contains(&max_points),
        "at most {MAX_POINTS} points"
    );
    for columns in PATTERNS {
        Enumerator::new(columns, max_points).run(4, &f);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitCounterexample {
    pub generators: Vec<Permutation>,
    pub m: usize,
    pub images: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitSpreadReport {
    pub max_points: usize,
    pub actions: usize,
    /// Number of `(action, m)` pairs checked.
    pub checks: usize,
    /// Actions that were also run through the validating [`orbit_spread`].
    pub validated: usize,
    pub counterexamples: Vec<OrbitCounterexample>,
}

/// Checks `min(m + 1, |E|)` distinct images from the point 0 for every
/// `m < |E|` over every action from [`for_each_transitive_action`]. Every
/// `validate_every`-th action also goes through [`orbit_spread`] with its input
/// checks; the others are valid by construction and use its search directly.
pub fn verify_orbit_spread(max_points: usize, validate_every: usize) -> OrbitSpreadReport {
    let actions = AtomicUsize::new(0);
    let checks = AtomicUsize::new(0);
    let validated = AtomicUsize::new(0);
    let bad = std::sync::Mutex::new(Vec::new());
    for_each_transitive_action(max_points, |t| {
        let size = t.size();
        let k = actions.fetch_add(1, Ordering::Relaxed);
        let mut counts = [0usize; MAX_POINTS];
        if validate_every > 0 && k.is_multiple_of(validate_every) {
            validated.fetch_add(1, Ordering::Relaxed);
            let s = t.generators();
            let action = PermutationAction {
                size,
                generators: s.clone(),
            };
            for w in orbit_spread(&action, &s, size - 1, 0).unwrap_or_default() {
                counts[w.word.len()] += 1;
            }
        } else {
            // The search behind `orbit_spread`, on stack buffers.
            let mut dist = [0; MAX_POINTS];
            let mut parent = [(0, 0); MAX_POINTS];
            let mut order = [0; MAX_POINTS];
            let reached = bfs_into(
                &t.flat(),
                0,
                &mut dist[..size],
                &mut parent[..size],
                &mut order[..size],
            );
            for &y in &order[..reached] {
                counts[dist[y]] += 1;
            }
        }
        let mut images = 0;
        for m in 0..size {
            images += counts[m];
            if images < m + 1 {
                bad.lock().expect("no poisoning").push(OrbitCounterexample {
                    generators: t.generators(),
                    m,
                    images,
                });
            }
        }
        checks.fetch_add(size, Ordering::Relaxed);
    });
    OrbitSpreadReport {
        max_points,
        actions: actions.into_inner(),
        checks: checks.into_inner(),
        validated: validated.into_inner(),
        counterexamples: bad.into_inner().expect("no poisoning"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_five() {
        let a = PermutationAction::cyclic(5);
        let s = vec![vec![1, 2, 3, 4, 0], vec![4, 0, 1, 2, 3]];
        let w = orbit_spread(&a, &s, 2, 0).unwrap();
        let images: HashSet<usize> = w.iter().map(|x| x.image).collect();
        assert_eq!(w.len(), 5);
        assert!(images.len() >= 3 && images.is_subset(&HashSet::from([0, 1, 2, 3, 4])));
        assert!(w.iter().all(|x| x.word.len() <= 2));
        for x in &w {
            assert_eq!(x.word.iter().fold(0, |p, &i| s[i][p]), x.image);
        }
    }

    #[test]
    fn trivial_and_symmetric_group() {
        let a = PermutationAction::new(1, vec![]).unwrap();
        assert_eq!(
            orbit_spread(&a, &[], 3, 0).unwrap(),
            vec![OrbitWitness {
                word: vec![],
                image: 0
            }]
        );
        let s = vec![vec![1, 0, 2], vec![0, 2, 1]];
        let a = PermutationAction::generated_by(3, &s).unwrap();
        assert_eq!(orbit_spread(&a, &s, 2, 0).unwrap().len(), 3);
        assert_eq!(orbit_growth(&s, 3, 0), vec![1, 2, 3]);
    }

    #[test]
    fn errors() {
        let a = PermutationAction::cyclic(4);
        assert!(matches!(
            orbit_spread(&a, &[vec![1, 2, 3, 0]], 1, 0),
            Err(HilbertError::NotSymmetric)
        ));
        assert!(matches!(
            orbit_spread(&a, &[], 1, 0),
            Err(HilbertError::NotGenerating(_))
        ));
        let s = vec![vec![2, 3, 0, 1]];
        assert!(matches!(
            orbit_spread(&a, &s, 1, 0),
            Err(HilbertError::NotGenerating(_))
        ));
        let b = PermutationAction::generated_by(4, &s).unwrap();
        assert!(matches!(
            orbit_spread(&b, &s, 1, 0),
            Err(HilbertError::NotTransitive {
                reached: 2,
                size: 4
            })
        ));
        // A generating set need not contain the action's generators.
        let s = vec![vec![3, 0, 1, 2], vec![1, 2, 3, 0]];
        assert_eq!(
            orbit_spread(&PermutationAction::cyclic(4), &s, 3, 0)
                .unwrap()
                .len(),
            4
        );
        let s = vec![vec![2, 3, 0, 1], vec![1, 0, 3, 2]];
        assert!(matches!(
            orbit_spread(&PermutationAction::cyclic(4), &s, 3, 0),
            Err(HilbertError::NotGenerating(_))
        ));
    }

    #[test]
    fn small_enumeration_counts() {
        // Transitive actions of the free group of rank 2 with a base point
        // correspond to its subgroups of finite index: 1, 3, 13 of index 1, 2, 3.
        let count = AtomicUsize::new(0);
        Enumerator::new(PATTERNS[2], 3).run(2, &|_| {
            count.fetch_add(1, Ordering::Relaxed);
        });
        assert_eq!(count.into_inner(), 1 + 3 + 13);
        let r = verify_orbit_spread(5, 7);
        assert!(r.validated > 0);
        assert!(r.counterexamples.is_empty());
    }
}
