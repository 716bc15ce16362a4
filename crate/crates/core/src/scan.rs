//! Scenario files and the experiments they drive: epsilon scans of a single
//! group, sweeps over family parameters, and the stabilizer proximity table.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benzecri::standardize;
use crate::body::{boost, make_family, rotation, BodySpec, FamilyParams, FamilyTag, MarkedBody};
use crate::error::{HilbertError, Result};
use crate::group::{
    displacement_table, epsilon_subgroup_from_table, gauge_to_identity, nilpotency_witness_with,
    proximity_gauge, within, zassenhaus_descent, Descent, GeneratorSet, LcsOptions,
    NilpotencyVerdict, Verdict, DEDUP_TOL, DEFAULT_BALL_CAP,
};
use crate::hilbert::displacement_unchecked;
use crate::projective::{det_normalize, ProjectiveMap, ProjectivePoint};

pub const SCHEMA: &str = "hilbertlab/v1";

/// Displacement below which a ball element counts as fixing the basepoint.
const FIXED_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub tag: FamilyTag,
    pub n: usize,
    #[serde(default)]
    pub params: FamilyParams,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Epsilon scan of one marked body and generator set.
    #[default]
    Single,
    /// Epsilon scan repeated for each entry of `sweep`.
    Sweep,
    /// Displacement against distance to the basepoint stabilizer on built-in families.
    StabilizerProximity,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub json: Option<String>,
    pub csv: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub body: Option<BodySpec>,
    #[serde(default)]
    pub family: Option<FamilySpec>,
    /// Homogeneous coordinates, or affine coordinates in the standard chart.
    #[serde(default)]
    pub basepoint: Option<Vec<f64>>,
    /// Extra generators, as matrix rows.
    #[serde(default)]
    pub generators: Vec<ProjectiveMap>,
    /// Family parameters for each configuration of a sweep.
    #[serde(default)]
    pub sweep: Vec<FamilyParams>,
    pub epsilons: Vec<f64>,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_class_bound")]
    pub class_bound: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Sampled group elements per family in the stabilizer proximity mode.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub outputs: Outputs,
}

fn default_depth() -> usize {
    3
}

fn default_class_bound() -> usize {
    6
}

fn default_tol() -> f64 {
    1e-9
}

fn default_samples() -> usize {
    2000
}

fn schema_err(msg: impl Into<String>) -> HilbertError {
    HilbertError::Schema(msg.into())
}

impl Scenario {
    pub fn from_json(s: &str) -> Result<Self> {
        let sc: Scenario = serde_json::from_str(s)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(schema_err(format!(
                "schema must be \"{SCHEMA}\", found \"{}\"",
                self.schema
            )));
        }
        if self.epsilons.is_empty() {
            return Err(schema_err("epsilon grid is empty"));
        }
        if self.epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0))
            || self.epsilons.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(schema_err(
                "epsilon grid must be positive and strictly increasing",
            ));
        }
        if self.depth == 0 {
            return Err(schema_err("depth must be at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(schema_err("tol must be positive"));
        }
        match self.mode {
            Mode::Single => {
                if self.body.is_some() == self.family.is_some() {
                    return Err(schema_err("give exactly one of `body` and `family`"));
                }
                if self.body.is_some() && self.basepoint.is_none() {
                    return Err(schema_err("`body` needs a `basepoint`"));
                }
            }
            Mode::Sweep => {
                if self.family.is_none() || self.body.is_some() {
                    return Err(schema_err("a sweep needs a `family` and no `body`"));
                }
                if self.sweep.is_empty() {
                    return Err(schema_err("a sweep needs at least one configuration"));
                }
            }
            Mode::StabilizerProximity => {
                if self.body.is_some() || self.family.is_some() || !self.generators.is_empty() {
                    return Err(schema_err(
                        "the stabilizer proximity mode uses built-in families only",
                    ));
                }
                if self.samples == 0 {
                    return Err(schema_err("samples must be positive"));
                }
            }
        }
        Ok(())
    }

    fn options(&self) -> LcsOptions {
        LcsOptions {
            class_bound: self.class_bound,
            tol: self.tol,
            ..Default::default()
        }
    }

    /// The marked body and generators of a single scan.
    pub fn marked_group(&self) -> Result<(MarkedBody, GeneratorSet)> {
        match (&self.body, &self.family) {
            (Some(spec), None) => {
                let body = spec.build()?;
                let coords = self
                    .basepoint
                    .as_ref()
                    .ok_or_else(|| schema_err("`body` needs a `basepoint`"))?;
                let x = parse_point(coords, body.dim())?;
                Ok((
                    MarkedBody::new(body, x)?,
                    GeneratorSet::new(self.generators.clone()),
                ))
            }
            (None, Some(f)) => {
                family_group(f, &f.params, self.basepoint.as_deref(), &self.generators)
            }
            _ => Err(schema_err("give exactly one of `body` and `family`")),
        }
    }
}

fn parse_point(coords: &[f64], n: usize) -> Result<ProjectivePoint> {
    if coords.len() == n {
        Ok(ProjectivePoint::from_affine(coords))
    } else if coords.len() == n + 1 {
        ProjectivePoint::from_slice(coords)
    } else {
        Err(HilbertError::DimensionMismatch {
            expected: n + 1,
            got: coords.len(),
        })
    }
}

fn family_group(
    f: &FamilySpec,
    params: &FamilyParams,
    basepoint: Option<&[f64]>,
    extra: &[ProjectiveMap],
) -> Result<(MarkedBody, GeneratorSet)> {
    let fam = make_family(f.tag, f.n, params)?;
    let x = match basepoint {
        Some(c) => parse_point(c, f.n)?,
        None => fam.basepoint.clone(),
    };
    let mut gens = fam.generators;
    gens.retain(|g| gauge_to_identity(g) > DEDUP_TOL);
    gens.extend(extra.iter().cloned());
    Ok((MarkedBody::new(fam.body, x)?, GeneratorSet::new(gens)))
}

/// One element of the word ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub word: Vec<usize>,
    pub displacement: f64,
    /// Proximity gauge to the identity.
    pub gauge: f64,
    /// Smallest gauge to a ball element fixing the basepoint.
    pub stabilizer_gauge: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub epsilon: f64,
    pub subgroup_size: usize,
    /// Smallest displacement of a nontrivial element of the epsilon set.
    pub min_displacement: Option<f64>,
    pub nilpotency: NilpotencyVerdict,
    pub descent: Descent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub schema: String,
    pub seed: u64,
    pub dim: usize,
    pub depth: usize,
    pub generators: usize,
    pub ball_size: usize,
    pub rows: Vec<ScanRow>,
    /// Subgroup sizes never shrink and no verdict returns to nilpotent after a
    /// non-nilpotent one as epsilon grows.
    pub monotone: bool,
    pub pairs: Vec<PairRow>,
}

fn verdict_columns(v: &NilpotencyVerdict) -> (&'static str, String, String) {
    match &v.verdict {
        Verdict::Nilpotent { class } => ("nilpotent", class.to_string(), String::new()),
        Verdict::NotNilpotent { witness } => (
            "not_nilpotent",
            String::new(),
            witness.word.len().to_string(),
        ),
        Verdict::Inconclusive { .. } => ("inconclusive", String::new(), String::new()),
    }
}

fn is_monotone(rows: &[ScanRow]) -> bool {
    let sizes = rows
        .windows(2)
        .all(|w| w[0].subgroup_size <= w[1].subgroup_size);
    let mut seen_not = false;
    let mut flips = false;
    for r in rows {
        match r.nilpotency.verdict {
            Verdict::NotNilpotent { .. } => seen_not = true,
            Verdict::Nilpotent { .. } if seen_not => flips = true,
            _ => {}
        }
    }
    sizes && !flips
}

/// Epsilon scan: for each epsilon, the set of depth-`depth` ball elements
/// displacing the basepoint by at most epsilon, and its nilpotency tests.
pub fn scan(
    mb: &MarkedBody,
    s: &GeneratorSet,
    epsilons: &[f64],
    depth: usize,
    opts: &LcsOptions,
) -> Result<ScanReport> {
    let table = displacement_table(mb, s, depth, DEFAULT_BALL_CAP)?;
    let fixed: Vec<&ProjectiveMap> = table
        .iter()
        .filter(|e| e.displacement <= FIXED_TOL)
        .map(|e| &e.map)
        .collect();
    let pairs = table
        .par_iter()
        .map(|e| {
            let stab = fixed
                .iter()
                .map(|k| proximity_gauge(k, &e.map))
                .collect::<Result<Vec<f64>>>()?;
            Ok(PairRow {
                word: e.word.clone(),
                displacement: e.displacement,
                gauge: gauge_to_identity(&e.map),
                stabilizer_gauge: stab.into_iter().fold(f64::INFINITY, f64::min),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<ScanRow> = epsilons
        .par_iter()
        .map(|&eps| {
            let sub = epsilon_subgroup_from_table(&table, eps);
            let min_displacement = pairs
                .iter()
                .filter(|p| within(p.displacement, eps) && p.gauge > DEDUP_TOL)
                .map(|p| p.displacement)
                .reduce(f64::min);
            ScanRow {
                epsilon: eps,
                subgroup_size: sub.len(),
                min_displacement,
                nilpotency: nilpotency_witness_with(&sub, opts),
                descent: zassenhaus_descent(&sub, opts.tol),
            }
        })
        .collect();
    Ok(ScanReport {
        schema: SCHEMA.into(),
        seed: 0,
        dim: mb.body().dim(),
        depth,
        generators: s.len(),
        ball_size: table.len(),
        monotone: is_monotone(&rows),
        rows,
        pairs,
    })
}

/// Runs a single-mode scenario.
pub fn run_scenario(sc: &Scenario) -> Result<ScanReport> {
    sc.validate()?;
    if sc.mode != Mode::Single {
        return Err(schema_err("run_scenario takes a single-mode scenario"));
    }
    let (mb, s) = sc.marked_group()?;
    let mut report = scan(&mb, &s, &sc.epsilons, sc.depth, &sc.options())?;
    report.seed = sc.seed;
    Ok(report)
}

impl ScanReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Columns `epsilon, subgroup_size, min_displacement, verdict, class, witness_length`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "epsilon",
            "subgroup_size",
            "min_displacement",
            "verdict",
            "class",
            "witness_length",
        ])
        .expect("in-memory write");
        for r in &self.rows {
            let (verdict, class, wl) = verdict_columns(&r.nilpotency);
            w.write_record([
                r.epsilon.to_string(),
                r.subgroup_size.to_string(),
                r.min_displacement
                    .map(|d| d.to_string())
                    .unwrap_or_default(),
                verdict.to_string(),
                class,
                wl,
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Verdict summary of one epsilon for one configuration of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub subgroup_size: usize,
    pub min_displacement: Option<f64>,
    pub verdict: String,
    pub class: Option<usize>,
    pub witness_length: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationSummary {
    pub index: usize,
    pub params: FamilyParams,
    /// Largest grid epsilon up to which every verdict is nilpotent; 0 if none.
    pub epsilon_star: f64,
    pub monotone: bool,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MargulisReport {
    pub schema: String,
    pub seed: u64,
    pub family: FamilyTag,
    pub n: usize,
    pub depth: usize,
    pub epsilons: Vec<f64>,
    pub configurations: Vec<ConfigurationSummary>,
    /// Smallest `epsilon_star` over the configurations.
    pub epsilon_star: f64,
    pub all_positive: bool,
    pub all_monotone: bool,
}

fn epsilon_star(rows: &[ScanRow]) -> f64 {
    rows.iter()
        .take_while(|r| r.nilpotency.is_nilpotent())
        .last()
        .map_or(0.0, |r| r.epsilon)
}

/// Epsilon scan of each parameter configuration of a family.
pub fn margulis_scan(
    tag: FamilyTag,
    n: usize,
    configurations: &[FamilyParams],
    epsilons: &[f64],
    depth: usize,
    opts: &LcsOptions,
) -> Result<MargulisReport> {
    let spec = FamilySpec {
        tag,
        n,
        params: FamilyParams::default(),
    };
    let configurations = configurations
        .iter()
        .enumerate()
        .map(|(index, params)| {
            let (mb, s) = family_group(&spec, params, None, &[])?;
            let report = scan(&mb, &s, epsilons, depth, opts)?;
            let rows = report
                .rows
                .iter()
                .map(|r| {
                    let (verdict, _, _) = verdict_columns(&r.nilpotency);
                    SweepRow {
                        epsilon: r.epsilon,
                        subgroup_size: r.subgroup_size,
                        min_displacement: r.min_displacement,
                        verdict: verdict.into(),
                        class: r.nilpotency.class(),
                        witness_length: match &r.nilpotency.verdict {
                            Verdict::NotNilpotent { witness } => Some(witness.word.len()),
                            _ => None,
                        },
                    }
                })
                .collect();
            Ok(ConfigurationSummary {
                index,
                params: params.clone(),
                epsilon_star: epsilon_star(&report.rows),
                monotone: report.monotone,
                rows,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let star = configurations
        .iter()
        .map(|c| c.epsilon_star)
        .fold(f64::INFINITY, f64::min);
    Ok(MargulisReport {
        schema: SCHEMA.into(),
        seed: 0,
        family: tag,
        n,
        depth,
        epsilons: epsilons.to_vec(),
        all_positive: configurations.iter().all(|c| c.epsilon_star > 0.0),
        all_monotone: configurations.iter().all(|c| c.monotone),
        epsilon_star: if star.is_finite() { star } else { 0.0 },
        configurations,
    })
}

impl MargulisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// One row per configuration and epsilon; the scan columns preceded by `configuration`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "configuration",
            "epsilon",
            "subgroup_size",
            "min_displacement",
            "verdict",
            "class",
            "witness_length",
        ])
        .expect("in-memory write");
        for c in &self.configurations {
            for r in &c.rows {
                w.write_record([
                    c.index.to_string(),
                    r.epsilon.to_string(),
                    r.subgroup_size.to_string(),
                    r.min_displacement
                        .map(|d| d.to_string())
                        .unwrap_or_default(),
                    r.verdict.clone(),
                    r.class.map(|c| c.to_string()).unwrap_or_default(),
                    r.witness_length.map(|c| c.to_string()).unwrap_or_default(),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProximitySample {
    pub displacement: f64,
    /// Smallest gauge to a stabilizer element of the basepoint.
    pub gauge: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub epsilon: f64,
    pub samples: usize,
    /// Largest stabilizer gauge among samples displacing by at most epsilon.
    pub max_gauge: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyProximity {
    pub family: String,
    pub samples: Vec<ProximitySample>,
    pub envelope: Vec<EnvelopePoint>,
    /// The envelope does not increase as epsilon decreases.
    pub decreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProximityReport {
    pub schema: String,
    pub seed: u64,
    pub epsilons: Vec<f64>,
    pub families: Vec<FamilyProximity>,
}

/// A standard pair with a sampler of automorphisms and the known stabilizer of its basepoint.
struct ProximityFamily {
    name: &'static str,
    mb: MarkedBody,
    sample: Box<dyn Fn(&mut ChaCha8Rng) -> ProjectiveMap + Sync>,
    nearest: Box<dyn Fn(&ProjectiveMap) -> f64 + Sync>,
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn map(m: DMatrix<f64>) -> ProjectiveMap {
    det_normalize(&m).expect("invertible")
}

/// Smallest gauge from `g` to the orthogonal group of the plane acting on the disk.
fn nearest_disk_isometry(g: &ProjectiveMap) -> f64 {
    let flip = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0, 1.0]));
    let at = |theta: f64, reflect: bool| {
        let r = rotation(2, 0, 1, theta);
        let k = if reflect { r * &flip } else { r };
        proximity_gauge(&map(k), g).expect("same size")
    };
    let mut best = f64::INFINITY;
    for reflect in [false, true] {
        let steps = 720;
        let h = 2.0 * PI / steps as f64;
        let (i0, _) = (0..steps)
            .map(|i| (i, at(i as f64 * h, reflect)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty grid");
        // Golden-section refinement around the best grid angle.
        let (mut a, mut b) = ((i0 as f64 - 1.0) * h, (i0 as f64 + 1.0) * h);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..60 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if at(c, reflect) < at(d, reflect) {
                b = d;
            } else {
                a = c;
            }
        }
        best = best
            .min(at((a + b) / 2.0, reflect))
            .min(at(i0 as f64 * h, reflect));
    }
    best
}

fn proximity_families() -> Result<Vec<ProximityFamily>> {
    let disk = make_family(FamilyTag::Ellipsoid, 2, &FamilyParams::default())?;
    let disk = ProximityFamily {
        name: "ellipsoid",
        mb: MarkedBody::new(disk.body, disk.basepoint)?,
        sample: Box::new(|rng| {
            let t = log_uniform(rng, 1e-3, 2.0);
            let a = rng.gen_range(0.0..2.0 * PI);
            let b = rng.gen_range(0.0..2.0 * PI);
            map(rotation(2, 0, 1, a) * boost(2, 0, t) * rotation(2, 0, 1, b))
        }),
        nearest: Box::new(nearest_disk_isometry),
    };

    // The triangle carried to its standard position; the stabilizer of the
    // centroid is the conjugated group of coordinate permutations.
    let tri = make_family(FamilyTag::Simplex, 2, &FamilyParams::default())?;
    let tri = MarkedBody::new(tri.body, tri.basepoint)?;
    let g = standardize(&tri)?.map;
    let gi = g.inverse();
    let perms: Vec<ProjectiveMap> = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ]
    .iter()
    .map(|p| {
        let m = DMatrix::from_fn(3, 3, |i, j| if p[i] == j { 1.0 } else { 0.0 });
        g.compose(&map(m)).compose(&gi)
    })
    .collect();
    let tri_mb = tri.transformed(&g)?;
    let sample_perms = perms.clone();
    let (g2, gi2) = (g.clone(), gi.clone());
    let simplex = ProximityFamily {
        name: "simplex",
        mb: tri_mb,
        sample: Box::new(move |rng| {
            let s = log_uniform(rng, 1e-3, 2.0);
            let u: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mean = u.iter().sum::<f64>() / 3.0;
            let norm = u
                .iter()
                .map(|x| (x - mean).powi(2))
                .sum::<f64>()
                .sqrt()
                .max(1e-12);
            let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                3,
                u.iter().map(|x| (s * (x - mean) / norm).exp()),
            ));
            let k = &sample_perms[rng.gen_range(0..6)];
            k.compose(&g2.compose(&map(d)).compose(&gi2))
        }),
        nearest: Box::new(move |h| {
            perms
                .iter()
                .map(|k| proximity_gauge(k, h).expect("same size"))
                .fold(f64::INFINITY, f64::min)
        }),
    };

    // The square: every automorphism fixes the center.
    let sq_params = FamilyParams {
        turns: vec![1],
        reflections: vec![0],
        ..Default::default()
    };
    let sq = make_family(FamilyTag::Polygon, 2, &sq_params)?;
    let group: Vec<ProjectiveMap> =
        crate::group::word_ball(&GeneratorSet::new(sq.generators.clone()).symmetrized(), 8)?
            .into_iter()
            .map(|e| e.map)
            .collect();
    let sample_group = group.clone();
    let polygon = ProximityFamily {
        name: "polygon",
        mb: MarkedBody::new(sq.body, sq.basepoint)?,
        sample: Box::new(move |rng| sample_group[rng.gen_range(0..sample_group.len())].clone()),
        nearest: Box::new(move |h| {
            group
                .iter()
                .map(|k| proximity_gauge(k, h).expect("same size"))
                .fold(f64::INFINITY, f64::min)
        }),
    };
    Ok(vec![disk, simplex, polygon])
}

/// Samples automorphisms of built-in standard pairs and tabulates their
/// displacement at the basepoint against their gauge to the basepoint
/// stabilizer, with the envelope over each displacement bound.
pub fn stabilizer_proximity(
    seed: u64,
    samples: usize,
    epsilons: &[f64],
) -> Result<ProximityReport> {
    let families = proximity_families()?
        .into_iter()
        .enumerate()
        .map(|(i, fam)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let maps: Vec<ProjectiveMap> = (0..samples).map(|_| (fam.sample)(&mut rng)).collect();
            let rows = maps
                .par_iter()
                .map(|g| {
                    Ok(ProximitySample {
                        displacement: displacement_unchecked(fam.mb.body(), g, fam.mb.basepoint())?,
                        gauge: (fam.nearest)(g),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let envelope: Vec<EnvelopePoint> = epsilons
                .iter()
                .map(|&eps| {
                    let inside: Vec<f64> = rows
                        .iter()
                        .filter(|r| within(r.displacement, eps))
                        .map(|r| r.gauge)
                        .collect();
                    EnvelopePoint {
                        epsilon: eps,
                        samples: inside.len(),
                        max_gauge: inside.into_iter().reduce(f64::max),
                    }
                })
                .collect();
            let values: Vec<f64> = envelope.iter().filter_map(|e| e.max_gauge).collect();
            let decreasing = values.windows(2).all(|w| w[0] <= w[1]);
            Ok(FamilyProximity {
                family: fam.name.into(),
                samples: rows,
                envelope,
                decreasing,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProximityReport {
        schema: SCHEMA.into(),
        seed,
        epsilons: epsilons.to_vec(),
        families,
    })
}

impl ProximityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Columns `family, epsilon, samples, max_gauge`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["family", "epsilon", "samples", "max_gauge"])
            .expect("in-memory write");
        for f in &self.families {
            for e in &f.envelope {
                w.write_record([
                    f.family.clone(),
                    e.epsilon.to_string(),
                    e.samples.to_string(),
                    e.max_gauge.map(|g| g.to_string()).unwrap_or_default(),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Output of any scenario mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Report {
    Single(ScanReport),
    Sweep(MargulisReport),
    StabilizerProximity(ProximityReport),
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_csv(&self) -> String {
        match self {
            Report::Single(r) => r.to_csv(),
            Report::Sweep(r) => r.to_csv(),
            Report::StabilizerProximity(r) => r.to_csv(),
        }
    }
}

/// Runs a scenario of any mode.
pub fn run(sc: &Scenario) -> Result<Report> {
    sc.validate()?;
    match sc.mode {
        Mode::Single => run_scenario(sc).map(Report::Single),
        Mode::Sweep => {
            let f = sc.family.as_ref().expect("validated");
            let mut r =
                margulis_scan(f.tag, f.n, &sc.sweep, &sc.epsilons, sc.depth, &sc.options())?;
            r.seed = sc.seed;
            Ok(Report::Sweep(r))
        }
        Mode::StabilizerProximity => {
            stabilizer_proximity(sc.seed, sc.samples, &sc.epsilons).map(Report::StabilizerProximity)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::Boost;

    fn disk_scenario(eps: &[f64]) -> Scenario {
        Scenario {
            schema: SCHEMA.into(),
            mode: Mode::Single,
            body: None,
            family: Some(FamilySpec {
                tag: FamilyTag::Ellipsoid,
                n: 2,
                params: FamilyParams {
                    boosts: vec![
                        Boost {
                            axis: 0,
                            rapidity: 2.0,
                        },
                        Boost {
                            axis: 1,
                            rapidity: 2.0,
                        },
                    ],
                    ..Default::default()
                },
            }),
            basepoint: None,
            generators: vec![],
            sweep: vec![],
            epsilons: eps.to_vec(),
            depth: 3,
            seed: 0,
            class_bound: 6,
            tol: 1e-9,
            samples: 2000,
            outputs: Outputs::default(),
        }
    }

    #[test]
    fn disk_boost_scan() {
        let r = run_scenario(&disk_scenario(&[0.1, 0.5, 2.0])).unwrap();
        let sizes: Vec<usize> = r.rows.iter().map(|r| r.subgroup_size).collect();
        assert_eq!(&sizes[..2], &[1, 1]);
        assert!(sizes[2] >= 3);
        assert_eq!(r.rows[0].nilpotency.class(), Some(1));
        assert_eq!(r.rows[1].nilpotency.class(), Some(1));
        assert!(!r.rows[2].nilpotency.is_nilpotent());
        assert!(r.monotone);
        let back: ScanReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r
            .to_csv()
            .starts_with("epsilon,subgroup_size,min_displacement,verdict,class,witness_length\n"));
    }

    #[test]
    fn empty_generators() {
        let mut sc = disk_scenario(&[0.1, 1.0]);
        sc.family.as_mut().unwrap().params = FamilyParams::default();
        let r = run_scenario(&sc).unwrap();
        assert!(r
            .rows
            .iter()
            .all(|r| r.subgroup_size == 1 && r.nilpotency.class() == Some(1)));
    }

    #[test]
    fn schema_errors() {
        let mut sc = disk_scenario(&[0.5, 0.1]);
        assert!(matches!(sc.validate(), Err(HilbertError::Schema(_))));
        sc.epsilons = vec![0.1];
        sc.schema = "other".into();
        assert!(matches!(sc.validate(), Err(HilbertError::Schema(_))));
        assert!(matches!(
            Scenario::from_json("{\"schema\":\"hilbertlab/v1\"}"),
            Err(HilbertError::Schema(_))
        ));
        let bad = r#"{"schema":"hilbertlab/v1","body":{"type":"ellipsoid","Q":[[1,0,0],[0,1,0],[0,0,-1]]},
            "basepoint":[0,0],"generators":[[[1,0,0.5],[0,1,0],[0,0,1]]],"epsilons":[1.0]}"#;
        let sc = Scenario::from_json(bad).unwrap();
        assert!(matches!(
            run_scenario(&sc),
            Err(HilbertError::NotAnAutomorphism)
        ));
    }
}
