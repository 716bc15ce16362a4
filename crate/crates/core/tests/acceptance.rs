//! Acceptance criteria, one PASS/FAIL line each.

use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hilbertlab::benzecri::{
    central_moments, inertia_ellipsoid, is_standard, monte_carlo_moments, orthogonal_defect,
    sandwich_radii, second_moment_matrix, standardize, EXACT_STANDARD_TOL,
};
use hilbertlab::body::{
    make_family, rotation, Boost, ConvexBody, FamilyParams, FamilyTag, MarkedBody,
};
use hilbertlab::group::orbit::verify_orbit_spread;
use hilbertlab::group::{
    nilpotency_witness, ArithmeticPath, GeneratorSet, IntMatrix, LcsOptions, Verdict,
};
use hilbertlab::hilbert::distance_value;
use hilbertlab::render::svg_string;
use hilbertlab::sampling::{random_interior_point, random_map, random_polygon};
use hilbertlab::scan::{margulis_scan, scan, stabilizer_proximity, Report};
use hilbertlab::{apply_map, det_normalize, AffineChart, ProjectiveMap, ProjectivePoint};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn disk_point(rng: &mut ChaCha8Rng, rmax: f64) -> DVector<f64> {
    let r = rmax * rng.gen::<f64>().sqrt();
    let t = rng.gen_range(0.0..std::f64::consts::TAU);
    DVector::from_vec(vec![r * t.cos(), r * t.sin()])
}

fn square() -> ConvexBody {
    ConvexBody::from_vertices(&[
        vec![1.0, 1.0],
        vec![-1.0, 1.0],
        vec![-1.0, -1.0],
        vec![1.0, -1.0],
    ])
    .unwrap()
}

fn triangle() -> ConvexBody {
    ConvexBody::from_vertices(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
}

fn klein_model() -> Outcome {
    let disk = ConvexBody::unit_ball(2);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (u, v) = (disk_point(&mut rng, 0.99), disk_point(&mut rng, 0.99));
        let ratio = (1.0 - u.norm_squared()) * (1.0 - v.norm_squared()) / (1.0 - u.dot(&v)).powi(2);
        let expected = (1.0 - ratio).max(0.0).sqrt().atanh();
        let got = distance_value(
            &disk,
            &ProjectivePoint::from_affine(u.as_slice()),
            &ProjectivePoint::from_affine(v.as_slice()),
        )
        .map_err(|e| e.to_string())?;
        worst = worst.max((got - expected).abs());
    }
    check(
        worst <= 1e-10,
        format!("1000 pairs, max |d - artanh form| = {worst:.2e} (tol 1e-10)"),
    )
}

fn metric_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut sym, mut tri, mut ident): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut separated = true;
    for body in [ConvexBody::unit_ball(2), square(), triangle()] {
        for _ in 0..1000 {
            let [x, y, z] = [0, 1, 2].map(|_| random_interior_point(&body, &mut rng));
            let d = |a: &ProjectivePoint, b: &ProjectivePoint| {
                distance_value(&body, a, b).map_err(|e| e.to_string())
            };
            let dxy = d(&x, &y)?;
            sym = sym.max((dxy - d(&y, &x)?).abs());
            tri = tri.max(dxy - d(&x, &z)? - d(&z, &y)?);
            ident = ident.max(d(&x, &x)?);
            separated &= x.approx_eq(&y, 1e-9) || dxy > 0.0;
        }
    }
    check(
        sym <= 1e-10 && tri <= 1e-9 && ident <= 1e-10 && separated,
        format!("3 bodies x 1000 triples: symmetry {sym:.1e}, triangle excess {tri:.1e}, d(x,x) {ident:.1e}"),
    )
}

fn projective_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let body = match i % 3 {
            0 => ConvexBody::unit_ball(2),
            1 => triangle(),
            _ => random_polygon(&mut rng),
        };
        let (x, y) = (
            random_interior_point(&body, &mut rng),
            random_interior_point(&body, &mut rng),
        );
        let g = random_map(2, 0.3, &mut rng);
        let run = || -> hilbertlab::Result<f64> {
            let gb = body.transformed(&g)?;
            Ok(
                distance_value(&gb, &apply_map(&g, &x)?, &apply_map(&g, &y)?)?
                    - distance_value(&body, &x, &y)?,
            )
        };
        worst = worst.max(run().map_err(|e| e.to_string())?.abs());
    }
    check(
        worst <= 1e-8,
        format!("200 maps, max |d_gO(gx,gy) - d_O(x,y)| = {worst:.2e} (tol 1e-8)"),
    )
}

/// Standardizes the 100-polygon suite; returns (min inner, max outer) radii.
fn polygon_suite(seed: u64, checks: bool) -> Result<(f64, f64, String), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut residual, mut idem, mut equiv): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut steps = 0;
    let (mut rmin, mut rmax) = (f64::INFINITY, 0.0f64);
    let mut sandwiched = true;
    for _ in 0..100 {
        let body = random_polygon(&mut rng);
        let x = random_interior_point(&body, &mut rng);
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let mut run = || -> hilbertlab::Result<()> {
            let mb = MarkedBody::new(body.clone(), x.clone())?;
            let s = standardize(&mb)?;
            steps = steps.max(s.newton_iterations);
            let std = mb.transformed(&s.map)?;
            let c = is_standard(&std, EXACT_STANDARD_TOL);
            if !c.valid {
                residual = f64::INFINITY;
            }
            for r in [c.centroid_offset, c.basepoint_offset, c.inertia_deviation] {
                residual = residual.max(r.unwrap_or(f64::INFINITY));
            }
            let r = sandwich_radii(std.body())?;
            sandwiched &= r.inner <= 1.0 + 1e-9 && 1.0 <= r.outer + 1e-9;
            rmin = rmin.min(r.inner);
            rmax = rmax.max(r.outer);
            if checks {
                idem = idem.max(orthogonal_defect(standardize(&std)?.map.matrix()));
                let k = det_normalize(&rotation(2, 0, 1, angle))?;
                let h = standardize(&mb.transformed(&k)?)?;
                equiv = equiv.max(orthogonal_defect(
                    h.map.compose(&k).compose(&s.map.inverse()).matrix(),
                ));
            }
            Ok(())
        };
        run().map_err(|e| e.to_string())?;
    }
    let ok = steps <= 100 && residual <= 1e-6 && idem <= 1e-5 && equiv <= 1e-5 && sandwiched;
    let detail = format!(
        "max Newton steps {steps}, max residual {residual:.1e}, idempotence {idem:.1e}, equivariance {equiv:.1e}, r <= 1 <= R: {sandwiched}"
    );
    if ok {
        Ok((rmin, rmax, detail))
    } else {
        Err(detail)
    }
}

fn benzecri_standardization() -> Outcome {
    polygon_suite(4, true).map(|(_, _, d)| format!("100 polygons: {d}"))
}

fn moments() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let std = AffineChart::standard(2);
    let mut worst_mc: f64 = 0.0;
    for i in 0..10 {
        let body = random_polygon(&mut rng);
        let exact = central_moments(&body, &std).map_err(|e| e.to_string())?;
        let mc = monte_carlo_moments(&body, &std, &exact.centroid, 10_000_000, 100 + i)
            .map_err(|e| e.to_string())?;
        let scale = exact.second_moment.amax();
        worst_mc = worst_mc.max((mc.second_moment - &exact.second_moment).amax() / scale);
        worst_mc = worst_mc.max((mc.volume - exact.volume).abs() / exact.volume);
    }
    // Inertia ellipsoid reproduces the moments.
    let mut worst_match: f64 = 0.0;
    for _ in 0..10 {
        let body = random_polygon(&mut rng);
        let m = central_moments(&body, &std).map_err(|e| e.to_string())?;
        let e = inertia_ellipsoid(&body, &std)
            .and_then(|e| e.to_body(&std))
            .map_err(|e| e.to_string())?;
        let me = central_moments(&e, &std).map_err(|e| e.to_string())?;
        worst_match =
            worst_match.max((me.second_moment - &m.second_moment).amax() / m.second_moment.amax());
        worst_match = worst_match.max((me.centroid - &m.centroid).amax());
    }
    let disk = second_moment_matrix(&ConvexBody::unit_ball(2), &DVector::zeros(2), &std)
        .map_err(|e| e.to_string())?;
    let disk_err =
        (disk.second_moment - DMatrix::identity(2, 2) * (std::f64::consts::PI / 4.0)).amax();
    check(
        worst_mc < 5e-3 && worst_match <= 1e-9 && disk_err <= 1e-12,
        format!(
            "10 polygons, Monte Carlo 1e7 relative deviation {worst_mc:.1e} (3 significant digits: < 5e-3); inertia match {worst_match:.1e}; disk pi/4 error {disk_err:.1e}"
        ),
    )
}

fn sandwich() -> Outcome {
    let (r1, big1, _) = polygon_suite(6, false)?;
    let (r2, big2, _) = polygon_suite(7, false)?;
    let (a, b) = (format!("{r1:.6} {big1:.6}"), format!("{r2:.6} {big2:.6}"));
    let ok = r1.is_finite() && r1 > 0.0 && big1.is_finite() && r1 <= 1.0 && big1 >= 1.0 && a == b;
    check(ok, format!("min r, max R: seed 6 -> {a}, seed 7 -> {b}"))
}

fn orbit() -> Outcome {
    let r = verify_orbit_spread(8, 1000);
    check(
        r.counterexamples.is_empty(),
        format!(
            "{} actions, {} (action, m) checks, {} via validated calls, {} counterexamples",
            r.actions,
            r.checks,
            r.validated,
            r.counterexamples.len()
        ),
    )
}

fn verdicts() -> Outcome {
    let m = |rows: &[&[f64]]| {
        ProjectiveMap::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    };
    let heis = GeneratorSet::new(vec![
        m(&[&[1.0, 1.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]),
        m(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 1.0], &[0.0, 0.0, 1.0]]),
    ]);
    let diag = GeneratorSet::new(vec![
        m(&[&[2.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 0.5]]),
        m(&[&[1.0, 0.0, 0.0], &[0.0, 3.0, 0.0], &[0.0, 0.0, 1.0 / 3.0]]),
    ]);
    let sanov = GeneratorSet::new(vec![
        m(&[&[1.0, 2.0], &[0.0, 1.0]]),
        m(&[&[1.0, 0.0], &[2.0, 1.0]]),
    ]);
    let h = nilpotency_witness(&heis, 6, 1e-9);
    let d = nilpotency_witness(&diag, 6, 1e-9);
    let s = nilpotency_witness(&sanov, 6, 1e-9);
    let h_ok =
        h.verdict == Verdict::Nilpotent { class: 2 } && h.path == ArithmeticPath::ExactInteger;
    let d_ok = d.verdict == Verdict::Nilpotent { class: 1 };
    let (s_ok, s_detail) = match &s.verdict {
        Verdict::NotNilpotent { witness } if s.path == ArithmeticPath::ExactInteger => {
            // Re-evaluate the witness word in exact integer arithmetic.
            let sym = sanov.symmetrized();
            let gens: Vec<IntMatrix> = sym
                .elements()
                .iter()
                .map(|g| IntMatrix::from_map(g).unwrap())
                .collect();
            let w = witness
                .word
                .iter()
                .fold(IntMatrix::identity(2), |acc, &i| acc.mul(&gens[i]));
            (
                !w.is_identity(),
                format!(
                    "weight {} witness, word length {}, {} digits",
                    witness.indices.len(),
                    witness.word.len(),
                    w.max_digits()
                ),
            )
        }
        other => (false, format!("{other:?}")),
    };
    check(
        h_ok && d_ok && s_ok,
        format!(
            "heisenberg {:?}; diagonal {:?}; sanov {s_detail}",
            h.verdict, d.verdict
        ),
    )
}

fn margulis() -> Outcome {
    let opts = LcsOptions::default();
    let eps_grid = [0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0];
    let mut details = Vec::new();
    let mut ok = true;
    // The named configurations: epsilon = 0.1 at depth 3 gives the trivial group.
    let boosts = |t: f64| FamilyParams {
        boosts: vec![
            Boost {
                axis: 0,
                rapidity: t,
            },
            Boost {
                axis: 1,
                rapidity: t,
            },
        ],
        ..Default::default()
    };
    let diag = |a: [f64; 3], b: [f64; 3]| FamilyParams {
        log_diagonals: vec![a.to_vec(), b.to_vec()],
        ..Default::default()
    };
    for (tag, params) in [
        (FamilyTag::Ellipsoid, boosts(2.0)),
        (
            FamilyTag::Simplex,
            diag([0.5, -0.2, -0.3], [-0.3, 0.5, -0.2]),
        ),
    ] {
        let fam = make_family(tag, 2, &params).map_err(|e| e.to_string())?;
        let mb = MarkedBody::new(fam.body, fam.basepoint).map_err(|e| e.to_string())?;
        let r = scan(&mb, &GeneratorSet::new(fam.generators), &[0.1], 3, &opts)
            .map_err(|e| e.to_string())?;
        let row = &r.rows[0];
        let trivial = row.subgroup_size == 1 && row.nilpotency.class() == Some(1);
        ok &= trivial;
        details.push(format!(
            "{tag} at 0.1: size {} {:?}",
            row.subgroup_size, row.nilpotency.verdict
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let disk_configs: Vec<FamilyParams> = std::iter::once(boosts(2.0))
        .chain((0..7).map(|_| boosts(rng.gen_range(0.5..3.0))))
        .collect();
    let simplex_configs: Vec<FamilyParams> = (0..8)
        .map(|_| {
            let mut v = || {
                let u: [f64; 3] = [0, 1, 2].map(|_| rng.gen_range(-1.0..1.0));
                let mean = u.iter().sum::<f64>() / 3.0;
                u.map(|x| x - mean)
            };
            diag(v(), v())
        })
        .collect();
    for (tag, configs) in [
        (FamilyTag::Ellipsoid, disk_configs),
        (FamilyTag::Simplex, simplex_configs),
    ] {
        let r = margulis_scan(tag, 2, &configs, &eps_grid, 3, &opts).map_err(|e| e.to_string())?;
        ok &= r.all_positive;
        details.push(format!(
            "{tag}: {} configurations, epsilon* per configuration {:?}",
            r.configurations.len(),
            r.configurations
                .iter()
                .map(|c| c.epsilon_star)
                .collect::<Vec<_>>()
        ));
    }
    check(ok, details.join("; "))
}

fn stabilizer_proximity_table() -> Outcome {
    let grid = [0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0];
    let a = stabilizer_proximity(11, 2000, &grid).map_err(|e| e.to_string())?;
    let b = stabilizer_proximity(11, 2000, &grid).map_err(|e| e.to_string())?;
    let mut ok = a == b;
    let mut details = vec![format!("deterministic: {}", a == b)];
    for f in &a.families {
        let last = f.envelope[0].max_gauge.unwrap_or(f64::INFINITY);
        ok &= f.decreasing && last < 0.05;
        details.push(format!(
            "{}: envelope {:?}",
            f.family,
            f.envelope
                .iter()
                .map(|e| format!("{}->{:.4}", e.epsilon, e.max_gauge.unwrap_or(f64::NAN)))
                .collect::<Vec<_>>()
        ));
    }
    check(ok, details.join("; "))
}

fn cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_hilbertlab");
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for (i, scenario) in ["disk_boosts", "disk_sweep", "stabilizer_proximity"]
        .iter()
        .enumerate()
    {
        for run in 0..2 {
            let prefix = dir.path().join(format!("{scenario}_{run}"));
            let status = Command::new(bin)
                .args(["scan", "--scenario"])
                .arg(root.join(format!("scenarios/{scenario}.json")))
                .args(["--seed", &(17 + i).to_string(), "--out"])
                .arg(&prefix)
                .status()
                .map_err(|e| e.to_string())?;
            if !status.success() {
                return Err(format!("{scenario}: exit {status}"));
            }
            let json = std::fs::read(prefix.with_extension("json")).map_err(|e| e.to_string())?;
            let csv = std::fs::read(prefix.with_extension("csv")).map_err(|e| e.to_string())?;
            outputs.push((scenario, json, csv));
        }
    }
    let identical = outputs
        .chunks(2)
        .all(|p| p[0].1 == p[1].1 && p[0].2 == p[1].2);
    let round_trip = outputs.iter().all(|(_, json, _)| {
        let text = String::from_utf8_lossy(json);
        serde_json::from_str::<Report>(&text)
            .map(|r| r.to_json() + "\n" == text)
            .unwrap_or(false)
    });
    let golden = std::fs::read_to_string(root.join("crates/core/tests/golden/unit_disk.svg"))
        .map_err(|e| e.to_string())?;
    let svg = svg_string(
        &ConvexBody::unit_ball(2),
        &ProjectivePoint::origin(2),
        &[0.5, 1.0],
    )
    .map_err(|e| e.to_string())?;
    check(
        identical && round_trip && svg == golden,
        format!("byte-identical reports: {identical}; JSON round trip: {round_trip}; golden SVG paths match: {}", svg == golden),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 11] = [
        (
            "klein model equivalence",
            klein_model,
            Duration::from_secs(1),
        ),
        ("metric axioms", metric_axioms, Duration::from_secs(5)),
        (
            "projective invariance",
            projective_invariance,
            Duration::from_secs(5),
        ),
        (
            "benzecri standardization",
            benzecri_standardization,
            Duration::from_secs(60),
        ),
        ("moment machinery", moments, Duration::MAX),
        ("sandwich radii", sandwich, Duration::MAX),
        ("orbit spread", orbit, Duration::from_secs(30)),
        ("nilpotency verdicts", verdicts, Duration::from_secs(10)),
        ("margulis scan", margulis, Duration::from_secs(120)),
        (
            "stabilizer proximity",
            stabilizer_proximity_table,
            Duration::MAX,
        ),
        ("cli determinism", cli_determinism, Duration::MAX),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let within = elapsed <= *budget;
        let budget_note = if *budget == Duration::MAX {
            String::new()
        } else {
            format!(", budget {:?}", budget)
        };
        let (pass, detail) = match outcome {
            Ok(d) => (within, d),
            Err(d) => (false, d),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{:.2?}{budget_note}]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
