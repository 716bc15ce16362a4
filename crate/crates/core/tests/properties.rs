use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hilbertlab::body::{make_family, Boost, ConvexBody, FamilyParams, FamilyTag, MarkedBody};
use hilbertlab::group::orbit::{orbit_growth, orbit_spread, Permutation, PermutationAction};
use hilbertlab::group::{
    displacement_table, epsilon_subgroup_from_table, proximity_gauge, GeneratorSet, LcsOptions,
    DEFAULT_BALL_CAP,
};
use hilbertlab::hilbert::distance_value;
use hilbertlab::sampling::{random_interior_point, random_map, random_polygon};
use hilbertlab::scan::{scan, ScanReport};
use hilbertlab::{apply_map, ProjectivePoint};

fn disk_point() -> impl Strategy<Value = ProjectivePoint> {
    (0.0..0.97f64, 0.0..std::f64::consts::TAU)
        .prop_map(|(r, t)| ProjectivePoint::from_affine(&[r * t.cos(), r * t.sin()]))
}

fn body_from_seed(seed: u64) -> (ConvexBody, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let body = match seed % 3 {
        0 => ConvexBody::unit_ball(2),
        1 => ConvexBody::unit_ball(3),
        _ => random_polygon(&mut rng),
    };
    (body, rng)
}

fn permutation(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn inverse(p: &Permutation) -> Permutation {
    let mut q = vec![0; p.len()];
    for (i, &j) in p.iter().enumerate() {
        q[j] = i;
    }
    q
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn disk_metric_axioms(x in disk_point(), y in disk_point(), z in disk_point()) {
        let disk = ConvexBody::unit_ball(2);
        let d = |a: &ProjectivePoint, b: &ProjectivePoint| distance_value(&disk, a, b).unwrap();
        prop_assert!(d(&x, &y) >= 0.0);
        prop_assert!((d(&x, &y) - d(&y, &x)).abs() <= 1e-10);
        prop_assert!(d(&x, &y) <= d(&x, &z) + d(&z, &y) + 1e-9);
        prop_assert!(d(&x, &x).abs() <= 1e-12);
    }

    #[test]
    fn distance_is_projectively_invariant(seed in any::<u64>()) {
        let (body, mut rng) = body_from_seed(seed);
        let (x, y) = (random_interior_point(&body, &mut rng), random_interior_point(&body, &mut rng));
        let g = random_map(body.dim(), 0.3, &mut rng);
        let image = body.transformed(&g).unwrap();
        let before = distance_value(&body, &x, &y).unwrap();
        let after = distance_value(&image, &apply_map(&g, &x).unwrap(), &apply_map(&g, &y).unwrap()).unwrap();
        prop_assert!((before - after).abs() <= 1e-8 * (1.0 + before), "{before} vs {after}");
    }

    #[test]
    fn gauge_is_symmetric_and_left_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let [g, h, k] = [0, 1, 2].map(|_| random_map(2, 0.5, &mut rng));
        let a = proximity_gauge(&g, &h).unwrap();
        prop_assert!((a - proximity_gauge(&h, &g).unwrap()).abs() <= 1e-12 * (1.0 + a));
        prop_assert!(proximity_gauge(&g, &g).unwrap() <= 1e-12);
        let shifted = proximity_gauge(&k.compose(&g), &k.compose(&h)).unwrap();
        prop_assert!((a - shifted).abs() <= 1e-8 * (1.0 + a), "{a} vs {shifted}");
    }

    #[test]
    fn epsilon_subgroups_grow_with_epsilon(t in 0.3..2.5f64, e1 in 0.01..3.0f64, e2 in 0.01..3.0f64) {
        let params = FamilyParams { boosts: vec![Boost { axis: 0, rapidity: t }, Boost { axis: 1, rapidity: t }], ..Default::default() };
        let fam = make_family(FamilyTag::Ellipsoid, 2, &params).unwrap();
        let mb = MarkedBody::new(fam.body, fam.basepoint).unwrap();
        let table = displacement_table(&mb, &GeneratorSet::new(fam.generators), 2, DEFAULT_BALL_CAP).unwrap();
        let (lo, hi) = (e1.min(e2), e1.max(e2));
        let small = epsilon_subgroup_from_table(&table, lo);
        let large = epsilon_subgroup_from_table(&table, hi);
        prop_assert!(small.len() <= large.len());
        prop_assert!(small.elements().iter().all(|g| large.elements().contains(g)));
    }

    #[test]
    fn orbits_grow_until_full(
        (n, gens) in (2usize..9).prop_flat_map(|n| (Just(n), prop::collection::vec(permutation(n), 1..4)))
    ) {
        let mut s = gens.clone();
        s.extend(gens.iter().map(inverse));
        s.sort();
        s.dedup();
        let action = PermutationAction::new(n, s.clone()).unwrap();
        let growth = orbit_growth(&s, n, 0);
        // Orbit sizes increase by at least one at every step until the orbit closes.
        prop_assert!(growth.windows(2).all(|w| w[1] > w[0]));
        prop_assert_eq!(growth[0], 1);
        if action.is_transitive() {
            prop_assert_eq!(*growth.last().unwrap(), n);
            for m in 0..n {
                let spread = orbit_spread(&action, &s, m, 0).unwrap();
                prop_assert!(spread.len() >= (m + 1).min(n));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn scan_reports_round_trip(t in 0.5..3.0f64, eps in prop::collection::vec(0.05..4.0f64, 1..4)) {
        let params = FamilyParams { boosts: vec![Boost { axis: 0, rapidity: t }, Boost { axis: 1, rapidity: t }], ..Default::default() };
        let fam = make_family(FamilyTag::Ellipsoid, 2, &params).unwrap();
        let mb = MarkedBody::new(fam.body, fam.basepoint).unwrap();
        let report = scan(&mb, &GeneratorSet::new(fam.generators), &eps, 2, &LcsOptions::default()).unwrap();
        let back: ScanReport = serde_json::from_str(&report.to_json()).unwrap();
        prop_assert_eq!(&back, &report);
        prop_assert_eq!(back.to_csv(), report.to_csv());
    }
}
