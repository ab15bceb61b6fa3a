mod common;

use framekit::constructions::{make_subframe_frame, ConstructionKind, ConstructionSpec};
use framekit::linalg::TolerancePolicy;
use framekit::subframe::{
    basis_coordinates, classify_supports_with, extract_riesz_basis, partition_disjoint_support,
    riesz_frame_bound, ClassifyOptions, SubsetMode,
};
use framekit::{optimal_bounds, BoundsKind, FrameFamily, IndexSet};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tol() -> TolerancePolicy {
    TolerancePolicy::default()
}

fn random_family(rng: &mut ChaCha8Rng, dim: usize, len: usize) -> FrameFamily {
    let vs = (0..len)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    FrameFamily::with_default_labels(dim, vs).unwrap()
}

#[test]
fn exhaustive_bound_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..200 {
        let dim = rng.random_range(1..=5);
        let len = rng.random_range(1..=8);
        let mut f = random_family(&mut rng, dim, len);
        if trial % 5 == 0 {
            // force an exact dependency now and then
            let v: Vec<f64> = f.vector(0).iter().map(|x| 2.0 * x).collect();
            let mut vs = f.vectors().to_vec();
            vs.push(v);
            f = FrameFamily::with_default_labels(dim, vs).unwrap();
        }
        let got = riesz_frame_bound(&f, SubsetMode::Exhaustive, &tol()).unwrap();
        let (lo, hi) = common::brute_force_riesz(dim, f.vectors());
        assert!((got.riesz_lower - lo).abs() <= 1e-9, "trial {trial}: {} vs {lo}", got.riesz_lower);
        assert!((got.riesz_upper - hi).abs() <= 1e-9, "trial {trial}: {} vs {hi}", got.riesz_upper);
        let w = optimal_bounds(&f.subfamily(&got.worst.subset), BoundsKind::FrameSequence, &tol()).unwrap();
        assert!((w.lower - got.riesz_lower).abs() <= 1e-12);
        assert_eq!(got.subsets_examined + got.zero_subsets_skipped, (1 << f.len()) - 1);
    }
}

#[test]
fn adding_a_vector_never_raises_the_lower_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let dim = rng.random_range(1..=5);
        let len = rng.random_range(1..=7);
        let f = random_family(&mut rng, dim, len + 1);
        let sub = f.subfamily(&IndexSet::range(0, len));
        let a = riesz_frame_bound(&sub, SubsetMode::Exhaustive, &tol()).unwrap();
        let b = riesz_frame_bound(&f, SubsetMode::Exhaustive, &tol()).unwrap();
        assert!(b.riesz_lower <= a.riesz_lower + 1e-12);
        assert!(b.riesz_upper >= a.riesz_upper - 1e-12);
    }
}

#[test]
fn sampled_mode_is_an_upper_estimate_of_the_lower_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let f = random_family(&mut rng, 4, 9);
        let exact = riesz_frame_bound(&f, SubsetMode::Exhaustive, &tol()).unwrap();
        let mode = SubsetMode::Sampled { n_samples: 40, seed: 3 };
        let sampled = riesz_frame_bound(&f, mode, &tol()).unwrap();
        assert!(!sampled.exhaustive);
        assert!(sampled.riesz_lower >= exact.riesz_lower - 1e-12);
        assert!(sampled.riesz_upper <= exact.riesz_upper + 1e-12);
        assert_eq!(sampled, riesz_frame_bound(&f, mode, &tol()).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn extracted_basis_is_independent_and_spanning(
        d in 1usize..=6,
        vs in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 6), 1..=10),
    ) {
        let vs: Vec<Vec<f64>> = vs.into_iter().map(|v| v[..d].to_vec()).collect();
        let f = FrameFamily::with_default_labels(d, vs.clone()).unwrap();
        let rank = common::nonzero_spectrum(d, &vs, 1e-10).len();
        prop_assume!(rank > 0);
        let (idx, constants) = extract_riesz_basis(&f, &tol()).unwrap();
        prop_assert_eq!(idx.len(), rank);
        let sub: Vec<Vec<f64>> = idx.iter().map(|i| vs[i].clone()).collect();
        let (lo, hi) = common::svd_bounds(d, &sub).unwrap();
        prop_assert!((constants.lower * constants.lower - lo).abs() <= 1e-8 * hi);
        prop_assert!((constants.upper * constants.upper - hi).abs() <= 1e-8 * hi);
        // the selection is the greedy one: each rejected vector depends on earlier selected ones
        for i in 0..vs.len() {
            if idx.contains(i) {
                continue;
            }
            let before: Vec<Vec<f64>> = idx.iter().filter(|&j| j < i).map(|j| vs[j].clone()).collect();
            let mut with = before.clone();
            with.push(vs[i].clone());
            prop_assert_eq!(
                common::nonzero_spectrum(d, &with, 1e-10).len(),
                common::nonzero_spectrum(d, &before, 1e-10).len()
            );
        }
    }

    #[test]
    fn partition_groups_are_disjointly_supported(
        d in 2usize..=6,
        raw in prop::collection::vec(prop::collection::vec(prop_oneof![Just(0.0), -2.0f64..2.0], 6), 1..=10),
    ) {
        let basis: Vec<Vec<f64>> = (0..d).map(|i| { let mut e = vec![0.0; d]; e[i] = 1.0; e }).collect();
        let basis = FrameFamily::with_default_labels(d, basis).unwrap();
        let vs: Vec<Vec<f64>> = raw.into_iter().map(|v| v[..d].to_vec()).collect();
        let f = FrameFamily::with_default_labels(d, vs.clone()).unwrap();
        let groups = partition_disjoint_support(&f, &basis, 1e-8).unwrap();
        let mut seen = vec![false; f.len()];
        for g in &groups {
            let mut used = vec![false; d];
            for i in g.iter() {
                prop_assert!(!seen[i]);
                seen[i] = true;
                for (n, x) in vs[i].iter().enumerate() {
                    if x.abs() > 1e-8 {
                        prop_assert!(!used[n]);
                        used[n] = true;
                    }
                }
            }
        }
        prop_assert!(seen.iter().all(|&s| s));
        // first fit: no vector could have joined an earlier group
        for (gi, g) in groups.iter().enumerate() {
            let first = g.iter().next().unwrap();
            for earlier in &groups[..gi] {
                let clash = earlier.iter().filter(|&j| j < first).any(|j| {
                    (0..d).any(|n| vs[j][n].abs() > 1e-8 && vs[first][n].abs() > 1e-8)
                });
                prop_assert!(clash);
            }
        }
    }
}

#[test]
fn coordinates_reproduce_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..100 {
        let dim = rng.random_range(1..=6);
        let basis = loop {
            let b = random_family(&mut rng, dim, dim);
            if common::nonzero_spectrum(dim, b.vectors(), 1e-6).len() == dim {
                break b;
            }
        };
        let f = random_family(&mut rng, dim, 5);
        let coords = basis_coordinates(&basis, &f).unwrap();
        for (c, v) in coords.iter().zip(f.vectors()) {
            let back = basis.synthesize(c).unwrap();
            for (a, b) in back.iter().zip(v) {
                assert!((a - b).abs() <= 1e-8);
            }
        }
    }
}

#[test]
fn classification_recovers_construction_labels() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut checked = 0;
    for seed in 0..200u64 {
        let mut s = ConstructionSpec::new(ConstructionKind::SubframeRecipe, rng.random_range(6..=14));
        s.max_support = rng.random_range(1..=3);
        s.n_k = rng.random_range(0..=3);
        s.m = Some(rng.random_range(1..=3));
        s.n_h = rng.random_range(0..=4);
        s.coord_lower = rng.random_range(0.25..1.0);
        s.coord_upper = rng.random_range(s.coord_lower..2.0);
        s.h2_decay = rng.random_range(0.05..0.9 * s.coord_lower.sqrt());
        s.seed = seed;
        let Ok(c) = make_subframe_frame(&s) else { continue };
        let opts = ClassifyOptions { g_floor: s.coord_lower.sqrt(), ..ClassifyOptions::default() };
        let d = classify_supports_with(&c.family, &c.ground_truth.g, &opts).unwrap();
        let gt = &c.ground_truth;
        assert_eq!(d.h, gt.h, "{s:?}");
        assert_eq!(d.k, gt.k, "{s:?}");
        assert_eq!(d.m0, gt.m0, "{s:?}");
        assert!((d.h2_energy - gt.h2_energy).abs() <= 1e-12, "{s:?}");
        d.check_partition(c.family.len()).unwrap();
        checked += 1;
    }
    assert!(checked >= 100, "only {checked} feasible recipes");
}
