//! Acceptance criteria. Prints one line per criterion and exits nonzero if any fails.

mod common;

use std::time::{Duration, Instant};

use framekit::cli::run_with_io;
use framekit::constructions::{
    make_block_riesz, make_failing_family, make_onb, make_subframe_frame, ConstructedFrame, ConstructionKind,
    ConstructionSpec, GuaranteedBounds,
};
use framekit::linalg::{self, TolerancePolicy};
use framekit::projection::{diagnostics, permute, trim_for_strong_method, Permutation};
use framekit::subframe::{extract_riesz_basis, riesz_frame_bound, SubsetMode};
use framekit::verify::{run_suite, Suite, VerifyConfig};
use framekit::{project_family, projected_energy, FrameFamily, IndexSet, OrthoProjector, ProjectionSide};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 7;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn tol() -> TolerancePolicy {
    TolerancePolicy::default()
}

fn random_family(rng: &mut ChaCha8Rng, dim: usize, len: usize) -> FrameFamily {
    let vs = (0..len)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    FrameFamily::with_default_labels(dim, vs).unwrap()
}

fn random_spanning(rng: &mut ChaCha8Rng, dim: usize, len: usize) -> FrameFamily {
    loop {
        let f = random_family(rng, dim, len);
        if let Some((lo, hi)) = common::svd_bounds(dim, f.vectors()) {
            if common::nonzero_spectrum(dim, f.vectors(), 1e-10).len() == dim && lo > 1e-6 * hi {
                return f;
            }
        }
    }
}

/// (lower, upper) frame bounds for the whole space, by SVD.
fn space_bounds(f: &FrameFamily) -> (f64, f64) {
    let s = common::nonzero_spectrum(f.dim(), f.vectors(), 0.0);
    let lower = if s.len() == f.dim() { s[0] } else { 0.0 };
    (lower, s.last().copied().unwrap_or(0.0))
}

fn criterion_1() -> Verdict {
    let cases = [(1usize, 1.0 / 16.0, 2.0), (2, 1.0 / 48.0, 3.0)];
    let mut notes = Vec::new();
    let mut ok = true;
    for (big_k, lower, upper) in cases {
        let g = GuaranteedBounds::from_params(1, big_k, 1.0, 1.0);
        ok &= g.lower == lower && g.upper == upper && g.d == big_k as f64;
        let mut s = ConstructionSpec::new(ConstructionKind::BlockRiesz, 12);
        s.max_support = big_k;
        s.seed = SEED;
        let start = Instant::now();
        let c = make_block_riesz(&s).unwrap();
        let r = riesz_frame_bound(&c.family, SubsetMode::Exhaustive, &tol()).unwrap();
        let elapsed = start.elapsed();
        ok &= r.exhaustive && r.riesz_lower > lower && r.riesz_upper <= upper + 1e-8;
        ok &= elapsed < Duration::from_secs(10);
        notes.push(format!(
            "K={big_k}: formula ({lower:.6}, {upper}), measured ({:.6}, {:.6}) over {} vectors in {:.2?}",
            r.riesz_lower,
            r.riesz_upper,
            c.family.len(),
            elapsed
        ));
    }
    verdict(ok, notes.join("; "))
}

/// Random instances satisfying the hypotheses of the union/complement bounds:
/// a spanning family, a subset `delta` whose span is proper, and complement
/// projections spanning the orthogonal complement.
struct SplitInstance {
    whole: (f64, f64),
    a1: f64,
    a2: f64,
}

fn split_instances(n: usize) -> Vec<SplitInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut out = Vec::new();
    while out.len() < n {
        let dim = rng.random_range(2..=8);
        let len = rng.random_range(dim..=2 * dim);
        let f = random_spanning(&mut rng, dim, len);
        let picked: Vec<usize> = (0..len).filter(|_| rng.random_bool(0.4)).collect();
        if picked.is_empty() {
            continue;
        }
        let delta = IndexSet::new(picked, len).unwrap();
        let part = f.subfamily(&delta);
        let p = OrthoProjector::span_of(&part, &tol());
        if p.rank() >= dim {
            continue;
        }
        let rest = project_family(&f.without(&delta), &p, ProjectionSide::Complement).unwrap();
        let rest_rank = common::nonzero_spectrum(dim, rest.vectors(), 1e-10).len();
        if rest_rank != dim - p.rank() {
            continue;
        }
        let Some((a1, _)) = common::svd_bounds(dim, part.vectors()) else { continue };
        let Some((a2, _)) = common::svd_bounds(dim, rest.vectors()) else { continue };
        out.push(SplitInstance {
            whole: space_bounds(&f),
            a1,
            a2,
        });
    }
    out
}

fn criterion_2() -> Verdict {
    let inst = split_instances(200);
    let held = inst
        .iter()
        .filter(|i| i.whole.0 >= i.a1 * i.a2 / (8.0 * i.whole.1) - 1e-8)
        .count();
    let ratio = inst
        .iter()
        .map(|i| i.whole.0 / (i.a1 * i.a2 / (8.0 * i.whole.1)))
        .fold(f64::INFINITY, f64::min);
    let suite = run_suite(Suite::Prop23, &VerifyConfig { trials: 200, seed: SEED, tol: tol() }).unwrap();
    let lib = suite.check("union_lower_margin").unwrap();
    verdict(
        held == 200 && lib.passed && lib.instances == 200,
        format!("{held}/200 instances, min lower/(A1 A2/8B) = {ratio:.3}; library battery {}", pass_word(lib.passed)),
    )
}

fn criterion_3() -> Verdict {
    let inst = split_instances(200);
    let held = inst.iter().filter(|i| i.a2 >= i.whole.0 - 1e-8).count();
    let margin = inst.iter().map(|i| i.a2 - i.whole.0).fold(f64::INFINITY, f64::min);
    let suite = run_suite(Suite::Prop23, &VerifyConfig { trials: 200, seed: SEED, tol: tol() }).unwrap();
    let lib = suite.check("complement_lower_margin").unwrap();
    verdict(
        held == 200 && lib.passed && lib.instances == 200,
        format!("{held}/200 instances, min (A' - A) = {margin:.3e}; library battery {}", pass_word(lib.passed)),
    )
}

fn corpus() -> Vec<(String, ConstructedFrame)> {
    let mut out = Vec::new();
    for d in 1..=6 {
        out.push((format!("onb{d}"), make_onb(d).unwrap()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut blocks = 0;
    while blocks < 20 {
        let mut s = ConstructionSpec::new(ConstructionKind::BlockRiesz, rng.random_range(2..=16));
        s.levels = rng.random_range(1..=3);
        s.max_support = rng.random_range(1..=4).min(s.dim);
        s.coord_lower = rng.random_range(0.2..=1.0);
        s.coord_upper = rng.random_range(s.coord_lower..=2.0);
        s.seed = rng.random();
        if let Ok(c) = make_block_riesz(&s) {
            out.push((format!("block_riesz seed {}", s.seed), c));
            blocks += 1;
        }
    }
    for seed in 0..10 {
        let c = make_subframe_frame(&recipe(&mut rng, 0, seed)).unwrap();
        out.push((format!("subframe_recipe seed {seed}"), c));
    }
    // reordered copies, so the greedy pass does not simply meet the orthonormal basis first
    let shuffled: Vec<(String, ConstructedFrame)> = out
        .iter()
        .enumerate()
        .map(|(i, (name, c))| {
            let mut c = c.clone();
            c.family = permute(&c.family, &Permutation::random(c.family.len(), SEED, i as u64)).unwrap();
            (format!("{name} (permuted)"), c)
        })
        .collect();
    out.extend(shuffled);
    out
}

fn criterion_4() -> Verdict {
    let mut worst_residual = 0.0f64;
    let mut min_lower = f64::INFINITY;
    let mut failures = Vec::new();
    let all = corpus();
    for (name, c) in &all {
        let f = &c.family;
        let (idx, constants) = extract_riesz_basis(f, &tol()).unwrap();
        let basis = f.subfamily(&idx);
        let rank = common::nonzero_spectrum(f.dim(), basis.vectors(), 1e-10).len();
        let p = OrthoProjector::span_of(&basis, &tol());
        let residual = f
            .vectors()
            .iter()
            .map(|v| linalg::norm(&p.apply_complement(v).unwrap()))
            .fold(0.0, f64::max);
        worst_residual = worst_residual.max(residual);
        min_lower = min_lower.min(constants.lower);
        if idx.len() != f.dim() || rank != idx.len() || constants.lower <= 0.0 || residual > 1e-8 {
            failures.push(name.clone());
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "{} families, min Riesz lower constant {min_lower:.3e}, worst span residual {worst_residual:.1e}{}",
            all.len(),
            if failures.is_empty() { String::new() } else { format!(", failed: {failures:?}") }
        ),
    )
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let dim = rng.random_range(1..=5);
        let len = rng.random_range(1..=8);
        let f = random_family(&mut rng, dim, len);
        let r = riesz_frame_bound(&f, SubsetMode::Exhaustive, &tol()).unwrap();
        let (lo, hi) = common::brute_force_riesz(dim, f.vectors());
        worst = worst.max((r.riesz_lower - lo).abs()).max((r.riesz_upper - hi).abs());
    }
    let elapsed = start.elapsed();
    verdict(
        worst <= 1e-9 && elapsed < Duration::from_secs(60),
        format!("200 families, max deviation {worst:.1e}, {elapsed:.2?}"),
    )
}

fn criterion_6() -> Verdict {
    let mut lowers = Vec::new();
    let mut ok = true;
    let mut windows = Vec::new();
    for big_m in [2usize, 4, 8] {
        let mut s = ConstructionSpec::new(ConstructionKind::FailingFamily, 16);
        s.m = Some(big_m);
        let c = make_failing_family(&s).unwrap();
        let d = c.designed_failure.as_ref().unwrap();
        let f = &c.family;
        let k_rows: Vec<&Vec<f64>> = f
            .vectors()
            .iter()
            .zip(f.labels())
            .filter(|(_, l)| l.starts_with("k:"))
            .map(|(v, _)| v)
            .collect();
        for (m, &j) in d.designated_coordinates.iter().enumerate() {
            let col: f64 = k_rows.iter().map(|v| v[j] * v[j]).sum();
            let m = m + 1;
            ok &= col > 0.0 && col < 1.0 / m as f64;
            windows.push(col * m as f64);
        }
        let sub = f.subfamily(&d.subset);
        let (lower, _) = common::svd_bounds(16, sub.vectors()).unwrap();
        ok &= lower < 1.0 / big_m as f64;
        lowers.push(lower);
    }
    ok &= lowers[0] > lowers[1] && lowers[1] > lowers[2];
    let widest = windows.iter().copied().fold(0.0, f64::max);
    verdict(
        ok,
        format!(
            "witness lower bounds {:.3e} > {:.3e} > {:.3e}; max m * column sum {widest:.3}",
            lowers[0], lowers[1], lowers[2]
        ),
    )
}

fn recipe(rng: &mut ChaCha8Rng, n_k: usize, seed: u64) -> ConstructionSpec {
    loop {
        let mut s = ConstructionSpec::new(ConstructionKind::SubframeRecipe, rng.random_range(6..=14));
        s.max_support = rng.random_range(1..=3);
        s.n_k = n_k;
        s.m = Some(rng.random_range(1..=3));
        s.n_h = rng.random_range(1..=4);
        s.coord_lower = rng.random_range(0.25..1.0);
        s.coord_upper = rng.random_range(s.coord_lower..2.0);
        s.h2_decay = rng.random_range(0.05..0.9 * s.coord_lower.sqrt());
        s.tail_decay = rng.random_range(0.4..0.8);
        s.seed = seed;
        if make_subframe_frame(&s).is_ok() {
            return s;
        }
    }
}

/// Largest final-level l2 error over 20 seeded permutations.
fn permuted_final_error(f: &FrameFamily, v: &[f64], seed: u64) -> f64 {
    let levels: Vec<usize> = (1..=f.len()).collect();
    (0..20)
        .map(|p| {
            let pf = permute(f, &Permutation::random(f.len(), seed, p)).unwrap();
            diagnostics(&pf, v, &levels, &IndexSet::empty(), &tol())
                .unwrap()
                .final_l2_error()
                .unwrap()
        })
        .fold(0.0, f64::max)
}

fn criterion_7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut ok = true;
    let (mut finite, mut full) = (0, 0);
    let mut worst_final = 0.0f64;
    let mut min_slope = f64::INFINITY;
    for fam in 0..20u64 {
        let n_k = (fam % 4) as usize;
        let s = recipe(&mut rng, n_k, fam);
        let c = make_subframe_frame(&s).unwrap();
        let v: Vec<f64> = (0..s.dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        if n_k == 0 {
            finite += 1;
            let e = permuted_final_error(&c.family, &v, fam);
            worst_final = worst_final.max(e);
            ok &= e <= 1e-8;
        } else {
            full += 1;
            let levels: Vec<usize> = (n_k..n_k + s.dim).collect();
            let d = diagnostics(&c.family, &v, &levels, &c.ground_truth.k, &tol()).unwrap();
            let slope = d.trend.max_dual_norm.unwrap_or(f64::NAN);
            min_slope = min_slope.min(slope);
            ok &= slope > 0.0;
            let (trimmed, _) = trim_for_strong_method(&c.family, &c.ground_truth).unwrap();
            let e = permuted_final_error(&trimmed, &v, fam);
            worst_final = worst_final.max(e);
            ok &= e <= 1e-8;
        }
    }
    verdict(
        ok,
        format!(
            "{finite} finite-support and {full} full-support families; worst permuted final error {worst_final:.1e}, \
             min dual-norm log-slope {min_slope:.3}"
        ),
    )
}

fn criterion_8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let dim = rng.random_range(1..=16);
        let raw = common::synthesis(dim, random_spanning(&mut rng, dim, dim).vectors());
        let q = raw.qr().q();
        let vs: Vec<Vec<f64>> = (0..dim).map(|j| q.column(j).iter().copied().collect()).collect();
        let onb = FrameFamily::with_default_labels(dim, vs).unwrap();
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let levels: Vec<usize> = (1..=dim).collect();
        let d = diagnostics(&onb, &v, &levels, &IndexSet::empty(), &tol()).unwrap();
        for (&n, &e) in d.levels.iter().zip(&d.l2_errors) {
            let tail: f64 = onb.vectors()[n..].iter().map(|u| linalg::dot(u, &v).powi(2)).sum();
            worst = worst.max((e - tail).abs());
        }
    }
    verdict(worst <= 1e-12, format!("100 bases, max |l2_error - tail| {worst:.1e}"))
}

fn criterion_9() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut min_margin = f64::INFINITY;
    let mut energy_err = 0.0f64;
    for _ in 0..200 {
        let dim = rng.random_range(1..=8);
        let len = rng.random_range(dim..=2 * dim);
        let f = random_spanning(&mut rng, dim, len);
        let coords: Vec<usize> = (0..dim).filter(|_| rng.random_bool(0.5)).collect();
        let rank = coords.len();
        let p = OrthoProjector::coordinates(dim, &IndexSet::new(coords.clone(), dim).unwrap()).unwrap();
        let energy = projected_energy(&f, &p).unwrap();
        let direct: f64 = f.vectors().iter().map(|v| coords.iter().map(|&j| v[j] * v[j]).sum::<f64>()).sum();
        energy_err = energy_err.max((energy - direct).abs());
        let (_, b) = space_bounds(&f);
        min_margin = min_margin.min(rank as f64 * b - energy);
    }
    verdict(
        min_margin >= -1e-8 && energy_err <= 1e-12,
        format!("200 frames, min (rank B - energy) {min_margin:.3e}, energy vs direct sum {energy_err:.1e}"),
    )
}

fn pass_word(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

fn verify_bytes(suite: &str, trials: &str) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_with_io(["framekit", "verify", suite, "--trials", trials, "--seed", "7"], &mut out, &mut err);
    (code, out)
}

fn criterion_10() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for suite in Suite::ALL {
        let trials = suite.default_trials().to_string();
        let (c1, a) = verify_bytes(suite.name(), &trials);
        let (c2, b) = verify_bytes(suite.name(), &trials);
        let same = a == b && c1 == c2 && !a.is_empty();
        ok &= same;
        notes.push(format!("{} {}", suite.name(), if same { "identical" } else { "DIFFERS" }));
    }
    verdict(ok, notes.join(", "))
}

type Criterion = (u32, &'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "guaranteed Riesz frame bounds", criterion_1),
        (2, "union lower bound battery", criterion_2),
        (3, "complement projection battery", criterion_3),
        (4, "Riesz basis extraction", criterion_4),
        (5, "exhaustive subset oracle", criterion_5),
        (6, "failing-family witness", criterion_6),
        (7, "projection-method dichotomy", criterion_7),
        (8, "orthonormal tail identity", criterion_8),
        (9, "projected energy bound", criterion_9),
        (10, "verify determinism", criterion_10),
    ];
    let mut failed = 0;
    for (n, title, check) in criteria {
        let start = Instant::now();
        let v = check();
        println!(
            "criterion {n}: {} {title} ({}) [{:.2?}]",
            pass_word(v.passed),
            v.detail,
            start.elapsed()
        );
        failed += !v.passed as u32;
    }
    println!("acceptance: {}/10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
