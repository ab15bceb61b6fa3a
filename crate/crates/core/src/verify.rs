//! Seeded property batteries. Each suite draws its random instances from
//! per-trial streams of one seed, so reports are reproducible byte for byte.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::constructions::{
    make_block_riesz, make_failing_family, make_subframe_frame, ConstructionKind, ConstructionSpec, GuaranteedBounds,
};
use crate::error::{FrameError, Result};
use crate::frame::{
    optimal_bounds, project_family, projected_energy, BoundsKind, FrameFamily, IndexSet, OrthoProjector,
    ProjectionSide,
};
use crate::linalg::{self, TolerancePolicy};
use crate::projection::{diagnostics, permute, trim_for_strong_method, Permutation};
use crate::rng::stream_rng;
use crate::subframe::{
    classify_supports_with, extract_riesz_basis, partition_disjoint_support, riesz_frame_bound, verify_structure,
    ClassifyOptions, SubsetMode, DEFAULT_COORD_TOL, EXHAUSTIVE_LIMIT,
};

/// Slack for inequalities between measured and predicted bounds.
pub const BOUND_SLACK: f64 = 1e-8;
/// Permutations tried per family in the projection-method suite.
pub const PERMUTATIONS_PER_FAMILY: u64 = 20;
/// Largest allowed max/min ratio of dual norms for families without full-support vectors.
pub const DUAL_NORM_RATIO_LIMIT: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Prop23,
    Thm24,
    Cor26,
    Thm32,
    Thm41,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Prop23, Suite::Thm24, Suite::Cor26, Suite::Thm32, Suite::Thm41];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Prop23 => "prop23",
            Suite::Thm24 => "thm24",
            Suite::Cor26 => "cor26",
            Suite::Thm32 => "thm32",
            Suite::Thm41 => "thm41",
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Suite::Prop23 => 200,
            Suite::Thm24 => 50,
            Suite::Cor26 => 20,
            Suite::Thm32 => 50,
            Suite::Thm41 => 20,
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Suite::Prop23 => "lower bound of a family split by a projection; complement-projected frame sequences",
            Suite::Thm24 => "Riesz frames: basis extraction, projected h-vectors, support and coefficient window",
            Suite::Cor26 => "block Riesz frames against the closed-form Riesz frame bounds",
            Suite::Thm32 => "g/h/k decomposition, projected energy, failing families",
            Suite::Thm41 => "projection method: permutations, dual-norm growth, trimming",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = FrameError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                FrameError::InvalidInput(format!(
                    "unknown suite '{s}' (expected one of prop23, thm24, cor26, thm32, thm41)"
                ))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Informational checks are reported but do not affect the suite verdict.
    pub informational: bool,
    /// Worst observed value over all trials (`None` if no trial applied).
    pub observed: Option<f64>,
    pub threshold: f64,
    /// `>=`, `>` or `<=`: how `observed` is compared to `threshold`.
    pub relation: &'static str,
    /// Mean over instances; for 0/1 indicators this is the fraction that held.
    pub mean: Option<f64>,
    pub instances: usize,
    pub witness: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub description: &'static str,
    pub seed: u64,
    pub trials: usize,
    pub tolerances: TolerancePolicy,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// One line per check, for terminals.
    pub fn summary(&self) -> String {
        let mut out = format!(
            "suite {} seed {} trials {}: {}\n",
            self.suite,
            self.seed,
            self.trials,
            if self.passed { "PASS" } else { "FAIL" }
        );
        for c in &self.checks {
            let verdict = match (c.passed, c.informational) {
                (true, false) => "pass",
                (false, false) => "FAIL",
                (true, true) => "info",
                (false, true) => "info*",
            };
            let observed = c.observed.map_or("n/a".to_string(), |v| format!("{v:e}"));
            let mean = c.mean.map_or("n/a".to_string(), |v| format!("{v:e}"));
            out.push_str(&format!(
                "  [{verdict}] {}: worst {observed} {} {:e} (mean {mean}, {} instance(s))\n",
                c.name, c.relation, c.threshold, c.instances
            ));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Relation {
    AtLeast,
    Above,
    AtMost,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::AtLeast => ">=",
            Relation::Above => ">",
            Relation::AtMost => "<=",
        }
    }

    fn holds(self, x: f64, t: f64) -> bool {
        match self {
            Relation::AtLeast => x >= t,
            Relation::Above => x > t,
            Relation::AtMost => x <= t,
        }
    }

    /// True if `a` is a worse observation than `b`.
    fn worse(self, a: f64, b: f64) -> bool {
        match self {
            Relation::AtLeast | Relation::Above => a < b,
            Relation::AtMost => a > b,
        }
    }
}

/// One observation of a named check within a trial.
struct Obs {
    name: &'static str,
    value: f64,
    witness: Value,
}

fn obs(name: &'static str, value: f64, witness: &Value) -> Obs {
    Obs {
        name,
        value,
        witness: witness.clone(),
    }
}

struct CheckSpec {
    name: &'static str,
    relation: Relation,
    threshold: f64,
    informational: bool,
}

const fn spec(name: &'static str, relation: Relation, threshold: f64) -> CheckSpec {
    CheckSpec {
        name,
        relation,
        threshold,
        informational: false,
    }
}

const fn info(name: &'static str, relation: Relation, threshold: f64) -> CheckSpec {
    CheckSpec {
        name,
        relation,
        threshold,
        informational: true,
    }
}

fn aggregate(specs: &[CheckSpec], per_trial: Vec<Vec<Obs>>) -> Vec<Check> {
    specs
        .iter()
        .map(|s| {
            let mut worst: Option<(f64, Value)> = None;
            let mut passed = true;
            let mut instances = 0;
            let mut sum = 0.0;
            for o in per_trial.iter().flatten().filter(|o| o.name == s.name) {
                instances += 1;
                sum += o.value;
                let ok = !o.value.is_nan() && s.relation.holds(o.value, s.threshold);
                passed &= ok;
                let replace = match &worst {
                    None => true,
                    Some((w, _)) => o.value.is_nan() || (!w.is_nan() && s.relation.worse(o.value, *w)),
                };
                if replace {
                    worst = Some((o.value, o.witness.clone()));
                }
            }
            let (observed, witness) = match worst {
                Some((v, w)) => (Some(v), w),
                None => (None, Value::Null),
            };
            Check {
                name: s.name.to_string(),
                passed,
                informational: s.informational,
                observed,
                threshold: s.threshold,
                relation: s.relation.symbol(),
                mean: (instances > 0).then(|| sum / instances as f64),
                instances,
                witness,
            }
        })
        .collect()
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// `len` vectors in `R^dim` with i.i.d. uniform entries, redrawn until they span.
pub fn random_spanning_family(rng: &mut ChaCha8Rng, dim: usize, len: usize, tol: &TolerancePolicy) -> FrameFamily {
    assert!(len >= dim, "a spanning family needs at least dim vectors");
    loop {
        let vs: Vec<Vec<f64>> = (0..len).map(|_| random_vector(rng, dim)).collect();
        let f = FrameFamily::with_default_labels(dim, vs).expect("finite entries");
        let (basis, _) = linalg::orthonormalize(&f, tol);
        if basis.len() == dim {
            return f;
        }
    }
}

/// Identity plus a uniform perturbation of size `spread`, redrawn until it is a
/// well-conditioned basis.
pub fn random_riesz_basis(rng: &mut ChaCha8Rng, dim: usize, spread: f64, tol: &TolerancePolicy) -> FrameFamily {
    loop {
        let vs: Vec<Vec<f64>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| if i == j { 1.0 } else { 0.0 } + rng.random_range(-spread..=spread))
                    .collect()
            })
            .collect();
        let f = FrameFamily::with_default_labels(dim, vs).expect("finite entries");
        if let Ok(b) = optimal_bounds(&f, BoundsKind::RieszConstants, tol) {
            if b.lower > 1e-3 {
                return f;
            }
        }
    }
}

pub fn random_orthonormal_basis(rng: &mut ChaCha8Rng, dim: usize, tol: &TolerancePolicy) -> FrameFamily {
    let f = random_spanning_family(rng, dim, dim, tol);
    linalg::orthonormalize(&f, tol).0
}

fn random_subset(rng: &mut ChaCha8Rng, n: usize, size: usize) -> IndexSet {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx.truncate(size);
    IndexSet::from_unsorted(idx, n).expect("indices in range")
}

fn riesz_mode(len: usize, seed: u64) -> SubsetMode {
    if len <= EXHAUSTIVE_LIMIT.min(14) {
        SubsetMode::Exhaustive
    } else {
        SubsetMode::Sampled { n_samples: 256, seed }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyConfig {
    pub trials: usize,
    pub seed: u64,
    pub tol: TolerancePolicy,
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<SuiteReport> {
    cfg.tol.validate()?;
    let (specs, per_trial): (Vec<CheckSpec>, Vec<Vec<Obs>>) = match suite {
        Suite::Prop23 => (prop23_checks(), run_trials(cfg, prop23_trial)?),
        Suite::Thm24 => (thm24_checks(), run_trials(cfg, thm24_trial)?),
        Suite::Cor26 => {
            let mut obs = run_trials(cfg, cor26_trial)?;
            obs.push(cor26_formula_instances(&cfg.tol)?);
            (cor26_checks(), obs)
        }
        Suite::Thm32 => (thm32_checks(), run_trials(cfg, thm32_trial)?),
        Suite::Thm41 => (thm41_checks(), run_trials(cfg, thm41_trial)?),
    };
    let checks = aggregate(&specs, per_trial);
    let passed = checks.iter().all(|c| c.passed || c.informational);
    Ok(SuiteReport {
        suite,
        description: suite.description(),
        seed: cfg.seed,
        trials: cfg.trials,
        tolerances: cfg.tol,
        checks,
        passed,
    })
}

fn run_trials(
    cfg: &VerifyConfig,
    trial: fn(u64, &mut ChaCha8Rng, &TolerancePolicy) -> Result<Vec<Obs>>,
) -> Result<Vec<Vec<Obs>>> {
    (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(cfg.seed, t);
            trial(t, &mut rng, &cfg.tol)
        })
        .collect()
}

fn prop23_checks() -> Vec<CheckSpec> {
    vec![
        spec("union_lower_margin", Relation::AtLeast, -BOUND_SLACK),
        spec("union_lower_ratio", Relation::AtLeast, 1.0),
        spec("complement_lower_margin", Relation::AtLeast, -BOUND_SLACK),
        spec("complement_upper_margin", Relation::AtLeast, -BOUND_SLACK),
    ]
}

fn prop23_trial(t: u64, rng: &mut ChaCha8Rng, tol: &TolerancePolicy) -> Result<Vec<Obs>> {
    let dim = rng.random_range(2..=8);
    let len = rng.random_range(dim..=2 * dim);
    let f = random_spanning_family(rng, dim, len, tol);
    let size = rng.random_range(1..dim);
    let delta = random_subset(rng, len, size);
    let whole = optimal_bounds(&f, BoundsKind::FrameForSpace, tol)?;
    let (a, b) = (whole.lower, whole.upper);
    let part = f.subfamily(&delta);
    let a1 = optimal_bounds(&part, BoundsKind::FrameSequence, tol)?.lower;
    let p = OrthoProjector::span_of(&part, tol);
    let rest = project_family(&f.without(&delta), &p, ProjectionSide::Complement)?;
    let rest_bounds = optimal_bounds(&rest, BoundsKind::FrameSequence, tol)?;
    let predicted = a1 * rest_bounds.lower / (8.0 * b);
    let w = json!({"trial": t, "dim": dim, "len": len, "delta": delta, "A": a, "B": b, "A1": a1, "A2": rest_bounds.lower});
    Ok(vec![
        obs("union_lower_margin", a - predicted, &w),
        obs("union_lower_ratio", a / predicted, &w),
        obs("complement_lower_margin", rest_bounds.lower - a, &w),
        obs("complement_upper_margin", b - rest_bounds.upper, &w),
    ])
}

fn span_residual(f: &FrameFamily, basis: &FrameFamily, tol: &TolerancePolicy) -> Result<f64> {
    let p = OrthoProjector::span_of(basis, tol);
    let mut worst = 0.0f64;
    for v in f.vectors() {
        worst = worst.max(linalg::norm(&p.apply_complement(v)?));
    }
    Ok(worst)
}

fn random_block_spec(rng: &mut ChaCha8Rng, dim_range: (usize, usize), max_len: usize, max_levels: usize) -> ConstructionSpec {
    let dim = rng.random_range(dim_range.0..=dim_range.1);
    let mut s = ConstructionSpec::new(ConstructionKind::BlockRiesz, dim);
    s.levels = rng.random_range(1..=max_levels);
    s.max_support = rng.random_range(1..=3.min(dim / 2).max(1));
    s.coord_lower = uniform(rng, 0.25, 1.0);
    s.coord_upper = uniform(rng, s.coord_lower, 2.0);
    s.n_h = ((max_len - dim) / s.levels).max(1);
    s.seed = rng.random();
    s
}

fn thm24_checks() -> Vec<CheckSpec> {
    vec![
        spec("basis_rank_deficit", Relation::AtMost, 0.0),
        spec("basis_lower_constant", Relation::Above, 0.0),
        spec("span_residual", Relation::AtMost, BOUND_SLACK),
        spec("projected_h_lower", Relation::Above, 0.0),
        spec("support_excess", Relation::AtMost, 0.0),
        info("window_literal", Relation::AtLeast, 1.0),
        info("window_squared", Relation::AtLeast, 1.0),
    ]
}

fn thm24_trial(t: u64, rng: &mut ChaCha8Rng, tol: &TolerancePolicy) -> Result<Vec<Obs>> {
    let s = random_block_spec(rng, (4, 6), 12, 2);
    let c = make_block_riesz(&s)?;
    let f = &c.family;
    let w = json!({"trial": t, "spec": s});
    let (idx, consts) = extract_riesz_basis(f, tol)?;
    let basis = f.subfamily(&idx);
    let residual = span_residual(f, &basis, tol)?;
    let dec = classify_supports_with(f, &idx, &ClassifyOptions::default())?;
    let structure = verify_structure(f, &dec, 64, s.seed, tol)?;
    let riesz = riesz_frame_bound(f, riesz_mode(f.len(), s.seed), tol)?;
    let window = structure.window_check(riesz.riesz_lower, riesz.riesz_upper);
    Ok(vec![
        obs("basis_rank_deficit", (f.dim() as f64 - idx.len() as f64).abs(), &w),
        obs("basis_lower_constant", consts.lower, &w),
        obs("span_residual", residual, &w),
        obs("projected_h_lower", structure.empirical_a0, &w),
        obs("support_excess", structure.max_support as f64 - s.max_support as f64, &w),
        obs("window_literal", window.literal as u8 as f64, &w),
        obs("window_squared", window.squared as u8 as f64, &w),
    ])
}

fn cor26_checks() -> Vec<CheckSpec> {
    vec![
        spec("formula_instances_exact", Relation::AtLeast, 1.0),
        spec("lower_bound_ratio", Relation::AtLeast, 1.0),
        spec("upper_bound_margin", Relation::AtLeast, -BOUND_SLACK),
        spec("partition_overlaps", Relation::AtMost, 0.0),
        spec("partition_excess_groups", Relation::AtMost, 0.0),
    ]
}

fn cor26_formula_instances(tol: &TolerancePolicy) -> Result<Vec<Obs>> {
    let mut out = Vec::new();
    for (big_k, lower, upper) in [(1usize, 1.0 / 16.0, 2.0), (2, 1.0 / 48.0, 3.0)] {
        let g = GuaranteedBounds::from_params(1, big_k, 1.0, 1.0);
        let exact = g.lower == lower && g.upper == upper;
        let mut s = ConstructionSpec::new(ConstructionKind::BlockRiesz, 4);
        s.max_support = big_k;
        let c = make_block_riesz(&s)?;
        let r = riesz_frame_bound(&c.family, SubsetMode::Exhaustive, tol)?;
        let w = json!({"instance": format!("k=1,K={big_k},A=B=1,dim=4"), "guaranteed": g, "riesz_lower": r.riesz_lower, "riesz_upper": r.riesz_upper});
        out.push(obs("formula_instances_exact", exact as u8 as f64, &w));
        out.push(obs("lower_bound_ratio", r.riesz_lower / g.lower, &w));
        out.push(obs("upper_bound_margin", g.upper - r.riesz_upper, &w));
    }
    Ok(out)
}

fn cor26_trial(t: u64, rng: &mut ChaCha8Rng, tol: &TolerancePolicy) -> Result<Vec<Obs>> {
    let s = random_block_spec(rng, (4, 8), 12, 3);
    let c = make_block_riesz(&s)?;
    let f = &c.family;
    let g = c.guaranteed.expect("block constructions carry guaranteed bounds");
    let r = riesz_frame_bound(f, riesz_mode(f.len(), s.seed), tol)?;
    let w = json!({"trial": t, "spec": s, "guaranteed": g, "riesz_lower": r.riesz_lower, "riesz_upper": r.riesz_upper});

    let basis = f.subfamily(&c.ground_truth.g);
    let extras = f.subfamily(&c.ground_truth.h);
    let groups = partition_disjoint_support(&extras, &basis, DEFAULT_COORD_TOL)?;
    let mut overlaps = 0usize;
    for group in &groups {
        let mut used = vec![false; f.dim()];
        for i in group.iter() {
            for (n, x) in extras.vector(i).iter().enumerate() {
                if x.abs() > DEFAULT_COORD_TOL {
                    overlaps += used[n] as usize;
                    used[n] = true;
                }
            }
        }
    }
    Ok(vec![
        obs("lower_bound_ratio", r.riesz_lower / g.lower, &w),
        obs("upper_bound_margin", g.upper - r.riesz_upper, &w),
        obs("partition_overlaps", overlaps as f64, &w),
        obs("partition_excess_groups", groups.len() as f64 - s.levels as f64, &w),
    ])
}

fn random_recipe(rng: &mut ChaCha8Rng, n_k: usize) -> ConstructionSpec {
    let dim = rng.random_range(6..=10);
    let mut s = ConstructionSpec::new(ConstructionKind::SubframeRecipe, dim);
    let m = rng.random_range(1..=2);
    s.m = Some(m);
    s.max_support = rng.random_range(1..=2);
    s.n_h = rng.random_range(1..=3.min((dim - m) / s.max_support));
    s.n_k = n_k;
    s.coord_lower = uniform(rng, 0.25, 1.0);
    s.coord_upper = uniform(rng, s.coord_lower, 2.0);
    s.h2_decay = uniform(rng, 0.05, 0.9 * s.coord_lower.sqrt());
    s.tail_decay = uniform(rng, 0.4, 0.8);
    s.seed = rng.random();
    s
}

fn thm32_checks() -> Vec<CheckSpec> {
    vec![
        spec("label_mismatches", Relation::AtMost, 0.0),
        spec("h2_energy_error", Relation::AtMost, 1e-12),
        spec("riesz_part_lower", Relation::Above, 1e-12),
        spec("projected_energy_margin", Relation::AtLeast, -BOUND_SLACK),
        spec("failing_column_window", Relation::Above, 0.0),
        spec("failing_below_ceiling", Relation::Above, 0.0),
        spec("failing_decrease", Relation::Above, 0.0),
    ]
}

fn thm32_trial(t: u64, rng: &mut ChaCha8Rng, tol: &TolerancePolicy) -> Result<Vec<Obs>> {
    let mut out = Vec::new();
    let n_k = rng.random_range(0..=3);
    let s = random_recipe(rng, n_k);
    let c = make_subframe_frame(&s)?;
    let f = &c.family;
    let w = json!({"trial": t, "spec": s});
    let opts = ClassifyOptions {
        g_floor: s.coord_lower.sqrt(),
        ..ClassifyOptions::default()
    };
    let dec = classify_supports_with(f, &c.ground_truth.g, &opts)?;
    let gt = &c.ground_truth;
    let mismatches = (dec.h != gt.h) as u8 + (dec.k != gt.k) as u8 + (dec.m0 != gt.m0) as u8;
    out.push(obs("label_mismatches", mismatches as f64, &w));
    out.push(obs("h2_energy_error", (dec.h2_energy - gt.h2_energy).abs(), &w));

    let mut riesz_part: Vec<Vec<f64>> = gt.g.iter().map(|i| f.vector(i).to_vec()).collect();
    riesz_part.extend(dec.h_split.iter().map(|h| h.h1.clone()));
    let riesz_part = FrameFamily::with_default_labels(f.dim(), riesz_part)?;
    let r = riesz_frame_bound(&riesz_part, riesz_mode(riesz_part.len(), s.seed), tol)?;
    out.push(obs("riesz_part_lower", r.riesz_lower, &w));

    // projected energy against a random coordinate projector
    let dim = rng.random_range(2..=8);
    let len = rng.random_range(dim..=2 * dim);
    let g = random_spanning_family(rng, dim, len, tol);
    let rank = rng.random_range(1..=dim);
    let coords = random_subset(rng, dim, rank);
    let p = OrthoProjector::coordinates(dim, &coords)?;
    let b = optimal_bounds(&g, BoundsKind::FrameForSpace, tol)?.upper;
    let energy = projected_energy(&g, &p)?;
    let we = json!({"trial": t, "dim": dim, "len": len, "coords": coords, "B": b, "energy": energy});
    out.push(obs("projected_energy_margin", rank as f64 * b - energy, &we));

    let tail = uniform(rng, 0.5, 0.9);
    let mut lowers = Vec::new();
    for big_m in [2usize, 4, 8] {
        let mut fs = ConstructionSpec::new(ConstructionKind::FailingFamily, 16);
        fs.m = Some(big_m);
        fs.tail_decay = tail;
        let fc = make_failing_family(&fs)?;
        let d = fc.designed_failure.expect("failing families name a subset");
        let wf = json!({"trial": t, "m": big_m, "tail_decay": tail, "column_sums": d.column_sums, "measured_lower": d.measured_lower});
        let window = d
            .column_sums
            .iter()
            .enumerate()
            .map(|(i, &x)| x.min(1.0 / (i + 1) as f64 - x))
            .fold(f64::INFINITY, f64::min);
        out.push(obs("failing_column_window", window, &wf));
        let measured = optimal_bounds(&fc.family.subfamily(&d.subset), BoundsKind::FrameSequence, tol)?.lower;
        out.push(obs("failing_below_ceiling", d.bound_ceiling - measured, &wf));
        lowers.push(measured);
    }
    let wd = json!({"trial": t, "tail_decay": tail, "m": [2, 4, 8], "measured_lower": lowers});
    out.push(obs("failing_decrease", (lowers[0] - lowers[1]).min(lowers[1] - lowers[2]), &wd));
    Ok(out)
}

fn thm41_checks() -> Vec<CheckSpec> {
    vec![
        spec("onb_tail_identity_error", Relation::AtMost, 1e-12),
        spec("riesz_basis_final_error", Relation::AtMost, 1e-10),
        info("riesz_basis_monotone", Relation::AtLeast, 1.0),
        spec("finite_support_final_error", Relation::AtMost, BOUND_SLACK),
        info("finite_support_error_slope", Relation::AtMost, 0.0),
        spec("finite_support_dual_ratio", Relation::AtMost, DUAL_NORM_RATIO_LIMIT),
        spec("full_support_dual_slope", Relation::Above, 0.0),
        spec("trimmed_final_error", Relation::AtMost, BOUND_SLACK),
        info("trimmed_monotone_after_transient", Relation::AtLeast, 1.0),
    ]
}

fn is_non_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-14)
}

/// Worst final-level error and worst error slope over seeded random permutations.
fn permutation_sweep(f: &FrameFamily, v: &[f64], seed: u64, tol: &TolerancePolicy) -> Result<(f64, f64)> {
    let levels: Vec<usize> = (1..=f.len()).collect();
    let mut final_err = 0.0f64;
    let mut slope = f64::NEG_INFINITY;
    for p in 0..PERMUTATIONS_PER_FAMILY {
        let pf = permute(f, &Permutation::random(f.len(), seed, p))?;
        let d = diagnostics(&pf, v, &levels, &IndexSet::empty(), tol)?;
        final_err = final_err.max(d.final_l2_error().unwrap_or(f64::NAN));
        if let Some(s) = d.trend.l2_error {
            slope = slope.max(s);
        }
    }
    Ok((final_err, slope))
}

fn thm41_trial(t: u64, rng: &mut ChaCha8Rng, tol: &TolerancePolicy) -> Result<Vec<Obs>> {
    let mut out = Vec::new();

    let dim = rng.random_range(2..=16);
    let onb = random_orthonormal_basis(rng, dim, tol);
    let v = random_vector(rng, dim);
    let levels: Vec<usize> = (1..=dim).collect();
    let d = diagnostics(&onb, &v, &levels, &IndexSet::empty(), tol)?;
    let err = d
        .levels
        .iter()
        .zip(&d.l2_errors)
        .map(|(&n, &e)| {
            let tail: f64 = onb.vectors()[n..].iter().map(|q| linalg::dot(q, &v).powi(2)).sum();
            (e - tail).abs()
        })
        .fold(0.0, f64::max);
    out.push(obs("onb_tail_identity_error", err, &json!({"trial": t, "dim": dim})));

    let dim = rng.random_range(2..=10);
    let rb = random_riesz_basis(rng, dim, 0.3, tol);
    let v = random_vector(rng, dim);
    let levels: Vec<usize> = (1..=dim).collect();
    let d = diagnostics(&rb, &v, &levels, &IndexSet::empty(), tol)?;
    let w = json!({"trial": t, "dim": dim, "l2_errors": d.l2_errors});
    out.push(obs("riesz_basis_final_error", d.final_l2_error().unwrap_or(f64::NAN), &w));
    out.push(obs("riesz_basis_monotone", is_non_increasing(&d.l2_errors) as u8 as f64, &w));

    let n_k = (t % 4) as usize;
    let s = random_recipe(rng, n_k);
    let c = make_subframe_frame(&s)?;
    let f = &c.family;
    let v = random_vector(rng, s.dim);
    let w = json!({"trial": t, "spec": s});
    if n_k == 0 {
        let (final_err, slope) = permutation_sweep(f, &v, s.seed, tol)?;
        out.push(obs("finite_support_final_error", final_err, &w));
        out.push(obs("finite_support_error_slope", slope, &w));
        let levels: Vec<usize> = (1..=f.len()).collect();
        let d = diagnostics(f, &v, &levels, &IndexSet::range(0, 1), tol)?;
        let hi = d.dual_norms.iter().copied().fold(0.0, f64::max);
        let lo = d.dual_norms.iter().copied().fold(f64::INFINITY, f64::min);
        out.push(obs("finite_support_dual_ratio", hi / lo, &w));
    } else {
        // Stop before the last basis vector: it completes the span.
        let levels: Vec<usize> = (n_k..n_k + s.dim).collect();
        let d = diagnostics(f, &v, &levels, &c.ground_truth.k, tol)?;
        let wd = json!({"trial": t, "spec": s, "dual_norms": d.dual_norms});
        out.push(obs("full_support_dual_slope", d.trend.max_dual_norm.unwrap_or(f64::NAN), &wd));

        let (trimmed, _) = trim_for_strong_method(f, &c.ground_truth)?;
        let (final_err, _) = permutation_sweep(&trimmed, &v, s.seed, tol)?;
        out.push(obs("trimmed_final_error", final_err, &w));
        let levels: Vec<usize> = (1..=trimmed.len()).collect();
        let d = diagnostics(&trimmed, &v, &levels, &IndexSet::empty(), tol)?;
        let skip = c.ground_truth.m0.min(d.l2_errors.len());
        let wm = json!({"trial": t, "spec": s, "l2_errors": d.l2_errors});
        out.push(obs(
            "trimmed_monotone_after_transient",
            is_non_increasing(&d.l2_errors[skip..]) as u8 as f64,
            &wm,
        ));
    }
    Ok(out)
}
