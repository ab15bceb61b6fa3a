//! Seeded generators for block Riesz frames, frames with the subframe
//! property built from a Riesz basis plus perturbations, and families that
//! fail it. Every generator verifies its own output before returning.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::frame::{
    optimal_bounds, worst_residual, BoundsKind, FrameBounds, FrameFamily, IndexSet, OrthoProjector, ProjectionSide,
};
use crate::linalg::{self, norm, TolerancePolicy};
use crate::rng::stream_rng;
use crate::subframe::{HSplit, SubframeDecomposition, DEFAULT_COORD_TOL, DEFAULT_SUPPORT_FRACTION};

/// Residual allowed when checking that two families live in complementary subspaces.
pub const CONTAINMENT_TOL: f64 = 1e-10;

/// Target column energy for designated coordinates of a failing family, as a
/// fraction of `1/m`.
pub const FAILING_COLUMN_FRACTION: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionKind {
    Onb,
    BlockRiesz,
    SubframeRecipe,
    FailingFamily,
}

fn default_one_usize() -> usize {
    1
}
fn default_one() -> f64 {
    1.0
}
fn default_half() -> f64 {
    0.5
}

/// Parameters of a generated family. Field names follow the JSON spec file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionSpec {
    pub kind: ConstructionKind,
    pub dim: usize,
    /// Number of levels of nested blocks.
    #[serde(rename = "k", default = "default_one_usize")]
    pub levels: usize,
    /// Largest support of a generated vector.
    #[serde(rename = "K", default = "default_one_usize")]
    pub max_support: usize,
    /// Squared coordinate magnitudes lie in `[A, B]`.
    #[serde(rename = "A", default = "default_one")]
    pub coord_lower: f64,
    #[serde(rename = "B", default = "default_one")]
    pub coord_upper: f64,
    #[serde(default)]
    pub n_h: usize,
    #[serde(default)]
    pub n_k: usize,
    #[serde(default = "default_half")]
    pub h2_decay: f64,
    #[serde(default = "default_half")]
    pub tail_decay: f64,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl ConstructionSpec {
    pub fn new(kind: ConstructionKind, dim: usize) -> Self {
        ConstructionSpec {
            kind,
            dim,
            levels: 1,
            max_support: 1,
            coord_lower: 1.0,
            coord_upper: 1.0,
            n_h: 0,
            n_k: 0,
            h2_decay: 0.5,
            tail_decay: 0.5,
            m: None,
            seed: 0,
        }
    }

    fn infeasible(reason: impl Into<String>) -> FrameError {
        FrameError::InfeasibleSpec {
            reason: reason.into(),
            min_dim: None,
        }
    }

    fn check_common(&self, expected: ConstructionKind) -> Result<()> {
        if self.kind != expected {
            return Err(FrameError::InvalidInput(format!(
                "kind: expected {expected:?}, got {:?}",
                self.kind
            )));
        }
        if self.dim == 0 {
            return Err(Self::infeasible("dim must be at least 1"));
        }
        let (a, b) = (self.coord_lower, self.coord_upper);
        if !(a.is_finite() && b.is_finite() && a > 0.0 && a <= b) {
            return Err(Self::infeasible(format!("need 0 < A <= B, got A={a}, B={b}")));
        }
        if self.max_support == 0 || self.max_support > self.dim {
            return Err(Self::infeasible(format!(
                "need 1 <= K <= dim, got K={} with dim={}",
                self.max_support, self.dim
            )));
        }
        for (name, d) in [("h2_decay", self.h2_decay), ("tail_decay", self.tail_decay)] {
            if !(d > 0.0 && d < 1.0) {
                return Err(Self::infeasible(format!("{name} must lie in (0, 1), got {d}")));
            }
        }
        Ok(())
    }
}

/// Closed-form Riesz frame bounds for `k` levels of `K`-sparse blocks with
/// squared coordinates in `[A, B]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuaranteedBounds {
    #[serde(rename = "D")]
    pub d: f64,
    pub lower: f64,
    pub upper: f64,
}

impl GuaranteedBounds {
    /// `D = K B / A`, lower `1 / (D^k 8^k prod_{i=1..k} (1 + i D))`, upper `1 + k D`.
    pub fn from_params(levels: usize, max_support: usize, a: f64, b: f64) -> Self {
        let d = max_support as f64 * b / a;
        let mut denom = 1.0;
        for i in 1..=levels {
            denom *= d * 8.0 * (1.0 + i as f64 * d);
        }
        GuaranteedBounds {
            d,
            lower: 1.0 / denom,
            upper: 1.0 + levels as f64 * d,
        }
    }

    pub fn for_spec(spec: &ConstructionSpec) -> Self {
        Self::from_params(spec.levels, spec.max_support, spec.coord_lower, spec.coord_upper)
    }
}

/// A named subset whose frame-sequence lower bound is designed to fall below a ceiling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignedFailure {
    pub subset: IndexSet,
    pub bound_ceiling: f64,
    pub measured_lower: f64,
    /// `sum_n |k_n(j_m)|^2` for the designated coordinates `j_1, j_2, ...`.
    pub column_sums: Vec<f64>,
    pub designated_coordinates: Vec<usize>,
}

/// Which reading of the coordinate window the generated coefficients satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoordinateWindow {
    /// `A <= |f(n)|^2 <= B`
    pub squared: bool,
    /// `A <= |f(n)| <= B`
    pub unsquared: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstructedFrame {
    pub family: FrameFamily,
    pub ground_truth: SubframeDecomposition,
    pub guaranteed: Option<GuaranteedBounds>,
    pub designed_failure: Option<DesignedFailure>,
    pub coordinate_window: Option<CoordinateWindow>,
    pub spec: Option<ConstructionSpec>,
}

/// On-disk form: the frame file fields plus construction metadata.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstructedFrameFile {
    dim: usize,
    vectors: Vec<Vec<f64>>,
    labels: Vec<String>,
    ground_truth: SubframeDecomposition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    guaranteed: Option<GuaranteedBounds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    designed_failure: Option<DesignedFailure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coordinate_window: Option<CoordinateWindow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spec: Option<ConstructionSpec>,
}

impl Serialize for ConstructedFrame {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ConstructedFrameFile {
            dim: self.family.dim(),
            vectors: self.family.vectors().to_vec(),
            labels: self.family.labels().to_vec(),
            ground_truth: self.ground_truth.clone(),
            guaranteed: self.guaranteed,
            designed_failure: self.designed_failure.clone(),
            coordinate_window: self.coordinate_window,
            spec: self.spec.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConstructedFrame {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = ConstructedFrameFile::deserialize(d)?;
        let family = FrameFamily::new(file.dim, file.vectors, file.labels).map_err(serde::de::Error::custom)?;
        file.ground_truth
            .check_partition(family.len())
            .map_err(serde::de::Error::custom)?;
        Ok(ConstructedFrame {
            family,
            ground_truth: file.ground_truth,
            guaranteed: file.guaranteed,
            designed_failure: file.designed_failure,
            coordinate_window: file.coordinate_window,
            spec: file.spec,
        })
    }
}

fn unit(dim: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[i] = 1.0;
    e
}

fn labeled(prefix: &str, range: std::ops::Range<usize>) -> Vec<String> {
    range.map(|i| format!("{prefix}:{i}")).collect()
}

fn plain_decomposition(len: usize, g: IndexSet) -> Result<SubframeDecomposition> {
    let h = g.complement(len);
    Ok(SubframeDecomposition {
        g,
        h,
        k: IndexSet::empty(),
        m0: 0,
        h_split: Vec::new(),
        h2_energy: 0.0,
    })
}

fn signed_magnitude(rng: &mut impl Rng, a: f64, b: f64) -> f64 {
    let (lo, hi) = (a.sqrt(), b.sqrt());
    let mag = if hi > lo { rng.random_range(lo..=hi) } else { lo };
    if rng.random_bool(0.5) {
        mag
    } else {
        -mag
    }
}

fn window_of(values: impl Iterator<Item = f64>, a: f64, b: f64) -> CoordinateWindow {
    let mut w = CoordinateWindow {
        squared: true,
        unsquared: true,
    };
    for x in values {
        let m = x.abs();
        if m <= DEFAULT_COORD_TOL {
            continue;
        }
        let sq = m * m;
        w.squared &= sq >= a * (1.0 - 1e-12) && sq <= b * (1.0 + 1e-12);
        w.unsquared &= m >= a * (1.0 - 1e-12) && m <= b * (1.0 + 1e-12);
    }
    w
}

fn support_of(v: &[f64]) -> Vec<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, x)| x.abs() > DEFAULT_COORD_TOL)
        .map(|(n, _)| n)
        .collect()
}

/// Standard basis of `R^dim`.
pub fn make_onb(dim: usize) -> Result<ConstructedFrame> {
    if dim == 0 {
        return Err(FrameError::InvalidInput("dim must be at least 1".into()));
    }
    let family = FrameFamily::new(dim, (0..dim).map(|i| unit(dim, i)).collect(), labeled("g", 0..dim))?;
    Ok(ConstructedFrame {
        family,
        ground_truth: plain_decomposition(dim, IndexSet::range(0, dim))?,
        guaranteed: Some(GuaranteedBounds::from_params(0, 1, 1.0, 1.0)),
        designed_failure: None,
        coordinate_window: None,
        spec: None,
    })
}

/// An orthonormal basis followed by `k` levels of disjointly supported blocks.
///
/// Level-1 blocks have `K >> (k - 1)` coordinates, each of magnitude drawn
/// uniformly from `[sqrt A, sqrt B]` with random sign, and sit on every other
/// block of coordinates starting from the second. Each later level merges
/// consecutive pairs of the previous level with random signs while the basis
/// support stays within `K`.
pub fn make_block_riesz(spec: &ConstructionSpec) -> Result<ConstructedFrame> {
    spec.check_common(ConstructionKind::BlockRiesz)?;
    let dim = spec.dim;
    let (k, big_k) = (spec.levels, spec.max_support);
    let (a, b) = (spec.coord_lower, spec.coord_upper);
    if k == 0 {
        return Err(ConstructionSpec::infeasible("need at least one level (k >= 1)"));
    }
    if a > 1.0 {
        return Err(ConstructionSpec::infeasible(format!(
            "the upper bound 1 + kKB/A only covers the basis when A <= 1, got A={a}"
        )));
    }
    let shift = (k - 1).min(usize::BITS as usize - 1);
    let s1 = (big_k >> shift).max(1);
    let mut count = dim / (2 * s1);
    if spec.n_h > 0 {
        count = count.min(spec.n_h);
    }
    if count == 0 {
        return Err(FrameError::InfeasibleSpec {
            reason: format!("no room for a level-1 block of size {s1} in dimension {dim}"),
            min_dim: Some(2 * s1),
        });
    }

    let mut rng = stream_rng(spec.seed, 0);
    let mut levels: Vec<Vec<Vec<f64>>> = Vec::with_capacity(k);
    let level1: Vec<Vec<f64>> = (0..count)
        .map(|j| {
            let mut v = vec![0.0; dim];
            for x in &mut v[(2 * j + 1) * s1..(2 * j + 2) * s1] {
                *x = signed_magnitude(&mut rng, a, b);
            }
            v
        })
        .collect();
    levels.push(level1);
    for _ in 1..k {
        let prev = levels.last().expect("at least one level");
        let mut next = Vec::new();
        let mut j = 0;
        while j < prev.len() {
            let merged_support = if j + 1 < prev.len() {
                support_of(&prev[j]).len() + support_of(&prev[j + 1]).len()
            } else {
                usize::MAX
            };
            let s0 = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            if merged_support <= big_k {
                let s1 = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                next.push(prev[j].iter().zip(&prev[j + 1]).map(|(x, y)| s0 * x + s1 * y).collect());
                j += 2;
            } else {
                next.push(prev[j].iter().map(|x| s0 * x).collect());
                j += 1;
            }
        }
        levels.push(next);
    }

    // post-verification
    let mut window_values = Vec::new();
    for level in &levels {
        let mut used = vec![false; dim];
        for v in level {
            let supp = support_of(v);
            if supp.len() > big_k {
                return Err(FrameError::WrongStructure(format!(
                    "generated block has support {} > K={big_k}",
                    supp.len()
                )));
            }
            for n in supp {
                if used[n] {
                    return Err(FrameError::WrongStructure("generated blocks overlap".into()));
                }
                used[n] = true;
                window_values.push(v[n]);
            }
        }
    }
    let window = window_of(window_values.into_iter(), a, b);
    if !window.squared {
        return Err(FrameError::WrongStructure("coordinate window violated".into()));
    }

    let mut vectors: Vec<Vec<f64>> = (0..dim).map(|i| unit(dim, i)).collect();
    vectors.extend(levels.into_iter().flatten());
    let len = vectors.len();
    let mut labels = labeled("g", 0..dim);
    labels.extend(labeled("h", 0..len - dim));
    let family = FrameFamily::new(dim, vectors, labels)?;
    Ok(ConstructedFrame {
        family,
        ground_truth: plain_decomposition(len, IndexSet::range(0, dim))?,
        guaranteed: Some(GuaranteedBounds::for_spec(spec)),
        designed_failure: None,
        coordinate_window: Some(window),
        spec: Some(spec.clone()),
    })
}

/// Geometric full-support vector with one of a few sign patterns, normalized.
fn tail_vector(dim: usize, decay: f64, pattern: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim)
        .map(|j| {
            let sign = if pattern == 0 || (j >> (pattern - 1)).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            sign * decay.powi(j as i32)
        })
        .collect();
    let n = norm(&v);
    v.iter_mut().for_each(|x| *x /= n);
    v
}

/// Full-support vectors, an orthonormal basis `g`, and block vectors
/// `h_i + f_i` where `f_i` is a small perturbation inside `G = span(g_1..g_m)`.
///
/// Order: the `n_k` full-support vectors, then the basis, then the blocks.
pub fn make_subframe_frame(spec: &ConstructionSpec) -> Result<ConstructedFrame> {
    spec.check_common(ConstructionKind::SubframeRecipe)?;
    let dim = spec.dim;
    let big_k = spec.max_support;
    let m = spec.m.unwrap_or(1);
    let (n_h, n_k) = (spec.n_h, spec.n_k);
    if n_k > 3 {
        return Err(ConstructionSpec::infeasible(format!("n_k must be at most 3, got {n_k}")));
    }
    if m == 0 || m >= dim {
        return Err(ConstructionSpec::infeasible(format!(
            "need 1 <= m < dim, got m={m} with dim={dim}"
        )));
    }
    if n_h * big_k > dim - m {
        return Err(FrameError::InfeasibleSpec {
            reason: format!("{n_h} blocks of size {big_k} do not fit outside G (m={m})"),
            min_dim: Some(m + n_h * big_k),
        });
    }
    if n_h > 0 && (big_k + 1) as f64 >= DEFAULT_SUPPORT_FRACTION * dim as f64 {
        return Err(FrameError::InfeasibleSpec {
            reason: format!("block support {} is not small relative to dim {dim}", big_k + 1),
            min_dim: Some(((big_k + 1) as f64 / DEFAULT_SUPPORT_FRACTION).floor() as usize + 1),
        });
    }
    if n_h > 0 && spec.h2_decay >= spec.coord_lower.sqrt() {
        return Err(ConstructionSpec::infeasible(format!(
            "h2_decay={} must be below sqrt(A)={} to keep perturbations distinguishable",
            spec.h2_decay,
            spec.coord_lower.sqrt()
        )));
    }

    let mut rng = stream_rng(spec.seed, 0);
    let mut vectors = Vec::new();
    let mut labels = Vec::new();
    for t in 0..n_k {
        vectors.push(tail_vector(dim, spec.tail_decay, t));
        labels.push(format!("k:{t}"));
    }
    for i in 0..dim {
        vectors.push(unit(dim, i));
        labels.push(format!("g:{i}"));
    }
    let mut h_split = Vec::new();
    let mut h2_energy = 0.0;
    let mut window_values = Vec::new();
    for i in 0..n_h {
        let mut h1 = vec![0.0; dim];
        for x in &mut h1[m + i * big_k..m + (i + 1) * big_k] {
            *x = signed_magnitude(&mut rng, spec.coord_lower, spec.coord_upper);
            window_values.push(*x);
        }
        let mut h2 = vec![0.0; dim];
        h2[i % m] = spec.h2_decay.powi(i as i32 + 1);
        h2_energy += linalg::norm_sq(&h2);
        let v: Vec<f64> = h1.iter().zip(&h2).map(|(x, y)| x + y).collect();
        h_split.push(HSplit {
            index: vectors.len(),
            h1,
            h2,
        });
        vectors.push(v);
        labels.push(format!("h:{i}"));
    }
    let len = vectors.len();
    let family = FrameFamily::new(dim, vectors, labels)?;
    let ground_truth = SubframeDecomposition {
        g: IndexSet::range(n_k, n_k + dim),
        h: IndexSet::range(n_k + dim, len),
        k: IndexSet::range(0, n_k),
        m0: m.min(n_h),
        h_split,
        h2_energy,
    };
    ground_truth.check_partition(len)?;
    for t in 0..n_k {
        if support_of(family.vector(t)).len() != dim {
            return Err(FrameError::WrongStructure(format!(
                "full-support vector {t} underflowed; increase tail_decay"
            )));
        }
    }
    let window = window_of(window_values.into_iter(), spec.coord_lower, spec.coord_upper);
    if !window.squared {
        return Err(FrameError::WrongStructure("coordinate window violated".into()));
    }
    Ok(ConstructedFrame {
        family,
        ground_truth,
        guaranteed: None,
        designed_failure: None,
        coordinate_window: Some(window),
        spec: Some(spec.clone()),
    })
}

/// An orthonormal basis plus `p` full-support vectors whose energy on the
/// last `M` coordinates is squeezed: column `m` carries `0.9 / m` in total.
///
/// The designed failure is the subfamily that drops the basis vectors on
/// those coordinates; its lower frame bound sits below `1 / M`.
pub fn make_failing_family(spec: &ConstructionSpec) -> Result<ConstructedFrame> {
    spec.check_common(ConstructionKind::FailingFamily)?;
    let dim = spec.dim;
    if dim < 8 {
        return Err(FrameError::InfeasibleSpec {
            reason: format!("failing family needs dim >= 8, got {dim}"),
            min_dim: Some(8),
        });
    }
    let p = if spec.n_k == 0 { dim / 2 } else { spec.n_k };
    let big_m = spec.m.unwrap_or(p);
    if big_m == 0 || big_m > p || big_m >= dim {
        return Err(ConstructionSpec::infeasible(format!(
            "need 1 <= m <= number of full-support vectors ({p}) and m < dim, got m={big_m}"
        )));
    }
    let r = spec.tail_decay;
    let designated: Vec<usize> = (0..big_m).map(|q| dim - big_m + q).collect();

    // Entries on designated coordinates follow a scaled cosine pattern, which is
    // never zero and keeps the designated block of full row rank.
    let mut ks: Vec<Vec<f64>> = (0..p)
        .map(|n| {
            (0..dim)
                .map(|q| r.powi((n + q) as i32))
                .collect::<Vec<f64>>()
        })
        .collect();
    let mut column_sums = Vec::with_capacity(big_m);
    for (idx, &j) in designated.iter().enumerate() {
        let m1 = idx + 1;
        let raw: Vec<f64> = (0..p)
            .map(|n| {
                let angle = std::f64::consts::PI * (2 * idx + 1) as f64 * (2 * n + 1) as f64 / (4 * p) as f64;
                r.powi(n as i32) * angle.cos()
            })
            .collect();
        let energy: f64 = raw.iter().map(|x| x * x).sum();
        if !(energy > 0.0 && energy.is_finite()) {
            return Err(ConstructionSpec::infeasible(format!(
                "column {m1} cannot be normalized under tail_decay={r}"
            )));
        }
        let c = (FAILING_COLUMN_FRACTION / m1 as f64 / energy).sqrt();
        for n in 0..p {
            ks[n][j] = c * raw[n];
        }
        column_sums.push(ks.iter().map(|k| k[j] * k[j]).sum::<f64>());
    }
    for (idx, &s) in column_sums.iter().enumerate() {
        let m1 = (idx + 1) as f64;
        if !(s > 0.0 && s < 1.0 / m1) {
            return Err(ConstructionSpec::infeasible(format!(
                "column sum {s} for designated coordinate {} is outside (0, 1/{m1})",
                designated[idx]
            )));
        }
    }
    if ks.iter().any(|k| support_of(k).len() != dim) {
        return Err(ConstructionSpec::infeasible(format!(
            "tail_decay={r} underflows below the support threshold in dimension {dim}"
        )));
    }

    let mut vectors: Vec<Vec<f64>> = (0..dim).map(|i| unit(dim, i)).collect();
    vectors.extend(ks);
    let len = vectors.len();
    let mut labels = labeled("g", 0..dim);
    labels.extend(labeled("k", 0..p));
    let family = FrameFamily::new(dim, vectors, labels)?;

    let subset = IndexSet::new(
        (0..len).filter(|i| !designated.contains(i)).collect(),
        len,
    )?;
    let ceiling = 1.0 / big_m as f64;
    let measured = optimal_bounds(&family.subfamily(&subset), BoundsKind::FrameSequence, &TolerancePolicy::default())?;
    if measured.lower >= ceiling {
        return Err(FrameError::WrongStructure(format!(
            "designed subset has lower bound {} >= {ceiling}",
            measured.lower
        )));
    }
    Ok(ConstructedFrame {
        family,
        ground_truth: SubframeDecomposition {
            g: IndexSet::range(0, dim),
            h: IndexSet::empty(),
            k: IndexSet::range(dim, len),
            m0: 0,
            h_split: Vec::new(),
            h2_energy: 0.0,
        },
        guaranteed: None,
        designed_failure: Some(DesignedFailure {
            subset,
            bound_ceiling: ceiling,
            measured_lower: measured.lower,
            column_sums,
            designated_coordinates: designated,
        }),
        coordinate_window: None,
        spec: Some(spec.clone()),
    })
}

/// Concatenates `f1` (inside the range of `p`) and `f2` (inside its complement).
pub fn union_on_complements(f1: &FrameFamily, f2: &FrameFamily, p: &OrthoProjector) -> Result<FrameFamily> {
    for f in [f1, f2] {
        if f.dim() != p.dim() {
            return Err(FrameError::DimensionMismatch {
                expected: p.dim(),
                found: f.dim(),
            });
        }
    }
    let worst = worst_residual(f1, p, ProjectionSide::Onto)?.max(worst_residual(f2, p, ProjectionSide::Complement)?);
    if worst > CONTAINMENT_TOL {
        return Err(FrameError::NotOrthogonal { worst_residual: worst });
    }
    f1.concat(f2)
}

/// Optimal bounds of the union predicted from its two pieces: `(min lower, max upper)`.
pub fn union_bounds(b1: &FrameBounds, b2: &FrameBounds) -> Result<FrameBounds> {
    FrameBounds::new(b1.lower.min(b2.lower), b1.upper.max(b2.upper), b1.kind)
}

/// Random permutation of `0..n` drawn from `(seed, stream)`.
pub(crate) fn shuffled(n: usize, seed: u64, stream: u64) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(&mut stream_rng(seed, stream));
    v
}

/// Builds the family described by `spec`.
pub fn construct(spec: &ConstructionSpec) -> Result<ConstructedFrame> {
    match spec.kind {
        ConstructionKind::Onb => {
            let mut c = make_onb(spec.dim)?;
            c.spec = Some(spec.clone());
            Ok(c)
        }
        ConstructionKind::BlockRiesz => make_block_riesz(spec),
        ConstructionKind::SubframeRecipe => make_subframe_frame(spec),
        ConstructionKind::FailingFamily => make_failing_family(spec),
    }
}
