//! Frame families, frame operators, optimal bounds, dual frames and
//! orthogonal projections of families.

use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::linalg::{self, dot, norm, Cholesky, Matrix, TolerancePolicy};

/// An ordered, labeled finite family of vectors in `R^dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FrameFile", into = "FrameFile")]
pub struct FrameFamily {
    dim: usize,
    vectors: Vec<Vec<f64>>,
    labels: Vec<String>,
}

/// On-disk frame format: `{"dim": n, "vectors": [[...]], "labels": [...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameFile {
    pub dim: usize,
    pub vectors: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl TryFrom<FrameFile> for FrameFamily {
    type Error = FrameError;

    fn try_from(file: FrameFile) -> Result<Self> {
        if file.vectors.is_empty() {
            return Err(FrameError::InvalidInput("vectors: at least one vector is required".into()));
        }
        match file.labels {
            Some(labels) => FrameFamily::new(file.dim, file.vectors, labels),
            None => FrameFamily::with_default_labels(file.dim, file.vectors),
        }
    }
}

impl From<FrameFamily> for FrameFile {
    fn from(f: FrameFamily) -> Self {
        FrameFile {
            dim: f.dim,
            vectors: f.vectors,
            labels: Some(f.labels),
        }
    }
}

impl FrameFamily {
    pub fn new(dim: usize, vectors: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Self> {
        if dim == 0 {
            return Err(FrameError::InvalidInput("dim must be at least 1".into()));
        }
        if labels.len() != vectors.len() {
            return Err(FrameError::InvalidInput(format!(
                "labels: {} labels for {} vectors",
                labels.len(),
                vectors.len()
            )));
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(FrameError::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(FrameError::InvalidInput(format!(
                    "vectors[{i}] has a non-finite entry"
                )));
            }
        }
        Ok(FrameFamily {
            dim,
            vectors,
            labels,
        })
    }

    pub fn with_default_labels(dim: usize, vectors: Vec<Vec<f64>>) -> Result<Self> {
        let labels = (0..vectors.len()).map(|i| format!("f:{i}")).collect();
        FrameFamily::new(dim, vectors, labels)
    }

    /// Builds a family from a nonempty list of vectors, taking `dim` from the first.
    pub fn from_vectors(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vectors
            .first()
            .map(Vec::len)
            .ok_or_else(|| FrameError::InvalidInput("empty family".into()))?;
        FrameFamily::with_default_labels(dim, vectors)
    }

    pub(crate) fn new_unchecked(dim: usize, vectors: Vec<Vec<f64>>, labels: Vec<String>) -> Self {
        debug_assert!(vectors.iter().all(|v| v.len() == dim));
        debug_assert_eq!(vectors.len(), labels.len());
        FrameFamily {
            dim,
            vectors,
            labels,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn into_parts(self) -> (usize, Vec<Vec<f64>>, Vec<String>) {
        (self.dim, self.vectors, self.labels)
    }

    pub fn subfamily(&self, indices: &IndexSet) -> FrameFamily {
        FrameFamily {
            dim: self.dim,
            vectors: indices.iter().map(|i| self.vectors[i].clone()).collect(),
            labels: indices.iter().map(|i| self.labels[i].clone()).collect(),
        }
    }

    /// Family with the listed indices removed, order otherwise preserved.
    pub fn without(&self, removed: &IndexSet) -> FrameFamily {
        let keep = removed.complement(self.len());
        self.subfamily(&keep)
    }

    pub fn concat(&self, other: &FrameFamily) -> Result<FrameFamily> {
        if other.dim != self.dim {
            return Err(FrameError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut out = self.clone();
        out.vectors.extend(other.vectors.iter().cloned());
        out.labels.extend(other.labels.iter().cloned());
        Ok(out)
    }

    /// `sum_i |<v, f_i>|^2`
    pub fn analysis_energy(&self, v: &[f64]) -> f64 {
        self.vectors.iter().map(|f| dot(v, f).powi(2)).sum()
    }

    /// `sum_i c_i f_i`
    pub fn synthesize(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.len() {
            return Err(FrameError::DimensionMismatch {
                expected: self.len(),
                found: coeffs.len(),
            });
        }
        let mut out = vec![0.0; self.dim];
        for (c, f) in coeffs.iter().zip(&self.vectors) {
            linalg::axpy(*c, f, &mut out);
        }
        Ok(out)
    }

    pub(crate) fn check_vector(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(FrameError::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok(())
    }
}

/// Sorted, duplicate-free indices into a family.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    /// Validates that `indices` is sorted, distinct and below `len`.
    pub fn new(indices: Vec<usize>, len: usize) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= len) {
            return Err(FrameError::InvalidInput(format!(
                "index {bad} out of range for family of size {len}"
            )));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FrameError::InvalidInput(
                "index set must be sorted without duplicates".into(),
            ));
        }
        Ok(IndexSet(indices))
    }

    /// Sorts and deduplicates; only range is checked.
    pub fn from_unsorted(mut indices: Vec<usize>, len: usize) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        IndexSet::new(indices, len)
    }

    pub fn range(start: usize, end: usize) -> Self {
        IndexSet((start..end).collect())
    }

    pub fn from_mask(mask: u64) -> Self {
        IndexSet((0..64).filter(|b| mask >> b & 1 == 1).collect())
    }

    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn complement(&self, len: usize) -> IndexSet {
        IndexSet((0..len).filter(|i| !self.contains(*i)).collect())
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut v: Vec<usize> = self.0.iter().chain(&other.0).copied().collect();
        v.sort_unstable();
        v.dedup();
        IndexSet(v)
    }
}

/// Which notion of bound a [`FrameBounds`] carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundsKind {
    /// Bounds of the inequality over the whole ambient space.
    FrameForSpace,
    /// Bounds over the span of the family.
    FrameSequence,
    /// Riesz basis constants `c, C` (square roots of the frame-sequence bounds).
    RieszConstants,
}

impl BoundsKind {
    pub const ALL: [BoundsKind; 3] = [
        BoundsKind::FrameForSpace,
        BoundsKind::FrameSequence,
        BoundsKind::RieszConstants,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
    pub kind: BoundsKind,
}

impl FrameBounds {
    pub fn new(lower: f64, upper: f64, kind: BoundsKind) -> Result<Self> {
        if !(lower >= 0.0 && upper >= lower && upper.is_finite()) {
            return Err(FrameError::InvalidInput(format!(
                "bounds must satisfy 0 <= lower <= upper (got {lower}, {upper})"
            )));
        }
        Ok(FrameBounds { lower, upper, kind })
    }
}

/// Orthogonal projection onto the span of a stored orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthoProjector {
    basis: FrameFamily,
}

impl OrthoProjector {
    /// Projector onto the span of `f`.
    pub fn span_of(f: &FrameFamily, tol: &TolerancePolicy) -> Self {
        let (basis, _) = linalg::orthonormalize(f, tol);
        OrthoProjector { basis }
    }

    /// Projector onto `span{e_i : i in coords}` in `R^dim`.
    pub fn coordinates(dim: usize, coords: &IndexSet) -> Result<Self> {
        if let Some(bad) = coords.iter().find(|&c| c >= dim) {
            return Err(FrameError::InvalidInput(format!(
                "coordinate {bad} out of range for dimension {dim}"
            )));
        }
        let vectors = coords
            .iter()
            .map(|c| {
                let mut e = vec![0.0; dim];
                e[c] = 1.0;
                e
            })
            .collect();
        let labels = coords.iter().map(|c| format!("e:{c}")).collect();
        Ok(OrthoProjector {
            basis: FrameFamily::new(dim, vectors, labels)?,
        })
    }

    /// Wraps a basis that must already be orthonormal to `rank_tol_rel`.
    pub fn from_orthonormal(basis: FrameFamily, tol: &TolerancePolicy) -> Result<Self> {
        let g = linalg::gram(&basis);
        let n = basis.len();
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                if (g[(i, j)] - target).abs() > tol.rank_tol_rel {
                    return Err(FrameError::InvalidInput(format!(
                        "projector basis is not orthonormal: <q_{i}, q_{j}> = {}",
                        g[(i, j)]
                    )));
                }
            }
        }
        Ok(OrthoProjector { basis })
    }

    pub fn basis(&self) -> &FrameFamily {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.basis.check_vector(v)?;
        let mut out = vec![0.0; v.len()];
        for q in self.basis.vectors() {
            linalg::axpy(dot(q, v), q, &mut out);
        }
        Ok(out)
    }

    pub fn apply_complement(&self, v: &[f64]) -> Result<Vec<f64>> {
        let p = self.apply(v)?;
        Ok(v.iter().zip(p).map(|(a, b)| a - b).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionSide {
    Onto,
    Complement,
}

/// Frame operator `S = sum_i f_i f_i^T` as a `dim x dim` matrix.
pub fn frame_operator(f: &FrameFamily) -> Matrix {
    let d = f.dim();
    let mut s = Matrix::zeros(d, d);
    for v in f.vectors() {
        for i in 0..d {
            if v[i] == 0.0 {
                continue;
            }
            for j in i..d {
                s[(i, j)] += v[i] * v[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            s[(i, j)] = s[(j, i)];
        }
    }
    s
}

/// Optimal bounds of the requested kind.
///
/// `FrameForSpace` reports `lower = 0` when the family does not span the
/// ambient space. `FrameSequence` uses the spectrum of the frame operator on
/// the span of the family. `RieszConstants` requires linear independence.
pub fn optimal_bounds(f: &FrameFamily, kind: BoundsKind, tol: &TolerancePolicy) -> Result<FrameBounds> {
    let (rank, spectrum) = linalg::span_spectrum(f.vectors(), tol)?;
    if rank == 0 {
        return Err(FrameError::Degenerate("family has no nonzero vector".into()));
    }
    let lo = spectrum[0].max(0.0);
    let hi = spectrum[rank - 1];
    match kind {
        BoundsKind::FrameForSpace => {
            let lower = if rank < f.dim() { 0.0 } else { lo };
            FrameBounds::new(lower, hi, kind)
        }
        BoundsKind::FrameSequence => FrameBounds::new(lo, hi, kind),
        BoundsKind::RieszConstants => {
            if rank < f.len() {
                return Err(FrameError::NotLinearlyIndependent {
                    rank,
                    size: f.len(),
                });
            }
            FrameBounds::new(lo.sqrt(), hi.sqrt(), kind)
        }
    }
}

fn frame_cholesky(f: &FrameFamily, tol: &TolerancePolicy) -> Result<Cholesky> {
    let (rank, spectrum) = linalg::span_spectrum(f.vectors(), tol)?;
    if rank == 0 {
        return Err(FrameError::NotAFrame { deficient: f.dim() });
    }
    let hi = spectrum[rank - 1];
    let weak = spectrum
        .iter()
        .filter(|&&l| l <= tol.rank_tol_rel * hi)
        .count();
    let deficient = f.dim() - rank + weak;
    if deficient > 0 {
        return Err(FrameError::NotAFrame { deficient });
    }
    Cholesky::factor(&frame_operator(f))
}

/// Canonical dual frame `(S^{-1} f_i)`, labels preserved.
pub fn dual_frame(f: &FrameFamily, tol: &TolerancePolicy) -> Result<FrameFamily> {
    let chol = frame_cholesky(f, tol)?;
    let vectors = f
        .vectors()
        .iter()
        .map(|v| chol.solve(v))
        .collect::<Result<Vec<_>>>()?;
    Ok(FrameFamily::new_unchecked(f.dim(), vectors, f.labels().to_vec()))
}

/// Frame coefficients `c_i = <v, S^{-1} f_i>`.
pub fn frame_coefficients(f: &FrameFamily, v: &[f64], tol: &TolerancePolicy) -> Result<Vec<f64>> {
    f.check_vector(v)?;
    let chol = frame_cholesky(f, tol)?;
    // S is symmetric, so <v, S^{-1} f_i> = <S^{-1} v, f_i>.
    let w = chol.solve(v)?;
    Ok(f.vectors().iter().map(|fi| dot(&w, fi)).collect())
}

/// Replaces each vector by its projection (or complement projection).
/// Zero vectors are kept so indices stay aligned with `f`.
pub fn project_family(f: &FrameFamily, p: &OrthoProjector, side: ProjectionSide) -> Result<FrameFamily> {
    if p.dim() != f.dim() {
        return Err(FrameError::DimensionMismatch {
            expected: f.dim(),
            found: p.dim(),
        });
    }
    let vectors = f
        .vectors()
        .iter()
        .map(|v| match side {
            ProjectionSide::Onto => p.apply(v),
            ProjectionSide::Complement => p.apply_complement(v),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FrameFamily::new_unchecked(f.dim(), vectors, f.labels().to_vec()))
}

/// Guaranteed lower bound `A1 * A2 / (8 B)` for a family split into a frame
/// for `P(H)` and a complement-projected frame sequence, both with upper bound `B`.
pub fn combine_bounds(a1: &FrameBounds, a2: &FrameBounds, shared_upper: f64) -> Result<FrameBounds> {
    if !(a1.lower > 0.0 && a2.lower > 0.0 && shared_upper > 0.0) {
        return Err(FrameError::InvalidInput(format!(
            "combine_bounds needs positive inputs (A1={}, A2={}, B={})",
            a1.lower, a2.lower, shared_upper
        )));
    }
    if shared_upper < a1.upper || shared_upper < a2.upper {
        return Err(FrameError::InvalidInput(format!(
            "shared upper bound {shared_upper} is below a component upper bound ({}, {})",
            a1.upper, a2.upper
        )));
    }
    FrameBounds::new(
        a1.lower * a2.lower / (8.0 * shared_upper),
        shared_upper,
        BoundsKind::FrameForSpace,
    )
}

/// `sum_i ||P f_i||^2`; bounded by `rank(P) * B` for a family with upper bound `B`.
pub fn projected_energy(f: &FrameFamily, p: &OrthoProjector) -> Result<f64> {
    if p.dim() != f.dim() {
        return Err(FrameError::DimensionMismatch {
            expected: f.dim(),
            found: p.dim(),
        });
    }
    Ok(f
        .vectors()
        .iter()
        .map(|v| p.basis().vectors().iter().map(|q| dot(q, v).powi(2)).sum::<f64>())
        .sum())
}

/// Largest distance from a vector of `f` to the range of `p`.
pub(crate) fn worst_residual(f: &FrameFamily, p: &OrthoProjector, side: ProjectionSide) -> Result<f64> {
    let mut worst = 0.0f64;
    for v in f.vectors() {
        let r = match side {
            ProjectionSide::Onto => p.apply_complement(v)?,
            ProjectionSide::Complement => p.apply(v)?,
        };
        worst = worst.max(norm(&r));
    }
    Ok(worst)
}
