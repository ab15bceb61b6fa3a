//! Truncated frame operators and the coefficient errors of the projection
//! method, with reordering and trimming helpers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructions::shuffled;
use crate::error::{FrameError, Result};
use crate::frame::{FrameFamily, IndexSet, OrthoProjector};
use crate::linalg::{self, dot, Cholesky, Matrix, TolerancePolicy};
use crate::subframe::SubframeDecomposition;

/// Frame operator of the first `n` vectors, written on an orthonormal basis
/// of their span `H_n`.
#[derive(Clone, Debug)]
pub struct TruncatedOperator {
    pub n: usize,
    pub span_basis: OrthoProjector,
    pub s_n: Matrix,
    /// `coords[a][i] = <q_a, f_i>` for `i < n`.
    coords: Vec<Vec<f64>>,
    chol: Cholesky,
}

impl TruncatedOperator {
    pub fn rank(&self) -> usize {
        self.span_basis.rank()
    }

    /// `S_n^{-1} f_i` in span coordinates.
    fn dual_coords(&self, i: usize) -> Result<Vec<f64>> {
        let col: Vec<f64> = self.coords.iter().map(|row| row[i]).collect();
        self.chol.solve(&col)
    }

    /// `S_n^{-1} f_i` as a vector of the ambient space.
    pub fn dual_vector(&self, i: usize) -> Result<Vec<f64>> {
        if i >= self.n {
            return Err(FrameError::InvalidInput(format!("index {i} is beyond level {}", self.n)));
        }
        let y = self.dual_coords(i)?;
        let mut out = vec![0.0; self.span_basis.dim()];
        for (c, q) in y.iter().zip(self.span_basis.basis().vectors()) {
            linalg::axpy(*c, q, &mut out);
        }
        Ok(out)
    }

    /// `||S_n^{-1} f_i||`
    pub fn dual_norm(&self, i: usize) -> Result<f64> {
        if i >= self.n {
            return Err(FrameError::InvalidInput(format!("index {i} is beyond level {}", self.n)));
        }
        Ok(linalg::norm(&self.dual_coords(i)?))
    }

    /// Applies `S_n` to `v` (projected onto `H_n` first), in ambient coordinates.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let qv = self.project(v)?;
        let sv = self.s_n.mul_vec(&qv)?;
        let mut out = vec![0.0; self.span_basis.dim()];
        for (c, q) in sv.iter().zip(self.span_basis.basis().vectors()) {
            linalg::axpy(*c, q, &mut out);
        }
        Ok(out)
    }

    fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.span_basis.basis().check_vector(v)?;
        Ok(self.span_basis.basis().vectors().iter().map(|q| dot(q, v)).collect())
    }

    /// `<v, S_n^{-1} f_i>` for `i < n`.
    pub fn coefficients(&self, v: &[f64]) -> Result<Vec<f64>> {
        let y = self.chol.solve(&self.project(v)?)?;
        Ok((0..self.n)
            .map(|i| self.coords.iter().zip(&y).map(|(row, yk)| row[i] * yk).sum())
            .collect())
    }
}

pub fn truncated_operator(f: &FrameFamily, n: usize, tol: &TolerancePolicy) -> Result<TruncatedOperator> {
    if n == 0 || n > f.len() {
        return Err(FrameError::InvalidInput(format!(
            "truncation level {n} outside 1..={}",
            f.len()
        )));
    }
    let prefix = &f.vectors()[..n];
    let (basis, _) = linalg::orthonormal_span(prefix, tol);
    if basis.is_empty() {
        return Err(FrameError::Degenerate(format!("first {n} vectors are all zero")));
    }
    let coords: Vec<Vec<f64>> = basis
        .iter()
        .map(|q| prefix.iter().map(|v| dot(q, v)).collect())
        .collect();
    let s_n = linalg::restricted_operator(&basis, prefix);
    let chol = Cholesky::factor(&s_n)
        .map_err(|_| FrameError::Degenerate(format!("truncated operator at level {n} is not invertible")))?;
    let labels = (0..basis.len()).map(|a| format!("q:{a}")).collect();
    let basis = FrameFamily::new(f.dim(), basis, labels)?;
    Ok(TruncatedOperator {
        n,
        span_basis: OrthoProjector::from_orthonormal(basis, tol)?,
        s_n,
        coords,
        chol,
    })
}

/// `<v, S_n^{-1} f_i>` for `i < n`.
pub fn approx_coefficients(f: &FrameFamily, v: &[f64], n: usize, tol: &TolerancePolicy) -> Result<Vec<f64>> {
    f.check_vector(v)?;
    truncated_operator(f, n, tol)?.coefficients(v)
}

/// Least-squares slope of `ln(value)` against level; non-positive values are
/// left out. `None` with fewer than two usable points.
pub fn log_slope(levels: &[usize], values: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = levels
        .iter()
        .zip(values)
        .filter(|(_, &y)| y > 0.0 && y.is_finite())
        .map(|(&x, &y)| (x as f64, y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub l2_error: Option<f64>,
    pub max_coord_error: Option<f64>,
    pub max_dual_norm: Option<f64>,
}

/// Error series of the projection method over a list of truncation levels.
///
/// Reference coefficients are those of the full family (level `N`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionDiagnostics {
    pub levels: Vec<usize>,
    pub tracked: IndexSet,
    /// `coord_errors[l][t] = |<v, S_n^{-1} f_i> - <v, S^{-1} f_i>|` for the `t`-th tracked `i`.
    pub coord_errors: Vec<Vec<f64>>,
    /// `sum_{i<n} |c^n_i - c_i|^2 + sum_{i>=n} |c_i|^2`
    pub l2_errors: Vec<f64>,
    /// `max_{tracked i} ||S_n^{-1} f_i||`
    pub dual_norms: Vec<f64>,
    pub trend: Trend,
    pub reference_level: usize,
    /// Requested levels whose truncated operator was degenerate.
    pub skipped: Vec<usize>,
}

pub const CSV_HEADER: &str = "level,l2_error,max_coord_error,max_dual_norm";

impl ProjectionDiagnostics {
    pub fn max_coord_errors(&self) -> Vec<f64> {
        self.coord_errors
            .iter()
            .map(|row| row.iter().copied().fold(0.0, f64::max))
            .collect()
    }

    pub fn final_l2_error(&self) -> Option<f64> {
        self.l2_errors.last().copied()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for (((level, l2), ce), dn) in self
            .levels
            .iter()
            .zip(&self.l2_errors)
            .zip(self.max_coord_errors())
            .zip(&self.dual_norms)
        {
            out.push_str(&format!("{level},{l2:e},{ce:e},{dn:e}\n"));
        }
        out
    }
}

struct LevelResult {
    coord_errors: Vec<f64>,
    l2: f64,
    dual: f64,
}

pub fn diagnostics(
    f: &FrameFamily,
    v: &[f64],
    levels: &[usize],
    tracked: &IndexSet,
    tol: &TolerancePolicy,
) -> Result<ProjectionDiagnostics> {
    f.check_vector(v)?;
    let big_n = f.len();
    if levels.is_empty() {
        return Err(FrameError::InvalidInput("levels: at least one level is required".into()));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FrameError::InvalidInput("levels must be strictly increasing".into()));
    }
    if levels[0] == 0 || levels[levels.len() - 1] > big_n {
        return Err(FrameError::InvalidInput(format!(
            "levels must lie in 1..={big_n}"
        )));
    }
    if let Some(bad) = tracked.iter().find(|&i| i >= levels[0]) {
        return Err(FrameError::InvalidInput(format!(
            "tracked index {bad} is not below the first level {}",
            levels[0]
        )));
    }
    let reference = truncated_operator(f, big_n, tol)?.coefficients(v)?;

    let results: Vec<Option<LevelResult>> = levels
        .par_iter()
        .map(|&n| -> Result<Option<LevelResult>> {
            let op = match truncated_operator(f, n, tol) {
                Ok(op) => op,
                Err(FrameError::Degenerate(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            let c = op.coefficients(v)?;
            let head: f64 = c.iter().zip(&reference).map(|(a, b)| (a - b).powi(2)).sum();
            let tail: f64 = reference[n..].iter().map(|x| x * x).sum();
            let coord_errors = tracked.iter().map(|i| (c[i] - reference[i]).abs()).collect();
            let dual = tracked
                .iter()
                .map(|i| op.dual_norm(i))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok(Some(LevelResult {
                coord_errors,
                l2: head + tail,
                dual,
            }))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = ProjectionDiagnostics {
        levels: Vec::new(),
        tracked: tracked.clone(),
        coord_errors: Vec::new(),
        l2_errors: Vec::new(),
        dual_norms: Vec::new(),
        trend: Trend {
            l2_error: None,
            max_coord_error: None,
            max_dual_norm: None,
        },
        reference_level: big_n,
        skipped: Vec::new(),
    };
    for (&n, r) in levels.iter().zip(results) {
        match r {
            Some(r) => {
                out.levels.push(n);
                out.coord_errors.push(r.coord_errors);
                out.l2_errors.push(r.l2);
                out.dual_norms.push(r.dual);
            }
            None => out.skipped.push(n),
        }
    }
    out.trend = Trend {
        l2_error: log_slope(&out.levels, &out.l2_errors),
        max_coord_error: log_slope(&out.levels, &out.max_coord_errors()),
        max_dual_norm: log_slope(&out.levels, &out.dual_norms),
    };
    Ok(out)
}

/// A bijection of `0..N`; the permuted family has `new[i] = old[map[i]]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    map: Vec<usize>,
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = FrameError;

    fn try_from(map: Vec<usize>) -> Result<Self> {
        Permutation::new(map)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.map
    }
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &i in &map {
            if i >= n {
                return Err(FrameError::InvalidPermutation(format!("entry {i} out of range 0..{n}")));
            }
            if seen[i] {
                return Err(FrameError::InvalidPermutation(format!("entry {i} repeated")));
            }
            seen[i] = true;
        }
        Ok(Permutation { map })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { map: (0..n).collect() }
    }

    pub fn reversal(n: usize) -> Self {
        Permutation {
            map: (0..n).rev().collect(),
        }
    }

    /// Uniform random permutation from `(seed, stream)`.
    pub fn random(n: usize, seed: u64, stream: u64) -> Self {
        Permutation {
            map: shuffled(n, seed, stream),
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    /// Position in the permuted order of the old index `old`.
    pub fn position_of(&self, old: usize) -> Option<usize> {
        self.map.iter().position(|&i| i == old)
    }
}

pub fn permute(f: &FrameFamily, p: &Permutation) -> Result<FrameFamily> {
    if p.len() != f.len() {
        return Err(FrameError::InvalidPermutation(format!(
            "permutation of {} entries for a family of {}",
            p.len(),
            f.len()
        )));
    }
    let vectors = p.map.iter().map(|&i| f.vector(i).to_vec()).collect();
    let labels = p.map.iter().map(|&i| f.labels()[i].clone()).collect();
    FrameFamily::new(f.dim(), vectors, labels)
}

/// Drops the vectors classified as having (proxy) infinite support.
pub fn trim_for_strong_method(f: &FrameFamily, dec: &SubframeDecomposition) -> Result<(FrameFamily, IndexSet)> {
    dec.check_partition(f.len())?;
    Ok((f.without(&dec.k), dec.k.clone()))
}
