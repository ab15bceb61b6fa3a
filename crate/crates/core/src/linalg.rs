//! Dense linear-algebra substrate: Gram matrices, a cyclic Jacobi symmetric
//! eigensolver, Cholesky and LU solves, and rank-revealing Gram-Schmidt.
//!
//! Everything here is deterministic: the same input always produces
//! bit-identical output, independent of thread scheduling.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::frame::FrameFamily;

const MAX_JACOBI_SWEEPS: usize = 100;

/// Relative asymmetry tolerated before a matrix is rejected as non-symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Numerical thresholds shared by every rank decision in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// Residuals below `rank_tol_rel * (largest input norm)` count as zero.
    pub rank_tol_rel: f64,
    /// Off-diagonal mass (relative to the Frobenius norm) accepted when the
    /// Jacobi sweep limit is reached.
    pub eig_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy {
            rank_tol_rel: 1e-10,
            eig_tol: 1e-12,
        }
    }
}

impl TolerancePolicy {
    pub fn new(rank_tol_rel: f64, eig_tol: f64) -> Result<Self> {
        let t = TolerancePolicy {
            rank_tol_rel,
            eig_tol,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eig_tol > 0.0 && self.eig_tol <= self.rank_tol_rel && self.rank_tol_rel < 1.0) {
            return Err(FrameError::InvalidInput(format!(
                "tolerances must satisfy 0 < eig_tol <= rank_tol_rel < 1 (got eig_tol={}, rank_tol_rel={})",
                self.eig_tol, self.rank_tol_rel
            )));
        }
        Ok(())
    }
}

/// Row-major dense matrix of reals.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(FrameError::InvalidInput(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(FrameError::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Matrix::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(FrameError::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest |m[i][j] - m[j][i]|; infinite for non-square matrices.
    pub fn max_asymmetry(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    fn check_symmetric(&self) -> Result<()> {
        let asym = self.max_asymmetry();
        if asym > SYMMETRY_TOL * self.max_abs().max(1.0) {
            return Err(FrameError::Asymmetric {
                max_asymmetry: asym,
            });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// y += alpha * x
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Gram matrix `G[i][j] = <f_i, f_j>` of a family.
pub fn gram(f: &FrameFamily) -> Matrix {
    gram_of(f.vectors())
}

pub(crate) fn gram_of<V: AsRef<[f64]>>(vectors: &[V]) -> Matrix {
    let n = vectors.len();
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = dot(vectors[i].as_ref(), vectors[j].as_ref());
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Full spectrum of a symmetric matrix, ascending.
pub fn sym_eigenvalues(m: &Matrix, tol: &TolerancePolicy) -> Result<Vec<f64>> {
    if m.rows != m.cols {
        return Err(FrameError::InvalidInput(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    m.check_symmetric()?;
    let n = m.rows;
    let mut a = m.data.clone();
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = avg;
            a[j * n + i] = avg;
        }
    }
    jacobi_in_place(&mut a, n, tol.eig_tol)?;
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Cyclic Jacobi rotations until no off-diagonal entry is significant relative
/// to its diagonal pair. Leaves the eigenvalues on the diagonal.
fn jacobi_in_place(a: &mut [f64], n: usize, eig_tol: f64) -> Result<()> {
    let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                if apq.abs() <= 0.5 * f64::EPSILON * (app.abs() * aqq.abs()).sqrt() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    let mut off = 0.0;
    for p in 0..n {
        for q in p + 1..n {
            off += 2.0 * a[p * n + q] * a[p * n + q];
        }
    }
    if off.sqrt() <= eig_tol * frob {
        Ok(())
    } else {
        Err(FrameError::NoConvergence {
            sweeps: MAX_JACOBI_SWEEPS,
        })
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Clone, Debug)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub fn factor(m: &Matrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(FrameError::InvalidInput("Cholesky needs a square matrix".into()));
        }
        m.check_symmetric()?;
        let n = m.rows;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = m[(j, j)];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if d.is_nan() || d <= 0.0 {
                return Err(FrameError::Degenerate(format!(
                    "matrix is not positive definite (pivot {j} = {d:e})"
                )));
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut s = m[(i, j)];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        Ok(Cholesky { n, l })
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(FrameError::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        Ok(y)
    }
}

/// LU factorization with partial pivoting, for general square systems.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(m: &Matrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(FrameError::InvalidInput("LU needs a square matrix".into()));
        }
        let n = m.rows;
        let mut lu = m.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = m.max_abs();
        for col in 0..n {
            let (pivot_row, pivot_abs) = (col..n)
                .map(|r| (r, lu[r * n + col].abs()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_abs <= f64::EPSILON * scale * n as f64 {
                return Err(FrameError::Degenerate(format!(
                    "singular matrix at column {col}"
                )));
            }
            if pivot_row != col {
                for k in 0..n {
                    lu.swap(col * n + k, pivot_row * n + k);
                }
                perm.swap(col, pivot_row);
            }
            let p = lu[col * n + col];
            for r in col + 1..n {
                let factor = lu[r * n + col] / p;
                lu[r * n + col] = factor;
                for k in col + 1..n {
                    lu[r * n + k] -= factor * lu[col * n + k];
                }
            }
        }
        Ok(Lu { n, lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(FrameError::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.lu[i * n + k] * y[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] -= self.lu[i * n + k] * y[k];
            }
            y[i] /= self.lu[i * n + i];
        }
        Ok(y)
    }
}

/// Rank-revealing orthonormalization in ascending index order.
///
/// Returns an orthonormal basis of the span together with the input indices
/// whose residual, after projection onto the running span, exceeded
/// `rank_tol_rel * (largest input norm)`. An all-zero family yields an empty
/// basis.
pub fn orthonormalize(f: &FrameFamily, tol: &TolerancePolicy) -> (FrameFamily, Vec<usize>) {
    let (basis, selected) = orthonormal_span(f.vectors(), tol);
    let labels = selected.iter().map(|&i| f.labels()[i].clone()).collect();
    let family = FrameFamily::new_unchecked(f.dim(), basis, labels);
    (family, selected)
}

pub(crate) fn orthonormal_span<V: AsRef<[f64]>>(
    vectors: &[V],
    tol: &TolerancePolicy,
) -> (Vec<Vec<f64>>, Vec<usize>) {
    let max_norm = vectors
        .iter()
        .map(|v| norm(v.as_ref()))
        .fold(0.0f64, f64::max);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut selected = Vec::new();
    if max_norm == 0.0 {
        return (basis, selected);
    }
    let threshold = tol.rank_tol_rel * max_norm;
    for (i, v) in vectors.iter().enumerate() {
        let mut r = v.as_ref().to_vec();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &r);
                axpy(-c, q, &mut r);
            }
        }
        let nr = norm(&r);
        if nr > threshold {
            r.iter_mut().for_each(|x| *x /= nr);
            basis.push(r);
            selected.push(i);
        }
    }
    (basis, selected)
}

/// Spectrum of the frame operator restricted to the span of `vectors`,
/// represented on an orthonormal basis of that span. Returns the span rank
/// and the ascending eigenvalues (all of them nonzero up to the rank rule).
pub(crate) fn span_spectrum<V: AsRef<[f64]>>(
    vectors: &[V],
    tol: &TolerancePolicy,
) -> Result<(usize, Vec<f64>)> {
    let (basis, _) = orthonormal_span(vectors, tol);
    let r = basis.len();
    if r == 0 {
        return Ok((0, Vec::new()));
    }
    let restricted = restricted_operator(&basis, vectors);
    Ok((r, sym_eigenvalues(&restricted, tol)?))
}

/// `C C^T` where `C[a][i] = <q_a, f_i>`: the frame operator of `vectors`
/// written in the coordinates of the orthonormal `basis`.
pub(crate) fn restricted_operator<V: AsRef<[f64]>>(basis: &[Vec<f64>], vectors: &[V]) -> Matrix {
    let r = basis.len();
    let coords: Vec<Vec<f64>> = basis
        .iter()
        .map(|q| vectors.iter().map(|f| dot(q, f.as_ref())).collect())
        .collect();
    let mut m = Matrix::zeros(r, r);
    for a in 0..r {
        for b in a..r {
            let v = dot(&coords[a], &coords[b]);
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(vs: Vec<Vec<f64>>) -> FrameFamily {
        FrameFamily::from_vectors(vs).unwrap()
    }

    #[test]
    fn gram_examples() {
        let g = gram(&fam(vec![vec![1.0, 0.0], vec![0.0, 1.0]]));
        assert_eq!(g, Matrix::identity(2));
        let g = gram(&fam(vec![vec![1.0, 0.0], vec![1.0, 0.0]]));
        assert_eq!(g.as_slice(), &[1.0, 1.0, 1.0, 1.0]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let g = gram(&fam(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![s, s]]));
        let expected = [1.0, 0.0, s, 0.0, 1.0, s, s, s, 1.0];
        for (a, b) in g.as_slice().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn eigenvalue_examples() {
        let tol = TolerancePolicy::default();
        assert_eq!(sym_eigenvalues(&Matrix::identity(2), &tol).unwrap(), vec![1.0, 1.0]);
        let m = Matrix::new(2, 2, vec![1.5, 0.5, 0.5, 1.5]).unwrap();
        let e = sym_eigenvalues(&m, &tol).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] - 2.0).abs() < 1e-14);
        let m = Matrix::new(2, 2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let e = sym_eigenvalues(&m, &tol).unwrap();
        assert!(e[0].abs() < 1e-14 && (e[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn asymmetric_rejected() {
        let m = Matrix::new(2, 2, vec![1.0, 0.5, 0.4, 1.0]).unwrap();
        assert!(matches!(
            sym_eigenvalues(&m, &TolerancePolicy::default()),
            Err(FrameError::Asymmetric { .. })
        ));
    }

    #[test]
    fn tiny_eigenvalue_keeps_relative_accuracy() {
        // restricted operator of {(1,0),(1,1e-6)}: exact lambda_min = 5e-13 * (1 + O(1e-12))
        let m = Matrix::new(2, 2, vec![2.0, 1e-6, 1e-6, 1e-12]).unwrap();
        let e = sym_eigenvalues(&m, &TolerancePolicy::default()).unwrap();
        assert!((e[0] - 5e-13).abs() < 1e-20, "{}", e[0]);
    }

    #[test]
    fn orthonormalize_examples() {
        let tol = TolerancePolicy::default();
        let (b, sel) = orthonormalize(&fam(vec![vec![2.0, 0.0], vec![0.0, 3.0]]), &tol);
        assert_eq!(sel, vec![0, 1]);
        assert_eq!(b.vectors(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let (_, sel) = orthonormalize(
            &fam(vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]),
            &tol,
        );
        assert_eq!(sel, vec![0, 2]);
        let (_, sel) = orthonormalize(&fam(vec![vec![1.0, 0.0], vec![1.0, 1e-14]]), &tol);
        assert_eq!(sel, vec![0]);
        let (b, sel) = orthonormalize(&fam(vec![vec![0.0, 0.0]]), &tol);
        assert!(sel.is_empty() && b.is_empty());
    }

    #[test]
    fn cholesky_and_lu_solve() {
        let m = Matrix::new(2, 2, vec![1.5, 0.5, 0.5, 1.5]).unwrap();
        let x = Cholesky::factor(&m).unwrap().solve(&[1.0, 1.0]).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-15 && (x[1] - 0.5).abs() < 1e-15);
        let m = Matrix::new(2, 2, vec![0.0, 2.0, 1.0, 1.0]).unwrap();
        let x = Lu::factor(&m).unwrap().solve(&[4.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
        let sing = Matrix::new(2, 2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(Cholesky::factor(&sing).is_err());
        assert!(Lu::factor(&sing).is_err());
    }

    #[test]
    fn tolerance_policy_invariant() {
        assert!(TolerancePolicy::new(1e-10, 1e-12).is_ok());
        assert!(TolerancePolicy::new(1e-12, 1e-10).is_err());
        assert!(TolerancePolicy::new(1.0, 1e-12).is_err());
        assert!(TolerancePolicy::new(1e-10, 0.0).is_err());
    }
}
