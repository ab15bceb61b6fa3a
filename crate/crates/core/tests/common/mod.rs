//! Independent oracles shared by the integration tests. Nothing here calls
//! into framekit's numerical kernels.

#![allow(dead_code)]

use nalgebra::DMatrix;

/// Synthesis matrix with the vectors as columns.
pub fn synthesis(dim: usize, vectors: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(dim, vectors.len(), |i, j| vectors[j][i])
}

/// Squared nonzero singular values of the synthesis matrix, ascending.
/// Singular values below `rel * sigma_max` count as zero.
pub fn nonzero_spectrum(dim: usize, vectors: &[Vec<f64>], rel: f64) -> Vec<f64> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = synthesis(dim, vectors);
    let sv = m.svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let mut out: Vec<f64> = sv.iter().filter(|&&s| s > rel * max && s > 0.0).map(|s| s * s).collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Frame-sequence bounds `(lower, upper)` via SVD; `None` for an all-zero family.
pub fn svd_bounds(dim: usize, vectors: &[Vec<f64>]) -> Option<(f64, f64)> {
    let s = nonzero_spectrum(dim, vectors, 1e-10);
    Some((*s.first()?, *s.last()?))
}

/// Minimum and maximum frame-sequence bounds over every nonempty subset with a
/// nonzero vector, by direct enumeration.
pub fn brute_force_riesz(dim: usize, vectors: &[Vec<f64>]) -> (f64, f64) {
    let n = vectors.len();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for mask in 1u32..(1 << n) {
        let sub: Vec<Vec<f64>> = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| vectors[b].clone()).collect();
        if let Some((l, u)) = svd_bounds(dim, &sub) {
            lo = lo.min(l);
            hi = hi.max(u);
        }
    }
    (lo, hi)
}

/// Eigenvalues of a symmetric matrix via nalgebra, ascending.
pub fn nalgebra_eigenvalues(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let mut e: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Real roots of a monic real-rooted cubic `x^3 + c2 x^2 + c1 x + c0`, ascending,
/// by splitting at the critical points and bisecting each bracket.
pub fn real_cubic_roots(c2: f64, c1: f64, c0: f64) -> [f64; 3] {
    let p = |x: f64| ((x + c2) * x + c1) * x + c0;
    // derivative 3x^2 + 2 c2 x + c1
    let disc = (4.0 * c2 * c2 - 12.0 * c1).max(0.0);
    let r1 = (-2.0 * c2 - disc.sqrt()) / 6.0;
    let r2 = (-2.0 * c2 + disc.sqrt()) / 6.0;
    let bound = 1.0 + c2.abs().max(c1.abs()).max(c0.abs());
    let scale = 1.0 + bound * bound * bound;
    let bisect = |mut a: f64, mut b: f64| {
        // p(a) <= 0 <= p(b) or the reverse; keep the sign change bracketed
        let sa = p(a) <= 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if (p(mid) <= 0.0) == sa {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    let near_zero = |x: f64| p(x).abs() <= 1e-12 * scale;
    let low = if near_zero(r1) { r1 } else { bisect(-bound, r1) };
    let high = if near_zero(r2) { r2 } else { bisect(r2, bound) };
    let mid = if near_zero(r1) {
        r1
    } else if near_zero(r2) {
        r2
    } else {
        bisect(r1, r2)
    };
    [low, mid, high]
}

/// Eigenvalues of a symmetric 2x2 or 3x3 matrix from its characteristic polynomial.
pub fn char_poly_eigenvalues(rows: &[Vec<f64>]) -> Vec<f64> {
    match rows.len() {
        1 => vec![rows[0][0]],
        2 => {
            let (a, b, d) = (rows[0][0], rows[0][1], rows[1][1]);
            let mean = 0.5 * (a + d);
            let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            vec![mean - rad, mean + rad]
        }
        3 => {
            let m = rows;
            let tr = m[0][0] + m[1][1] + m[2][2];
            let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
                + m[1][1] * m[2][2]
                - m[1][2] * m[2][1];
            let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
            real_cubic_roots(-tr, minors, -det).to_vec()
        }
        n => panic!("char_poly_eigenvalues supports n <= 3, got {n}"),
    }
}
