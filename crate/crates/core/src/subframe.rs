//! Subset certification of frame-sequence and Riesz-frame properties,
//! Riesz-basis extraction, disjoint-support partitions and the g/h/k
//! structural decomposition.

use std::collections::BTreeSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::frame::{optimal_bounds, BoundsKind, FrameBounds, FrameFamily, IndexSet};
use crate::linalg::{self, dot, Lu, Matrix, TolerancePolicy};
use crate::rng::stream_rng;

/// Largest family accepted by exhaustive subset enumeration.
pub const EXHAUSTIVE_LIMIT: usize = 22;

/// Absolute coordinate threshold separating designed zeros from rounding noise.
pub const DEFAULT_COORD_TOL: f64 = 1e-8;

/// Support fraction of the ambient dimension above which a vector is treated
/// as having "infinite" support.
pub const DEFAULT_SUPPORT_FRACTION: f64 = 0.9;

/// A subset with its measured frame-sequence bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetCertificate {
    pub subset: IndexSet,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RieszFrameReport {
    pub riesz_lower: f64,
    pub riesz_upper: f64,
    pub worst: SubsetCertificate,
    pub exhaustive: bool,
    /// Nonempty subsets with a nonzero vector that were evaluated.
    pub subsets_examined: usize,
    /// Subsets consisting only of zero vectors, skipped.
    pub zero_subsets_skipped: usize,
}

#[derive(Serialize)]
struct RieszReportJson<'a> {
    riesz_lower: f64,
    riesz_upper: f64,
    worst_subset: &'a IndexSet,
    exhaustive: bool,
    subsets_examined: usize,
    zero_subsets_skipped: usize,
}

impl Serialize for RieszFrameReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RieszReportJson {
            riesz_lower: self.riesz_lower,
            riesz_upper: self.riesz_upper,
            worst_subset: &self.worst.subset,
            exhaustive: self.exhaustive,
            subsets_examined: self.subsets_examined,
            zero_subsets_skipped: self.zero_subsets_skipped,
        }
        .serialize(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubsetMode {
    Exhaustive,
    /// All singletons, all pairs, the full set, plus `n_samples` seeded random subsets.
    Sampled { n_samples: usize, seed: u64 },
}

/// Split of one h-vector against `G = span(g_1..g_m0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HSplit {
    pub index: usize,
    /// Component in the orthogonal complement of G.
    pub h1: Vec<f64>,
    /// Component in G.
    pub h2: Vec<f64>,
}

/// Partition of a family into a Riesz-basis part `g`, finitely supported
/// extras `h` and (proxy) infinitely supported extras `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubframeDecomposition {
    pub g: IndexSet,
    pub h: IndexSet,
    pub k: IndexSet,
    pub m0: usize,
    pub h_split: Vec<HSplit>,
    pub h2_energy: f64,
}

impl SubframeDecomposition {
    /// Checks that g, h and k partition `0..len`.
    pub fn check_partition(&self, len: usize) -> Result<()> {
        let all = self.g.union(&self.h).union(&self.k);
        if all.len() != len
            || self.g.len() + self.h.len() + self.k.len() != len
            || all.iter().any(|i| i >= len)
        {
            return Err(FrameError::WrongStructure(format!(
                "g/h/k do not partition {len} indices"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyOptions {
    pub support_fraction: f64,
    pub coord_tol: f64,
    /// h-coordinates with magnitude in `(coord_tol, g_floor)` are treated as
    /// G-components; `m0` is the shortest basis prefix holding all of them.
    /// Zero disables the split.
    pub g_floor: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            support_fraction: DEFAULT_SUPPORT_FRACTION,
            coord_tol: DEFAULT_COORD_TOL,
            g_floor: 0.0,
        }
    }
}

fn subset_bounds<'a>(
    f: &'a FrameFamily,
    indices: impl Iterator<Item = usize>,
    tol: &TolerancePolicy,
) -> Result<Option<(f64, f64)>> {
    let vs: Vec<&'a [f64]> = indices.map(|i| f.vector(i)).collect();
    let (rank, spectrum) = linalg::span_spectrum(&vs, tol)?;
    if rank == 0 {
        return Ok(None);
    }
    Ok(Some((spectrum[0].max(0.0), spectrum[rank - 1])))
}

/// Whether the family is a frame for its span with lower bound above `threshold`.
pub fn is_frame_sequence(
    f: &FrameFamily,
    threshold: f64,
    tol: &TolerancePolicy,
) -> Result<(bool, FrameBounds)> {
    let b = optimal_bounds(f, BoundsKind::FrameSequence, tol)?;
    Ok((b.lower > threshold, b))
}

/// Minimum and maximum frame-sequence bounds over all (or sampled) nonempty subsets.
pub fn riesz_frame_bound(
    f: &FrameFamily,
    mode: SubsetMode,
    tol: &TolerancePolicy,
) -> Result<RieszFrameReport> {
    let n = f.len();
    if n == 0 {
        return Err(FrameError::Degenerate("empty family".into()));
    }
    let (subsets, evaluated): (Vec<IndexSet>, Vec<Option<(f64, f64)>>) = match mode {
        SubsetMode::Exhaustive => {
            if n > EXHAUSTIVE_LIMIT {
                return Err(FrameError::SizeLimit {
                    size: n,
                    limit: EXHAUSTIVE_LIMIT,
                });
            }
            let masks = 1u64..(1u64 << n);
            let evaluated = masks
                .into_par_iter()
                .map(|mask| subset_bounds(f, (0..n).filter(|b| mask >> b & 1 == 1), tol))
                .collect::<Result<Vec<_>>>()?;
            // subsets are materialized lazily from masks below
            (Vec::new(), evaluated)
        }
        SubsetMode::Sampled { n_samples, seed } => {
            let subsets = sampled_subsets(n, n_samples, seed);
            let evaluated = subsets
                .par_iter()
                .map(|s| subset_bounds(f, s.iter(), tol))
                .collect::<Result<Vec<_>>>()?;
            (subsets, evaluated)
        }
    };
    let subset_at = |pos: usize| -> IndexSet {
        if subsets.is_empty() {
            IndexSet::from_mask(pos as u64 + 1)
        } else {
            subsets[pos].clone()
        }
    };

    let examined = evaluated.iter().filter(|e| e.is_some()).count();
    let zero_skipped = evaluated.len() - examined;
    if examined == 0 {
        return Err(FrameError::Degenerate("family has no nonzero vector".into()));
    }
    let (riesz_lower, riesz_upper) = evaluated
        .par_iter()
        .flatten()
        .fold(
            || (f64::INFINITY, 0.0f64),
            |(lo, hi), &(l, u)| (lo.min(l), hi.max(u)),
        )
        .reduce(
            || (f64::INFINITY, 0.0f64),
            |(a, b), (c, d)| (a.min(c), b.max(d)),
        );

    // Ties: smallest index list (lexicographic) among subsets within rounding of the minimum.
    let slack = 1e-9 * riesz_lower + 4.0 * f64::EPSILON * riesz_upper;
    let worst_pos = evaluated
        .iter()
        .enumerate()
        .filter_map(|(pos, e)| e.filter(|(l, _)| *l - riesz_lower <= slack).map(|_| pos))
        .min_by(|&a, &b| subset_at(a).cmp(&subset_at(b)))
        .expect("minimum is attained");
    let (wl, wu) = evaluated[worst_pos].expect("filtered to evaluated subsets");

    Ok(RieszFrameReport {
        riesz_lower,
        riesz_upper,
        worst: SubsetCertificate {
            subset: subset_at(worst_pos),
            lower: wl,
            upper: wu,
        },
        exhaustive: matches!(mode, SubsetMode::Exhaustive),
        subsets_examined: examined,
        zero_subsets_skipped: zero_skipped,
    })
}

fn sampled_subsets(n: usize, n_samples: usize, seed: u64) -> Vec<IndexSet> {
    let mut set: BTreeSet<IndexSet> = BTreeSet::new();
    for i in 0..n {
        set.insert(IndexSet::range(i, i + 1));
        for j in i + 1..n {
            set.insert(IndexSet::from_unsorted(vec![i, j], n).expect("in range"));
        }
    }
    set.insert(IndexSet::range(0, n));
    let mut rng = stream_rng(seed, 0);
    for _ in 0..n_samples {
        loop {
            let picked: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
            if !picked.is_empty() {
                set.insert(IndexSet::new(picked, n).expect("sorted by construction"));
                break;
            }
        }
    }
    set.into_iter().collect()
}

/// Greedy maximal linearly independent subfamily in ascending index order,
/// with its Riesz basis constants.
pub fn extract_riesz_basis(f: &FrameFamily, tol: &TolerancePolicy) -> Result<(IndexSet, FrameBounds)> {
    let (_, selected) = linalg::orthonormalize(f, tol);
    if selected.is_empty() {
        return Err(FrameError::Degenerate("family has no nonzero vector".into()));
    }
    let indices = IndexSet::new(selected, f.len())?;
    let constants = optimal_bounds(&f.subfamily(&indices), BoundsKind::RieszConstants, tol)?;
    Ok((indices, constants))
}

/// Coordinates of every vector of `f` in a spanning, linearly independent `basis`.
pub fn basis_coordinates(basis: &FrameFamily, f: &FrameFamily) -> Result<Vec<Vec<f64>>> {
    let dim = basis.dim();
    if f.dim() != dim {
        return Err(FrameError::DimensionMismatch {
            expected: dim,
            found: f.dim(),
        });
    }
    let (span, _) = linalg::orthonormal_span(basis.vectors(), &TolerancePolicy::default());
    if basis.len() != dim || span.len() != dim {
        return Err(FrameError::InvalidBasis(format!(
            "need {dim} independent vectors spanning R^{dim}, got {} vectors of rank {}",
            basis.len(),
            span.len()
        )));
    }
    let mut m = Matrix::zeros(dim, dim);
    for (j, b) in basis.vectors().iter().enumerate() {
        for i in 0..dim {
            m[(i, j)] = b[i];
        }
    }
    let lu = Lu::factor(&m).map_err(|e| FrameError::InvalidBasis(e.to_string()))?;
    f.vectors().iter().map(|v| lu.solve(v)).collect()
}

fn support(coords: &[f64], coord_tol: f64) -> Vec<usize> {
    coords
        .iter()
        .enumerate()
        .filter(|(_, c)| c.abs() > coord_tol)
        .map(|(n, _)| n)
        .collect()
}

/// First-fit grouping into disjointly supported groups relative to `basis`,
/// in ascending index order. Groups are returned in creation order.
pub fn partition_disjoint_support(
    f: &FrameFamily,
    basis: &FrameFamily,
    coord_tol: f64,
) -> Result<Vec<IndexSet>> {
    let coords = basis_coordinates(basis, f)?;
    let dim = basis.dim();
    let mut groups: Vec<(Vec<usize>, Vec<bool>)> = Vec::new();
    for (i, c) in coords.iter().enumerate() {
        let supp = support(c, coord_tol);
        match groups
            .iter_mut()
            .find(|(_, used)| supp.iter().all(|&n| !used[n]))
        {
            Some((members, used)) => {
                members.push(i);
                supp.iter().for_each(|&n| used[n] = true);
            }
            None => {
                let mut used = vec![false; dim];
                supp.iter().for_each(|&n| used[n] = true);
                groups.push((vec![i], used));
            }
        }
    }
    groups
        .into_iter()
        .map(|(members, _)| IndexSet::new(members, f.len()))
        .collect()
}

/// Classifies non-basis vectors by support size relative to `basis_indices`.
pub fn classify_supports(
    f: &FrameFamily,
    basis_indices: &IndexSet,
    support_fraction: f64,
) -> Result<SubframeDecomposition> {
    classify_supports_with(
        f,
        basis_indices,
        &ClassifyOptions {
            support_fraction,
            ..ClassifyOptions::default()
        },
    )
}

pub fn classify_supports_with(
    f: &FrameFamily,
    basis_indices: &IndexSet,
    opts: &ClassifyOptions,
) -> Result<SubframeDecomposition> {
    if let Some(bad) = basis_indices.iter().find(|&i| i >= f.len()) {
        return Err(FrameError::InvalidBasis(format!("basis index {bad} out of range")));
    }
    let dim = f.dim();
    let basis = f.subfamily(basis_indices);
    let others = basis_indices.complement(f.len());
    let coords = basis_coordinates(&basis, &f.subfamily(&others))?;

    let mut h = Vec::new();
    let mut k = Vec::new();
    let mut h_coords = Vec::new();
    for (pos, i) in others.iter().enumerate() {
        let supp = support(&coords[pos], opts.coord_tol);
        if supp.len() as f64 >= opts.support_fraction * dim as f64 {
            k.push(i);
        } else {
            h.push(i);
            h_coords.push(&coords[pos]);
        }
    }

    let m0 = h_coords
        .iter()
        .flat_map(|c| {
            c.iter()
                .enumerate()
                .filter(|(_, x)| x.abs() > opts.coord_tol && x.abs() < opts.g_floor)
                .map(|(n, _)| n + 1)
        })
        .max()
        .unwrap_or(0)
        .min(dim);

    let g_prefix: Vec<&[f64]> = basis.vectors()[..m0].iter().map(Vec::as_slice).collect();
    let (g_onb, _) = linalg::orthonormal_span(&g_prefix, &TolerancePolicy::default());
    let mut h2_energy = 0.0;
    let h_split = h
        .iter()
        .map(|&i| {
            let v = f.vector(i);
            let mut h2 = vec![0.0; dim];
            for q in &g_onb {
                linalg::axpy(dot(q, v), q, &mut h2);
            }
            let h1: Vec<f64> = v.iter().zip(&h2).map(|(a, b)| a - b).collect();
            h2_energy += linalg::norm_sq(&h2);
            HSplit { index: i, h1, h2 }
        })
        .collect();

    Ok(SubframeDecomposition {
        g: basis_indices.clone(),
        h: IndexSet::new(h, f.len())?,
        k: IndexSet::new(k, f.len())?,
        m0,
        h_split,
        h2_energy,
    })
}

/// Empirical evidence for the structure of a Riesz frame split into a basis
/// part and finitely supported extras.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureReport {
    /// Minimum frame-sequence lower bound of `(P_delta h_i)_{i in gamma1}` over
    /// the samples, or the basis-only bound when no sample had a nonzero vector.
    pub empirical_a0: f64,
    pub witness_delta: Option<IndexSet>,
    pub witness_gamma: Option<IndexSet>,
    pub samples_evaluated: usize,
    pub samples_skipped: usize,
    /// Largest support of an h-vector in basis coordinates.
    pub max_support: usize,
    /// Smallest and largest nonzero |h_i(j)|.
    pub coeff_min: Option<f64>,
    pub coeff_max: Option<f64>,
}

/// Which reading of the coefficient window holds for given Riesz frame bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WindowCheck {
    /// `A^2 <= |h_i(j)| <= B^2`
    pub literal: bool,
    /// `A <= |h_i(j)|^2 <= B`
    pub squared: bool,
}

impl StructureReport {
    pub fn window_check(&self, riesz_lower: f64, riesz_upper: f64) -> WindowCheck {
        match (self.coeff_min, self.coeff_max) {
            (Some(lo), Some(hi)) => WindowCheck {
                literal: riesz_lower * riesz_lower <= lo && hi <= riesz_upper * riesz_upper,
                squared: riesz_lower <= lo * lo && hi * hi <= riesz_upper,
            },
            _ => WindowCheck {
                literal: true,
                squared: true,
            },
        }
    }
}

/// Frame-sequence lower bound of `(P_delta h_i)_{i in gamma1}` where `P_delta`
/// keeps the basis coordinates in `delta`. `None` if every projection vanishes.
pub fn natural_projection_lower(
    f: &FrameFamily,
    dec: &SubframeDecomposition,
    delta: &IndexSet,
    gamma1: &IndexSet,
    tol: &TolerancePolicy,
) -> Result<Option<f64>> {
    if let Some(bad) = gamma1.iter().find(|&i| !dec.h.contains(i)) {
        return Err(FrameError::InvalidInput(format!("index {bad} is not an h-vector")));
    }
    let basis = f.subfamily(&dec.g);
    let coords = basis_coordinates(&basis, &f.subfamily(gamma1))?;
    projected_lower(&basis, &coords, delta, tol)
}

fn projected_lower(
    basis: &FrameFamily,
    coords: &[Vec<f64>],
    delta: &IndexSet,
    tol: &TolerancePolicy,
) -> Result<Option<f64>> {
    let projected: Vec<Vec<f64>> = coords
        .iter()
        .map(|c| {
            let mut v = vec![0.0; basis.dim()];
            for j in delta.iter() {
                linalg::axpy(c[j], basis.vector(j), &mut v);
            }
            v
        })
        .collect();
    let (rank, spectrum) = linalg::span_spectrum(&projected, tol)?;
    Ok((rank > 0).then(|| spectrum[0].max(0.0)))
}

/// Samples coordinate subsets `delta` and h-subsets `gamma1`, reporting the
/// smallest frame-sequence lower bound of the projected h-vectors together
/// with the support size and coefficient window of the h-vectors.
pub fn verify_structure(
    f: &FrameFamily,
    dec: &SubframeDecomposition,
    n_samples: usize,
    seed: u64,
    tol: &TolerancePolicy,
) -> Result<StructureReport> {
    if !dec.k.is_empty() {
        return Err(FrameError::WrongStructure(format!(
            "decomposition has {} infinitely supported vectors",
            dec.k.len()
        )));
    }
    dec.check_partition(f.len())?;
    let basis = f.subfamily(&dec.g);
    let dim = f.dim();
    let coords = basis_coordinates(&basis, &f.subfamily(&dec.h))?;

    let mut max_support = 0;
    let mut coeff_min: Option<f64> = None;
    let mut coeff_max: Option<f64> = None;
    for c in &coords {
        let supp = support(c, DEFAULT_COORD_TOL);
        max_support = max_support.max(supp.len());
        for n in supp {
            let a = c[n].abs();
            coeff_min = Some(coeff_min.map_or(a, |m| m.min(a)));
            coeff_max = Some(coeff_max.map_or(a, |m| m.max(a)));
        }
    }

    let nh = dec.h.len();
    let mut samples = Vec::with_capacity(n_samples);
    if nh > 0 {
        let mut rng = stream_rng(seed, 0);
        for _ in 0..n_samples {
            let delta: Vec<usize> = (0..dim).filter(|_| rng.random_bool(0.5)).collect();
            let mut gamma: Vec<usize> = (0..nh).filter(|_| rng.random_bool(0.5)).collect();
            if gamma.is_empty() {
                gamma.push(rng.random_range(0..nh));
            }
            samples.push((
                IndexSet::new(delta, dim)?,
                IndexSet::new(gamma, nh)?,
            ));
        }
    }
    let lowers = samples
        .par_iter()
        .map(|(delta, gamma)| {
            let sub: Vec<Vec<f64>> = gamma.iter().map(|p| coords[p].clone()).collect();
            projected_lower(&basis, &sub, delta, tol)
        })
        .collect::<Result<Vec<_>>>()?;

    let evaluated = lowers.iter().filter(|l| l.is_some()).count();
    let best = lowers
        .iter()
        .enumerate()
        .filter_map(|(i, l)| l.map(|l| (i, l)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

    let (empirical_a0, witness_delta, witness_gamma) = match best {
        Some((i, l)) => {
            let (delta, gamma) = &samples[i];
            let gamma_global = IndexSet::new(
                gamma.iter().map(|p| dec.h.as_slice()[p]).collect(),
                f.len(),
            )?;
            (l, Some(delta.clone()), Some(gamma_global))
        }
        None => {
            let b = optimal_bounds(&basis, BoundsKind::FrameSequence, tol)?;
            (b.lower, None, None)
        }
    };

    Ok(StructureReport {
        empirical_a0,
        witness_delta,
        witness_gamma,
        samples_evaluated: evaluated,
        samples_skipped: samples.len() - evaluated,
        max_support,
        coeff_min,
        coeff_max,
    })
}
