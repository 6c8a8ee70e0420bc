//! Low-rank matrix completion through exposing vectors of fully observed
//! blocks, and solver-free recovery on the reduced face.
//!
//! The nuclear-norm SDP lift of an `m x n` completion problem has the
//! variable `Y = [[A, Z], [Z^T, B]]` of order `m + n`. Any fully observed
//! `p x q` block with `p, q > r` pins the row/column spaces of the optimal
//! `Y` locally: the kernels of the block give a PSD matrix annihilating
//! `Y`. Summing these over many blocks shrinks the face to dimension `r`,
//! where the observed entries determine `Y` by least squares and no SDP
//! solver is needed.

use crate::cones::{self, FaceRep};
use crate::numerics::{self, Mat, SymMatrix};
use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};

/// Partially observed rectangular matrix with a target rank.
#[derive(Clone, Debug)]
pub struct BipartiteObservations {
    m: usize,
    n: usize,
    r: usize,
    /// Sorted by `(row, col)`.
    entries: Vec<(usize, usize, f64)>,
    index: BTreeMap<(usize, usize), usize>,
    row_cols: Vec<BTreeSet<usize>>,
    col_rows: Vec<BTreeSet<usize>>,
}

impl BipartiteObservations {
    pub fn new(
        m: usize,
        n: usize,
        r: usize,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        if r == 0 {
            return Err(Error::Invalid("target rank must be at least 1".into()));
        }
        let mut map: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (i, j, v) in entries {
            if i >= m || j >= n {
                return Err(Error::Invalid(format!(
                    "entry ({i},{j}) out of range {m}x{n}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::Invalid("observed values must be finite".into()));
            }
            map.insert((i, j), v);
        }
        let entries: Vec<(usize, usize, f64)> = map.iter().map(|(&(i, j), &v)| (i, j, v)).collect();
        let mut index = BTreeMap::new();
        let mut row_cols = vec![BTreeSet::new(); m];
        let mut col_rows = vec![BTreeSet::new(); n];
        for (k, &(i, j, _)) in entries.iter().enumerate() {
            index.insert((i, j), k);
            row_cols[i].insert(j);
            col_rows[j].insert(i);
        }
        Ok(BipartiteObservations {
            m,
            n,
            r,
            entries,
            index,
            row_cols,
            col_rows,
        })
    }

    /// Observes a dense matrix at the given positions.
    pub fn observe(
        z: &Mat,
        pairs: impl IntoIterator<Item = (usize, usize)>,
        r: usize,
    ) -> Result<Self> {
        let entries = pairs.into_iter().map(|(i, j)| (i, j, z[(i, j)]));
        BipartiteObservations::new(z.rows(), z.cols(), r, entries)
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn num_cols(&self) -> usize {
        self.n
    }

    pub fn target_rank(&self) -> usize {
        self.r
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn value(&self, i: usize, j: usize) -> Option<f64> {
        self.index.get(&(i, j)).map(|&k| self.entries[k].2)
    }

    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        self.index.contains_key(&(i, j))
    }

    /// Dense copy of a fully observed block.
    pub fn block_matrix(&self, rows: &[usize], cols: &[usize]) -> Result<Mat> {
        let mut out = Mat::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                match self.value(i, j) {
                    Some(v) => out[(a, b)] = v,
                    None => {
                        return Err(Error::Invalid(format!(
                            "block entry ({i},{j}) is not observed"
                        )))
                    }
                }
            }
        }
        Ok(out)
    }

    fn values_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, _, v)| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

// ---------------------------------------------------------------------------
// Block discovery
// ---------------------------------------------------------------------------

/// Greedily grows fully observed complete bipartite blocks from every row
/// and every column seed: repeatedly add the row (column) sharing the most
/// observed columns (rows) while the shared set stays at least `q_min`
/// (`p_min`). Deterministic; duplicates are dropped and at most
/// `max_blocks` are returned.
pub fn find_blocks(
    obs: &BipartiteObservations,
    p_min: usize,
    q_min: usize,
    max_blocks: usize,
) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();

    let mut push = |rows: Vec<usize>, cols: Vec<usize>, out: &mut Vec<(Vec<usize>, Vec<usize>)>| {
        if rows.len() >= p_min && cols.len() >= q_min && seen.insert((rows.clone(), cols.clone())) {
            out.push((rows, cols));
        }
    };

    // Row-seeded pass.
    for seed in 0..obs.m {
        if out.len() >= max_blocks {
            break;
        }
        if obs.row_cols[seed].len() < q_min {
            continue;
        }
        let mut rows = vec![seed];
        let mut cols = obs.row_cols[seed].clone();
        loop {
            let mut best: Option<(usize, usize)> = None; // (shared, row)
            for cand in 0..obs.m {
                if rows.contains(&cand) {
                    continue;
                }
                let shared = cols.intersection(&obs.row_cols[cand]).count();
                if shared >= q_min && best.map_or(true, |(s, _)| shared > s) {
                    best = Some((shared, cand));
                }
            }
            let Some((_, cand)) = best else { break };
            cols = cols.intersection(&obs.row_cols[cand]).copied().collect();
            rows.push(cand);
        }
        rows.sort_unstable();
        push(rows, cols.into_iter().collect(), &mut out);
    }

    // Column-seeded pass covers columns the row pass may have missed.
    for seed in 0..obs.n {
        if out.len() >= max_blocks {
            break;
        }
        if obs.col_rows[seed].len() < p_min {
            continue;
        }
        let mut cols = vec![seed];
        let mut rows = obs.col_rows[seed].clone();
        loop {
            let mut best: Option<(usize, usize)> = None;
            for cand in 0..obs.n {
                if cols.contains(&cand) {
                    continue;
                }
                let shared = rows.intersection(&obs.col_rows[cand]).count();
                if shared >= p_min && best.map_or(true, |(s, _)| shared > s) {
                    best = Some((shared, cand));
                }
            }
            let Some((_, cand)) = best else { break };
            rows = rows.intersection(&obs.col_rows[cand]).copied().collect();
            cols.push(cand);
        }
        cols.sort_unstable();
        push(rows.into_iter().collect(), cols, &mut out);
    }
    out
}

// ---------------------------------------------------------------------------
// Exposing vectors and the face
// ---------------------------------------------------------------------------

/// Exposing vector of order `m + n` built from one fully observed block:
/// kernels of the block from the left and right sit on the block's row and
/// column indices. Rejects blocks whose numerical rank differs from the
/// target rank (the instance is non-generic or `r` is wrong).
pub fn block_exposing(
    obs: &BipartiteObservations,
    block: &(Vec<usize>, Vec<usize>),
    tol: f64,
) -> Result<SymMatrix> {
    let (rows, cols) = block;
    let r = obs.r;
    if rows.len() <= r || cols.len() <= r {
        return Err(Error::Invalid(format!(
            "block sizes {}x{} must exceed the target rank {r}",
            rows.len(),
            cols.len()
        )));
    }
    let z = obs.block_matrix(rows, cols)?;
    let sigma = numerics::singular_values(&z);
    let rank = numerics::numerical_rank(&sigma, Some(tol.max(1e-12)));
    if rank != r {
        return Err(Error::RankMismatch {
            expected: r,
            got: rank,
        });
    }
    // Left kernel: range(z)^perp in R^p; right kernel: range(z^T)^perp.
    let left_gram = SymMatrix::from_mat(&z.matmul(&z.transpose()));
    let right_gram = SymMatrix::from_mat(&z.tr_matmul(&z));
    let e_bar = numerics::nullspace_basis(&left_gram, None);
    let f_bar = numerics::nullspace_basis(&right_gram, None);
    if e_bar.cols() != rows.len() - r || f_bar.cols() != cols.len() - r {
        return Err(Error::RankMismatch {
            expected: r,
            got: rows.len() - e_bar.cols(),
        });
    }
    let mut w = SymMatrix::zeros(obs.m + obs.n);
    let ee = e_bar.matmul(&e_bar.transpose());
    for (a, &i) in rows.iter().enumerate() {
        for (b, &j) in rows.iter().enumerate() {
            if i <= j {
                w.set(i, j, w.get(i, j) + ee[(a, b)]);
            }
        }
    }
    let ff = f_bar.matmul(&f_bar.transpose());
    for (a, &j) in cols.iter().enumerate() {
        for (b, &l) in cols.iter().enumerate() {
            if j <= l {
                let (ii, jj) = (obs.m + j, obs.m + l);
                w.set(ii, jj, w.get(ii, jj) + ff[(a, b)]);
            }
        }
    }
    Ok(w)
}

/// Face of `S^{m+n}_+` exposed by the sum of block exposing vectors.
/// Blocks whose rank check fails are skipped with a log line.
pub fn lrmc_face(
    obs: &BipartiteObservations,
    blocks: &[(Vec<usize>, Vec<usize>)],
    tol: f64,
) -> Result<FaceRep> {
    let mut sum = SymMatrix::zeros(obs.m + obs.n);
    for block in blocks {
        match block_exposing(obs, block, tol) {
            Ok(w) => sum = sum.add(&w),
            Err(Error::RankMismatch { expected, got }) => {
                log::warn!(
                    "skipping {}x{} block: rank {got} does not match target {expected}",
                    block.0.len(),
                    block.1.len()
                );
            }
            Err(other) => return Err(other),
        }
    }
    cones::face_from_exposing(&sum, tol.max(1e-9))
}

/// Recovery outcome with diagnostics.
#[derive(Clone, Debug)]
pub struct LrmcReport {
    pub blocks_found: usize,
    pub face_dim: usize,
    pub observed_relative_residual: f64,
}

/// Solver-free recovery: discover blocks, reduce the lifted face, and solve
/// the observed entries by least squares over the face coordinates. `None`
/// when the face stays too big or the residual exceeds `tol`.
///
/// The reduced face has dimension `2r` when enough blocks exist: its kernel
/// carries the column space and the row space of the hidden matrix. The
/// recovered `Z` is read from the off-diagonal block of the lift before any
/// PSD projection; the lift's diagonal blocks are unobserved, so projecting
/// the least-squares solution onto the cone would halve the entries.
pub fn lrmc_recover(obs: &BipartiteObservations, tol: f64) -> Result<Option<(Mat, LrmcReport)>> {
    let r = obs.r;
    let blocks = find_blocks(obs, r + 1, r + 1, 2 * (obs.m + obs.n));
    let face = lrmc_face(obs, &blocks, 1e-9)?;
    let mut report = LrmcReport {
        blocks_found: blocks.len(),
        face_dim: face.dim(),
        observed_relative_residual: f64::INFINITY,
    };
    if face.dim() > 2 * r + 2 {
        log::warn!(
            "face dimension {} is too large for recovery (target {})",
            face.dim(),
            2 * r
        );
        return Ok(None);
    }
    let k = face.dim();
    let v = face.basis();
    // Observed entry (i, j): Y[i, m+j] = u_i^T R w_j is linear in R.
    let cols = k * (k + 1) / 2;
    let mut a = Mat::zeros(obs.entries.len(), cols);
    let rhs: Vec<f64> = obs.entries.iter().map(|&(_, _, z)| z).collect();
    for (row, &(i, j, _)) in obs.entries.iter().enumerate() {
        let jj = obs.m + j;
        let mut col = 0;
        for bcol in 0..k {
            for acol in 0..=bcol {
                a[(row, col)] = if acol == bcol {
                    v[(i, acol)] * v[(jj, acol)]
                } else {
                    v[(i, acol)] * v[(jj, bcol)] + v[(i, bcol)] * v[(jj, acol)]
                };
                col += 1;
            }
        }
    }
    let sol = numerics::solve_least_squares(&a, &rhs);
    let mut rm = SymMatrix::zeros(k);
    let mut idx = 0;
    for bcol in 0..k {
        for acol in 0..=bcol {
            rm.set(acol, bcol, sol[idx]);
            idx += 1;
        }
    }
    // Z = V_top R V_bot^T without materializing the full lift.
    let v_top = Mat::from_fn(obs.m, k, |i, t| v[(i, t)]);
    let v_bot = Mat::from_fn(obs.n, k, |j, t| v[(obs.m + j, t)]);
    let z = v_top.matmul(&rm.to_mat()).matmul(&v_bot.transpose());
    let res: f64 = obs
        .entries
        .iter()
        .map(|&(i, j, val)| (z[(i, j)] - val) * (z[(i, j)] - val))
        .sum::<f64>()
        .sqrt();
    let rel = res / obs.values_norm().max(1.0);
    report.observed_relative_residual = rel;
    if rel <= tol {
        Ok(Some((z, report)))
    } else {
        log::warn!("observed-entry relative residual {rel:e} exceeds tolerance {tol:e}");
        Ok(None)
    }
}

/// Nuclear norm: the sum of the singular values.
pub fn nuclear_norm(z: &Mat) -> f64 {
    numerics::singular_values(z).iter().sum()
}

/// The optimal lift `Y = [U; V] Sigma [U; V]^T` of a matrix from its
/// compact SVD; satisfies `trace(Y) / 2 = ||Z||_*`.
pub fn optimal_lift(z: &Mat) -> SymMatrix {
    let (u, sigma, v) = numerics::svd_compact(z, None);
    let m = z.rows();
    let n = z.cols();
    let mut stacked = Mat::zeros(m + n, sigma.len());
    for k in 0..sigma.len() {
        for i in 0..m {
            stacked[(i, k)] = u[(i, k)];
        }
        for j in 0..n {
            stacked[(m + j, k)] = v[(j, k)];
        }
    }
    let sig = SymMatrix::diag(&sigma);
    sig.expand(&stacked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn planted(m: usize, n: usize, r: usize, rng: &mut ChaCha8Rng) -> Mat {
        let p = Mat::from_fn(m, r, |_, _| rng.random_range(-1.0..1.0));
        let q = Mat::from_fn(n, r, |_, _| rng.random_range(-1.0..1.0));
        p.matmul(&q.transpose())
    }

    fn dense_pairs(m: usize, n: usize) -> Vec<(usize, usize)> {
        (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect()
    }

    fn random_pairs(m: usize, n: usize, density: f64, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..m {
            for j in 0..n {
                if rng.random_bool(density) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    #[test]
    fn find_blocks_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // Fully observed: one block covering everything.
        let z = planted(4, 5, 2, &mut rng);
        let obs = BipartiteObservations::observe(&z, dense_pairs(4, 5), 2).unwrap();
        let blocks = find_blocks(&obs, 3, 3, 100);
        assert!(!blocks.is_empty());
        assert_eq!(blocks[0].0.len(), 4);
        assert_eq!(blocks[0].1.len(), 5);

        // Two shifted diagonals: no 2x2 block is fully observed.
        let n = 6;
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| [(i, i), (i, (i + 1) % n)]).collect();
        let z = planted(n, n, 1, &mut rng);
        let obs = BipartiteObservations::observe(&z, pairs, 1).unwrap();
        assert!(find_blocks(&obs, 2, 2, 100).is_empty());

        // A planted fully observed 6x6 block among sparse noise.
        let z = planted(12, 12, 4, &mut rng);
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for i in 3..9 {
            for j in 2..8 {
                pairs.push((i, j));
            }
        }
        let obs = BipartiteObservations::observe(&z, pairs, 4).unwrap();
        let blocks = find_blocks(&obs, 5, 5, 100);
        assert!(blocks.iter().any(|(rows, cols)| {
            rows == &vec![3, 4, 5, 6, 7, 8] && cols == &vec![2, 3, 4, 5, 6, 7]
        }));
    }

    #[test]
    fn block_exposing_examples() {
        // Rank-1 2x2 block: both kernels are (1,-1)/sqrt(2).
        let z = Mat::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let obs = BipartiteObservations::observe(&z, dense_pairs(2, 2), 1).unwrap();
        let w = block_exposing(&obs, &(vec![0, 1], vec![0, 1]), 1e-10).unwrap();
        assert!((w.get(0, 0) - 0.5).abs() < 1e-12);
        assert!((w.get(0, 1) + 0.5).abs() < 1e-12);
        assert!((w.get(2, 3) + 0.5).abs() < 1e-12);
        let spec = w.eig();
        assert_eq!(numerics::numerical_rank(&spec.values, Some(1e-9)), 2);

        // Block sizes must exceed the rank.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let z = planted(6, 6, 2, &mut rng);
        let obs = BipartiteObservations::observe(&z, dense_pairs(6, 6), 2).unwrap();
        assert!(block_exposing(&obs, &(vec![0, 1], vec![0, 1]), 1e-10).is_err());

        // Rank-4 planted block: exposing rank (p-4) + (q-4).
        let z = planted(8, 9, 4, &mut rng);
        let obs = BipartiteObservations::observe(&z, dense_pairs(8, 9), 4).unwrap();
        let rows: Vec<usize> = (0..8).collect();
        let cols: Vec<usize> = (0..9).collect();
        let w = block_exposing(&obs, &(rows, cols), 1e-10).unwrap();
        let spec = w.eig();
        assert_eq!(
            numerics::numerical_rank(&spec.values, Some(1e-8)),
            (8 - 4) + (9 - 4)
        );

        // Declaring the wrong rank is a mismatch.
        let obs = BipartiteObservations::observe(&z, dense_pairs(8, 9), 3).unwrap();
        let rows: Vec<usize> = (0..8).collect();
        let cols: Vec<usize> = (0..9).collect();
        assert!(matches!(
            block_exposing(&obs, &(rows, cols), 1e-10),
            Err(Error::RankMismatch { .. })
        ));
    }

    #[test]
    fn exposing_annihilates_planted_lift() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let (m, n, r) = (
                rng.random_range(4..9),
                rng.random_range(4..9),
                rng.random_range(1..3),
            );
            let z = planted(m, n, r, &mut rng);
            let obs = BipartiteObservations::observe(&z, dense_pairs(m, n), r).unwrap();
            let y = optimal_lift(&z);
            let rows: Vec<usize> = (0..m).collect();
            let cols: Vec<usize> = (0..n).collect();
            let w = block_exposing(&obs, &(rows, cols), 1e-10).unwrap();
            assert!(w.inner(&y).abs() <= 1e-8 * y.fro_norm());
        }
    }

    #[test]
    fn nuclear_norm_examples() {
        assert!((nuclear_norm(&Mat::identity(3)) - 3.0).abs() < 1e-12);
        assert!(nuclear_norm(&Mat::zeros(2, 5)) < 1e-12);
        // Rank-one u v^T has a single singular value ||u|| ||v||.
        let u = [1.0, -2.0, 2.0];
        let v = [3.0, 4.0];
        let z = Mat::from_fn(3, 2, |i, j| u[i] * v[j]);
        assert!((nuclear_norm(&z) - 3.0 * 5.0).abs() < 1e-10);
    }

    #[test]
    fn nuclear_norm_is_half_trace_of_lift() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let (m, n, r) = (
                rng.random_range(2..8),
                rng.random_range(2..8),
                rng.random_range(1..3),
            );
            let z = planted(m, n, r, &mut rng);
            let y = optimal_lift(&z);
            assert!((nuclear_norm(&z) - 0.5 * y.trace()).abs() <= 1e-9 * (1.0 + y.trace()));
        }
    }

    #[test]
    fn face_dimension_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        // One global block: the kernel carries both the column space and
        // the row space, so the face dimension is 2r.
        let (m, n, r) = (7, 8, 2);
        let z = planted(m, n, r, &mut rng);
        let obs = BipartiteObservations::observe(&z, dense_pairs(m, n), r).unwrap();
        let rows: Vec<usize> = (0..m).collect();
        let cols: Vec<usize> = (0..n).collect();
        let face = lrmc_face(&obs, &[(rows, cols)], 1e-10).unwrap();
        assert_eq!(face.dim(), 2 * r);

        // No blocks: whole cone.
        let face = lrmc_face(&obs, &[], 1e-10).unwrap();
        assert_eq!(face.dim(), m + n);

        // Planted 20x30 rank-2 with many discovered blocks reaches dim 2.
        let z = planted(20, 30, 2, &mut rng);
        let pairs = random_pairs(20, 30, 0.5, &mut rng);
        let obs = BipartiteObservations::observe(&z, pairs, 2).unwrap();
        let blocks = find_blocks(&obs, 3, 3, 100);
        let face = lrmc_face(&obs, &blocks, 1e-10).unwrap();
        assert_eq!(face.dim(), 2 * 2);
    }

    #[test]
    fn recover_fully_observed() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let z = planted(6, 7, 2, &mut rng);
        let obs = BipartiteObservations::observe(&z, dense_pairs(6, 7), 2).unwrap();
        let (zr, report) = lrmc_recover(&obs, 1e-8).unwrap().expect("recoverable");
        assert!(zr.sub(&z).fro_norm() <= 1e-8 * z.fro_norm());
        assert_eq!(report.face_dim, 4);
    }

    #[test]
    fn recover_insufficient_blocks_is_none() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 8;
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| [(i, i), (i, (i + 1) % n)]).collect();
        let z = planted(n, n, 1, &mut rng);
        let obs = BipartiteObservations::observe(&z, pairs, 1).unwrap();
        assert!(lrmc_recover(&obs, 1e-8).unwrap().is_none());
    }

    #[test]
    fn recovery_residual_on_held_out_entries() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut solved = 0;
        for seed in 0..50 {
            let mut inst_rng = ChaCha8Rng::seed_from_u64(4000 + seed);
            let m = inst_rng.random_range(20..40);
            let n = inst_rng.random_range(20..60);
            let r = inst_rng.random_range(1..=3);
            let z = planted(m, n, r, &mut rng);
            let pairs = random_pairs(m, n, 0.55, &mut inst_rng);
            let obs = BipartiteObservations::observe(&z, pairs, r).unwrap();
            if let Some((zr, report)) = lrmc_recover(&obs, 1e-7).unwrap() {
                if report.face_dim == 2 * r {
                    solved += 1;
                    let mut err = 0.0f64;
                    let mut norm = 0.0f64;
                    for i in 0..m {
                        for j in 0..n {
                            if !obs.is_observed(i, j) {
                                err += (zr[(i, j)] - z[(i, j)]).powi(2);
                                norm += z[(i, j)].powi(2);
                            }
                        }
                    }
                    let rel = (err / norm.max(1e-30)).sqrt();
                    assert!(rel <= 1e-6, "seed={seed} rel={rel:e}");
                }
            }
        }
        assert!(
            solved >= 40,
            "only {solved}/50 instances recovered at face dim r"
        );
    }
}
