//! Euclidean distance matrix completion and sensor network localization.
//!
//! Squared distances relate to centered Gram matrices through the linear
//! isomorphism `K(X)_ij = X_ii + X_jj - 2 X_ij`; the EDM cone is the image
//! of `S^n_+ ∩ S^n_c`, so distance problems inherently fail strict
//! feasibility and clique facial reduction applies. The noise-robust path
//! averages per-clique exposing vectors and takes a best PSD approximation
//! of the prescribed rank before reading off the face. Anchors are used
//! only in post-processing (Procrustes alignment); they play no role in the
//! reduction itself.

use crate::cones::{self, FaceRep};
use crate::numerics::{self, Mat, SymMatrix};
use crate::{Error, Result};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

/// Partial squared-distance data on a loopless graph, with a target
/// embedding dimension.
#[derive(Clone, Debug)]
pub struct EdmInstance {
    n: usize,
    /// Sorted `(i, j)` with `i < j`.
    edges: Vec<(usize, usize)>,
    index: BTreeMap<(usize, usize), usize>,
    adj: Vec<BTreeSet<usize>>,
    d: Vec<f64>,
    r: usize,
}

impl EdmInstance {
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        d: Vec<f64>,
        r: usize,
    ) -> Result<Self> {
        if r == 0 {
            return Err(Error::Invalid(
                "embedding dimension must be at least 1".into(),
            ));
        }
        // Pair values with their edges before canonicalizing the order; a
        // duplicated edge must carry a consistent value.
        let raw: Vec<(usize, usize)> = edges.into_iter().collect();
        if d.len() != raw.len() {
            return Err(Error::DimensionMismatch {
                expected: raw.len(),
                got: d.len(),
            });
        }
        if d.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::Invalid(
                "squared distances must be finite and nonnegative".into(),
            ));
        }
        let mut map: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (&(a, b), &val) in raw.iter().zip(&d) {
            if a == b {
                return Err(Error::Invalid(format!(
                    "self-loop ({a},{a}) not allowed in EDM data"
                )));
            }
            let key = if a < b { (a, b) } else { (b, a) };
            if key.1 >= n {
                return Err(Error::Invalid(format!(
                    "edge ({a},{b}) out of range for n={n}"
                )));
            }
            if let Some(&old) = map.get(&key) {
                if (old - val).abs() > 1e-12 * (1.0 + old.abs()) {
                    return Err(Error::Invalid(format!(
                        "edge ({a},{b}) observed twice with conflicting values"
                    )));
                }
            }
            map.insert(key, val);
        }
        let edges: Vec<(usize, usize)> = map.keys().copied().collect();
        let d: Vec<f64> = map.values().copied().collect();
        let mut index = BTreeMap::new();
        let mut adj = vec![BTreeSet::new(); n];
        for (k, &(i, j)) in edges.iter().enumerate() {
            index.insert((i, j), k);
            adj[i].insert(j);
            adj[j].insert(i);
        }
        Ok(EdmInstance {
            n,
            edges,
            index,
            adj,
            d,
            r,
        })
    }

    /// Observes pairwise squared distances of point rows on given edges.
    pub fn observe_points(
        points: &Mat,
        edges: impl IntoIterator<Item = (usize, usize)>,
        r: usize,
    ) -> Result<Self> {
        let n = points.rows();
        let edges: Vec<(usize, usize)> = edges.into_iter().collect();
        let d = edges
            .iter()
            .map(|&(i, j)| {
                (0..points.cols())
                    .map(|t| (points[(i, t)] - points[(j, t)]).powi(2))
                    .sum()
            })
            .collect();
        EdmInstance::new(n, edges, d, r)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn embedding_dim(&self) -> usize {
        self.r
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn distances(&self) -> &[f64] {
        &self.d
    }

    pub fn distance(&self, i: usize, j: usize) -> Option<f64> {
        let key = if i < j { (i, j) } else { (j, i) };
        self.index.get(&key).map(|&k| self.d[k])
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adj[v]
    }

    pub fn is_clique(&self, alpha: &[usize]) -> bool {
        alpha.len() >= 2
            && alpha.iter().enumerate().all(|(s, &i)| {
                alpha[s + 1..]
                    .iter()
                    .all(|&j| self.distance(i, j).is_some())
            })
    }

    pub fn max_distance(&self) -> f64 {
        self.d.iter().fold(0.0, |a, &v| a.max(v))
    }

    /// Hollow matrix of observed squared distances on a clique.
    pub fn clique_matrix(&self, alpha: &[usize]) -> Result<SymMatrix> {
        if !self.is_clique(alpha) {
            return Err(Error::Invalid(
                "index set is not a clique of the distance graph".into(),
            ));
        }
        let k = alpha.len();
        let mut m = SymMatrix::zeros(k);
        for a in 0..k {
            for b in (a + 1)..k {
                m.set(
                    a,
                    b,
                    self.distance(alpha[a], alpha[b]).expect("clique edge"),
                );
            }
        }
        Ok(m)
    }
}

/// An EDM instance plus known anchor positions and optional ground truth.
#[derive(Clone, Debug)]
pub struct SnlInstance {
    pub edm: EdmInstance,
    pub anchors: BTreeMap<usize, Vec<f64>>,
    pub truth: Option<Mat>,
}

// ---------------------------------------------------------------------------
// The K / K* / K† maps
// ---------------------------------------------------------------------------

/// `K(X)_ij = X_ii + X_jj - 2 X_ij`: carries Gram matrices to squared
/// distances; the output is hollow.
pub fn kappa(x: &SymMatrix) -> SymMatrix {
    let n = x.order();
    SymMatrix::from_fn(n, |i, j| {
        if i == j {
            0.0
        } else {
            x.get(i, i) + x.get(j, j) - 2.0 * x.get(i, j)
        }
    })
}

/// Adjoint `K*(D) = 2 (Diag(D e) - D)`; its range is the centered matrices.
pub fn kappa_star(d: &SymMatrix) -> SymMatrix {
    let n = d.order();
    let row_sums: Vec<f64> = (0..n).map(|i| (0..n).map(|j| d.get(i, j)).sum()).collect();
    SymMatrix::from_fn(n, |i, j| {
        let diag = if i == j { 2.0 * row_sums[i] } else { 0.0 };
        diag - 2.0 * d.get(i, j)
    })
}

/// Moore-Penrose inverse `K†(D) = -1/2 J offDiag(D) J` with
/// `J = I - (1/n) e e^T`; the output is centered.
pub fn kappa_dagger(d: &SymMatrix) -> SymMatrix {
    let n = d.order();
    let hollow = SymMatrix::from_fn(n, |i, j| if i == j { 0.0 } else { d.get(i, j) });
    let j = numerics::centering_projector(n);
    hollow.compress(&j).scale(-0.5)
}

// ---------------------------------------------------------------------------
// Clique exposing vectors
// ---------------------------------------------------------------------------

/// Exact clique exposing vector: the projector onto the orthogonal
/// complement, within `e^perp` of `R^alpha`, of the range of
/// `K†(d[alpha])`, padded with zeros to order `n`.
pub fn clique_exposing_edm(inst: &EdmInstance, alpha: &[usize], tol: f64) -> Result<SymMatrix> {
    let dm = inst.clique_matrix(alpha)?;
    let b = kappa_dagger(&dm);
    let spec = b.eig();
    let lam_max = spec.values.first().copied().unwrap_or(0.0);
    let lam_min = spec.values.last().copied().unwrap_or(0.0);
    let thresh = (tol * lam_max).max(tol);
    if lam_min < -thresh {
        return Err(Error::NotEdm { min_eig: lam_min });
    }
    let k = alpha.len();
    // Kernel projector minus the all-ones direction, which K† always
    // annihilates. set() mirrors, so iterate the upper triangle only.
    let mut v = spec.reassemble(|_, lam| if lam <= thresh { 1.0 } else { 0.0 });
    let ones = 1.0 / k as f64;
    for a in 0..k {
        for b in a..k {
            v.set(a, b, v.get(a, b) - ones);
        }
    }
    Ok(v.pad_to(inst.n, alpha))
}

fn accumulate_padded(sum: &mut SymMatrix, small: &SymMatrix, alpha: &[usize]) {
    for (a, &i) in alpha.iter().enumerate() {
        for (b, &j) in alpha.iter().enumerate() {
            if i <= j {
                sum.set(i, j, sum.get(i, j) + small.get(a, b));
            }
        }
    }
}

/// Face of `S^n_+ ∩ S^n_c` exposed by the sum of exact clique exposing
/// vectors; the basis is orthogonal to the all-ones vector.
pub fn exact_clique_face(inst: &EdmInstance, cliques: &[Vec<usize>], tol: f64) -> Result<FaceRep> {
    let n = inst.n;
    let mut sorted: Vec<&Vec<usize>> = cliques.iter().collect();
    sorted.sort();
    let mut sum = SymMatrix::zeros(n);
    for alpha in sorted {
        let w = clique_exposing_edm(inst, alpha, tol)?;
        let t = w.trace();
        if t > tol {
            sum.add_assign_scaled(&w, 1.0 / t);
        }
    }
    // Exposing the all-ones direction confines the basis to e^perp.
    let e = vec![1.0; n];
    sum.add_assign_scaled(&SymMatrix::outer(&e), 1.0 / n as f64);
    cones::face_from_exposing(&sum, tol)
}

/// Noise-robust face: per-clique exposing vectors built from the nearest
/// centered PSD matrix keeping the top `r` eigenvalues, summed, then
/// replaced by the best PSD approximation of rank `n - (r + 1)` whose
/// kernel (inside `e^perp`) is the face. Deterministic for fixed input.
pub fn robust_face(inst: &EdmInstance, cliques: &[Vec<usize>], tol: f64) -> Result<FaceRep> {
    let n = inst.n;
    let r = inst.r;
    let mut sorted: Vec<&Vec<usize>> = cliques.iter().collect();
    sorted.sort();
    sorted.dedup();
    let mut sum = SymMatrix::zeros(n);
    let mut used = 0usize;
    for alpha in sorted {
        if alpha.len() < 2 {
            continue;
        }
        let dm = inst.clique_matrix(alpha)?;
        let b = numerics::nearest_psd_centered(&kappa_dagger(&dm));
        let spec = b.eig();
        let k = alpha.len();
        // Keep the top-r realization eigenspace, expose the rest of e^perp.
        let mut v = SymMatrix::identity(k);
        let ones = 1.0 / k as f64;
        for a in 0..k {
            for c in a..k {
                v.set(a, c, v.get(a, c) - ones);
            }
        }
        for (idx, &lam) in spec.values.iter().enumerate().take(r) {
            if lam > tol.max(1e-14) {
                let q = spec.vectors.col(idx);
                v = v.sub(&SymMatrix::outer(&q));
            }
        }
        accumulate_padded(&mut sum, &v, alpha);
        used += 1;
    }
    if used > 0 {
        sum = sum.scale(1.0 / used as f64);
    }
    let cut = n.saturating_sub(r + 1);
    let mut w = numerics::best_psd_rank_k(&sum, cut);
    let e = vec![1.0; n];
    w.add_assign_scaled(&SymMatrix::outer(&e), 1.0 / n as f64);
    cones::face_from_exposing(&w, tol.max(1e-9))
}

// ---------------------------------------------------------------------------
// Gram recovery and alignment
// ---------------------------------------------------------------------------

/// Solves for points on the face: with `X = V R V^T`, each observed edge is
/// linear in `R`; least squares, PSD projection, spectral factorization,
/// and the top `r` coordinates by eigenvalue. `None` when the observed
/// squared distances are not reproduced to `tol * (1 + max d)`.
pub fn gram_solve(face: &FaceRep, inst: &EdmInstance, tol: f64) -> Result<Option<Mat>> {
    let n = inst.n;
    if face.ambient_order() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: face.ambient_order(),
        });
    }
    let k = face.dim();
    let r = inst.r;
    let scale = 1.0 + inst.max_distance();
    if k == 0 {
        let points = Mat::zeros(n, r);
        let ok = inst.d.iter().all(|&v| v.abs() <= tol * scale);
        return Ok(if ok { Some(points) } else { None });
    }
    let v = face.basis();
    let cols = k * (k + 1) / 2;
    let mut a = Mat::zeros(inst.edges.len(), cols);
    for (row, &(i, j)) in inst.edges.iter().enumerate() {
        let u: Vec<f64> = (0..k).map(|t| v[(i, t)] - v[(j, t)]).collect();
        let mut col = 0;
        for bcol in 0..k {
            for acol in 0..=bcol {
                a[(row, col)] = if acol == bcol {
                    u[acol] * u[acol]
                } else {
                    2.0 * u[acol] * u[bcol]
                };
                col += 1;
            }
        }
    }
    let sol = numerics::solve_least_squares(&a, &inst.d);
    let mut rm = SymMatrix::zeros(k);
    let mut idx = 0;
    for bcol in 0..k {
        for acol in 0..=bcol {
            rm.set(acol, bcol, sol[idx]);
            idx += 1;
        }
    }
    let spec = numerics::nearest_psd(&rm).eig();
    // points = V Q sqrt(lambda), keeping the top r coordinates.
    let mut points = Mat::zeros(n, r);
    for t in 0..r.min(k) {
        let lam = spec.values[t].max(0.0);
        if lam == 0.0 {
            continue;
        }
        let q = spec.vectors.col(t);
        let dir = v.apply(&q);
        let s = lam.sqrt();
        for i in 0..n {
            points[(i, t)] = s * dir[i];
        }
    }
    let max_res = edge_residual(&points, inst);
    if max_res <= tol * scale {
        Ok(Some(points))
    } else {
        Ok(None)
    }
}

/// Largest deviation between realized and observed squared distances.
pub fn edge_residual(points: &Mat, inst: &EdmInstance) -> f64 {
    inst.edges
        .iter()
        .zip(&inst.d)
        .map(|(&(i, j), &dij)| {
            let real: f64 = (0..points.cols())
                .map(|t| (points[(i, t)] - points[(j, t)]).powi(2))
                .sum();
            (real - dij).abs()
        })
        .fold(0.0, f64::max)
}

/// Orthogonal Procrustes alignment onto anchors: finds `Q` (rotation or
/// reflection) and translation `t` minimizing the anchor misfit, applied to
/// all points. Distances cannot distinguish chirality, so reflections are
/// allowed.
pub fn procrustes_align(points: &Mat, anchors: &BTreeMap<usize, Vec<f64>>) -> Result<Mat> {
    if anchors.is_empty() {
        return Err(Error::TooFewAnchors);
    }
    let r = points.cols();
    let ids: Vec<usize> = anchors.keys().copied().collect();
    for (&id, pos) in anchors {
        if id >= points.rows() {
            return Err(Error::Invalid(format!("anchor id {id} out of range")));
        }
        if pos.len() != r {
            return Err(Error::DimensionMismatch {
                expected: r,
                got: pos.len(),
            });
        }
    }
    let m = ids.len() as f64;
    let mut p_bar = vec![0.0; r];
    let mut a_bar = vec![0.0; r];
    for &id in &ids {
        for t in 0..r {
            p_bar[t] += points[(id, t)] / m;
            a_bar[t] += anchors[&id][t] / m;
        }
    }
    let mut h = Mat::zeros(r, r);
    for &id in &ids {
        for s in 0..r {
            for t in 0..r {
                h[(s, t)] += (anchors[&id][s] - a_bar[s]) * (points[(id, t)] - p_bar[t]);
            }
        }
    }
    let q = if h.fro_norm() < 1e-14 {
        Mat::identity(r)
    } else {
        let (u, _, v) = numerics::svd_square_full(&h);
        u.matmul(&v.transpose())
    };
    let mut out = Mat::zeros(points.rows(), r);
    for i in 0..points.rows() {
        for s in 0..r {
            let mut val = a_bar[s];
            for t in 0..r {
                val += q[(s, t)] * (points[(i, t)] - p_bar[t]);
            }
            out[(i, s)] = val;
        }
    }
    Ok(out)
}

/// Root mean square deviation `(1/n sum ||p_i - p_i_true||^2)^(1/2)`.
pub fn rmsd(points: &Mat, truth: &Mat) -> Result<f64> {
    if points.rows() != truth.rows() || points.cols() != truth.cols() {
        return Err(Error::DimensionMismatch {
            expected: truth.rows(),
            got: points.rows(),
        });
    }
    let n = points.rows().max(1);
    let total: f64 = (0..points.rows())
        .map(|i| {
            (0..points.cols())
                .map(|t| (points[(i, t)] - truth[(i, t)]).powi(2))
                .sum::<f64>()
        })
        .sum();
    Ok((total / n as f64).sqrt())
}

// ---------------------------------------------------------------------------
// Instance generation and the localization pipeline
// ---------------------------------------------------------------------------

/// Generates a random SNL instance: `n` uniform points in `[0,1]^r`, edges
/// between pairs within `range`, the first `m_anchors` nodes as anchors,
/// and multiplicative distance noise `d <- d (1 + eta)^2` with `eta`
/// uniform in `[-noise_factor, noise_factor]`. Deterministic per seed.
pub fn snl_generate(
    n: usize,
    m_anchors: usize,
    range: f64,
    r: usize,
    seed: u64,
    noise_factor: f64,
) -> Result<SnlInstance> {
    if !(0.0..1.0).contains(&noise_factor) {
        return Err(Error::Invalid("noise factor must lie in [0, 1)".into()));
    }
    if m_anchors > n {
        return Err(Error::Invalid("more anchors than nodes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = Mat::from_fn(n, r, |_, _| rng.random_range(0.0..1.0));
    let mut edges = Vec::new();
    let mut d = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let dist2: f64 = (0..r)
                .map(|t| (points[(i, t)] - points[(j, t)]).powi(2))
                .sum();
            if dist2.sqrt() <= range {
                let eta = if noise_factor > 0.0 {
                    rng.random_range(-noise_factor..noise_factor)
                } else {
                    0.0
                };
                edges.push((i, j));
                d.push(dist2 * (1.0 + eta) * (1.0 + eta));
            }
        }
    }
    let edm = EdmInstance::new(n, edges, d, r)?;
    let anchors = (0..m_anchors)
        .map(|i| (i, (0..r).map(|t| points[(i, t)]).collect()))
        .collect();
    Ok(SnlInstance {
        edm,
        anchors,
        truth: Some(points),
    })
}

/// Pipeline report for one localization run.
#[derive(Clone, Debug)]
pub struct SnlResult {
    /// Recovered positions, aligned to the anchors when present.
    pub points: Mat,
    /// RMSD against the stored ground truth, when available.
    pub rmsd: Option<f64>,
    pub face_dim: usize,
    pub max_edge_residual: f64,
    pub cliques_used: usize,
}

/// Greedy clique cover: grows cliques from each node's neighborhood (size
/// capped at `r + 6`, keeping cliques with at least `r + 2` members, at
/// most `4n` cliques). Two passes per node, one over the nearest neighbors
/// and one over the farthest, so adjacent cliques overlap enough to couple.
/// Full maximal-clique enumeration is exponential; local cliques are what
/// the reduction needs.
pub fn greedy_clique_cover(inst: &EdmInstance) -> Vec<Vec<usize>> {
    let n = inst.n;
    let cap = inst.r + 6;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let grow = |v: usize, order: &[usize]| -> Vec<usize> {
        let mut members = vec![v];
        for &u in order {
            if members.len() >= cap {
                break;
            }
            if members.iter().all(|&w| inst.distance(u, w).is_some()) {
                members.push(u);
            }
        }
        members.sort_unstable();
        members
    };
    'outer: for v in 0..n {
        let mut by_distance: Vec<usize> = inst.neighbors(v).iter().copied().collect();
        by_distance.sort_by(|&a, &b| {
            inst.distance(v, a)
                .partial_cmp(&inst.distance(v, b))
                .expect("finite distances")
                .then(a.cmp(&b))
        });
        let reversed: Vec<usize> = by_distance.iter().rev().copied().collect();
        for order in [&by_distance, &reversed] {
            let members = grow(v, order);
            if members.len() >= inst.r + 2 && seen.insert(members.clone()) {
                out.push(members);
            }
            if out.len() >= 4 * n {
                break 'outer;
            }
        }
    }
    out
}

/// Full localization pipeline: greedy clique cover, robust face, Gram
/// solve, Procrustes alignment, and RMSD scoring against the truth.
pub fn snl_localize(inst: &SnlInstance, tol: f64) -> Result<SnlResult> {
    let cliques = greedy_clique_cover(&inst.edm);
    let face = robust_face(&inst.edm, &cliques, tol.min(1e-6))?;
    if face.dim() > inst.edm.r + 2 {
        return Err(Error::FaceTooBig { dim: face.dim() });
    }
    let Some(points) = gram_solve(&face, &inst.edm, tol)? else {
        return Err(Error::Invalid(
            "recovered face admits no embedding within tolerance".into(),
        ));
    };
    let aligned = if inst.anchors.is_empty() {
        points
    } else {
        procrustes_align(&points, &inst.anchors)?
    };
    let score = match &inst.truth {
        Some(truth) => Some(rmsd(&aligned, truth)?),
        None => None,
    };
    let max_edge_residual = edge_residual(&aligned, &inst.edm);
    Ok(SnlResult {
        points: aligned,
        rmsd: score,
        face_dim: face.dim(),
        max_edge_residual,
        cliques_used: cliques.len(),
    })
}
