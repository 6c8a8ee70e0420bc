//! PSD matrix completion with clique-driven facial reduction.
//!
//! Observed entries live on a graph with mandatory self-loops. Every
//! singular specified principal minor (clique) contributes an exposing
//! vector; the face exposed by their sum contains the whole feasible
//! region, and on chordal graphs it is exactly the minimal face. The
//! completion itself is a least-squares solve in the face coordinates with
//! a Dykstra fallback.

use crate::cones::{self, FaceRep};
use crate::conic;
use crate::numerics::{self, Mat, SymMatrix};
use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Undirected observation graph with self-loops on every node.
#[derive(Clone, Debug)]
pub struct ObservationGraph {
    n: usize,
    /// Sorted `(i, j)` with `i <= j`, including all loops.
    edges: Vec<(usize, usize)>,
    index: BTreeMap<(usize, usize), usize>,
    adj: Vec<BTreeSet<usize>>,
}

impl ObservationGraph {
    /// Builds the graph; every node must carry its self-loop.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            let (i, j) = if a <= b { (a, b) } else { (b, a) };
            if j >= n {
                return Err(Error::Invalid(format!(
                    "edge ({a},{b}) out of range for n={n}"
                )));
            }
            set.insert((i, j));
        }
        for i in 0..n {
            if !set.contains(&(i, i)) {
                return Err(Error::MissingSelfLoop { node: i });
            }
        }
        let edges: Vec<(usize, usize)> = set.into_iter().collect();
        let mut index = BTreeMap::new();
        let mut adj = vec![BTreeSet::new(); n];
        for (k, &(i, j)) in edges.iter().enumerate() {
            index.insert((i, j), k);
            if i != j {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
        Ok(ObservationGraph {
            n,
            edges,
            index,
            adj,
        })
    }

    /// Complete graph on `n` nodes (with loops).
    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|i| (i..n).map(move |j| (i, j)));
        ObservationGraph::new(n, edges).expect("complete graph is valid")
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// All edges including loops, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.index.contains_key(&key)
    }

    pub fn edge_position(&self, a: usize, b: usize) -> Option<usize> {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.index.get(&key).copied()
    }

    /// Neighbors excluding the node itself.
    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adj[v]
    }

    /// Whether the vertex subset is a clique (loops are implied).
    pub fn is_clique(&self, alpha: &[usize]) -> bool {
        alpha
            .iter()
            .enumerate()
            .all(|(s, &i)| alpha[s + 1..].iter().all(|&j| self.has_edge(i, j)))
    }
}

/// A partial matrix: one observed value per edge of the graph.
#[derive(Clone, Debug)]
pub struct PartialMatrix {
    graph: ObservationGraph,
    values: Vec<f64>,
}

impl PartialMatrix {
    pub fn new(graph: ObservationGraph, values: Vec<f64>) -> Result<Self> {
        if values.len() != graph.edge_count() {
            return Err(Error::DimensionMismatch {
                expected: graph.edge_count(),
                got: values.len(),
            });
        }
        Ok(PartialMatrix { graph, values })
    }

    /// Observes `X` on the given graph.
    pub fn observe(x: &SymMatrix, graph: ObservationGraph) -> Result<Self> {
        if x.order() != graph.node_count() {
            return Err(Error::DimensionMismatch {
                expected: graph.node_count(),
                got: x.order(),
            });
        }
        let values = project_e(x, &graph)?;
        PartialMatrix::new(graph, values)
    }

    pub fn graph(&self) -> &ObservationGraph {
        &self.graph
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> Option<f64> {
        self.graph.edge_position(i, j).map(|k| self.values[k])
    }

    /// The specified principal submatrix `omega[alpha]`.
    pub fn submatrix(&self, alpha: &[usize]) -> Result<SymMatrix> {
        if !self.graph.is_clique(alpha) {
            return Err(Error::Invalid(
                "index set is not a clique of the graph".into(),
            ));
        }
        let k = alpha.len();
        let mut m = SymMatrix::zeros(k);
        for a in 0..k {
            for b in a..k {
                m.set(a, b, self.value(alpha[a], alpha[b]).expect("clique edge"));
            }
        }
        Ok(m)
    }

    /// Largest observed magnitude.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

// ---------------------------------------------------------------------------
// Coordinate projection and its adjoint
// ---------------------------------------------------------------------------

/// Coordinate projection `P_E(X)`: observed entries in edge order.
pub fn project_e(x: &SymMatrix, g: &ObservationGraph) -> Result<Vec<f64>> {
    if x.order() != g.node_count() {
        return Err(Error::DimensionMismatch {
            expected: g.node_count(),
            got: x.order(),
        });
    }
    Ok(g.edges().iter().map(|&(i, j)| x.get(i, j)).collect())
}

/// Adjoint `P*_E(v)`: pads a partial matrix with zeros, placing `v_ij` at
/// both `(i,j)` and `(j,i)`.
pub fn pad_e_star(v: &[f64], g: &ObservationGraph) -> Result<SymMatrix> {
    if v.len() != g.edge_count() {
        return Err(Error::DimensionMismatch {
            expected: g.edge_count(),
            got: v.len(),
        });
    }
    let mut out = SymMatrix::zeros(g.node_count());
    for (&(i, j), &val) in g.edges().iter().zip(v) {
        out.set(i, j, val);
    }
    Ok(out)
}

/// Inner product on `R^E` under which padding is the adjoint of the
/// coordinate projection: loops weigh 1, off-diagonal edges weigh 2.
pub fn edge_inner(g: &ObservationGraph, a: &[f64], b: &[f64]) -> f64 {
    g.edges()
        .iter()
        .zip(a.iter().zip(b))
        .map(|(&(i, j), (x, y))| if i == j { x * y } else { 2.0 * x * y })
        .sum()
}

// ---------------------------------------------------------------------------
// Chordality and cliques
// ---------------------------------------------------------------------------

/// Outcome of the chordality test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Chordality {
    /// A verified perfect elimination order.
    Chordal(Vec<usize>),
    /// A chordless cycle of length at least 4.
    NotChordal(Vec<usize>),
}

impl Chordality {
    pub fn is_chordal(&self) -> bool {
        matches!(self, Chordality::Chordal(_))
    }
}

/// Maximum-cardinality-search chordality test. The returned elimination
/// order is verified; on failure a chordless cycle witness is produced.
pub fn is_chordal(g: &ObservationGraph) -> Chordality {
    let n = g.node_count();
    if n == 0 {
        return Chordality::Chordal(Vec::new());
    }
    // MCS visit order: repeatedly take the unvisited vertex with the most
    // visited neighbors, smallest index on ties.
    let mut weight = vec![0usize; n];
    let mut visited = vec![false; n];
    let mut visit_order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !visited[v])
            .max_by_key(|&v| (weight[v], usize::MAX - v))
            .expect("unvisited vertex exists");
        visited[v] = true;
        visit_order.push(v);
        for &u in g.neighbors(v) {
            if !visited[u] {
                weight[u] += 1;
            }
        }
    }
    // The reverse of the visit order is a perfect elimination order iff the
    // graph is chordal.
    let peo: Vec<usize> = visit_order.into_iter().rev().collect();
    let mut pos = vec![0usize; n];
    for (i, &v) in peo.iter().enumerate() {
        pos[v] = i;
    }
    for &v in &peo {
        let later: Vec<usize> = g
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&u| pos[u] > pos[v])
            .collect();
        let Some(&parent) = later.iter().min_by_key(|&&u| pos[u]) else {
            continue;
        };
        for &w in &later {
            if w != parent && !g.has_edge(parent, w) {
                let cycle = find_hole(g).expect("failed PEO check implies a hole exists");
                return Chordality::NotChordal(cycle);
            }
        }
    }
    Chordality::Chordal(peo)
}

/// Finds a chordless cycle of length >= 4 by scanning vertices with
/// non-adjacent neighbor pairs and taking a shortest connecting path that
/// avoids the rest of the neighborhood.
fn find_hole(g: &ObservationGraph) -> Option<Vec<usize>> {
    let n = g.node_count();
    for v in 0..n {
        let nb: Vec<usize> = g.neighbors(v).iter().copied().collect();
        for (s, &u) in nb.iter().enumerate() {
            for &w in &nb[s + 1..] {
                if g.has_edge(u, w) {
                    continue;
                }
                // Shortest u-w path avoiding v and N(v) \ {u, w}; shortest
                // paths in the induced subgraph are chordless.
                let mut allowed = vec![true; n];
                allowed[v] = false;
                for &x in &nb {
                    if x != u && x != w {
                        allowed[x] = false;
                    }
                }
                if let Some(path) = bfs_path(g, u, w, &allowed) {
                    let mut cycle = vec![v];
                    cycle.extend(path);
                    return Some(cycle);
                }
            }
        }
    }
    None
}

fn bfs_path(g: &ObservationGraph, from: usize, to: usize, allowed: &[bool]) -> Option<Vec<usize>> {
    let n = g.node_count();
    let mut prev = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    seen[from] = true;
    queue.push_back(from);
    while let Some(x) = queue.pop_front() {
        if x == to {
            let mut path = vec![to];
            let mut cur = to;
            while prev[cur] != usize::MAX {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &y in g.neighbors(x) {
            if allowed[y] && !seen[y] {
                seen[y] = true;
                prev[y] = x;
                queue.push_back(y);
            }
        }
    }
    None
}

/// All maximal cliques (Bron-Kerbosch with pivoting), each sorted, the list
/// sorted lexicographically. Desk-scale graphs only.
pub fn maximal_cliques(g: &ObservationGraph) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let mut out = Vec::new();
    let mut r = Vec::new();
    let p: BTreeSet<usize> = (0..n).collect();
    let x = BTreeSet::new();
    bron_kerbosch(g, &mut r, p, x, &mut out);
    for c in &mut out {
        c.sort_unstable();
    }
    out.sort();
    out
}

fn bron_kerbosch(
    g: &ObservationGraph,
    r: &mut Vec<usize>,
    p: BTreeSet<usize>,
    mut x: BTreeSet<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if p.is_empty() && x.is_empty() {
        out.push(r.clone());
        return;
    }
    // Pivot with the most candidates in P; smallest index on ties.
    let pivot = p
        .iter()
        .chain(x.iter())
        .copied()
        .max_by_key(|&u| (g.neighbors(u).intersection(&p).count(), usize::MAX - u))
        .expect("P or X nonempty");
    let candidates: Vec<usize> = p
        .iter()
        .copied()
        .filter(|&v| !g.neighbors(pivot).contains(&v))
        .collect();
    let mut p = p;
    for v in candidates {
        r.push(v);
        let p_next: BTreeSet<usize> = p.intersection(g.neighbors(v)).copied().collect();
        let x_next: BTreeSet<usize> = x.intersection(g.neighbors(v)).copied().collect();
        bron_kerbosch(g, r, p_next, x_next, out);
        r.pop();
        p.remove(&v);
        x.insert(v);
    }
}

// ---------------------------------------------------------------------------
// Clique exposing vectors and the combined face
// ---------------------------------------------------------------------------

/// Exposing vector of the minimal face containing the relaxed region of one
/// clique, padded to order `n`.
///
/// The kernel projector of `omega[alpha]` is scaled by `max(lambda_max, 1)`
/// so the summands match the data's spectral scale; a definite clique
/// contributes the zero matrix. Per-clique singularity threshold is
/// `tol * lambda_max`.
pub fn clique_exposing(p: &PartialMatrix, alpha: &[usize], tol: f64) -> Result<SymMatrix> {
    let omega = p.submatrix(alpha)?;
    let spec = omega.eig();
    let lam_max = spec.values.first().copied().unwrap_or(0.0);
    let lam_min = spec.values.last().copied().unwrap_or(0.0);
    let thresh = (tol * lam_max).max(tol);
    if lam_min < -thresh {
        return Err(Error::PartialNotPsd { min_eig: lam_min });
    }
    let scale = lam_max.max(1.0);
    let kernel_proj = spec.reassemble(|_, lam| if lam <= thresh { scale } else { 0.0 });
    Ok(kernel_proj.pad_to(p.graph().node_count(), alpha))
}

/// Raw sum of the clique exposing vectors, in sorted clique order.
pub fn summed_exposing(p: &PartialMatrix, cliques: &[Vec<usize>], tol: f64) -> Result<SymMatrix> {
    let mut sorted: Vec<&Vec<usize>> = cliques.iter().collect();
    sorted.sort();
    let mut sum = SymMatrix::zeros(p.graph().node_count());
    for alpha in sorted {
        sum = sum.add(&clique_exposing(p, alpha, tol)?);
    }
    Ok(sum)
}

/// Face exposed by the sum of the clique exposing vectors, with summands
/// normalized to unit trace so no clique dominates.
///
/// On non-chordal graphs the clique faces may not reveal the minimal face;
/// a warning is logged and the face is returned as-is.
pub fn combined_face(p: &PartialMatrix, cliques: &[Vec<usize>], tol: f64) -> Result<FaceRep> {
    if !is_chordal(p.graph()).is_chordal() {
        log::warn!(
            "observation graph is not chordal: clique faces may not reveal the minimal face"
        );
    }
    let mut sorted: Vec<&Vec<usize>> = cliques.iter().collect();
    sorted.sort();
    let mut sum = SymMatrix::zeros(p.graph().node_count());
    for alpha in sorted {
        let w = clique_exposing(p, alpha, tol)?;
        let t = w.trace();
        if t > tol {
            sum.add_assign_scaled(&w, 1.0 / t);
        }
    }
    cones::face_from_exposing(&sum, tol)
}

// ---------------------------------------------------------------------------
// Completion on the reduced face
// ---------------------------------------------------------------------------

/// Finds `X` PSD in the face matching the observed entries: least squares
/// in the face's coordinates, falling back to alternating projections, then
/// `None` when residuals stay above tolerance.
pub fn complete(
    p: &PartialMatrix,
    face: &FaceRep,
    iters: usize,
    tol: f64,
) -> Result<Option<SymMatrix>> {
    let n = p.graph().node_count();
    if face.ambient_order() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: face.ambient_order(),
        });
    }
    let scale = 1.0 + p.max_abs();
    let accepts = |x: &SymMatrix| -> bool {
        let obs = project_e(x, p.graph()).expect("dimensions match");
        obs.iter()
            .zip(p.values())
            .all(|(a, b)| (a - b).abs() <= tol * scale)
            && x.min_eig() >= -tol * x.fro_norm().max(1.0)
    };

    let k = face.dim();
    if k > 0 {
        // Each observed entry is linear in the face coordinates R.
        let v = face.basis();
        let cols = k * (k + 1) / 2;
        let mut a = Mat::zeros(p.graph().edge_count(), cols);
        for (row, &(i, j)) in p.graph().edges().iter().enumerate() {
            let mut col = 0;
            for bcol in 0..k {
                for acol in 0..=bcol {
                    let coeff = if acol == bcol {
                        v[(i, acol)] * v[(j, acol)]
                    } else {
                        v[(i, acol)] * v[(j, bcol)] + v[(i, bcol)] * v[(j, acol)]
                    };
                    a[(row, col)] = coeff;
                    col += 1;
                }
            }
        }
        let sol = numerics::solve_least_squares(&a, p.values());
        let mut r = SymMatrix::zeros(k);
        let mut idx = 0;
        for bcol in 0..k {
            for acol in 0..=bcol {
                r.set(acol, bcol, sol[idx]);
                idx += 1;
            }
        }
        let x = numerics::nearest_psd(&r).expand(v);
        if accepts(&x) {
            return Ok(Some(x));
        }
    } else {
        let x = SymMatrix::zeros(n);
        if accepts(&x) {
            return Ok(Some(x));
        }
        return Ok(None);
    }

    // Alternating-projection fallback for PSD-projection-coupled cases.
    let affine: Vec<(SymMatrix, f64)> = p
        .graph()
        .edges()
        .iter()
        .zip(p.values())
        .map(|(&(i, j), &w)| {
            let basis = SymMatrix::sym_unit(n, i, j);
            let rhs = if i == j { w } else { 2.0 * w };
            (basis, rhs)
        })
        .collect();
    match conic::alternating_projection_solve(face, &affine, iters, tol)? {
        Some(x) if accepts(&x) => Ok(Some(x)),
        _ => Ok(None),
    }
}

// ---------------------------------------------------------------------------
// Feasibility margin and the boundary search
// ---------------------------------------------------------------------------

/// Best achievable smallest eigenvalue over the unspecified entries,
/// located by rounds of joint grid refinement (the smallest eigenvalue is
/// concave in the unknowns). Supports up to three unspecified entries.
pub fn feasibility_margin(p: &PartialMatrix) -> Result<f64> {
    let n = p.graph().node_count();
    let unknowns: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !p.graph().has_edge(i, j))
        .collect();
    let mut base = pad_e_star(p.values(), p.graph())?;
    if unknowns.is_empty() {
        return Ok(base.min_eig());
    }
    if unknowns.len() > 3 {
        return Err(Error::Invalid(format!(
            "feasibility margin supports at most 3 unspecified entries, got {}",
            unknowns.len()
        )));
    }
    // PSD completions satisfy |X_ij| <= max_i X_ii.
    let bound = (0..n).map(|i| base.get(i, i)).fold(1.0f64, f64::max);
    let mut centers = vec![0.0; unknowns.len()];
    let mut width = 2.0 * bound;
    let mut best = f64::NEG_INFINITY;
    let grid = 9usize;
    for _ in 0..16 {
        let mut best_pt = centers.clone();
        for combo in 0..grid.pow(unknowns.len() as u32) {
            let mut c = combo;
            let mut pt = vec![0.0; unknowns.len()];
            for (t, ctr) in centers.iter().enumerate() {
                let step = c % grid;
                c /= grid;
                pt[t] = ctr - width / 2.0 + width * step as f64 / (grid - 1) as f64;
            }
            for (t, &(i, j)) in unknowns.iter().enumerate() {
                base.set(i, j, pt[t]);
            }
            let margin = base.min_eig();
            if margin > best {
                best = margin;
                best_pt = pt;
            }
        }
        centers = best_pt;
        width /= 3.0;
    }
    Ok(best)
}

/// Bisection for the feasibility boundary of a parameterized family:
/// requires infeasibility at `lo` and feasibility at `hi`.
pub fn boundary_epsilon(
    family: impl Fn(f64) -> Result<PartialMatrix>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64> {
    let feasible = |eps: f64| -> Result<bool> { Ok(feasibility_margin(&family(eps)?)? >= 0.0) };
    if feasible(lo)? || !feasible(hi)? {
        return Err(Error::BadBracket);
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The 4-cycle completion family `C(eps)` with `1 + eps` on the diagonal
/// and alternating `1, 1, 1, -1` around the cycle; the two diagonals are
/// unspecified.
pub fn slater_nonchordal_family(eps: f64) -> Result<PartialMatrix> {
    let n = 4;
    let loops = (0..n).map(|i| (i, i));
    let cycle = [(0, 1), (1, 2), (2, 3), (0, 3)];
    let graph = ObservationGraph::new(n, loops.chain(cycle))?;
    let mut values = vec![0.0; graph.edge_count()];
    for i in 0..n {
        values[graph.edge_position(i, i).unwrap()] = 1.0 + eps;
    }
    values[graph.edge_position(0, 1).unwrap()] = 1.0;
    values[graph.edge_position(1, 2).unwrap()] = 1.0;
    values[graph.edge_position(2, 3).unwrap()] = 1.0;
    values[graph.edge_position(0, 3).unwrap()] = -1.0;
    PartialMatrix::new(graph, values)
}

/// The worked 4x4 path completion problem with entries
/// `[[1,1,?,?],[1,1,1,?],[?,1,1,-1],[?,?,-1,2]]`.
pub fn worked_example() -> PartialMatrix {
    let n = 4;
    let loops = (0..n).map(|i| (i, i));
    let path = [(0, 1), (1, 2), (2, 3)];
    let graph = ObservationGraph::new(n, loops.chain(path)).expect("valid graph");
    let mut values = vec![0.0; graph.edge_count()];
    let mut setv = |i: usize, j: usize, v: f64| {
        let k = graph.edge_position(i, j).unwrap();
        values[k] = v;
    };
    setv(0, 0, 1.0);
    setv(1, 1, 1.0);
    setv(2, 2, 1.0);
    setv(3, 3, 2.0);
    setv(0, 1, 1.0);
    setv(1, 2, 1.0);
    setv(2, 3, -1.0);
    PartialMatrix::new(graph, values).expect("valid data")
}

/// Banded all-ones data on `|i - j| <= 1`; its unique completion is the
/// all-ones matrix.
pub fn banded_all_ones(n: usize) -> PartialMatrix {
    let loops = (0..n).map(|i| (i, i));
    let band = (0..n.saturating_sub(1)).map(|i| (i, i + 1));
    let graph = ObservationGraph::new(n, loops.chain(band)).expect("valid graph");
    let values = vec![1.0; graph.edge_count()];
    PartialMatrix::new(graph, values).expect("valid data")
}
