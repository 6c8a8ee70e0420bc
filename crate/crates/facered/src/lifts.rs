//! SDP lifts of combinatorial problems with their facial reductions.
//!
//! Lifting `x` to the rank-one matrix `(1; x)(1; x)^T` turns quadratic
//! constraints into linear ones. The affine hull of the original feasible
//! set then certifies failure of strict feasibility: its normal equations,
//! squared up as `L^T L`, expose the minimal face of the lift. Concrete
//! builders: the second (squared) lift of max-cut exposed by `E E^T`, and
//! the QAP relaxation whose assignment constraints expose `D_0`, collapsing
//! `n^3 + n^2/2 + n/2 + 2` constraints to the `n^3 - 2n^2 + 1` gangster
//! entries on the reduced cone. The lifted problems are emitted for
//! external solvers; nothing here solves an SDP.

use crate::numerics::{self, svec_index, Mat, SymMatrix};
use crate::{Error, Result};

/// A lifted problem: objective and constraints are linear in the lifted
/// matrix, together with the facial reduction data.
#[derive(Clone, Debug)]
pub struct LiftedProblem {
    /// Ambient order of the lifted variable.
    pub order: usize,
    /// Cost matrix `L` with value `<L, Y>`.
    pub objective: SymMatrix,
    /// Linear constraints `<M, Y> = rhs`.
    pub constraints: Vec<(SymMatrix, f64)>,
    /// Exposing vector of the face containing the feasible region.
    pub exposing: SymMatrix,
    /// Orthonormal basis of the kernel of the exposing vector.
    pub face_basis: Mat,
}

// ---------------------------------------------------------------------------
// Symmetric vectorization
// ---------------------------------------------------------------------------

/// Upper triangle columnwise with off-diagonals scaled by `sqrt(2)`;
/// preserves the trace inner product.
pub fn svec(x: &SymMatrix) -> Vec<f64> {
    numerics::sym_to_svec(x)
}

/// Inverse of [`svec`].
pub fn smat(v: &[f64]) -> SymMatrix {
    numerics::svec_to_sym(v)
}

// ---------------------------------------------------------------------------
// General lifts: affine hull exposing vector
// ---------------------------------------------------------------------------

/// Exposing vector of the minimal face of a lift whose base points satisfy
/// `L x = l`: returns `Lhat^T Lhat` for `Lhat = [-l  L]`, which annihilates
/// every lifted point `(1; x)(1; x)^T`.
pub fn affine_hull_exposing(l_mat: &Mat, rhs: &[f64]) -> Result<SymMatrix> {
    if l_mat.rows() != rhs.len() {
        return Err(Error::DimensionMismatch {
            expected: l_mat.rows(),
            got: rhs.len(),
        });
    }
    let d = l_mat.cols();
    let mut lhat = Mat::zeros(l_mat.rows(), d + 1);
    for i in 0..l_mat.rows() {
        lhat[(i, 0)] = -rhs[i];
        for j in 0..d {
            lhat[(i, j + 1)] = l_mat[(i, j)];
        }
    }
    Ok(SymMatrix::from_mat(&lhat.tr_matmul(&lhat)))
}

// ---------------------------------------------------------------------------
// Second lift of max-cut
// ---------------------------------------------------------------------------

/// The `E` matrix of the second max-cut lift: columns `(-1; svec(Diag(e_i)))`
/// encoding the first-level constraints `diag(X) = e`.
pub fn maxcut_e_matrix(n: usize) -> Mat {
    let big = n * (n + 1) / 2 + 1;
    let mut e = Mat::zeros(big, n);
    for i in 0..n {
        e[(0, i)] = -1.0;
        e[(1 + svec_index(i, i), i)] = 1.0;
    }
    e
}

/// Scale of coordinate `(i, j)` inside the svec of the first-level matrix.
fn svec_scale(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        2.0f64.sqrt()
    }
}

fn pos(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    1 + svec_index(a, b)
}

/// Second lift of max-cut on `n` nodes with a symmetric weight matrix:
/// lifted order `n(n+1)/2 + 1`, face exposed by `E E^T`, objective carrying
/// the Laplacian, and the products `X_ij X_jk = X_ik` recorded as linear
/// index constraints on the lifted matrix.
pub fn maxcut_second_lift(n: usize, weights: &SymMatrix) -> Result<LiftedProblem> {
    if n < 2 {
        return Err(Error::Invalid(
            "max-cut lift needs at least two nodes".into(),
        ));
    }
    if weights.order() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: weights.order(),
        });
    }
    let big = n * (n + 1) / 2 + 1;
    let e = maxcut_e_matrix(n);
    let exposing = SymMatrix::from_mat(&e.matmul(&e.transpose()));
    let face_basis = numerics::nullspace_basis(&exposing, Some(1e-10));

    // Laplacian objective: cut value is (1/4) <L, X>, linear in svec(X).
    let degrees: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| weights.get(i, j)).sum())
        .collect();
    let laplacian = SymMatrix::from_fn(n, |i, j| {
        if i == j {
            degrees[i] - weights.get(i, i)
        } else {
            -weights.get(i, j)
        }
    });
    let c = svec(&laplacian);
    let mut objective = SymMatrix::zeros(big);
    for (t, &cv) in c.iter().enumerate() {
        objective.set(0, 1 + t, 0.25 * cv / 2.0);
    }

    // Quadratic relations X_ij X_jk = X_ik as linear index constraints.
    let mut constraints: Vec<(SymMatrix, f64)> = Vec::new();
    constraints.push((SymMatrix::sym_unit(big, 0, 0), 1.0));
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            // i = k case: X_ij^2 = X_ii.
            if i < j {
                for &diag in &[i, j] {
                    let mut m = SymMatrix::zeros(big);
                    let p = pos(i, j);
                    m.set(p, p, 1.0 / (svec_scale(i, j) * svec_scale(i, j)));
                    m.set(0, pos(diag, diag), m.get(0, pos(diag, diag)) - 0.5);
                    constraints.push((m, 0.0));
                }
            }
            // Distinct triple i, j, k with i < k.
            for k in (i + 1)..n {
                if k == j || i == j {
                    continue;
                }
                let p = pos(i, j);
                let q = pos(j, k);
                let mut m = SymMatrix::zeros(big);
                let coeff = 1.0 / (2.0 * svec_scale(i, j) * svec_scale(j, k));
                m.set(p, q, m.get(p, q) + coeff);
                let rpos = pos(i, k);
                m.set(0, rpos, m.get(0, rpos) - 0.5 / svec_scale(i, k));
                constraints.push((m, 0.0));
            }
        }
    }
    Ok(LiftedProblem {
        order: big,
        objective,
        constraints,
        exposing,
        face_basis,
    })
}

/// Lift of one cut vector `x in {-1, +1}^n` through `X = x x^T`,
/// `y = svec(X)`, `Y = (1; y)(1; y)^T`.
pub fn maxcut_lift_point(cut: &[f64]) -> Result<SymMatrix> {
    if cut.iter().any(|&v| (v.abs() - 1.0).abs() > 1e-12) {
        return Err(Error::Invalid("cut entries must be +1 or -1".into()));
    }
    let x = SymMatrix::outer(cut);
    let mut lifted = vec![1.0];
    lifted.extend(svec(&x));
    Ok(SymMatrix::outer(&lifted))
}

/// Cut value `(1/4) sum_ij w_ij (1 - x_i x_j)` of a cut vector.
pub fn cut_value(weights: &SymMatrix, cut: &[f64]) -> f64 {
    let n = weights.order();
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            total += 0.5 * weights.get(i, j) * (1.0 - cut[i] * cut[j]);
        }
    }
    total
}

// ---------------------------------------------------------------------------
// QAP lift and gangster reduction
// ---------------------------------------------------------------------------

/// Objective of the lifted QAP: `L = [[0, vec(C)^T/2], [vec(C)/2, D (x) F]]`
/// so that `<L, lift(X)> = trace(F X D X^T) + trace(C X^T)`.
pub fn qap_objective(f: &SymMatrix, d: &SymMatrix, c: &Mat) -> Result<SymMatrix> {
    let n = f.order();
    if d.order() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: d.order(),
        });
    }
    if c.rows() != n || c.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: c.rows().max(c.cols()),
        });
    }
    let big = n * n + 1;
    let mut l = SymMatrix::zeros(big);
    // vec is column-stacking: position of X_kl is l*n + k.
    for col in 0..n {
        for row in 0..n {
            l.set(0, 1 + col * n + row, 0.5 * c[(row, col)]);
        }
    }
    for jc in 0..n {
        for lc in 0..n {
            for i in 0..n {
                for k in 0..n {
                    let p = 1 + jc * n + i;
                    let q = 1 + lc * n + k;
                    if p <= q {
                        l.set(p, q, d.get(jc, lc) * f.get(i, k));
                    }
                }
            }
        }
    }
    Ok(l)
}

/// Assignment-constraint exposing data: `E_r` encodes the row sums, `E_c`
/// the column sums, and `D_0 = E_r E_r^T + E_c E_c^T` exposes the face
/// containing every lifted permutation.
pub fn qap_assignment_exposing(n: usize) -> (Mat, Mat, SymMatrix) {
    let big = n * n + 1;
    let mut e_r = Mat::zeros(big, n);
    let mut e_c = Mat::zeros(big, n);
    for i in 0..n {
        e_r[(0, i)] = -1.0;
        e_c[(0, i)] = -1.0;
        for t in 0..n {
            // Row-sum i touches X_{i,t}; column-sum i touches X_{t,i}.
            e_r[(1 + t * n + i, i)] = 1.0;
            e_c[(1 + i * n + t, i)] = 1.0;
        }
    }
    let d0 = SymMatrix::from_mat(
        &e_r.matmul(&e_r.transpose())
            .add(&e_c.matmul(&e_c.transpose())),
    );
    (e_r, e_c, d0)
}

/// Orthonormal basis of the kernel of `D_0`: `(n^2+1) x ((n-1)^2+1)`.
pub fn qap_face_basis(n: usize) -> Mat {
    let (_, _, d0) = qap_assignment_exposing(n);
    numerics::nullspace_basis(&d0, Some(1e-10))
}

/// Gangster index set: `(0,0)`, the strict upper off-diagonal positions of
/// the diagonal blocks, and the diagonal positions of the strict upper
/// off-diagonal blocks, minus a maximal dependent subset found by
/// rank-revealing elimination of the reduced functionals in fixed index
/// order. Cardinality `n^3 - 2n^2 + 1`.
pub fn gangster_index_set(n: usize) -> Vec<(usize, usize)> {
    let vhat = qap_face_basis(n);
    let mut candidates: Vec<(usize, usize)> = vec![(0, 0)];
    for block in 0..n {
        for k in 0..n {
            for k2 in (k + 1)..n {
                candidates.push((1 + block * n + k, 1 + block * n + k2));
            }
        }
    }
    for b1 in 0..n {
        for b2 in (b1 + 1)..n {
            for k in 0..n {
                candidates.push((1 + b1 * n + k, 1 + b2 * n + k));
            }
        }
    }
    let big = n * n + 1;
    let mut kept = Vec::new();
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for (p, q) in candidates {
        let m = SymMatrix::sym_unit(big, p, q);
        let reduced = numerics::sym_to_svec(&m.compress(&vhat));
        let mut resid = reduced.clone();
        for basis in &ortho {
            let coef = numerics::dot(basis, &resid);
            for (r, b) in resid.iter_mut().zip(basis) {
                *r -= coef * b;
            }
        }
        let norm = numerics::norm2(&resid);
        if norm > 1e-8 * (1.0 + numerics::norm2(&reduced)) {
            for r in resid.iter_mut() {
                *r /= norm;
            }
            ortho.push(resid);
            kept.push((p, q));
        }
    }
    kept
}

/// Constraint counts of the full and gangster-reduced formulations:
/// `(n^3 + n^2/2 + n/2 + 2, n^3 - 2n^2 + 1)`.
pub fn qap_constraint_counts(n: usize) -> (usize, usize) {
    let full = n * n * n + (n * n + n) / 2 + 2;
    let gangster = n * n * n - 2 * n * n + 1;
    (full, gangster)
}

/// The facially reduced QAP: minimize `<Vhat^T L Vhat, R>` subject to the
/// gangster constraints `G(Vhat R Vhat^T) = e_0 e_0^T` on the reduced cone
/// of order `(n-1)^2 + 1`.
pub fn qap_reduced(f: &SymMatrix, d: &SymMatrix, c: &Mat) -> Result<LiftedProblem> {
    let n = f.order();
    if n < 2 {
        return Err(Error::Invalid("QAP reduction needs n >= 2".into()));
    }
    let l = qap_objective(f, d, c)?;
    let (_, _, d0) = qap_assignment_exposing(n);
    let vhat = qap_face_basis(n);
    let big = n * n + 1;
    let constraints = gangster_index_set(n)
        .into_iter()
        .map(|(p, q)| {
            let m = SymMatrix::sym_unit(big, p, q).compress(&vhat);
            let rhs = if (p, q) == (0, 0) { 1.0 } else { 0.0 };
            (m, rhs)
        })
        .collect();
    Ok(LiftedProblem {
        order: vhat.cols(),
        objective: l.compress(&vhat),
        constraints,
        exposing: d0,
        face_basis: vhat,
    })
}

/// Lift of a permutation matrix to the rank-one block matrix
/// `(1; vec X)(1; vec X)^T`.
pub fn lift_permutation(x: &Mat) -> Result<SymMatrix> {
    let n = x.rows();
    if x.cols() != n {
        return Err(Error::NotPermutation);
    }
    for i in 0..n {
        for j in 0..n {
            let v = x[(i, j)];
            if (v - 0.0).abs() > 1e-12 && (v - 1.0).abs() > 1e-12 {
                return Err(Error::NotPermutation);
            }
        }
    }
    for i in 0..n {
        let row: f64 = (0..n).map(|j| x[(i, j)]).sum();
        let col: f64 = (0..n).map(|j| x[(j, i)]).sum();
        if (row - 1.0).abs() > 1e-12 || (col - 1.0).abs() > 1e-12 {
            return Err(Error::NotPermutation);
        }
    }
    let mut lifted = vec![1.0];
    for col in 0..n {
        for row in 0..n {
            lifted.push(x[(row, col)]);
        }
    }
    Ok(SymMatrix::outer(&lifted))
}

/// Reduced coordinates `R = Vhat^T Y Vhat`; since every lifted permutation
/// lies in the range of `Vhat`, the expansion `Vhat R Vhat^T` reproduces
/// `Y`.
pub fn reduce_lift(y: &SymMatrix, vhat: &Mat) -> SymMatrix {
    y.compress(vhat)
}

/// All `n x n` permutation matrices in lexicographic order; desk scale
/// only.
pub fn all_permutations(n: usize) -> Vec<Mat> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let mut m = Mat::zeros(n, n);
        for (i, &j) in perm.iter().enumerate() {
            m[(i, j)] = 1.0;
        }
        out.push(m);
        // Next lexicographic permutation.
        let Some(i) = (0..n.saturating_sub(1))
            .rev()
            .find(|&i| perm[i] < perm[i + 1])
        else {
            break;
        };
        let j = (i + 1..n)
            .rev()
            .find(|&j| perm[j] > perm[i])
            .expect("successor exists");
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn direct_qap_value(f: &SymMatrix, d: &SymMatrix, c: &Mat, x: &Mat) -> f64 {
        // trace(F X D X^T) + trace(C X^T), evaluated entrywise.
        let n = f.order();
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        quad += f.get(i, k) * x[(k, j)] * d.get(j, l) * x[(i, l)];
                    }
                }
            }
        }
        let mut lin = 0.0;
        for i in 0..n {
            for j in 0..n {
                lin += c[(i, j)] * x[(i, j)];
            }
        }
        quad + lin
    }

    #[test]
    fn svec_examples() {
        let m = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 3.0]]);
        let v = svec(&m);
        assert!((v[0] - 1.0).abs() < 1e-15);
        assert!((v[1] - 2.0 * 2.0f64.sqrt()).abs() < 1e-15);
        assert!((v[2] - 3.0).abs() < 1e-15);
        assert_eq!(svec(&SymMatrix::identity(2)), vec![1.0, 0.0, 1.0]);
        assert!(smat(&v).sub(&m).fro_norm() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let n = rng.random_range(1..7);
            let a = SymMatrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let b = SymMatrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let lhs = numerics::dot(&svec(&a), &svec(&b));
            assert!((lhs - a.inner(&b)).abs() < 1e-12);
        }
    }

    #[test]
    fn affine_hull_exposing_examples() {
        // Four points spanning the plane orthogonal to (1, 0, 1).
        let l = Mat::from_rows(&[vec![1.0, 0.0, 1.0]]);
        let w = affine_hull_exposing(&l, &[0.0]).unwrap();
        let pts = [
            [1.0, 1.0, -1.0],
            [-1.0, -1.0, 1.0],
            [1.0, -1.0, -1.0],
            [-1.0, 1.0, 1.0],
        ];
        for p in &pts {
            let mut lifted = vec![1.0];
            lifted.extend_from_slice(p);
            let y = SymMatrix::outer(&lifted);
            assert!(w.inner(&y).abs() < 1e-12);
        }

        // Empty L: zero exposing vector.
        let w = affine_hull_exposing(&Mat::zeros(0, 3), &[]).unwrap();
        assert!(w.fro_norm() < 1e-30);

        // x pinned uniquely: exposing rank N - 1.
        let l = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let w = affine_hull_exposing(&l, &[2.0, 3.0]).unwrap();
        let spec = w.eig();
        assert_eq!(numerics::numerical_rank(&spec.values, Some(1e-10)), 2);
        let mut lifted = vec![1.0, 2.0, 3.0];
        let y = SymMatrix::outer(&lifted);
        assert!(w.inner(&y).abs() < 1e-12);
        lifted[1] = 0.0;
        assert!(SymMatrix::outer(&lifted).inner(&w).abs() > 1e-6);
    }

    #[test]
    fn maxcut_lift_shapes() {
        let weights = SymMatrix::from_fn(3, |i, j| if i != j { 1.0 } else { 0.0 });
        let lift = maxcut_second_lift(3, &weights).unwrap();
        assert_eq!(lift.order, 7);
        let e = maxcut_e_matrix(3);
        assert_eq!((e.rows(), e.cols()), (7, 3));
        assert_eq!(lift.face_basis.rows(), 7);
    }

    #[test]
    fn all_cuts_annihilated_and_constraints_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 2..=5 {
            let weights = SymMatrix::from_fn(n, |i, j| {
                if i == j {
                    0.0
                } else {
                    rng.random_range(0.0..1.0)
                }
            });
            let lift = maxcut_second_lift(n, &weights).unwrap();
            for mask in 0..(1u32 << n) {
                let cut: Vec<f64> = (0..n)
                    .map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 })
                    .collect();
                let y = maxcut_lift_point(&cut).unwrap();
                assert!(lift.exposing.inner(&y).abs() <= 1e-10);
                for (m, rhs) in &lift.constraints {
                    assert!((m.inner(&y) - rhs).abs() <= 1e-10);
                }
                // Objective matches the direct cut value.
                let direct = cut_value(&weights, &cut);
                assert!((lift.objective.inner(&y) - direct).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn qap_objective_matches_trace_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in 2..=3 {
            let f = SymMatrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let d = SymMatrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let c = Mat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let l = qap_objective(&f, &d, &c).unwrap();
            for x in all_permutations(n) {
                let y = lift_permutation(&x).unwrap();
                let via_lift = l.inner(&y);
                let direct = direct_qap_value(&f, &d, &c, &x);
                assert!((via_lift - direct).abs() < 1e-10, "n={n}");
            }
        }
        // Zero data gives the zero objective.
        let z = SymMatrix::zeros(2);
        let l = qap_objective(&z, &z, &Mat::zeros(2, 2)).unwrap();
        assert!(l.fro_norm() < 1e-30);
    }

    #[test]
    fn assignment_exposing_shapes_and_kernel() {
        for n in 2..=4 {
            let (e_r, e_c, d0) = qap_assignment_exposing(n);
            assert_eq!((e_r.rows(), e_r.cols()), (n * n + 1, n));
            assert_eq!((e_c.rows(), e_c.cols()), (n * n + 1, n));
            let spec = d0.eig();
            assert_eq!(
                numerics::numerical_rank(&spec.values, Some(1e-10)),
                2 * n - 1
            );
            let vhat = qap_face_basis(n);
            assert_eq!(vhat.cols(), (n - 1) * (n - 1) + 1);
            // D0 Vhat = 0.
            let prod = d0.to_mat().matmul(&vhat);
            assert!(prod.fro_norm() < 1e-10);
            // Every lifted permutation is annihilated.
            for x in all_permutations(n) {
                let y = lift_permutation(&x).unwrap();
                assert!(d0.inner(&y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn affine_hull_of_assignment_rows_matches_d0_kernel() {
        // Rows of Xe = e, X^T e = e as an affine system on vec(X).
        for n in 2..=3 {
            let mut rows = Vec::new();
            let mut rhs = Vec::new();
            for i in 0..n {
                let mut row = vec![0.0; n * n];
                for t in 0..n {
                    row[t * n + i] = 1.0;
                }
                rows.push(row);
                rhs.push(1.0);
            }
            for i in 0..n {
                let mut col = vec![0.0; n * n];
                for t in 0..n {
                    col[i * n + t] = 1.0;
                }
                rows.push(col);
                rhs.push(1.0);
            }
            let l = Mat::from_rows(&rows);
            let w = affine_hull_exposing(&l, &rhs).unwrap();
            let (_, _, d0) = qap_assignment_exposing(n);
            // Same kernel: compare projectors of the two nullspaces.
            let kb_w = numerics::nullspace_basis(&w, Some(1e-10));
            let kb_d = numerics::nullspace_basis(&d0, Some(1e-10));
            let pw = SymMatrix::from_mat(&kb_w.matmul(&kb_w.transpose()));
            let pd = SymMatrix::from_mat(&kb_d.matmul(&kb_d.transpose()));
            assert!(pw.sub(&pd).fro_norm() < 1e-8);
        }
    }

    #[test]
    fn gangster_counts() {
        assert_eq!(gangster_index_set(3).len(), 10);
        assert_eq!(gangster_index_set(4).len(), 33);
        assert_eq!(qap_constraint_counts(3), (35, 10));
        assert_eq!(qap_constraint_counts(4), (76, 33));
    }

    #[test]
    fn reduced_qap_round_trip_and_feasibility() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 2..=4 {
            let f = SymMatrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let d = SymMatrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let c = Mat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let reduced = qap_reduced(&f, &d, &c).unwrap();
            assert_eq!(reduced.order, (n - 1) * (n - 1) + 1);

            let mut bary = SymMatrix::zeros(reduced.order);
            let perms = all_permutations(n);
            for x in &perms {
                let y = lift_permutation(x).unwrap();
                let r = reduce_lift(&y, &reduced.face_basis);
                // Expansion reproduces the lift: Y sits inside the face.
                let back = r.expand(&reduced.face_basis);
                assert!(back.sub(&y).fro_norm() < 1e-10);
                // Gangster feasibility and objective agreement.
                for (m, rhs) in &reduced.constraints {
                    assert!((m.inner(&r) - rhs).abs() < 1e-8);
                }
                let direct = direct_qap_value(&f, &d, &c, x);
                assert!((reduced.objective.inner(&r) - direct).abs() < 1e-8);
                bary.add_assign_scaled(&r, 1.0 / perms.len() as f64);
            }
            // The barycenter is strictly feasible in the reduced cone.
            assert!(bary.min_eig() > 1e-6, "n={n}");
        }
    }

    #[test]
    fn lift_permutation_rejects_non_permutations() {
        let ok = Mat::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let y = lift_permutation(&ok).unwrap();
        assert!((y.get(0, 0) - 1.0).abs() < 1e-15);
        let spec = y.eig();
        assert_eq!(numerics::numerical_rank(&spec.values, Some(1e-10)), 1);

        let bad = Mat::from_rows(&[vec![1.0, 1.0], vec![0.0, 0.0]]);
        assert!(matches!(lift_permutation(&bad), Err(Error::NotPermutation)));
        let non_binary = Mat::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert!(matches!(
            lift_permutation(&non_binary),
            Err(Error::NotPermutation)
        ));
    }
}
