//! Conic-program model, auxiliary-system certificates, and the facial
//! reduction engine.
//!
//! A problem is `min <C,X> s.t. <A_i,X> = b_i, X in S^n_+`. A vector `y`
//! with `0 != A*y >= 0` and `<b,y> = 0` certifies that strict feasibility
//! fails and exposes a proper face containing the feasible region; the
//! engine loops certificate search, validation, restriction to the face,
//! and constraint cleanup. The engine never claims the singularity degree:
//! the recorded trace length is a witness upper bound only (minimality
//! quantifies over all certificate choices). Finder `None` means "no
//! certificate found by this relaxation", never "strictly feasible".

use crate::cones::FaceRep;
use crate::lp::{solve_lp, LpOutcome, LpProblem, Sense};
use crate::numerics::{
    self, dot, norm2, nullspace_basis, numerical_rank, range_basis, svec_len, sym_to_svec, Mat,
    SymMatrix,
};
use crate::{CertFailure, Error, Result};

/// `min <C,X> s.t. A(X) = b, X in S^n_+`.
///
/// The nonnegative orthant is supported only through the diagonal embedding
/// of [`ConicProblem::from_lp_diagonal`].
#[derive(Clone, Debug)]
pub struct ConicProblem {
    n: usize,
    a_mats: Vec<SymMatrix>,
    b: Vec<f64>,
    c: SymMatrix,
}

impl ConicProblem {
    pub fn new(a_mats: Vec<SymMatrix>, b: Vec<f64>, c: SymMatrix) -> Result<Self> {
        let n = c.order();
        if a_mats.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a_mats.len(),
                got: b.len(),
            });
        }
        for a in &a_mats {
            if a.order() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: a.order(),
                });
            }
        }
        if !b.iter().all(|v| v.is_finite()) {
            return Err(Error::Invalid("right-hand side must be finite".into()));
        }
        Ok(ConicProblem { n, a_mats, b, c })
    }

    /// Feasibility-only problem (zero objective).
    pub fn feasibility(a_mats: Vec<SymMatrix>, b: Vec<f64>, n: usize) -> Result<Self> {
        ConicProblem::new(a_mats, b, SymMatrix::zeros(n))
    }

    /// Diagonal embedding of an LP `{x >= 0 : rows . x = b}` with costs `c`.
    pub fn from_lp_diagonal(rows: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<Self> {
        let n = c.len();
        let a_mats = rows
            .iter()
            .map(|r| {
                if r.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: r.len(),
                    });
                }
                Ok(SymMatrix::diag(r))
            })
            .collect::<Result<Vec<_>>>()?;
        ConicProblem::new(a_mats, b.to_vec(), SymMatrix::diag(c))
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn num_constraints(&self) -> usize {
        self.a_mats.len()
    }

    pub fn constraint(&self, i: usize) -> &SymMatrix {
        &self.a_mats[i]
    }

    pub fn constraints(&self) -> &[SymMatrix] {
        &self.a_mats
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn objective(&self) -> &SymMatrix {
        &self.c
    }

    /// `A(X) = (<A_1,X>, ..., <A_m,X>)`.
    pub fn apply_a(&self, x: &SymMatrix) -> Result<Vec<f64>> {
        if x.order() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.order(),
            });
        }
        Ok(self.a_mats.iter().map(|a| a.inner(x)).collect())
    }

    /// `A* y = sum_i y_i A_i`.
    pub fn adjoint_a(&self, y: &[f64]) -> Result<SymMatrix> {
        if y.len() != self.a_mats.len() {
            return Err(Error::DimensionMismatch {
                expected: self.a_mats.len(),
                got: y.len(),
            });
        }
        let mut out = SymMatrix::zeros(self.n);
        for (a, &yi) in self.a_mats.iter().zip(y) {
            if yi != 0.0 {
                out.add_assign_scaled(a, yi);
            }
        }
        Ok(out)
    }

    /// Frobenius projection of `X` onto the affine set `{A(X) = b}`.
    pub fn affine_project(&self, x: &SymMatrix) -> Result<SymMatrix> {
        if x.order() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.order(),
            });
        }
        let m = self.a_mats.len();
        if m == 0 {
            return Ok(x.clone());
        }
        let mut gram = SymMatrix::zeros(m);
        for i in 0..m {
            for j in i..m {
                gram.set(i, j, self.a_mats[i].inner(&self.a_mats[j]));
            }
        }
        let mut resid = self.b.clone();
        let ax = self.apply_a(x)?;
        for (r, v) in resid.iter_mut().zip(&ax) {
            *r -= v;
        }
        let lambda = numerics::pinv_apply(&gram, &resid, None);
        let mut out = x.clone();
        for (a, &l) in self.a_mats.iter().zip(&lambda) {
            if l != 0.0 {
                out.add_assign_scaled(a, l);
            }
        }
        Ok(out)
    }

    /// Distance from `X` to the affine set `{A(X) = b}`.
    pub fn distance_to_affine(&self, x: &SymMatrix) -> Result<f64> {
        Ok(x.sub(&self.affine_project(x)?).fro_norm())
    }

    /// Residual-based feasibility check of a candidate point.
    pub fn is_feasible(&self, x: &SymMatrix, tol: f64) -> bool {
        match self.apply_a(x) {
            Ok(ax) => {
                let res: f64 = ax
                    .iter()
                    .zip(&self.b)
                    .map(|(u, v)| (u - v) * (u - v))
                    .sum::<f64>()
                    .sqrt();
                res <= tol * (1.0 + norm2(&self.b)) && x.min_eig() >= -tol * x.fro_norm().max(1.0)
            }
            Err(_) => false,
        }
    }
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

/// Residuals recorded while validating a certificate.
#[derive(Clone, Debug)]
pub struct CertResiduals {
    /// Smallest eigenvalue of the exposing candidate.
    pub min_eig: f64,
    /// Frobenius norm of the exposing candidate.
    pub norm: f64,
    /// Numerical rank of the exposing candidate.
    pub rank: usize,
    /// `|<b,y>|` for primal certificates, `|<C,X>|` for dual ones.
    pub inner: f64,
    /// `||A(X)||` for dual certificates; zero for primal ones.
    pub map_residual: f64,
}

/// A validated auxiliary-system solution.
#[derive(Clone, Debug)]
pub enum Certificate {
    /// `0 != A*y >= 0`, `<b,y> = 0`: exposes a face containing the primal
    /// feasible region.
    PrimalAux {
        y: Vec<f64>,
        exposing: SymMatrix,
        residuals: CertResiduals,
    },
    /// `0 != X >= 0`, `A(X) = 0`, `<C,X> = 0`: exposes a face containing
    /// the feasible slacks.
    DualAux {
        x: SymMatrix,
        residuals: CertResiduals,
    },
}

impl Certificate {
    pub fn exposing(&self) -> &SymMatrix {
        match self {
            Certificate::PrimalAux { exposing, .. } => exposing,
            Certificate::DualAux { x, .. } => x,
        }
    }

    pub fn residuals(&self) -> &CertResiduals {
        match self {
            Certificate::PrimalAux { residuals, .. } => residuals,
            Certificate::DualAux { residuals, .. } => residuals,
        }
    }
}

/// Outcome of validating a candidate certificate.
#[derive(Clone, Debug)]
pub enum CertCheck {
    Valid(Certificate),
    Invalid(CertFailure),
}

impl CertCheck {
    pub fn valid(self) -> Result<Certificate> {
        match self {
            CertCheck::Valid(c) => Ok(c),
            CertCheck::Invalid(reason) => Err(Error::InvalidCertificate(reason)),
        }
    }

    pub fn is_valid(&self) -> bool {
        matches!(self, CertCheck::Valid(_))
    }
}

/// Validates a primal auxiliary-system candidate `y`.
///
/// Valid iff `W = A*y` is PSD to `tol`, numerically nonzero, and
/// `<b,y> = 0` to `tol`; tolerances are relative to instance norms. A
/// candidate whose exposing matrix has numerical rank zero is rejected even
/// if it passes the norm check, preventing zero-progress reduction steps.
pub fn check_certificate_primal(p: &ConicProblem, y: &[f64], tol: f64) -> Result<CertCheck> {
    let w = p.adjoint_a(y)?;
    let norm = w.fro_norm();
    if norm <= tol {
        return Ok(CertCheck::Invalid(CertFailure::Zero));
    }
    let spec = w.eig();
    let rank = numerical_rank(&spec.values, None);
    if rank == 0 {
        return Ok(CertCheck::Invalid(CertFailure::Zero));
    }
    let min_eig = spec.values.last().copied().unwrap_or(0.0);
    if min_eig < -tol * norm.max(1.0) {
        return Ok(CertCheck::Invalid(CertFailure::NotPsd));
    }
    let inner = dot(&p.b, y).abs();
    if inner > tol * (1.0 + norm2(&p.b) * norm2(y)) {
        return Ok(CertCheck::Invalid(CertFailure::BadInnerProduct));
    }
    Ok(CertCheck::Valid(Certificate::PrimalAux {
        y: y.to_vec(),
        exposing: w,
        residuals: CertResiduals {
            min_eig,
            norm,
            rank,
            inner,
            map_residual: 0.0,
        },
    }))
}

/// Validates a dual auxiliary-system candidate `X`.
pub fn check_certificate_dual(p: &ConicProblem, x: &SymMatrix, tol: f64) -> Result<CertCheck> {
    if x.order() != p.n {
        return Err(Error::DimensionMismatch {
            expected: p.n,
            got: x.order(),
        });
    }
    let norm = x.fro_norm();
    if norm <= tol {
        return Ok(CertCheck::Invalid(CertFailure::Zero));
    }
    let spec = x.eig();
    let rank = numerical_rank(&spec.values, None);
    if rank == 0 {
        return Ok(CertCheck::Invalid(CertFailure::Zero));
    }
    let min_eig = spec.values.last().copied().unwrap_or(0.0);
    if min_eig < -tol * norm.max(1.0) {
        return Ok(CertCheck::Invalid(CertFailure::NotPsd));
    }
    let map_residual = norm2(&p.apply_a(x)?);
    if map_residual > tol * (1.0 + norm) {
        return Ok(CertCheck::Invalid(CertFailure::BadInnerProduct));
    }
    let inner = p.c.inner(x).abs();
    if inner > tol * (1.0 + p.c.fro_norm() * norm) {
        return Ok(CertCheck::Invalid(CertFailure::BadInnerProduct));
    }
    Ok(CertCheck::Valid(Certificate::DualAux {
        x: x.clone(),
        residuals: CertResiduals {
            min_eig,
            norm,
            rank,
            inner,
            map_residual,
        },
    }))
}

// ---------------------------------------------------------------------------
// LP-relaxed certificate finders
// ---------------------------------------------------------------------------

/// Which polyhedral inner approximation of the PSD cone the finder uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FinderKind {
    /// `A*y` constrained to be diagonal with nonnegative entries.
    Diag,
    /// `A*y` constrained to be diagonally dominant with nonnegative
    /// diagonal (an LP-representable PSD inner approximation).
    DiagDominant,
}

/// Searches for a primal certificate by linear programming over an inner
/// approximation of the PSD cone.
///
/// `None` means this relaxation found nothing, which is not a proof of
/// strict feasibility. The LP carries the normalization `trace(A*y) = 1`
/// and the orthogonality `<b,y> = 0`.
pub fn find_certificate_lp(p: &ConicProblem, approx: FinderKind) -> Result<Option<Vec<f64>>> {
    let m = p.num_constraints();
    let n = p.order();
    if m == 0 || n == 0 {
        return Ok(None);
    }
    let off_pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let q = off_pairs.len();

    // Variables: y (free, m of them), then for DiagDominant the slack
    // bounds s_ij >= |w_ij|.
    let nv = match approx {
        FinderKind::Diag => m,
        FinderKind::DiagDominant => m + q,
    };
    let mut lp = LpProblem {
        sense: Sense::Minimize,
        objective: vec![0.0; nv],
        a_eq: Vec::new(),
        b_eq: Vec::new(),
        a_le: Vec::new(),
        b_le: Vec::new(),
        lower_bounds: vec![None; nv],
    };
    for s in lp.lower_bounds.iter_mut().take(nv).skip(m) {
        *s = Some(0.0);
    }

    let w_entry_row = |i: usize, j: usize| -> Vec<f64> {
        let mut row = vec![0.0; nv];
        for (k, a) in p.a_mats.iter().enumerate() {
            row[k] = a.get(i, j);
        }
        row
    };

    match approx {
        FinderKind::Diag => {
            // Off-diagonals of A*y vanish.
            for &(i, j) in &off_pairs {
                lp.push_eq(w_entry_row(i, j), 0.0);
            }
            // Diagonal is nonnegative: -w_ii <= 0.
            for i in 0..n {
                let row = w_entry_row(i, i);
                lp.push_le(row.iter().map(|v| -v).collect(), 0.0);
            }
        }
        FinderKind::DiagDominant => {
            // |w_ij| <= s_ij.
            for (t, &(i, j)) in off_pairs.iter().enumerate() {
                let base = w_entry_row(i, j);
                let mut up = base.clone();
                up[m + t] = -1.0;
                lp.push_le(up, 0.0);
                let mut down: Vec<f64> = base.iter().map(|v| -v).collect();
                down[m + t] = -1.0;
                lp.push_le(down, 0.0);
            }
            // Row dominance: sum_j s_ij - w_ii <= 0.
            for i in 0..n {
                let mut row: Vec<f64> = w_entry_row(i, i).iter().map(|v| -v).collect();
                for (t, &(a, b)) in off_pairs.iter().enumerate() {
                    if a == i || b == i {
                        row[m + t] = 1.0;
                    }
                }
                lp.push_le(row, 0.0);
            }
        }
    }

    // <b,y> = 0.
    let mut brow = vec![0.0; nv];
    brow[..m].copy_from_slice(&p.b);
    lp.push_eq(brow, 0.0);
    // trace(A*y) = 1 normalization.
    let mut trow = vec![0.0; nv];
    for (k, a) in p.a_mats.iter().enumerate() {
        trow[k] = a.trace();
    }
    lp.push_eq(trow, 1.0);

    match solve_lp(&lp)? {
        LpOutcome::Optimal { x, .. } => Ok(Some(x[..m].to_vec())),
        LpOutcome::Infeasible => Ok(None),
        // The zero objective cannot be unbounded, but treat it as "nothing
        // found" defensively is wrong; it is a solver defect.
        LpOutcome::Unbounded => Err(Error::IterationLimit),
    }
}

// ---------------------------------------------------------------------------
// Reduction steps
// ---------------------------------------------------------------------------

/// One primal facial-reduction step: restrict to the face exposed by the
/// certificate. Returns the reduced problem over `S^{n-r}` and the face
/// basis `V` with reduced data `A_i -> V^T A_i V`, `C -> V^T C V`.
pub fn fr_step_primal(p: &ConicProblem, cert: &Certificate) -> Result<(ConicProblem, Mat)> {
    let w = match cert {
        Certificate::PrimalAux { exposing, .. } => exposing,
        Certificate::DualAux { .. } => {
            return Err(Error::Invalid(
                "primal step requires a primal certificate".into(),
            ))
        }
    };
    if w.order() != p.n {
        return Err(Error::DimensionMismatch {
            expected: p.n,
            got: w.order(),
        });
    }
    let spec = w.eig();
    let rank = numerical_rank(&spec.values, None);
    if rank == 0 {
        return Err(Error::InvalidCertificate(CertFailure::Zero));
    }
    let v = nullspace_basis(w, None);
    let a_mats: Vec<SymMatrix> = p.a_mats.iter().map(|a| a.compress(&v)).collect();
    let c = p.c.compress(&v);
    Ok((
        ConicProblem {
            n: v.cols(),
            a_mats,
            b: p.b.clone(),
            c,
        },
        v,
    ))
}

/// A dual facial-reduction step with variable substitution.
#[derive(Clone, Debug)]
pub struct DualFrStep {
    /// Reduced dual data over the new variables `t`: maximize
    /// `<b,t> + objective_offset` subject to `sum_j t_j A_j <= C` on the
    /// reduced cone.
    pub reduced: ConicProblem,
    /// Basis of the face containing the feasible slacks.
    pub face_basis: Mat,
    /// Particular solution of the implicit equality block.
    pub y_particular: Vec<f64>,
    /// `y = y_particular + y_basis * t`.
    pub y_basis: Mat,
    /// `<b, y_particular>`.
    pub objective_offset: f64,
}

/// One dual facial-reduction step: slacks are restricted to the face
/// exposed by the certificate (`L(t) = V^T (A* y) V <= V^T C V`), and the
/// implicit equalities on the complement are solved to eliminate dual
/// variables.
pub fn fr_step_dual(p: &ConicProblem, cert: &Certificate) -> Result<DualFrStep> {
    let x = match cert {
        Certificate::DualAux { x, .. } => x,
        Certificate::PrimalAux { .. } => {
            return Err(Error::Invalid(
                "dual step requires a dual certificate".into(),
            ))
        }
    };
    let spec = x.eig();
    let rank = numerical_rank(&spec.values, None);
    if rank == 0 {
        return Err(Error::InvalidCertificate(CertFailure::Zero));
    }
    let v = nullspace_basis(x, None);
    let u = range_basis(x, None);
    let m = p.num_constraints();

    // Equality block U^T (C - A*y) U = 0, solved for y.
    let udim = u.cols();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let cu = p.c.compress(&u);
    let au: Vec<SymMatrix> = p.a_mats.iter().map(|a| a.compress(&u)).collect();
    for i in 0..udim {
        for j in i..udim {
            rows.push((0..m).map(|k| au[k].get(i, j)).collect::<Vec<f64>>());
            rhs.push(cu.get(i, j));
        }
    }
    let (y0, ybasis) = if rows.is_empty() {
        (vec![0.0; m], Mat::identity(m))
    } else {
        let a_ls = Mat::from_rows(&rows);
        let y0 = numerics::solve_least_squares(&a_ls, &rhs);
        let fit = a_ls.apply(&y0);
        let res: f64 = fit
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if res > 1e-8 * (1.0 + norm2(&rhs)) {
            return Err(Error::Invalid(
                "implicit equality block is inconsistent: dual region is empty".into(),
            ));
        }
        let gram = SymMatrix::from_mat(&a_ls.tr_matmul(&a_ls));
        let nbasis = nullspace_basis(&gram, None);
        (y0, nbasis)
    };

    let c_red = p.c.sub(&p.adjoint_a(&y0)?).compress(&v);
    let mut a_red = Vec::new();
    let mut b_red = Vec::new();
    for t in 0..ybasis.cols() {
        let dir = ybasis.col(t);
        a_red.push(p.adjoint_a(&dir)?.compress(&v));
        b_red.push(dot(&p.b, &dir));
    }
    let offset = dot(&p.b, &y0);
    Ok(DualFrStep {
        reduced: ConicProblem {
            n: v.cols(),
            a_mats: a_red,
            b: b_red,
            c: c_red,
        },
        face_basis: v,
        y_particular: y0,
        y_basis: ybasis,
        objective_offset: offset,
    })
}

/// Removes linearly dependent constraint rows by rank-revealing elimination
/// on the vectorized data matrices, keeping earliest rows. A dependent row
/// whose right-hand side disagrees with the kept rows signals primal
/// infeasibility and is reported as an error.
pub fn drop_dependent_constraints(p: &ConicProblem, tol: f64) -> Result<ConicProblem> {
    let m = p.num_constraints();
    let len = svec_len(p.n);
    let mut kept_idx: Vec<usize> = Vec::new();
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    let mut kept_vecs: Vec<Vec<f64>> = Vec::new();
    for i in 0..m {
        let v = sym_to_svec(&p.a_mats[i]);
        let mut resid = v.clone();
        for q in &ortho {
            let c = dot(q, &resid);
            for (r, qq) in resid.iter_mut().zip(q) {
                *r -= c * qq;
            }
        }
        let rn = norm2(&resid);
        if rn > tol * (1.0 + norm2(&v)) {
            for r in resid.iter_mut() {
                *r /= rn;
            }
            ortho.push(resid);
            kept_vecs.push(v);
            kept_idx.push(i);
        } else {
            // Dependent: verify right-hand-side consistency.
            let predicted = if kept_idx.is_empty() {
                0.0
            } else {
                let mut a_ls = Mat::zeros(len, kept_idx.len());
                for (col, kv) in kept_vecs.iter().enumerate() {
                    a_ls.set_col(col, kv);
                }
                let lam = numerics::solve_least_squares(&a_ls, &v);
                kept_idx.iter().zip(&lam).map(|(&k, &l)| l * p.b[k]).sum()
            };
            if (predicted - p.b[i]).abs() > tol.max(1e-9) * (1.0 + p.b[i].abs()) {
                return Err(Error::InconsistentRow { row: i });
            }
        }
    }
    let a_mats = kept_idx.iter().map(|&i| p.a_mats[i].clone()).collect();
    let b = kept_idx.iter().map(|&i| p.b[i]).collect();
    Ok(ConicProblem {
        n: p.n,
        a_mats,
        b,
        c: p.c.clone(),
    })
}

// ---------------------------------------------------------------------------
// The facial reduction loop
// ---------------------------------------------------------------------------

/// One recorded reduction step.
#[derive(Clone, Debug)]
pub struct ReductionStep {
    /// Certificate vector in the coordinates of the stage it was found at.
    pub certificate: Vec<f64>,
    /// Exposing matrix `A*y` at that stage.
    pub exposing: SymMatrix,
    pub exposing_rank: usize,
    /// Face basis carrying stage `k` coordinates to stage `k+1`.
    pub face_basis: Mat,
    /// Problem snapshot after the step and row cleanup.
    pub reduced: ConicProblem,
}

/// Ordered certificates, exposing vectors, face bases, and the final
/// reduced problem. The step count is a singularity-degree witness (an
/// upper bound, not the degree itself).
#[derive(Clone, Debug)]
pub struct ReductionTrace {
    pub original: ConicProblem,
    pub steps: Vec<ReductionStep>,
    pub final_problem: ConicProblem,
}

impl ReductionTrace {
    pub fn witness_degree(&self) -> usize {
        self.steps.len()
    }

    /// Product of the first `k` face bases: carries original coordinates to
    /// stage-`k` coordinates via `Z = B^T X B`.
    pub fn basis_to_stage(&self, k: usize) -> Mat {
        let mut b = Mat::identity(self.original.order());
        for step in self.steps.iter().take(k) {
            b = b.matmul(&step.face_basis);
        }
        b
    }

    /// Carries original coordinates all the way to the final problem.
    pub fn cumulative_basis(&self) -> Mat {
        self.basis_to_stage(self.steps.len())
    }
}

/// Runs the facial-reduction loop: find certificate, validate, restrict,
/// drop dependent rows; stops when the finder returns `None` or after
/// `max_steps`. Terminates after at most `n` steps since every step
/// strictly decreases the cone order.
pub fn facially_reduce(
    p: &ConicProblem,
    finder: FinderKind,
    max_steps: usize,
    tol: f64,
) -> Result<ReductionTrace> {
    let mut current = drop_dependent_constraints(p, 1e-10)?;
    let mut steps = Vec::new();
    while steps.len() < max_steps && current.order() > 0 {
        let Some(y) = find_certificate_lp(&current, finder)? else {
            break;
        };
        let cert = check_certificate_primal(&current, &y, tol)?.valid()?;
        let (reduced, v) = fr_step_primal(&current, &cert)?;
        let reduced = drop_dependent_constraints(&reduced, 1e-10)?;
        let (exposing, exposing_rank) = match &cert {
            Certificate::PrimalAux {
                exposing,
                residuals,
                ..
            } => (exposing.clone(), residuals.rank),
            Certificate::DualAux { .. } => unreachable!(),
        };
        steps.push(ReductionStep {
            certificate: y,
            exposing,
            exposing_rank,
            face_basis: v,
            reduced: reduced.clone(),
        });
        current = reduced;
    }
    Ok(ReductionTrace {
        original: p.clone(),
        steps,
        final_problem: current,
    })
}

// ---------------------------------------------------------------------------
// Optimality reports
// ---------------------------------------------------------------------------

/// Residuals of the primal-dual optimality system at a candidate pair.
#[derive(Clone, Debug)]
pub struct OptimalityReport {
    /// `||A(x) - b||`.
    pub primal_residual: f64,
    /// Smallest eigenvalue of `x`.
    pub primal_min_eig: f64,
    /// Smallest eigenvalue of the dual slack `C - A*y`.
    pub dual_slack_min_eig: f64,
    /// Complementary slackness `<C - A*y, x>`.
    pub complementarity: f64,
    /// Weak-duality gap `<C,x> - <b,y>`.
    pub gap: f64,
    pub primal_feasible: bool,
    pub dual_feasible: bool,
}

/// Evaluates primal/dual feasibility residuals, complementary slackness,
/// and the weak-duality gap at `(x, y)`.
pub fn check_optimality(
    p: &ConicProblem,
    x: &SymMatrix,
    y: &[f64],
    tol: f64,
) -> Result<OptimalityReport> {
    let ax = p.apply_a(x)?;
    let primal_residual: f64 = ax
        .iter()
        .zip(&p.b)
        .map(|(u, v)| (u - v) * (u - v))
        .sum::<f64>()
        .sqrt();
    let primal_min_eig = x.min_eig();
    let slack = p.c.sub(&p.adjoint_a(y)?);
    let dual_slack_min_eig = slack.min_eig();
    let complementarity = slack.inner(x);
    let gap = p.c.inner(x) - dot(&p.b, y);
    Ok(OptimalityReport {
        primal_residual,
        primal_min_eig,
        dual_slack_min_eig,
        complementarity,
        gap,
        primal_feasible: primal_residual <= tol * (1.0 + norm2(&p.b))
            && primal_min_eig >= -tol * x.fro_norm().max(1.0),
        dual_feasible: dual_slack_min_eig >= -tol * slack.fro_norm().max(1.0),
    })
}

// ---------------------------------------------------------------------------
// Post-reduction feasibility by alternating projections
// ---------------------------------------------------------------------------

/// Dykstra alternating projections between a PSD face and an affine set
/// `{<A_i,X> = b_i}`. Returns a point satisfying both families to `tol`, or
/// `None` after `iters` sweeps without convergence.
pub fn alternating_projection_solve(
    face: &FaceRep,
    affine: &[(SymMatrix, f64)],
    iters: usize,
    tol: f64,
) -> Result<Option<SymMatrix>> {
    let n = face.ambient_order();
    for (a, _) in affine {
        if a.order() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.order(),
            });
        }
    }
    let a_mats: Vec<SymMatrix> = affine.iter().map(|(a, _)| a.clone()).collect();
    let b: Vec<f64> = affine.iter().map(|(_, v)| v).copied().collect();
    let affine_problem = ConicProblem::feasibility(a_mats, b.clone(), n)?;
    let bnorm = norm2(&b);

    let vbasis = face.basis();
    let project_face = |x: &SymMatrix| -> SymMatrix {
        if vbasis.cols() == 0 {
            return SymMatrix::zeros(n);
        }
        let small = x.compress(vbasis);
        let clipped = numerics::nearest_psd(&small);
        clipped.expand(vbasis)
    };

    let mut x = affine_problem.affine_project(&SymMatrix::zeros(n))?;
    let mut correction = SymMatrix::zeros(n);
    for _ in 0..iters {
        let shifted = x.add(&correction);
        let y = project_face(&shifted);
        correction = shifted.sub(&y);
        x = affine_problem.affine_project(&y)?;

        let cone_res = x.sub(&project_face(&x)).fro_norm();
        let ax = affine_problem.apply_a(&x)?;
        let aff_res: f64 = ax
            .iter()
            .zip(&b)
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>()
            .sqrt();
        if cone_res <= tol * (1.0 + x.fro_norm()) && aff_res <= tol * (1.0 + bnorm) {
            return Ok(Some(project_face(&x)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::unit_vector;
    use crate::pathologies;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn adjoint_on_sing_two_instance() {
        let inst = pathologies::sing_two_instance();
        let p = &inst.problem;
        let w = p.adjoint_a(&[0.0, 0.0, 1.0]).unwrap();
        let expected = SymMatrix::outer(&unit_vector(3, 1));
        assert!(w.sub(&expected).fro_norm() < 1e-14);
        assert!(p.adjoint_a(&[0.0; 3]).unwrap().fro_norm() < 1e-30);
    }

    #[test]
    fn adjoint_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let n = rng.random_range(1..6);
            let m = rng.random_range(1..5);
            let a_mats: Vec<SymMatrix> = (0..m)
                .map(|_| SymMatrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0)))
                .collect();
            let p = ConicProblem::feasibility(a_mats, vec![0.0; m], n).unwrap();
            let x = SymMatrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let y: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let lhs = dot(&p.apply_a(&x).unwrap(), &y);
            let rhs = x.inner(&p.adjoint_a(&y).unwrap());
            assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn certificate_primal_examples() {
        let inst = pathologies::sing_two_instance();
        let p = &inst.problem;
        let check = check_certificate_primal(p, &[0.0, 0.0, 1.0], 1e-9).unwrap();
        let cert = check.valid().unwrap();
        let expected = SymMatrix::outer(&unit_vector(3, 1));
        assert!(cert.exposing().sub(&expected).fro_norm() < 1e-12);

        // A*y = 0 is rejected as Zero.
        let zero = check_certificate_primal(p, &[0.0; 3], 1e-9).unwrap();
        assert!(matches!(zero, CertCheck::Invalid(CertFailure::Zero)));
    }

    #[test]
    fn certificate_primal_lp_preprocessing_example() {
        // Summing the two rows zeroes x1, x4, x5 on the feasible set.
        let rows = vec![
            vec![1.0, 1.0, 1.0, 1.0, 0.0],
            vec![1.0, -1.0, -1.0, 0.0, 1.0],
        ];
        let b = vec![1.0, -1.0];
        let c = vec![2.0, 6.0, -1.0, -2.0, 7.0];
        let p = ConicProblem::from_lp_diagonal(&rows, &b, &c).unwrap();
        let cert = check_certificate_primal(&p, &[1.0, 1.0], 1e-9)
            .unwrap()
            .valid()
            .unwrap();
        assert_eq!(cert.residuals().rank, 3);

        let (reduced, v) = fr_step_primal(&p, &cert).unwrap();
        assert_eq!(reduced.order(), 2);
        assert_eq!(v.cols(), 2);
        // The two reduced rows coincide; cleanup keeps one.
        let cleaned = drop_dependent_constraints(&reduced, 1e-10).unwrap();
        assert_eq!(cleaned.num_constraints(), 1);
    }

    #[test]
    fn certificate_dual_examples() {
        // Dual LP preprocessing example: rows 3,4 are implicit equalities.
        let a_rows = [[-1.0, -1.0], [1.0, 1.0], [1.0, -1.0], [-2.0, 2.0]];
        let c = vec![1.0, 2.0, 1.0, -2.0];
        let b = vec![2.0, 6.0];
        // Dual-form data: A_k = Diag of column k.
        let a_mats = vec![
            SymMatrix::diag(&a_rows.iter().map(|r| r[0]).collect::<Vec<_>>()),
            SymMatrix::diag(&a_rows.iter().map(|r| r[1]).collect::<Vec<_>>()),
        ];
        let p = ConicProblem::new(a_mats, b, SymMatrix::diag(&c)).unwrap();

        let zero = check_certificate_dual(&p, &SymMatrix::zeros(4), 1e-9).unwrap();
        assert!(matches!(zero, CertCheck::Invalid(CertFailure::Zero)));

        let x = SymMatrix::diag(&[0.0, 0.0, 2.0, 1.0]);
        let cert = check_certificate_dual(&p, &x, 1e-9)
            .unwrap()
            .valid()
            .unwrap();
        let step = fr_step_dual(&p, &cert).unwrap();
        // After substituting the implicit equalities the dual is univariate.
        assert_eq!(step.reduced.num_constraints(), 1);
        assert_eq!(step.reduced.order(), 2);

        // Random X with A(X) != 0 is rejected.
        let bad = SymMatrix::diag(&[1.0, 0.0, 0.0, 0.0]);
        let check = check_certificate_dual(&p, &bad, 1e-9).unwrap();
        assert!(matches!(
            check,
            CertCheck::Invalid(CertFailure::BadInnerProduct)
        ));
    }

    #[test]
    fn dual_step_rank_n_minus_one_gives_scalar_cone() {
        let n = 3;
        let a1 = SymMatrix::outer(&unit_vector(n, 2));
        let p = ConicProblem::new(vec![a1.clone()], vec![1.0], a1).unwrap();
        let x = SymMatrix::diag(&[1.0, 1.0, 0.0]);
        let cert = check_certificate_dual(&p, &x, 1e-9)
            .unwrap()
            .valid()
            .unwrap();
        let step = fr_step_dual(&p, &cert).unwrap();
        assert_eq!(step.reduced.order(), 1);
    }

    #[test]
    fn drop_dependent_examples() {
        let a = SymMatrix::diag(&[1.0, 2.0]);
        let p = ConicProblem::feasibility(vec![a.clone(), a.clone()], vec![3.0, 3.0], 2).unwrap();
        let cleaned = drop_dependent_constraints(&p, 1e-10).unwrap();
        assert_eq!(cleaned.num_constraints(), 1);

        let bad = ConicProblem::feasibility(vec![a.clone(), a], vec![3.0, 4.0], 2).unwrap();
        assert!(matches!(
            drop_dependent_constraints(&bad, 1e-10),
            Err(Error::InconsistentRow { row: 1 })
        ));
    }

    #[test]
    fn full_rank_certificate_reduces_to_zero_dimensions() {
        // Feasible region {X >= 0 : <I,X> = 0} = {0}; y = 1 gives W = I.
        let p = ConicProblem::feasibility(vec![SymMatrix::identity(2)], vec![0.0], 2).unwrap();
        let cert = check_certificate_primal(&p, &[1.0], 1e-9)
            .unwrap()
            .valid()
            .unwrap();
        let (reduced, v) = fr_step_primal(&p, &cert).unwrap();
        assert_eq!(reduced.order(), 0);
        assert_eq!(v.cols(), 0);
    }

    #[test]
    fn strictly_feasible_finder_returns_none() {
        // {X >= 0 : <I,X> = 1} has X = I/n strictly feasible.
        let p = ConicProblem::feasibility(vec![SymMatrix::identity(3)], vec![1.0], 3).unwrap();
        assert!(find_certificate_lp(&p, FinderKind::Diag).unwrap().is_none());
        assert!(find_certificate_lp(&p, FinderKind::DiagDominant)
            .unwrap()
            .is_none());
        let trace = facially_reduce(&p, FinderKind::Diag, 10, 1e-8).unwrap();
        assert_eq!(trace.witness_degree(), 0);
    }

    #[test]
    fn finder_on_sing_two_returns_e3_direction() {
        let inst = pathologies::sing_two_instance();
        let y = find_certificate_lp(&inst.problem, FinderKind::Diag)
            .unwrap()
            .unwrap();
        // All feasible candidates are positive multiples of e3.
        assert!(y[0].abs() < 1e-8 && y[1].abs() < 1e-8);
        assert!(y[2] > 0.1);
    }

    #[test]
    fn finder_on_worst_case_n3_first_step() {
        let inst = pathologies::nested_sing_instance(3);
        let y = find_certificate_lp(&inst.problem, FinderKind::Diag)
            .unwrap()
            .unwrap();
        let w = inst.problem.adjoint_a(&y).unwrap();
        // The only diagonal certificate is supported on the (2,2) entry.
        let expected = SymMatrix::diag(&[0.0, 1.0, 0.0]);
        assert!(w.sub(&expected).fro_norm() < 1e-7);
    }

    #[test]
    fn sing_two_trace_matches_expected_reduction() {
        let inst = pathologies::sing_two_instance();
        let trace = facially_reduce(&inst.problem, FinderKind::Diag, 10, 1e-8).unwrap();
        assert_eq!(trace.witness_degree(), 2);
        // First reduced region is {[[x11,x13],[x13,x33]] >= 0 : x11=1, x33=0}.
        let first = &trace.steps[0].reduced;
        assert_eq!(first.order(), 2);
        assert_eq!(first.num_constraints(), 2);
        assert_eq!(trace.final_problem.order(), 1);
    }

    #[test]
    fn nested_witness_degrees() {
        for n in 2..=5 {
            let inst = pathologies::nested_sing_instance(n);
            let trace = facially_reduce(&inst.problem, FinderKind::Diag, 20, 1e-8).unwrap();
            assert_eq!(trace.witness_degree(), n - 1, "n={n}");
            // Exposing vectors are orthogonal to the stored feasible point.
            let witness = inst.known.feasible_point.clone().unwrap();
            for (k, step) in trace.steps.iter().enumerate() {
                let basis = trace.basis_to_stage(k);
                let mapped = witness.compress(&basis);
                assert!(step.exposing.inner(&mapped).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn fr_preserves_known_optimal_values() {
        let inst = pathologies::positive_gap();
        let trace = facially_reduce(&inst.problem, FinderKind::Diag, 10, 1e-8).unwrap();
        assert!(trace.witness_degree() >= 1);
        let xstar = inst.known.primal_optimal_point.clone().unwrap();
        let basis = trace.cumulative_basis();
        let mapped = xstar.compress(&basis);
        let reduced_value = trace.final_problem.objective().inner(&mapped);
        let original_value = inst.problem.objective().inner(&xstar);
        assert!((reduced_value - original_value).abs() < 1e-8);
        // The mapped optimal point stays feasible for the reduced problem.
        assert!(trace.final_problem.is_feasible(&mapped, 1e-8));
    }

    #[test]
    fn optimality_report_on_positive_gap() {
        let inst = pathologies::positive_gap();
        let x = inst.known.primal_optimal_point.clone().unwrap();
        let report = check_optimality(&inst.problem, &x, &[0.0, 0.0], 1e-9).unwrap();
        assert!(report.primal_feasible);
        assert!(report.dual_feasible);
        assert!((report.gap - 1.0).abs() < 1e-10);
    }

    #[test]
    fn weak_duality_gap_nonnegative_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..20 {
            let n = rng.random_range(2..5);
            let m = rng.random_range(1..4);
            let a_mats: Vec<SymMatrix> = (0..m)
                .map(|_| SymMatrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0)))
                .collect();
            // Build a feasible pair: X0 PSD, y0 with C - A*y0 PSD.
            let pmat = Mat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let x0 = SymMatrix::from_mat(&pmat.matmul(&pmat.transpose()));
            let y0: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut c = SymMatrix::identity(n).scale(3.0 * n as f64);
            let p0 = ConicProblem::feasibility(a_mats.clone(), vec![0.0; m], n).unwrap();
            c = c.add(&p0.adjoint_a(&y0).unwrap());
            let b = p0.apply_a(&x0).unwrap();
            let p = ConicProblem::new(a_mats, b, c).unwrap();
            let report = check_optimality(&p, &x0, &y0, 1e-8).unwrap();
            assert!(report.primal_feasible);
            assert!(
                report.dual_feasible,
                "slack min eig {}",
                report.dual_slack_min_eig
            );
            assert!(report.gap >= -1e-10);
        }
    }

    #[test]
    fn alternating_projections_fixed_point() {
        // Affine data pins a PSD matrix already in the face.
        let x0 = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 1.0]]);
        let face = FaceRep::full(2);
        let mut affine = Vec::new();
        for i in 0..2 {
            for j in i..2 {
                let basis = SymMatrix::sym_unit(2, i, j);
                affine.push((basis.clone(), basis.inner(&x0)));
            }
        }
        let sol = alternating_projection_solve(&face, &affine, 200, 1e-10)
            .unwrap()
            .unwrap();
        assert!(sol.sub(&x0).fro_norm() < 1e-8);
    }

    #[test]
    fn alternating_projections_contradiction_returns_none() {
        let face = FaceRep::full(2);
        let e11 = SymMatrix::sym_unit(2, 0, 0);
        let affine = vec![(e11.clone(), 1.0), (e11, 2.0)];
        assert!(alternating_projection_solve(&face, &affine, 100, 1e-9)
            .unwrap()
            .is_none());
    }

    #[test]
    fn holder_ratio_on_worst_case_n3() {
        // Log-distance ratio approaches 2^{-2} = 0.25 on the n=3 instance.
        let inst = pathologies::nested_sing_instance(3);
        for k in 4..=8 {
            let eps = 10f64.powi(-k);
            let x = pathologies::worst_case_point(3, eps);
            let d_affine = inst.problem.distance_to_affine(&x).unwrap();
            // Feasible set is the ray through e1 e1^T.
            let t = x.get(0, 0).max(0.0);
            let d_feas = {
                let mut diff = x.clone();
                diff.set(0, 0, x.get(0, 0) - t);
                diff.fro_norm()
            };
            let ratio = d_feas.ln() / d_affine.ln();
            assert!((ratio - 0.25).abs() <= 0.05, "eps={eps} ratio={ratio}");
        }
    }
}
