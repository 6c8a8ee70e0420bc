//! Monomial-basis elimination for sum-of-squares programs.
//!
//! The Gram-matrix SDP of an SOS problem has size driven by the monomial
//! set `M`. Facial reduction on the SOS cone eliminates monomials: a
//! linear functional from the polyhedral inner approximation
//! `Lambda = Sigma(M)^perp + cone{e_{2a} : a in M+}` that annihilates the
//! affine constraints certifies that the monomials with positive
//! multipliers can be deleted, and the face is again an SOS cone on the
//! smaller set. Each search is a tiny LP; iterating until infeasibility
//! reaches the same fixed point as maximizing per step.
//!
//! `Sigma(M)^perp` is realized as the span of monomials outside `M + M`
//! within the degree bound, since `span Sigma(M) = span{x^(b+c) : b,c in M}`.

use crate::lp::{solve_lp, LpOutcome, LpProblem, Sense};
use crate::numerics::{svec_index, Mat, SymMatrix};
use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};

/// Exponent multi-index.
pub type Monomial = Vec<u32>;

/// Sparse polynomial in `n_vars` variables; zero coefficients are never
/// stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    n_vars: usize,
    terms: BTreeMap<Monomial, f64>,
}

impl Poly {
    pub fn zero(n_vars: usize) -> Self {
        Poly {
            n_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(
        n_vars: usize,
        terms: impl IntoIterator<Item = (Monomial, f64)>,
    ) -> Result<Self> {
        let mut out = Poly::zero(n_vars);
        for (mono, coeff) in terms {
            if mono.len() != n_vars {
                return Err(Error::DimensionMismatch {
                    expected: n_vars,
                    got: mono.len(),
                });
            }
            if !coeff.is_finite() {
                return Err(Error::Invalid(
                    "polynomial coefficients must be finite".into(),
                ));
            }
            out.add_term(&mono, coeff);
        }
        Ok(out)
    }

    /// Univariate helper: `coeffs[k]` multiplies `x^k`.
    pub fn univariate(coeffs: &[f64]) -> Self {
        let mut out = Poly::zero(1);
        for (k, &c) in coeffs.iter().enumerate() {
            out.add_term(&[k as u32], c);
        }
        out
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, mono: &[u32]) -> f64 {
        self.terms.get(mono).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn support(&self) -> Vec<Monomial> {
        self.terms.keys().cloned().collect()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.iter().sum()).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, mono: &[u32], coeff: f64) {
        debug_assert_eq!(mono.len(), self.n_vars);
        let entry = self.terms.entry(mono.to_vec()).or_insert(0.0);
        *entry += coeff;
        if entry.abs() < 1e-300 {
            self.terms.remove(mono);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m, c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Poly {
        if s == 0.0 {
            return Poly::zero(self.n_vars);
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= s;
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.n_vars);
        for (ma, ca) in self.terms() {
            for (mb, cb) in other.terms() {
                let sum: Monomial = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                out.add_term(&sum, ca * cb);
            }
        }
        out
    }

    /// Coefficient-vector inner product with another polynomial.
    pub fn dot(&self, other: &Poly) -> f64 {
        self.terms().map(|(m, c)| c * other.coeff(m)).sum()
    }

    /// Largest absolute difference of coefficients.
    pub fn max_coeff_diff(&self, other: &Poly) -> f64 {
        let mut keys: BTreeSet<&Monomial> = self.terms.keys().collect();
        keys.extend(other.terms.keys());
        keys.into_iter()
            .map(|m| (self.coeff(m) - other.coeff(m)).abs())
            .fold(0.0, f64::max)
    }
}

/// A finite set of monomials with its maximal total degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialSet {
    n_vars: usize,
    set: BTreeSet<Monomial>,
}

impl MonomialSet {
    pub fn new(n_vars: usize, monomials: impl IntoIterator<Item = Monomial>) -> Result<Self> {
        let set: BTreeSet<Monomial> = monomials.into_iter().collect();
        if let Some(bad) = set.iter().find(|m| m.len() != n_vars) {
            return Err(Error::DimensionMismatch {
                expected: n_vars,
                got: bad.len(),
            });
        }
        Ok(MonomialSet { n_vars, set })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    pub fn contains(&self, m: &[u32]) -> bool {
        self.set.contains(m)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Monomial> {
        self.set.iter()
    }

    pub fn monomials(&self) -> Vec<Monomial> {
        self.set.iter().cloned().collect()
    }

    pub fn max_degree(&self) -> u32 {
        self.set.iter().map(|m| m.iter().sum()).max().unwrap_or(0)
    }

    pub fn remove_all(&self, drop: &[Monomial]) -> MonomialSet {
        let mut set = self.set.clone();
        for m in drop {
            set.remove(m);
        }
        MonomialSet {
            n_vars: self.n_vars,
            set,
        }
    }
}

// ---------------------------------------------------------------------------
// Convex hull membership by LP
// ---------------------------------------------------------------------------

/// Whether `point` lies in the convex hull of `gens` (LP feasibility).
fn in_convex_hull(point: &[f64], gens: &[Monomial]) -> bool {
    if gens.is_empty() {
        return false;
    }
    let k = gens.len();
    let dim = point.len();
    let mut lp = LpProblem {
        sense: Sense::Minimize,
        objective: vec![0.0; k],
        a_eq: Vec::new(),
        b_eq: Vec::new(),
        a_le: Vec::new(),
        b_le: Vec::new(),
        lower_bounds: vec![Some(0.0); k],
    };
    for d in 0..dim {
        lp.push_eq(gens.iter().map(|g| g[d] as f64).collect(), point[d]);
    }
    lp.push_eq(vec![1.0; k], 1.0);
    matches!(solve_lp(&lp), Ok(LpOutcome::Optimal { .. }))
}

/// All monomials in `n_vars` variables with total degree at most `d`.
pub fn monomials_up_to_degree(n_vars: usize, d: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut current = vec![0u32; n_vars];
    fn rec(idx: usize, remaining: u32, current: &mut Monomial, out: &mut Vec<Monomial>) {
        if idx == current.len() {
            out.push(current.clone());
            return;
        }
        for e in 0..=remaining {
            current[idx] = e;
            rec(idx + 1, remaining - e, current, out);
        }
        current[idx] = 0;
    }
    rec(0, d, &mut current, &mut out);
    out.sort();
    out
}

// ---------------------------------------------------------------------------
// Support initialization and midpoint structure
// ---------------------------------------------------------------------------

/// Newton-polytope half-support `{a : 2a in conv(support(f))}`: contains
/// every monomial any SOS representation of `f` can use.
pub fn initial_support(f: &Poly) -> Result<MonomialSet> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    half_support(&f.support(), f.n_vars)
}

fn half_support(support: &[Monomial], n_vars: usize) -> Result<MonomialSet> {
    let lo: Vec<u32> = (0..n_vars)
        .map(|d| support.iter().map(|m| m[d]).min().unwrap_or(0))
        .collect();
    let hi: Vec<u32> = (0..n_vars)
        .map(|d| support.iter().map(|m| m[d]).max().unwrap_or(0))
        .collect();
    // 2a must land in the coordinate box of the support.
    let lo_half: Vec<u32> = lo.iter().map(|&v| v.div_ceil(2)).collect();
    let hi_half: Vec<u32> = hi.iter().map(|&v| v / 2).collect();
    let mut out = Vec::new();
    let mut current = lo_half.clone();
    loop {
        let doubled: Vec<f64> = current.iter().map(|&v| 2.0 * v as f64).collect();
        if in_convex_hull(&doubled, support) {
            out.push(current.clone());
        }
        // Advance the box counter.
        let mut d = 0;
        loop {
            if d == n_vars {
                return MonomialSet::new(n_vars, out);
            }
            if current[d] < hi_half[d] {
                current[d] += 1;
                break;
            }
            current[d] = lo_half[d];
            d += 1;
        }
    }
}

/// `M+`: the monomials of `M` that are not midpoints of distinct members.
pub fn m_plus(m: &MonomialSet) -> MonomialSet {
    let items = m.monomials();
    let keep = items
        .iter()
        .filter(|alpha| {
            let doubled: Monomial = alpha.iter().map(|&v| 2 * v).collect();
            !items.iter().any(|beta| {
                if beta == *alpha {
                    return false;
                }
                // gamma = 2 alpha - beta must be a distinct member of M.
                let gamma: Option<Monomial> = doubled
                    .iter()
                    .zip(beta)
                    .map(|(&d, &b)| d.checked_sub(b))
                    .collect();
                match gamma {
                    Some(g) => g != **alpha && m.contains(&g),
                    None => false,
                }
            })
        })
        .cloned()
        .collect::<Vec<_>>();
    MonomialSet::new(m.n_vars, keep).expect("dimensions preserved")
}

/// Type I face test: `conv(M)` contains no lattice points outside `M`.
pub fn is_type1(m: &MonomialSet) -> bool {
    let items = m.monomials();
    if items.is_empty() {
        return true;
    }
    let n_vars = m.n_vars;
    let lo: Vec<u32> = (0..n_vars)
        .map(|d| items.iter().map(|x| x[d]).min().unwrap())
        .collect();
    let hi: Vec<u32> = (0..n_vars)
        .map(|d| items.iter().map(|x| x[d]).max().unwrap())
        .collect();
    let mut current = lo.clone();
    loop {
        let point: Vec<f64> = current.iter().map(|&v| v as f64).collect();
        if in_convex_hull(&point, &items) && !m.contains(&current) {
            return false;
        }
        let mut d = 0;
        loop {
            if d == n_vars {
                return true;
            }
            if current[d] < hi[d] {
                current[d] += 1;
                break;
            }
            current[d] = lo[d];
            d += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Elimination
// ---------------------------------------------------------------------------

/// One certificate found by the elimination LP.
#[derive(Clone, Debug)]
pub struct EliminationStep {
    /// The functional from the inner approximation, as a polynomial
    /// coefficient vector.
    pub certificate: Poly,
    /// Monomials whose multipliers were strictly positive; they are
    /// removed from `M`.
    pub removed: Vec<Monomial>,
}

/// Searches the polyhedral inner approximation for a functional orthogonal
/// to all constraint polynomials. `Some` yields a nonempty removable set;
/// `None` means this LP relaxation found no certificate.
pub fn elimination_step(
    m: &MonomialSet,
    g0: &Poly,
    gs: &[Poly],
) -> Result<Option<EliminationStep>> {
    if m.is_empty() {
        return Ok(None);
    }
    let n_vars = m.n_vars;
    let d2 = 2 * m.max_degree();
    let plus = m_plus(m);
    let plus_items = plus.monomials();
    if plus_items.is_empty() {
        return Ok(None);
    }
    // Span of Sigma(M)^perp: monomials up to degree 2d outside M + M.
    let mm: BTreeSet<Monomial> = m
        .iter()
        .flat_map(|a| {
            m.iter()
                .map(move |b| a.iter().zip(b).map(|(x, y)| x + y).collect())
        })
        .collect();
    let free: Vec<Monomial> = monomials_up_to_degree(n_vars, d2)
        .into_iter()
        .filter(|g| !mm.contains(g))
        .collect();

    let nf = free.len();
    let nl = plus_items.len();
    let mut lp = LpProblem {
        sense: Sense::Minimize,
        objective: vec![0.0; nf + nl],
        a_eq: Vec::new(),
        b_eq: Vec::new(),
        a_le: Vec::new(),
        b_le: Vec::new(),
        lower_bounds: (0..nf + nl)
            .map(|i| if i < nf { None } else { Some(0.0) })
            .collect(),
    };
    // Orthogonality to g0 and every g_i.
    for g in std::iter::once(g0).chain(gs) {
        let mut row = vec![0.0; nf + nl];
        for (t, gamma) in free.iter().enumerate() {
            row[t] = g.coeff(gamma);
        }
        for (t, alpha) in plus_items.iter().enumerate() {
            let doubled: Monomial = alpha.iter().map(|&v| 2 * v).collect();
            row[nf + t] = g.coeff(&doubled);
        }
        lp.push_eq(row, 0.0);
    }
    // Normalization keeps the LP bounded and the certificate nonzero.
    let mut norm_row = vec![0.0; nf + nl];
    for slot in norm_row.iter_mut().skip(nf) {
        *slot = 1.0;
    }
    lp.push_eq(norm_row, 1.0);

    match solve_lp(&lp)? {
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(Error::IterationLimit),
        LpOutcome::Optimal { x, .. } => {
            let mut certificate = Poly::zero(n_vars);
            for (t, gamma) in free.iter().enumerate() {
                certificate.add_term(gamma, x[t]);
            }
            let mut removed = Vec::new();
            for (t, alpha) in plus_items.iter().enumerate() {
                let lam = x[nf + t];
                if lam > 1e-9 {
                    removed.push(alpha.clone());
                }
                let doubled: Monomial = alpha.iter().map(|&v| 2 * v).collect();
                certificate.add_term(&doubled, lam);
            }
            debug_assert!(
                !removed.is_empty(),
                "normalization forces a positive multiplier"
            );
            Ok(Some(EliminationStep {
                certificate,
                removed,
            }))
        }
    }
}

/// Iterates [`elimination_step`] until no certificate is found, starting
/// from the half-support of the combined constraint supports. Each step
/// removes at least one monomial, so the loop terminates.
pub fn eliminate(
    g0: &Poly,
    gs: &[Poly],
    max_iters: usize,
) -> Result<(MonomialSet, Vec<EliminationStep>)> {
    let mut support = g0.support();
    for g in gs {
        support.extend(g.support());
    }
    if support.is_empty() {
        return Err(Error::ZeroPolynomial);
    }
    let mut m = half_support(&support, g0.n_vars())?;
    let mut log = Vec::new();
    for _ in 0..max_iters {
        match elimination_step(&m, g0, gs)? {
            Some(step) => {
                m = m.remove_all(&step.removed);
                log.push(step);
            }
            None => break,
        }
    }
    Ok((m, log))
}

// ---------------------------------------------------------------------------
// Gram systems
// ---------------------------------------------------------------------------

/// The linear system matching `f = [x]_M^T Q [x]_M` coefficientwise, over
/// the upper-triangle entries of `Q` in svec order.
#[derive(Clone, Debug)]
pub struct GramSystem {
    /// The monomial basis indexing `Q`, sorted.
    pub basis: Vec<Monomial>,
    /// One row per matched monomial `gamma`.
    pub row_monomials: Vec<Monomial>,
    /// Coefficient matrix over the `k(k+1)/2` upper-triangle unknowns.
    pub rows: Mat,
    /// Target coefficients `f_gamma`.
    pub rhs: Vec<f64>,
}

/// Builds the Gram matching system for `f` on the basis `M`.
pub fn gram_system(f: &Poly, m: &MonomialSet) -> GramSystem {
    let basis = m.monomials();
    let k = basis.len();
    // Rows: every monomial of M+M plus any stray support of f.
    let mut gammas: BTreeSet<Monomial> = BTreeSet::new();
    for (a, alpha) in basis.iter().enumerate() {
        for beta in basis.iter().skip(a) {
            gammas.insert(alpha.iter().zip(beta).map(|(x, y)| x + y).collect());
        }
    }
    for (mono, _) in f.terms() {
        gammas.insert(mono.clone());
    }
    let row_monomials: Vec<Monomial> = gammas.into_iter().collect();
    let mut rows = Mat::zeros(row_monomials.len(), k * (k + 1) / 2);
    let mut rhs = vec![0.0; row_monomials.len()];
    let gamma_index: BTreeMap<&Monomial, usize> = row_monomials
        .iter()
        .enumerate()
        .map(|(i, g)| (g, i))
        .collect();
    for (a, alpha) in basis.iter().enumerate() {
        for (b, beta) in basis.iter().enumerate().skip(a) {
            let gamma: Monomial = alpha.iter().zip(beta).map(|(x, y)| x + y).collect();
            let row = gamma_index[&gamma];
            let col = svec_index(a, b);
            rows[(row, col)] += if a == b { 1.0 } else { 2.0 };
        }
    }
    for (i, gamma) in row_monomials.iter().enumerate() {
        rhs[i] = f.coeff(gamma);
    }
    GramSystem {
        basis,
        row_monomials,
        rows,
        rhs,
    }
}

/// The Gram system as a conic feasibility problem for an external SDP
/// solver: find `Q >= 0` with `<A_gamma, Q> = f_gamma`, where `A_gamma`
/// marks the basis pairs summing to `gamma`.
pub fn gram_sdp_problem(f: &Poly, m: &MonomialSet) -> Result<crate::conic::ConicProblem> {
    let sys = gram_system(f, m);
    let k = sys.basis.len();
    let mut a_mats = Vec::with_capacity(sys.row_monomials.len());
    for gamma in &sys.row_monomials {
        let mut a = SymMatrix::zeros(k);
        for (x, alpha) in sys.basis.iter().enumerate() {
            for (y, beta) in sys.basis.iter().enumerate().skip(x) {
                let s: Monomial = alpha.iter().zip(beta).map(|(p, q)| p + q).collect();
                if &s == gamma {
                    a.set(x, y, 1.0);
                }
            }
        }
        a_mats.push(a);
    }
    crate::conic::ConicProblem::new(a_mats, sys.rhs.clone(), SymMatrix::zeros(k))
}

/// Verifies a Gram matrix: `[x]_M^T Q [x]_M` matches `f` coefficientwise to
/// `tol` and `Q` is PSD to `tol`.
pub fn verify_gram(f: &Poly, m: &MonomialSet, q: &SymMatrix, tol: f64) -> bool {
    let basis = m.monomials();
    if q.order() != basis.len() {
        return false;
    }
    let mut expanded = Poly::zero(m.n_vars);
    for (a, alpha) in basis.iter().enumerate() {
        for (b, beta) in basis.iter().enumerate() {
            let gamma: Monomial = alpha.iter().zip(beta).map(|(x, y)| x + y).collect();
            expanded.add_term(&gamma, q.get(a, b));
        }
    }
    let scale = 1.0 + f.terms().map(|(_, c)| c.abs()).fold(0.0, f64::max);
    if expanded.max_coeff_diff(f) > tol * scale {
        return false;
    }
    q.min_eig() >= -tol * q.fro_norm().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn mono1(k: u32) -> Monomial {
        vec![k]
    }

    #[test]
    fn initial_support_examples() {
        // x^4 + x^2: half of conv{2,4} is {1, 2}.
        let f = Poly::univariate(&[0.0, 0.0, 1.0, 0.0, 1.0]);
        let m = initial_support(&f).unwrap();
        assert_eq!(m.monomials(), vec![mono1(1), mono1(2)]);

        // (x + y)^2.
        let f =
            Poly::from_terms(2, [(vec![2, 0], 1.0), (vec![1, 1], 2.0), (vec![0, 2], 1.0)]).unwrap();
        let m = initial_support(&f).unwrap();
        assert_eq!(m.monomials(), vec![vec![0, 1], vec![1, 0]]);

        // Constant polynomial.
        let f = Poly::univariate(&[1.0]);
        let m = initial_support(&f).unwrap();
        assert_eq!(m.monomials(), vec![mono1(0)]);

        assert!(matches!(
            initial_support(&Poly::zero(1)),
            Err(Error::ZeroPolynomial)
        ));
    }

    #[test]
    fn m_plus_examples() {
        let m = MonomialSet::new(1, [mono1(0), mono1(1), mono1(2)]).unwrap();
        assert_eq!(m_plus(&m).monomials(), vec![mono1(0), mono1(2)]);

        let single = MonomialSet::new(1, [mono1(0)]).unwrap();
        assert_eq!(m_plus(&single).monomials(), vec![mono1(0)]);

        let cross = MonomialSet::new(2, [vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(m_plus(&cross).len(), 2);

        // Idempotence.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let monos: Vec<Monomial> = (0..rng.random_range(1..8))
                .map(|_| vec![rng.random_range(0..5u32), rng.random_range(0..5u32)])
                .collect();
            let m = MonomialSet::new(2, monos).unwrap();
            let once = m_plus(&m);
            assert_eq!(m_plus(&once), once);
        }
    }

    #[test]
    fn is_type1_examples() {
        let m = MonomialSet::new(1, [mono1(0), mono1(1), mono1(2)]).unwrap();
        assert!(is_type1(&m));
        let gap = MonomialSet::new(1, [mono1(0), mono1(2)]).unwrap();
        assert!(!is_type1(&gap));
        let single = MonomialSet::new(1, [mono1(7)]).unwrap();
        assert!(is_type1(&single));
    }

    #[test]
    fn elimination_step_examples() {
        // f = x^4 + x^2 on M = {0, 1, 2}: lambda_0 = 1 works, removing 0.
        let f = Poly::univariate(&[0.0, 0.0, 1.0, 0.0, 1.0]);
        let m = MonomialSet::new(1, [mono1(0), mono1(1), mono1(2)]).unwrap();
        let step = elimination_step(&m, &f, &[])
            .unwrap()
            .expect("certificate exists");
        assert_eq!(step.removed, vec![mono1(0)]);
        assert!(step.certificate.dot(&f).abs() < 1e-9);

        // f = x^4 + 1: the LP is infeasible.
        let f = Poly::univariate(&[1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(elimination_step(&m, &f, &[]).unwrap().is_none());

        // Zero constraints: anything in M+ can go.
        let step = elimination_step(&m, &Poly::zero(1), &[])
            .unwrap()
            .expect("unconstrained");
        assert!(!step.removed.is_empty());
    }

    #[test]
    fn eliminate_examples() {
        let f = Poly::univariate(&[0.0, 0.0, 1.0, 0.0, 1.0]);
        let (m, log) = eliminate(&f, &[], 50).unwrap();
        assert_eq!(m.monomials(), vec![mono1(1), mono1(2)]);
        assert!(log.is_empty(), "half-support already starts at {{1, 2}}");

        let f = Poly::univariate(&[1.0, 0.0, 0.0, 0.0, 1.0]);
        let (m, log) = eliminate(&f, &[], 50).unwrap();
        assert_eq!(m.monomials(), vec![mono1(0), mono1(1), mono1(2)]);
        assert!(log.is_empty());

        let f =
            Poly::from_terms(2, [(vec![2, 0], 1.0), (vec![1, 1], 2.0), (vec![0, 2], 1.0)]).unwrap();
        let (m, _) = eliminate(&f, &[], 50).unwrap();
        assert_eq!(m.monomials(), vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn eliminate_removes_through_supplied_sets() {
        // Force the elimination loop to act: f = x^4 + x^2 but viewed with
        // a padded initial set via g_0 carrying a vanished constant term.
        let f = Poly::univariate(&[0.0, 0.0, 1.0, 0.0, 1.0]);
        let m = MonomialSet::new(1, [mono1(0), mono1(1), mono1(2)]).unwrap();
        let mut current = m;
        let mut rounds = 0;
        while let Some(step) = elimination_step(&current, &f, &[]).unwrap() {
            current = current.remove_all(&step.removed);
            rounds += 1;
            assert!(rounds < 10);
        }
        assert_eq!(current.monomials(), vec![mono1(1), mono1(2)]);
    }

    #[test]
    fn gram_verify_examples() {
        // (x + y)^2 with the all-ones Gram matrix.
        let f =
            Poly::from_terms(2, [(vec![2, 0], 1.0), (vec![1, 1], 2.0), (vec![0, 2], 1.0)]).unwrap();
        let m = MonomialSet::new(2, [vec![0, 1], vec![1, 0]]).unwrap();
        let ones = SymMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(verify_gram(&f, &m, &ones, 1e-10));

        // x^2 + y^2 with the identity.
        let g = Poly::from_terms(2, [(vec![2, 0], 1.0), (vec![0, 2], 1.0)]).unwrap();
        assert!(verify_gram(&g, &m, &SymMatrix::identity(2), 1e-10));

        // Indefinite Gram candidates fail.
        let bad = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(!verify_gram(&f, &m, &bad, 1e-10));
        // Coefficients match but the matrix is indefinite.
        let h =
            Poly::from_terms(2, [(vec![2, 0], 1.0), (vec![1, 1], 4.0), (vec![0, 2], 1.0)]).unwrap();
        assert!(!verify_gram(&h, &m, &bad, 1e-10));
    }

    #[test]
    fn gram_system_solves_consistently() {
        let f =
            Poly::from_terms(2, [(vec![2, 0], 1.0), (vec![1, 1], 2.0), (vec![0, 2], 1.0)]).unwrap();
        let m = MonomialSet::new(2, [vec![0, 1], vec![1, 0]]).unwrap();
        let sys = gram_system(&f, &m);
        let q = crate::numerics::solve_least_squares(&sys.rows, &sys.rhs);
        // Reconstruct Q from svec coordinates and verify.
        let mut qm = SymMatrix::zeros(2);
        qm.set(0, 0, q[0]);
        qm.set(0, 1, q[1]);
        qm.set(1, 1, q[2]);
        assert!(verify_gram(&f, &m, &qm, 1e-8));
    }

    /// Random SOS polynomial over a random base set, with its Gram matrix.
    fn crafted_sos(rng: &mut ChaCha8Rng) -> (Poly, Vec<Monomial>, SymMatrix) {
        let n_vars = rng.random_range(1..=2);
        let degree = rng.random_range(1..=3u32);
        let pool = monomials_up_to_degree(n_vars, degree);
        let size = rng.random_range(1..=pool.len().min(4));
        let mut base: Vec<Monomial> = Vec::new();
        let mut perm: Vec<usize> = (0..pool.len()).collect();
        for k in (1..perm.len()).rev() {
            let s = rng.random_range(0..=k);
            perm.swap(k, s);
        }
        for &idx in perm.iter().take(size) {
            base.push(pool[idx].clone());
        }
        base.sort();
        let squares = rng.random_range(1..=3);
        let mut gram = SymMatrix::zeros(base.len());
        let mut f = Poly::zero(n_vars);
        for _ in 0..squares {
            let coeffs: Vec<f64> = (0..base.len())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let mut p = Poly::zero(n_vars);
            for (mono, &c) in base.iter().zip(&coeffs) {
                p.add_term(mono, c);
            }
            f = f.add(&p.mul(&p));
            gram = gram.add(&SymMatrix::outer(&coeffs));
        }
        (f, base, gram)
    }

    #[test]
    fn elimination_soundness_on_crafted_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..20 {
            let (f, base, gram) = crafted_sos(&mut rng);
            let (final_m, _) = eliminate(&f, &[], 50).unwrap();
            // The generating basis survives elimination.
            for mono in &base {
                assert!(final_m.contains(mono), "trial {trial}: lost {mono:?}");
            }
            // The stored Gram, padded onto the final basis, still verifies.
            let finals = final_m.monomials();
            let mut padded = SymMatrix::zeros(finals.len());
            for (a, ma) in base.iter().enumerate() {
                let pa = finals.iter().position(|x| x == ma).unwrap();
                for (b, mb) in base.iter().enumerate() {
                    let pb = finals.iter().position(|x| x == mb).unwrap();
                    padded.set(pa, pb, gram.get(a, b));
                }
            }
            assert!(verify_gram(&f, &final_m, &padded, 1e-8), "trial {trial}");
        }
    }

    #[test]
    fn certificates_annihilate_feasible_combinations() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 100 {
            let (g0, _, _) = crafted_sos(&mut rng);
            // Constraint polynomials are squares: any nonnegative
            // combination stays SOS-representable.
            let (sq, _, _) = crafted_sos(&mut rng);
            if sq.n_vars() != g0.n_vars() {
                continue;
            }
            let gs = vec![sq];
            let mut support = g0.support();
            support.extend(gs[0].support());
            let m = half_support(&support, g0.n_vars()).unwrap();
            if let Some(step) = elimination_step(&m, &g0, &gs).unwrap() {
                let u = rng.random_range(0.0..2.0);
                let f = g0.add(&gs[0].scale(u));
                assert!(step.certificate.dot(&f).abs() <= 1e-8);
                checked += 1;
            } else {
                checked += 1;
            }
        }
    }
}
