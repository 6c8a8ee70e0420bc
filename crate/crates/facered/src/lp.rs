//! Small dense LP kernel: two-phase primal simplex with Bland's rule.
//!
//! Every LP in this crate is tiny (at most a few hundred variables), so the
//! solver favors determinism and guaranteed termination over speed: Bland's
//! rule is used for every pivot and there is no presolve.

use crate::{Error, Result};

/// Optimization sense.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Dense LP with equality rows, `<=` rows, and per-variable lower bounds
/// (`None` means the variable is free).
#[derive(Clone, Debug)]
pub struct LpProblem {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub a_le: Vec<Vec<f64>>,
    pub b_le: Vec<f64>,
    pub lower_bounds: Vec<Option<f64>>,
}

impl LpProblem {
    /// Minimization problem with all variables bounded below by zero.
    pub fn minimize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LpProblem {
            sense: Sense::Minimize,
            objective,
            a_eq: Vec::new(),
            b_eq: Vec::new(),
            a_le: Vec::new(),
            b_le: Vec::new(),
            lower_bounds: vec![Some(0.0); n],
        }
    }

    /// Maximization problem with all variables bounded below by zero.
    pub fn maximize(objective: Vec<f64>) -> Self {
        let mut p = LpProblem::minimize(objective);
        p.sense = Sense::Maximize;
        p
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn push_eq(&mut self, row: Vec<f64>, rhs: f64) {
        assert_eq!(row.len(), self.num_vars());
        self.a_eq.push(row);
        self.b_eq.push(rhs);
    }

    pub fn push_le(&mut self, row: Vec<f64>, rhs: f64) {
        assert_eq!(row.len(), self.num_vars());
        self.a_le.push(row);
        self.b_le.push(rhs);
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower_bounds.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.lower_bounds.len(),
            });
        }
        if self.a_eq.len() != self.b_eq.len() {
            return Err(Error::DimensionMismatch {
                expected: self.a_eq.len(),
                got: self.b_eq.len(),
            });
        }
        if self.a_le.len() != self.b_le.len() {
            return Err(Error::DimensionMismatch {
                expected: self.a_le.len(),
                got: self.b_le.len(),
            });
        }
        for row in self.a_eq.iter().chain(&self.a_le) {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
        }
        let finite = self
            .objective
            .iter()
            .chain(self.b_eq.iter())
            .chain(self.b_le.iter())
            .chain(self.a_eq.iter().flatten())
            .chain(self.a_le.iter().flatten())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Invalid("LP data must be finite".into()));
        }
        Ok(())
    }
}

/// Solver outcome.
#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-8;
const MAX_PIVOTS: usize = 50_000;

/// Solves a dense LP.
pub fn solve_lp(p: &LpProblem) -> Result<LpOutcome> {
    p.validate()?;
    let n = p.num_vars();

    // Standard-form conversion. Shifted variables x = x' + l for finite
    // lower bounds; free variables split as u - v.
    // col_map[j] = (positive column, optional negative column, shift)
    let mut col_map = Vec::with_capacity(n);
    let mut ncols = 0usize;
    for lb in &p.lower_bounds {
        match lb {
            Some(l) => {
                col_map.push((ncols, None, *l));
                ncols += 1;
            }
            None => {
                col_map.push((ncols, Some(ncols + 1), 0.0));
                ncols += 2;
            }
        }
    }

    // Minimization costs in standard variables.
    let sign = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut cost = vec![0.0; ncols];
    for (j, &(cp, cn, _)) in col_map.iter().enumerate() {
        cost[cp] += sign * p.objective[j];
        if let Some(cn) = cn {
            cost[cn] -= sign * p.objective[j];
        }
    }

    // Assemble equality rows; `<=` rows get a slack column each.
    let num_slack = p.a_le.len();
    let total = ncols + num_slack;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut push_row = |row_in: &[f64], b: f64, slack: Option<usize>| {
        let mut row = vec![0.0; total];
        let mut bb = b;
        for (j, &(cp, cn, shift)) in col_map.iter().enumerate() {
            row[cp] += row_in[j];
            if let Some(cn) = cn {
                row[cn] -= row_in[j];
            }
            bb -= row_in[j] * shift;
        }
        if let Some(s) = slack {
            row[ncols + s] = 1.0;
        }
        rows.push(row);
        rhs.push(bb);
    };
    for (row, &b) in p.a_eq.iter().zip(&p.b_eq) {
        push_row(row, b, None);
    }
    for (k, (row, &b)) in p.a_le.iter().zip(&p.b_le).enumerate() {
        push_row(row, b, Some(k));
    }

    // Make all right-hand sides nonnegative.
    for (row, b) in rows.iter_mut().zip(rhs.iter_mut()) {
        if *b < 0.0 {
            for v in row.iter_mut() {
                *v = -*v;
            }
            *b = -*b;
        }
    }

    cost.resize(total, 0.0);
    let m = rows.len();
    match simplex_two_phase(rows, rhs, cost, total)? {
        SimplexOutcome::Infeasible => Ok(LpOutcome::Infeasible),
        SimplexOutcome::Unbounded => Ok(LpOutcome::Unbounded),
        SimplexOutcome::Optimal(xs) => {
            let _ = m;
            let mut x = vec![0.0; n];
            for (j, &(cp, cn, shift)) in col_map.iter().enumerate() {
                x[j] = xs[cp] + shift;
                if let Some(cn) = cn {
                    x[j] -= xs[cn];
                }
            }
            let value: f64 = x.iter().zip(&p.objective).map(|(a, b)| a * b).sum();
            Ok(LpOutcome::Optimal { x, value })
        }
    }
}

enum SimplexOutcome {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
}

/// Two-phase simplex on `rows * x = rhs, x >= 0` with `rhs >= 0`.
fn simplex_two_phase(
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    ncols: usize,
) -> Result<SimplexOutcome> {
    let m = rows.len();
    if m == 0 {
        // No constraints: optimum is zero unless some cost is negative.
        if cost.iter().any(|&c| c < -PIVOT_TOL) {
            return Ok(SimplexOutcome::Unbounded);
        }
        return Ok(SimplexOutcome::Optimal(vec![0.0; ncols]));
    }

    // Tableau with one artificial column per row.
    let width = ncols + m + 1;
    let mut t = vec![vec![0.0; width]; m];
    for i in 0..m {
        t[i][..ncols].copy_from_slice(&rows[i]);
        t[i][ncols + i] = 1.0;
        t[i][width - 1] = rhs[i];
    }
    let mut basis: Vec<usize> = (0..m).map(|i| ncols + i).collect();

    // Phase 1: minimize the sum of artificials. Reduced costs relative to
    // the artificial basis.
    let mut z = vec![0.0; width];
    for j in 0..ncols {
        z[j] = -(0..m).map(|i| t[i][j]).sum::<f64>();
    }
    z[width - 1] = -(0..m).map(|i| t[i][width - 1]).sum::<f64>();
    pivot_loop(&mut t, &mut z, &mut basis, ncols, None)?;
    let phase1 = -z[width - 1];
    if phase1 > FEAS_TOL {
        return Ok(SimplexOutcome::Infeasible);
    }

    // Drive remaining artificials out of the basis where possible.
    for i in 0..m {
        if basis[i] >= ncols {
            if let Some(j) = (0..ncols).find(|&j| t[i][j].abs() > PIVOT_TOL) {
                pivot(&mut t, &mut z, i, j);
                basis[i] = j;
            }
        }
    }

    // Phase 2 reduced costs for the real objective.
    let mut z2 = vec![0.0; width];
    z2[..ncols].copy_from_slice(&cost[..ncols]);
    for i in 0..m {
        let cb = if basis[i] < ncols {
            cost[basis[i]]
        } else {
            0.0
        };
        if cb != 0.0 {
            for j in 0..width {
                z2[j] -= cb * t[i][j];
            }
        }
    }
    // Basic columns must read exactly zero in the cost row.
    for &b in &basis {
        z2[b] = 0.0;
    }
    match pivot_loop(&mut t, &mut z2, &mut basis, ncols, Some(()))? {
        LoopEnd::Optimal => {}
        LoopEnd::Unbounded => return Ok(SimplexOutcome::Unbounded),
    }

    let mut x = vec![0.0; ncols];
    for i in 0..m {
        if basis[i] < ncols {
            x[basis[i]] = t[i][width - 1];
        }
    }
    Ok(SimplexOutcome::Optimal(x))
}

enum LoopEnd {
    Optimal,
    Unbounded,
}

/// Bland-rule pivoting until no negative reduced cost remains. In phase 1
/// (`phase2 == None`) unboundedness cannot occur.
fn pivot_loop(
    t: &mut [Vec<f64>],
    z: &mut [f64],
    basis: &mut [usize],
    ncols: usize,
    phase2: Option<()>,
) -> Result<LoopEnd> {
    let m = t.len();
    let width = z.len();
    for _ in 0..MAX_PIVOTS {
        // Bland: entering column is the smallest index with negative
        // reduced cost. Artificial columns never re-enter in phase 2.
        let limit = if phase2.is_some() { ncols } else { width - 1 };
        let entering = (0..limit).find(|&j| z[j] < -PIVOT_TOL);
        let Some(j) = entering else {
            return Ok(LoopEnd::Optimal);
        };
        // Ratio test; Bland tie-break on the smallest basis variable index.
        let mut best: Option<(f64, usize, usize)> = None; // (ratio, basis var, row)
        for i in 0..m {
            if t[i][j] > PIVOT_TOL {
                let ratio = t[i][width - 1] / t[i][j];
                let key = (ratio, basis[i]);
                match best {
                    None => best = Some((key.0, key.1, i)),
                    Some((r, bv, _)) => {
                        if ratio < r - 1e-12 || (ratio < r + 1e-12 && basis[i] < bv) {
                            best = Some((ratio, basis[i], i));
                        }
                    }
                }
            }
        }
        let Some((_, _, row)) = best else {
            return Ok(LoopEnd::Unbounded);
        };
        pivot(t, z, row, j);
        basis[row] = j;
    }
    Err(Error::IterationLimit)
}

fn pivot(t: &mut [Vec<f64>], z: &mut [f64], row: usize, col: usize) {
    let width = z.len();
    let piv = t[row][col];
    for v in t[row].iter_mut() {
        *v /= piv;
    }
    for i in 0..t.len() {
        if i != row && t[i][col].abs() > 0.0 {
            let factor = t[i][col];
            for j in 0..width {
                t[i][j] -= factor * t[row][j];
            }
            t[i][col] = 0.0;
        }
    }
    if z[col].abs() > 0.0 {
        let factor = z[col];
        for j in 0..width {
            z[j] -= factor * t[row][j];
        }
        z[col] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixed_point_feasibility() {
        // max 0 s.t. x = 1, x >= 0
        let mut p = LpProblem::maximize(vec![0.0]);
        p.push_eq(vec![1.0], 1.0);
        match solve_lp(&p).unwrap() {
            LpOutcome::Optimal { x, .. } => assert!((x[0] - 1.0).abs() < 1e-9),
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn unbounded_ray() {
        // max x s.t. x >= 0
        let p = LpProblem::maximize(vec![1.0]);
        assert_eq!(solve_lp(&p).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn simplex_vertex_value() {
        // min x1 + x2 s.t. x1 + x2 = 1, x >= 0  -> value 1
        let mut p = LpProblem::minimize(vec![1.0, 1.0]);
        p.push_eq(vec![1.0, 1.0], 1.0);
        match solve_lp(&p).unwrap() {
            LpOutcome::Optimal { value, .. } => assert!((value - 1.0).abs() < 1e-9),
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn infeasible_system() {
        let mut p = LpProblem::minimize(vec![0.0]);
        p.push_eq(vec![1.0], 1.0);
        p.push_eq(vec![1.0], 2.0);
        assert_eq!(solve_lp(&p).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn free_variables_and_le_rows() {
        // min y s.t. y >= |t|: y free? keep y >= 0, t free.
        // min y s.t. t - y <= 0, -t - y <= 0, t = 3.
        let mut p = LpProblem {
            sense: Sense::Minimize,
            objective: vec![0.0, 1.0],
            a_eq: vec![vec![1.0, 0.0]],
            b_eq: vec![3.0],
            a_le: vec![vec![1.0, -1.0], vec![-1.0, -1.0]],
            b_le: vec![0.0, 0.0],
            lower_bounds: vec![None, Some(0.0)],
        };
        match solve_lp(&p).unwrap() {
            LpOutcome::Optimal { x, value } => {
                assert!((x[0] - 3.0).abs() < 1e-8);
                assert!((value - 3.0).abs() < 1e-8);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
        // Same with the equality flipped negative.
        p.b_eq[0] = -2.0;
        match solve_lp(&p).unwrap() {
            LpOutcome::Optimal { value, .. } => assert!((value - 2.0).abs() < 1e-8),
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    /// Brute-force oracle: minimum of `c^T x` over `{Ax=b, x>=0}` by
    /// scanning candidate basic solutions.
    fn vertex_enumerate_min(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<f64> {
        use crate::numerics::{solve_least_squares, Mat};
        let m = a.len();
        let n = c.len();
        let mut best: Option<f64> = None;
        let idx: Vec<usize> = (0..n).collect();
        let mut choose = vec![];
        fn rec(
            idx: &[usize],
            k: usize,
            start: usize,
            choose: &mut Vec<usize>,
            f: &mut dyn FnMut(&[usize]),
        ) {
            if choose.len() == k {
                f(choose);
                return;
            }
            for i in start..idx.len() {
                choose.push(idx[i]);
                rec(idx, k, i + 1, choose, f);
                choose.pop();
            }
        }
        let mut visit = |cols: &[usize]| {
            let bm = Mat::from_fn(m, cols.len(), |i, j| a[i][cols[j]]);
            let xb = solve_least_squares(&bm, b);
            let fit = bm.apply(&xb);
            if fit.iter().zip(b).any(|(u, v)| (u - v).abs() > 1e-8) {
                return;
            }
            if xb.iter().any(|&v| v < -1e-8) {
                return;
            }
            let mut x = vec![0.0; cols.len()];
            x.copy_from_slice(&xb);
            let val: f64 = cols.iter().zip(&x).map(|(&j, &v)| c[j] * v).sum();
            best = Some(best.map_or(val, |b: f64| b.min(val)));
        };
        rec(&idx, m.min(n), 0, &mut choose, &mut visit);
        best
    }

    #[test]
    fn strong_duality_and_vertex_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for trial in 0..40 {
            let n = rng.random_range(2..=6);
            let m = rng.random_range(1..n);
            let a: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let x0: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
            let b: Vec<f64> = (0..m)
                .map(|i| (0..n).map(|j| a[i][j] * x0[j]).sum())
                .collect();
            // Nonnegative costs keep the minimization bounded.
            let c: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();

            let mut primal = LpProblem::minimize(c.clone());
            for (row, &bb) in a.iter().zip(&b) {
                primal.push_eq(row.clone(), bb);
            }
            let pv = match solve_lp(&primal).unwrap() {
                LpOutcome::Optimal { value, x } => {
                    for (row, &bb) in a.iter().zip(&b) {
                        let fit: f64 = row.iter().zip(&x).map(|(u, v)| u * v).sum();
                        assert!((fit - bb).abs() < 1e-8, "primal residual, trial {trial}");
                    }
                    assert!(x.iter().all(|&v| v >= -1e-8));
                    value
                }
                other => panic!("expected optimal primal, got {other:?}"),
            };

            // Dual: max b^T y s.t. A^T y <= c, y free.
            let mut dual = LpProblem {
                sense: Sense::Maximize,
                objective: b.clone(),
                a_eq: vec![],
                b_eq: vec![],
                a_le: (0..n).map(|j| (0..m).map(|i| a[i][j]).collect()).collect(),
                b_le: c.clone(),
                lower_bounds: vec![None; m],
            };
            dual.sense = Sense::Maximize;
            let dv = match solve_lp(&dual).unwrap() {
                LpOutcome::Optimal { value, .. } => value,
                other => panic!("expected optimal dual, got {other:?}"),
            };
            assert!(
                (pv - dv).abs() <= 1e-7 * (1.0 + pv.abs()),
                "duality gap {pv} vs {dv}"
            );

            let oracle = vertex_enumerate_min(&a, &b, &c).expect("oracle found no vertex");
            assert!(
                (pv - oracle).abs() <= 1e-7 * (1.0 + oracle.abs()),
                "simplex {pv} vs oracle {oracle}"
            );
        }
    }
}
