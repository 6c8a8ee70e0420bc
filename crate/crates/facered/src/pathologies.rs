//! Constructors for classic ill-posed conic instances with their known
//! values, used as fixtures throughout the crate.
//!
//! Instances are generated programmatically rather than stored as files so
//! the parameterized families (`n`, `eps`, `P`) stay available.

use crate::conic::ConicProblem;
use crate::numerics::{unit_vector, SymMatrix};
use crate::{Error, Result};

/// What is known in closed form about an instance.
#[derive(Clone, Debug, Default)]
pub struct KnownValues {
    pub primal_value: Option<f64>,
    pub dual_value: Option<f64>,
    /// The dual problem has no feasible point at all.
    pub dual_infeasible: bool,
    pub primal_attained: Option<bool>,
    pub dual_attained: Option<bool>,
    pub expected_witness_degree: Option<usize>,
    pub feasible_point: Option<SymMatrix>,
    pub primal_optimal_point: Option<SymMatrix>,
    pub dual_optimal_point: Option<Vec<f64>>,
}

/// A fixture problem together with its known values.
#[derive(Clone, Debug)]
pub struct LabeledInstance {
    pub name: &'static str,
    pub problem: ConicProblem,
    pub known: KnownValues,
}

/// `min 2 X_12 s.t. X_11 = 0, X >= 0`: the primal value is 0 while the
/// dual is infeasible.
pub fn infinite_gap() -> LabeledInstance {
    let a1 = SymMatrix::outer(&unit_vector(2, 0));
    let c = SymMatrix::sym_unit(2, 0, 1);
    let problem = ConicProblem::new(vec![a1], vec![0.0], c).expect("valid fixture");
    LabeledInstance {
        name: "infinite-gap",
        problem,
        known: KnownValues {
            primal_value: Some(0.0),
            dual_value: None,
            dual_infeasible: true,
            primal_attained: Some(true),
            feasible_point: Some(SymMatrix::zeros(2)),
            primal_optimal_point: Some(SymMatrix::zeros(2)),
            ..Default::default()
        },
    }
}

/// `min X_22 s.t. X_33 = 0, X_22 + 2 X_13 = 1, X >= 0`: finite positive
/// duality gap, `v_p = 1 > 0 = v_d`, both attained.
pub fn positive_gap() -> LabeledInstance {
    let a1 = SymMatrix::outer(&unit_vector(3, 2));
    let mut a2 = SymMatrix::outer(&unit_vector(3, 1));
    a2.set(0, 2, 1.0);
    let c = SymMatrix::outer(&unit_vector(3, 1));
    let problem = ConicProblem::new(vec![a1, a2], vec![0.0, 1.0], c).expect("valid fixture");
    let e2e2 = SymMatrix::outer(&unit_vector(3, 1));
    LabeledInstance {
        name: "positive-gap",
        problem,
        known: KnownValues {
            primal_value: Some(1.0),
            dual_value: Some(0.0),
            primal_attained: Some(true),
            dual_attained: Some(true),
            feasible_point: Some(e2e2.clone()),
            primal_optimal_point: Some(e2e2),
            dual_optimal_point: Some(vec![0.0, 0.0]),
            ..Default::default()
        },
    }
}

/// `min X_11 s.t. 2 X_12 = 1, X >= 0`: zero gap but the primal optimal
/// value 0 is not attained.
pub fn zero_gap_unattained() -> LabeledInstance {
    let a1 = SymMatrix::sym_unit(2, 0, 1);
    let c = SymMatrix::outer(&unit_vector(2, 0));
    let problem = ConicProblem::new(vec![a1], vec![1.0], c).expect("valid fixture");
    LabeledInstance {
        name: "zero-gap-unattained",
        problem,
        known: KnownValues {
            primal_value: Some(0.0),
            dual_value: Some(0.0),
            primal_attained: Some(false),
            dual_attained: Some(true),
            feasible_point: Some(zero_gap_witness(1)),
            dual_optimal_point: Some(vec![0.0]),
            ..Default::default()
        },
    }
}

/// Feasible witness `X^k = [[1/k, 1/2], [1/2, k]]` with `X^k_11 -> 0`.
pub fn zero_gap_witness(k: usize) -> SymMatrix {
    let kf = k.max(1) as f64;
    SymMatrix::from_rows(&[vec![1.0 / kf, 0.5], vec![0.5, kf]])
}

/// Optimal value of the canonically perturbed dual of [`positive_gap`]:
/// `v_d(eps) = 1 + eps (P_11 P_22 - P_12^2) / P_11`.
///
/// The perturbation `P` must be PSD with `P_11 > 0`; boundary matrices with
/// a vanishing leading 2x2 minor are allowed and give exactly 1.
pub fn perturbed_dual_value(p: &SymMatrix, eps: f64) -> Result<f64> {
    if p.order() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: p.order(),
        });
    }
    if !(eps > 0.0) {
        return Err(Error::Invalid("perturbation eps must be positive".into()));
    }
    if p.min_eig() < -1e-10 * p.fro_norm().max(1.0) || p.get(0, 0) <= 0.0 {
        return Err(Error::NotPd);
    }
    let det2 = p.get(0, 0) * p.get(1, 1) - p.get(0, 1) * p.get(0, 1);
    Ok(1.0 + eps * det2 / p.get(0, 0))
}

/// Strict feasibility of `y_2` for the perturbed dual, decided through the
/// leading principal minors (the third minor is positive for sufficiently
/// negative `y_1`).
pub fn perturbed_dual_feasible(p: &SymMatrix, eps: f64, y2: f64) -> bool {
    let m11 = eps * p.get(0, 0);
    let det2 = p.get(0, 0) * p.get(1, 1) - p.get(0, 1) * p.get(0, 1);
    let m12 = eps * (p.get(0, 0) * (1.0 - y2) + eps * det2);
    m11 > 0.0 && m12 > 0.0
}

/// The 3x3 region `{X >= 0 : X_11 = 1, X_12 + X_33 = 0, X_22 = 0}` whose
/// singularity degree is exactly two.
pub fn sing_two_instance() -> LabeledInstance {
    let a1 = SymMatrix::outer(&unit_vector(3, 0));
    let mut a2 = SymMatrix::outer(&unit_vector(3, 2));
    a2.set(0, 1, 0.5);
    let a3 = SymMatrix::outer(&unit_vector(3, 1));
    let problem =
        ConicProblem::feasibility(vec![a1, a2, a3], vec![1.0, 0.0, 0.0], 3).expect("valid fixture");
    LabeledInstance {
        name: "sing-two",
        problem,
        known: KnownValues {
            expected_witness_degree: Some(2),
            feasible_point: Some(SymMatrix::outer(&unit_vector(3, 0))),
            ..Default::default()
        },
    }
}

/// The nested worst-case family `{X >= 0 : X_22 = 0, X_{k+1,k+1} = X_{1,k}}`
/// whose feasible set is the ray through `e_1 e_1^T` and whose singularity
/// degree is `n - 1`.
pub fn nested_sing_instance(n: usize) -> LabeledInstance {
    assert!(n >= 2, "nested instance needs n >= 2");
    let mut a_mats = vec![SymMatrix::outer(&unit_vector(n, 1))];
    for k in 2..n {
        // X_{k+1,k+1} - X_{1,k} = 0, indices 1-based.
        let mut a = SymMatrix::outer(&unit_vector(n, k));
        a.set(0, k - 1, -0.5);
        a_mats.push(a);
    }
    let m = a_mats.len();
    let problem = ConicProblem::feasibility(a_mats, vec![0.0; m], n).expect("valid fixture");
    LabeledInstance {
        name: "nested-sing",
        problem,
        known: KnownValues {
            expected_witness_degree: Some(n - 1),
            feasible_point: Some(SymMatrix::outer(&unit_vector(n, 0))),
            ..Default::default()
        },
    }
}

/// The near-feasible points `X(eps)` of the worst-case family: they violate
/// only the `X_22 = 0` constraint by `eps`, yet their distance to the
/// feasible ray is of order `eps^{2^{-(n-1)}}`.
pub fn worst_case_point(n: usize, eps: f64) -> SymMatrix {
    assert!(n >= 2 && eps > 0.0);
    let mut x = SymMatrix::zeros(n);
    x.set(0, 0, n as f64);
    for k in 1..n {
        x.set(0, k, eps.powf(0.5f64.powi(k as i32)));
        x.set(k, k, eps.powf(0.5f64.powi(k as i32 - 1)));
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::check_optimality;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn infinite_gap_values() {
        let inst = infinite_gap();
        let x = inst.known.feasible_point.clone().unwrap();
        assert!(inst.problem.is_feasible(&x, 1e-10));
        assert!((inst.problem.objective().inner(&x) - 0.0).abs() < 1e-12);
        // The dual slack [[-y, 1], [1, 0]] has determinant -1, so it is
        // indefinite for every y.
        for y in [-10.0, -1.0, 0.0, 1.0, 10.0] {
            let slack = inst
                .problem
                .objective()
                .sub(&inst.problem.adjoint_a(&[y]).unwrap());
            assert!(slack.min_eig() < -1e-2);
        }
    }

    #[test]
    fn positive_gap_values() {
        let inst = positive_gap();
        let x = inst.known.primal_optimal_point.clone().unwrap();
        assert!(inst.problem.is_feasible(&x, 1e-10));
        let y = inst.known.dual_optimal_point.clone().unwrap();
        let report = check_optimality(&inst.problem, &x, &y, 1e-9).unwrap();
        assert!(report.primal_feasible && report.dual_feasible);
        let vp = inst.problem.objective().inner(&x);
        assert!((vp - inst.known.primal_value.unwrap()).abs() < 1e-12);
        assert!((report.gap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_gap_witness_sequence() {
        let inst = zero_gap_unattained();
        for k in [1usize, 5, 50, 500] {
            let xk = zero_gap_witness(k);
            assert!(inst.problem.is_feasible(&xk, 1e-10), "k={k}");
            assert!((xk.get(0, 0) - 1.0 / k as f64).abs() < 1e-14);
        }
        // Zero in the (1,1) slot cannot be completed feasibly.
        for t in [0.0, 1.0, 100.0] {
            let x = SymMatrix::from_rows(&[vec![0.0, 0.5], vec![0.5, t]]);
            assert!(x.min_eig() < -1e-6);
        }
        // The dual value 0 is attained at y = 0.
        let report = check_optimality(&inst.problem, &zero_gap_witness(10), &[0.0], 1e-9).unwrap();
        assert!(report.dual_feasible);
    }

    #[test]
    fn perturbed_dual_closed_form() {
        let id = SymMatrix::identity(3);
        assert!((perturbed_dual_value(&id, 0.1).unwrap() - 1.1).abs() < 1e-12);
        // eps -> 0 limit is 1 (= v_p), not the dual value 0.
        assert!((perturbed_dual_value(&id, 1e-12).unwrap() - 1.0).abs() < 1e-10);
        // Degenerate leading minor: value is exactly 1.
        let degen = SymMatrix::from_rows(&[
            vec![1.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ]);
        assert!((perturbed_dual_value(&degen, 0.3).unwrap() - 1.0).abs() < 1e-12);
        // Indefinite perturbations are rejected.
        assert!(matches!(
            perturbed_dual_value(&SymMatrix::diag(&[1.0, -1.0, 1.0]), 0.1),
            Err(Error::NotPd)
        ));
    }

    #[test]
    fn perturbed_dual_grid_supremum() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..3 {
            // Random P > 0 via P = Q Q^T + I/2.
            let q = crate::numerics::Mat::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
            let p = SymMatrix::from_mat(&q.matmul(&q.transpose()))
                .add(&SymMatrix::identity(3).scale(0.5));
            let eps = rng.random_range(0.05..0.5);
            let closed = perturbed_dual_value(&p, eps).unwrap();
            // Grid-search supremum of feasible y2 with step 1e-4.
            let mut best = f64::NEG_INFINITY;
            let mut y2 = 0.0;
            while y2 <= closed + 1.0 {
                if perturbed_dual_feasible(&p, eps, y2) {
                    best = y2;
                }
                y2 += 1e-4;
            }
            assert!((best - closed).abs() <= 1e-3, "closed={closed} grid={best}");
        }
    }

    #[test]
    fn nested_accepts_ray_point() {
        for n in 2..=6 {
            let inst = nested_sing_instance(n);
            let x = inst.known.feasible_point.clone().unwrap();
            assert!(inst.problem.is_feasible(&x, 1e-12));
            assert!(inst.problem.is_feasible(&x.scale(7.5), 1e-12));
        }
    }

    #[test]
    fn worst_case_point_violates_only_x22() {
        let inst = nested_sing_instance(4);
        let x = worst_case_point(4, 1e-3);
        let residuals = inst.problem.apply_a(&x).unwrap();
        assert!((residuals[0] - 1e-3).abs() < 1e-15);
        for r in &residuals[1..] {
            assert!(r.abs() < 1e-15);
        }
        // X(eps) is PSD for small eps.
        assert!(x.min_eig() > -1e-12);
    }
}
