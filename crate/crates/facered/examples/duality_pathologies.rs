//! What goes wrong without strict feasibility: infinite duality gaps,
//! finite positive gaps, unattained optima, and perturbed problems that
//! converge to the wrong value.
//!
//! Run with: `cargo run --example duality_pathologies`

use facered::conic::check_optimality;
use facered::numerics::SymMatrix;
use facered::pathologies;

fn main() {
    // Infinite gap: primal value 0, dual infeasible.
    let inst = pathologies::infinite_gap();
    let x = inst.known.primal_optimal_point.clone().unwrap();
    println!(
        "{}: primal value {} attained, dual infeasible = {}",
        inst.name,
        inst.problem.objective().inner(&x),
        inst.known.dual_infeasible
    );

    // Positive gap: v_p = 1 > 0 = v_d, both attained.
    let inst = pathologies::positive_gap();
    let x = inst.known.primal_optimal_point.clone().unwrap();
    let y = inst.known.dual_optimal_point.clone().unwrap();
    let report = check_optimality(&inst.problem, &x, &y, 1e-9).unwrap();
    println!(
        "{}: primal feasible {}, dual feasible {}, duality gap {}",
        inst.name, report.primal_feasible, report.dual_feasible, report.gap
    );

    // Zero gap but no attainment: X^k drives X_11 to zero without reaching it.
    let inst = pathologies::zero_gap_unattained();
    print!("{}: X^k_11 along the witness sequence:", inst.name);
    for k in [1usize, 10, 100, 1000] {
        let xk = pathologies::zero_gap_witness(k);
        assert!(inst.problem.is_feasible(&xk, 1e-12));
        print!(" {:.4}", xk.get(0, 0));
    }
    println!("  (feasible for every k, infimum 0 unattained)");

    // Perturbing the positive-gap dual looks like a fix but converges to
    // the primal value 1, not the dual value 0.
    println!("\nperturbed dual values v_d(eps) for P = I:");
    let p = SymMatrix::identity(3);
    for eps in [0.5, 0.1, 0.01, 1e-4, 1e-8] {
        let v = pathologies::perturbed_dual_value(&p, eps).unwrap();
        println!("  eps = {eps:<8} v_d(eps) = {v}");
    }
    println!("  limit 1 = v_p, while v_d = 0: the perturbation solves the wrong problem");
}
