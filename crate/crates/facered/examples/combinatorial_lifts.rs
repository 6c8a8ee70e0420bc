//! SDP lifts of combinatorial problems and their facial reductions: the
//! second lift of max-cut and the gangster-reduced QAP relaxation.
//!
//! Run with: `cargo run --example combinatorial_lifts`

use facered::lifts::{
    all_permutations, cut_value, gangster_index_set, lift_permutation, maxcut_lift_point,
    maxcut_second_lift, qap_constraint_counts, qap_reduced, reduce_lift,
};
use facered::numerics::{Mat, SymMatrix};

fn main() {
    // Second lift of max-cut on the triangle with unit weights.
    let n = 3;
    let weights = SymMatrix::from_fn(n, |i, j| if i != j { 1.0 } else { 0.0 });
    let lift = maxcut_second_lift(n, &weights).unwrap();
    println!(
        "max-cut n={n}: lifted order {}, face dim {}, {} index constraints",
        lift.order,
        lift.face_basis.cols(),
        lift.constraints.len()
    );
    for mask in 0..(1u32 << n) {
        let cut: Vec<f64> = (0..n)
            .map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 })
            .collect();
        let y = maxcut_lift_point(&cut).unwrap();
        println!(
            "  cut {:?}: value {}, <EE^T, Y> = {:.1e}",
            cut.iter().map(|v| *v as i8).collect::<Vec<_>>(),
            cut_value(&weights, &cut),
            lift.exposing.inner(&y)
        );
    }

    // Gangster reduction of a small QAP.
    for n in [3usize, 4] {
        let (full, gangster) = qap_constraint_counts(n);
        println!(
            "\nQAP n={n}: {} constraints in the full lift, {} gangster entries after reduction",
            full, gangster
        );
        assert_eq!(gangster_index_set(n).len(), gangster);

        let f = SymMatrix::from_fn(n, |i, j| ((i + 2 * j) % 4) as f64);
        let d = SymMatrix::from_fn(n, |i, j| (i.abs_diff(j)) as f64);
        let c = Mat::zeros(n, n);
        let reduced = qap_reduced(&f, &d, &c).unwrap();
        println!(
            "  reduced variable order {} = (n-1)^2 + 1; every permutation stays feasible:",
            reduced.order
        );
        let mut best = f64::INFINITY;
        for x in all_permutations(n) {
            let y = lift_permutation(&x).unwrap();
            let r = reduce_lift(&y, &reduced.face_basis);
            let value = reduced.objective.inner(&r);
            best = best.min(value);
            let worst_violation = reduced
                .constraints
                .iter()
                .map(|(mat, rhs)| (mat.inner(&r) - rhs).abs())
                .fold(0.0f64, f64::max);
            assert!(worst_violation < 1e-8);
        }
        println!("  minimum objective over all permutations: {best}");
    }
}
