//! Facial reduction on problems that fail strict feasibility.
//!
//! Builds the classic fixtures whose singularity degree exceeds one, runs
//! the LP-relaxed certificate finder, and prints each reduction step.
//!
//! Run with: `cargo run --example facial_reduction`

use facered::conic::{check_certificate_primal, facially_reduce, FinderKind};
use facered::pathologies;

fn main() {
    let inst = pathologies::sing_two_instance();
    println!("== {} (order {})", inst.name, inst.problem.order());

    // The hand-derived certificate y = e3 exposes e2 e2^T.
    let cert = check_certificate_primal(&inst.problem, &[0.0, 0.0, 1.0], 1e-9)
        .unwrap()
        .valid()
        .unwrap();
    println!(
        "hand certificate: exposing rank {}, min eigenvalue {:.1e}",
        cert.residuals().rank,
        cert.residuals().min_eig
    );

    // The Diag finder discovers the same reduction automatically.
    let trace = facially_reduce(&inst.problem, FinderKind::Diag, 16, 1e-8).unwrap();
    for (k, step) in trace.steps.iter().enumerate() {
        println!(
            "step {}: certificate {:?}, exposing rank {}, cone order {} -> {}",
            k + 1,
            step.certificate
                .iter()
                .map(|v| (v * 1e6).round() / 1e6)
                .collect::<Vec<_>>(),
            step.exposing_rank,
            step.face_basis.rows(),
            step.reduced.order()
        );
    }
    println!(
        "witness degree {} (the singularity degree of this instance is exactly two)\n",
        trace.witness_degree()
    );

    // The nested family has singularity degree n - 1.
    for n in 3..=6 {
        let inst = pathologies::nested_sing_instance(n);
        let trace = facially_reduce(&inst.problem, FinderKind::Diag, 16, 1e-8).unwrap();
        println!(
            "nested n={n}: witness degree {} after reductions {:?}",
            trace.witness_degree(),
            trace
                .steps
                .iter()
                .map(|s| s.reduced.order())
                .collect::<Vec<_>>()
        );
    }

    // A strictly feasible problem yields no certificate at all.
    let feasible = facered::conic::ConicProblem::feasibility(
        vec![facered::numerics::SymMatrix::identity(3)],
        vec![1.0],
        3,
    )
    .unwrap();
    let trace = facially_reduce(&feasible, FinderKind::Diag, 16, 1e-8).unwrap();
    println!(
        "\nstrictly feasible {{<I,X> = 1}}: finder stops immediately, witness degree {}",
        trace.witness_degree()
    );
}
