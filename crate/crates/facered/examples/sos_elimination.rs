//! Monomial elimination for sum-of-squares programs: shrink the Gram basis
//! with tiny LPs before any SDP is formed.
//!
//! Run with: `cargo run --example sos_elimination`

use facered::numerics::SymMatrix;
use facered::sos::{eliminate, gram_system, initial_support, is_type1, m_plus, verify_gram, Poly};

fn show(m: &facered::sos::MonomialSet) -> String {
    m.iter()
        .map(|mono| format!("{mono:?}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn main() {
    // x^4 + x^2: the Newton half-support is already {x, x^2}.
    let f = Poly::univariate(&[0.0, 0.0, 1.0, 0.0, 1.0]);
    let initial = initial_support(&f).unwrap();
    println!("x^4 + x^2: initial support {}", show(&initial));
    let (final_m, log) = eliminate(&f, &[], 50).unwrap();
    println!(
        "  final basis {} after {} elimination steps",
        show(&final_m),
        log.len()
    );

    // x^4 + 1 keeps 1, x, x^2: the constant is genuinely needed.
    let g = Poly::univariate(&[1.0, 0.0, 0.0, 0.0, 1.0]);
    let (final_m, _) = eliminate(&g, &[], 50).unwrap();
    println!("x^4 + 1: final basis {}", show(&final_m));

    // Starting from an inflated basis, the LP certificates remove the
    // monomials one step at a time.
    let m = facered::sos::MonomialSet::new(1, [vec![0u32], vec![1], vec![2]]).unwrap();
    println!(
        "\ninflated basis {} for x^4 + x^2: M+ = {}, type I = {}",
        show(&m),
        show(&m_plus(&m)),
        is_type1(&m)
    );
    if let Some(step) = facered::sos::elimination_step(&m, &f, &[]).unwrap() {
        println!("  certificate removes {:?}", step.removed);
    }

    // Gram verification on the final basis of (x + y)^2.
    let h = Poly::from_terms(2, [(vec![2, 0], 1.0), (vec![1, 1], 2.0), (vec![0, 2], 1.0)]).unwrap();
    let (basis, _) = eliminate(&h, &[], 50).unwrap();
    let system = gram_system(&h, &basis);
    println!(
        "\n(x + y)^2: basis {}, Gram system {} equations over {} unknowns",
        show(&basis),
        system.rows.rows(),
        system.rows.cols()
    );
    let ones = SymMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
    println!(
        "  all-ones Gram matrix verifies: {}",
        verify_gram(&h, &basis, &ones, 1e-10)
    );
}
