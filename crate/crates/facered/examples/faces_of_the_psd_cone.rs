//! The face algebra underneath everything: exposing vectors, minimal
//! faces, intersections, and conjugate faces of the PSD cone.
//!
//! Run with: `cargo run --example faces_of_the_psd_cone`

use facered::cones::{
    conjugate_face, face_contains, face_from_exposing, intersect_faces, minimal_face_of_point,
};
use facered::numerics::SymMatrix;

fn main() {
    // The face of S^2_+ exposed by [[1,-1],[-1,1]] is the ray of all-ones
    // matrices.
    let w = SymMatrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]);
    let face = face_from_exposing(&w, 1e-10).unwrap();
    println!("face exposed by [[1,-1],[-1,1]]: dimension {}", face.dim());
    let ones = SymMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
    println!(
        "  contains the all-ones matrix: {}",
        face_contains(&face, &ones, 1e-9)
    );
    println!(
        "  contains the identity: {}",
        face_contains(&face, &SymMatrix::identity(2), 1e-9)
    );

    // Minimal face of a rank-one point.
    let point = SymMatrix::outer(&[3.0, 4.0]);
    let minimal = minimal_face_of_point(&point, 1e-10).unwrap();
    println!(
        "\nminimal face of (3,4)(3,4)^T: dimension {}, basis column {:?}",
        minimal.dim(),
        minimal
            .basis()
            .col(0)
            .iter()
            .map(|v| (v * 1e4).round() / 1e4)
            .collect::<Vec<_>>()
    );

    // Intersections are exposed by sums of exposing vectors.
    let f1 = face_from_exposing(&SymMatrix::outer(&[1.0, 0.0, 0.0]), 1e-10).unwrap();
    let f2 = face_from_exposing(&SymMatrix::outer(&[0.0, 1.0, 0.0]), 1e-10).unwrap();
    let meet = intersect_faces(&f1, &f2).unwrap();
    println!(
        "\nintersection of faces exposed by e1 e1^T and e2 e2^T: dimension {}",
        meet.dim()
    );

    // Conjugation swaps a face with its complement; the PSD cone is
    // facially exposed, so doing it twice returns the original face.
    let conj = conjugate_face(&minimal);
    let back = conjugate_face(&conj);
    println!(
        "\nconjugate of the minimal face has dimension {}, double conjugate matches: {}",
        conj.dim(),
        back.same_face(&minimal, 1e-9)
    );
}
