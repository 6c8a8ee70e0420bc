//! Face algebra for the PSD cone and the nonnegative orthant.
//!
//! Faces of `S^n_+` are kept in the dual pair of descriptions: an
//! orthonormal range basis `V` (the face is `V S^k_+ V^T`) and an exposing
//! PSD matrix `W` with kernel equal to range `V`. Faces are compared by
//! their range projectors `V V^T`, never by basis equality, because bases
//! are unique only up to rotation.

use crate::numerics::{self, Mat, SymMatrix};
use crate::{Error, Result};
use std::collections::BTreeSet;

/// A face of the PSD cone `S^n_+`.
#[derive(Clone, Debug)]
pub struct FaceRep {
    ambient_n: usize,
    /// Orthonormal columns spanning the face's range space.
    basis: Mat,
    /// Exposing vector, normalized to unit trace when nonzero; absent until
    /// requested for faces built directly from a range basis.
    exposing: Option<SymMatrix>,
}

impl FaceRep {
    /// The whole cone: basis `I`, exposed by the zero matrix.
    pub fn full(n: usize) -> Self {
        FaceRep {
            ambient_n: n,
            basis: Mat::identity(n),
            exposing: Some(SymMatrix::zeros(n)),
        }
    }

    /// Face with the given orthonormal range basis.
    pub fn from_basis(ambient_n: usize, basis: Mat) -> Self {
        assert_eq!(basis.rows(), ambient_n);
        debug_assert!(
            basis
                .tr_matmul(&basis)
                .sub(&Mat::identity(basis.cols()))
                .fro_norm()
                < 1e-8,
            "basis columns must be orthonormal"
        );
        FaceRep {
            ambient_n,
            basis,
            exposing: None,
        }
    }

    pub fn ambient_order(&self) -> usize {
        self.ambient_n
    }

    /// Dimension `k` of the face's range space (the face is `V S^k_+ V^T`).
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    /// Stored exposing vector, if any.
    pub fn stored_exposing(&self) -> Option<&SymMatrix> {
        self.exposing.as_ref()
    }

    /// An exposing vector for the face: the stored one, or the complement
    /// projector `I - V V^T` computed on demand.
    pub fn exposing(&self) -> SymMatrix {
        match &self.exposing {
            Some(w) => w.clone(),
            None => {
                let p = self.projector();
                SymMatrix::identity(self.ambient_n).sub(&p)
            }
        }
    }

    /// Range projector `V V^T`; the canonical representation for comparing
    /// faces.
    pub fn projector(&self) -> SymMatrix {
        SymMatrix::from_mat(&self.basis.matmul(&self.basis.transpose()))
    }

    /// Whether two faces agree, compared through their range projectors.
    pub fn same_face(&self, other: &FaceRep, tol: f64) -> bool {
        self.ambient_n == other.ambient_n
            && self.projector().sub(&other.projector()).fro_norm() <= tol
    }
}

fn normalize_trace(w: &SymMatrix) -> SymMatrix {
    let t = w.trace();
    if t > 0.0 {
        w.scale(1.0 / t)
    } else {
        w.clone()
    }
}

/// Face `{X >= 0 : <W, X> = 0}` exposed by a PSD matrix `W`.
pub fn face_from_exposing(w: &SymMatrix, tol: f64) -> Result<FaceRep> {
    let min_eig = w.min_eig();
    if min_eig < -tol * w.fro_norm().max(1.0) {
        return Err(Error::NotPsd { min_eig });
    }
    let basis = numerics::nullspace_basis(w, Some(tol.max(1e-12)));
    Ok(FaceRep {
        ambient_n: w.order(),
        basis,
        exposing: Some(normalize_trace(w)),
    })
}

/// Minimal face of the cone containing a single PSD matrix: the basis spans
/// `range(X)`.
pub fn minimal_face_of_point(x: &SymMatrix, tol: f64) -> Result<FaceRep> {
    let min_eig = x.min_eig();
    if min_eig < -tol * x.fro_norm().max(1.0) {
        return Err(Error::NotPsd { min_eig });
    }
    let basis = numerics::range_basis(x, Some(tol.max(1e-12)));
    Ok(FaceRep {
        ambient_n: x.order(),
        basis,
        exposing: None,
    })
}

/// Intersection of two faces, exposed by the sum of their exposing vectors.
pub fn intersect_faces(f1: &FaceRep, f2: &FaceRep) -> Result<FaceRep> {
    if f1.ambient_n != f2.ambient_n {
        return Err(Error::DimensionMismatch {
            expected: f1.ambient_n,
            got: f2.ambient_n,
        });
    }
    let w = f1.exposing().add(&f2.exposing());
    face_from_exposing(&w, 1e-10)
}

/// Conjugate face `F^△ = K^* ∩ F^⊥`: for the PSD cone, the face spanned on
/// the orthogonal complement of the range basis.
pub fn conjugate_face(f: &FaceRep) -> FaceRep {
    let n = f.ambient_n;
    let p = f.projector();
    // Complement basis: kernel of the range projector.
    let basis = numerics::nullspace_basis(&p, Some(1e-10));
    FaceRep {
        ambient_n: n,
        basis,
        exposing: None,
    }
}

/// Membership test: `X` is PSD to `tol` and its range lies inside the face.
pub fn face_contains(f: &FaceRep, x: &SymMatrix, tol: f64) -> bool {
    if x.order() != f.ambient_n {
        return false;
    }
    if x.min_eig() < -tol * x.fro_norm().max(1.0) {
        return false;
    }
    let p = f.projector();
    let pxp = x.compress(&p.to_mat());
    x.sub(&pxp).fro_norm() <= tol * (1.0 + x.fro_norm())
}

/// A face of the nonnegative orthant: coordinates in `zero_set` vanish.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthantFace {
    n: usize,
    zero_set: BTreeSet<usize>,
}

impl OrthantFace {
    pub fn new(n: usize, zero_set: impl IntoIterator<Item = usize>) -> Result<Self> {
        let zero_set: BTreeSet<usize> = zero_set.into_iter().collect();
        if let Some(&bad) = zero_set.iter().find(|&&i| i >= n) {
            return Err(Error::Invalid(format!(
                "zero-set index {bad} out of range for n={n}"
            )));
        }
        Ok(OrthantFace { n, zero_set })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn zero_set(&self) -> &BTreeSet<usize> {
        &self.zero_set
    }

    /// Conjugate face `F_{I^c}`.
    pub fn conjugate(&self) -> OrthantFace {
        let complement: BTreeSet<usize> =
            (0..self.n).filter(|i| !self.zero_set.contains(i)).collect();
        OrthantFace {
            n: self.n,
            zero_set: complement,
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.n
            && x.iter().all(|&v| v >= -tol)
            && self.zero_set.iter().all(|&i| x[i].abs() <= tol)
    }

    /// The corresponding face of the PSD cone under the diagonal embedding.
    pub fn to_psd_face(&self) -> FaceRep {
        let keep: Vec<usize> = (0..self.n).filter(|i| !self.zero_set.contains(i)).collect();
        let mut basis = Mat::zeros(self.n, keep.len());
        for (j, &i) in keep.iter().enumerate() {
            basis[(i, j)] = 1.0;
        }
        FaceRep::from_basis(self.n, basis)
    }
}
