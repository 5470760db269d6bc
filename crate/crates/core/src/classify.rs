//! Type of a based root system, read off its Gram matrix.

use serde::Serialize;

use crate::form::{signature_of, sorted_eigenvalues, CoxeterDiagram, GramMatrix, Signature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Kind {
    Finite,
    Affine,
    WeaklyHyperbolic,
    OtherIndefinite,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub kind: Kind,
    /// Every proper face carries a positive semidefinite form.
    pub hyperbolic: bool,
    /// Every proper face carries a positive definite form.
    pub compact_hyperbolic: bool,
    pub irreducible: bool,
    pub signature: Signature,
}

impl Classification {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("classification serializes")
    }
}

pub fn classify(g: &GramMatrix, tol: f64) -> Classification {
    let n = g.rank();
    let signature = g.signature(tol);
    let kind = if signature.is_positive_definite() {
        Kind::Finite
    } else if signature.n_minus == 0 {
        Kind::Affine
    } else if signature.is_lorentzian() {
        Kind::WeaklyHyperbolic
    } else {
        Kind::OtherIndefinite
    };
    let (mut hyperbolic, mut compact_hyperbolic) = (false, false);
    if kind == Kind::WeaklyHyperbolic {
        // Principal submatrices of a PSD (PD) matrix are PSD (PD), so the
        // maximal proper faces decide every proper face.
        let min_eigs: Vec<f64> = (0..n)
            .map(|skip| {
                let idx: Vec<usize> = (0..n).filter(|&i| i != skip).collect();
                sorted_eigenvalues(&g.principal_submatrix(&idx))
                    .first()
                    .copied()
                    .unwrap_or(f64::INFINITY)
            })
            .collect();
        hyperbolic = min_eigs.iter().all(|&e| e >= -tol);
        compact_hyperbolic = min_eigs.iter().all(|&e| e >= tol);
    }
    Classification {
        kind,
        hyperbolic,
        compact_hyperbolic,
        irreducible: gram_irreducible(g),
        signature,
    }
}

/// Connectivity of the Coxeter graph: nonzero off-diagonal entries are edges.
pub fn gram_irreducible(g: &GramMatrix) -> bool {
    let n = g.rank();
    let adj: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| i != j && g.entry(i, j) != 0.0).collect())
        .collect();
    crate::form::graph_connected(&adj)
}

pub fn is_irreducible(d: &CoxeterDiagram) -> bool {
    d.is_irreducible()
}

/// Signature of a principal submatrix, exposed for diagnostics.
pub fn face_signature(g: &GramMatrix, indices: &[usize], tol: f64) -> Signature {
    signature_of(&g.principal_submatrix(indices), tol)
}
