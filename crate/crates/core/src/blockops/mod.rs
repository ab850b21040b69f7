//! Block vectors and block operators over `H = H_1 ⊕ … ⊕ H_p`.

mod block;
mod certify;
pub mod io;
mod operator;
mod split;
mod vector;

pub use block::{Block, CsrMatrix};
pub use certify::{
    certify, certify_with, min_eigenvalue_dense, min_eigenvalue_inverse_iteration, symmetry_defect, CertifyOptions,
    OperatorCertificate,
};
pub use operator::{weighted_inner, weighted_norm, weighted_norm_sq, BlockOperator};
pub use split::{triangular_split, triangular_split_with_tol, TriangularPair};
pub use vector::{BlockDims, BlockVector};

/// Default relative symmetry tolerance.
pub const DEFAULT_TOL_SYM: f64 = 1e-12;
