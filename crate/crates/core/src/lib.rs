//! Additive (splitting) difference schemes for coupled first-order systems
//! `B du/dt + A u = f(t)` posed on a direct sum of spaces
//! `H = H_1 ⊕ … ⊕ H_p`.
//!
//! The crate provides block vector/operator algebra ([`blockops`]), inner
//! solvers ([`linsolve`]), three time-stepping schemes ([`schemes`]), finite
//! difference model problems ([`problems`]) and a verification toolkit
//! ([`verify`]) that audits the schemes' energy estimates and convergence
//! orders.

pub mod blockops;
pub mod error;
pub mod linsolve;
pub mod par;
pub mod problems;
pub mod random;
pub mod schemes;
pub mod verify;

pub use blockops::{BlockDims, BlockOperator, BlockVector};
pub use error::{Error, Result};
pub use schemes::{EvolutionProblem, Forcing, SchemeConfig, SchemeKind, SchemeState};
