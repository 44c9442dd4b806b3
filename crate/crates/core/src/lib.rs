//! Solver and verifier for the equation
//!
//! ```text
//! u_tt σ_k(W[u]) − σ_k^{ij}(W[u]) u_ti u_tj = ψ   on Tⁿ × [0, 1]
//! u(·, 0) = u0,  u(·, 1) = u1
//! ```
//!
//! with `W[u] = ∇²u + s ∇u⊗∇u + (γ Δu − (r/2)|∇u|²) I + A` on a flat
//! periodic torus.

pub mod cli_io;
pub mod conformal;
pub mod discrete;
pub mod error;
pub mod grid;
pub mod linearize;
pub mod linsolve;
pub mod manufactured;
pub mod problem;
pub mod solver;
pub mod symfunc;
pub mod verifier;

pub use conformal::{Coefficients, Jet};
pub use error::{Error, NodeRef, Result};
pub use grid::{GridSpec, SpacetimeField};
pub use problem::Problem;
pub use solver::{SolveTrace, SolverOptions};
pub use symfunc::SymMatrix;

/// The guide's chapters, compiled as doc-tests so their snippets stay runnable.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/symmetric-functions.md")]
    pub mod symmetric_functions {}
    #[doc = include_str!("../../../book/src/conformal-tensor.md")]
    pub mod conformal_tensor {}
    #[doc = include_str!("../../../book/src/grid.md")]
    pub mod grid {}
    #[doc = include_str!("../../../book/src/solving.md")]
    pub mod solving {}
    #[doc = include_str!("../../../book/src/degenerate.md")]
    pub mod degenerate {}
    #[doc = include_str!("../../../book/src/verification.md")]
    pub mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
