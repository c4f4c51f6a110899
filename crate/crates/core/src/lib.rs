//! Numerical construction of solutions to the fourth-order nonlinear Schrödinger
//! equation `i u_t − u_xxxx + λ|u|²u = 0` on the half-line with Dirichlet and
//! Neumann boundary data, by boundary forcing operators and Picard iteration.

pub mod error;
pub mod forcing;
pub mod fractional;
pub mod ibvp;
pub mod kernel;
pub mod norms;
pub mod profiles;
pub mod propagator;
pub mod quadrature;
pub mod reference;
pub mod special;
pub mod stencil;
pub mod verification;

pub use error::{Error, Result};
pub use special::C64;
