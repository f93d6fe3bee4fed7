//! Bilateral (two-ended) boundary feedback design for one-dimensional PDEs
//! by infinite-dimensional backstepping.
//!
//! The crate covers three plant classes sharing the hourglass kernel domain
//! `{|ξ| ≤ |x|, x ∈ [-L, L]}`:
//!
//! - reaction-diffusion `u_t = ε u_xx + λ(x) u` ([`kernel_rd`]),
//! - 2×2 hyperbolic systems with equal transport speeds ([`kernel_hyp`]),
//! - the anti-damped wave equation, reduced to the hyperbolic case ([`wave`]).
//!
//! Kernels are available in closed form for constant coefficients and by
//! successive approximation otherwise. [`sim`] integrates open and closed
//! loops and checks that the transformed state obeys the target dynamics,
//! and [`compare`] tabulates the unilateral/bilateral control-effort norms.

pub mod compare;
pub mod domain;
pub mod error;
pub mod export;
pub mod expr;
pub mod kernel_hyp;
pub mod kernel_rd;
pub mod par;
pub mod sim;
pub mod specfun;
pub mod wave;

mod chargrid;

pub use error::{Error, Result};
