//! Embedded probabilistic programming.
//!
//! Models are values of the [`model::RandomVariable`] monad: priors registered
//! with `param`, likelihood terms added with `fit`, composed with `flat_map`
//! and `traverse`. A model compiles to an un-normalised log-posterior over an
//! unconstrained parameter vector, differentiated in reverse mode, and is
//! sampled with Hamiltonian Monte Carlo.

pub mod diagnostics;
pub mod distributions;
pub mod dual;
pub mod hmc;
pub mod model;
pub mod reverse;
pub mod rng;
pub mod scalar;
pub mod special;

pub use distributions::{Continuous, Discrete, Support};
pub use dual::Dual;
pub use model::{CompiledModel, RandomVariable};
pub use reverse::Expr;
pub use rng::{GenState, Rand};
pub use scalar::Scalar;
