//! Learn the whole solution path `λ ↦ θ*(λ)` of a family of smooth, strongly
//! convex problems by solving a single stochastic problem over the
//! coefficients of a linear basis expansion.
//!
//! The pieces:
//!
//! * [`basis`]: block-structured feature maps `Φ(λ)` and their coefficients.
//! * [`distribution`]: sampling distributions over the hyperparameter box and
//!   the matching Gauss quadrature rules.
//! * [`problems`]: concrete parametric objectives with gradients and declared
//!   curvature bounds.
//! * [`optimize`]: constant-step SGD in coefficient space, the distance
//!   diagnostic step controller, and deterministic gradient descent.
//! * [`spectral`]: the constants `C` and `c` that set the SGD step size.
//! * [`pathlearn`]: fixed-basis (LSP) and adaptive-basis (ALSP) drivers.
//! * [`baseline`]: calibrated uniform discretization with warm starts.
//! * [`evaluate`]: ground truth, path error and inequality audits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod basis;
pub mod distribution;
pub mod domain;
pub mod error;
pub mod evaluate;
pub mod io;
pub mod linalg;
pub mod optimize;
pub mod pathlearn;
pub mod problems;
pub mod spectral;

pub use basis::{Basis, BasisKind, Coefficients};
pub use distribution::{LambdaDistribution, QuadratureRule};
pub use domain::BoxDomain;
pub use error::{Error, Result};
pub use evaluate::GroundTruthGrid;
pub use optimize::{RunTrace, SgdConfig};
pub use problems::ParametricProblem;

/// RNG used for every stochastic routine in the crate.
pub type PathRng = rand_chacha::ChaCha8Rng;

/// Seeded RNG; identical seeds give identical draw sequences.
pub fn seeded_rng(seed: u64) -> PathRng {
    use rand::SeedableRng;
    PathRng::seed_from_u64(seed)
}
