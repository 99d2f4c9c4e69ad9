//! Parametric objectives `h(θ, λ)` with gradients and declared curvature
//! bounds `0 < μ ≤ L`.

mod data;
mod logistic;
mod portfolio;
mod toy;

pub use data::{
    ingest_classification_csv, ingest_returns_csv, synth_classification, synth_market,
    ClassificationData, ClassificationOptions, MarketModel,
};
pub use logistic::WeightedLogistic;
pub use portfolio::{analytic_path_12d, Portfolio12D, Portfolio2D, SMOOTH_L1_EPS};
pub use toy::{QuadraticToy, TargetPath};

use crate::domain::BoxDomain;

/// `h(·, λ)` is `μ`-strongly convex and `L`-smooth for every `λ` in the
/// declared hyperparameter box. Evaluation must be reentrant.
pub trait ParametricProblem: Send + Sync {
    fn name(&self) -> &str;

    /// Decision dimension `d`.
    fn dim(&self) -> usize;

    fn lambda_domain(&self) -> &BoxDomain;

    fn lambda_dim(&self) -> usize {
        self.lambda_domain().dim()
    }

    fn strong_convexity(&self) -> f64;

    fn smoothness(&self) -> f64;

    fn value(&self, theta: &[f64], lambda: &[f64]) -> f64;

    /// Writes `∇_θ h(θ, λ)` into `grad` and returns `h(θ, λ)`.
    fn value_grad(&self, theta: &[f64], lambda: &[f64], grad: &mut [f64]) -> f64;

    /// Closed-form minimizer, when one is known.
    fn exact_solution(&self, _lambda: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

#[inline]
pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
