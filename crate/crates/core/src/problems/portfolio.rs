use super::{MarketModel, ParametricProblem};
use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve};

/// Smoothing width of the `ℓ1` surrogate `Σ √(θᵢ² + ε²) - ε`.
pub const SMOOTH_L1_EPS: f64 = 0.01;

fn smooth_l1(theta: &[f64], grad: Option<&mut [f64]>) -> f64 {
    let e2 = SMOOTH_L1_EPS * SMOOTH_L1_EPS;
    let mut v = 0.0;
    match grad {
        Some(g) => {
            for (gk, t) in g.iter_mut().zip(theta) {
                let r = (t * t + e2).sqrt();
                v += r - SMOOTH_L1_EPS;
                *gk += t / r;
            }
        }
        None => {
            for t in theta {
                v += (t * t + e2).sqrt() - SMOOTH_L1_EPS;
            }
        }
    }
    v
}

/// Writes `Σθ` into `out` and returns `θᵀΣθ`.
fn quad_form(sigma: &[f64], theta: &[f64], out: &mut [f64]) -> f64 {
    let d = theta.len();
    let mut q = 0.0;
    for a in 0..d {
        let row = &sigma[a * d..(a + 1) * d];
        let s: f64 = row.iter().zip(theta).map(|(x, y)| x * y).sum();
        out[a] = s;
        q += theta[a] * s;
    }
    q
}

/// Mean-variance allocation with a smoothed `ℓ1` penalty,
/// `h(θ, λ) = -λ₁ μᵀθ + λ₂ θᵀΣθ + ℓ̄₁(θ)`.
#[derive(Clone, Debug)]
pub struct Portfolio2D {
    market: MarketModel,
    domain: BoxDomain,
    mu: f64,
    l: f64,
}

impl Portfolio2D {
    /// Hyperparameter box `[0, 1] × [0.2, 1]`.
    pub fn new(market: MarketModel) -> Result<Self> {
        Self::with_domain(market, BoxDomain::new(vec![0.0, 0.2], vec![1.0, 1.0])?)
    }

    pub fn with_domain(market: MarketModel, domain: BoxDomain) -> Result<Self> {
        if domain.dim() != 2 {
            return Err(Error::Dimension {
                what: "portfolio_2d hyperparameter box",
                expected: 2,
                found: domain.dim(),
            });
        }
        let (smin, smax) = market.eigen_range()?;
        let mu = 2.0 * domain.lo[1] * smin.max(0.0);
        if !(mu > 0.0) {
            return Err(Error::Conditioning(format!(
                "portfolio_2d needs λ₂ > 0 and a positive definite covariance (λ₂_min = {}, σ_min = {smin:e})",
                domain.lo[1]
            )));
        }
        let l = 2.0 * domain.hi[1] * smax + 1.0 / SMOOTH_L1_EPS;
        Ok(Self {
            market,
            domain,
            mu,
            l,
        })
    }

    pub fn market(&self) -> &MarketModel {
        &self.market
    }
}

impl ParametricProblem for Portfolio2D {
    fn name(&self) -> &str {
        "portfolio_2d"
    }

    fn dim(&self) -> usize {
        self.market.dim()
    }

    fn lambda_domain(&self) -> &BoxDomain {
        &self.domain
    }

    fn strong_convexity(&self) -> f64 {
        self.mu
    }

    fn smoothness(&self) -> f64 {
        self.l
    }

    fn value(&self, theta: &[f64], lambda: &[f64]) -> f64 {
        let mut tmp = vec![0.0; theta.len()];
        let q = quad_form(&self.market.covariance, theta, &mut tmp);
        let lin: f64 = self.market.mean.iter().zip(theta).map(|(m, t)| m * t).sum();
        -lambda[0] * lin + lambda[1] * q + smooth_l1(theta, None)
    }

    fn value_grad(&self, theta: &[f64], lambda: &[f64], grad: &mut [f64]) -> f64 {
        let q = quad_form(&self.market.covariance, theta, grad);
        let mut lin = 0.0;
        for ((g, m), t) in grad.iter_mut().zip(&self.market.mean).zip(theta) {
            *g = 2.0 * lambda[1] * *g - lambda[0] * m;
            lin += m * t;
        }
        -lambda[0] * lin + lambda[1] * q + smooth_l1(theta, Some(grad))
    }
}

/// Mean-variance allocation with a quadratic pull towards a reference
/// portfolio, `h(θ, λ) = -λ₁ μᵀθ + λ₂ θᵀΣθ + ‖θ - λ_{3:12}‖²`.
#[derive(Clone, Debug)]
pub struct Portfolio12D {
    market: MarketModel,
    domain: BoxDomain,
    mu: f64,
    l: f64,
}

impl Portfolio12D {
    /// `λ₁ ∈ [0, 1]`, `λ₂ ∈ [0.2, 1]`, `λ_{3:12} ∈ [0, 1]¹⁰`.
    pub fn new(market: MarketModel) -> Result<Self> {
        let mut lo = vec![0.0; 12];
        lo[1] = 0.2;
        Self::with_domain(market, BoxDomain::new(lo, vec![1.0; 12])?)
    }

    pub fn with_domain(market: MarketModel, domain: BoxDomain) -> Result<Self> {
        if market.dim() != 10 {
            return Err(Error::Dimension {
                what: "portfolio_12d assets",
                expected: 10,
                found: market.dim(),
            });
        }
        if domain.dim() != 12 {
            return Err(Error::Dimension {
                what: "portfolio_12d hyperparameter box",
                expected: 12,
                found: domain.dim(),
            });
        }
        if domain.lo[1] < 0.0 {
            return Err(Error::config("lambda_box", "λ₂ must be nonnegative"));
        }
        let (smin, smax) = market.eigen_range()?;
        Ok(Self {
            mu: 2.0 + 2.0 * domain.lo[1] * smin.max(0.0),
            l: 2.0 + 2.0 * domain.hi[1] * smax.max(0.0),
            market,
            domain,
        })
    }

    pub fn market(&self) -> &MarketModel {
        &self.market
    }

    /// `θ*(λ) = ½ (I + λ₂Σ)⁻¹ (λ₁μ + 2λ_{3:12})`.
    pub fn analytic_path(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        analytic_path_12d(&self.market, lambda)
    }
}

/// Closed-form minimizer of the 12-hyperparameter portfolio problem.
pub fn analytic_path_12d(market: &MarketModel, lambda: &[f64]) -> Result<Vec<f64>> {
    if lambda.len() != 12 {
        return Err(Error::Dimension {
            what: "portfolio_12d hyperparameter",
            expected: 12,
            found: lambda.len(),
        });
    }
    let d = market.dim();
    let mut a = market
        .covariance
        .iter()
        .map(|s| lambda[1] * s)
        .collect::<Vec<_>>();
    for k in 0..d {
        a[k * d + k] += 1.0;
    }
    let chol = cholesky(&a, d)?;
    let rhs: Vec<f64> = (0..d)
        .map(|k| 0.5 * (lambda[0] * market.mean[k] + 2.0 * lambda[2 + k]))
        .collect();
    Ok(cholesky_solve(&chol, d, &rhs))
}

impl ParametricProblem for Portfolio12D {
    fn name(&self) -> &str {
        "portfolio_12d"
    }

    fn dim(&self) -> usize {
        10
    }

    fn lambda_domain(&self) -> &BoxDomain {
        &self.domain
    }

    fn strong_convexity(&self) -> f64 {
        self.mu
    }

    fn smoothness(&self) -> f64 {
        self.l
    }

    fn value(&self, theta: &[f64], lambda: &[f64]) -> f64 {
        let mut tmp = [0.0; 10];
        let q = quad_form(&self.market.covariance, theta, &mut tmp);
        let lin: f64 = self.market.mean.iter().zip(theta).map(|(m, t)| m * t).sum();
        let pull: f64 = theta
            .iter()
            .zip(&lambda[2..])
            .map(|(t, w)| (t - w).powi(2))
            .sum();
        -lambda[0] * lin + lambda[1] * q + pull
    }

    fn value_grad(&self, theta: &[f64], lambda: &[f64], grad: &mut [f64]) -> f64 {
        let q = quad_form(&self.market.covariance, theta, grad);
        let mut lin = 0.0;
        let mut pull = 0.0;
        for k in 0..10 {
            let r = theta[k] - lambda[2 + k];
            grad[k] = 2.0 * lambda[1] * grad[k] - lambda[0] * self.market.mean[k] + 2.0 * r;
            lin += self.market.mean[k] * theta[k];
            pull += r * r;
        }
        -lambda[0] * lin + lambda[1] * q + pull
    }

    fn exact_solution(&self, lambda: &[f64]) -> Option<Vec<f64>> {
        self.analytic_path(lambda).ok()
    }
}
