use super::{sigmoid, softplus, ClassificationData, ParametricProblem};
use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigenvalues;

/// Class-reweighted logistic regression,
/// `h(θ, λ) = (1 - λ) ℓ_pos(θ) + λ ℓ_neg(θ) + ridge ‖θ‖²` with `λ ∈ [0, 1]`.
#[derive(Clone, Debug)]
pub struct WeightedLogistic {
    data: ClassificationData,
    ridge: f64,
    domain: BoxDomain,
    l_pos: f64,
    l_neg: f64,
}

impl WeightedLogistic {
    pub fn new(data: ClassificationData, ridge: f64) -> Result<Self> {
        if !(ridge > 0.0 && ridge.is_finite()) {
            return Err(Error::config(
                "ridge",
                format!("must be positive, got {ridge}"),
            ));
        }
        let l_pos = class_curvature(&data, data.positives())?;
        let l_neg = class_curvature(&data, data.negatives())?;
        Ok(Self {
            data,
            ridge,
            domain: BoxDomain::unit_cube(1),
            l_pos,
            l_neg,
        })
    }

    pub fn data(&self) -> &ClassificationData {
        &self.data
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    /// Mean logistic loss over one class; writes the gradient scaled by
    /// `weight` into `grad` when given.
    fn class_loss(
        &self,
        idx: &[usize],
        theta: &[f64],
        weight: f64,
        grad: Option<&mut [f64]>,
    ) -> f64 {
        let inv = 1.0 / idx.len() as f64;
        let mut total = 0.0;
        match grad {
            Some(g) => {
                for &i in idx {
                    let x = self.data.row(i);
                    let sign = 1.0 - 2.0 * self.data.label(i) as f64;
                    let z = sign * x.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>();
                    total += softplus(z);
                    let s = weight * inv * sign * sigmoid(z);
                    for (gk, xk) in g.iter_mut().zip(x) {
                        *gk += s * xk;
                    }
                }
            }
            None => {
                for &i in idx {
                    let x = self.data.row(i);
                    let sign = 1.0 - 2.0 * self.data.label(i) as f64;
                    let z = sign * x.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>();
                    total += softplus(z);
                }
            }
        }
        total * inv
    }
}

fn class_curvature(data: &ClassificationData, idx: &[usize]) -> Result<f64> {
    let d = data.dim();
    let mut gram = vec![0.0; d * d];
    for &i in idx {
        let x = data.row(i);
        for a in 0..d {
            for b in a..d {
                gram[a * d + b] += x[a] * x[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            gram[a * d + b] = gram[b * d + a];
        }
    }
    let ev = symmetric_eigenvalues(&gram, d)?;
    Ok(ev[d - 1].max(0.0) / (4.0 * idx.len() as f64))
}

impl ParametricProblem for WeightedLogistic {
    fn name(&self) -> &str {
        "weighted_logistic"
    }

    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn lambda_domain(&self) -> &BoxDomain {
        &self.domain
    }

    fn strong_convexity(&self) -> f64 {
        2.0 * self.ridge
    }

    fn smoothness(&self) -> f64 {
        2.0 * self.ridge + self.l_pos.max(self.l_neg)
    }

    fn value(&self, theta: &[f64], lambda: &[f64]) -> f64 {
        let lam = lambda[0];
        let pos = self.class_loss(self.data.positives(), theta, 0.0, None);
        let neg = self.class_loss(self.data.negatives(), theta, 0.0, None);
        let reg: f64 = theta.iter().map(|t| t * t).sum();
        (1.0 - lam) * pos + lam * neg + self.ridge * reg
    }

    fn value_grad(&self, theta: &[f64], lambda: &[f64], grad: &mut [f64]) -> f64 {
        let lam = lambda[0];
        for (g, t) in grad.iter_mut().zip(theta) {
            *g = 2.0 * self.ridge * t;
        }
        let pos = self.class_loss(self.data.positives(), theta, 1.0 - lam, Some(grad));
        let neg = self.class_loss(self.data.negatives(), theta, lam, Some(grad));
        let reg: f64 = theta.iter().map(|t| t * t).sum();
        (1.0 - lam) * pos + lam * neg + self.ridge * reg
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::synth_classification;
    use crate::problems::testing::{curvature_slack, fd_gradient_error};

    fn problem() -> WeightedLogistic {
        let data = synth_classification(11, 200, 6, 0.1).unwrap();
        WeightedLogistic::new(data, 0.125).unwrap()
    }

    #[test]
    fn value_at_origin_is_log_two() {
        let p = problem();
        for lam in [0.0, 0.3, 1.0] {
            let v = p.value(&[0.0; 6], &[lam]);
            assert!((v - std::f64::consts::LN_2).abs() < 1e-14);
        }
    }

    #[test]
    fn declared_moduli() {
        let p = problem();
        assert_eq!(p.strong_convexity(), 0.25);
        assert!(p.smoothness() > p.strong_convexity());
    }

    #[test]
    fn gradient_and_curvature_checks() {
        let p = problem();
        assert!(fd_gradient_error(&p, 50, 3) < 1e-5);
        assert!(curvature_slack(&p, 50, 4) >= 0.0);
    }

    #[test]
    fn nonpositive_ridge_rejected() {
        let data = synth_classification(11, 50, 3, 0.2).unwrap();
        assert!(WeightedLogistic::new(data, 0.0).is_err());
    }
}
