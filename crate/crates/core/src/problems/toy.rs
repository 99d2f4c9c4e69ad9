use super::ParametricProblem;
use crate::domain::BoxDomain;
use crate::error::{Error, Result};

/// Known scalar path shapes for the quadratic test problem.
#[derive(Clone, Debug, PartialEq)]
pub enum TargetPath {
    /// `λ^k`
    Power(u32),
    /// `exp(λ)`
    Exp,
    /// `sin(ω λ)`
    Sin(f64),
    /// `1 / (1 + 25 λ²)`
    Runge,
}

impl TargetPath {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TargetPath::Power(k) => x.powi(*k as i32),
            TargetPath::Exp => x.exp(),
            TargetPath::Sin(w) => (w * x).sin(),
            TargetPath::Runge => 1.0 / (1.0 + 25.0 * x * x),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(k) = s.strip_prefix("pow") {
            return k
                .parse()
                .map(TargetPath::Power)
                .map_err(|_| Error::config("target", format!("bad power in `{s}`")));
        }
        if let Some(w) = s.strip_prefix("sin") {
            let w = if w.is_empty() { Ok(1.0) } else { w.parse() };
            return w
                .map(TargetPath::Sin)
                .map_err(|_| Error::config("target", format!("bad frequency in `{s}`")));
        }
        match s {
            "identity" | "linear" => Ok(TargetPath::Power(1)),
            "exp" => Ok(TargetPath::Exp),
            "runge" => Ok(TargetPath::Runge),
            _ => Err(Error::config(
                "target",
                format!("unknown target path `{s}` (expected powK, exp, sinW, runge)"),
            )),
        }
    }
}

/// `h(θ, λ) = ½ ‖θ - g(λ)‖²` with `g_i(λ) = (1 + i/2) f(λ)`.
///
/// The minimizer is `g(λ)` with value zero, and `μ = L = 1`.
#[derive(Clone, Debug)]
pub struct QuadraticToy {
    target: TargetPath,
    d: usize,
    domain: BoxDomain,
    name: String,
}

impl QuadraticToy {
    pub fn new(target: TargetPath, d: usize, domain: BoxDomain) -> Result<Self> {
        if domain.dim() != 1 {
            return Err(Error::Dimension {
                what: "toy hyperparameter box",
                expected: 1,
                found: domain.dim(),
            });
        }
        if d == 0 {
            return Err(Error::Construction {
                what: "quadratic toy",
                message: "d must be positive".into(),
            });
        }
        let name = format!("quadratic_toy({target:?}, d={d})");
        Ok(Self {
            target,
            d,
            domain,
            name,
        })
    }

    /// Scalar toy on `[-1, 1]`.
    pub fn on_symmetric_unit(target: TargetPath) -> Self {
        Self::new(target, 1, BoxDomain::symmetric_unit()).expect("valid toy")
    }

    pub fn target(&self) -> &TargetPath {
        &self.target
    }

    pub fn path(&self, lambda: f64) -> Vec<f64> {
        let f = self.target.eval(lambda);
        (0..self.d).map(|i| (1.0 + 0.5 * i as f64) * f).collect()
    }
}

impl ParametricProblem for QuadraticToy {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.d
    }

    fn lambda_domain(&self) -> &BoxDomain {
        &self.domain
    }

    fn strong_convexity(&self) -> f64 {
        1.0
    }

    fn smoothness(&self) -> f64 {
        1.0
    }

    fn value(&self, theta: &[f64], lambda: &[f64]) -> f64 {
        let f = self.target.eval(lambda[0]);
        theta
            .iter()
            .enumerate()
            .map(|(i, t)| 0.5 * (t - (1.0 + 0.5 * i as f64) * f).powi(2))
            .sum()
    }

    fn value_grad(&self, theta: &[f64], lambda: &[f64], grad: &mut [f64]) -> f64 {
        let f = self.target.eval(lambda[0]);
        let mut v = 0.0;
        for (i, (t, g)) in theta.iter().zip(grad.iter_mut()).enumerate() {
            let r = t - (1.0 + 0.5 * i as f64) * f;
            *g = r;
            v += 0.5 * r * r;
        }
        v
    }

    fn exact_solution(&self, lambda: &[f64]) -> Option<Vec<f64>> {
        Some(self.path(lambda[0]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::testing::{curvature_slack, fd_gradient_error};

    #[test]
    fn value_and_gradient_by_hand() {
        let p = QuadraticToy::on_symmetric_unit(TargetPath::Power(1));
        let mut g = [0.0];
        let v = p.value_grad(&[0.4], &[0.1], &mut g);
        assert!((v - 0.045).abs() < 1e-15);
        assert!((g[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn minimizer_has_zero_value() {
        let p = QuadraticToy::on_symmetric_unit(TargetPath::Power(2));
        let lam = 0.6;
        let mut g = [1.0];
        let v = p.value_grad(&[lam * lam], &[lam], &mut g);
        assert_eq!(v, 0.0);
        assert_eq!(g[0], 0.0);
    }

    #[test]
    fn gradient_and_curvature_checks() {
        let p = QuadraticToy::new(TargetPath::Exp, 3, BoxDomain::symmetric_unit()).unwrap();
        assert!(fd_gradient_error(&p, 50, 1) < 1e-4);
        assert!(curvature_slack(&p, 50, 2) >= 0.0);
    }

    #[test]
    fn parse_targets() {
        assert_eq!(TargetPath::parse("pow3").unwrap(), TargetPath::Power(3));
        assert_eq!(TargetPath::parse("identity").unwrap(), TargetPath::Power(1));
        assert_eq!(TargetPath::parse("sin2.5").unwrap(), TargetPath::Sin(2.5));
        assert!(TargetPath::parse("cosh").is_err());
    }
}
