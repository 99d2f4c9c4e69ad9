//! Ground truth on a grid, solution path error, and inequality audits.

mod audit;
mod chebyshev;

pub use audit::{
    decomposition_audit, perturbed_samples, rwgc_audit, AuditConstants, AuditReport, AuditSample,
};
pub use chebyshev::{
    chebyshev_coeffs, chebyshev_eval, fit_algebraic_order, fit_geometric_rate, local_cubic,
    truncation_path_error_bound, DecayFit,
};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{contract, Basis};
use crate::distribution::QuadratureRule;
use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::optimize::{gd_solve_until, quadrature_objective, Monitor, Observation};
use crate::problems::ParametricProblem;
use crate::seeded_rng;

/// Default grid resolution for a 1-D hyperparameter.
pub const TRUTH_POINTS_1D: usize = 1024;
/// Default points per axis for a 2-D hyperparameter.
pub const TRUTH_POINTS_2D: usize = 100;
/// Default sample size in three or more dimensions.
pub const TRUTH_SAMPLES: usize = 1000;

/// Where ground truth is computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    /// Tensor grid with endpoints, last axis fastest.
    Uniform { per_axis: usize },
    /// Seeded uniform draws from the box.
    Random { n: usize, seed: u64 },
}

impl GridSpec {
    pub fn default_for(domain: &BoxDomain) -> Self {
        match domain.dim() {
            1 => GridSpec::Uniform {
                per_axis: TRUTH_POINTS_1D,
            },
            2 => GridSpec::Uniform {
                per_axis: TRUTH_POINTS_2D,
            },
            _ => GridSpec::Random {
                n: TRUTH_SAMPLES,
                seed: 0,
            },
        }
    }

    /// Flat node list.
    pub fn nodes(&self, domain: &BoxDomain) -> Result<Vec<f64>> {
        let dim = domain.dim();
        match *self {
            GridSpec::Uniform { per_axis } => {
                if per_axis == 0 {
                    return Err(Error::config("grid.per_axis", "must be positive"));
                }
                let total = per_axis
                    .checked_pow(dim as u32)
                    .filter(|&n| n <= 1 << 22)
                    .ok_or_else(|| Error::config("grid.per_axis", "grid is too large"))?;
                let axes: Vec<Vec<f64>> = (0..dim).map(|k| domain.axis_grid(k, per_axis)).collect();
                let mut out = Vec::with_capacity(total * dim);
                let mut idx = vec![0usize; dim];
                for _ in 0..total {
                    for (k, &i) in idx.iter().enumerate() {
                        out.push(axes[k][i]);
                    }
                    for k in (0..dim).rev() {
                        idx[k] += 1;
                        if idx[k] < per_axis {
                            break;
                        }
                        idx[k] = 0;
                    }
                }
                Ok(out)
            }
            GridSpec::Random { n, seed } => {
                if n == 0 {
                    return Err(Error::config("grid.n", "must be positive"));
                }
                let mut rng = seeded_rng(seed);
                let mut out = Vec::with_capacity(n * dim);
                for _ in 0..n {
                    for k in 0..dim {
                        out.push(domain.lo[k] + rng.random::<f64>() * domain.width(k));
                    }
                }
                Ok(out)
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            GridSpec::Uniform { per_axis } => format!("uniform, {per_axis} points per axis"),
            GridSpec::Random { n, seed } => format!("{n} random points (seed {seed})"),
        }
    }
}

/// How ground truth is obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthOptions {
    /// Gradient-descent iterations per node (upper limit).
    #[serde(default = "default_gt_iterations")]
    pub iterations: usize,
    /// Residual certificate `‖∇_θ h(θ*(λ), λ)‖ ≤ tol`.
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
    /// Use the problem's closed form when it has one.
    #[serde(default = "default_true")]
    pub use_exact: bool,
}

fn default_gt_iterations() -> usize {
    5000
}

fn default_residual_tol() -> f64 {
    1e-7
}

fn default_true() -> bool {
    true
}

impl Default for GroundTruthOptions {
    fn default() -> Self {
        Self {
            iterations: default_gt_iterations(),
            residual_tol: default_residual_tol(),
            use_exact: true,
        }
    }
}

/// `θ*(λᵢ)`, `h*(λᵢ)` and residual gradient norms on a set of nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruthGrid {
    pub lambda_dim: usize,
    pub d: usize,
    /// Flat `n × lambda_dim`.
    pub lambdas: Vec<f64>,
    /// Flat `n × d`.
    pub thetas: Vec<f64>,
    pub values: Vec<f64>,
    pub residuals: Vec<f64>,
    pub resolution: String,
}

impl GroundTruthGrid {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn lambda(&self, i: usize) -> &[f64] {
        &self.lambdas[i * self.lambda_dim..(i + 1) * self.lambda_dim]
    }

    pub fn theta(&self, i: usize) -> &[f64] {
        &self.thetas[i * self.d..(i + 1) * self.d]
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Warm-started gradient descent along the grid with step `1/L`, or the
/// closed form where available, then a stationarity certificate at every
/// node.
pub fn compute_ground_truth(
    problem: &dyn ParametricProblem,
    spec: &GridSpec,
    options: &GroundTruthOptions,
) -> Result<GroundTruthGrid> {
    let domain = problem.lambda_domain();
    let nodes = spec.nodes(domain)?;
    let ld = domain.dim();
    let d = problem.dim();
    let n = nodes.len() / ld;
    let step = 1.0 / problem.smoothness();
    let mut thetas = Vec::with_capacity(n * d);
    let mut values = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    let mut warm = vec![0.0; d];
    let mut g = vec![0.0; d];
    for i in 0..n {
        let lam = &nodes[i * ld..(i + 1) * ld];
        let exact = if options.use_exact {
            problem.exact_solution(lam)
        } else {
            None
        };
        let theta = match exact {
            Some(t) => t,
            None => {
                let out = gd_solve_until(
                    problem,
                    lam,
                    &warm,
                    options.iterations,
                    step,
                    0.01 * options.residual_tol,
                )?;
                out.theta
            }
        };
        let v = problem.value_grad(&theta, lam, &mut g);
        let r = norm(&g);
        if !(r <= options.residual_tol) {
            return Err(Error::Residual {
                node: i,
                lambda: lam.to_vec(),
                residual: r,
                tolerance: options.residual_tol,
            });
        }
        warm.copy_from_slice(&theta);
        thetas.extend_from_slice(&theta);
        values.push(v);
        residuals.push(r);
    }
    Ok(GroundTruthGrid {
        lambda_dim: ld,
        d,
        lambdas: nodes,
        thetas,
        values,
        residuals,
        resolution: spec.describe(),
    })
}

/// Grid sup of the optimality gap and the per-node gaps.
#[derive(Clone, Debug)]
pub struct PathError {
    pub sup: f64,
    pub gaps: Vec<f64>,
    pub resolution: String,
}

/// `ε̂_sp = max_i h(θ̂(λᵢ), λᵢ) - h*(λᵢ)` for an arbitrary path.
pub fn path_error<F>(
    problem: &dyn ParametricProblem,
    path: F,
    truth: &GroundTruthGrid,
) -> Result<PathError>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    check_truth(problem, truth)?;
    let gaps: Vec<f64> = (0..truth.len())
        .into_par_iter()
        .with_min_len(64)
        .map(|i| {
            let lam = truth.lambda(i);
            problem.value(&path(lam), lam) - truth.values[i]
        })
        .collect();
    finish(gaps, truth)
}

/// Path error of `Φ(λ)β`.
pub fn path_error_coeffs(
    problem: &dyn ParametricProblem,
    basis: &Basis,
    beta: &[f64],
    truth: &GroundTruthGrid,
) -> Result<PathError> {
    check_truth(problem, truth)?;
    if beta.len() != basis.p() {
        return Err(Error::Dimension {
            what: "coefficients",
            expected: basis.p(),
            found: beta.len(),
        });
    }
    for i in 0..truth.len() {
        basis.domain().check(truth.lambda(i))?;
    }
    let (q, d) = (basis.q(), basis.d());
    let idx: Vec<usize> = (0..truth.len()).collect();
    let gaps: Vec<f64> = idx
        .par_chunks(64)
        .flat_map_iter(|chunk| {
            let mut psi = vec![0.0; q];
            let mut theta = vec![0.0; d];
            chunk
                .iter()
                .map(|&i| {
                    let lam = truth.lambda(i);
                    basis.features_unchecked(lam, &mut psi);
                    contract(&psi, beta, &mut theta);
                    problem.value(&theta, lam) - truth.values[i]
                })
                .collect::<Vec<_>>()
        })
        .collect();
    finish(gaps, truth)
}

fn check_truth(problem: &dyn ParametricProblem, truth: &GroundTruthGrid) -> Result<()> {
    if truth.lambda_dim != problem.lambda_dim() || truth.d != problem.dim() {
        return Err(Error::GridMismatch(format!(
            "ground truth has (lambda_dim, d) = ({}, {}), problem has ({}, {})",
            truth.lambda_dim,
            truth.d,
            problem.lambda_dim(),
            problem.dim()
        )));
    }
    Ok(())
}

fn finish(gaps: Vec<f64>, truth: &GroundTruthGrid) -> Result<PathError> {
    if let Some(i) = gaps.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFinite {
            what: "path error",
            node: i,
        });
    }
    let sup = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(PathError {
        sup,
        gaps,
        resolution: truth.resolution.clone(),
    })
}

/// Records the quadrature objective and/or the grid path error.
pub struct PathMonitor<'a> {
    pub problem: &'a dyn ParametricProblem,
    pub basis: &'a Basis,
    pub rule: Option<&'a QuadratureRule>,
    pub truth: Option<&'a GroundTruthGrid>,
}

impl Monitor for PathMonitor<'_> {
    fn observe(&mut self, beta: &[f64]) -> Result<Observation> {
        let objective = self
            .rule
            .map(|r| quadrature_objective(self.problem, self.basis, r, beta));
        let path_error = match self.truth {
            Some(t) => Some(path_error_coeffs(self.problem, self.basis, beta, t)?.sup),
            None => None,
        };
        Ok(Observation {
            objective,
            path_error,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{Portfolio12D, QuadraticToy, TargetPath};

    #[test]
    fn toy_truth_is_exact() {
        let p = QuadraticToy::on_symmetric_unit(TargetPath::Power(3));
        let opts = GroundTruthOptions {
            use_exact: false,
            ..Default::default()
        };
        let t = compute_ground_truth(&p, &GridSpec::Uniform { per_axis: 33 }, &opts).unwrap();
        for i in 0..t.len() {
            let l = t.lambda(i)[0];
            assert!((t.theta(i)[0] - l * l * l).abs() < 1e-15);
        }
        assert!(t.max_residual() <= 1e-7);
    }

    #[test]
    fn zero_path_error_on_toy() {
        let p = QuadraticToy::on_symmetric_unit(TargetPath::Power(1));
        let t = compute_ground_truth(
            &p,
            &GridSpec::Uniform { per_axis: 1024 },
            &Default::default(),
        )
        .unwrap();
        let e = path_error(&p, |_| vec![0.0], &t).unwrap();
        assert!((e.sup - 0.5).abs() < 1e-15);
        let exact = path_error(&p, |l| vec![l[0]], &t).unwrap();
        assert_eq!(exact.sup, 0.0);
        assert!(exact.gaps.iter().all(|&g| g >= -1e-12));
    }

    #[test]
    fn coefficient_path_error_matches_closure() {
        let p = QuadraticToy::on_symmetric_unit(TargetPath::Power(2));
        let t = compute_ground_truth(
            &p,
            &GridSpec::Uniform { per_axis: 101 },
            &Default::default(),
        )
        .unwrap();
        let b = Basis::legendre(2, 1);
        let beta = [0.3, 0.7];
        let a = path_error_coeffs(&p, &b, &beta, &t).unwrap();
        let c = path_error(&p, |l| vec![0.3 + 0.7 * l[0]], &t).unwrap();
        assert!((a.sup - c.sup).abs() < 1e-14);
    }

    #[test]
    fn twelve_dim_gd_matches_oracle() {
        let m = crate::problems::synth_market(1, 10).unwrap();
        let p = Portfolio12D::new(m).unwrap();
        let spec = GridSpec::Random { n: 50, seed: 3 };
        let gd = compute_ground_truth(
            &p,
            &spec,
            &GroundTruthOptions {
                use_exact: false,
                ..Default::default()
            },
        )
        .unwrap();
        let exact = compute_ground_truth(&p, &spec, &Default::default()).unwrap();
        for (a, b) in gd.thetas.iter().zip(&exact.thetas) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}
