//! Distributions over the hyperparameter box and matching quadrature rules.
//!
//! Quadrature weights follow the expectation convention: they are positive
//! and sum to one, so `expect(rule, f)` approximates `E[f(λ̃)]` directly.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::basis::legendre_into;
use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;

/// Largest tensor-product rule we are willing to build.
pub const MAX_QUADRATURE_NODES: usize = 1 << 22;

/// Default Gauss order per axis for 1-D audits.
pub const DEFAULT_ORDER_1D: usize = 64;
/// Default Gauss order per axis for 2-D audits.
pub const DEFAULT_ORDER_2D: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LambdaDistribution {
    /// Uniform on a box of any dimension.
    UniformBox { support: BoxDomain },
    /// `Beta(a, b)` on `[0, 1]`.
    Beta { a: f64, b: f64 },
    /// Uniform on a 2-D box.
    TensorUniform2D { support: BoxDomain },
}

impl LambdaDistribution {
    pub fn uniform(support: BoxDomain) -> Self {
        LambdaDistribution::UniformBox { support }
    }

    pub fn beta(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::Construction {
                what: "beta distribution",
                message: format!("shape parameters must be positive, got ({a}, {b})"),
            });
        }
        Ok(LambdaDistribution::Beta { a, b })
    }

    pub fn tensor_uniform(support: BoxDomain) -> Result<Self> {
        if support.dim() != 2 {
            return Err(Error::Dimension {
                what: "tensor uniform support",
                expected: 2,
                found: support.dim(),
            });
        }
        Ok(LambdaDistribution::TensorUniform2D { support })
    }

    pub fn support(&self) -> BoxDomain {
        match self {
            LambdaDistribution::UniformBox { support }
            | LambdaDistribution::TensorUniform2D { support } => support.clone(),
            LambdaDistribution::Beta { .. } => BoxDomain::unit_cube(1),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            LambdaDistribution::UniformBox { support } => support.dim(),
            LambdaDistribution::TensorUniform2D { .. } => 2,
            LambdaDistribution::Beta { .. } => 1,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.sample_into(rng, &mut out);
        out
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            LambdaDistribution::UniformBox { support }
            | LambdaDistribution::TensorUniform2D { support } => {
                for (k, o) in out.iter_mut().enumerate() {
                    let u: f64 = rng.random();
                    *o = support.lo[k] + u * support.width(k);
                }
            }
            LambdaDistribution::Beta { a, b } => {
                // X / (X + Y) with X ~ Gamma(a), Y ~ Gamma(b)
                let gx = Gamma::new(*a, 1.0).expect("positive shape");
                let gy = Gamma::new(*b, 1.0).expect("positive shape");
                loop {
                    let x: f64 = gx.sample(rng);
                    let y: f64 = gy.sample(rng);
                    let s = x + y;
                    if s > 0.0 && s.is_finite() {
                        out[0] = (x / s).clamp(0.0, 1.0);
                        break;
                    }
                }
            }
        }
    }

    /// Gauss rule with `order` nodes per axis.
    pub fn quadrature(&self, order: usize) -> Result<QuadratureRule> {
        if order == 0 {
            return Err(Error::Capability(
                "quadrature order must be at least 1".into(),
            ));
        }
        match self {
            LambdaDistribution::UniformBox { support }
            | LambdaDistribution::TensorUniform2D { support } => {
                let dim = support.dim();
                let total = order
                    .checked_pow(dim as u32)
                    .filter(|&n| n <= MAX_QUADRATURE_NODES);
                let Some(total) = total else {
                    return Err(Error::Capability(format!(
                        "tensor Gauss rule with {order} nodes on each of {dim} axes is too large"
                    )));
                };
                let (x, w) = gauss_legendre(order);
                let mut nodes = Vec::with_capacity(total * dim);
                let mut weights = Vec::with_capacity(total);
                let mut idx = vec![0usize; dim];
                for _ in 0..total {
                    let mut wt = 1.0;
                    for (k, &i) in idx.iter().enumerate() {
                        nodes.push(support.from_reference(k, x[i]));
                        wt *= w[i];
                    }
                    weights.push(wt);
                    // last axis fastest
                    for k in (0..dim).rev() {
                        idx[k] += 1;
                        if idx[k] < order {
                            break;
                        }
                        idx[k] = 0;
                    }
                }
                Ok(QuadratureRule {
                    dim,
                    nodes,
                    weights,
                    exact_degree: Some(2 * order - 1),
                })
            }
            LambdaDistribution::Beta { a, b } => {
                // Beta(a, b) on [0, 1] is the Jacobi weight (1-x)^(b-1) (1+x)^(a-1)
                let (x, w) = gauss_jacobi(order, b - 1.0, a - 1.0)?;
                Ok(QuadratureRule {
                    dim: 1,
                    nodes: x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
                    weights: w,
                    exact_degree: Some(2 * order - 1),
                })
            }
        }
    }

    /// Default rule: 64 nodes for 1-D, 32 per axis for 2-D.
    pub fn default_quadrature(&self) -> Result<QuadratureRule> {
        match self.dim() {
            1 => self.quadrature(DEFAULT_ORDER_1D),
            2 => self.quadrature(DEFAULT_ORDER_2D),
            k => Err(Error::Capability(format!(
                "no default quadrature for {k}-dimensional hyperparameters; use a sample rule"
            ))),
        }
    }

    /// Equal-weight rule on `n` i.i.d. draws (an empirical, ERM-style
    /// objective).
    pub fn sample_rule<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> QuadratureRule {
        let dim = self.dim();
        let mut nodes = vec![0.0; n * dim];
        for chunk in nodes.chunks_mut(dim) {
            self.sample_into(rng, chunk);
        }
        QuadratureRule {
            dim,
            nodes,
            weights: vec![1.0 / n as f64; n],
            exact_degree: None,
        }
    }
}

/// Nodes in `Λ` with positive weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    exact_degree: Option<usize>,
}

impl QuadratureRule {
    pub fn new(dim: usize, nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 || nodes.len() != dim * weights.len() {
            return Err(Error::Dimension {
                what: "quadrature nodes",
                expected: dim * weights.len(),
                found: nodes.len(),
            });
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::Construction {
                what: "quadrature rule",
                message: "weights must be positive".into(),
            });
        }
        let s: f64 = weights.iter().sum();
        Ok(Self {
            dim,
            nodes,
            weights: weights.into_iter().map(|w| w / s).collect(),
            exact_degree: None,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.nodes
            .chunks(self.dim)
            .zip(self.weights.iter().copied())
    }

    /// Polynomial degree per axis integrated exactly, for Gauss rules.
    pub fn exact_degree(&self) -> Option<usize> {
        self.exact_degree
    }

    /// `Σ wᵢ f(nodeᵢ)`.
    pub fn expect<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> Result<f64> {
        let mut acc = 0.0;
        for (i, (x, w)) in self.iter().enumerate() {
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: "integrand",
                    node: i,
                });
            }
            acc += w * v;
        }
        Ok(acc)
    }

    /// CSV with one row per node: coordinates then weight.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.dim).map(|k| format!("lambda{k}")).collect();
        header.push("weight".into());
        w.write_record(&header)?;
        for (x, wt) in self.iter() {
            let mut row: Vec<String> = x.iter().map(|v| format!("{v:e}")).collect();
            row.push(format!("{wt:e}"));
            w.write_record(&row)?;
        }
        w.flush()
    }
}

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`, weights
/// normalized to sum to one. Roots by Newton iteration on the three-term
/// recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut p = vec![0.0; n + 1];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..NEWTON_MAX_ITER {
            legendre_into(z, &mut p);
            let pn = p[n];
            let pm = p[n - 1];
            let deriv = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / deriv;
            z -= dz;
            if dz.abs() <= NEWTON_TOL {
                break;
            }
        }
        legendre_into(z, &mut p);
        let deriv = n as f64 * (z * p[n] - p[n - 1]) / (z * z - 1.0);
        let wt = 1.0 / ((1.0 - z * z) * deriv * deriv);
        // z is the i-th largest root
        x[n - 1 - i] = z;
        x[i] = -z;
        w[n - 1 - i] = wt;
        w[i] = wt;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    (x, w)
}

/// Gauss–Jacobi rule for the weight `(1-x)^alpha (1+x)^beta` on `[-1, 1]`
/// via the Golub–Welsch eigenproblem of the Jacobi matrix. Weights are
/// normalized to sum to one.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(alpha > -1.0 && beta > -1.0) {
        return Err(Error::Capability(format!(
            "Jacobi weight needs alpha, beta > -1, got ({alpha}, {beta})"
        )));
    }
    let (a, b) = (alpha, beta);
    let mut j = vec![0.0; n * n];
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        j[k * n + k] = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        if k + 1 < n {
            let m = kf + 1.0;
            let sm = 2.0 * m + a + b;
            let off2 = if k == 0 {
                4.0 * (1.0 + a) * (1.0 + b) / ((a + b + 2.0).powi(2) * (a + b + 3.0))
            } else {
                4.0 * m * (m + a) * (m + b) * (m + a + b) / (sm * sm * (sm + 1.0) * (sm - 1.0))
            };
            let off = off2.sqrt();
            j[k * n + k + 1] = off;
            j[(k + 1) * n + k] = off;
        }
    }
    let eig = symmetric_eigen(&j, n)?;
    let x = eig.values.clone();
    let w: Vec<f64> = (0..n).map(|k| eig.vectors[k].powi(2)).collect();
    let s: f64 = w.iter().sum();
    Ok((x, w.into_iter().map(|v| v / s).collect()))
}
