//! The constants `C = sup_λ σ_max(Φ(λ)ᵀΦ(λ))` and
//! `c = σ_min(E[Φ(λ̃)ᵀΦ(λ̃)])` that condition the coefficient problem.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::Basis;
use crate::distribution::QuadratureRule;
use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigenvalues;
use crate::seeded_rng;

/// Search points per axis for a 1-D box.
pub const GRID_1D: usize = 4096;
/// Search points per axis for a 2-D box.
pub const GRID_2D: usize = 1025;
/// Random interior points added to the corners in 3 or more dimensions.
pub const GRID_RANDOM: usize = 4096;

/// Points at which `‖ψ(λ)‖²` is maximized.
#[derive(Clone, Debug)]
pub struct SearchGrid {
    dim: usize,
    points: Vec<f64>,
    label: String,
}

impl SearchGrid {
    /// Uniform tensor grid with `per_axis` points per axis, endpoints
    /// included.
    pub fn uniform(domain: &BoxDomain, per_axis: usize) -> Result<Self> {
        let dim = domain.dim();
        let total = per_axis
            .checked_pow(dim as u32)
            .filter(|&n| n > 0 && n <= 1 << 24)
            .ok_or_else(|| {
                Error::config(
                    "search_grid",
                    format!("{per_axis}^{dim} points is out of range"),
                )
            })?;
        let axes: Vec<Vec<f64>> = (0..dim).map(|k| domain.axis_grid(k, per_axis)).collect();
        let mut points = Vec::with_capacity(total * dim);
        let mut idx = vec![0usize; dim];
        for _ in 0..total {
            for (k, &i) in idx.iter().enumerate() {
                points.push(axes[k][i]);
            }
            for k in (0..dim).rev() {
                idx[k] += 1;
                if idx[k] < per_axis {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(Self {
            dim,
            points,
            label: format!("uniform {per_axis}^{dim}"),
        })
    }

    /// Box corners plus `n` seeded uniform draws.
    pub fn corners_and_random(domain: &BoxDomain, n: usize, seed: u64) -> Self {
        let dim = domain.dim();
        let mut points: Vec<f64> = domain.corners().into_iter().flatten().collect();
        let mut rng = seeded_rng(seed);
        for _ in 0..n {
            for k in 0..dim {
                points.push(domain.lo[k] + rng.random::<f64>() * domain.width(k));
            }
        }
        let corners = 1usize << dim;
        Self {
            dim,
            points,
            label: format!("{corners} corners + {n} random"),
        }
    }

    /// Default grid for the basis domain.
    pub fn default_for(domain: &BoxDomain) -> Result<Self> {
        match domain.dim() {
            1 => Self::uniform(domain, GRID_1D),
            2 => Self::uniform(domain, GRID_2D),
            _ => Ok(Self::corners_and_random(domain, GRID_RANDOM, 0)),
        }
    }

    pub fn from_points(dim: usize, points: Vec<f64>) -> Result<Self> {
        if dim == 0 || !points.len().is_multiple_of(dim) {
            return Err(Error::Dimension {
                what: "search grid",
                expected: dim,
                found: points.len(),
            });
        }
        let n = points.len() / dim;
        Ok(Self {
            dim,
            points,
            label: format!("{n} explicit points"),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks(self.dim)
    }
}

/// `max_λ ‖ψ(λ)‖²` over the grid; for block-diagonal `Φ` this equals
/// `σ_max(Φ(λ)ᵀΦ(λ))` pointwise.
pub fn compute_c_sup(basis: &Basis, grid: &SearchGrid) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::config("search_grid", "grid is empty"));
    }
    if grid.dim() != basis.lambda_dim() {
        return Err(Error::Dimension {
            what: "search grid",
            expected: basis.lambda_dim(),
            found: grid.dim(),
        });
    }
    for p in grid.points() {
        basis.domain().check(p)?;
    }
    let q = basis.q();
    let dim = grid.dim();
    let best = grid
        .points
        .par_chunks(dim * 256)
        .map(|chunk| {
            let mut psi = vec![0.0; q];
            let mut m = 0.0f64;
            for p in chunk.chunks(dim) {
                basis.features_unchecked(p, &mut psi);
                m = m.max(psi.iter().map(|x| x * x).sum());
            }
            m
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

/// `C` on the default search grid for the basis domain.
pub fn compute_c_sup_default(basis: &Basis) -> Result<f64> {
    compute_c_sup(basis, &SearchGrid::default_for(basis.domain())?)
}

/// Per-block Gram matrix `E[ψψᵀ]` (row-major `q × q`).
pub fn block_gram(basis: &Basis, rule: &QuadratureRule) -> Result<Vec<f64>> {
    if let (Some(avail), Some(deg)) = (rule.exact_degree(), basis.max_axis_degree()) {
        if avail < 2 * deg {
            return Err(Error::Exactness {
                required: 2 * deg,
                available: avail,
            });
        }
    }
    if rule.dim() != basis.lambda_dim() {
        return Err(Error::Dimension {
            what: "quadrature rule",
            expected: basis.lambda_dim(),
            found: rule.dim(),
        });
    }
    let q = basis.q();
    let mut gram = vec![0.0; q * q];
    let mut psi = vec![0.0; q];
    for (node, w) in rule.iter() {
        basis.eval_features_into(node, &mut psi)?;
        for a in 0..q {
            let s = w * psi[a];
            for b in a..q {
                gram[a * q + b] += s * psi[b];
            }
        }
    }
    for a in 0..q {
        for b in 0..a {
            gram[a * q + b] = gram[b * q + a];
        }
    }
    Ok(gram)
}

/// Smallest eigenvalue of `E[Φᵀ Φ]`. The matrix is block diagonal with `d`
/// copies of the per-block Gram, so its spectrum is that of one block.
pub fn compute_c_min(basis: &Basis, rule: &QuadratureRule) -> Result<f64> {
    let q = basis.q();
    if q == 0 {
        return Err(Error::config("q", "basis has no features"));
    }
    let gram = block_gram(basis, rule)?;
    Ok(symmetric_eigenvalues(&gram, q)?[0])
}

/// Condition number of `E[Φᵀ Q(λ̃) Φ]`, the Hessian of the coefficient
/// problem when `h(·, λ)` is quadratic with Hessian `Q(λ)`.
pub fn hessian_condition_quadratic<F>(
    hessian: F,
    basis: &Basis,
    rule: &QuadratureRule,
) -> Result<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let (q, d, p) = (basis.q(), basis.d(), basis.p());
    let mut m = vec![0.0; p * p];
    let mut psi = vec![0.0; q];
    for (node, w) in rule.iter() {
        basis.eval_features_into(node, &mut psi)?;
        let qm = hessian(node);
        if qm.len() != d * d {
            return Err(Error::Dimension {
                what: "hessian",
                expected: d * d,
                found: qm.len(),
            });
        }
        for i in 0..d {
            for j in 0..d {
                let qij = w * qm[i * d + j];
                if qij == 0.0 {
                    continue;
                }
                for k in 0..q {
                    let s = qij * psi[k];
                    let row = (i * q + k) * p + j * q;
                    for l in 0..q {
                        m[row + l] += s * psi[l];
                    }
                }
            }
        }
    }
    let ev = symmetric_eigenvalues(&m, p)?;
    let (lo, hi) = (ev[0], ev[p - 1]);
    if !(lo > 1e-14 * hi.abs().max(f64::MIN_POSITIVE)) {
        return Err(Error::Conditioning(format!(
            "assembled Hessian has eigenvalue range [{lo:e}, {hi:e}]"
        )));
    }
    Ok(hi / lo)
}

/// `C`, `c` and their ratio for one basis/distribution pair.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub q: usize,
    pub c_sup: f64,
    pub c_min: f64,
    pub ratio: f64,
    pub grid: String,
    pub grid_points: usize,
    pub quadrature_nodes: usize,
}

impl SpectralReport {
    pub fn compute(basis: &Basis, grid: &SearchGrid, rule: &QuadratureRule) -> Result<Self> {
        let c_sup = compute_c_sup(basis, grid)?;
        let c_min = compute_c_min(basis, rule)?;
        Ok(Self {
            q: basis.q(),
            c_sup,
            c_min,
            ratio: c_sup / c_min,
            grid: grid.label().to_owned(),
            grid_points: grid.len(),
            quadrature_nodes: rule.len(),
        })
    }
}
