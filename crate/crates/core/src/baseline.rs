//! Uniform discretization with a calibrated per-point work schedule,
//! warm-started solves and piecewise-constant interpolation.

use serde::{Deserialize, Serialize};

use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::evaluate::GroundTruthGrid;
use crate::optimize::{gd_solve, RunTrace, TraceRow};
use crate::problems::ParametricProblem;

/// `⌈1/√δ⌉` points per axis and `⌈c₁ ln(c₂/δ)⌉` gradient steps per point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationSchedule {
    pub delta: f64,
    pub c1: f64,
    pub c2: f64,
    pub points_per_axis: usize,
    pub steps_per_point: usize,
}

impl DiscretizationSchedule {
    pub fn total_points(&self, dim: usize) -> usize {
        self.points_per_axis.pow(dim as u32)
    }

    pub fn total_gradient_calls(&self, dim: usize) -> u64 {
        (self.steps_per_point * self.total_points(dim)) as u64
    }
}

/// Slack for ceilings of values that are integers up to roundoff.
const CEIL_SLACK: f64 = 1e-9;

fn ceil_tight(x: f64) -> f64 {
    (x - CEIL_SLACK * x.abs().max(1.0)).ceil()
}

pub fn make_schedule(delta: f64, c1: f64, c2: f64) -> Result<DiscretizationSchedule> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Schedule(format!("δ = {delta} must be positive")));
    }
    if !(c1 > 0.0 && c2 > 0.0) {
        return Err(Error::Schedule(format!(
            "constants c₁ = {c1}, c₂ = {c2} must be positive"
        )));
    }
    if delta >= c2 {
        return Err(Error::Schedule(format!(
            "δ = {delta} must be below c₂ = {c2} for a positive step count"
        )));
    }
    let points = ceil_tight(1.0 / delta.sqrt()).max(1.0) as usize;
    let steps = ceil_tight(c1 * (c2 / delta).ln()).max(1.0) as usize;
    Ok(DiscretizationSchedule {
        delta,
        c1,
        c2,
        points_per_axis: points,
        steps_per_point: steps,
    })
}

/// Calibrated constants and target set for the two experiment families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleFamily {
    /// `c₁ = 1`, `c₂ = 0.5`, `Δ = {2^-6, 2^-6.5, …, 2^-18}`.
    Classification,
    /// `c₁ = 0.65`, `c₂ = 1`, `Δ = {4^-2, 5^-2, …, 19^-2}`.
    Portfolio,
}

impl ScheduleFamily {
    pub fn constants(self) -> (f64, f64) {
        match self {
            ScheduleFamily::Classification => (1.0, 0.5),
            ScheduleFamily::Portfolio => (0.65, 1.0),
        }
    }

    pub fn deltas(self) -> Vec<f64> {
        match self {
            ScheduleFamily::Classification => {
                (12..=36).map(|k| 2f64.powf(-(k as f64) / 2.0)).collect()
            }
            ScheduleFamily::Portfolio => (4..=19).map(|m| 1.0 / (m * m) as f64).collect(),
        }
    }

    pub fn schedules(self) -> Result<Vec<DiscretizationSchedule>> {
        let (c1, c2) = self.constants();
        self.deltas()
            .into_iter()
            .map(|d| make_schedule(d, c1, c2))
            .collect()
    }
}

/// Nearest-grid-point interpolation of per-node solutions.
#[derive(Clone, Debug)]
pub struct PiecewisePath {
    domain: BoxDomain,
    per_axis: usize,
    d: usize,
    /// Flat `n × d`, nodes in lexicographic order (last axis fastest).
    thetas: Vec<f64>,
}

impl PiecewisePath {
    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    pub fn len(&self) -> usize {
        self.thetas.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn node(&self, i: usize) -> Vec<f64> {
        let digits = unflatten(i, self.per_axis, self.domain.dim());
        digits
            .iter()
            .enumerate()
            .map(|(k, &j)| axis_point(&self.domain, k, self.per_axis, j))
            .collect()
    }

    pub fn solution(&self, i: usize) -> &[f64] {
        &self.thetas[i * self.d..(i + 1) * self.d]
    }

    /// Solution at the nearest node; ties go to the lower index.
    pub fn lookup(&self, lambda: &[f64]) -> &[f64] {
        let n = self.per_axis;
        let mut flat = 0;
        for (k, &x) in lambda.iter().enumerate() {
            let j = if n == 1 {
                0
            } else {
                let h = self.domain.width(k) / (n - 1) as f64;
                let t = (x - self.domain.lo[k]) / h;
                ((t - 0.5).ceil().max(0.0) as usize).min(n - 1)
            };
            flat = flat * n + j;
        }
        self.solution(flat)
    }
}

fn axis_point(domain: &BoxDomain, axis: usize, n: usize, j: usize) -> f64 {
    domain.axis_grid(axis, n)[j]
}

fn unflatten(mut i: usize, n: usize, dim: usize) -> Vec<usize> {
    let mut digits = vec![0; dim];
    for k in (0..dim).rev() {
        digits[k] = i % n;
        i /= n;
    }
    digits
}

/// Boustrophedon order: the `t`-th visited multi-index. Each axis reverses
/// direction whenever the sum of the outer digits is odd, so consecutive
/// nodes are always adjacent.
fn serpentine(t: usize, n: usize, dim: usize) -> Vec<usize> {
    let raw = unflatten(t, n, dim);
    let mut out = vec![0; dim];
    let mut outer_sum = 0;
    for k in 0..dim {
        out[k] = if outer_sum % 2 == 1 {
            n - 1 - raw[k]
        } else {
            raw[k]
        };
        outer_sum += out[k];
    }
    out
}

/// Solves every grid node with `steps_per_point` gradient steps of size
/// `1/L`, warm-starting from the previously visited node (the first from
/// zero). The trace has one row per node.
pub fn run_discretization(
    problem: &dyn ParametricProblem,
    schedule: &DiscretizationSchedule,
) -> Result<(PiecewisePath, RunTrace)> {
    let domain = problem.lambda_domain().clone();
    let dim = domain.dim();
    let n = schedule.points_per_axis;
    let total = n
        .checked_pow(dim as u32)
        .filter(|&t| t <= 1 << 24)
        .ok_or_else(|| Error::Schedule(format!("{n}^{dim} grid points is too many")))?;
    let axes: Vec<Vec<f64>> = (0..dim).map(|k| domain.axis_grid(k, n)).collect();
    let d = problem.dim();
    let step = 1.0 / problem.smoothness();
    let mut thetas = vec![0.0; total * d];
    let mut warm = vec![0.0; d];
    let mut trace = RunTrace::default();
    let mut calls = 0u64;
    let mut lam = vec![0.0; dim];
    for t in 0..total {
        let digits = serpentine(t, n, dim);
        let mut flat = 0;
        for (k, &j) in digits.iter().enumerate() {
            lam[k] = axes[k][j];
            flat = flat * n + j;
        }
        let theta = gd_solve(problem, &lam, &warm, schedule.steps_per_point, step)?;
        calls += schedule.steps_per_point as u64;
        thetas[flat * d..(flat + 1) * d].copy_from_slice(&theta);
        warm = theta;
        trace.rows.push(TraceRow {
            iteration: t + 1,
            gradient_calls: calls,
            step_size: step,
            objective: None,
            path_error: None,
            stage: 0,
        });
    }
    Ok((
        PiecewisePath {
            domain,
            per_axis: n,
            d,
            thetas,
        },
        trace,
    ))
}

/// `max_i h(θ̂(λᵢ), λᵢ) - h(θ*(λᵢ), λᵢ)` over the discretization nodes.
pub fn grid_pass_error(
    path: &PiecewisePath,
    problem: &dyn ParametricProblem,
    truth: &GroundTruthGrid,
) -> Result<f64> {
    if truth.len() != path.len() || truth.lambda_dim != path.domain.dim() || truth.d != path.d {
        return Err(Error::GridMismatch(format!(
            "ground truth has {} nodes, the discretization has {}",
            truth.len(),
            path.len()
        )));
    }
    let mut worst = f64::NEG_INFINITY;
    for i in 0..path.len() {
        let node = path.node(i);
        let lam = truth.lambda(i);
        let off = node
            .iter()
            .zip(lam)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if off > 1e-12 {
            return Err(Error::GridMismatch(format!(
                "node {i} is at {node:?} in the discretization but {lam:?} in the ground truth"
            )));
        }
        worst = worst.max(problem.value(path.solution(i), lam) - truth.values[i]);
    }
    Ok(worst)
}
