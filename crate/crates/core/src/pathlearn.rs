//! Fixed-basis (LSP) and adaptive-basis (ALSP) path learning.

use serde::{Deserialize, Serialize};

use crate::basis::{contract, Basis, Coefficients};
use crate::distribution::{LambdaDistribution, QuadratureRule};
use crate::error::{Error, Result};
use crate::evaluate::{GroundTruthGrid, PathMonitor};
use crate::optimize::{
    attach_partial, constant_step, record, run_sgd, Observation, RunTrace, SgdConfig, SgdRunner,
};
use crate::problems::ParametricProblem;
use crate::spectral::SearchGrid;

/// SGD on a fixed basis from `β₀ = 0`, recording `F̂` when a rule is given
/// and `ε_sp` when ground truth is given.
pub fn run_lsp(
    problem: &dyn ParametricProblem,
    basis: &Basis,
    dist: &LambdaDistribution,
    config: &SgdConfig,
    rule: Option<&QuadratureRule>,
    truth: Option<&GroundTruthGrid>,
) -> Result<RunTrace> {
    let mut monitor = PathMonitor {
        problem,
        basis,
        rule,
        truth,
    };
    run_sgd(problem, basis, dist, config, None, &mut monitor)
}

/// Copies `β` into the slots of the extended basis; new slots are zero.
pub fn warm_start_pad(beta: &Coefficients, old: &Basis, new: &Basis) -> Result<Coefficients> {
    old.check_binding(beta)?;
    let map = old.embedding_into(new)?;
    let (qo, qn) = (old.q(), new.q());
    let mut out = vec![0.0; new.p()];
    for i in 0..old.d() {
        for (k, &slot) in map.iter().enumerate() {
            out[i * qn + slot] = beta.values[i * qo + k];
        }
    }
    Coefficients::new(new, out)
}

/// Largest coordinate difference between two coefficient paths over the
/// default search grid of `a`'s domain.
pub fn path_discrepancy(a: &Basis, beta_a: &[f64], b: &Basis, beta_b: &[f64]) -> Result<f64> {
    let grid = match a.lambda_dim() {
        1 => SearchGrid::uniform(a.domain(), 1025)?,
        2 => SearchGrid::uniform(a.domain(), 65)?,
        _ => SearchGrid::corners_and_random(a.domain(), 1024, 1),
    };
    let pa = LearnedPath::new(a.clone(), beta_a.to_vec())?;
    let pb = LearnedPath::new(b.clone(), beta_b.to_vec())?;
    let mut worst = 0.0f64;
    for lam in grid.points() {
        let x = pa.eval(lam)?;
        let y = pb.eval(lam)?;
        for (u, v) in x.iter().zip(&y) {
            worst = worst.max((u - v).abs());
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlspConfig {
    pub initial_q: usize,
    pub max_q: usize,
    /// Checkpoints compared by the stall test.
    #[serde(default = "default_window")]
    pub stall_window: usize,
    /// Relative improvement of `F̂` below which a stage has stalled.
    #[serde(default = "default_stall_tol")]
    pub stall_tol: f64,
    /// Iterations between quadrature evaluations of `F̂`.
    #[serde(default = "default_cadence")]
    pub eval_cadence: usize,
    /// Step rule and total iteration budget.
    pub sgd: SgdConfig,
}

fn default_window() -> usize {
    3
}

fn default_stall_tol() -> f64 {
    1e-3
}

fn default_cadence() -> usize {
    200
}

impl AlspConfig {
    pub fn new(initial_q: usize, max_q: usize, sgd: SgdConfig) -> Self {
        Self {
            initial_q,
            max_q,
            stall_window: default_window(),
            stall_tol: default_stall_tol(),
            eval_cadence: default_cadence(),
            sgd,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sgd.validate()?;
        if self.initial_q == 0 {
            return Err(Error::config("initial_q", "must be at least 1"));
        }
        if self.max_q < self.initial_q {
            return Err(Error::config(
                "max_q",
                format!("{} is below initial_q = {}", self.max_q, self.initial_q),
            ));
        }
        if !(self.stall_tol > 0.0) {
            return Err(Error::config("stall_tol", "must be positive"));
        }
        if self.stall_window == 0 {
            return Err(Error::config("stall_window", "must be at least 1"));
        }
        if self.eval_cadence == 0 {
            return Err(Error::config("eval_cadence", "must be at least 1"));
        }
        Ok(())
    }
}

/// Outcome of one ALSP stage.
#[derive(Clone, Debug)]
pub struct StageResult {
    pub q: usize,
    pub coefficients: Coefficients,
    /// Cumulative gradient calls at the end of the stage.
    pub gradient_calls: u64,
    pub start_objective: f64,
    pub objective: f64,
    pub path_error: Option<f64>,
    /// Iteration at which the stage ended.
    pub boundary_iteration: usize,
    /// Path discrepancy introduced by padding into this stage.
    pub pad_discrepancy: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct AlspResult {
    pub stages: Vec<StageResult>,
    pub trace: RunTrace,
    pub final_basis: Basis,
}

/// Stall test: the best `F̂` of the last `window` checkpoints against the best
/// before them (or the stage start).
fn stalled(start: f64, checks: &[f64], window: usize, tol: f64) -> bool {
    if tol.is_infinite() {
        return true;
    }
    if checks.len() < window {
        return false;
    }
    let split = checks.len() - window;
    let reference = checks[..split].iter().copied().fold(start, f64::min);
    let recent = checks[split..]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let improvement = (reference - recent) / reference.abs().max(f64::MIN_POSITIVE);
    improvement < tol
}

/// Algorithm 1: SGD on a growing basis. Every `eval_cadence` iterations the
/// quadrature objective is evaluated; when it stalls the basis is extended,
/// the coefficients padded, and SGD continues with the step recomputed for
/// the larger basis. Stops at `max_q` or after `sgd.iterations` iterations
/// in total.
pub fn run_alsp(
    problem: &dyn ParametricProblem,
    family: &Basis,
    dist: &LambdaDistribution,
    config: &AlspConfig,
    rule: &QuadratureRule,
    truth: Option<&GroundTruthGrid>,
) -> Result<AlspResult> {
    config.validate()?;
    let sgd = &config.sgd;
    let basis = family.with_q(config.initial_q)?;
    let eta = constant_step(problem, &basis, sgd.eta_bar)?;
    let mut runner = SgdRunner::new(
        problem,
        &basis,
        dist,
        &Coefficients::zeros(&basis),
        eta,
        sgd.seed,
        &sgd.controller,
    )?;
    let mut trace = RunTrace::default();
    let mut stages: Vec<StageResult> = Vec::new();
    let mut checks: Vec<f64> = Vec::new();
    let mut pad: Option<f64> = None;
    let mut start = observe_and_record(&mut trace, &runner, problem, rule, truth, 0)?
        .objective
        .unwrap_or(f64::INFINITY);

    while runner.iteration() < sgd.iterations {
        if let Err(e) = runner.step() {
            trace.final_coefficients = Some(runner.coefficients());
            return Err(attach_partial(e, trace));
        }
        let t = runner.iteration();
        let last = t == sgd.iterations;
        if t % config.eval_cadence != 0 && !last {
            continue;
        }
        let obs = observe_and_record(&mut trace, &runner, problem, rule, truth, stages.len())?;
        let f = obs.objective.unwrap_or(f64::NAN);
        checks.push(f);
        let stall = stalled(start, &checks, config.stall_window, config.stall_tol);
        let next = runner.basis().extend()?;
        let can_grow = next.q() <= config.max_q;
        let result = StageResult {
            q: runner.basis().q(),
            coefficients: runner.coefficients(),
            gradient_calls: runner.gradient_calls(),
            start_objective: start,
            objective: f,
            path_error: obs.path_error,
            boundary_iteration: t,
            pad_discrepancy: pad,
        };
        if last || (stall && !can_grow) {
            stages.push(result);
            break;
        }
        if !stall {
            continue;
        }
        let old_beta = result.coefficients.clone();
        stages.push(result);
        let padded = warm_start_pad(&old_beta, runner.basis(), &next)?;
        pad = Some(path_discrepancy(
            runner.basis(),
            &old_beta.values,
            &next,
            &padded.values,
        )?);
        let eta = constant_step(problem, &next, sgd.eta_bar)?;
        runner = runner.rebind(&next, &padded, eta, &sgd.controller)?;
        checks.clear();
        start = rule_objective(problem, &next, rule, &padded.values);
    }
    if stages.is_empty() {
        stages.push(StageResult {
            q: runner.basis().q(),
            coefficients: runner.coefficients(),
            gradient_calls: runner.gradient_calls(),
            start_objective: start,
            objective: start,
            path_error: trace.last().and_then(|r| r.path_error),
            boundary_iteration: runner.iteration(),
            pad_discrepancy: pad,
        });
    }
    trace.final_coefficients = Some(runner.coefficients());
    Ok(AlspResult {
        stages,
        final_basis: runner.basis().clone(),
        trace,
    })
}

fn rule_objective(
    problem: &dyn ParametricProblem,
    basis: &Basis,
    rule: &QuadratureRule,
    beta: &[f64],
) -> f64 {
    crate::optimize::quadrature_objective(problem, basis, rule, beta)
}

fn observe_and_record(
    trace: &mut RunTrace,
    runner: &SgdRunner<'_>,
    problem: &dyn ParametricProblem,
    rule: &QuadratureRule,
    truth: Option<&GroundTruthGrid>,
    stage: usize,
) -> Result<Observation> {
    let mut monitor = PathMonitor {
        problem,
        basis: runner.basis(),
        rule: Some(rule),
        truth,
    };
    record(trace, runner, &mut monitor, stage)
}

/// `λ ↦ Φ(λ)β̂`.
#[derive(Clone, Debug)]
pub struct LearnedPath {
    basis: Basis,
    beta: Vec<f64>,
}

impl LearnedPath {
    pub fn new(basis: Basis, beta: Vec<f64>) -> Result<Self> {
        if beta.len() != basis.p() {
            return Err(Error::Dimension {
                what: "coefficients",
                expected: basis.p(),
                found: beta.len(),
            });
        }
        Ok(Self { basis, beta })
    }

    pub fn from_coefficients(basis: &Basis, beta: &Coefficients) -> Result<Self> {
        basis.check_binding(beta)?;
        Self::new(basis.clone(), beta.values.clone())
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn eval(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        let psi = self.basis.eval_features(lambda)?;
        let mut out = vec![0.0; self.basis.d()];
        contract(&psi, &self.beta, &mut out);
        Ok(out)
    }

    /// Evaluates at a flat list of points; returns a flat `n × d` array.
    pub fn eval_many(&self, lambdas: &[f64]) -> Result<Vec<f64>> {
        let ld = self.basis.lambda_dim();
        let d = self.basis.d();
        let mut psi = vec![0.0; self.basis.q()];
        let mut out = vec![0.0; lambdas.len() / ld * d];
        for (lam, o) in lambdas.chunks(ld).zip(out.chunks_mut(d)) {
            self.basis.eval_features_into(lam, &mut psi)?;
            contract(&psi, &self.beta, o);
        }
        Ok(out)
    }
}

/// Thin constructor for [`LearnedPath`].
pub fn learned_path(beta: &Coefficients, basis: &Basis) -> Result<LearnedPath> {
    LearnedPath::from_coefficients(basis, beta)
}
