//! Constant-step SGD in coefficient space, the distance diagnostic step
//! controller, and deterministic gradient descent.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{contract, pullback_axpy, Basis, Coefficients};
use crate::distribution::{LambdaDistribution, QuadratureRule};
use crate::error::{Error, Result};
use crate::linalg::{dist_sq, norm};
use crate::problems::ParametricProblem;
use crate::{seeded_rng, PathRng};

/// Step-size schedule for SGD.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Controller {
    #[default]
    ConstantStep,
    DistanceDiagnostic(DiagnosticParams),
}

/// Parameters of the distance diagnostic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticParams {
    /// Ratio between successive checkpoint offsets.
    #[serde(default = "default_q_diag")]
    pub q_diag: f64,
    /// Step multiplier applied when the diagnostic fires.
    #[serde(default = "default_reduction")]
    pub reduction_factor: f64,
    /// Minimum log-log slope of `‖β_t - β_anchor‖²` against the offset
    /// `t - anchor`: about 2 while the iterate drifts, 1 for a random walk.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// First checkpoint at offset `⌈q_diag^burn_in⌉`.
    #[serde(default = "default_burn_in")]
    pub burn_in: u32,
}

fn default_q_diag() -> f64 {
    1.3
}

fn default_reduction() -> f64 {
    0.5
}

fn default_threshold() -> f64 {
    0.6
}

fn default_burn_in() -> u32 {
    20
}

impl Default for DiagnosticParams {
    fn default() -> Self {
        Self {
            q_diag: default_q_diag(),
            reduction_factor: default_reduction(),
            threshold: default_threshold(),
            burn_in: default_burn_in(),
        }
    }
}

impl Controller {
    pub fn distance_diagnostic() -> Self {
        Controller::DistanceDiagnostic(DiagnosticParams::default())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgdConfig {
    /// `η̄` in `η = η̄ / (C L)`.
    #[serde(default = "default_eta_bar")]
    pub eta_bar: f64,
    pub iterations: usize,
    #[serde(default)]
    pub seed: u64,
    /// Trace cadence in iterations.
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default)]
    pub controller: Controller,
}

fn default_eta_bar() -> f64 {
    1.0
}

fn default_record_every() -> usize {
    100
}

impl SgdConfig {
    pub fn new(iterations: usize, seed: u64) -> Self {
        Self {
            eta_bar: 1.0,
            iterations,
            seed,
            record_every: default_record_every(),
            controller: Controller::ConstantStep,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta_bar > 0.0 && self.eta_bar <= 1.0) {
            return Err(Error::config(
                "eta_bar",
                format!(
                    "{} is outside (0, 1]; the convergence guarantee for η = η̄/(C L) needs 0 < η̄ ≤ 1",
                    self.eta_bar
                ),
            ));
        }
        if self.record_every == 0 {
            return Err(Error::config("record_every", "must be at least 1"));
        }
        if let Controller::DistanceDiagnostic(p) = &self.controller {
            if !(p.q_diag > 1.0 && p.q_diag.is_finite()) {
                return Err(Error::config("controller.q_diag", "must be greater than 1"));
            }
            if !(p.reduction_factor > 0.0 && p.reduction_factor < 1.0) {
                return Err(Error::config(
                    "controller.reduction_factor",
                    "must lie in (0, 1)",
                ));
            }
            if !p.threshold.is_finite() {
                return Err(Error::config("controller.threshold", "must be finite"));
            }
        }
        Ok(())
    }
}

/// One trace line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub gradient_calls: u64,
    pub step_size: f64,
    pub objective: Option<f64>,
    pub path_error: Option<f64>,
    pub stage: usize,
}

/// Checkpoints of a run plus its final coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
    pub final_coefficients: Option<Coefficients>,
}

impl RunTrace {
    pub const HEADER: [&'static str; 6] = [
        "iteration",
        "gradient_calls",
        "step_size",
        "objective",
        "path_error",
        "stage",
    ];

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn total_gradient_calls(&self) -> u64 {
        self.rows.last().map_or(0, |r| r.gradient_calls)
    }

    pub fn path_errors(&self) -> Vec<(u64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.path_error.map(|e| (r.gradient_calls, e)))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io {
            path: "trace".into(),
            source: std::io::Error::other(e),
        };
        w.write_record(Self::HEADER).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.iteration.to_string(),
                r.gradient_calls.to_string(),
                format_f64(r.step_size),
                r.objective.map(format_f64).unwrap_or_default(),
                r.path_error.map(format_f64).unwrap_or_default(),
                r.stage.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|source| Error::Io {
            path: "trace".into(),
            source,
        })
    }
}

/// Shortest round-trip decimal form.
pub fn format_f64(x: f64) -> String {
    format!("{x:e}")
}

/// Values recorded at a checkpoint.
#[derive(Clone, Copy, Debug, Default)]
pub struct Observation {
    pub objective: Option<f64>,
    pub path_error: Option<f64>,
}

/// Evaluates the current coefficients at trace checkpoints.
pub trait Monitor {
    fn observe(&mut self, beta: &[f64]) -> Result<Observation>;
}

/// Records no objective or path error.
pub struct NoMonitor;

impl Monitor for NoMonitor {
    fn observe(&mut self, _beta: &[f64]) -> Result<Observation> {
        Ok(Observation::default())
    }
}

impl<F: FnMut(&[f64]) -> Result<Observation>> Monitor for F {
    fn observe(&mut self, beta: &[f64]) -> Result<Observation> {
        self(beta)
    }
}

/// Scratch buffers for one SGD step.
#[derive(Clone, Debug)]
pub struct StepScratch {
    psi: Vec<f64>,
    theta: Vec<f64>,
    grad: Vec<f64>,
}

impl StepScratch {
    pub fn new(basis: &Basis) -> Self {
        Self {
            psi: vec![0.0; basis.q()],
            theta: vec![0.0; basis.d()],
            grad: vec![0.0; basis.d()],
        }
    }
}

/// In-place `β ← β - η Φ(λ)ᵀ ∇_θ h(Φ(λ)β, λ)`. Returns `false` when the
/// gradient is not finite, leaving `β` untouched.
#[inline]
fn step_in_place(
    problem: &dyn ParametricProblem,
    basis: &Basis,
    beta: &mut [f64],
    lambda: &[f64],
    eta: f64,
    s: &mut StepScratch,
) -> bool {
    basis.features_unchecked(lambda, &mut s.psi);
    contract(&s.psi, beta, &mut s.theta);
    problem.value_grad(&s.theta, lambda, &mut s.grad);
    if !s.grad.iter().all(|g| g.is_finite()) {
        return false;
    }
    pullback_axpy(&s.psi, &s.grad, -eta, beta);
    true
}

/// One SGD step at a given `λ`; exactly one gradient evaluation.
pub fn sgd_step(
    problem: &dyn ParametricProblem,
    basis: &Basis,
    beta: &Coefficients,
    lambda: &[f64],
    eta: f64,
) -> Result<Coefficients> {
    basis.check_binding(beta)?;
    basis.domain().check(lambda)?;
    check_shapes(problem, basis)?;
    let mut next = beta.values.clone();
    let mut s = StepScratch::new(basis);
    if !step_in_place(problem, basis, &mut next, lambda, eta, &mut s) {
        return Err(Error::Diverged {
            iteration: 0,
            lambda: lambda.to_vec(),
            partial: None,
        });
    }
    Ok(Coefficients {
        values: next,
        basis_id: beta.basis_id,
    })
}

fn check_shapes(problem: &dyn ParametricProblem, basis: &Basis) -> Result<()> {
    if problem.dim() != basis.d() {
        return Err(Error::Dimension {
            what: "basis output dimension",
            expected: problem.dim(),
            found: basis.d(),
        });
    }
    if problem.lambda_dim() != basis.lambda_dim() {
        return Err(Error::Dimension {
            what: "basis hyperparameter dimension",
            expected: problem.lambda_dim(),
            found: basis.lambda_dim(),
        });
    }
    Ok(())
}

/// State of the distance diagnostic. Distances `‖β_t - β_anchor‖` are
/// inspected at `t = anchor + ⌈q^k⌉`, `k = burn_in, burn_in + 1, …`; when the
/// squared distance grows more slowly than `offset^threshold` between two
/// checkpoints the step is reduced and the anchor moves to `β_t`.
#[derive(Clone, Debug)]
pub struct DiagnosticState {
    pub params: DiagnosticParams,
    anchor_iter: usize,
    k: i32,
    next_checkpoint: usize,
    prev: Option<(f64, usize)>,
}

impl DiagnosticState {
    pub fn new(params: DiagnosticParams, start: usize) -> Self {
        let mut s = Self {
            params,
            anchor_iter: start,
            k: 0,
            next_checkpoint: start,
            prev: None,
        };
        s.restart(start);
        s
    }

    fn restart(&mut self, t: usize) {
        self.anchor_iter = t;
        self.next_checkpoint = t;
        self.prev = None;
        self.k = self.params.burn_in as i32 - 1;
        self.advance();
    }

    fn advance(&mut self) {
        let prev = self.next_checkpoint;
        loop {
            self.k += 1;
            let off = self.params.q_diag.powi(self.k).ceil();
            let t = self
                .anchor_iter
                .saturating_add(off.min(usize::MAX as f64) as usize);
            if t > prev {
                self.next_checkpoint = t;
                return;
            }
        }
    }

    /// Whether iteration `t` is a checkpoint.
    pub fn due(&self, t: usize) -> bool {
        t == self.next_checkpoint
    }

    pub fn next_checkpoint(&self) -> usize {
        self.next_checkpoint
    }
}

/// Applies the diagnostic at checkpoint `t` with anchor distance `distance`.
/// Returns the new step and whether the anchor must move to `β_t`.
pub fn distance_diagnostic_update(
    state: &mut DiagnosticState,
    distance: f64,
    t: usize,
    eta: f64,
) -> (f64, bool) {
    let offset = t.saturating_sub(state.anchor_iter);
    let stalled = match state.prev {
        Some((prev_d, prev_off)) if prev_d > 0.0 && distance > 0.0 => {
            let slope = 2.0 * (distance / prev_d).ln() / (offset as f64 / prev_off as f64).ln();
            slope < state.params.threshold
        }
        Some((prev_d, _)) => distance <= prev_d,
        None => false,
    };
    if stalled {
        state.restart(t);
        (eta * state.params.reduction_factor, true)
    } else {
        state.prev = Some((distance, offset));
        state.advance();
        (eta, false)
    }
}

/// A resumable SGD run with its own RNG, iterate and step controller.
pub struct SgdRunner<'a> {
    problem: &'a dyn ParametricProblem,
    basis: Basis,
    dist: &'a LambdaDistribution,
    beta: Vec<f64>,
    eta: f64,
    rng: PathRng,
    iteration: usize,
    gradient_calls: u64,
    diag: Option<(DiagnosticState, Vec<f64>)>,
    lambda: Vec<f64>,
    scratch: StepScratch,
}

impl<'a> SgdRunner<'a> {
    pub fn new(
        problem: &'a dyn ParametricProblem,
        basis: &Basis,
        dist: &'a LambdaDistribution,
        beta0: &Coefficients,
        eta: f64,
        seed: u64,
        controller: &Controller,
    ) -> Result<Self> {
        check_shapes(problem, basis)?;
        basis.check_binding(beta0)?;
        if dist.dim() != basis.lambda_dim() {
            return Err(Error::Dimension {
                what: "distribution",
                expected: basis.lambda_dim(),
                found: dist.dim(),
            });
        }
        let support = dist.support();
        let inside = basis.domain().contains(&support.lo) && basis.domain().contains(&support.hi);
        if !inside {
            return Err(Error::Domain {
                point: support.hi.clone(),
                domain: basis.domain().to_string(),
            });
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::config(
                "step_size",
                format!("{eta} is not a valid step"),
            ));
        }
        let diag = match *controller {
            Controller::ConstantStep => None,
            Controller::DistanceDiagnostic(p) => {
                Some((DiagnosticState::new(p, 0), beta0.values.clone()))
            }
        };
        Ok(Self {
            problem,
            basis: basis.clone(),
            dist,
            beta: beta0.values.clone(),
            eta,
            rng: seeded_rng(seed),
            iteration: 0,
            gradient_calls: 0,
            diag,
            lambda: vec![0.0; basis.lambda_dim()],
            scratch: StepScratch::new(basis),
        })
    }

    /// Continues a run on a new basis, keeping the RNG stream and counters.
    pub fn rebind(
        self,
        basis: &Basis,
        beta0: &Coefficients,
        eta: f64,
        controller: &Controller,
    ) -> Result<Self> {
        let mut next = Self::new(self.problem, basis, self.dist, beta0, eta, 0, controller)?;
        next.rng = self.rng;
        next.iteration = self.iteration;
        next.gradient_calls = self.gradient_calls;
        if let Some((state, _)) = &mut next.diag {
            *state = DiagnosticState::new(state.params, self.iteration);
        }
        Ok(next)
    }

    pub fn step(&mut self) -> Result<()> {
        self.dist.sample_into(&mut self.rng, &mut self.lambda);
        let ok = step_in_place(
            self.problem,
            &self.basis,
            &mut self.beta,
            &self.lambda,
            self.eta,
            &mut self.scratch,
        );
        self.gradient_calls += 1;
        self.iteration += 1;
        if !ok || !self.beta.iter().all(|b| b.is_finite()) {
            return Err(Error::Diverged {
                iteration: self.iteration,
                lambda: self.lambda.clone(),
                partial: None,
            });
        }
        if let Some((state, anchor)) = &mut self.diag {
            if state.due(self.iteration) {
                let d = dist_sq(&self.beta, anchor).sqrt();
                let (eta, reset) = distance_diagnostic_update(state, d, self.iteration, self.eta);
                self.eta = eta;
                if reset {
                    anchor.copy_from_slice(&self.beta);
                }
            }
        }
        Ok(())
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn coefficients(&self) -> Coefficients {
        Coefficients {
            values: self.beta.clone(),
            basis_id: self.basis.id(),
        }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn gradient_calls(&self) -> u64 {
        self.gradient_calls
    }
}

/// `η = η̄ / (C L)` with `C` from the default search grid.
pub fn constant_step(problem: &dyn ParametricProblem, basis: &Basis, eta_bar: f64) -> Result<f64> {
    let c = crate::spectral::compute_c_sup_default(basis)?;
    Ok(eta_bar / (c * problem.smoothness()))
}

/// `T` iterations of SGD from `beta0` (zeros when `None`), recording a trace
/// row at iteration 0, every `record_every` iterations and at the end.
pub fn run_sgd(
    problem: &dyn ParametricProblem,
    basis: &Basis,
    dist: &LambdaDistribution,
    config: &SgdConfig,
    beta0: Option<&Coefficients>,
    monitor: &mut dyn Monitor,
) -> Result<RunTrace> {
    config.validate()?;
    let eta = constant_step(problem, basis, config.eta_bar)?;
    let zeros = Coefficients::zeros(basis);
    let beta0 = beta0.unwrap_or(&zeros);
    let mut runner = SgdRunner::new(
        problem,
        basis,
        dist,
        beta0,
        eta,
        config.seed,
        &config.controller,
    )?;
    let mut trace = RunTrace::default();
    record(&mut trace, &runner, monitor, 0)?;
    while runner.iteration() < config.iterations {
        if let Err(e) = runner.step() {
            trace.final_coefficients = Some(runner.coefficients());
            return Err(attach_partial(e, trace));
        }
        let t = runner.iteration();
        if t % config.record_every == 0 || t == config.iterations {
            record(&mut trace, &runner, monitor, 0)?;
        }
    }
    trace.final_coefficients = Some(runner.coefficients());
    Ok(trace)
}

pub(crate) fn record(
    trace: &mut RunTrace,
    runner: &SgdRunner<'_>,
    monitor: &mut dyn Monitor,
    stage: usize,
) -> Result<Observation> {
    let obs = monitor.observe(runner.beta())?;
    trace.rows.push(TraceRow {
        iteration: runner.iteration(),
        gradient_calls: runner.gradient_calls(),
        step_size: runner.eta(),
        objective: obs.objective,
        path_error: obs.path_error,
        stage,
    });
    Ok(obs)
}

pub(crate) fn attach_partial(e: Error, trace: RunTrace) -> Error {
    match e {
        Error::Diverged {
            iteration, lambda, ..
        } => Error::Diverged {
            iteration,
            lambda,
            partial: Some(Box::new(trace)),
        },
        other => other,
    }
}

/// Full-gradient descent at a fixed `λ`.
pub fn gd_solve(
    problem: &dyn ParametricProblem,
    lambda: &[f64],
    theta0: &[f64],
    iterations: usize,
    step: f64,
) -> Result<Vec<f64>> {
    Ok(gd_solve_until(problem, lambda, theta0, iterations, step, 0.0)?.theta)
}

/// Outcome of [`gd_solve_until`].
#[derive(Clone, Debug)]
pub struct GdOutcome {
    pub theta: Vec<f64>,
    pub iterations: usize,
    /// Gradient norm at the returned iterate (only when measured).
    pub grad_norm: Option<f64>,
}

/// Gradient descent that stops early once `‖∇h‖ ≤ grad_tol`. Each performed
/// iteration costs one gradient call; with `grad_tol = 0` exactly
/// `iterations` steps are taken.
pub fn gd_solve_until(
    problem: &dyn ParametricProblem,
    lambda: &[f64],
    theta0: &[f64],
    iterations: usize,
    step: f64,
    grad_tol: f64,
) -> Result<GdOutcome> {
    if theta0.len() != problem.dim() {
        return Err(Error::Dimension {
            what: "initial point",
            expected: problem.dim(),
            found: theta0.len(),
        });
    }
    let mut theta = theta0.to_vec();
    let mut g = vec![0.0; theta.len()];
    let mut last_norm = None;
    for it in 0..iterations {
        problem.value_grad(&theta, lambda, &mut g);
        let gn = norm(&g);
        if !gn.is_finite() {
            return Err(Error::Diverged {
                iteration: it,
                lambda: lambda.to_vec(),
                partial: None,
            });
        }
        if grad_tol > 0.0 && gn <= grad_tol {
            return Ok(GdOutcome {
                theta,
                iterations: it,
                grad_norm: Some(gn),
            });
        }
        for (t, gi) in theta.iter_mut().zip(&g) {
            *t -= step * gi;
        }
        last_norm = Some(gn);
    }
    if grad_tol > 0.0 {
        problem.value_grad(&theta, lambda, &mut g);
        last_norm = Some(norm(&g));
    }
    Ok(GdOutcome {
        theta,
        iterations,
        grad_norm: last_norm,
    })
}

const OBJECTIVE_CHUNK: usize = 64;

/// `F̂(β) = Σ_i w_i h(Φ(λ_i)β, λ_i)`.
pub fn quadrature_objective(
    problem: &dyn ParametricProblem,
    basis: &Basis,
    rule: &QuadratureRule,
    beta: &[f64],
) -> f64 {
    let (q, d, dim) = (basis.q(), basis.d(), rule.dim());
    let nodes: Vec<(usize, f64)> = rule.weights().iter().copied().enumerate().collect();
    let partials: Vec<f64> = nodes
        .par_chunks(OBJECTIVE_CHUNK)
        .map(|chunk| {
            let mut psi = vec![0.0; q];
            let mut theta = vec![0.0; d];
            let mut s = 0.0;
            for &(i, w) in chunk {
                let lam = rule.node(i);
                debug_assert_eq!(lam.len(), dim);
                basis.features_unchecked(lam, &mut psi);
                contract(&psi, beta, &mut theta);
                s += w * problem.value(&theta, lam);
            }
            s
        })
        .collect();
    partials.iter().sum()
}

/// `F̂(β)` and `∇F̂(β)`.
pub fn quadrature_value_grad(
    problem: &dyn ParametricProblem,
    basis: &Basis,
    rule: &QuadratureRule,
    beta: &[f64],
) -> (f64, Vec<f64>) {
    let (q, d, p) = (basis.q(), basis.d(), basis.p());
    let idx: Vec<usize> = (0..rule.len()).collect();
    let partials: Vec<(f64, Vec<f64>)> = idx
        .par_chunks(OBJECTIVE_CHUNK)
        .map(|chunk| {
            let mut psi = vec![0.0; q];
            let mut theta = vec![0.0; d];
            let mut g = vec![0.0; d];
            let mut acc = vec![0.0; p];
            let mut s = 0.0;
            for &i in chunk {
                let lam = rule.node(i);
                let w = rule.weight(i);
                basis.features_unchecked(lam, &mut psi);
                contract(&psi, beta, &mut theta);
                s += w * problem.value_grad(&theta, lam, &mut g);
                pullback_axpy(&psi, &g, w, &mut acc);
            }
            (s, acc)
        })
        .collect();
    let mut grad = vec![0.0; p];
    let mut value = 0.0;
    for (s, acc) in partials {
        value += s;
        for (a, b) in grad.iter_mut().zip(&acc) {
            *a += b;
        }
    }
    (value, grad)
}

/// Result of [`minimize_average`].
#[derive(Clone, Debug)]
pub struct AverageMinimum {
    pub beta: Vec<f64>,
    pub objective: f64,
    pub grad_norm: f64,
    pub iterations: usize,
}

/// Deterministic minimization of `F̂` over `β`.
///
/// The curvature of `F̂` lies in `[μ c, L σ_max(G)]` where `G` is the block
/// Gram of the rule. Plain gradient descent uses step `1 / (L σ_max(G))`;
/// the accelerated variant adds constant momentum
/// `(√κ - 1) / (√κ + 1)` with `κ` the curvature ratio, with a restart
/// whenever the objective increases. Stops early once a plain gradient
/// step fails to decrease the objective.
pub fn minimize_average(
    problem: &dyn ParametricProblem,
    basis: &Basis,
    rule: &QuadratureRule,
    beta0: &[f64],
    grad_tol: f64,
    max_iter: usize,
    accelerated: bool,
) -> Result<AverageMinimum> {
    check_shapes(problem, basis)?;
    for (node, _) in rule.iter() {
        basis.domain().check(node)?;
    }
    let gram = crate::spectral::block_gram(basis, rule).or_else(|_| gram_unchecked(basis, rule))?;
    let ev = crate::linalg::symmetric_eigenvalues(&gram, basis.q())?;
    let (gmin, gmax) = (ev[0].max(0.0), ev[basis.q() - 1]);
    let l_f = problem.smoothness() * gmax;
    let mu_f = problem.strong_convexity() * gmin;
    let step = 1.0 / l_f;
    let momentum = if accelerated && mu_f > 0.0 {
        let k = (l_f / mu_f).sqrt();
        (k - 1.0) / (k + 1.0)
    } else if accelerated {
        0.9
    } else {
        0.0
    };
    let mut x = beta0.to_vec();
    let mut y = x.clone();
    let (mut fx, _) = quadrature_value_grad(problem, basis, rule, &x);
    let mut it = 0;
    loop {
        let (_, gy) = quadrature_value_grad(problem, basis, rule, &y);
        let x_next: Vec<f64> = y.iter().zip(&gy).map(|(a, g)| a - step * g).collect();
        let (f_next, g_next) = quadrature_value_grad(problem, basis, rule, &x_next);
        if !f_next.is_finite() {
            return Err(Error::Diverged {
                iteration: it,
                lambda: Vec::new(),
                partial: None,
            });
        }
        it += 1;
        let gn = norm(&g_next);
        let stagnant = f_next > fx && y == x;
        if f_next > fx && !stagnant {
            // restart from the last accepted point
            y = x.clone();
        } else if !stagnant {
            let mut y_next = x_next.clone();
            if momentum > 0.0 {
                for ((yn, xn), xo) in y_next.iter_mut().zip(&x_next).zip(&x) {
                    *yn = xn + momentum * (xn - xo);
                }
            }
            x = x_next;
            y = y_next;
            fx = f_next;
        }
        if stagnant || gn <= grad_tol || it >= max_iter {
            let (f, g) = quadrature_value_grad(problem, basis, rule, &x);
            return Ok(AverageMinimum {
                beta: x,
                objective: f,
                grad_norm: norm(&g),
                iterations: it,
            });
        }
    }
}

fn gram_unchecked(basis: &Basis, rule: &QuadratureRule) -> Result<Vec<f64>> {
    let q = basis.q();
    let mut gram = vec![0.0; q * q];
    let mut psi = vec![0.0; q];
    for (node, w) in rule.iter() {
        basis.eval_features_into(node, &mut psi)?;
        for a in 0..q {
            for b in 0..q {
                gram[a * q + b] += w * psi[a] * psi[b];
            }
        }
    }
    Ok(gram)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::BoxDomain;
    use crate::problems::{QuadraticToy, TargetPath};

    fn toy() -> QuadraticToy {
        QuadraticToy::on_symmetric_unit(TargetPath::Power(1))
    }

    #[test]
    fn hand_computed_step() {
        let p = toy();
        let b = Basis::legendre(2, 1);
        let beta = Coefficients::zeros(&b);
        let next = sgd_step(&p, &b, &beta, &[0.5], 1.0).unwrap();
        assert_eq!(next.values, vec![0.5, 0.25]);
        let same = sgd_step(&p, &b, &beta, &[0.5], 0.0).unwrap();
        assert_eq!(same.values, beta.values);
        let opt = Coefficients::new(&b, vec![0.0, 1.0]).unwrap();
        let stay = sgd_step(&p, &b, &opt, &[0.3], 0.7).unwrap();
        assert!(stay
            .values
            .iter()
            .zip(&opt.values)
            .all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn eta_bar_validated() {
        let mut c = SgdConfig::new(10, 0);
        c.eta_bar = 2.0;
        assert!(c.validate().is_err());
        c.eta_bar = 0.0;
        assert!(c.validate().is_err());
        c.eta_bar = 1.0;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn runs_are_deterministic() {
        let p = toy();
        let b = Basis::legendre(2, 1);
        let dist = LambdaDistribution::uniform(BoxDomain::symmetric_unit());
        let cfg = SgdConfig::new(500, 42);
        let a = run_sgd(&p, &b, &dist, &cfg, None, &mut NoMonitor).unwrap();
        let c = run_sgd(&p, &b, &dist, &cfg, None, &mut NoMonitor).unwrap();
        assert_eq!(a, c);
        assert_eq!(a.total_gradient_calls(), 500);
        assert_eq!(a.rows.len(), 6);
    }

    #[test]
    fn diagnostic_keeps_step_when_growing() {
        let mut s = DiagnosticState::new(DiagnosticParams::default(), 0);
        let mut eta = 1.0;
        let mut d = 1.0;
        for _ in 0..10 {
            let t = s.next_checkpoint();
            let (e, reset) = distance_diagnostic_update(&mut s, d, t, eta);
            assert!(!reset);
            eta = e;
            d *= 2.0;
        }
        assert_eq!(eta, 1.0);
    }

    #[test]
    fn diagnostic_halves_on_constant_distance() {
        let mut s = DiagnosticState::new(DiagnosticParams::default(), 0);
        let t1 = s.next_checkpoint();
        let (eta, r) = distance_diagnostic_update(&mut s, 1.0, t1, 1.0);
        assert_eq!((eta, r), (1.0, false));
        let t2 = s.next_checkpoint();
        assert!(t2 > t1);
        let (eta, r) = distance_diagnostic_update(&mut s, 1.0, t2, eta);
        assert_eq!((eta, r), (0.5, true));
        assert!(s.next_checkpoint() > t2);
    }

    #[test]
    fn unit_step_gd_is_exact_on_toy() {
        let p = QuadraticToy::on_symmetric_unit(TargetPath::Power(2));
        let th = gd_solve(&p, &[0.3], &[5.0], 1, 1.0).unwrap();
        assert!((th[0] - 0.09).abs() < 1e-15);
        let th0 = gd_solve(&p, &[0.3], &[5.0], 0, 1.0).unwrap();
        assert_eq!(th0, vec![5.0]);
    }

    #[test]
    fn average_minimizer_recovers_path_in_span() {
        let p = toy();
        let b = Basis::legendre(3, 1);
        let rule = LambdaDistribution::uniform(BoxDomain::symmetric_unit())
            .quadrature(8)
            .unwrap();
        for acc in [false, true] {
            let m = minimize_average(&p, &b, &rule, &[0.0; 3], 1e-12, 10_000, acc).unwrap();
            assert!((m.beta[1] - 1.0).abs() < 1e-10);
            assert!(m.beta[0].abs() < 1e-10 && m.beta[2].abs() < 1e-10);
            assert!(m.objective < 1e-20);
        }
    }
}
