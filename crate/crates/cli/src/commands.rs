//! The six subcommands as library functions. Each `cmd_*` writes its
//! artifacts into a run directory and returns what it wrote; the pure parts
//! (`execute`, `frontier`, `compare`) are exposed separately for tests.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use solpath::baseline::{
    grid_pass_error, make_schedule, run_discretization, DiscretizationSchedule,
};
use solpath::basis::Coefficients;
use solpath::evaluate::{
    compute_ground_truth, decomposition_audit, path_error, path_error_coeffs, perturbed_samples,
    rwgc_audit, truncation_path_error_bound, AuditReport, GridSpec,
};
use solpath::io::{create_file, write_coefficients, write_ground_truth};
use solpath::optimize::{format_f64, minimize_average, RunTrace, TraceRow};
use solpath::pathlearn::{run_alsp, run_lsp};
use solpath::spectral::{compute_c_min, compute_c_sup_default, SearchGrid, SpectralReport};
use solpath::{
    seeded_rng, Basis, Error, GroundTruthGrid, LambdaDistribution, ParametricProblem,
    QuadratureRule,
};

use crate::cache::{ground_truth, CachedTruth};
use crate::config::{LoadedConfig, Method, Solver};
use crate::error::{CliError, Result};

/// Default output root when neither `--out-root` nor `SOLPATH_OUT` is set.
pub const DEFAULT_OUT_ROOT: &str = "solpath-out";

/// Salt separating the training-sample stream from the SGD stream.
const TRAIN_SALT: u64 = 0x7261_696e;
/// Salt for the audit perturbations.
const AUDIT_SALT: u64 = 0x6175_6469;

#[derive(Clone, Debug)]
pub struct Context {
    pub out_root: PathBuf,
    /// Read and write `<out_root>/cache`.
    pub cache: bool,
}

impl Context {
    pub fn new(out_root: impl Into<PathBuf>) -> Self {
        Self {
            out_root: out_root.into(),
            cache: true,
        }
    }

    fn cache_root(&self) -> Option<&Path> {
        self.cache.then_some(self.out_root.as_path())
    }

    /// `run` writes here; the other commands write into a subdirectory
    /// named after the command.
    pub fn run_dir(&self, cfg: &LoadedConfig) -> PathBuf {
        match &cfg.config.output {
            Some(p) if p.is_absolute() => p.clone(),
            Some(p) => self.out_root.join(p),
            None => self.out_root.join(&cfg.label),
        }
    }
}

/// Problem, distribution and basis built from a config.
pub struct Prepared {
    pub problem: Box<dyn ParametricProblem>,
    pub dist: LambdaDistribution,
    pub basis: Option<Basis>,
}

pub fn prepare(cfg: &LoadedConfig) -> Result<Prepared> {
    cfg.validate()?;
    let problem = cfg.build_problem()?;
    let dist = cfg.distribution(problem.as_ref());
    if dist.dim() != problem.lambda_dim() {
        return Err(CliError::config(
            "distribution",
            format!(
                "{}-dimensional distribution for a problem with {} hyperparameters",
                dist.dim(),
                problem.lambda_dim()
            ),
        ));
    }
    let basis = match &cfg.config.basis {
        Some(spec) => Some(
            spec.build(problem.dim(), problem.lambda_domain())
                .map_err(|e| CliError::config("basis", e.to_string()))?,
        ),
        None => None,
    };
    if let Some(b) = &basis {
        if b.lambda_dim() != problem.lambda_dim() {
            return Err(CliError::config(
                "basis.kind",
                format!(
                    "basis takes {} hyperparameters, the problem has {}",
                    b.lambda_dim(),
                    problem.lambda_dim()
                ),
            ));
        }
    }
    Ok(Prepared {
        problem,
        dist,
        basis,
    })
}

fn need_basis(p: &Prepared) -> Result<&Basis> {
    p.basis
        .as_ref()
        .ok_or_else(|| CliError::config("basis", "this command needs a [basis] section"))
}

/// Gauss rule in one or two dimensions, an equal-weight sample otherwise.
pub fn training_rule(cfg: &LoadedConfig, dist: &LambdaDistribution) -> Result<QuadratureRule> {
    if dist.dim() <= 2 {
        Ok(dist.default_quadrature()?)
    } else {
        let n = cfg.config.sgd.train_samples;
        if n == 0 {
            return Err(CliError::config("sgd.train_samples", "must be at least 1"));
        }
        let mut rng = seeded_rng(cfg.config.seed ^ TRAIN_SALT);
        Ok(dist.sample_rule(n, &mut rng))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StageSummary {
    pub q: usize,
    pub gradient_calls: u64,
    pub objective: f64,
    pub path_error: Option<f64>,
    pub boundary_iteration: usize,
    pub pad_discrepancy: Option<f64>,
}

/// Deterministic run summary; wall time lives in `meta.json`.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub label: String,
    pub method: &'static str,
    pub problem: String,
    pub q: Option<usize>,
    pub iterations: usize,
    pub gradient_calls: u64,
    pub final_path_error: Option<f64>,
    pub final_objective: Option<f64>,
    pub truth_resolution: String,
    pub truth_key: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_pass_error: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<StageSummary>,
}

pub struct Execution {
    pub summary: RunSummary,
    pub trace: RunTrace,
    pub coefficients: Option<(Basis, Coefficients)>,
}

/// Runs the configured method without writing anything.
pub fn execute(ctx: &Context, cfg: &LoadedConfig) -> Result<Execution> {
    let prep = prepare(cfg)?;
    let truth = ground_truth(cfg, prep.problem.as_ref(), ctx.cache_root())?;
    execute_with(cfg, &prep, &truth)
}

fn execute_with(cfg: &LoadedConfig, prep: &Prepared, truth: &CachedTruth) -> Result<Execution> {
    let problem = prep.problem.as_ref();
    let mut summary = RunSummary {
        label: cfg.label.clone(),
        method: cfg.config.method.as_str(),
        problem: problem.name().to_owned(),
        q: None,
        iterations: 0,
        gradient_calls: 0,
        final_path_error: None,
        final_objective: None,
        truth_resolution: truth.grid.resolution.clone(),
        truth_key: truth.key.clone(),
        grid_pass_error: None,
        stages: Vec::new(),
    };
    let (trace, coefficients) = match cfg.config.method {
        Method::Lsp => {
            let basis = need_basis(prep)?;
            summary.q = Some(basis.q());
            let rule = if prep.dist.dim() <= 2 {
                Some(training_rule(cfg, &prep.dist)?)
            } else {
                None
            };
            let trace = match cfg.config.sgd.solver {
                Solver::Sgd => run_lsp(
                    problem,
                    basis,
                    &prep.dist,
                    &cfg.sgd_config(),
                    rule.as_ref(),
                    Some(&truth.grid),
                )?,
                Solver::Accelerated => accelerated(cfg, prep, basis, &truth.grid)?,
            };
            let beta = trace.final_coefficients.clone();
            (trace, beta.map(|b| (basis.clone(), b)))
        }
        Method::Alsp => {
            let family = need_basis(prep)?;
            let rule = training_rule(cfg, &prep.dist)?;
            let alsp = cfg.alsp_config(family.q());
            alsp.validate().map_err(|e| prefix_key(e, "alsp"))?;
            let res = run_alsp(problem, family, &prep.dist, &alsp, &rule, Some(&truth.grid))?;
            summary.q = Some(res.final_basis.q());
            summary.stages = res
                .stages
                .iter()
                .map(|s| StageSummary {
                    q: s.q,
                    gradient_calls: s.gradient_calls,
                    objective: s.objective,
                    path_error: s.path_error,
                    boundary_iteration: s.boundary_iteration,
                    pad_discrepancy: s.pad_discrepancy,
                })
                .collect();
            let beta = res.trace.final_coefficients.clone();
            (res.trace, beta.map(|b| (res.final_basis, b)))
        }
        Method::Discretization => {
            let schedule = run_schedule(cfg, problem)?;
            let point = frontier_point(cfg, problem, &schedule, &truth.grid)?;
            summary.grid_pass_error = Some(point.grid_pass_error);
            let (_, mut trace) = run_discretization(problem, &schedule)?;
            if let Some(last) = trace.rows.last_mut() {
                last.path_error = Some(point.path_error);
            }
            (trace, None)
        }
    };
    if let Some(last) = trace.last() {
        summary.iterations = last.iteration;
        summary.gradient_calls = last.gradient_calls;
        summary.final_objective = last.objective;
        summary.final_path_error = last.path_error;
    }
    Ok(Execution {
        summary,
        trace,
        coefficients,
    })
}

fn prefix_key(e: Error, section: &str) -> CliError {
    match e {
        Error::InvalidConfig { key, message } => {
            CliError::config(format!("{section}.{key}"), message)
        }
        other => CliError::Core(other),
    }
}

/// Full-batch accelerated descent; one trace row at the end.
fn accelerated(
    cfg: &LoadedConfig,
    prep: &Prepared,
    basis: &Basis,
    truth: &GroundTruthGrid,
) -> Result<RunTrace> {
    let problem = prep.problem.as_ref();
    let rule = training_rule(cfg, &prep.dist)?;
    let beta0 = vec![0.0; basis.p()];
    let m = minimize_average(
        problem,
        basis,
        &rule,
        &beta0,
        1e-10,
        cfg.config.sgd.iterations,
        true,
    )?;
    let err = path_error_coeffs(problem, basis, &m.beta, truth)?.sup;
    // one evaluation at the start and the end, two per iteration
    let calls = (2 * m.iterations as u64 + 2) * rule.len() as u64;
    Ok(RunTrace {
        rows: vec![TraceRow {
            iteration: m.iterations,
            gradient_calls: calls,
            step_size: f64::NAN,
            objective: Some(m.objective),
            path_error: Some(err),
            stage: 0,
        }],
        final_coefficients: Some(Coefficients::new(basis, m.beta)?),
    })
}

fn family_constants(cfg: &LoadedConfig, problem: &dyn ParametricProblem) -> (f64, f64) {
    let (c1, c2) = cfg.schedule_family(problem.lambda_dim()).constants();
    let d = &cfg.config.discretization;
    (d.c1.unwrap_or(c1), d.c2.unwrap_or(c2))
}

fn run_schedule(
    cfg: &LoadedConfig,
    problem: &dyn ParametricProblem,
) -> Result<DiscretizationSchedule> {
    let (c1, c2) = family_constants(cfg, problem);
    let delta = match cfg.config.discretization.delta {
        Some(d) => d,
        None => cfg.schedule_family(problem.lambda_dim()).deltas()[0],
    };
    make_schedule(delta, c1, c2)
        .map_err(|e| CliError::config("discretization.delta", e.to_string()))
}

/// Schedules for every `δ` of the frontier.
pub fn frontier_schedules(
    cfg: &LoadedConfig,
    problem: &dyn ParametricProblem,
) -> Result<Vec<DiscretizationSchedule>> {
    let (c1, c2) = family_constants(cfg, problem);
    let deltas = match &cfg.config.discretization.deltas {
        Some(d) if d.is_empty() => {
            return Err(CliError::config("discretization.deltas", "empty list"));
        }
        Some(d) => d.clone(),
        None => cfg.schedule_family(problem.lambda_dim()).deltas(),
    };
    deltas
        .into_iter()
        .map(|d| {
            make_schedule(d, c1, c2)
                .map_err(|e| CliError::config("discretization.deltas", e.to_string()))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrontierPoint {
    pub delta: f64,
    pub points_per_axis: usize,
    pub steps_per_point: usize,
    pub gradient_calls: u64,
    /// Worst gap at the discretization nodes.
    pub grid_pass_error: f64,
    /// Worst gap of the piecewise-constant path on the truth grid.
    pub path_error: f64,
}

fn frontier_point(
    cfg: &LoadedConfig,
    problem: &dyn ParametricProblem,
    schedule: &DiscretizationSchedule,
    truth: &GroundTruthGrid,
) -> Result<FrontierPoint> {
    let (path, trace) = run_discretization(problem, schedule)?;
    let node_truth = compute_ground_truth(
        problem,
        &GridSpec::Uniform {
            per_axis: schedule.points_per_axis,
        },
        &cfg.config.truth.options(),
    )?;
    let gp = grid_pass_error(&path, problem, &node_truth)?;
    let eps = path_error(problem, |l| path.lookup(l).to_vec(), truth)?.sup;
    Ok(FrontierPoint {
        delta: schedule.delta,
        points_per_axis: schedule.points_per_axis,
        steps_per_point: schedule.steps_per_point,
        gradient_calls: trace.total_gradient_calls(),
        grid_pass_error: gp,
        path_error: eps,
    })
}

/// Runs the baseline at every `δ` of the configured set.
pub fn frontier(ctx: &Context, cfg: &LoadedConfig) -> Result<Vec<FrontierPoint>> {
    let prep = prepare(cfg)?;
    let truth = ground_truth(cfg, prep.problem.as_ref(), ctx.cache_root())?;
    frontier_with(cfg, &prep, &truth.grid)
}

fn frontier_with(
    cfg: &LoadedConfig,
    prep: &Prepared,
    truth: &GroundTruthGrid,
) -> Result<Vec<FrontierPoint>> {
    let problem = prep.problem.as_ref();
    frontier_schedules(cfg, problem)?
        .iter()
        .map(|s| frontier_point(cfg, problem, s, truth))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareRow {
    pub series: String,
    pub method: &'static str,
    pub gradient_calls: u64,
    pub path_error: f64,
    pub grid_pass_error: Option<f64>,
}

/// Path error against gradient calls for several configs, merged on the
/// gradient-call axis. Discretization configs contribute one row per `δ`;
/// the others one row per recorded checkpoint.
pub fn compare(ctx: &Context, configs: &[LoadedConfig]) -> Result<Vec<CompareRow>> {
    let mut rows = Vec::new();
    for (order, cfg) in configs.iter().enumerate() {
        let prep = prepare(cfg)?;
        let truth = ground_truth(cfg, prep.problem.as_ref(), ctx.cache_root())?;
        let method = cfg.config.method.as_str();
        match cfg.config.method {
            Method::Discretization => {
                for p in frontier_with(cfg, &prep, &truth.grid)? {
                    rows.push((
                        order,
                        CompareRow {
                            series: cfg.label.clone(),
                            method,
                            gradient_calls: p.gradient_calls,
                            path_error: p.path_error,
                            grid_pass_error: Some(p.grid_pass_error),
                        },
                    ));
                }
            }
            Method::Lsp | Method::Alsp => {
                let ex = execute_with(cfg, &prep, &truth)?;
                for (calls, err) in ex.trace.path_errors() {
                    rows.push((
                        order,
                        CompareRow {
                            series: cfg.label.clone(),
                            method,
                            gradient_calls: calls,
                            path_error: err,
                            grid_pass_error: None,
                        },
                    ));
                }
            }
        }
    }
    rows.sort_by(|a, b| {
        a.1.gradient_calls
            .cmp(&b.1.gradient_calls)
            .then(a.0.cmp(&b.0))
    });
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

// ---------------------------------------------------------------- writers

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("summary serializes");
    text.push('\n');
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

#[derive(Serialize)]
struct Meta<'a> {
    command: &'a str,
    version: &'a str,
    wall_time_seconds: f64,
}

fn write_meta(dir: &Path, command: &str, start: Instant) -> Result<()> {
    write_json(
        &dir.join("meta.json"),
        &Meta {
            command,
            version: env!("CARGO_PKG_VERSION"),
            wall_time_seconds: start.elapsed().as_secs_f64(),
        },
    )
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::io::BufWriter<std::fs::File>>> {
    Ok(csv::Writer::from_writer(create_file(path)?))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::io(path, std::io::Error::other(e))
}

fn opt(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

/// `run`: trace.csv, coefficients.csv, summary.json, meta.json (plus
/// stages.csv for alsp, trace.partial.csv on divergence).
pub fn cmd_run(ctx: &Context, cfg: &LoadedConfig) -> Result<(PathBuf, RunSummary)> {
    let start = Instant::now();
    let dir = ctx.run_dir(cfg);
    let ex = match execute(ctx, cfg) {
        Ok(ex) => ex,
        Err(CliError::Core(Error::Diverged {
            iteration,
            lambda,
            partial,
        })) => {
            if let Some(trace) = &partial {
                trace.write_csv(create_file(&dir.join("trace.partial.csv"))?)?;
            }
            return Err(CliError::Core(Error::Diverged {
                iteration,
                lambda,
                partial,
            }));
        }
        Err(e) => return Err(e),
    };
    ex.trace.write_csv(create_file(&dir.join("trace.csv"))?)?;
    if let Some((basis, beta)) = &ex.coefficients {
        write_coefficients(basis, beta, create_file(&dir.join("coefficients.csv"))?)?;
    }
    if !ex.summary.stages.is_empty() {
        let path = dir.join("stages.csv");
        let mut w = csv_writer(&path)?;
        let e = csv_err(&path);
        w.write_record([
            "q",
            "gradient_calls",
            "objective",
            "path_error",
            "boundary_iteration",
            "pad_discrepancy",
        ])
        .map_err(&e)?;
        for s in &ex.summary.stages {
            w.write_record([
                s.q.to_string(),
                s.gradient_calls.to_string(),
                format_f64(s.objective),
                opt(s.path_error),
                s.boundary_iteration.to_string(),
                opt(s.pad_discrepancy),
            ])
            .map_err(&e)?;
        }
        w.flush().map_err(|err| CliError::io(&path, err))?;
    }
    write_json(&dir.join("summary.json"), &ex.summary)?;
    write_meta(&dir, "run", start)?;
    Ok((dir, ex.summary))
}

#[derive(Clone, Debug, Serialize)]
pub struct TruthSummary {
    pub nodes: usize,
    pub resolution: String,
    pub max_residual: f64,
    pub key: String,
    pub cache_hit: bool,
}

/// `groundtruth`: truth.csv and summary.json.
pub fn cmd_groundtruth(ctx: &Context, cfg: &LoadedConfig) -> Result<(PathBuf, TruthSummary)> {
    let start = Instant::now();
    let prep = prepare(cfg)?;
    let truth = ground_truth(cfg, prep.problem.as_ref(), ctx.cache_root())?;
    let dir = ctx.run_dir(cfg).join("groundtruth");
    write_ground_truth(&truth.grid, create_file(&dir.join("truth.csv"))?)?;
    let summary = TruthSummary {
        nodes: truth.grid.len(),
        resolution: truth.grid.resolution.clone(),
        max_residual: truth.grid.max_residual(),
        key: truth.key.clone(),
        cache_hit: truth.hit,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    write_meta(&dir, "groundtruth", start)?;
    Ok((dir, summary))
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditSummary {
    pub q: usize,
    pub c_sup: f64,
    pub c_min: f64,
    pub f_star: f64,
    pub minimizer_grad_norm: f64,
    pub eps_star_bound: f64,
    pub rwgc_passed: bool,
    pub rwgc_min_slack: f64,
    pub decomposition_passed: bool,
    pub decomposition_min_slack: f64,
    /// Path error bound of the degree `q - 1` Chebyshev truncation of the
    /// true path (one hyperparameter only).
    pub truncation_bound: Option<f64>,
}

pub struct AuditOutcome {
    pub summary: AuditSummary,
    pub rwgc: AuditReport,
    pub decomposition: AuditReport,
}

/// Both inequality audits around the minimizer of the averaged objective.
pub fn audit(ctx: &Context, cfg: &LoadedConfig) -> Result<AuditOutcome> {
    let prep = prepare(cfg)?;
    let problem = prep.problem.as_ref();
    let basis = need_basis(&prep)?;
    let truth = ground_truth(cfg, problem, ctx.cache_root())?;
    let a = &cfg.config.audit;
    if a.samples == 0 {
        return Err(CliError::config("audit.samples", "must be at least 1"));
    }
    if !(a.r_min > 0.0 && a.r_max >= a.r_min) {
        return Err(CliError::config("audit.r_min", "need 0 < r_min <= r_max"));
    }
    let rule = training_rule(cfg, &prep.dist)?;
    let zero = vec![0.0; basis.p()];
    let m = minimize_average(problem, basis, &rule, &zero, 1e-10, a.max_iter, true)?;
    let measured = path_error_coeffs(problem, basis, &m.beta, &truth.grid)?
        .sup
        .max(0.0);
    let eps_star = a.eps_star.unwrap_or(measured);
    let c_sup = compute_c_sup_default(basis)?;
    let c_min = compute_c_min(basis, &rule)?;
    let samples = perturbed_samples(
        &m.beta,
        a.samples,
        a.r_min,
        a.r_max,
        cfg.config.seed ^ AUDIT_SALT,
    );
    let rwgc = rwgc_audit(
        problem,
        basis,
        &rule,
        &samples,
        c_sup,
        Some(m.objective),
        eps_star,
    )?;
    let decomposition = decomposition_audit(
        problem,
        basis,
        &truth.grid,
        &samples,
        &m.beta,
        c_sup,
        c_min,
        eps_star,
    )?;
    let truncation_bound =
        if problem.lambda_dim() == 1 && truth.grid.resolution.starts_with("uniform") {
            truncation_path_error_bound(&truth.grid, basis.q(), problem.smoothness()).ok()
        } else {
            None
        };
    Ok(AuditOutcome {
        summary: AuditSummary {
            q: basis.q(),
            c_sup,
            c_min,
            f_star: m.objective,
            minimizer_grad_norm: m.grad_norm,
            eps_star_bound: eps_star,
            rwgc_passed: rwgc.passed,
            rwgc_min_slack: rwgc.min_slack,
            decomposition_passed: decomposition.passed,
            decomposition_min_slack: decomposition.min_slack,
            truncation_bound,
        },
        rwgc,
        decomposition,
    })
}

/// `audit`: rwgc.csv, decomposition.csv, summary.json.
pub fn cmd_audit(ctx: &Context, cfg: &LoadedConfig) -> Result<(PathBuf, AuditSummary)> {
    let start = Instant::now();
    let out = audit(ctx, cfg)?;
    let dir = ctx.run_dir(cfg).join("audit");
    out.rwgc.write_csv(create_file(&dir.join("rwgc.csv"))?)?;
    out.decomposition
        .write_csv(create_file(&dir.join("decomposition.csv"))?)?;
    write_json(&dir.join("summary.json"), &out.summary)?;
    write_meta(&dir, "audit", start)?;
    Ok((dir, out.summary))
}

/// `C`, `c` and `C/c` for each requested feature count.
pub fn spectra(cfg: &LoadedConfig) -> Result<Vec<SpectralReport>> {
    let prep = prepare(cfg)?;
    let basis = need_basis(&prep)?;
    let rule = match cfg.config.spectra.quadrature_order {
        Some(order) => prep.dist.quadrature(order)?,
        None => training_rule(cfg, &prep.dist)?,
    };
    let grid = SearchGrid::default_for(basis.domain())?;
    let qs = cfg
        .config
        .spectra
        .q_values
        .clone()
        .unwrap_or_else(|| vec![basis.q()]);
    qs.into_iter()
        .map(|q| {
            let b = basis
                .with_q(q)
                .map_err(|e| CliError::config("spectra.q_values", e.to_string()))?;
            Ok(SpectralReport::compute(&b, &grid, &rule)?)
        })
        .collect()
}

/// `spectra`: spectra.csv.
pub fn cmd_spectra(ctx: &Context, cfg: &LoadedConfig) -> Result<(PathBuf, Vec<SpectralReport>)> {
    let start = Instant::now();
    let reports = spectra(cfg)?;
    let dir = ctx.run_dir(cfg).join("spectra");
    let path = dir.join("spectra.csv");
    let mut w = csv_writer(&path)?;
    let e = csv_err(&path);
    w.write_record([
        "q",
        "c_sup",
        "c_min",
        "ratio",
        "grid",
        "grid_points",
        "quadrature_nodes",
    ])
    .map_err(&e)?;
    for r in &reports {
        w.write_record([
            r.q.to_string(),
            format_f64(r.c_sup),
            format_f64(r.c_min),
            format_f64(r.ratio),
            r.grid.clone(),
            r.grid_points.to_string(),
            r.quadrature_nodes.to_string(),
        ])
        .map_err(&e)?;
    }
    w.flush().map_err(|err| CliError::io(&path, err))?;
    write_meta(&dir, "spectra", start)?;
    Ok((dir, reports))
}

/// `frontier`: frontier.csv.
pub fn cmd_frontier(ctx: &Context, cfg: &LoadedConfig) -> Result<(PathBuf, Vec<FrontierPoint>)> {
    let start = Instant::now();
    let points = frontier(ctx, cfg)?;
    let dir = ctx.run_dir(cfg).join("frontier");
    let path = dir.join("frontier.csv");
    let mut w = csv_writer(&path)?;
    let e = csv_err(&path);
    w.write_record([
        "delta",
        "points_per_axis",
        "steps_per_point",
        "gradient_calls",
        "grid_pass_error",
        "path_error",
    ])
    .map_err(&e)?;
    for p in &points {
        w.write_record([
            format_f64(p.delta),
            p.points_per_axis.to_string(),
            p.steps_per_point.to_string(),
            p.gradient_calls.to_string(),
            format_f64(p.grid_pass_error),
            format_f64(p.path_error),
        ])
        .map_err(&e)?;
    }
    w.flush().map_err(|err| CliError::io(&path, err))?;
    write_meta(&dir, "frontier", start)?;
    Ok((dir, points))
}

/// `compare`: one merged CSV at `out` (default `<root>/compare/compare.csv`).
pub fn cmd_compare(
    ctx: &Context,
    configs: &[LoadedConfig],
    out: Option<&Path>,
) -> Result<(PathBuf, Vec<CompareRow>)> {
    let start = Instant::now();
    let rows = compare(ctx, configs)?;
    let path = match out {
        Some(p) => p.to_owned(),
        None => ctx.out_root.join("compare").join("compare.csv"),
    };
    let mut w = csv_writer(&path)?;
    let e = csv_err(path.as_path());
    w.write_record([
        "series",
        "method",
        "gradient_calls",
        "path_error",
        "grid_pass_error",
    ])
    .map_err(&e)?;
    for r in &rows {
        w.write_record([
            r.series.clone(),
            r.method.to_owned(),
            r.gradient_calls.to_string(),
            format_f64(r.path_error),
            opt(r.grid_pass_error),
        ])
        .map_err(&e)?;
    }
    w.flush().map_err(|err| CliError::io(&path, err))?;
    drop(e);
    let dir = path.parent().map(Path::to_owned).unwrap_or_default();
    write_meta(&dir, "compare", start)?;
    Ok((path, rows))
}
