//! Run configuration.
//!
//! One TOML file describes one run. Top-level keys:
//!
//! ```toml
//! name = "toy-lsp"        # label in compare output; defaults to the file stem
//! seed = 0                # SGD, sampling and random grids
//! method = "lsp"          # lsp | alsp | discretization
//! output = "toy-lsp"      # run directory, relative to the output root
//!
//! [problem]               # kind = toy | logistic | portfolio_2d | portfolio_12d
//! kind = "toy"
//! target = "identity"
//!
//! [basis]                 # kind = legendre | shifted_legendre | shifted_jacobi
//! kind = "legendre"       #        tensor_legendre_2d | monomial | portfolio_custom_12d
//! q = 2
//!
//! [sgd]
//! iterations = 2000
//! ```
//!
//! Optional sections: `[distribution]`, `[alsp]`, `[discretization]`,
//! `[truth]`, `[audit]`, `[spectra]`. Every key and its default is listed on
//! the structs below and in `solpath --help`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use solpath::baseline::ScheduleFamily;
use solpath::basis::BasisSpec;
use solpath::evaluate::{GridSpec, GroundTruthOptions};
use solpath::optimize::Controller;
use solpath::pathlearn::AlspConfig;
use solpath::problems::{
    ingest_classification_csv, ingest_returns_csv, synth_classification, synth_market,
    ClassificationOptions, MarketModel, ParametricProblem, Portfolio12D, Portfolio2D, QuadraticToy,
    TargetPath, WeightedLogistic,
};
use solpath::{BoxDomain, LambdaDistribution, SgdConfig};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lsp,
    Alsp,
    Discretization,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Lsp => "lsp",
            Method::Alsp => "alsp",
            Method::Discretization => "discretization",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub method: Method,
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub problem: ProblemSpec,
    #[serde(default)]
    pub basis: Option<BasisSpec>,
    /// Defaults to uniform on the problem's hyperparameter box.
    #[serde(default)]
    pub distribution: Option<LambdaDistribution>,
    #[serde(default)]
    pub sgd: SgdSection,
    #[serde(default)]
    pub alsp: AlspSection,
    #[serde(default)]
    pub discretization: DiscretizationSection,
    #[serde(default)]
    pub truth: TruthSection,
    #[serde(default)]
    pub audit: AuditSection,
    #[serde(default)]
    pub spectra: SpectraSection,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// `½‖θ - g(λ)‖²` with `g_i = (1 + i/2) f(λ)`.
    Toy {
        /// identity | powK | exp | sinW | runge
        #[serde(default = "default_target")]
        target: String,
        #[serde(default = "one")]
        outputs: usize,
        /// One-dimensional box, default `[-1, 1]`.
        #[serde(default)]
        domain: Option<BoxDomain>,
    },
    /// Class-weighted logistic regression with ridge penalty.
    Logistic {
        /// CSV with feature columns and a 0/1 column named `y`.
        #[serde(default)]
        data: Option<PathBuf>,
        #[serde(default)]
        synth: Option<SynthClassification>,
        #[serde(default = "default_ridge")]
        ridge: f64,
        #[serde(default = "yes")]
        standardize: bool,
        #[serde(default = "yes")]
        intercept: bool,
    },
    /// Two-hyperparameter portfolio allocation.
    #[serde(rename = "portfolio_2d")]
    Portfolio2d {
        /// CSV of per-period asset returns, one column per asset.
        #[serde(default)]
        returns: Option<PathBuf>,
        #[serde(default)]
        synth_seed: Option<u64>,
        #[serde(default = "default_assets")]
        assets: usize,
        #[serde(default)]
        domain: Option<BoxDomain>,
    },
    /// Twelve-hyperparameter portfolio allocation over ten assets.
    #[serde(rename = "portfolio_12d")]
    Portfolio12d {
        #[serde(default)]
        returns: Option<PathBuf>,
        #[serde(default)]
        synth_seed: Option<u64>,
        #[serde(default)]
        domain: Option<BoxDomain>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthClassification {
    pub seed: u64,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_features")]
    pub features: usize,
    /// Fraction of negatives.
    #[serde(default = "default_imbalance")]
    pub imbalance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    /// Constant-step SGD on single draws of `λ`.
    Sgd,
    /// Deterministic accelerated gradient descent on the quadrature (or
    /// sample-average) objective.
    Accelerated,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgdSection {
    /// Total iterations (SGD steps or full-batch iterations).
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// Step multiplier in `(0, 1]`.
    #[serde(default = "default_eta_bar")]
    pub eta_bar: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default)]
    pub controller: Controller,
    #[serde(default = "default_solver")]
    pub solver: Solver,
    /// Draws in the sample-average objective when the hyperparameter
    /// dimension is above two.
    #[serde(default = "default_train_samples")]
    pub train_samples: usize,
}

impl Default for SgdSection {
    fn default() -> Self {
        Self {
            iterations: default_iterations(),
            eta_bar: default_eta_bar(),
            record_every: default_record_every(),
            controller: Controller::default(),
            solver: default_solver(),
            train_samples: default_train_samples(),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlspSection {
    /// Defaults to `basis.q`.
    #[serde(default)]
    pub initial_q: Option<usize>,
    /// Defaults to `initial_q + 8`.
    #[serde(default)]
    pub max_q: Option<usize>,
    #[serde(default)]
    pub stall_window: Option<usize>,
    #[serde(default)]
    pub stall_tol: Option<f64>,
    #[serde(default)]
    pub eval_cadence: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationSection {
    /// classification (1-D default) | portfolio (2-D default)
    #[serde(default)]
    pub family: Option<ScheduleFamily>,
    /// Override of the family's `c₁`.
    #[serde(default)]
    pub c1: Option<f64>,
    /// Override of the family's `c₂`.
    #[serde(default)]
    pub c2: Option<f64>,
    /// Target for `run`; defaults to the family's coarsest `δ`.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Targets for `frontier` and `compare`; defaults to the family's set.
    #[serde(default)]
    pub deltas: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthSection {
    /// Defaults to 1024 points in 1-D, 100² in 2-D, 1000 draws otherwise.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub iterations: Option<usize>,
    #[serde(default)]
    pub residual_tol: Option<f64>,
    #[serde(default)]
    pub use_exact: Option<bool>,
}

impl TruthSection {
    pub fn options(&self) -> GroundTruthOptions {
        let mut o = GroundTruthOptions::default();
        if let Some(v) = self.iterations {
            o.iterations = v;
        }
        if let Some(v) = self.residual_tol {
            o.residual_tol = v;
        }
        if let Some(v) = self.use_exact {
            o.use_exact = v;
        }
        o
    }

    pub fn grid_for(&self, domain: &BoxDomain) -> GridSpec {
        self.grid
            .clone()
            .unwrap_or_else(|| GridSpec::default_for(domain))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSection {
    /// Perturbed coefficient vectors around the minimizer.
    #[serde(default = "default_audit_samples")]
    pub samples: usize,
    #[serde(default = "default_r_min")]
    pub r_min: f64,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    /// Upper bound on the minimal path error; defaults to the measured path
    /// error of the minimizer of the averaged objective.
    #[serde(default)]
    pub eps_star: Option<f64>,
    /// Iteration cap for the deterministic minimizer.
    #[serde(default = "default_audit_iter")]
    pub max_iter: usize,
}

impl Default for AuditSection {
    fn default() -> Self {
        Self {
            samples: default_audit_samples(),
            r_min: default_r_min(),
            r_max: default_r_max(),
            eps_star: None,
            max_iter: default_audit_iter(),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectraSection {
    /// Feature counts to report; defaults to `basis.q` alone.
    #[serde(default)]
    pub q_values: Option<Vec<usize>>,
    /// Gauss nodes per axis; defaults to 64 in 1-D and 32 in 2-D.
    #[serde(default)]
    pub quadrature_order: Option<usize>,
}

fn default_target() -> String {
    "identity".into()
}
fn one() -> usize {
    1
}
fn yes() -> bool {
    true
}
fn default_ridge() -> f64 {
    1e-2
}
fn default_assets() -> usize {
    10
}
fn default_n() -> usize {
    1000
}
fn default_features() -> usize {
    5
}
fn default_imbalance() -> f64 {
    0.8
}
fn default_iterations() -> usize {
    2000
}
fn default_eta_bar() -> f64 {
    1.0
}
fn default_record_every() -> usize {
    100
}
fn default_solver() -> Solver {
    Solver::Sgd
}
fn default_train_samples() -> usize {
    1000
}
fn default_audit_samples() -> usize {
    100
}
fn default_r_min() -> f64 {
    1e-3
}
fn default_r_max() -> f64 {
    1.0
}
fn default_audit_iter() -> usize {
    20000
}

/// A parsed config and the directory its relative paths resolve against.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
    pub label: String,
}

impl LoadedConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let config: RunConfig = toml::from_str(&text).map_err(|e| CliError::ConfigSyntax {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".into());
        let base_dir = path.parent().map(Path::to_owned).unwrap_or_default();
        Ok(Self::new(config, base_dir, stem))
    }

    pub fn parse_str(text: &str, base_dir: &Path, fallback_label: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::ConfigSyntax {
            path: PathBuf::from("<inline>"),
            message: e.to_string(),
        })?;
        Ok(Self::new(
            config,
            base_dir.to_owned(),
            fallback_label.to_owned(),
        ))
    }

    fn new(config: RunConfig, base_dir: PathBuf, stem: String) -> Self {
        let label = config.name.clone().unwrap_or(stem);
        Self {
            config,
            base_dir,
            label,
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_owned()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Checks everything that can be checked without building the problem.
    pub fn validate(&self) -> Result<()> {
        let c = &self.config;
        let s = &c.sgd;
        if !(s.eta_bar > 0.0 && s.eta_bar <= 1.0) {
            return Err(CliError::config(
                "sgd.eta_bar",
                format!(
                    "{} is outside (0, 1]; the constant step η̄/(C L) is only guaranteed to converge for η̄ in that range",
                    s.eta_bar
                ),
            ));
        }
        if s.iterations == 0 {
            return Err(CliError::config("sgd.iterations", "must be at least 1"));
        }
        if s.record_every == 0 {
            return Err(CliError::config("sgd.record_every", "must be at least 1"));
        }
        if matches!(c.method, Method::Lsp | Method::Alsp) && c.basis.is_none() {
            return Err(CliError::config(
                "basis",
                format!("method `{}` needs a [basis] section", c.method.as_str()),
            ));
        }
        if c.method == Method::Alsp && s.solver != Solver::Sgd {
            return Err(CliError::config("sgd.solver", "alsp runs on sgd only"));
        }
        for (key, path) in self.data_files() {
            if !path.is_file() {
                return Err(CliError::config(
                    key,
                    format!("file not found: {}", path.display()),
                ));
            }
        }
        Ok(())
    }

    /// Data files the problem reads, with their config keys.
    pub fn data_files(&self) -> Vec<(&'static str, PathBuf)> {
        match &self.config.problem {
            ProblemSpec::Logistic { data: Some(p), .. } => vec![("problem.data", self.resolve(p))],
            ProblemSpec::Portfolio2d {
                returns: Some(p), ..
            }
            | ProblemSpec::Portfolio12d {
                returns: Some(p), ..
            } => {
                vec![("problem.returns", self.resolve(p))]
            }
            _ => Vec::new(),
        }
    }

    pub fn build_problem(&self) -> Result<Box<dyn ParametricProblem>> {
        let problem: Box<dyn ParametricProblem> = match &self.config.problem {
            ProblemSpec::Toy {
                target,
                outputs,
                domain,
            } => {
                let target = TargetPath::parse(target)
                    .map_err(|e| CliError::config("problem.target", e.to_string()))?;
                let domain = domain.clone().unwrap_or_else(BoxDomain::symmetric_unit);
                Box::new(QuadraticToy::new(target, *outputs, domain)?)
            }
            ProblemSpec::Logistic {
                data,
                synth,
                ridge,
                standardize,
                intercept,
            } => {
                let opts = ClassificationOptions {
                    standardize: *standardize,
                    intercept: *intercept,
                };
                let set = match (data, synth) {
                    (Some(p), None) => ingest_classification_csv(self.resolve(p), opts)?,
                    (None, Some(s)) => {
                        let mut set = synth_classification(s.seed, s.n, s.features, s.imbalance)?;
                        if opts.standardize {
                            set.standardize();
                        }
                        if opts.intercept {
                            set.add_intercept();
                        }
                        set
                    }
                    _ => {
                        return Err(CliError::config(
                            "problem.data",
                            "give exactly one of `data` and `synth`",
                        ))
                    }
                };
                Box::new(WeightedLogistic::new(set, *ridge)?)
            }
            ProblemSpec::Portfolio2d {
                returns,
                synth_seed,
                assets,
                domain,
            } => {
                let market = self.market(returns, *synth_seed, *assets)?;
                match domain {
                    Some(d) => Box::new(Portfolio2D::with_domain(market, d.clone())?),
                    None => Box::new(Portfolio2D::new(market)?),
                }
            }
            ProblemSpec::Portfolio12d {
                returns,
                synth_seed,
                domain,
            } => {
                let market = self.market(returns, *synth_seed, 10)?;
                match domain {
                    Some(d) => Box::new(Portfolio12D::with_domain(market, d.clone())?),
                    None => Box::new(Portfolio12D::new(market)?),
                }
            }
        };
        Ok(problem)
    }

    fn market(
        &self,
        returns: &Option<PathBuf>,
        seed: Option<u64>,
        assets: usize,
    ) -> Result<MarketModel> {
        match (returns, seed) {
            (Some(p), None) => Ok(ingest_returns_csv(self.resolve(p))?),
            (None, Some(s)) => Ok(synth_market(s, assets)?),
            _ => Err(CliError::config(
                "problem.returns",
                "give exactly one of `returns` and `synth_seed`",
            )),
        }
    }

    pub fn distribution(&self, problem: &dyn ParametricProblem) -> LambdaDistribution {
        self.config
            .distribution
            .clone()
            .unwrap_or_else(|| LambdaDistribution::uniform(problem.lambda_domain().clone()))
    }

    pub fn sgd_config(&self) -> SgdConfig {
        let s = &self.config.sgd;
        SgdConfig {
            eta_bar: s.eta_bar,
            iterations: s.iterations,
            seed: self.config.seed,
            record_every: s.record_every,
            controller: s.controller.clone(),
        }
    }

    pub fn alsp_config(&self, basis_q: usize) -> AlspConfig {
        let a = &self.config.alsp;
        let initial = a.initial_q.unwrap_or(basis_q);
        let mut cfg = AlspConfig::new(initial, a.max_q.unwrap_or(initial + 8), self.sgd_config());
        if let Some(v) = a.stall_window {
            cfg.stall_window = v;
        }
        if let Some(v) = a.stall_tol {
            cfg.stall_tol = v;
        }
        if let Some(v) = a.eval_cadence {
            cfg.eval_cadence = v;
        }
        cfg
    }

    pub fn schedule_family(&self, lambda_dim: usize) -> ScheduleFamily {
        self.config
            .discretization
            .family
            .unwrap_or(if lambda_dim == 1 {
                ScheduleFamily::Classification
            } else {
                ScheduleFamily::Portfolio
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_toy_config_parses() {
        let c = LoadedConfig::parse_str(
            "method = \"lsp\"\n[problem]\nkind = \"toy\"\n[basis]\nkind = \"legendre\"\nq = 2\n",
            Path::new("."),
            "t",
        )
        .unwrap();
        assert_eq!(c.config.sgd.iterations, 2000);
        assert_eq!(c.label, "t");
        c.validate().unwrap();
        let p = c.build_problem().unwrap();
        assert_eq!(p.dim(), 1);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let r = LoadedConfig::parse_str(
            "method = \"lsp\"\nbogus = 1\n[problem]\nkind = \"toy\"\n",
            Path::new("."),
            "t",
        );
        assert!(r.is_err());
        let r = LoadedConfig::parse_str(
            "method = \"lsp\"\n[problem]\nkind = \"toy\"\nwidth = 3\n",
            Path::new("."),
            "t",
        );
        assert!(r.is_err());
    }

    #[test]
    fn eta_bar_outside_range_names_key() {
        let c = LoadedConfig::parse_str(
            "method = \"lsp\"\n[problem]\nkind = \"toy\"\n[basis]\nkind = \"legendre\"\nq = 2\n[sgd]\neta_bar = 2.0\n",
            Path::new("."),
            "t",
        )
        .unwrap();
        let e = c.validate().unwrap_err().to_string();
        assert!(e.contains("sgd.eta_bar") && e.contains("(0, 1]"), "{e}");
    }
}
