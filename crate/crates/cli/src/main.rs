use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand, ValueEnum};
use solpath_cli::commands::{
    cmd_audit, cmd_compare, cmd_frontier, cmd_groundtruth, cmd_run, cmd_spectra, DEFAULT_OUT_ROOT,
};
use solpath_cli::{CliError, Context, LoadedConfig, Method, Overrides};

/// Learn solution paths of parametric convex problems.
///
/// Every command reads one TOML config (see `configs/toy.toml`). Flags only
/// override keys of that file. Outputs go to `<out-root>/<output>`, where
/// `output` defaults to the config's `name` or file stem.
///
/// Config defaults: seed = 0; sgd.iterations = 2000; sgd.eta_bar = 1;
/// sgd.record_every = 100; sgd.solver = "sgd"; sgd.train_samples = 1000;
/// alsp.initial_q = basis.q; alsp.max_q = initial_q + 8;
/// alsp.stall_window = 3; alsp.stall_tol = 1e-3; alsp.eval_cadence = 200;
/// truth grid = 1024 points (1-D), 100 per axis (2-D), 1000 draws (12-D);
/// truth.iterations = 5000; truth.residual_tol = 1e-7;
/// audit.samples = 100; audit.r_min = 1e-3; audit.r_max = 1;
/// distribution = uniform on the problem's box.
///
/// Exit codes: 0 success, 1 invalid input, 2 diverged iterate.
#[derive(Parser)]
#[command(name = "solpath", version, verbatim_doc_comment)]
struct Cli {
    /// Root directory for outputs and the ground-truth cache.
    #[arg(long, env = "SOLPATH_OUT", default_value = DEFAULT_OUT_ROOT, global = true)]
    out_root: PathBuf,

    /// Neither read nor write the ground-truth cache.
    #[arg(long, global = true)]
    no_cache: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured method: trace.csv, coefficients.csv, summary.json.
    Run(Single),
    /// Compute (or load from cache) the ground-truth grid: truth.csv.
    Groundtruth(Single),
    /// Relaxed weak growth and decomposition audits: rwgc.csv, decomposition.csv.
    Audit(Single),
    /// Basis constants C, c and C/c: spectra.csv.
    Spectra(Single),
    /// Discretization baseline at every target accuracy: frontier.csv.
    Frontier(Single),
    /// Path error against gradient calls across configs: compare.csv.
    Compare {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Merged CSV path (default <out-root>/compare/compare.csv).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replaces `seed` in every config.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct Single {
    config: PathBuf,
    #[command(flatten)]
    overrides: OverrideArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Lsp,
    Alsp,
    Discretization,
}

#[derive(Args)]
struct OverrideArgs {
    /// Replaces `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Replaces `method`.
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Replaces `output`.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Replaces `sgd.iterations`.
    #[arg(long)]
    iterations: Option<usize>,
    /// Replaces `sgd.eta_bar`.
    #[arg(long)]
    eta_bar: Option<f64>,
    /// Replaces `basis.q`.
    #[arg(long)]
    q: Option<usize>,
}

impl OverrideArgs {
    fn to_overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            method: self.method.map(|m| match m {
                MethodArg::Lsp => Method::Lsp,
                MethodArg::Alsp => Method::Alsp,
                MethodArg::Discretization => Method::Discretization,
            }),
            output: self.output.clone(),
            iterations: self.iterations,
            eta_bar: self.eta_bar,
            q: self.q,
        }
    }
}

fn load(path: &Path, overrides: &Overrides) -> anyhow::Result<LoadedConfig> {
    let mut cfg = LoadedConfig::from_path(path)?;
    overrides.apply(&mut cfg)?;
    Ok(cfg)
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    let mut ctx = Context::new(cli.out_root);
    ctx.cache = !cli.no_cache;
    match cli.command {
        Command::Run(s) => {
            let cfg = load(&s.config, &s.overrides.to_overrides())?;
            let (dir, summary) = cmd_run(&ctx, &cfg).context("run")?;
            println!(
                "{}: {} calls, path error {}",
                dir.display(),
                summary.gradient_calls,
                summary
                    .final_path_error
                    .map(|e| format!("{e:e}"))
                    .unwrap_or_else(|| "n/a".into())
            );
        }
        Command::Groundtruth(s) => {
            let cfg = load(&s.config, &s.overrides.to_overrides())?;
            let (dir, summary) = cmd_groundtruth(&ctx, &cfg).context("groundtruth")?;
            println!(
                "{}: {} nodes, max residual {:e}{}",
                dir.display(),
                summary.nodes,
                summary.max_residual,
                if summary.cache_hit { " (cached)" } else { "" }
            );
        }
        Command::Audit(s) => {
            let cfg = load(&s.config, &s.overrides.to_overrides())?;
            let (dir, summary) = cmd_audit(&ctx, &cfg).context("audit")?;
            let word = |b: bool| if b { "pass" } else { "FAIL" };
            println!(
                "{}: rwgc {} (min slack {:e}), decomposition {} (min slack {:e})",
                dir.display(),
                word(summary.rwgc_passed),
                summary.rwgc_min_slack,
                word(summary.decomposition_passed),
                summary.decomposition_min_slack
            );
        }
        Command::Spectra(s) => {
            let cfg = load(&s.config, &s.overrides.to_overrides())?;
            let (dir, reports) = cmd_spectra(&ctx, &cfg).context("spectra")?;
            for r in &reports {
                println!(
                    "q={} C={:e} c={:e} C/c={:e}",
                    r.q, r.c_sup, r.c_min, r.ratio
                );
            }
            println!("{}", dir.join("spectra.csv").display());
        }
        Command::Frontier(s) => {
            let cfg = load(&s.config, &s.overrides.to_overrides())?;
            let (dir, points) = cmd_frontier(&ctx, &cfg).context("frontier")?;
            println!(
                "{}: {} points",
                dir.join("frontier.csv").display(),
                points.len()
            );
        }
        Command::Compare { configs, out, seed } => {
            let overrides = Overrides {
                seed,
                ..Default::default()
            };
            let cfgs = configs
                .iter()
                .map(|p| load(p, &overrides))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let (path, rows) = cmd_compare(&ctx, &cfgs, out.as_deref()).context("compare")?;
            println!("{}: {} rows", path.display(), rows.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<CliError>().map_or(1, CliError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
