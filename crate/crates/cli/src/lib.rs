//! Configuration, caching and subcommands behind the `solpath` binary.

pub mod cache;
pub mod commands;
pub mod config;
pub mod error;

pub use commands::Context;
pub use config::{LoadedConfig, Method, RunConfig};
pub use error::{CliError, Result};

/// Command-line values that replace config keys. `None` leaves the key as
/// written in the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub method: Option<Method>,
    pub output: Option<std::path::PathBuf>,
    pub iterations: Option<usize>,
    pub eta_bar: Option<f64>,
    pub q: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut LoadedConfig) -> Result<()> {
        let c = &mut cfg.config;
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.method {
            c.method = v;
        }
        if let Some(v) = &self.output {
            c.output = Some(v.clone());
        }
        if let Some(v) = self.iterations {
            c.sgd.iterations = v;
        }
        if let Some(v) = self.eta_bar {
            c.sgd.eta_bar = v;
        }
        if let Some(v) = self.q {
            match &mut c.basis {
                Some(b) => b.q = v,
                None => {
                    return Err(CliError::config(
                        "basis.q",
                        "no [basis] section to override",
                    ))
                }
            }
        }
        Ok(())
    }
}
