//! Content-addressed cache of ground-truth grids under `<root>/cache/`.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use solpath::evaluate::{compute_ground_truth, GridSpec, GroundTruthOptions};
use solpath::io::{create_file, read_ground_truth, write_ground_truth};
use solpath::{GroundTruthGrid, ParametricProblem};

use crate::config::{LoadedConfig, ProblemSpec};
use crate::error::{CliError, Result};

/// Bumped whenever the truth file layout or solver changes.
const CACHE_VERSION: u32 = 1;

#[derive(Serialize)]
struct KeyMaterial<'a> {
    version: u32,
    problem: &'a ProblemSpec,
    data_sha256: Vec<String>,
    grid: &'a GridSpec,
    options: &'a GroundTruthOptions,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of the problem description, the bytes of its data files, the grid
/// and the solver options.
pub fn truth_key(
    cfg: &LoadedConfig,
    grid: &GridSpec,
    options: &GroundTruthOptions,
) -> Result<String> {
    let mut data_sha256 = Vec::new();
    for (_, path) in cfg.data_files() {
        let bytes = std::fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        data_sha256.push(hex(&Sha256::digest(&bytes)));
    }
    let material = KeyMaterial {
        version: CACHE_VERSION,
        problem: &cfg.config.problem,
        data_sha256,
        grid,
        options,
    };
    let json = serde_json::to_vec(&material).expect("key material serializes");
    Ok(hex(&Sha256::digest(&json)))
}

pub struct CachedTruth {
    pub grid: GroundTruthGrid,
    pub key: String,
    pub hit: bool,
    pub path: Option<PathBuf>,
}

/// Loads the grid from the cache or computes and stores it. With
/// `cache_root = None` nothing is read or written.
pub fn ground_truth(
    cfg: &LoadedConfig,
    problem: &dyn ParametricProblem,
    cache_root: Option<&Path>,
) -> Result<CachedTruth> {
    let grid = cfg.config.truth.grid_for(problem.lambda_domain());
    let options = cfg.config.truth.options();
    let key = truth_key(cfg, &grid, &options)?;
    let Some(root) = cache_root else {
        let truth = compute_ground_truth(problem, &grid, &options)?;
        return Ok(CachedTruth {
            grid: truth,
            key,
            hit: false,
            path: None,
        });
    };
    let path = root.join("cache").join(format!("truth-{}.csv", &key[..16]));
    if path.is_file() {
        if let Ok(truth) = read_ground_truth(&path) {
            if truth.lambda_dim == problem.lambda_dim() && truth.d == problem.dim() {
                return Ok(CachedTruth {
                    grid: truth,
                    key,
                    hit: true,
                    path: Some(path),
                });
            }
        }
    }
    let truth = compute_ground_truth(problem, &grid, &options)?;
    let tmp = path.with_extension("csv.tmp");
    write_ground_truth(&truth, create_file(&tmp)?)?;
    std::fs::rename(&tmp, &path).map_err(|e| CliError::io(&path, e))?;
    Ok(CachedTruth {
        grid: truth,
        key,
        hit: false,
        path: Some(path),
    })
}
