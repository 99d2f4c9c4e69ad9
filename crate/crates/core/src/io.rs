//! CSV formats for coefficients and cached ground truth.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::basis::{Basis, Coefficients};
use crate::error::{Error, Result};
use crate::evaluate::GroundTruthGrid;
use crate::optimize::format_f64;

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| {
        let line = e.position().map_or(0, |p| p.line());
        match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io {
                path: path.display().to_string(),
                source,
            },
            kind => Error::Parse {
                path: path.display().to_string(),
                line,
                message: format!("{kind:?}"),
            },
        }
    }
}

/// Creates `path` (and its parent directories) for buffered writing.
pub fn create_file(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

/// Rows `block, feature_index, value`.
pub fn write_coefficients<W: Write>(basis: &Basis, beta: &Coefficients, out: W) -> Result<()> {
    basis.check_binding(beta)?;
    let mut w = csv::Writer::from_writer(out);
    let p = Path::new("coefficients");
    w.write_record(["block", "feature_index", "value"])
        .map_err(csv_err(p))?;
    let q = basis.q();
    for (idx, v) in beta.values.iter().enumerate() {
        w.write_record([(idx / q).to_string(), (idx % q).to_string(), format_f64(*v)])
            .map_err(csv_err(p))?;
    }
    w.flush().map_err(io_err(p))
}

pub fn read_coefficients(basis: &Basis, path: &Path) -> Result<Coefficients> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut values = vec![f64::NAN; basis.p()];
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |m: &str| Error::Parse {
            path: path.display().to_string(),
            line,
            message: m.to_owned(),
        };
        if rec.len() != 3 {
            return Err(bad("expected 3 fields"));
        }
        let block: usize = rec[0].parse().map_err(|_| bad("bad block index"))?;
        let k: usize = rec[1].parse().map_err(|_| bad("bad feature index"))?;
        let v: f64 = rec[2].parse().map_err(|_| bad("bad value"))?;
        if block >= basis.d() || k >= basis.q() {
            return Err(bad("index out of range for the basis"));
        }
        values[block * basis.q() + k] = v;
    }
    Coefficients::new(basis, values)
}

/// Columns `lambda_0.., theta_0.., value, residual`; first line is a
/// `# resolution` comment.
pub fn write_ground_truth<W: Write>(truth: &GroundTruthGrid, mut out: W) -> Result<()> {
    let p = Path::new("ground truth");
    writeln!(out, "# {}", truth.resolution).map_err(io_err(p))?;
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..truth.lambda_dim)
        .map(|k| format!("lambda_{k}"))
        .collect();
    header.extend((0..truth.d).map(|k| format!("theta_{k}")));
    header.push("value".into());
    header.push("residual".into());
    w.write_record(&header).map_err(csv_err(p))?;
    for i in 0..truth.len() {
        let mut row: Vec<String> = truth.lambda(i).iter().map(|x| format_f64(*x)).collect();
        row.extend(truth.theta(i).iter().map(|x| format_f64(*x)));
        row.push(format_f64(truth.values[i]));
        row.push(format_f64(truth.residuals[i]));
        w.write_record(&row).map_err(csv_err(p))?;
    }
    w.flush().map_err(io_err(p))
}

pub fn read_ground_truth(path: &Path) -> Result<GroundTruthGrid> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
    let resolution = first.strip_prefix("# ").unwrap_or("").to_owned();
    let mut r = csv::Reader::from_reader(rest.as_bytes());
    let header = r.headers().map_err(csv_err(path))?.clone();
    let lambda_dim = header.iter().filter(|h| h.starts_with("lambda_")).count();
    let d = header.iter().filter(|h| h.starts_with("theta_")).count();
    if header.len() != lambda_dim + d + 2 || lambda_dim == 0 || d == 0 {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 2,
            message: "unexpected ground-truth header".into(),
        });
    }
    let mut truth = GroundTruthGrid {
        lambda_dim,
        d,
        lambdas: Vec::new(),
        thetas: Vec::new(),
        values: Vec::new(),
        residuals: Vec::new(),
        resolution,
    };
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        let line = rec.position().map_or(0, |p| p.line()) + 1;
        let nums: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let nums = nums.map_err(|_| Error::Parse {
            path: path.display().to_string(),
            line,
            message: "non-numeric field".into(),
        })?;
        truth.lambdas.extend_from_slice(&nums[..lambda_dim]);
        truth
            .thetas
            .extend_from_slice(&nums[lambda_dim..lambda_dim + d]);
        truth.values.push(nums[lambda_dim + d]);
        truth.residuals.push(nums[lambda_dim + d + 1]);
    }
    Ok(truth)
}
