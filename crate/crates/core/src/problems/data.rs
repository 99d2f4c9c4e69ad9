use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{max_asymmetry, symmetric_eigenvalues};
use crate::seeded_rng;

/// Binary classification design with labels in `{0, 1}`.
#[derive(Clone, Debug)]
pub struct ClassificationData {
    n: usize,
    d: usize,
    features: Vec<f64>,
    labels: Vec<u8>,
    positives: Vec<usize>,
    negatives: Vec<usize>,
}

impl ClassificationData {
    /// `features` is row-major `n × d`.
    pub fn new(features: Vec<f64>, labels: Vec<u8>, d: usize) -> Result<Self> {
        let n = labels.len();
        if features.len() != n * d {
            return Err(Error::Dimension {
                what: "feature matrix",
                expected: n * d,
                found: features.len(),
            });
        }
        if let Some(i) = features.iter().position(|x| !x.is_finite()) {
            return Err(Error::Construction {
                what: "classification data",
                message: format!("non-finite feature at row {}, column {}", i / d, i % d),
            });
        }
        let mut positives = Vec::new();
        let mut negatives = Vec::new();
        for (i, &y) in labels.iter().enumerate() {
            match y {
                1 => positives.push(i),
                0 => negatives.push(i),
                other => {
                    return Err(Error::Construction {
                        what: "classification data",
                        message: format!("label {other} at row {i} is not 0 or 1"),
                    })
                }
            }
        }
        if positives.is_empty() || negatives.is_empty() {
            return Err(Error::Construction {
                what: "classification data",
                message: format!(
                    "both classes must be nonempty ({} positive, {} negative)",
                    positives.len(),
                    negatives.len()
                ),
            });
        }
        Ok(Self {
            n,
            d,
            features,
            labels,
            positives,
            negatives,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn positives(&self) -> &[usize] {
        &self.positives
    }

    pub fn negatives(&self) -> &[usize] {
        &self.negatives
    }

    /// Z-score every column with nonzero spread.
    pub fn standardize(&mut self) {
        let n = self.n as f64;
        for j in 0..self.d {
            let mean = (0..self.n)
                .map(|i| self.features[i * self.d + j])
                .sum::<f64>()
                / n;
            let var = (0..self.n)
                .map(|i| (self.features[i * self.d + j] - mean).powi(2))
                .sum::<f64>()
                / n;
            let sd = var.sqrt();
            if sd > 1e-12 {
                for i in 0..self.n {
                    let x = &mut self.features[i * self.d + j];
                    *x = (*x - mean) / sd;
                }
            }
        }
    }

    /// Prepend a column of ones.
    pub fn add_intercept(&mut self) {
        let d = self.d + 1;
        let mut out = Vec::with_capacity(self.n * d);
        for i in 0..self.n {
            out.push(1.0);
            out.extend_from_slice(self.row(i));
        }
        self.features = out;
        self.d = d;
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ClassificationOptions {
    pub standardize: bool,
    pub intercept: bool,
}

/// Mean and covariance of per-period asset returns.
#[derive(Clone, Debug)]
pub struct MarketModel {
    pub mean: Vec<f64>,
    /// Row-major `d × d`.
    pub covariance: Vec<f64>,
}

impl MarketModel {
    pub fn new(mean: Vec<f64>, covariance: Vec<f64>) -> Result<Self> {
        let d = mean.len();
        if covariance.len() != d * d {
            return Err(Error::Dimension {
                what: "covariance",
                expected: d * d,
                found: covariance.len(),
            });
        }
        let asym = max_asymmetry(&covariance, d);
        if asym > 1e-12 * (1.0 + covariance.iter().fold(0.0f64, |m, x| m.max(x.abs()))) {
            return Err(Error::Construction {
                what: "market model",
                message: format!("covariance is not symmetric (max asymmetry {asym:e})"),
            });
        }
        let model = Self { mean, covariance };
        let (lo, _) = model.eigen_range()?;
        if lo < -1e-10 {
            return Err(Error::Conditioning(format!(
                "covariance has negative eigenvalue {lo:e}"
            )));
        }
        Ok(model)
    }

    /// Sample mean and covariance (denominator `n - 1`) of a row-major
    /// `periods × d` return matrix.
    pub fn from_returns(returns: &[f64], d: usize) -> Result<Self> {
        if d == 0 || !returns.len().is_multiple_of(d) {
            return Err(Error::Dimension {
                what: "return matrix",
                expected: d,
                found: returns.len(),
            });
        }
        let n = returns.len() / d;
        if n < 2 {
            return Err(Error::Construction {
                what: "market model",
                message: format!("need at least 2 periods for a covariance, found {n}"),
            });
        }
        let mut mean = vec![0.0; d];
        for row in returns.chunks(d) {
            for (m, r) in mean.iter_mut().zip(row) {
                *m += r;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut cov = vec![0.0; d * d];
        for row in returns.chunks(d) {
            for a in 0..d {
                let da = row[a] - mean[a];
                for b in a..d {
                    cov[a * d + b] += da * (row[b] - mean[b]);
                }
            }
        }
        for a in 0..d {
            for b in a..d {
                let v = cov[a * d + b] / (n as f64 - 1.0);
                cov[a * d + b] = v;
                cov[b * d + a] = v;
            }
        }
        Self::new(mean, cov)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Smallest and largest covariance eigenvalue.
    pub fn eigen_range(&self) -> Result<(f64, f64)> {
        let ev = symmetric_eigenvalues(&self.covariance, self.dim())?;
        Ok((ev[0], ev[ev.len() - 1]))
    }
}

fn read_numeric_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let shown = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(&shown, e))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(&shown, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&shown, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != headers.len() {
            return Err(Error::Parse {
                path: shown,
                line,
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        let mut row = Vec::with_capacity(record.len());
        for (field, name) in record.iter().zip(&headers) {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                path: shown.clone(),
                line,
                message: format!("column `{name}`: `{field}` is not a number"),
            })?;
            row.push(v);
        }
        rows.push(row);
    }
    Ok((headers, rows))
}

fn csv_error(path: &str, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_owned(),
            source,
        },
        kind => Error::Parse {
            path: path.to_owned(),
            line,
            message: format!("{kind:?}"),
        },
    }
}

/// One column per asset, one row per period.
pub fn ingest_returns_csv(path: impl AsRef<Path>) -> Result<MarketModel> {
    let (headers, rows) = read_numeric_csv(path.as_ref())?;
    let d = headers.len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    MarketModel::from_returns(&flat, d)
}

/// Label column named `y`; every other column is a numeric feature.
pub fn ingest_classification_csv(
    path: impl AsRef<Path>,
    options: ClassificationOptions,
) -> Result<ClassificationData> {
    let path = path.as_ref();
    let (headers, rows) = read_numeric_csv(path)?;
    let ycol = headers
        .iter()
        .position(|h| h == "y")
        .ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line: 1,
            message: "no label column named `y`".into(),
        })?;
    let d = headers.len() - 1;
    let mut features = Vec::with_capacity(rows.len() * d);
    let mut labels = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let y = row[ycol];
        if y != 0.0 && y != 1.0 {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: i as u64 + 2,
                message: format!("label {y} is not 0 or 1"),
            });
        }
        labels.push(y as u8);
        features.extend(
            row.iter()
                .enumerate()
                .filter(|&(j, _)| j != ycol)
                .map(|(_, v)| *v),
        );
    }
    let mut data = ClassificationData::new(features, labels, d)?;
    if options.standardize {
        data.standardize();
    }
    if options.intercept {
        data.add_intercept();
    }
    Ok(data)
}

/// Logistic-model data with exactly `round(n · imbalance)` negatives.
///
/// Features are standard normal; labels come from ranking noisy logits under
/// a random ground-truth direction, so the lowest-scoring rows are negative.
pub fn synth_classification(
    seed: u64,
    n: usize,
    d: usize,
    imbalance: f64,
) -> Result<ClassificationData> {
    if !(imbalance > 0.0 && imbalance < 1.0) {
        return Err(Error::config("imbalance", "must lie in (0, 1)"));
    }
    let n_neg = (n as f64 * imbalance).round() as usize;
    if n_neg == 0 || n_neg >= n {
        return Err(Error::Construction {
            what: "synthetic classification data",
            message: format!("n = {n} with imbalance {imbalance} leaves a class empty"),
        });
    }
    let mut rng = seeded_rng(seed);
    let features: Vec<f64> = (0..n * d)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let w: Vec<f64> = (0..d)
        .map(|_| StandardNormal.sample(&mut rng))
        .map(|x: f64| x / (d as f64).sqrt())
        .collect();
    let mut scores: Vec<(f64, usize)> = (0..n)
        .map(|i| {
            let u: f64 = rng.random_range(1e-12..1.0 - 1e-12);
            let logit: f64 = features[i * d..(i + 1) * d]
                .iter()
                .zip(&w)
                .map(|(x, w)| x * w)
                .sum();
            (logit + (u / (1.0 - u)).ln(), i)
        })
        .collect();
    scores.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut labels = vec![1u8; n];
    for &(_, i) in scores.iter().take(n_neg) {
        labels[i] = 0;
    }
    ClassificationData::new(features, labels, d)
}

/// Synthetic monthly returns, in percent, from a one-factor model with
/// industry-style loadings; 600 periods are drawn and the sample moments
/// returned.
pub fn synth_market(seed: u64, d: usize) -> Result<MarketModel> {
    if d == 0 {
        return Err(Error::config("assets", "must be positive"));
    }
    let periods = 600;
    let mut rng = seeded_rng(seed);
    let beta: Vec<f64> = (0..d).map(|_| rng.random_range(0.6..1.4)).collect();
    let alpha: Vec<f64> = (0..d).map(|_| rng.random_range(0.2..0.8)).collect();
    let idio: Vec<f64> = (0..d).map(|_| rng.random_range(2.0..4.0)).collect();
    let market_vol = 4.5;
    let mut returns = Vec::with_capacity(periods * d);
    for _ in 0..periods {
        let f: f64 = StandardNormal.sample(&mut rng);
        for k in 0..d {
            let e: f64 = StandardNormal.sample(&mut rng);
            returns.push(alpha[k] + beta[k] * market_vol * f + idio[k] * e);
        }
    }
    MarketModel::from_returns(&returns, d)
}
