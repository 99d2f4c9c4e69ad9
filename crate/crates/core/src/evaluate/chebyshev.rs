use serde::Serialize;

use super::GroundTruthGrid;
use crate::error::{Error, Result};

/// Chebyshev coefficients `a_0..a_N` of the degree-`N` interpolant of `f`
/// at the Lobatto points `cos(πj/N)`.
pub fn chebyshev_coeffs<F: Fn(f64) -> f64>(f: F, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::config("N", "need at least 2 Chebyshev points"));
    }
    let nf = n as f64;
    let vals: Vec<f64> = (0..=n)
        .map(|j| f((std::f64::consts::PI * j as f64 / nf).cos()))
        .collect();
    if let Some(j) = vals.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "Chebyshev sample",
            node: j,
        });
    }
    let table: Vec<f64> = (0..2 * n)
        .map(|m| (std::f64::consts::PI * m as f64 / nf).cos())
        .collect();
    let mut a = vec![0.0; n + 1];
    for (k, ak) in a.iter_mut().enumerate() {
        let mut s = 0.5 * (vals[0] + vals[n] * table[(k * n) % (2 * n)]);
        for j in 1..n {
            s += vals[j] * table[(j * k) % (2 * n)];
        }
        *ak = 2.0 * s / nf;
    }
    a[0] *= 0.5;
    a[n] *= 0.5;
    Ok(a)
}

/// Clenshaw evaluation of `Σ a_k T_k(x)`.
pub fn chebyshev_eval(a: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ak in a.iter().skip(1).rev() {
        let b0 = ak + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    a.first().copied().unwrap_or(0.0) + x * b1 - b2
}

/// A least-squares decay estimate.
#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    /// `ω` for geometric fits, the order for algebraic fits.
    pub rate: f64,
    pub r_squared: f64,
    pub points: usize,
    pub first: usize,
    pub last: usize,
}

fn regress(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let r2 = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    (slope, icpt, r2)
}

/// Relative level below which coefficients are treated as roundoff.
const NOISE_FLOOR: f64 = 1e-12;

/// Fits `|a_n| ≈ M ω^{-n}` over the coefficients above the roundoff floor,
/// from a quarter of the resolved range to its end (zero coefficients, e.g.
/// those killed by parity, are skipped).
pub fn fit_geometric_rate(coeffs: &[f64]) -> Result<DecayFit> {
    let scale = coeffs.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let floor = NOISE_FLOOR * scale;
    let cap = (coeffs.len() * 9) / 10;
    let last = (1..cap)
        .rev()
        .find(|&k| coeffs[k].abs() > floor)
        .unwrap_or(0);
    let first = (last / 4).max(1);
    let (xs, ys): (Vec<f64>, Vec<f64>) = (first..=last)
        .filter(|&k| coeffs[k].abs() > floor)
        .map(|k| (k as f64, coeffs[k].abs().ln()))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::config(
            "coefficients",
            "fewer than 2 resolved coefficients to fit",
        ));
    }
    let (slope, _, r2) = regress(&xs, &ys);
    Ok(DecayFit {
        rate: (-slope).exp(),
        r_squared: r2,
        points: xs.len(),
        first,
        last,
    })
}

/// Fits the algebraic order `ν` of the truncation error
/// `Σ_{k>n} |a_k| ≈ M n^{-ν}` for `n` between 8 and a quarter of the
/// available degree.
pub fn fit_algebraic_order(coeffs: &[f64]) -> Result<DecayFit> {
    let n = coeffs.len();
    let mut tail = vec![0.0; n + 1];
    for k in (0..n).rev() {
        tail[k] = tail[k + 1] + coeffs[k].abs();
    }
    let scale = tail[0];
    let first = 8;
    let last = n / 4;
    let (xs, ys): (Vec<f64>, Vec<f64>) = (first..=last)
        .filter(|&k| k + 1 < n && tail[k + 1] > NOISE_FLOOR * scale)
        .map(|k| ((k as f64).ln(), tail[k + 1].ln()))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::config(
            "coefficients",
            "fewer than 2 resolved tail sums to fit",
        ));
    }
    let (slope, _, r2) = regress(&xs, &ys);
    Ok(DecayFit {
        rate: -slope,
        r_squared: r2,
        points: xs.len(),
        first,
        last,
    })
}

/// Four-point Lagrange interpolation of samples on the uniform grid
/// `lo + i h`.
pub fn local_cubic(values: &[f64], lo: f64, h: f64, x: f64) -> f64 {
    let n = values.len();
    if n == 1 {
        return values[0];
    }
    if n < 4 {
        let t = ((x - lo) / h).clamp(0.0, (n - 1) as f64);
        let i = (t.floor() as usize).min(n - 2);
        let s = t - i as f64;
        return values[i] * (1.0 - s) + values[i + 1] * s;
    }
    let t = (x - lo) / h;
    let i = (t.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let s = t - i as f64;
    let (y0, y1, y2, y3) = (values[i], values[i + 1], values[i + 2], values[i + 3]);
    let l0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
    let l1 = s * (s - 2.0) * (s - 3.0) / 2.0;
    let l2 = -s * (s - 1.0) * (s - 3.0) / 2.0;
    let l3 = s * (s - 1.0) * (s - 2.0) / 6.0;
    y0 * l0 + y1 * l1 + y2 * l2 + y3 * l3
}

/// Chebyshev resolution used by the truncation bound.
const TRUNCATION_DEGREE: usize = 256;

/// Upper bound on the minimal path error of a `q`-feature polynomial basis:
/// `(d L / 2) · (max_i sup_λ |θ*_i(λ) - T_{q-1}[θ*_i](λ)|)²`, where
/// `T_{q-1}` is the Chebyshev truncation to degree `q - 1` and the sup runs
/// over the truth grid. The path is reconstructed between nodes by local
/// cubic interpolation.
pub fn truncation_path_error_bound(
    truth: &GroundTruthGrid,
    q: usize,
    smoothness: f64,
) -> Result<f64> {
    if truth.lambda_dim != 1 {
        return Err(Error::Capability(
            "the truncation bound is implemented for one-dimensional hyperparameters".into(),
        ));
    }
    let n = truth.len();
    if n < 2 {
        return Err(Error::GridMismatch(
            "need at least 2 ground-truth nodes".into(),
        ));
    }
    let lo = truth.lambdas[0];
    let hi = truth.lambdas[n - 1];
    let h = (hi - lo) / (n - 1) as f64;
    let uniform = truth
        .lambdas
        .iter()
        .enumerate()
        .all(|(i, &x)| (x - (lo + i as f64 * h)).abs() <= 1e-9 * (hi - lo).abs().max(1.0));
    if !uniform || !(h > 0.0) {
        return Err(Error::GridMismatch(
            "truncation bound needs a sorted uniform grid".into(),
        ));
    }
    let to_ref = |x: f64| 2.0 * (x - lo) / (hi - lo) - 1.0;
    let from_ref = |t: f64| lo + 0.5 * (t + 1.0) * (hi - lo);
    let degree = TRUNCATION_DEGREE.max(4 * q);
    let mut worst = 0.0f64;
    for i in 0..truth.d {
        let column: Vec<f64> = (0..n).map(|j| truth.theta(j)[i]).collect();
        let a = chebyshev_coeffs(|t| local_cubic(&column, lo, h, from_ref(t)), degree)?;
        let kept = &a[..q.min(a.len())];
        for (c, &lam) in column.iter().zip(&truth.lambdas[..n]) {
            let approx = chebyshev_eval(kept, to_ref(lam));
            worst = worst.max((c - approx).abs());
        }
    }
    Ok(0.5 * truth.d as f64 * smoothness * worst * worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::{compute_ground_truth, GridSpec};
    use crate::problems::{QuadraticToy, TargetPath};

    #[test]
    fn square_identity() {
        let a = chebyshev_coeffs(|x| x * x, 16).unwrap();
        assert!((a[0] - 0.5).abs() < 1e-14);
        assert!(a[1].abs() < 1e-14);
        assert!((a[2] - 0.5).abs() < 1e-14);
        assert!(a[3..].iter().all(|c| c.abs() < 1e-14));
    }

    #[test]
    fn clenshaw_round_trip() {
        let a = chebyshev_coeffs(|x| x.exp(), 30).unwrap();
        for x in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            assert!((chebyshev_eval(&a, x) - f64::exp(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn runge_rate() {
        let a = chebyshev_coeffs(|x| 1.0 / (1.0 + 25.0 * x * x), 256).unwrap();
        let fit = fit_geometric_rate(&a).unwrap();
        let omega = 0.2f64.asinh().exp();
        assert!((fit.rate - omega).abs() / omega < 0.1, "{fit:?}");
    }

    #[test]
    fn cubic_abs_order() {
        let a = chebyshev_coeffs(|x: f64| x.abs().powi(3), 1024).unwrap();
        let fit = fit_algebraic_order(&a).unwrap();
        assert!((fit.rate - 3.0).abs() < 0.3, "{fit:?}");
    }

    #[test]
    fn polynomial_tail_is_zero() {
        let a = chebyshev_coeffs(|x: f64| 3.0 * x.powi(5) - x * x + 2.0, 40).unwrap();
        assert!(a[6..].iter().all(|c| c.abs() < 1e-13));
    }

    #[test]
    fn cubic_path_truncation() {
        let p = QuadraticToy::on_symmetric_unit(TargetPath::Power(3));
        let t = compute_ground_truth(
            &p,
            &GridSpec::Uniform { per_axis: 1024 },
            &Default::default(),
        )
        .unwrap();
        let b2 = truncation_path_error_bound(&t, 2, 1.0).unwrap();
        assert!((b2 - 0.5 / 16.0).abs() < 1e-9, "{b2}");
        let b3 = truncation_path_error_bound(&t, 3, 1.0).unwrap();
        assert!((b3 - b2).abs() < 1e-12);
        let b4 = truncation_path_error_bound(&t, 4, 1.0).unwrap();
        assert!(b4 < 1e-20);
        let lin = QuadraticToy::on_symmetric_unit(TargetPath::Power(1));
        let tl = compute_ground_truth(
            &lin,
            &GridSpec::Uniform { per_axis: 64 },
            &Default::default(),
        )
        .unwrap();
        assert!(truncation_path_error_bound(&tl, 2, 1.0).unwrap() < 1e-25);
    }
}
