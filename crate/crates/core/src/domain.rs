use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Axis-aligned box `[lo_1, hi_1] × … × [lo_k, hi_k]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::Dimension {
                what: "box bounds",
                expected: lo.len(),
                found: hi.len(),
            });
        }
        if lo.is_empty() {
            return Err(Error::Construction {
                what: "box domain",
                message: "zero-dimensional box".into(),
            });
        }
        for (a, b) in lo.iter().zip(&hi) {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::Construction {
                    what: "box domain",
                    message: format!("invalid interval [{a}, {b}]"),
                });
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo], vec![hi])
    }

    /// The reference interval `[-1, 1]`.
    pub fn symmetric_unit() -> Self {
        Self {
            lo: vec![-1.0],
            hi: vec![1.0],
        }
    }

    pub fn unit_cube(dim: usize) -> Self {
        Self {
            lo: vec![0.0; dim],
            hi: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    /// Membership with a relative slack of 1e-12 per axis so grid endpoints
    /// produced by floating-point arithmetic are accepted.
    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point.iter().enumerate().all(|(k, &x)| {
                let slack = 1e-12 * self.width(k).max(1.0);
                x >= self.lo[k] - slack && x <= self.hi[k] + slack
            })
    }

    pub fn check(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim() {
            return Err(Error::Dimension {
                what: "lambda",
                expected: self.dim(),
                found: point.len(),
            });
        }
        if !self.contains(point) {
            return Err(Error::Domain {
                point: point.to_vec(),
                domain: self.to_string(),
            });
        }
        Ok(())
    }

    /// Affine map of coordinate `axis` onto `[-1, 1]`.
    #[inline]
    pub fn to_reference(&self, axis: usize, x: f64) -> f64 {
        let t = 2.0 * (x - self.lo[axis]) / self.width(axis) - 1.0;
        t.clamp(-1.0, 1.0)
    }

    #[inline]
    pub fn from_reference(&self, axis: usize, t: f64) -> f64 {
        self.lo[axis] + 0.5 * (t + 1.0) * self.width(axis)
    }

    /// All `2^dim` corners, in binary counting order.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let dim = self.dim();
        (0..1usize << dim)
            .map(|mask| {
                (0..dim)
                    .map(|k| {
                        if mask >> k & 1 == 1 {
                            self.hi[k]
                        } else {
                            self.lo[k]
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// `n` equally spaced points on axis `axis`, both endpoints included.
    /// A single point sits at the midpoint.
    pub fn axis_grid(&self, axis: usize, n: usize) -> Vec<f64> {
        match n {
            0 => Vec::new(),
            1 => vec![0.5 * (self.lo[axis] + self.hi[axis])],
            _ => {
                let h = self.width(axis) / (n - 1) as f64;
                (0..n)
                    .map(|i| {
                        if i == n - 1 {
                            self.hi[axis]
                        } else {
                            self.lo[axis] + i as f64 * h
                        }
                    })
                    .collect()
            }
        }
    }
}

impl fmt::Display for BoxDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (a, b)) in self.lo.iter().zip(&self.hi).enumerate() {
            if k > 0 {
                write!(f, "×")?;
            }
            write!(f, "[{a}, {b}]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inverted_interval() {
        assert!(BoxDomain::interval(1.0, 0.0).is_err());
    }

    #[test]
    fn grid_includes_endpoints() {
        let b = BoxDomain::interval(0.2, 1.0).unwrap();
        let g = b.axis_grid(0, 5);
        assert_eq!(g[0], 0.2);
        assert_eq!(g[4], 1.0);
        assert_eq!(b.axis_grid(0, 1), vec![0.6]);
    }

    #[test]
    fn corners_of_square() {
        let b = BoxDomain::new(vec![0.0, 0.2], vec![1.0, 1.0]).unwrap();
        let c = b.corners();
        assert_eq!(c.len(), 4);
        assert!(c.contains(&vec![1.0, 0.2]));
    }

    #[test]
    fn reference_map_roundtrip() {
        let b = BoxDomain::interval(0.2, 1.0).unwrap();
        assert_eq!(b.to_reference(0, 0.2), -1.0);
        assert_eq!(b.to_reference(0, 1.0), 1.0);
        assert!((b.from_reference(0, b.to_reference(0, 0.37)) - 0.37).abs() < 1e-15);
    }
}
