//! Block-structured basis expansions `θ̂(λ) = Φ(λ) β`.
//!
//! Every basis here is block diagonal: each of the `d` output coordinates has
//! its own copy of the same `q` per-coordinate features `ψ(λ)`, so
//! `Φ(λ) ∈ ℝ^{d × qd}` has the row `ψ(λ)ᵀ` in columns `[iq, (i+1)q)` of row
//! `i`. Coefficients are laid out block by block: `β[i*q + k]` multiplies
//! feature `k` of coordinate `i`. `Φ` is never materialised; products with it
//! cost `O(p)`.

use serde::{Deserialize, Serialize};
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use crate::domain::BoxDomain;
use crate::error::{Error, Result};

/// Number of hyperparameters consumed by [`BasisKind::PortfolioCustom12D`].
pub const PORTFOLIO_LAMBDA_DIM: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisKind {
    /// Legendre polynomials `P_0 … P_{q-1}` on `[-1, 1]`.
    Legendre,
    /// Legendre polynomials composed with the affine map of `[a, b]` onto
    /// `[-1, 1]`.
    ShiftedLegendre,
    /// Jacobi polynomials `P_n^{(alpha, beta)}` composed with `λ ↦ 2λ - 1`
    /// on `[0, 1]`. Orthogonal under `Beta(beta + 1, alpha + 1)`.
    ShiftedJacobi { alpha: f64, beta: f64 },
    /// Products `P_i(λ₁) P_j(λ₂)`, `0 ≤ i, j < √q`, of shifted Legendre
    /// polynomials on a 2-D box. Feature `i * √q + j` is `P_i(λ₁) P_j(λ₂)`.
    #[serde(rename = "tensor_legendre_2d")]
    TensorLegendre2D,
    /// Raw powers `1, λ, λ², …`.
    Monomial,
    /// Features `λ_c · λ₂^k` on `ℝ¹²` with `c = (j-1) mod 12 + 1` and
    /// `k = ⌊(j-1) / 12⌋`, `j = 1 … q`: the first twelve features are the
    /// hyperparameters themselves, each later tier multiplies by one more
    /// power of `λ₂`.
    #[serde(rename = "portfolio_custom_12d")]
    PortfolioCustom12D,
}

impl BasisKind {
    fn is_legendre_family(&self) -> bool {
        matches!(
            self,
            BasisKind::Legendre | BasisKind::ShiftedLegendre | BasisKind::TensorLegendre2D
        )
    }
}

/// A basis with `q` per-coordinate features for `d` output coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Basis {
    kind: BasisKind,
    q: usize,
    d: usize,
    domain: BoxDomain,
    /// Scale Legendre-family features to unit second moment under the
    /// uniform distribution on the domain.
    #[serde(default)]
    normalized: bool,
}

impl Basis {
    pub fn new(kind: BasisKind, q: usize, d: usize, domain: BoxDomain) -> Result<Self> {
        if d == 0 {
            return Err(Error::Construction {
                what: "basis",
                message: "output dimension d must be positive".into(),
            });
        }
        let want_dim = match kind {
            BasisKind::TensorLegendre2D => 2,
            BasisKind::PortfolioCustom12D => PORTFOLIO_LAMBDA_DIM,
            _ => 1,
        };
        if domain.dim() != want_dim {
            return Err(Error::Dimension {
                what: "basis domain",
                expected: want_dim,
                found: domain.dim(),
            });
        }
        match &kind {
            BasisKind::Legendre if domain != BoxDomain::symmetric_unit() => {
                return Err(Error::Construction {
                    what: "basis",
                    message: format!("Legendre basis lives on [-1, 1], got {domain}"),
                });
            }
            BasisKind::ShiftedJacobi { alpha, beta } => {
                if !(*alpha > -1.0 && *beta > -1.0) {
                    return Err(Error::Construction {
                        what: "basis",
                        message: format!("Jacobi parameters must exceed -1, got ({alpha}, {beta})"),
                    });
                }
                if domain != BoxDomain::unit_cube(1) {
                    return Err(Error::Construction {
                        what: "basis",
                        message: format!("shifted Jacobi basis lives on [0, 1], got {domain}"),
                    });
                }
            }
            BasisKind::TensorLegendre2D => {
                let side = (q as f64).sqrt().round() as usize;
                if side * side != q {
                    return Err(Error::Construction {
                        what: "basis",
                        message: format!("tensor basis needs a perfect-square q, got {q}"),
                    });
                }
            }
            _ => {}
        }
        Ok(Self {
            kind,
            q,
            d,
            domain,
            normalized: false,
        })
    }

    pub fn legendre(q: usize, d: usize) -> Self {
        Self::new(BasisKind::Legendre, q, d, BoxDomain::symmetric_unit()).expect("valid basis")
    }

    pub fn shifted_legendre(q: usize, d: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(
            BasisKind::ShiftedLegendre,
            q,
            d,
            BoxDomain::interval(lo, hi)?,
        )
    }

    pub fn shifted_jacobi(q: usize, d: usize, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(
            BasisKind::ShiftedJacobi { alpha, beta },
            q,
            d,
            BoxDomain::unit_cube(1),
        )
    }

    pub fn tensor_legendre(side: usize, d: usize, domain: BoxDomain) -> Result<Self> {
        Self::new(BasisKind::TensorLegendre2D, side * side, d, domain)
    }

    pub fn monomial(q: usize, d: usize, domain: BoxDomain) -> Result<Self> {
        Self::new(BasisKind::Monomial, q, d, domain)
    }

    pub fn portfolio_custom(q: usize, d: usize, domain: BoxDomain) -> Result<Self> {
        Self::new(BasisKind::PortfolioCustom12D, q, d, domain)
    }

    /// The same basis with each Legendre-family feature rescaled to unit
    /// second moment under the uniform distribution on the domain, which
    /// makes the features orthonormal.
    pub fn orthonormal(mut self) -> Result<Self> {
        if !self.kind.is_legendre_family() {
            return Err(Error::Capability(format!(
                "orthonormal scaling is only defined for Legendre kinds, not {:?}",
                self.kind
            )));
        }
        self.normalized = true;
        Ok(self)
    }

    /// Member of the same family with `q` features.
    pub fn with_q(&self, q: usize) -> Result<Basis> {
        let mut b = Basis::new(self.kind.clone(), q, self.d, self.domain.clone())?;
        b.normalized = self.normalized;
        Ok(b)
    }

    pub fn kind(&self) -> &BasisKind {
        &self.kind
    }

    /// Per-coordinate feature count.
    pub fn q(&self) -> usize {
        self.q
    }

    /// Output dimension.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Total coefficient count `q·d`.
    pub fn p(&self) -> usize {
        self.q * self.d
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn lambda_dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// For tensor kinds, features per axis.
    pub fn side(&self) -> Option<usize> {
        match self.kind {
            BasisKind::TensorLegendre2D => Some((self.q as f64).sqrt().round() as usize),
            _ => None,
        }
    }

    /// Highest polynomial degree along any single axis, when the features are
    /// polynomials in each coordinate separately.
    pub fn max_axis_degree(&self) -> Option<usize> {
        match self.kind {
            BasisKind::Legendre
            | BasisKind::ShiftedLegendre
            | BasisKind::ShiftedJacobi { .. }
            | BasisKind::Monomial => Some(self.q.saturating_sub(1)),
            BasisKind::TensorLegendre2D => self.side().map(|s| s.saturating_sub(1)),
            BasisKind::PortfolioCustom12D => {
                if self.q == 0 {
                    Some(0)
                } else {
                    // λ₂ carries both its own feature and the tier powers
                    Some((self.q - 1) / PORTFOLIO_LAMBDA_DIM + 1)
                }
            }
        }
    }

    /// Stable identifier of the basis, used to bind coefficients to it.
    pub fn id(&self) -> u64 {
        let mut h = DefaultHasher::new();
        std::mem::discriminant(&self.kind).hash(&mut h);
        if let BasisKind::ShiftedJacobi { alpha, beta } = self.kind {
            alpha.to_bits().hash(&mut h);
            beta.to_bits().hash(&mut h);
        }
        self.q.hash(&mut h);
        self.d.hash(&mut h);
        self.normalized.hash(&mut h);
        for x in self.domain.lo.iter().chain(&self.domain.hi) {
            x.to_bits().hash(&mut h);
        }
        h.finish()
    }

    /// Per-coordinate feature row `ψ(λ)`.
    pub fn eval_features(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.q];
        self.eval_features_into(lambda, &mut out)?;
        Ok(out)
    }

    pub fn eval_features_into(&self, lambda: &[f64], out: &mut [f64]) -> Result<()> {
        self.domain.check(lambda)?;
        if out.len() != self.q {
            return Err(Error::Dimension {
                what: "feature buffer",
                expected: self.q,
                found: out.len(),
            });
        }
        self.features_unchecked(lambda, out);
        Ok(())
    }

    /// Feature evaluation without the domain check. `lambda` must be inside
    /// the domain and `out.len() == q`.
    pub(crate) fn features_unchecked(&self, lambda: &[f64], out: &mut [f64]) {
        if self.q == 0 {
            return;
        }
        match &self.kind {
            BasisKind::Legendre | BasisKind::ShiftedLegendre => {
                legendre_into(self.domain.to_reference(0, lambda[0]), out);
            }
            BasisKind::ShiftedJacobi { alpha, beta } => {
                jacobi_into(*alpha, *beta, 2.0 * lambda[0] - 1.0, out);
            }
            BasisKind::TensorLegendre2D => {
                let side = self.side().unwrap_or(0);
                let mut a = vec![0.0; side];
                let mut b = vec![0.0; side];
                legendre_into(self.domain.to_reference(0, lambda[0]), &mut a);
                legendre_into(self.domain.to_reference(1, lambda[1]), &mut b);
                for i in 0..side {
                    for j in 0..side {
                        out[i * side + j] = a[i] * b[j];
                    }
                }
            }
            BasisKind::Monomial => {
                let x = lambda[0];
                let mut v = 1.0;
                for o in out.iter_mut() {
                    *o = v;
                    v *= x;
                }
            }
            BasisKind::PortfolioCustom12D => {
                let l2 = lambda[1];
                let mut power = 1.0;
                for (idx, o) in out.iter_mut().enumerate() {
                    let coord = idx % PORTFOLIO_LAMBDA_DIM;
                    if idx > 0 && coord == 0 {
                        power *= l2;
                    }
                    *o = lambda[coord] * power;
                }
            }
        }
        if self.normalized {
            match self.kind {
                BasisKind::TensorLegendre2D => {
                    let side = self.side().unwrap_or(0);
                    for i in 0..side {
                        for j in 0..side {
                            out[i * side + j] *= (((2 * i + 1) * (2 * j + 1)) as f64).sqrt();
                        }
                    }
                }
                _ => {
                    for (n, o) in out.iter_mut().enumerate() {
                        *o *= ((2 * n + 1) as f64).sqrt();
                    }
                }
            }
        }
    }

    /// Checks that `beta` was produced for this basis.
    pub fn check_binding(&self, beta: &Coefficients) -> Result<()> {
        if beta.basis_id != self.id() {
            return Err(Error::Binding {
                expected: self.id(),
                found: beta.basis_id,
            });
        }
        Ok(())
    }

    /// `θ̂(λ) = Φ(λ) β`.
    pub fn apply(&self, beta: &Coefficients, lambda: &[f64]) -> Result<Vec<f64>> {
        self.check_binding(beta)?;
        let psi = self.eval_features(lambda)?;
        let mut out = vec![0.0; self.d];
        contract(&psi, &beta.values, &mut out);
        Ok(out)
    }

    /// `Φ(λ)ᵀ g`, the adjoint of [`Basis::apply`].
    pub fn pullback_gradient(&self, g: &[f64], lambda: &[f64]) -> Result<Vec<f64>> {
        if g.len() != self.d {
            return Err(Error::Dimension {
                what: "gradient",
                expected: self.d,
                found: g.len(),
            });
        }
        let psi = self.eval_features(lambda)?;
        let mut out = vec![0.0; self.p()];
        pullback_axpy(&psi, g, 1.0, &mut out);
        Ok(out)
    }

    /// Number of nonzero entries of the implicit `Φ(λ)` (its sparsity
    /// pattern, not counting accidental zeros of `ψ`).
    pub fn structural_nonzeros(&self) -> usize {
        self.p()
    }

    /// The next basis in the nested family: one more feature per coordinate,
    /// or one more degree per axis for tensor kinds.
    pub fn extend(&self) -> Result<Basis> {
        let mut next = self.clone();
        next.q = match self.kind {
            BasisKind::TensorLegendre2D => {
                let s = self.side().unwrap_or(0) + 1;
                s * s
            }
            _ => self.q + 1,
        };
        Ok(next)
    }

    /// Index of each of this basis's features inside `larger`, which must be
    /// a member of the same nested family with at least as many features.
    pub fn embedding_into(&self, larger: &Basis) -> Result<Vec<usize>> {
        let compatible = self.kind == larger.kind
            && self.d == larger.d
            && self.domain == larger.domain
            && self.normalized == larger.normalized
            && larger.q >= self.q;
        if !compatible {
            return Err(Error::Capability(format!(
                "basis {:?} (q = {}) is not nested in {:?} (q = {})",
                self.kind, self.q, larger.kind, larger.q
            )));
        }
        Ok(match self.kind {
            BasisKind::TensorLegendre2D => {
                let s = self.side().unwrap_or(0);
                let t = larger.side().unwrap_or(0);
                (0..s)
                    .flat_map(|i| (0..s).map(move |j| i * t + j))
                    .collect()
            }
            _ => (0..self.q).collect(),
        })
    }
}

/// `out_i = Σ_k ψ_k β[i q + k]`.
#[inline]
pub fn contract(psi: &[f64], beta: &[f64], out: &mut [f64]) {
    let q = psi.len();
    for (i, o) in out.iter_mut().enumerate() {
        let block = &beta[i * q..(i + 1) * q];
        *o = block.iter().zip(psi).map(|(b, p)| b * p).sum();
    }
}

/// `acc[i q + k] += scale · g_i ψ_k`.
#[inline]
pub fn pullback_axpy(psi: &[f64], g: &[f64], scale: f64, acc: &mut [f64]) {
    let q = psi.len();
    for (i, &gi) in g.iter().enumerate() {
        let s = scale * gi;
        for (a, p) in acc[i * q..(i + 1) * q].iter_mut().zip(psi) {
            *a += s * p;
        }
    }
}

/// Legendre polynomials `P_0(x) … P_{n-1}(x)` by the three-term recurrence
/// `(n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}`.
pub fn legendre_into(x: f64, out: &mut [f64]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    out[0] = 1.0;
    if n == 1 {
        return;
    }
    out[1] = x;
    for k in 1..n - 1 {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + 1.0) * x * out[k] - kf * out[k - 1]) / (kf + 1.0);
    }
}

/// Jacobi polynomials `P_0^{(a,b)}(x) … P_{n-1}^{(a,b)}(x)`.
pub fn jacobi_into(a: f64, b: f64, x: f64, out: &mut [f64]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    out[0] = 1.0;
    if n == 1 {
        return;
    }
    out[1] = 0.5 * (a - b) + 0.5 * (a + b + 2.0) * x;
    for k in 2..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let c0 = 2.0 * kf * (kf + a + b) * (s - 2.0);
        let c1 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c2 = 2.0 * (kf + a - 1.0) * (kf + b - 1.0) * s;
        out[k] = (c1 * out[k - 1] - c2 * out[k - 2]) / c0;
    }
}

/// Coefficients `β ∈ ℝ^p` bound to the basis that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficients {
    pub values: Vec<f64>,
    pub basis_id: u64,
}

impl Coefficients {
    pub fn zeros(basis: &Basis) -> Self {
        Self {
            values: vec![0.0; basis.p()],
            basis_id: basis.id(),
        }
    }

    pub fn new(basis: &Basis, values: Vec<f64>) -> Result<Self> {
        if values.len() != basis.p() {
            return Err(Error::Dimension {
                what: "coefficients",
                expected: basis.p(),
                found: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "coefficients",
                node: k,
            });
        }
        Ok(Self {
            values,
            basis_id: basis.id(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Serializable `{kind, q, domain}` descriptor used in run configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    #[serde(flatten)]
    pub kind: BasisKind,
    pub q: usize,
    pub domain: Option<BoxDomain>,
    #[serde(default)]
    pub orthonormal: bool,
}

impl BasisSpec {
    /// Builds the basis for a problem with `d` outputs; the problem's own
    /// hyperparameter box is used when no domain is given.
    pub fn build(&self, d: usize, default_domain: &BoxDomain) -> Result<Basis> {
        let domain = match (&self.domain, &self.kind) {
            (Some(dom), _) => dom.clone(),
            (None, BasisKind::Legendre) => BoxDomain::symmetric_unit(),
            (None, BasisKind::ShiftedJacobi { .. }) => BoxDomain::unit_cube(1),
            (None, _) => default_domain.clone(),
        };
        let basis = Basis::new(self.kind.clone(), self.q, d, domain)?;
        if self.orthonormal {
            basis.orthonormal()
        } else {
            Ok(basis)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn legendre_at_one_is_one() {
        let b = Basis::legendre(3, 1);
        assert_eq!(b.eval_features(&[1.0]).unwrap(), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn legendre_at_zero() {
        let b = Basis::legendre(3, 1);
        assert_eq!(b.eval_features(&[0.0]).unwrap(), vec![1.0, 0.0, -0.5]);
        assert_eq!(
            Basis::legendre(1, 1).eval_features(&[0.3]).unwrap(),
            vec![1.0]
        );
    }

    #[test]
    fn empty_feature_row_for_q_zero() {
        let b = Basis::legendre(0, 2);
        assert!(b.eval_features(&[0.1]).unwrap().is_empty());
        assert_eq!(b.p(), 0);
    }

    #[test]
    fn out_of_domain_is_an_error() {
        let b = Basis::legendre(3, 1);
        assert!(matches!(b.eval_features(&[1.5]), Err(Error::Domain { .. })));
        let s = Basis::shifted_legendre(3, 1, 0.0, 1.0).unwrap();
        assert!(s.eval_features(&[-0.01]).is_err());
        assert!(s.eval_features(&[0.0]).is_ok());
    }

    #[test]
    fn apply_block_structure() {
        let b = Basis::legendre(1, 2);
        let beta = Coefficients::new(&b, vec![0.7, -1.3]).unwrap();
        assert_eq!(b.apply(&beta, &[0.3]).unwrap(), vec![0.7, -1.3]);

        let b = Basis::legendre(2, 1);
        let beta = Coefficients::new(&b, vec![0.0, 1.0]).unwrap();
        assert_eq!(b.apply(&beta, &[0.5]).unwrap(), vec![0.5]);

        assert_eq!(Basis::legendre(2, 3).structural_nonzeros(), 6);
    }

    #[test]
    fn apply_reproduces_square() {
        let b = Basis::legendre(3, 1);
        let beta = Coefficients::new(&b, vec![1.0 / 3.0, 0.0, 2.0 / 3.0]).unwrap();
        for &x in &[-1.0, -0.4, 0.0, 0.25, 0.9] {
            let y = b.apply(&beta, &[x]).unwrap()[0];
            assert!((y - x * x).abs() < 1e-15);
        }
        let zero = Coefficients::zeros(&b);
        assert_eq!(b.apply(&zero, &[0.2]).unwrap(), vec![0.0]);
    }

    #[test]
    fn binding_mismatch() {
        let b = Basis::legendre(3, 1);
        let other = Basis::legendre(4, 1);
        let beta = Coefficients::zeros(&other);
        assert!(matches!(b.apply(&beta, &[0.0]), Err(Error::Binding { .. })));
    }

    #[test]
    fn pullback_examples() {
        let b = Basis::legendre(2, 1);
        assert_eq!(b.pullback_gradient(&[2.0], &[0.5]).unwrap(), vec![2.0, 1.0]);
        assert_eq!(b.pullback_gradient(&[0.0], &[0.5]).unwrap(), vec![0.0, 0.0]);
        assert!(b.pullback_gradient(&[1.0, 2.0], &[0.5]).is_err());
    }

    #[test]
    fn extension_examples() {
        let b = Basis::legendre(5, 1);
        let e = b.extend().unwrap();
        assert_eq!(e.q(), 6);
        let f5 = b.eval_features(&[0.37]).unwrap();
        let f6 = e.eval_features(&[0.37]).unwrap();
        assert!(close(&f5, &f6[..5], 0.0));

        let dom = BoxDomain::new(vec![0.0, 0.2], vec![1.0, 1.0]).unwrap();
        let t = Basis::tensor_legendre(2, 1, dom).unwrap();
        assert_eq!(t.extend().unwrap().q(), 9);

        let m = Basis::monomial(2, 1, BoxDomain::symmetric_unit()).unwrap();
        let m3 = m.extend().unwrap();
        assert_eq!(m3.eval_features(&[0.5]).unwrap(), vec![1.0, 0.5, 0.25]);
    }

    #[test]
    fn tensor_embedding_matches_features() {
        let dom = BoxDomain::new(vec![0.0, 0.2], vec![1.0, 1.0]).unwrap();
        let t = Basis::tensor_legendre(3, 2, dom).unwrap();
        let big = t.extend().unwrap();
        let map = t.embedding_into(&big).unwrap();
        let lam = [0.31, 0.77];
        let small = t.eval_features(&lam).unwrap();
        let large = big.eval_features(&lam).unwrap();
        for (k, &j) in map.iter().enumerate() {
            assert_eq!(small[k], large[j]);
        }
        assert_eq!(big.q() - t.q(), 2 * 3 + 1);
    }

    #[test]
    fn tensor_requires_square() {
        let dom = BoxDomain::new(vec![0.0, 0.2], vec![1.0, 1.0]).unwrap();
        assert!(Basis::new(BasisKind::TensorLegendre2D, 5, 1, dom).is_err());
    }

    #[test]
    fn portfolio_features_sweep_coordinates_then_powers() {
        let dom = BoxDomain::unit_cube(12);
        let lam: Vec<f64> = (1..=12).map(|k| k as f64 / 13.0).collect();
        let b = Basis::portfolio_custom(12, 10, dom.clone()).unwrap();
        assert_eq!(b.eval_features(&lam).unwrap(), lam);
        let b = Basis::portfolio_custom(25, 10, dom).unwrap();
        let f = b.eval_features(&lam).unwrap();
        for c in 0..12 {
            assert!((f[12 + c] - lam[c] * lam[1]).abs() < 1e-16);
        }
        assert!((f[24] - lam[0] * lam[1] * lam[1]).abs() < 1e-16);
    }

    #[test]
    fn jacobi_reduces_to_legendre() {
        let mut a = vec![0.0; 8];
        let mut b = vec![0.0; 8];
        for &x in &[-0.9, -0.2, 0.4, 1.0] {
            jacobi_into(0.0, 0.0, x, &mut a);
            legendre_into(x, &mut b);
            assert!(close(&a, &b, 1e-14));
        }
    }

    #[test]
    fn jacobi_known_values() {
        // P_2^{(a,b)}(1) = C(2 + a, 2)
        let (a, b) = (-0.3, -0.7);
        let mut out = vec![0.0; 3];
        jacobi_into(a, b, 1.0, &mut out);
        assert!((out[1] - (a + 1.0)).abs() < 1e-15);
        assert!((out[2] - (a + 2.0) * (a + 1.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_scaling() {
        let b = Basis::legendre(3, 1).orthonormal().unwrap();
        let f = b.eval_features(&[1.0]).unwrap();
        assert!(close(&f, &[1.0, 3f64.sqrt(), 5f64.sqrt()], 1e-15));
        assert!(Basis::monomial(3, 1, BoxDomain::symmetric_unit())
            .unwrap()
            .orthonormal()
            .is_err());
    }

    #[test]
    fn spec_roundtrip_through_toml_like_serde() {
        let spec = BasisSpec {
            kind: BasisKind::ShiftedJacobi {
                alpha: -0.3,
                beta: -0.7,
            },
            q: 5,
            domain: None,
            orthonormal: false,
        };
        let b = spec.build(3, &BoxDomain::unit_cube(1)).unwrap();
        assert_eq!(b.p(), 15);
    }
}
