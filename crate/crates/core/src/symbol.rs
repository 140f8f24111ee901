//! Constant-coefficient differential operators and their symbols.
//!
//! A first-order operator `Σ Aᵢ ∂/∂xᵢ` is stored as its coefficient list.
//! Symbols are `Σ ξᵢAᵢ` at real frequencies, or `i·Σ ξᵢAᵢ` for the Fourier
//! convention used by the spectral module.
//!
//! Sign convention: the second-order symbol returned by [`laplace_symbol`]
//! is the positive semidefinite `H(ξ) = P(ξ)P(ξ)ᵀ + Q(ξ)ᵀQ(ξ)`, which is the
//! negative of the Laplace–Beltrami symbol `Δ(ξ)` with `Δ = −PP* − Q*Q`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, frobenius_norm, Matrix, C64};

/// Tolerance for the coefficient-sum condition, relative to `max(1, ‖B‖‖A‖)`.
pub const COMPOSITION_TOL: f64 = 1e-12;

/// First-order operator `Σ Aᵢ ∂/∂xᵢ` with real constant coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffOperator {
    space_dim: usize,
    dim_source: usize,
    dim_target: usize,
    coefficients: Vec<DMatrix<f64>>,
}

impl DiffOperator {
    /// Builds an operator from `n` coefficient matrices of identical shape
    /// `dim_target × dim_source`.
    pub fn new(coefficients: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = coefficients
            .first()
            .ok_or_else(|| Error::InvalidArgument("operator needs at least one coefficient matrix".into()))?;
        let (rows, cols) = first.shape();
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "coefficient matrices must be nonempty, got {rows}x{cols}"
            )));
        }
        for a in &coefficients {
            check_dim("coefficient rows", rows, a.nrows())?;
            check_dim("coefficient cols", cols, a.ncols())?;
        }
        Ok(Self {
            space_dim: coefficients.len(),
            dim_source: cols,
            dim_target: rows,
            coefficients,
        })
    }

    /// The zero operator between the given fibers.
    pub fn zero(space_dim: usize, dim_source: usize, dim_target: usize) -> Result<Self> {
        if space_dim == 0 {
            return Err(Error::InvalidArgument("space dimension must be at least 1".into()));
        }
        Self::new(vec![DMatrix::zeros(dim_target, dim_source); space_dim])
    }

    pub fn space_dim(&self) -> usize {
        self.space_dim
    }

    pub fn dim_source(&self) -> usize {
        self.dim_source
    }

    pub fn dim_target(&self) -> usize {
        self.dim_target
    }

    pub fn coefficients(&self) -> &[DMatrix<f64>] {
        &self.coefficients
    }

    /// Multiplies every coefficient by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            coefficients: self.coefficients.iter().map(|a| a * s).collect(),
            ..self.clone()
        }
    }

    fn check_xi(&self, xi: &[f64]) -> Result<()> {
        check_dim("frequency length", self.space_dim, xi.len())
    }

    /// Real symbol `Σ ξᵢAᵢ` (embedded as a complex matrix).
    pub fn eval_symbol(&self, xi: &[f64]) -> Result<Matrix> {
        self.check_xi(xi)?;
        Ok(linalg::complexify(&self.real_symbol(xi)))
    }

    pub(crate) fn real_symbol(&self, xi: &[f64]) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(self.dim_target, self.dim_source);
        for (a, &x) in self.coefficients.iter().zip(xi) {
            if x != 0.0 {
                s += a * x;
            }
        }
        s
    }

    /// Fourier symbol `P(iξ) = i·Σ ξᵢAᵢ`.
    pub fn eval_symbol_i(&self, xi: &[f64]) -> Result<Matrix> {
        self.check_xi(xi)?;
        Ok(self.real_symbol(xi).map(|x| C64::new(0.0, x)))
    }

    /// Formal adjoint `−Σ Aᵢᵀ ∂/∂xᵢ`.
    pub fn adjoint(&self) -> Self {
        Self {
            space_dim: self.space_dim,
            dim_source: self.dim_target,
            dim_target: self.dim_source,
            coefficients: self.coefficients.iter().map(|a| -a.transpose()).collect(),
        }
    }

    /// The same operator viewed as homogeneous of order 1.
    pub fn to_homogeneous(&self) -> HomogeneousOperator {
        let coefficients = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let mut alpha = vec![0; self.space_dim];
                alpha[i] = 1;
                (alpha, a.clone())
            })
            .collect();
        HomogeneousOperator {
            space_dim: self.space_dim,
            order: 1,
            dim_source: self.dim_source,
            dim_target: self.dim_target,
            coefficients,
        }
    }
}

/// Homogeneous operator `Σ_{|α|=m} A_α D^α` of order `m` with constant
/// coefficients. Multi-indices are stored as exponent vectors of length `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousOperator {
    space_dim: usize,
    order: usize,
    dim_source: usize,
    dim_target: usize,
    coefficients: BTreeMap<Vec<usize>, DMatrix<f64>>,
}

impl HomogeneousOperator {
    pub fn new(
        space_dim: usize,
        order: usize,
        dim_source: usize,
        dim_target: usize,
        coefficients: BTreeMap<Vec<usize>, DMatrix<f64>>,
    ) -> Result<Self> {
        if space_dim == 0 || order == 0 || dim_source == 0 || dim_target == 0 {
            return Err(Error::InvalidArgument(
                "space dimension, order and fiber dimensions must be at least 1".into(),
            ));
        }
        for (alpha, a) in &coefficients {
            check_dim("multi-index length", space_dim, alpha.len())?;
            check_dim("multi-index order", order, alpha.iter().sum())?;
            check_dim("coefficient rows", dim_target, a.nrows())?;
            check_dim("coefficient cols", dim_source, a.ncols())?;
        }
        Ok(Self {
            space_dim,
            order,
            dim_source,
            dim_target,
            coefficients,
        })
    }

    pub fn space_dim(&self) -> usize {
        self.space_dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim_source(&self) -> usize {
        self.dim_source
    }

    pub fn dim_target(&self) -> usize {
        self.dim_target
    }

    pub fn coefficients(&self) -> &BTreeMap<Vec<usize>, DMatrix<f64>> {
        &self.coefficients
    }

    /// Principal symbol `Σ A_α ξ^α`.
    pub fn eval_symbol(&self, xi: &[f64]) -> Result<Matrix> {
        check_dim("frequency length", self.space_dim, xi.len())?;
        let mut s = DMatrix::<f64>::zeros(self.dim_target, self.dim_source);
        for (alpha, a) in &self.coefficients {
            let mono: f64 = alpha
                .iter()
                .zip(xi)
                .map(|(&k, &x)| x.powi(k as i32))
                .product();
            s += a * mono;
        }
        Ok(linalg::complexify(&s))
    }
}

/// All multi-indices of length `n` and total degree `degree`, in
/// lexicographic order.
pub fn multi_indices(n: usize, degree: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() + 1 == n {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            rec(n, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, degree, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

/// A candidate complex `X →R U →P V →Q W`, the left operator optional.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexChain {
    pub left: Option<DiffOperator>,
    pub middle: DiffOperator,
    pub right: DiffOperator,
}

impl ComplexChain {
    pub fn new(left: Option<DiffOperator>, middle: DiffOperator, right: DiffOperator) -> Result<Self> {
        let n = middle.space_dim();
        check_dim("chain space dimension", n, right.space_dim())?;
        check_dim("chain P target / Q source", middle.dim_target(), right.dim_source())?;
        if let Some(r) = &left {
            check_dim("chain space dimension", n, r.space_dim())?;
            check_dim("chain R target / P source", middle.dim_source(), r.dim_target())?;
        }
        Ok(Self { left, middle, right })
    }

    pub fn space_dim(&self) -> usize {
        self.middle.space_dim()
    }

    /// Dimension of the middle fiber `V`.
    pub fn dim_middle(&self) -> usize {
        self.middle.dim_target()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            left: self.left.as_ref().map(|r| r.scaled(s)),
            middle: self.middle.scaled(s),
            right: self.right.scaled(s),
        }
    }
}

/// `H(ξ) = P(ξ)P(ξ)ᵀ + Q(ξ)ᵀQ(ξ)` on the middle fiber.
pub fn laplace_symbol(chain: &ComplexChain, xi: &[f64]) -> Result<Matrix> {
    check_dim("frequency length", chain.space_dim(), xi.len())?;
    let p = chain.middle.real_symbol(xi);
    let q = chain.right.real_symbol(xi);
    Ok(linalg::complexify(&(&p * p.transpose() + q.transpose() * &q)))
}

/// `H_U(ξ) = P(ξ)ᵀP(ξ) + R(ξ)R(ξ)ᵀ` on the source fiber of the middle
/// operator; `R` contributes nothing when absent.
pub fn source_laplace_symbol(chain: &ComplexChain, xi: &[f64]) -> Result<Matrix> {
    check_dim("frequency length", chain.space_dim(), xi.len())?;
    let p = chain.middle.real_symbol(xi);
    let mut h = p.transpose() * &p;
    if let Some(r) = &chain.left {
        let r = r.real_symbol(xi);
        h += &r * r.transpose();
    }
    Ok(linalg::complexify(&h))
}

/// Sampled estimate of `c = max_{|ξ|=1} ‖H(ξ)⁻¹‖`.
///
/// Each sample must be a unit vector. Being a maximum over finitely many
/// points, this is a lower estimate of the true constant.
pub fn ellipticity_constant(chain: &ComplexChain, sphere_samples: &[Vec<f64>]) -> Result<f64> {
    let norms = crate::parallel::map_indexed(sphere_samples.len(), |k| {
        let xi = &sphere_samples[k];
        let h = laplace_symbol(chain, xi)?;
        let inv = linalg::hpd_inverse(&h, linalg::DEFAULT_REL_TOL)?;
        match inv.inverse {
            Some(_) => Ok(1.0 / inv.min_eigenvalue),
            None => Err(Error::Ellipticity {
                xi: xi.clone(),
                min_eigenvalue: inv.min_eigenvalue,
            }),
        }
    });
    let mut c = 0.0f64;
    for r in norms {
        c = c.max(r?);
    }
    Ok(c)
}

/// Per multi-index residuals of the coefficient-sum condition
/// `Σ_{α+β=γ} B_β A_α = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct CompositionReport {
    /// `(γ, ‖Σ_{α+β=γ} B_β A_α‖_F)` for every γ of degree `m_p + m_q`.
    pub residuals: Vec<(Vec<usize>, f64)>,
    pub tolerance: f64,
}

impl CompositionReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.1).fold(0.0, f64::max)
    }

    /// True when every coefficient sum vanishes, i.e. `Q(ξ)P(ξ) ≡ 0`.
    pub fn is_complex(&self) -> bool {
        self.residuals.iter().all(|r| r.1 <= self.tolerance)
    }
}

/// Coefficient-sum check for `Q ∘ P`, obtained by equating the
/// coefficients of `ξ^γ` in `Q(ξ)P(ξ)`.
pub fn compose_coefficient_condition(
    q: &HomogeneousOperator,
    p: &HomogeneousOperator,
) -> Result<CompositionReport> {
    check_dim("composition space dimension", p.space_dim(), q.space_dim())?;
    check_dim("composition P target / Q source", p.dim_target(), q.dim_source())?;
    let n = p.space_dim();
    let mut sums: BTreeMap<Vec<usize>, DMatrix<f64>> = multi_indices(n, p.order() + q.order())
        .into_iter()
        .map(|g| (g, DMatrix::zeros(q.dim_target(), p.dim_source())))
        .collect();
    let mut scale = 0.0f64;
    for (beta, b) in q.coefficients() {
        for (alpha, a) in p.coefficients() {
            let gamma: Vec<usize> = alpha.iter().zip(beta).map(|(x, y)| x + y).collect();
            let prod = b * a;
            scale = scale.max(b.norm() * a.norm());
            *sums.get_mut(&gamma).expect("degree matches by construction") += prod;
        }
    }
    Ok(CompositionReport {
        residuals: sums.into_iter().map(|(g, m)| (g, m.norm())).collect(),
        tolerance: COMPOSITION_TOL * scale.max(1.0),
    })
}

/// `‖Q(ξ)P(ξ)‖_F` at a single frequency.
pub fn composition_residual_at(q: &DiffOperator, p: &DiffOperator, xi: &[f64]) -> Result<f64> {
    check_dim("composition P target / Q source", p.dim_target(), q.dim_source())?;
    Ok(frobenius_norm(&(q.eval_symbol(xi)? * p.eval_symbol(xi)?)))
}
