//! Built-in operators: the de Rham complex, gradient/curl, and a
//! rank-dropping counterexample.
//!
//! Catalog entries are addressed by name: `de_rham:<n>:<l>` is the chain
//! `Λˡ⁻¹ →d Λˡ →d Λˡ⁺¹` with middle fiber `Λˡ(ℝⁿ)` (missing ends padded by
//! zero operators to/from `ℝ`), `grad_curl:<n>` is `ℝ →∇ ℝⁿ →curl ℝⁿˣⁿ`, and
//! `rank_drop` is `∂/∂x₁` on scalars in two variables.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symbol::{ComplexChain, DiffOperator};

/// Gradient `ℝ → ℝⁿ`, `Aᵢ = eᵢ`.
pub fn grad_operator(n: usize) -> Result<DiffOperator> {
    if n == 0 {
        return Err(Error::InvalidArgument("gradient needs n >= 1".into()));
    }
    DiffOperator::new(
        (0..n)
            .map(|i| DMatrix::from_fn(n, 1, |r, _| if r == i { 1.0 } else { 0.0 }))
            .collect(),
    )
}

/// Curl `ℝⁿ → ℝⁿˣⁿ`, output `(i, j)` (flattened row-major as `i·n + j`)
/// equal to `∂fᵢ/∂xⱼ − ∂fⱼ/∂xᵢ`. The image lies in the skew-symmetric
/// matrices, but the target is the full `n²`-dimensional space.
pub fn curl_operator(n: usize) -> Result<DiffOperator> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("curl needs n >= 2, got {n}")));
    }
    let coefficients = (0..n)
        .map(|k| {
            let mut a = DMatrix::zeros(n * n, n);
            for i in 0..n {
                for j in 0..n {
                    if k == j {
                        a[(i * n + j, i)] += 1.0;
                    }
                    if k == i {
                        a[(i * n + j, j)] -= 1.0;
                    }
                }
            }
            a
        })
        .collect();
    DiffOperator::new(coefficients)
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Basis of `Λˡ(ℝⁿ)`: strictly increasing index tuples in lexicographic order.
pub fn lambda_basis(n: usize, l: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, l: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == l {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, l, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, l, &mut Vec::new(), &mut out);
    out
}

/// Exterior derivative `d: Λˡ → Λˡ⁺¹` on `ℝⁿ`.
///
/// `Aⱼ` sends `dx_I` to `dxⱼ ∧ dx_I`, which is zero when `j ∈ I` and
/// otherwise `(−1)^{#{i ∈ I : i < j}} dx_{I ∪ {j}}`.
pub fn exterior_derivative(n: usize, l: usize) -> Result<DiffOperator> {
    if n == 0 || l >= n {
        return Err(Error::InvalidArgument(format!(
            "exterior derivative needs 0 <= l <= n-1, got n={n} l={l}"
        )));
    }
    let src = lambda_basis(n, l);
    let tgt = lambda_basis(n, l + 1);
    let coefficients = (0..n)
        .map(|j| {
            let mut a = DMatrix::zeros(tgt.len(), src.len());
            for (col, idx) in src.iter().enumerate() {
                if idx.contains(&j) {
                    continue;
                }
                let before = idx.iter().filter(|&&i| i < j).count();
                let mut merged = idx.clone();
                merged.insert(before, j);
                let row = tgt.binary_search(&merged).expect("sorted basis");
                a[(row, col)] = if before % 2 == 0 { 1.0 } else { -1.0 };
            }
            a
        })
        .collect();
    DiffOperator::new(coefficients)
}

/// `∂/∂x₁` on scalars in two variables; its symbol `ξ₁` vanishes on the
/// `ξ₂`-axis.
pub fn rank_dropping_operator() -> DiffOperator {
    DiffOperator::new(vec![
        DMatrix::from_element(1, 1, 1.0),
        DMatrix::from_element(1, 1, 0.0),
    ])
    .expect("static shape")
}

/// What a catalog entry is known to satisfy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Expected {
    pub elliptic: bool,
    /// Rank of `P(ξ)` for `ξ ≠ 0`, when constant.
    pub rank_middle: Option<usize>,
    /// Rank of `Q(ξ)` for `ξ ≠ 0`, when constant.
    pub rank_right: Option<usize>,
    /// `(dim U, dim V, dim W)`.
    pub dims: (usize, usize, usize),
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub chain: ComplexChain,
    pub expected: Expected,
}

fn grad_curl(n: usize) -> Result<CatalogEntry> {
    let chain = ComplexChain::new(
        Some(DiffOperator::zero(n, 1, 1)?),
        grad_operator(n)?,
        curl_operator(n)?,
    )?;
    Ok(CatalogEntry {
        name: format!("grad_curl:{n}"),
        chain,
        expected: Expected {
            elliptic: true,
            rank_middle: Some(1),
            rank_right: Some(n - 1),
            dims: (1, n, n * n),
        },
    })
}

fn de_rham(n: usize, l: usize) -> Result<CatalogEntry> {
    if n == 0 || l > n {
        return Err(Error::InvalidArgument(format!(
            "de_rham needs n >= 1 and 0 <= l <= n, got n={n} l={l}"
        )));
    }
    let middle = if l >= 1 {
        exterior_derivative(n, l - 1)?
    } else {
        DiffOperator::zero(n, 1, 1)?
    };
    let right = if l < n {
        exterior_derivative(n, l)?
    } else {
        DiffOperator::zero(n, 1, 1)?
    };
    let left = if l >= 2 {
        exterior_derivative(n, l - 2)?
    } else {
        DiffOperator::zero(n, 1, 1)?
    };
    let chain = ComplexChain::new(Some(left), middle, right)?;
    let dims = (
        chain.middle.dim_source(),
        binomial(n, l),
        chain.right.dim_target(),
    );
    Ok(CatalogEntry {
        name: format!("de_rham:{n}:{l}"),
        chain,
        expected: Expected {
            elliptic: true,
            rank_middle: Some(if l == 0 { 0 } else { binomial(n - 1, l - 1) }),
            rank_right: Some(if l == n { 0 } else { binomial(n - 1, l) }),
            dims,
        },
    })
}

fn rank_drop() -> CatalogEntry {
    let chain = ComplexChain::new(
        None,
        rank_dropping_operator(),
        DiffOperator::zero(2, 1, 1).expect("static shape"),
    )
    .expect("static shape");
    CatalogEntry {
        name: "rank_drop".into(),
        chain,
        expected: Expected {
            elliptic: false,
            rank_middle: None,
            rank_right: Some(0),
            dims: (1, 1, 1),
        },
    }
}

/// Looks up `de_rham:<n>:<l>`, `grad_curl:<n>` or `rank_drop`.
pub fn lookup(name: &str) -> Result<CatalogEntry> {
    let parts: Vec<&str> = name.split(':').collect();
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::InvalidArgument(format!("bad number {s:?} in example name {name:?}")))
    };
    match parts.as_slice() {
        ["rank_drop"] => Ok(rank_drop()),
        ["grad_curl", n] => {
            let n = num(n)?;
            if n < 2 {
                return Err(Error::InvalidArgument("grad_curl needs n >= 2".into()));
            }
            grad_curl(n)
        }
        ["de_rham", n, l] => de_rham(num(n)?, num(l)?),
        _ => Err(Error::InvalidArgument(format!(
            "unknown example {name:?}; expected de_rham:<n>:<l>, grad_curl:<n> or rank_drop"
        ))),
    }
}

/// Every built-in entry with `n ≤ 4`.
pub fn builtin_entries() -> Vec<CatalogEntry> {
    let mut out = Vec::new();
    for n in 2..=4 {
        out.push(grad_curl(n).expect("valid"));
    }
    for n in 1..=4 {
        for l in 0..=n {
            out.push(de_rham(n, l).expect("valid"));
        }
    }
    out.push(rank_drop());
    out
}
