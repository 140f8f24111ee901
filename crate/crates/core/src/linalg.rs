//! Dense complex matrix kernel: SVD, numerical rank, Moore–Penrose
//! pseudoinverse and the orthogonal projectors built from it.
//!
//! Real inputs are embedded with zero imaginary parts. Matrices are
//! nalgebra values; the SVD and Hermitian eigensolver run in faer, whose
//! drivers stay accurate on rank-deficient input. Everything downstream of
//! the singular values (rank thresholding, the pseudoinverse, projectors)
//! lives here.

use faer::{c64, Mat, MatRef, Side};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = Complex64;

/// Dense complex matrix.
pub type Matrix = DMatrix<C64>;

/// Default relative rank threshold.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Thin singular value decomposition `A = U · diag(σ) · V*`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// `rows × k` with orthonormal columns, `k = min(rows, cols)`.
    pub left_vectors: Matrix,
    /// Nonincreasing, nonnegative.
    pub singular_values: Vec<f64>,
    /// `cols × k` with orthonormal columns.
    pub right_vectors: Matrix,
}

impl SvdResult {
    /// `U · diag(σ) · V*`.
    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.left_vectors.clone();
        for (j, &s) in self.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(s);
        }
        us * self.right_vectors.adjoint()
    }

    pub fn largest(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }
}

/// Outcome of thresholding the singular values of a matrix.
///
/// The boundary singular values on either side of the cut are kept so that
/// borderline decisions can be audited.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankDecision {
    pub rank: usize,
    pub tolerance_used: f64,
    /// `None` when the rank is 0.
    pub smallest_kept_sigma: Option<f64>,
    /// `None` when the rank is full.
    pub largest_dropped_sigma: Option<f64>,
}

impl RankDecision {
    /// Thresholds a nonincreasing list of singular values at `rel_tol · σ₁`.
    pub fn from_singular_values(sigma: &[f64], rel_tol: f64) -> Self {
        let s1 = sigma.first().copied().unwrap_or(0.0);
        let tol = rel_tol * s1;
        let rank = if s1 > 0.0 {
            sigma.iter().take_while(|&&s| s > tol).count()
        } else {
            0
        };
        RankDecision {
            rank,
            tolerance_used: tol,
            smallest_kept_sigma: rank.checked_sub(1).map(|i| sigma[i]),
            largest_dropped_sigma: sigma.get(rank).copied(),
        }
    }
}

/// The two orthogonal projectors attached to a matrix.
#[derive(Debug, Clone)]
pub struct Projectors {
    /// `AA†`, onto `im A`.
    pub image: Matrix,
    /// `A†A`, onto `(ker A)ᗮ`.
    pub coimage: Matrix,
}

/// Builds a complex matrix from real row slices.
///
/// # Panics
/// If the rows are ragged.
pub fn from_real_rows(rows: &[&[f64]]) -> Matrix {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
    Matrix::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
}

/// Embeds a real matrix.
pub fn complexify(a: &DMatrix<f64>) -> Matrix {
    a.map(|x| C64::new(x, 0.0))
}

pub fn frobenius_norm(a: &Matrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Operator 2-norm, i.e. the largest singular value.
pub fn spectral_norm(a: &Matrix) -> Result<f64> {
    Ok(svd(a)?.largest())
}

fn ensure_nonempty(a: &Matrix) -> Result<()> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::EmptyMatrix {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(())
}

fn to_faer(a: &Matrix) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| {
        let z = a[(i, j)];
        c64::new(z.re, z.im)
    })
}

fn from_faer(a: MatRef<'_, c64>) -> Matrix {
    Matrix::from_fn(a.nrows(), a.ncols(), |i, j| {
        let z = a[(i, j)];
        C64::new(z.re, z.im)
    })
}

/// Thin SVD with singular values sorted in nonincreasing order.
pub fn svd(a: &Matrix) -> Result<SvdResult> {
    ensure_nonempty(a)?;
    let k = a.nrows().min(a.ncols());
    if a.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        // The iterative driver has nothing to do; hand back canonical bases.
        return Ok(SvdResult {
            left_vectors: Matrix::identity(a.nrows(), k),
            singular_values: vec![0.0; k],
            right_vectors: Matrix::identity(a.ncols(), k),
        });
    }
    let dec = to_faer(a).thin_svd().map_err(|_| Error::NoConvergence("singular value decomposition"))?;
    let singular_values: Vec<f64> = dec.S().column_vector().iter().map(|s| s.re.max(0.0)).collect();
    debug_assert!(singular_values.windows(2).all(|w| w[0] >= w[1]));
    let (u, v) = (from_faer(dec.U()), from_faer(dec.V()));
    Ok(SvdResult {
        left_vectors: u,
        singular_values,
        right_vectors: v,
    })
}

/// Rank as the number of singular values above `rel_tol · σ₁`.
pub fn numerical_rank(a: &Matrix, rel_tol: f64) -> Result<RankDecision> {
    check_tol(rel_tol)?;
    let dec = svd(a)?;
    Ok(RankDecision::from_singular_values(&dec.singular_values, rel_tol))
}

fn check_tol(rel_tol: f64) -> Result<()> {
    if !(rel_tol > 0.0 && rel_tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "relative tolerance must be positive and finite, got {rel_tol}"
        )));
    }
    Ok(())
}

/// Moore–Penrose pseudoinverse via SVD; singular values at or below the
/// rank threshold are treated as exact zeros.
pub fn pinv(a: &Matrix, rel_tol: f64) -> Result<Matrix> {
    check_tol(rel_tol)?;
    let dec = svd(a)?;
    let rank = RankDecision::from_singular_values(&dec.singular_values, rel_tol).rank;
    Ok(pinv_from_svd(&dec, rank))
}

pub(crate) fn pinv_from_svd(dec: &SvdResult, rank: usize) -> Matrix {
    let rows = dec.left_vectors.nrows();
    let cols = dec.right_vectors.nrows();
    let mut out = Matrix::zeros(cols, rows);
    for k in 0..rank {
        let inv = 1.0 / dec.singular_values[k];
        let v = dec.right_vectors.column(k);
        let u = dec.left_vectors.column(k);
        // out += v_k σ_k⁻¹ u_k*
        for j in 0..rows {
            let uj = u[j].conj() * inv;
            for i in 0..cols {
                out[(i, j)] += v[i] * uj;
            }
        }
    }
    out
}

/// `AA†` and `A†A`.
pub fn projectors(a: &Matrix, rel_tol: f64) -> Result<Projectors> {
    let ap = pinv(a, rel_tol)?;
    Ok(Projectors {
        image: a * &ap,
        coimage: &ap * a,
    })
}

/// Relative Frobenius residuals of the four Penrose conditions:
/// `‖AXA − A‖/‖A‖`, `‖XAX − X‖/‖X‖`, `‖(AX)* − AX‖`, `‖(XA)* − XA‖`
/// (spectral norms in the denominators; the last two compare products
/// that are projectors when `X = A†`, so they are already scale free).
pub fn penrose_residuals(a: &Matrix, x: &Matrix) -> Result<[f64; 4]> {
    let scale_a = spectral_norm(a)?.max(f64::MIN_POSITIVE);
    let scale_x = spectral_norm(x)?.max(f64::MIN_POSITIVE);
    let ax = a * x;
    let xa = x * a;
    Ok([
        frobenius_norm(&(&ax * a - a)) / scale_a,
        frobenius_norm(&(&xa * x - x)) / scale_x,
        frobenius_norm(&(ax.adjoint() - &ax)),
        frobenius_norm(&(xa.adjoint() - &xa)),
    ])
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(h: &Matrix) -> Result<Vec<f64>> {
    ensure_nonempty(h)?;
    crate::error::check_dim("hermitian_eigenvalues (square)", h.nrows(), h.ncols())?;
    let mut ev: Vec<f64> = to_faer(h)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::NoConvergence("hermitian eigenvalues"))?;
    ev.sort_by(|a, b| a.total_cmp(b));
    Ok(ev)
}

/// Inverse of a Hermitian positive semidefinite matrix, when it is
/// positive definite at relative threshold `rel_tol`.
#[derive(Debug, Clone)]
pub struct HpdInverse {
    /// `None` when the smallest eigenvalue is at or below `rel_tol · λ_max`.
    pub inverse: Option<Matrix>,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

pub fn hpd_inverse(h: &Matrix, rel_tol: f64) -> Result<HpdInverse> {
    ensure_nonempty(h)?;
    crate::error::check_dim("hpd_inverse (square)", h.nrows(), h.ncols())?;
    let eig = to_faer(h)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NoConvergence("hermitian eigendecomposition"))?;
    let values: Vec<f64> = eig.S().column_vector().iter().map(|l| l.re).collect();
    let vectors = from_faer(eig.U());
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let inverse = (max > 0.0 && min > rel_tol * max).then(|| {
        let mut scaled = vectors.clone();
        for (j, &l) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(1.0 / l);
        }
        scaled * vectors.adjoint()
    });
    Ok(HpdInverse {
        inverse,
        min_eigenvalue: min,
        max_eigenvalue: max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn svd_of_identity() {
        let d = svd(&Matrix::identity(3, 3)).unwrap();
        assert_eq!(d.singular_values.len(), 3);
        for s in d.singular_values {
            assert!((s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn svd_of_diagonal_and_permutation() {
        let d = svd(&from_real_rows(&[&[3.0, 0.0], &[0.0, 0.0]])).unwrap();
        assert!((d.singular_values[0] - 3.0).abs() < 1e-15);
        assert!(d.singular_values[1].abs() < 1e-15);

        let p = from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let d = svd(&p).unwrap();
        assert!(d.singular_values.iter().all(|s| (s - 1.0).abs() < 1e-15));
        assert!(frobenius_norm(&(d.reconstruct() - p)) < 1e-14);
    }

    #[test]
    fn svd_rejects_empty() {
        assert!(matches!(
            svd(&Matrix::zeros(0, 2)),
            Err(Error::EmptyMatrix { .. })
        ));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numerical_rank(&Matrix::identity(4, 4), 1e-10).unwrap().rank, 4);
        let z = numerical_rank(&Matrix::zeros(3, 2), 1e-10).unwrap();
        assert_eq!(z.rank, 0);
        assert_eq!(z.smallest_kept_sigma, None);
        let d = numerical_rank(&from_real_rows(&[&[1.0, 0.0], &[0.0, 1e-16]]), 1e-10).unwrap();
        assert_eq!(d.rank, 1);
        assert_eq!(d.smallest_kept_sigma, Some(1.0));
        assert!(d.largest_dropped_sigma.unwrap() < d.tolerance_used);
    }

    #[test]
    fn rank_rejects_bad_tolerance() {
        assert!(numerical_rank(&Matrix::identity(2, 2), 0.0).is_err());
        assert!(numerical_rank(&Matrix::identity(2, 2), f64::NAN).is_err());
    }

    #[test]
    fn pinv_examples() {
        let i = pinv(&Matrix::identity(3, 3), 1e-10).unwrap();
        assert!(frobenius_norm(&(i - Matrix::identity(3, 3))) < 1e-15);

        let s = pinv(&from_real_rows(&[&[2.0]]), 1e-10).unwrap();
        assert!((s[(0, 0)] - c(0.5)).norm() < 1e-15);

        // Column (1,1)ᵀ: the row (1/2, 1/2) satisfies all four conditions.
        let col = from_real_rows(&[&[1.0], &[1.0]]);
        let expected = from_real_rows(&[&[0.5, 0.5]]);
        let res = penrose_residuals(&col, &expected).unwrap();
        assert!(res.iter().all(|&r| r < 1e-15));
        let got = pinv(&col, 1e-10).unwrap();
        assert_eq!(got.shape(), (1, 2));
        assert!(frobenius_norm(&(got - expected)) < 1e-14);
    }

    #[test]
    fn projector_examples() {
        let a = from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let p = projectors(&a, 1e-10).unwrap();
        assert!(frobenius_norm(&(&p.image - &a)) < 1e-14);
        assert!(frobenius_norm(&(&p.coimage - &a)) < 1e-14);

        let col = from_real_rows(&[&[1.0], &[0.0]]);
        let p = projectors(&col, 1e-10).unwrap();
        assert!(frobenius_norm(&(&p.image - from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]))) < 1e-14);
        assert!((p.coimage[(0, 0)] - c(1.0)).norm() < 1e-14);

        let full = from_real_rows(&[&[2.0, 1.0], &[-1.0, 3.0]]);
        let p = projectors(&full, 1e-10).unwrap();
        assert!(frobenius_norm(&(&p.image - Matrix::identity(2, 2))) < 1e-13);
        assert!(frobenius_norm(&(&p.coimage - Matrix::identity(2, 2))) < 1e-13);
    }

    #[test]
    fn hpd_inverse_detects_singularity() {
        let h = from_real_rows(&[&[2.0, 0.0], &[0.0, 0.0]]);
        let inv = hpd_inverse(&h, 1e-10).unwrap();
        assert!(inv.inverse.is_none());
        assert!(inv.min_eigenvalue.abs() < 1e-15);

        let h = from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let inv = hpd_inverse(&h, 1e-10).unwrap();
        let prod = &h * inv.inverse.unwrap();
        assert!(frobenius_norm(&(prod - Matrix::identity(2, 2))) < 1e-14);
        assert!((inv.min_eigenvalue - 1.0).abs() < 1e-14);
    }
}
