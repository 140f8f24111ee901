//! Sphere-sampled rank profiles, exactness of symbol sequences, the
//! five-condition characterization of elliptic complexes, and a
//! quantitative lower-semicontinuity certificate for rank.
//!
//! "For all ξ ≠ 0" is certified on a finite set of unit vectors: seeded
//! Gaussian directions followed by the `2n` signed coordinate axes. Symbols
//! are polynomial, so rank drops live on algebraic sets; random directions
//! see the generic rank and the axes catch the usual degenerate directions.
//! This is a heuristic certificate, not a proof.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, frobenius_norm, Matrix};
use crate::parallel;
use crate::symbol::{self, ComplexChain, CompositionReport, DiffOperator};

/// Default number of random sphere directions.
pub const DEFAULT_SAMPLES: usize = 500;

/// Name of the only sampling scheme.
pub const SCHEME: &str = "gaussian-normalized+axes";

/// Unit vectors standing in for the nonzero frequencies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereSample {
    pub points: Vec<Vec<f64>>,
    pub seed: u64,
    pub scheme: &'static str,
}

impl SphereSample {
    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `count` normalized standard Gaussian vectors in `ℝⁿ` followed by `±eᵢ`.
pub fn sample_sphere(n: usize, count: usize, seed: u64) -> Result<SphereSample> {
    if n < 1 {
        return Err(Error::InvalidArgument("sphere dimension must be at least 1".into()));
    }
    if count < 1 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(count + 2 * n);
    while points.len() < count {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            points.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = sign;
            points.push(e);
        }
    }
    Ok(SphereSample {
        points,
        seed,
        scheme: SCHEME,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankAt {
    pub xi: Vec<f64>,
    pub rank: usize,
}

/// Ranks of a symbol over a sample set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankProfile {
    pub ranks: Vec<RankAt>,
    pub constant: bool,
    /// Most frequent rank; ties go to the larger rank (the generic one).
    pub mode_rank: usize,
    /// Samples whose rank differs from `mode_rank`, in sample order.
    pub witnesses: Vec<Vec<f64>>,
}

impl RankProfile {
    fn from_ranks(points: &[Vec<f64>], ranks: Vec<usize>) -> Self {
        let max = ranks.iter().copied().max().unwrap_or(0);
        let mut counts = vec![0usize; max + 1];
        for &r in &ranks {
            counts[r] += 1;
        }
        let mode_rank = (0..=max).rev().max_by_key(|&r| counts[r]).unwrap_or(0);
        let witnesses: Vec<Vec<f64>> = points
            .iter()
            .zip(&ranks)
            .filter(|(_, &r)| r != mode_rank)
            .map(|(p, _)| p.clone())
            .collect();
        RankProfile {
            constant: witnesses.is_empty(),
            ranks: points
                .iter()
                .zip(ranks)
                .map(|(xi, rank)| RankAt { xi: xi.clone(), rank })
                .collect(),
            mode_rank,
            witnesses,
        }
    }

    pub fn rank_values(&self) -> Vec<usize> {
        self.ranks.iter().map(|r| r.rank).collect()
    }
}

/// Numerical rank of `P(ξ)` at every sample.
pub fn constant_rank_check(op: &DiffOperator, samples: &SphereSample, rel_tol: f64) -> Result<RankProfile> {
    check_dim("sample dimension", op.space_dim(), samples.dim())?;
    let ranks = parallel::map_indexed(samples.len(), |k| {
        linalg::numerical_rank(&op.eval_symbol(&samples.points[k])?, rel_tol).map(|d| d.rank)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(RankProfile::from_ranks(&samples.points, ranks))
}

/// Diagnostics of a single exactness test `U →p V →q W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactnessReport {
    pub composition_residual: f64,
    pub composition_tolerance: f64,
    pub rank_p: usize,
    pub rank_q: usize,
    pub dim_middle: usize,
    pub exact: bool,
}

/// Exactness of `p_sym` followed by `q_sym`: the composition vanishes and
/// `rank p + rank q = dim V`.
pub fn exactness_detail(p_sym: &Matrix, q_sym: &Matrix, rel_tol: f64) -> Result<ExactnessReport> {
    check_dim("exactness middle dimension", p_sym.nrows(), q_sym.ncols())?;
    let residual = frobenius_norm(&(q_sym * p_sym));
    let tol = rel_tol * (frobenius_norm(q_sym) * frobenius_norm(p_sym) + 1.0);
    let rank_p = linalg::numerical_rank(p_sym, rel_tol)?.rank;
    let rank_q = linalg::numerical_rank(q_sym, rel_tol)?.rank;
    let dim_middle = p_sym.nrows();
    Ok(ExactnessReport {
        composition_residual: residual,
        composition_tolerance: tol,
        rank_p,
        rank_q,
        dim_middle,
        exact: residual <= tol && rank_p + rank_q == dim_middle,
    })
}

pub fn exactness_check(p_sym: &Matrix, q_sym: &Matrix, rel_tol: f64) -> Result<bool> {
    Ok(exactness_detail(p_sym, q_sym, rel_tol)?.exact)
}

/// Exactness of `(first, second)` at every sample, in sample order.
pub fn exactness_profile(
    first: &DiffOperator,
    second: &DiffOperator,
    samples: &SphereSample,
    rel_tol: f64,
) -> Result<Vec<ExactnessReport>> {
    check_dim("sample dimension", first.space_dim(), samples.dim())?;
    parallel::map_indexed(samples.len(), |k| {
        let xi = &samples.points[k];
        exactness_detail(&first.eval_symbol(xi)?, &second.eval_symbol(xi)?, rel_tol)
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition<T> {
    pub holds: bool,
    pub detail: T,
}

/// Largest sampled `‖Q(ξ)P(ξ)‖` against its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampledComposition {
    pub max_residual: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DesignatedExactness {
    pub xi: Vec<f64>,
    pub report: ExactnessReport,
}

/// Verdicts for the five conditions characterizing an elliptic complex.
#[derive(Debug, Clone, Serialize)]
pub struct ComplexVerdict {
    /// `QP = 0`: the composed symbol vanishes at every sample.
    pub condition_i: Condition<SampledComposition>,
    /// Symbol sequence exact at the designated (first) sample.
    pub condition_ii: Condition<DesignatedExactness>,
    /// Coefficient sums `Σ_{α+β=γ} B_β A_α` vanish for every γ.
    pub condition_iii: Condition<CompositionReport>,
    /// `P(ξ)` has constant rank on the samples.
    pub condition_iv: Condition<RankProfile>,
    /// `Q(ξ)` has constant rank on the samples.
    pub condition_v: Condition<RankProfile>,
    pub overall: bool,
    /// Direct check: number of samples where the symbol sequence is not exact.
    pub inexact_samples: usize,
    pub sample_count: usize,
}

impl ComplexVerdict {
    pub fn conditions(&self) -> [bool; 5] {
        [
            self.condition_i.holds,
            self.condition_ii.holds,
            self.condition_iii.holds,
            self.condition_iv.holds,
            self.condition_v.holds,
        ]
    }

    /// Result of testing exactness directly at every sample.
    pub fn exact_everywhere(&self) -> bool {
        self.inexact_samples == 0
    }
}

/// Evaluates conditions (i)–(v) for the pair `(P, Q)` of a chain.
///
/// With constant coefficients the base point `y` of condition (ii) is
/// irrelevant; the first sample plays the role of `ζ`.
pub fn classify_complex(chain: &ComplexChain, samples: &SphereSample, rel_tol: f64) -> Result<ComplexVerdict> {
    let p = &chain.middle;
    let q = &chain.right;
    check_dim("sample dimension", chain.space_dim(), samples.dim())?;

    let exact = exactness_profile(p, q, samples, rel_tol)?;
    let sampled_max = exact.iter().map(|e| e.composition_residual).fold(0.0, f64::max);
    let scale = exact
        .iter()
        .map(|e| e.composition_tolerance / rel_tol)
        .fold(1.0, f64::max);
    let comp_tol = symbol::COMPOSITION_TOL * scale;
    let condition_i = Condition {
        holds: sampled_max <= comp_tol,
        detail: SampledComposition {
            max_residual: sampled_max,
            tolerance: comp_tol,
        },
    };

    let designated = DesignatedExactness {
        xi: samples.points[0].clone(),
        report: exact[0],
    };
    let condition_ii = Condition {
        holds: designated.report.exact,
        detail: designated,
    };

    let coeff = symbol::compose_coefficient_condition(&q.to_homogeneous(), &p.to_homogeneous())?;
    let condition_iii = Condition {
        holds: coeff.is_complex(),
        detail: coeff,
    };

    let prof_p = constant_rank_check(p, samples, rel_tol)?;
    let prof_q = constant_rank_check(q, samples, rel_tol)?;
    let condition_iv = Condition {
        holds: prof_p.constant,
        detail: prof_p,
    };
    let condition_v = Condition {
        holds: prof_q.constant,
        detail: prof_q,
    };

    let overall = condition_i.holds
        && condition_ii.holds
        && condition_iii.holds
        && condition_iv.holds
        && condition_v.holds;
    Ok(ComplexVerdict {
        condition_i,
        condition_ii,
        condition_iii,
        condition_iv,
        condition_v,
        overall,
        inexact_samples: exact.iter().filter(|e| !e.exact).count(),
        sample_count: samples.len(),
    })
}

/// Half the smallest retained singular value of `A`.
///
/// Every perturbation `E` with `‖E‖₂` below this radius leaves the rank at
/// least as large as `rank(A)`. Rank 0 can never decrease, so the radius is
/// infinite there.
pub fn rank_stability_radius(a: &Matrix, rel_tol: f64) -> Result<f64> {
    let d = linalg::numerical_rank(a, rel_tol)?;
    Ok(d.smallest_kept_sigma.map_or(f64::INFINITY, |s| s / 2.0))
}
