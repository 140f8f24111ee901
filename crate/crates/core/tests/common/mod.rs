#![allow(dead_code)]

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankcomplex::{Matrix, C64};

/// Random `rows × cols` matrix of rank at most `rank`, as a product of two
/// Gaussian factors. Real when `complex` is false.
pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, rank: usize, complex: bool) -> Matrix {
    let entry = |rng: &mut ChaCha8Rng| {
        let re = rng.random_range(-1.0..1.0);
        let im = if complex { rng.random_range(-1.0..1.0) } else { 0.0 };
        C64::new(re, im)
    };
    let k = rank.max(1);
    let left = Matrix::from_fn(rows, k, |_, _| entry(rng));
    let right = Matrix::from_fn(k, cols, |_, _| entry(rng));
    if rank == 0 {
        Matrix::zeros(rows, cols)
    } else {
        left * right
    }
}

/// Shape, rank cap, complexity and seed for one random matrix.
pub fn matrix_strategy() -> impl Strategy<Value = Matrix> {
    (1usize..=8, 1usize..=8, 0usize..=8, any::<bool>(), any::<u64>()).prop_map(|(r, c, k, cx, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_matrix(&mut rng, r, c, k.min(r).min(c), cx)
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Unit vector drawn from a Gaussian.
pub fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub fn relative(a: &Matrix, b: &Matrix) -> f64 {
    let scale = b.norm().max(a.norm()).max(1e-300);
    (a - b).norm() / scale
}

use nalgebra::DMatrix;
use rankcomplex::catalog;
use rankcomplex::spectral::GridFunction;
use rankcomplex::{ComplexChain, DiffOperator};

/// `x ↦ A f(x)` for a constant real matrix `A`.
pub fn pointwise(a: &DMatrix<f64>, f: &GridFunction) -> GridFunction {
    let d_in = f.fiber_dim();
    let mut values = Vec::with_capacity(f.grid().total_points() * a.nrows());
    for point in f.values().chunks(d_in) {
        for r in 0..a.nrows() {
            values.push((0..d_in).map(|c| point[c] * a[(r, c)]).sum::<C64>());
        }
    }
    GridFunction::new(f.grid(), a.nrows(), values).unwrap()
}

/// Chain with `curl` in the middle and `grad` on the left.
pub fn curl_chain(n: usize) -> ComplexChain {
    ComplexChain::new(
        Some(catalog::grad_operator(n).unwrap()),
        catalog::curl_operator(n).unwrap(),
        DiffOperator::zero(n, n * n, 1).unwrap(),
    )
    .unwrap()
}

/// Exact chains whose middle operator has constant rank, named for
/// failure messages.
pub fn exact_chains() -> Vec<(String, ComplexChain)> {
    let mut out = vec![
        ("grad_curl:2".to_string(), catalog::lookup("grad_curl:2").unwrap().chain),
        ("grad_curl:3".to_string(), catalog::lookup("grad_curl:3").unwrap().chain),
        ("curl:2".to_string(), curl_chain(2)),
        ("curl:3".to_string(), curl_chain(3)),
    ];
    for (n, l) in [(2, 1), (3, 1), (3, 2)] {
        let name = format!("de_rham:{n}:{l}");
        out.push((name.clone(), catalog::lookup(&name).unwrap().chain));
    }
    out
}
