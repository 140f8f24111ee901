use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::{Grid, GridFunction, Spectrum};
use crate::linalg::C64;
use crate::parallel;

/// Unitary forward transform.
pub fn dft(f: &GridFunction) -> Spectrum {
    let grid = f.grid();
    let mut data = f.values().to_vec();
    let fft = FftPlanner::new().plan_fft_forward(grid.points_per_axis());
    transform_all_axes(&mut data, grid, f.fiber_dim(), &fft);
    Spectrum {
        grid,
        fiber_dim: f.fiber_dim(),
        coeffs: data,
    }
}

/// Unitary inverse transform.
pub fn idft(s: &Spectrum) -> GridFunction {
    let grid = s.grid();
    let mut data = s.coeffs().to_vec();
    let fft = FftPlanner::new().plan_fft_inverse(grid.points_per_axis());
    transform_all_axes(&mut data, grid, s.fiber_dim(), &fft);
    GridFunction {
        grid,
        fiber_dim: s.fiber_dim(),
        values: data,
    }
}

fn transform_all_axes(data: &mut [C64], grid: Grid, fiber: usize, fft: &Arc<dyn Fft<f64>>) {
    let n = grid.points_per_axis();
    for axis in 0..grid.space_dim() {
        transform_axis(data, n, fiber * n.pow(axis as u32), fft);
    }
    let scale = 1.0 / (grid.total_points() as f64).sqrt();
    for z in data.iter_mut() {
        *z *= scale;
    }
}

/// Lines gathered per task; adjacent lines share cache lines on gather.
const LINES_PER_TASK: usize = 64;

/// 1-D transforms along every line with the given element stride. Runs of
/// adjacent lines are gathered into one contiguous buffer, transformed in a
/// single call, then scattered back in order.
fn transform_axis(data: &mut [C64], n: usize, stride: usize, fft: &Arc<dyn Fft<f64>>) {
    let block = stride * n;
    let runs_per_block = stride.div_ceil(LINES_PER_TASK);
    let tasks = (data.len() / block) * runs_per_block;
    let run = |t: usize| {
        let base = (t / runs_per_block) * block;
        let lo = (t % runs_per_block) * LINES_PER_TASK;
        (base, lo, (lo + LINES_PER_TASK).min(stride))
    };
    let src: &[C64] = data;
    let transformed = parallel::map_indexed(tasks, |t| {
        let (base, lo, hi) = run(t);
        let width = hi - lo;
        let mut buf = vec![C64::new(0.0, 0.0); width * n];
        for k in 0..n {
            let row = &src[base + k * stride + lo..base + k * stride + hi];
            for (o, z) in row.iter().enumerate() {
                buf[o * n + k] = *z;
            }
        }
        fft.process(&mut buf);
        buf
    });
    for (t, buf) in transformed.into_iter().enumerate() {
        let (base, lo, hi) = run(t);
        for k in 0..n {
            let row = &mut data[base + k * stride + lo..base + k * stride + hi];
            for (o, z) in row.iter_mut().enumerate() {
                *z = buf[o * n + k];
            }
        }
    }
}
