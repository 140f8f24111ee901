use super::{Grid, Spectrum};
use crate::error::{check_dim, Result};
use crate::linalg::{Matrix, C64};
use crate::parallel;

const MODES_PER_CHUNK: usize = 256;

/// Per-mode `d_out × d_in` matrices over a grid.
///
/// Modes whose band-limited frequency vanishes use `zero_mode` instead of
/// their stored entry.
#[derive(Debug, Clone)]
pub struct MultiplierField {
    grid: Grid,
    d_out: usize,
    d_in: usize,
    /// Row-major `d_out × d_in` block per mode.
    entries: Vec<C64>,
    zero_mode: Matrix,
}

impl MultiplierField {
    /// Evaluates `symbol(ξ̃)` at every mode with `ξ̃ ≠ 0`, in parallel.
    pub fn build<F>(grid: Grid, d_out: usize, d_in: usize, zero_mode: Matrix, symbol: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<Matrix> + Sync + Send,
    {
        check_dim("zero-mode rows", d_out, zero_mode.nrows())?;
        check_dim("zero-mode cols", d_in, zero_mode.ncols())?;
        let total = grid.total_points();
        let block = d_out * d_in;
        let chunks = total.div_ceil(MODES_PER_CHUNK);
        let parts = parallel::map_indexed(chunks, |ci| -> Result<Vec<C64>> {
            let lo = ci * MODES_PER_CHUNK;
            let hi = (lo + MODES_PER_CHUNK).min(total);
            let mut out = vec![C64::new(0.0, 0.0); (hi - lo) * block];
            let mut xi = vec![0.0; grid.space_dim()];
            for m in lo..hi {
                grid.band_limited_xi_into(m, &mut xi);
                if xi.iter().all(|&x| x == 0.0) {
                    continue;
                }
                let mat = symbol(&xi)?;
                check_dim("multiplier rows", d_out, mat.nrows())?;
                check_dim("multiplier cols", d_in, mat.ncols())?;
                let dst = &mut out[(m - lo) * block..(m - lo + 1) * block];
                for r in 0..d_out {
                    for c in 0..d_in {
                        dst[r * d_in + c] = mat[(r, c)];
                    }
                }
            }
            Ok(out)
        });
        let mut entries = Vec::with_capacity(total * block);
        for p in parts {
            entries.extend(p?);
        }
        Ok(Self {
            grid,
            d_out,
            d_in,
            entries,
            zero_mode,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.d_out, self.d_in)
    }

    pub fn zero_mode(&self) -> &Matrix {
        &self.zero_mode
    }

    /// The matrix applied at a mode.
    pub fn at(&self, mode: usize) -> Matrix {
        if self.grid.band_limited_xi(mode).iter().all(|&x| x == 0.0) {
            return self.zero_mode.clone();
        }
        let b = &self.entries[mode * self.d_out * self.d_in..(mode + 1) * self.d_out * self.d_in];
        Matrix::from_row_slice(self.d_out, self.d_in, b)
    }

    /// Frobenius norm of the multiplier at every mode with `ξ̃ ≠ 0`.
    pub fn mode_norms(&self) -> Vec<f64> {
        let block = self.d_out * self.d_in;
        (0..self.grid.total_points())
            .filter(|&m| self.grid.band_limited_xi(m).iter().any(|&x| x != 0.0))
            .map(|m| {
                self.entries[m * block..(m + 1) * block]
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }

    /// The field with each mode's block multiplied by `factor(ξ̃)`; the
    /// zero-mode matrix is kept.
    pub(crate) fn scaled_per_mode<F>(&self, factor: F) -> Self
    where
        F: Fn(&[f64]) -> C64 + Sync + Send,
    {
        let block = self.d_out * self.d_in;
        let mut entries = self.entries.clone();
        let grid = self.grid;
        parallel::for_each_chunk_mut(&mut entries, MODES_PER_CHUNK * block, |ci, chunk| {
            let mut xi = vec![0.0; grid.space_dim()];
            for (k, b) in chunk.chunks_mut(block).enumerate() {
                grid.band_limited_xi_into(ci * MODES_PER_CHUNK + k, &mut xi);
                let s = factor(&xi);
                b.iter_mut().for_each(|z| *z *= s);
            }
        });
        Self {
            entries,
            zero_mode: self.zero_mode.clone(),
            ..*self
        }
    }

    pub fn apply(&self, s: &Spectrum) -> Result<Spectrum> {
        if s.grid() != self.grid {
            return Err(crate::error::Error::InvalidArgument(
                "multiplier and spectrum live on different grids".into(),
            ));
        }
        check_dim("multiplier input fiber", self.d_in, s.fiber_dim())?;
        let (d_out, d_in) = (self.d_out, self.d_in);
        let block = d_out * d_in;
        let zero: Vec<C64> = (0..d_out)
            .flat_map(|r| (0..d_in).map(move |c| (r, c)))
            .map(|(r, c)| self.zero_mode[(r, c)])
            .collect();
        Ok(map_modes(s, d_out, |m, xi, input, out| {
            let mat = if xi.iter().all(|&x| x == 0.0) {
                &zero[..]
            } else {
                &self.entries[m * block..(m + 1) * block]
            };
            for (r, o) in out.iter_mut().enumerate() {
                let row = &mat[r * d_in..(r + 1) * d_in];
                *o = row.iter().zip(input).map(|(a, b)| a * b).sum();
            }
        }))
    }
}

/// Applies `f(mode, ξ̃, input, output)` to every mode, producing a spectrum
/// with fiber dimension `d_out`.
pub(crate) fn map_modes<F>(s: &Spectrum, d_out: usize, f: F) -> Spectrum
where
    F: Fn(usize, &[f64], &[C64], &mut [C64]) + Sync + Send,
{
    let grid = s.grid();
    let d_in = s.fiber_dim();
    let mut out = vec![C64::new(0.0, 0.0); grid.total_points() * d_out];
    parallel::for_each_chunk_mut(&mut out, MODES_PER_CHUNK * d_out, |ci, chunk| {
        let mut xi = vec![0.0; grid.space_dim()];
        for (k, o) in chunk.chunks_mut(d_out).enumerate() {
            let m = ci * MODES_PER_CHUNK + k;
            grid.band_limited_xi_into(m, &mut xi);
            f(m, &xi, &s.coeffs()[m * d_in..(m + 1) * d_in], o);
        }
    });
    Spectrum {
        grid,
        fiber_dim: d_out,
        coeffs: out,
    }
}
