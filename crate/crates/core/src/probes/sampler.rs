//! Samples of the closed unit ball, scaled to `B_r(x0)` on demand.
//!
//! Sample `i` depends only on `(grid, norm, count, seed, i)`, and the same
//! directions are reused for every radius. The sequence is:
//!
//! 1. signed single-cell indicators `±χ_c/‖χ_c‖` (up to `count/4`), a
//!    packing of pairwise far-apart points;
//! 2. signed dyadic blocks `±θ χ_D/‖χ_D‖`, `θ ∈ {1, ½, ¼}`, coarse levels
//!    first (up to `count/2`);
//! 3. Gaussian directions rescaled to a norm drawn uniformly from `[0, 1)`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::funcspace::{GridFunction, NormSpec};
use crate::grid::Grid;

use super::{positive, ProbeError};

const MAX_DYADIC_LEVEL: u32 = 6;
const THETAS: [f64; 3] = [1.0, 0.5, 0.25];

enum Kind {
    Cell { cell: usize, sign: f64 },
    Block { lo: usize, hi: usize, theta: f64, sign: f64 },
    Gaussian,
}

fn plan(n: usize, count: usize) -> Vec<Kind> {
    let mut kinds = Vec::with_capacity(count);
    let n_cells = (count / 4).min(2 * n);
    let stride = (2 * n / n_cells.max(1)).max(1);
    for i in 0..n_cells {
        let cell = ((i / 2) * stride) % n;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        kinds.push(Kind::Cell { cell, sign });
    }
    let n_blocks = count / 2;
    let max_level = MAX_DYADIC_LEVEL.min(n.ilog2());
    'levels: for level in 0..=max_level {
        let blocks = 1usize << level;
        for b in 0..blocks {
            let (lo, hi) = (b * n / blocks, (b + 1) * n / blocks);
            for theta in THETAS {
                for sign in [1.0, -1.0] {
                    if kinds.len() - n_cells == n_blocks {
                        break 'levels;
                    }
                    kinds.push(Kind::Block { lo, hi, theta, sign });
                }
            }
        }
    }
    kinds.resize_with(count, || Kind::Gaussian);
    kinds
}

/// `count` points of the closed unit ball of `ns` on `grid` (scalar values).
pub fn ball_directions(grid: &Arc<Grid>, ns: &NormSpec, count: usize, seed: u64) -> Result<Vec<GridFunction>, ProbeError> {
    let n = grid.len();
    let kinds = plan(n, count);
    kinds
        .par_iter()
        .enumerate()
        .map(|(index, kind)| {
            let mut values = vec![0.0; n];
            match *kind {
                Kind::Cell { cell, sign } => {
                    values[cell] = 1.0;
                    let norm = ns.norm_of_magnitudes(grid, &values)?;
                    values[cell] = sign / norm;
                }
                Kind::Block { lo, hi, theta, sign } => {
                    values[lo..hi].fill(1.0);
                    let norm = ns.norm_of_magnitudes(grid, &values)?;
                    values[lo..hi].fill(sign * theta / norm);
                }
                Kind::Gaussian => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(index as u64);
                    for v in values.iter_mut() {
                        *v = rng.sample(StandardNormal);
                    }
                    let rho: f64 = rng.random();
                    let mags: Vec<f64> = values.iter().map(|v: &f64| v.abs()).collect();
                    let norm = ns.norm_of_magnitudes(grid, &mags)?;
                    if norm > 0.0 {
                        values.iter_mut().for_each(|v| *v *= rho / norm);
                    }
                }
            }
            Ok(GridFunction::scalar(Arc::clone(grid), values)?)
        })
        .collect()
}

/// `x0 + r·d` for each direction `d`.
pub fn ball_samples(
    x0: &GridFunction,
    directions: &[GridFunction],
    r: f64,
) -> Result<Vec<GridFunction>, ProbeError> {
    positive("r", r)?;
    directions
        .par_iter()
        .map(|d| Ok(x0.axpy(r, d)?))
        .collect()
}
