use std::sync::Arc;

use crate::funcspace::GridFunction;
use crate::grid::{Grid, SubsetMask};

use super::{param, CurvePoint, ProbeError, ProbeReport, ProbeSetup, Verdict};

/// Grids are not refined past this many cells while looking for `D_n`.
const MAX_CELLS: usize = 1 << 16;
const MEASURE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FrechetResidual {
    /// `(mes D_n, ratio_n)` for `n = 1..=levels`.
    pub curve: Vec<CurvePoint>,
    /// Cell count of the finest grid used.
    pub cells: usize,
    pub floor: f64,
    pub verdict: Verdict,
}

impl FrechetResidual {
    pub fn report(&self) -> ProbeReport {
        let last = self.curve.last().map_or(0.0, |p| p.value);
        ProbeReport::new("frechet_residual", self.verdict)
            .with_curve(self.curve.clone())
            .bound("final_ratio", last)
            .bound("floor", self.floor)
            .bound("cells", self.cells as f64)
    }
}

/// Number of leading cells whose measure is `target`, if any.
fn prefix_for(grid: &Grid, target: f64) -> Option<usize> {
    let tol = MEASURE_TOLERANCE * grid.total_measure();
    let mut acc = 0.0;
    for (k, c) in grid.cells().iter().enumerate() {
        acc += c.measure;
        if (acc - target).abs() <= tol {
            return Some(k + 1);
        }
        if acc > target + tol {
            return None;
        }
    }
    None
}

/// Residual of the linearization along shrinking characteristic perturbations.
///
/// For `n = 1..=levels` the perturbation is `h_n = amplitude·χ_{D_n}` where
/// `D_n` is an initial run of cells of measure `2^{-n}·mes Ω` (the grid is
/// refined when no such run exists), and the recorded value is
/// `‖F(x0 + h_n) − F(x0) − DF(x0) h_n‖_Y / ‖h_n‖_X`. A Fréchet derivative
/// would force this to zero; the verdict is `DEGENERACY_WITNESSED` when every
/// value in the last third of the curve stays above `floor`.
pub fn frechet_residual_probe(
    setup: &ProbeSetup,
    amplitude: f64,
    levels: usize,
    floor: f64,
) -> Result<FrechetResidual, ProbeError> {
    if amplitude == 0.0 || !amplitude.is_finite() {
        return Err(param("amplitude", "must be nonzero and finite"));
    }
    if levels < 2 {
        return Err(param("levels", format!("must be at least 2, got {levels}")));
    }
    if !(floor >= 0.0) {
        return Err(param("floor", "must be nonnegative"));
    }
    let mut op = setup.op.clone();
    let mut x0 = setup.x0.clone();
    let mut f0 = op.eval_f(&x0)?;
    let mut stale = false;
    let total = op.grid().total_measure();
    let mut curve = Vec::with_capacity(levels);

    for n in 1..=levels {
        let target = total * 0.5f64.powi(n as i32);
        let count = loop {
            if let Some(c) = prefix_for(op.grid(), target) {
                break c;
            }
            if op.grid().len() * 2 > MAX_CELLS {
                return Err(param(
                    "levels",
                    format!("no run of cells with measure {target} within {MAX_CELLS} cells"),
                ));
            }
            let r = op.grid().refine();
            x0 = x0.transport(&r)?;
            op = op.with_grid(Arc::clone(&r.fine));
            stale = true;
        };
        if stale {
            f0 = op.eval_f(&x0)?;
            stale = false;
        }
        let grid = op.grid();
        let d = SubsetMask::from_fn(Arc::clone(grid), |i, _| i < count);
        let h = GridFunction::indicator(&d, amplitude)?;
        let f1 = op.eval_f(&x0.add(&h)?)?;
        let lh = op.gateaux_f_apply(&x0, &h)?;
        let residual = f1.sub(&f0)?.sub(&lh)?;
        let ratio = setup.ns_y.norm(&residual)? / setup.ns_x.norm(&h)?;
        curve.push(CurvePoint::new(d.measure(), ratio));
    }

    let tail = levels.div_ceil(3);
    let witnessed = curve[levels - tail..].iter().all(|p| p.value > floor);
    Ok(FrechetResidual {
        cells: op.grid().len(),
        curve,
        floor,
        verdict: if witnessed {
            Verdict::DegeneracyWitnessed
        } else {
            Verdict::NoWitnessFound
        },
    })
}
