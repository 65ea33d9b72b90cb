use rayon::prelude::*;

use crate::funcspace::GridFunction;
use crate::operators::OperatorSpec;

use super::{ball_directions, param, CurvePoint, positive, ProbeError, ProbeReport, ProbeSetup, Verdict};

/// Samples are drawn from the open ball `B_r(x0)` by scaling closed-ball
/// directions with `r·OPEN_BALL`.
const OPEN_BALL: f64 = 1.0 - 1e-9;

/// Lower estimate of the local Lipschitz constant of `F` on `B_r(x0)`.
///
/// Pair `i` uses `x = x0 + r·d_i` and, depending on `i mod 3`, the center
/// `x0`, the contraction `x0 + (r/2)·d_i`, or the next sample
/// `x0 + r·d_{i+1}`. Pairs at distance zero are skipped.
pub fn lipschitz_local_estimate(setup: &ProbeSetup, r: f64, trials: usize, seed: u64) -> Result<f64, ProbeError> {
    positive("r", r)?;
    let dirs = ball_directions(setup.grid(), &setup.ns_x, trials, seed)?;
    let x0 = &setup.x0;
    let f0 = setup.op.eval_f(x0)?;
    let ratios: Vec<f64> = (0..dirs.len())
        .into_par_iter()
        .map(|i| {
            let x = x0.axpy(r, &dirs[i])?;
            let fx = setup.op.eval_f(&x)?;
            let (y, fy) = match i % 3 {
                0 => (x0.clone(), f0.clone()),
                1 => {
                    let y = x0.axpy(0.5 * r, &dirs[i])?;
                    let fy = setup.op.eval_f(&y)?;
                    (y, fy)
                }
                _ => {
                    let y = x0.axpy(r, &dirs[(i + 1) % dirs.len()])?;
                    let fy = setup.op.eval_f(&y)?;
                    (y, fy)
                }
            };
            let dx = setup.ns_x.distance(&x, &y)?;
            if dx == 0.0 {
                return Ok(0.0);
            }
            Ok(setup.ns_y.distance(&fx, &fy)? / dx)
        })
        .collect::<Result<_, ProbeError>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointwiseExcess {
    /// `max_i |G(y1,x0)_i − G(y2,x0)_i| − L1·|y1_i − y2_i|`; `≤ 0` means the
    /// pointwise condition holds for this pair.
    pub max_excess: f64,
    /// First cell attaining the maximum.
    pub cell: usize,
}

/// Cellwise check of `|G(y1,x0)(t) − G(y2,x0)(t)| ≤ L1·|y1(t) − y2(t)|`.
pub fn lipschitz_pointwise_check(
    op: &OperatorSpec,
    y1: &GridFunction,
    y2: &GridFunction,
    x0: &GridFunction,
    l1: f64,
) -> Result<PointwiseExcess, ProbeError> {
    if !(l1 >= 0.0) {
        return Err(param("l1", "must be nonnegative"));
    }
    y1.check_compatible(y2)?;
    let g1 = op.eval_g(y1, x0)?;
    let g2 = op.eval_g(y2, x0)?;
    let mut best = PointwiseExcess {
        max_excess: f64::NEG_INFINITY,
        cell: 0,
    };
    for i in 0..y1.len() {
        let e = (g1.at(i) - g2.at(i)).abs() - l1 * (y1.at(i) - y2.at(i)).abs();
        if e > best.max_excess {
            best = PointwiseExcess { max_excess: e, cell: i };
        }
    }
    Ok(best)
}

/// Constants of a local `(τ, ℓ)`-transfer condition together with the
/// Lipschitz constants `L` of `F` and `L2` of `G(x, ·)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzParams {
    pub tau: f64,
    pub ell: f64,
    pub l: f64,
    pub l2: f64,
    pub l1: f64,
}

impl LipschitzParams {
    /// Fills in `L1 = ℓ + τ(L + L2)`.
    pub fn derived(tau: f64, ell: f64, l: f64, l2: f64) -> Result<Self, ProbeError> {
        for (name, v) in [("tau", tau), ("ell", ell), ("l", l), ("l2", l2)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(param(name, format!("must be nonnegative and finite, got {v}")));
            }
        }
        let l1 = if tau == 0.0 { ell } else { ell + tau * (l + l2) };
        Ok(LipschitzParams { tau, ell, l, l2, l1 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferCheck {
    pub max_violation: f64,
    pub worst_trial: usize,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl TransferCheck {
    pub fn report(&self, params: &LipschitzParams) -> ProbeReport {
        ProbeReport::new("lipschitz_transfer", self.verdict)
            .with_curve(vec![CurvePoint::new(self.worst_trial as f64, self.max_violation)])
            .bound("max_violation", self.max_violation)
            .bound("tolerance", self.tolerance)
            .bound("tau", params.tau)
            .bound("ell", params.ell)
            .bound("l1", params.l1)
    }
}

/// Monte Carlo check of
/// `‖G(x,x0+h) − G(y,x0+h)‖ ≤ τ‖G(x,x0) − G(y,x0)‖ + ℓ‖x − y‖`
/// over triples with `x, y ∈ B_r(x0)` and `‖h‖ ≤ min{‖x − x0‖, ‖y − x0‖}`.
///
/// Trial `i` uses the sampled directions `d_i`, `d_{i+1}` for `x`, `y` and
/// `d_{i+2}` (scaled by the smaller radius) for `h`. The verdict is
/// `BOUND_SATISFIED` iff the largest violation is at most `tolerance`.
pub fn lipschitz_transfer_check(
    setup: &ProbeSetup,
    params: &LipschitzParams,
    r: f64,
    trials: usize,
    seed: u64,
    tolerance: f64,
) -> Result<TransferCheck, ProbeError> {
    positive("r", r)?;
    if trials == 0 {
        return Err(param("trials", "must be positive"));
    }
    let dirs = ball_directions(setup.grid(), &setup.ns_x, trials, seed)?;
    let (op, x0, ns_x, ns_y) = (&setup.op, &setup.x0, &setup.ns_x, &setup.ns_y);
    let n = dirs.len();
    let rr = r * OPEN_BALL;
    let violations: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = x0.axpy(rr, &dirs[i])?;
            let y = x0.axpy(rr, &dirs[(i + 1) % n])?;
            let scale = ns_x.distance(&x, x0)?.min(ns_x.distance(&y, x0)?);
            let z = x0.axpy(scale, &dirs[(i + 2) % n])?;
            let moved = ns_y.distance(&op.eval_g(&x, &z)?, &op.eval_g(&y, &z)?)?;
            let base = ns_y.distance(&op.eval_g(&x, x0)?, &op.eval_g(&y, x0)?)?;
            Ok(moved - params.tau * base - params.ell * ns_x.distance(&x, &y)?)
        })
        .collect::<Result<_, ProbeError>>()?;
    let (worst_trial, max_violation) = violations
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, v)| if v > b.1 { (i, v) } else { b });
    Ok(TransferCheck {
        max_violation,
        worst_trial,
        tolerance,
        verdict: if max_violation <= tolerance {
            Verdict::BoundSatisfied
        } else {
            Verdict::BoundViolated
        },
    })
}
