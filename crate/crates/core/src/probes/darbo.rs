//! Measure-of-noncompactness ratios, the Darbo growth bound and the
//! compactness witness.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::funcspace::GridFunction;

use super::mnc::Metric;
use super::{ball_directions, mnc_estimate, param, positive, CurvePoint, ProbeError, ProbeReport, ProbeSetup, Verdict};

/// Bounds on `α(F(B_r(x0)))/r` for one radius, at the probe's `k` budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusEstimate {
    pub r: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalMncRatio {
    pub k_budget: usize,
    /// One entry per radius, in the given (decreasing) order.
    pub curve: Vec<RadiusEstimate>,
    /// Lower and upper bounds on `α(L(B_1(0)))` for `L = D2G(x0, x0)`.
    pub linear_lower: f64,
    pub linear_upper: f64,
}

impl LocalMncRatio {
    /// Largest upper ratio over the radii.
    pub fn f_upper(&self) -> f64 {
        self.curve.iter().map(|e| e.upper).fold(0.0, f64::max)
    }

    pub fn report(&self) -> ProbeReport {
        let curve = self
            .curve
            .iter()
            .map(|e| CurvePoint::mnc(e.r, e.lower, self.k_budget, e.upper, e.lower))
            .collect();
        let floor = self.curve.iter().map(|e| e.lower).fold(f64::INFINITY, f64::min);
        let verdict = if floor > super::DEFAULT_FLOOR {
            Verdict::DegeneracyWitnessed
        } else {
            Verdict::NoWitnessFound
        };
        ProbeReport::new("local_mnc_ratio", verdict)
            .with_curve(curve)
            .bound("min_lower_ratio", if floor.is_finite() { floor } else { 0.0 })
            .bound("max_upper_ratio", self.f_upper())
            .bound("linear_lower", self.linear_lower)
            .bound("linear_upper", self.linear_upper)
    }
}

fn check_radii(radii: &[f64]) -> Result<(), ProbeError> {
    if radii.is_empty() {
        return Err(param("radii", "must not be empty"));
    }
    for &r in radii {
        positive("radii", r)?;
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(param("radii", "must be strictly decreasing"));
    }
    Ok(())
}

fn check_counts(samples: usize, k_budget: usize) -> Result<(), ProbeError> {
    if samples == 0 {
        return Err(param("samples", "must be positive"));
    }
    if k_budget == 0 {
        return Err(param("k_budget", "must be positive"));
    }
    Ok(())
}

fn images(setup: &ProbeSetup, dirs: &[GridFunction], r: f64) -> Result<Vec<GridFunction>, ProbeError> {
    dirs.par_iter()
        .map(|d| Ok(setup.op.eval_f(&setup.x0.axpy(r, d)?)?))
        .collect()
}

/// Bounds at `k` (the last recorded level if the traversal stopped early).
fn bounds_at(points: &[GridFunction], setup: &ProbeSetup, k: usize) -> Result<(f64, f64), ProbeError> {
    let est = mnc_estimate(points, &setup.ns_y, k)?;
    Ok((est.lower_at(k).unwrap_or(0.0), est.upper_at(k).unwrap_or(0.0)))
}

fn local_mnc_with(
    setup: &ProbeSetup,
    dirs: &[GridFunction],
    radii: &[f64],
    k_budget: usize,
) -> Result<LocalMncRatio, ProbeError> {
    let mut curve = Vec::with_capacity(radii.len());
    for &r in radii {
        let (lower, upper) = bounds_at(&images(setup, dirs, r)?, setup, k_budget)?;
        curve.push(RadiusEstimate {
            r,
            lower: lower / r,
            upper: upper / r,
        });
    }
    let l = setup.op.d2g_matrix(&setup.x0, &setup.x0)?;
    let linear: Vec<GridFunction> = dirs.par_iter().map(|d| l.apply(d)).collect::<Result<_, _>>()?;
    let (linear_lower, linear_upper) = bounds_at(&linear, setup, k_budget)?;
    Ok(LocalMncRatio {
        k_budget,
        curve,
        linear_lower,
        linear_upper,
    })
}

/// `α(F(B_r(x0)))/r` on sampled balls, one estimate per radius, plus the same
/// quantity for `D2G(x0, x0)` on `B_1(0)`.
///
/// The same `samples` unit-ball directions are used for every radius, and
/// both bounds come from [`mnc_estimate`] at `k_budget` centers.
pub fn local_mnc_ratio(
    setup: &ProbeSetup,
    radii: &[f64],
    samples: usize,
    k_budget: usize,
    seed: u64,
) -> Result<LocalMncRatio, ProbeError> {
    check_radii(radii)?;
    check_counts(samples, k_budget)?;
    let dirs = ball_directions(setup.grid(), &setup.ns_x, samples, seed)?;
    local_mnc_with(setup, &dirs, radii, k_budget)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DarboParams {
    pub radii: Vec<f64>,
    pub trials: usize,
    pub k_budget: usize,
    pub c: f64,
    pub tolerance: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DarboGrowth {
    /// `(r, diam(G(B_r(x0), x0))/(2r))` over the sampled points.
    pub lhs: Vec<CurvePoint>,
    /// `c·(max_r upper[F]/r + upper[D2G(x0,x0)])`.
    pub rhs: f64,
    pub mnc: LocalMncRatio,
    /// Largest `|ΔG(t)| − 2·rhs·max{|x1(t) − x0(t)|, |x2(t) − x0(t)|}` over all
    /// sampled pairs and cells.
    pub growth_excess: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl DarboGrowth {
    pub fn report(&self) -> ProbeReport {
        let max_lhs = self.lhs.iter().map(|p| p.value).fold(0.0, f64::max);
        ProbeReport::new("darbo_growth", self.verdict)
            .with_curve(self.lhs.clone())
            .bound("rhs", self.rhs)
            .bound("max_lhs", max_lhs)
            .bound("f_upper", self.mnc.f_upper())
            .bound("linear_upper", self.mnc.linear_upper)
            .bound("growth_excess", self.growth_excess)
            .bound("tolerance", self.tolerance)
    }
}

/// Sampled half-diameter ratio of `G(B_r(x0), x0)` against the Darbo-type
/// bound built from upper MNC estimates.
///
/// The verdict is `BOUND_SATISFIED` iff every `lhs(r) ≤ rhs + tolerance`.
/// The pointwise growth bound is evaluated on the same pairs and reported as
/// `growth_excess`; it does not enter the verdict.
pub fn darbo_growth_probe(setup: &ProbeSetup, params: &DarboParams) -> Result<DarboGrowth, ProbeError> {
    check_radii(&params.radii)?;
    check_counts(params.trials, params.k_budget)?;
    if !(params.c >= 1.0) || !params.c.is_finite() {
        return Err(param("c", "must be at least 1"));
    }
    if !(params.tolerance >= 0.0) {
        return Err(param("tolerance", "must be nonnegative"));
    }
    let dirs = ball_directions(setup.grid(), &setup.ns_x, params.trials, params.seed)?;
    let mnc = local_mnc_with(setup, &dirs, &params.radii, params.k_budget)?;
    let rhs = params.c * (mnc.f_upper() + mnc.linear_upper);

    let x0 = &setup.x0;
    let metric = Metric::new(&setup.ns_y, setup.grid(), 1);
    let mut lhs = Vec::with_capacity(params.radii.len());
    let mut growth_excess = f64::NEG_INFINITY;
    for &r in &params.radii {
        let xs: Vec<GridFunction> = dirs.par_iter().map(|d| x0.axpy(r, d)).collect::<Result<_, _>>()?;
        let gs: Vec<GridFunction> = xs
            .par_iter()
            .map(|x| setup.op.eval_g(x, x0))
            .collect::<Result<_, _>>()?;
        let rows: Vec<(f64, f64)> = (0..xs.len())
            .into_par_iter()
            .map(|i| {
                let mut diam = 0.0f64;
                let mut excess = f64::NEG_INFINITY;
                for j in i + 1..xs.len() {
                    diam = diam.max(metric.dist(gs[i].values(), gs[j].values())?);
                    for c in 0..x0.len() {
                        let spread = (xs[i].at(c) - x0.at(c)).abs().max((xs[j].at(c) - x0.at(c)).abs());
                        excess = excess.max((gs[i].at(c) - gs[j].at(c)).abs() - 2.0 * rhs * spread);
                    }
                }
                Ok((diam, excess))
            })
            .collect::<Result<_, ProbeError>>()?;
        let diam = rows.iter().map(|p| p.0).fold(0.0, f64::max);
        growth_excess = rows.iter().map(|p| p.1).fold(growth_excess, f64::max);
        lhs.push(CurvePoint::new(r, diam / (2.0 * r)));
    }
    let satisfied = lhs.iter().all(|p| p.value <= rhs + params.tolerance);
    Ok(DarboGrowth {
        lhs,
        rhs,
        mnc,
        growth_excess: if growth_excess.is_finite() { growth_excess } else { 0.0 },
        tolerance: params.tolerance,
        verdict: if satisfied {
            Verdict::BoundSatisfied
        } else {
            Verdict::BoundViolated
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Compactness {
    pub alpha_lower: f64,
    pub alpha_upper: f64,
    /// Singular values of `D2G(x0, x0)` in the weighted inner product,
    /// descending.
    pub singular_values: Vec<f64>,
    /// Whether the singular-value tail at rank `k_budget` is below tolerance.
    pub linear_compact: bool,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl Compactness {
    pub fn report(&self, k_budget: usize) -> ProbeReport {
        let curve = self
            .singular_values
            .iter()
            .enumerate()
            .map(|(i, &s)| CurvePoint::new(i as f64, s))
            .collect();
        ProbeReport::new("compactness", self.verdict)
            .with_curve(curve)
            .bound("alpha_lower", self.alpha_lower)
            .bound("alpha_upper", self.alpha_upper)
            .bound("k_budget", k_budget as f64)
            .bound("sigma_tail", self.singular_values.get(k_budget).copied().unwrap_or(0.0))
            .bound("tolerance", self.tolerance)
    }
}

/// Singular values of `W^{1/2} M W^{-1/2}` where `W` holds the cell weights,
/// sorted descending. In `L_2` these are the singular values of the operator.
fn weighted_singular_values(setup: &ProbeSetup) -> Result<Vec<f64>, ProbeError> {
    let l = setup.op.d2g_matrix(&setup.x0, &setup.x0)?;
    let n = l.size();
    let w: Vec<f64> = setup.grid().weights().map(f64::sqrt).collect();
    let m = DMatrix::from_fn(n, n, |i, j| w[i] * l.entry(i, j) / w[j]);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Budgeted lower bound on `α(F(B_r(x0)))` next to a compactness proxy for
/// `D2G(x0, x0)`.
///
/// The verdict is `DEGENERACY_WITNESSED` when the image of the ball stays
/// spread out (`alpha_lower > tolerance`) although the linear part is
/// numerically of rank at most `k_budget`
/// (`σ_{k_budget+1} ≤ tolerance·max(1, σ_1)`).
pub fn compactness_probe(
    setup: &ProbeSetup,
    r: f64,
    trials: usize,
    k_budget: usize,
    seed: u64,
    tolerance: f64,
) -> Result<Compactness, ProbeError> {
    positive("r", r)?;
    check_counts(trials, k_budget)?;
    if !(tolerance >= 0.0) {
        return Err(param("tolerance", "must be nonnegative"));
    }
    let dirs = ball_directions(setup.grid(), &setup.ns_x, trials, seed)?;
    let (alpha_lower, alpha_upper) = bounds_at(&images(setup, &dirs, r)?, setup, k_budget)?;
    let singular_values = weighted_singular_values(setup)?;
    let top = singular_values.first().copied().unwrap_or(0.0);
    let tail = singular_values.get(k_budget).copied().unwrap_or(0.0);
    let linear_compact = tail <= tolerance * top.max(1.0);
    let witnessed = alpha_lower > tolerance && linear_compact;
    Ok(Compactness {
        alpha_lower,
        alpha_upper,
        singular_values,
        linear_compact,
        tolerance,
        verdict: if witnessed {
            Verdict::DegeneracyWitnessed
        } else {
            Verdict::NoWitnessFound
        },
    })
}
