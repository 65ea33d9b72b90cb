use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::funcspace::{GridFunction, NormSpec};
use crate::grid::Grid;

use super::{ProbeError, MAX_ENUMERATION_CELLS};

/// Budgeted bounds on the covering radius of a finite point set.
#[derive(Debug, Clone, PartialEq)]
pub struct MncEstimate {
    /// `(k, cost)`: some `k` centers cover every point within `cost`.
    pub upper: Vec<(usize, f64)>,
    /// `(k, bound)`: no `k` centers cover the points within less than `bound`.
    pub lower: Vec<(usize, f64)>,
    /// Farthest-first order; the first `k + 1` entries are pairwise at least
    /// `2·lower(k)` apart.
    pub witness: Vec<usize>,
}

impl MncEstimate {
    pub fn upper_at(&self, k: usize) -> Option<f64> {
        self.upper.iter().find(|e| e.0 == k).map(|e| e.1)
    }

    pub fn lower_at(&self, k: usize) -> Option<f64> {
        self.lower.iter().find(|e| e.0 == k).map(|e| e.1)
    }

    pub fn k_max(&self) -> usize {
        self.upper.last().map_or(0, |e| e.0)
    }
}

pub(crate) struct Metric<'a> {
    ns: &'a NormSpec,
    grid: &'a Grid,
    dim: usize,
}

impl<'a> Metric<'a> {
    pub(crate) fn new(ns: &'a NormSpec, grid: &'a Grid, dim: usize) -> Self {
        Metric { ns, grid, dim }
    }

    pub(crate) fn dist(&self, a: &[f64], b: &[f64]) -> Result<f64, ProbeError> {
        let mags: Vec<f64> = if self.dim == 1 {
            a.iter().zip(b).map(|(p, q)| (p - q).abs()).collect()
        } else {
            a.chunks_exact(self.dim)
                .zip(b.chunks_exact(self.dim))
                .map(|(p, q)| p.iter().zip(q).map(|(s, t)| (s - t) * (s - t)).sum::<f64>().sqrt())
                .collect()
        };
        Ok(self.ns.norm_of_magnitudes(self.grid, &mags)?)
    }
}

fn check_points(points: &[GridFunction]) -> Result<(), ProbeError> {
    let first = points.first().ok_or(ProbeError::EmptyPointSet)?;
    if points.iter().any(|p| p.check_compatible(first).is_err()) {
        return Err(ProbeError::MixedPoints);
    }
    Ok(())
}

/// Farthest-first traversal from point 0 (ties to the lowest index).
///
/// With `r_k` the largest distance to the first `k` centers, `lower(k) = r_k/2`
/// (those `k + 1` points are pairwise `≥ r_k` apart, so no `k` balls of radius
/// below `r_k/2` cover them) and `upper(k)` is the smaller of `r_k` and the
/// cost after one Lloyd step that moves each center to its cluster mean.
pub fn mnc_estimate(points: &[GridFunction], ns: &NormSpec, k_max: usize) -> Result<MncEstimate, ProbeError> {
    check_points(points)?;
    let grid = points[0].grid();
    let dim = points[0].dim();
    let metric = Metric::new(ns, grid, dim);
    let n = points.len();

    let dist_to = |c: &[f64]| -> Result<Vec<f64>, ProbeError> {
        points.par_iter().map(|p| metric.dist(p.values(), c)).collect()
    };

    let mut centers = vec![0usize];
    let mut nearest = dist_to(points[0].values())?;
    let mut label = vec![0usize; n];
    let mut upper = Vec::with_capacity(k_max);
    let mut lower = Vec::with_capacity(k_max);
    let mut prev_upper = f64::INFINITY;

    for k in 1..=k_max {
        let (far, r_k) = nearest
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, d)| if d > best.1 { (i, d) } else { best });
        let lloyd = if r_k > 0.0 { lloyd_cost(points, &label, centers.len(), &metric)? } else { 0.0 };
        let u = r_k.min(lloyd).min(prev_upper);
        prev_upper = u;
        upper.push((k, u));
        lower.push((k, 0.5 * r_k));
        if r_k == 0.0 {
            continue;
        }
        // `far` joins the traversal; it is the (k+1)-th witness point
        let slot = centers.len();
        centers.push(far);
        if k < k_max {
            let d = dist_to(points[far].values())?;
            for i in 0..n {
                if d[i] < nearest[i] {
                    nearest[i] = d[i];
                    label[i] = slot;
                }
            }
        }
    }
    Ok(MncEstimate {
        upper,
        lower,
        witness: centers,
    })
}

/// Largest distance from a point to the mean of its cluster.
fn lloyd_cost(points: &[GridFunction], label: &[usize], clusters: usize, metric: &Metric) -> Result<f64, ProbeError> {
    let len = points[0].values().len();
    let mut sums = vec![vec![0.0; len]; clusters];
    let mut counts = vec![0usize; clusters];
    for (p, &c) in points.iter().zip(label) {
        counts[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(p.values()) {
            *s += v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            let inv = c as f64;
            s.iter_mut().for_each(|v| *v /= inv);
        }
    }
    let costs: Vec<f64> = points
        .par_iter()
        .zip(label.par_iter())
        .map(|(p, &c)| metric.dist(p.values(), &sums[c]))
        .collect::<Result<_, _>>()?;
    Ok(costs.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixtureMode {
    /// All `2^n` cell-level masks; bit `i` of the index selects `y1` on cell `i`.
    Enumerate,
    Sample { count: usize, seed: u64 },
}

/// Mixtures `P_D y1 + P_{Ω∖D} y2` over cell-level masks `D`.
pub fn mixture_set(y1: &GridFunction, y2: &GridFunction, mode: MixtureMode) -> Result<Vec<GridFunction>, ProbeError> {
    y1.check_compatible(y2)?;
    let n = y1.len();
    let dim = y1.dim();
    let build = |pick: &dyn Fn(usize) -> bool| {
        let mut values = Vec::with_capacity(n * dim);
        for i in 0..n {
            values.extend_from_slice(if pick(i) { y1.value(i) } else { y2.value(i) });
        }
        GridFunction::new(Arc::clone(y1.grid()), dim, values)
    };
    let out: Result<Vec<_>, _> = match mode {
        MixtureMode::Enumerate => {
            if n > MAX_ENUMERATION_CELLS {
                return Err(ProbeError::EnumerationTooLarge { cells: n });
            }
            (0u64..1 << n)
                .into_par_iter()
                .map(|mask| build(&|i| mask >> i & 1 == 1))
                .collect()
        }
        MixtureMode::Sample { count, seed } => (0..count)
            .into_par_iter()
            .map(|index| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(index as u64);
                let bits: Vec<bool> = (0..n).map(|_| rng.random()).collect();
                build(&|i| bits[i])
            })
            .collect(),
    };
    Ok(out?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> Arc<Grid> {
        Arc::new(Grid::uniform(n, 1.0).unwrap())
    }

    #[test]
    fn identical_points_have_zero_bounds() {
        let p = GridFunction::constant(unit(4), 2.0).unwrap();
        let est = mnc_estimate(&vec![p; 5], &NormSpec::Lp(2.0), 3).unwrap();
        assert!(est.upper.iter().all(|e| e.1 == 0.0));
        assert!(est.lower.iter().all(|e| e.1 == 0.0));
    }

    #[test]
    fn two_points() {
        let g = unit(4);
        let a = GridFunction::constant(Arc::clone(&g), 0.0).unwrap();
        let b = GridFunction::constant(g, 1.0).unwrap();
        let est = mnc_estimate(&[a, b], &NormSpec::Lp(2.0), 2).unwrap();
        assert_eq!(est.upper_at(1), Some(0.5));
        assert_eq!(est.lower_at(1), Some(0.5));
        assert_eq!(est.upper_at(2), Some(0.0));
        assert_eq!(est.witness, vec![0, 1]);
    }

    #[test]
    fn empty_and_mixed_sets() {
        assert_eq!(mnc_estimate(&[], &NormSpec::Lp(2.0), 1), Err(ProbeError::EmptyPointSet));
        let a = GridFunction::constant(unit(2), 0.0).unwrap();
        let b = GridFunction::constant(unit(3), 0.0).unwrap();
        assert_eq!(mnc_estimate(&[a, b], &NormSpec::Lp(2.0), 1), Err(ProbeError::MixedPoints));
    }

    #[test]
    fn enumerate_counts_and_extremes() {
        let g = unit(5);
        let y1 = GridFunction::constant(Arc::clone(&g), 1.0).unwrap();
        let y2 = GridFunction::from_fn(g, |t| -t).unwrap();
        let m = mixture_set(&y1, &y2, MixtureMode::Enumerate).unwrap();
        assert_eq!(m.len(), 32);
        assert_eq!(m[0], y2);
        assert_eq!(m[31], y1);
    }

    #[test]
    fn equal_inputs_give_equal_mixtures() {
        let y = GridFunction::from_fn(unit(6), |t| t * t).unwrap();
        let m = mixture_set(&y, &y, MixtureMode::Sample { count: 20, seed: 4 }).unwrap();
        assert!(m.iter().all(|z| *z == y));
    }

    #[test]
    fn enumeration_guard() {
        let y = GridFunction::constant(unit(21), 1.0).unwrap();
        assert_eq!(
            mixture_set(&y, &y, MixtureMode::Enumerate).unwrap_err(),
            ProbeError::EnumerationTooLarge { cells: 21 }
        );
    }
}
