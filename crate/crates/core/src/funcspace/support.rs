use std::sync::Arc;

use crate::grid::{Grid, GridError, SubsetMask};

use super::{FuncSpaceError, GridFunction, NormSpec};

/// `P_D x`: `x` on `d`, zero elsewhere.
pub fn project(x: &GridFunction, d: &SubsetMask) -> Result<GridFunction, FuncSpaceError> {
    if !Grid::same(x.grid(), d.grid()) {
        return Err(GridError::GridMismatch.into());
    }
    let dim = x.dim();
    let mut values = x.values().to_vec();
    for (i, &m) in d.members().iter().enumerate() {
        if !m {
            values[i * dim..(i + 1) * dim].fill(0.0);
        }
    }
    GridFunction::new(Arc::clone(x.grid()), dim, values)
}

#[derive(Debug, Clone)]
pub struct ShrunkSupport {
    pub grid: Arc<Grid>,
    pub mask: SubsetMask,
    /// `x` transported onto `grid`.
    pub x: GridFunction,
    /// `‖P_D x‖`
    pub norm: f64,
    pub refinements: usize,
}

/// Find a positive-measure `D ⊆ t_mask` with `‖P_D x‖ < eps` by repeated
/// halving, keeping the half of smaller norm (the left one on ties).
pub fn shrink_support(
    x: &GridFunction,
    t_mask: &SubsetMask,
    eps: f64,
    ns: &NormSpec,
    max_refine: usize,
) -> Result<ShrunkSupport, FuncSpaceError> {
    if !(eps > 0.0) {
        return Err(FuncSpaceError::NonPositive("eps"));
    }
    let full = ns.norm(&project(x, t_mask)?)?;
    if full == 0.0 {
        return Err(FuncSpaceError::MissesSupport);
    }
    if full < eps {
        return Ok(ShrunkSupport {
            grid: Arc::clone(x.grid()),
            mask: t_mask.clone(),
            x: x.clone(),
            norm: full,
            refinements: 0,
        });
    }
    let mut x = x.clone();
    let mut d = t_mask.intersect(&x.support())?;
    let mut norm = ns.norm(&project(&x, &d)?)?;
    let mut refinements = 0;
    while norm >= eps {
        let (l, r) = d.equal_split()?;
        if !Grid::same(l.grid(), x.grid()) {
            if refinements == max_refine {
                return Err(FuncSpaceError::ShrinkExhausted {
                    eps,
                    max_refine,
                    achieved: norm,
                });
            }
            refinements += 1;
            x = x.transport(&x.grid().refine())?;
        }
        let nl = ns.norm(&project(&x, &l)?)?;
        let nr = ns.norm(&project(&x, &r)?)?;
        (d, norm) = if nr < nl { (r, nr) } else { (l, nl) };
    }
    Ok(ShrunkSupport {
        grid: Arc::clone(x.grid()),
        mask: d,
        x,
        norm,
        refinements,
    })
}

#[derive(Debug, Clone)]
pub struct VPairStep {
    pub mask: SubsetMask,
    /// `P_{D_n} x`
    pub x_n: GridFunction,
    pub norm_x: f64,
    pub norm_y: f64,
    /// `‖P_{D_n} x‖_X / ‖P_{D_n} y‖_Y`
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct VPairWitness {
    /// Smallest `N ≥ 1` with `{t ∈ T : N|y(t)| > |x(t)|}` of positive measure.
    pub n: u64,
    /// `N · C` where `‖z‖_X ≤ C ‖z‖_Y`, when such `C` is known.
    pub bound: Option<f64>,
    pub steps: Vec<VPairStep>,
}

/// Shrinking sets `D_n ⊆ T_N` on which `x` stays dominated by `N·y`.
pub fn vpair_witness(
    x: &GridFunction,
    y: &GridFunction,
    t_mask: &SubsetMask,
    ns_x: &NormSpec,
    ns_y: &NormSpec,
    steps: usize,
) -> Result<VPairWitness, FuncSpaceError> {
    x.check_compatible(y)?;
    if !Grid::same(x.grid(), t_mask.grid()) {
        return Err(GridError::GridMismatch.into());
    }
    let (xm, ym) = (x.magnitudes(), y.magnitudes());
    let n = t_mask
        .member_indices()
        .filter(|&i| ym[i] > 0.0)
        .map(|i| (xm[i] / ym[i]).floor() + 1.0)
        .reduce(f64::min)
        .ok_or(FuncSpaceError::VanishesOnMask)?;
    let nf = n;
    let mut d = SubsetMask::from_fn(Arc::clone(x.grid()), |i, _| {
        t_mask.contains(i) && nf * ym[i] > xm[i]
    });
    let (mut x, mut y) = (x.clone(), y.clone());
    let mut out = Vec::with_capacity(steps);
    for k in 0..steps {
        let x_n = project(&x, &d)?;
        let norm_x = ns_x.norm(&x_n)?;
        let norm_y = ns_y.norm(&project(&y, &d)?)?;
        out.push(VPairStep {
            mask: d.clone(),
            x_n,
            norm_x,
            norm_y,
            ratio: norm_x / norm_y,
        });
        if k + 1 == steps {
            break;
        }
        let (l, r) = d.equal_split()?;
        if !Grid::same(l.grid(), x.grid()) {
            let refinement = x.grid().refine();
            x = x.transport(&refinement)?;
            y = y.transport(&refinement)?;
        }
        let nl = ns_x.norm(&project(&x, &l)?)?;
        let nr = ns_x.norm(&project(&x, &r)?)?;
        d = if nr < nl { r } else { l };
    }
    let total = x.grid().total_measure();
    Ok(VPairWitness {
        n: n as u64,
        bound: ns_y.embedding_constant(ns_x, total).map(|c| n * c),
        steps: out,
    })
}
