//! Step functions on a [`Grid`] and the norm layer over them.

mod approx;
mod norm;
mod stability;
mod support;

use std::sync::Arc;

use thiserror::Error;

use crate::grid::{Grid, GridError, Refinement, SubsetMask};
use crate::kernel_lang::{EvalError, ParseError};

pub use approx::{mean_value_check, simple_approx, MeanValueCheck};
pub use norm::{Exponent, NormSpec, YoungFunction, YoungSpec};
pub use stability::{average_stability_check, StabilityCheck};
pub use support::{project, shrink_support, vpair_witness, ShrunkSupport, VPairStep, VPairWitness};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuncSpaceError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("value dimension must be at least 1")]
    ZeroDim,
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("non-finite value at cell {cell}")]
    NonFinite { cell: usize },
    #[error("exponent p must satisfy p >= 1, got {0}")]
    BadExponent(f64),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid Young function: {0}")]
    Young(String),
    #[error("Young function evaluation failed at t = {t}, u = {u}: {source}")]
    YoungEval {
        t: f64,
        u: f64,
        #[source]
        source: EvalError,
    },
    #[error("Orlicz modular is infinite for every scaling")]
    ModularInfinite,
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("mask does not meet the support of the function")]
    MissesSupport,
    #[error("support could not be shrunk below {eps} within {max_refine} refinements (reached {achieved})")]
    ShrinkExhausted {
        eps: f64,
        max_refine: usize,
        achieved: f64,
    },
    #[error("the function vanishes on the mask")]
    VanishesOnMask,
    #[error("sequences have lengths {0} and {1}, grid has {2} cells")]
    SequenceLength(usize, usize, usize),
    #[error("the averaged function is identically zero")]
    ZeroAverage,
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
}

/// A vector-valued step function: one value in `R^dim` per grid cell.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<Grid>,
    dim: usize,
    values: Vec<f64>,
}

impl PartialEq for GridFunction {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.values == other.values && Grid::same(&self.grid, &other.grid)
    }
}

impl GridFunction {
    /// `values` is row-major: cell `i` owns `values[i*dim .. (i+1)*dim]`.
    pub fn new(grid: Arc<Grid>, dim: usize, values: Vec<f64>) -> Result<Self, FuncSpaceError> {
        if dim == 0 {
            return Err(FuncSpaceError::ZeroDim);
        }
        if values.len() != grid.len() * dim {
            return Err(FuncSpaceError::Length {
                expected: grid.len() * dim,
                got: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(FuncSpaceError::NonFinite { cell: k / dim });
        }
        Ok(GridFunction { grid, dim, values })
    }

    pub fn scalar(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self, FuncSpaceError> {
        Self::new(grid, 1, values)
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Result<Self, FuncSpaceError> {
        let n = grid.len();
        Self::new(grid, 1, vec![c; n])
    }

    pub fn zeros(grid: Arc<Grid>, dim: usize) -> Self {
        let n = grid.len();
        GridFunction {
            grid,
            dim: dim.max(1),
            values: vec![0.0; n * dim.max(1)],
        }
    }

    /// Scalar function sampled at cell representatives.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Result<Self, FuncSpaceError> {
        let values = grid.representatives().map(f).collect();
        Self::new(grid, 1, values)
    }

    /// `value * χ_D` for a scalar `value`.
    pub fn indicator(mask: &SubsetMask, value: f64) -> Result<Self, FuncSpaceError> {
        let values = mask.members().iter().map(|&m| if m { value } else { 0.0 }).collect();
        Self::new(Arc::clone(mask.grid()), 1, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, cell: usize) -> &[f64] {
        &self.values[cell * self.dim..(cell + 1) * self.dim]
    }

    /// First component at `cell`; the whole value for scalar functions.
    pub fn at(&self, cell: usize) -> f64 {
        self.values[cell * self.dim]
    }

    /// Euclidean length of the value at `cell`.
    pub fn magnitude(&self, cell: usize) -> f64 {
        euclid(self.value(cell))
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.chunks_exact(self.dim).map(euclid).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Cells where the value is nonzero.
    pub fn support(&self) -> SubsetMask {
        let members = self
            .values
            .chunks_exact(self.dim)
            .map(|c| c.iter().any(|&v| v != 0.0))
            .collect();
        SubsetMask::new(Arc::clone(&self.grid), members).expect("one flag per cell")
    }

    pub fn check_compatible(&self, other: &GridFunction) -> Result<(), FuncSpaceError> {
        if !Grid::same(&self.grid, &other.grid) {
            return Err(GridError::GridMismatch.into());
        }
        if self.dim != other.dim {
            return Err(FuncSpaceError::DimMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self, FuncSpaceError> {
        self.check_compatible(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::new(Arc::clone(&self.grid), self.dim, values)
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self, FuncSpaceError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self, FuncSpaceError> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + a * other`
    pub fn axpy(&self, a: f64, other: &GridFunction) -> Result<Self, FuncSpaceError> {
        self.zip_with(other, |x, y| x + a * y)
    }

    pub fn scale(&self, a: f64) -> Result<Self, FuncSpaceError> {
        Self::new(Arc::clone(&self.grid), self.dim, self.values.iter().map(|v| a * v).collect())
    }

    /// Pointwise product with a scalar step function.
    pub fn multiply(&self, s: &GridFunction) -> Result<Self, FuncSpaceError> {
        if !Grid::same(&self.grid, &s.grid) {
            return Err(GridError::GridMismatch.into());
        }
        if s.dim != 1 {
            return Err(FuncSpaceError::DimMismatch(1, s.dim));
        }
        let values = self
            .values
            .chunks_exact(self.dim)
            .zip(&s.values)
            .flat_map(|(c, &k)| c.iter().map(move |v| k * v))
            .collect();
        Self::new(Arc::clone(&self.grid), self.dim, values)
    }

    /// The same step function on the refined grid.
    pub fn transport(&self, r: &Refinement) -> Result<Self, FuncSpaceError> {
        if !Grid::same(&self.grid, &r.coarse) {
            return Err(GridError::GridMismatch.into());
        }
        let mut values = Vec::with_capacity(2 * self.values.len());
        for c in self.values.chunks_exact(self.dim) {
            values.extend_from_slice(c);
            values.extend_from_slice(c);
        }
        Ok(GridFunction {
            grid: Arc::clone(&r.fine),
            dim: self.dim,
            values,
        })
    }

    /// Transport through `times` successive refinements onto `target`.
    pub fn transport_to(&self, target: &Arc<Grid>) -> Result<Self, FuncSpaceError> {
        let mut f = self.clone();
        while !Grid::same(&f.grid, target) {
            if f.grid.len() >= target.len() {
                return Err(GridError::GridMismatch.into());
            }
            f = f.transport(&f.grid.refine())?;
        }
        Ok(GridFunction {
            grid: Arc::clone(target),
            ..f
        })
    }
}

pub(crate) fn euclid(v: &[f64]) -> f64 {
    match v {
        [x] => x.abs(),
        _ => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
    }
}

/// Norm of `x`; free-function form of [`NormSpec::norm`].
pub fn norm(x: &GridFunction, ns: &NormSpec) -> Result<f64, FuncSpaceError> {
    ns.norm(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        let g = Arc::new(Grid::uniform(3, 1.0).unwrap());
        assert!(matches!(
            GridFunction::scalar(Arc::clone(&g), vec![1.0]),
            Err(FuncSpaceError::Length { expected: 3, got: 1 })
        ));
        assert_eq!(
            GridFunction::scalar(Arc::clone(&g), vec![1.0, f64::NAN, 0.0]),
            Err(FuncSpaceError::NonFinite { cell: 1 })
        );
        assert_eq!(GridFunction::new(g, 0, vec![]), Err(FuncSpaceError::ZeroDim));
    }

    #[test]
    fn vector_magnitudes_are_euclidean() {
        let g = Arc::new(Grid::uniform(2, 1.0).unwrap());
        let x = GridFunction::new(g, 2, vec![3.0, 4.0, 0.0, -1.0]).unwrap();
        assert_eq!(x.magnitudes(), vec![5.0, 1.0]);
        assert_eq!(x.support().count(), 2);
    }

    #[test]
    fn transport_to_refined_grid() {
        let g = Arc::new(Grid::uniform(2, 1.0).unwrap());
        let x = GridFunction::scalar(Arc::clone(&g), vec![1.0, 2.0]).unwrap();
        let fine = g.refine_times(2);
        let y = x.transport_to(&fine).unwrap();
        assert_eq!(y.values(), &[1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn arithmetic_requires_same_grid() {
        let a = GridFunction::constant(Arc::new(Grid::uniform(2, 1.0).unwrap()), 1.0).unwrap();
        let b = GridFunction::constant(Arc::new(Grid::uniform(3, 1.0).unwrap()), 1.0).unwrap();
        assert!(a.add(&b).is_err());
        // structurally equal grids are the same grid
        let c = GridFunction::constant(Arc::new(Grid::uniform(2, 1.0).unwrap()), 2.0).unwrap();
        assert_eq!(a.add(&c).unwrap().values(), &[3.0, 3.0]);
    }
}
