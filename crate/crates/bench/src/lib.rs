//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use degenkit_core::{Grid, GridFunction, KernelSpec, OperatorSpec};

pub fn grid(n: usize) -> Arc<Grid> {
    Arc::new(Grid::uniform(n, 1.0).expect("positive cell count"))
}

/// A smooth, non-constant scalar function.
pub fn wave(grid: &Arc<Grid>) -> GridFunction {
    GridFunction::from_fn(Arc::clone(grid), |t| (6.0 * t).sin() + 0.5 * t).expect("finite values")
}

pub fn kuramoto(grid: &Arc<Grid>) -> OperatorSpec {
    let kernels = KernelSpec::parse(Some("u^2 + t"), Some("s * v"), Some("sin(u - v)")).expect("valid kernels");
    OperatorSpec::new(kernels, Arc::clone(grid), 1).expect("scalar operator")
}
