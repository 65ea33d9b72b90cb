//! Quadrature realization of `G(x1, x2) = K0(x1) + K1(x2) + K2(x1, x2)` and
//! its derivatives.
//!
//! For an output cell `i` with representative `t_i`,
//!
//! ```text
//! G(x1, x2)_i = k0(t_i, x1_i) + Σ_j w_j k1(t_i, t_j, x2_j) + Σ_j w_j k2(t_i, t_j, x1_i, x2_j)
//! ```
//!
//! and `F(x) = G(x, x)`. Rows are independent and are assembled in parallel;
//! each row sums over `j` in a fixed order, so results do not depend on the
//! number of worker threads.

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::funcspace::{FuncSpaceError, GridFunction};
use crate::grid::{Grid, GridError};
use crate::kernel_lang::{diff_expr, DiffError, EvalError, Expr, KernelSpec, KernelSpecError, Var};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error(transparent)]
    Kernel(#[from] KernelSpecError),
    #[error("kernel {slot} failed at cell pair ({i}, {j}): {source}")]
    Eval {
        slot: &'static str,
        i: usize,
        j: usize,
        #[source]
        source: EvalError,
    },
    #[error("cannot differentiate {slot} in `{var}`: {source}")]
    Diff {
        slot: &'static str,
        var: &'static str,
        #[source]
        source: DiffError,
    },
    #[error("only scalar kernels are supported (value_dim = 1), got {0}")]
    ValueDim(usize),
    #[error("function has dimension {0}; operators act on scalar functions")]
    FunctionDim(usize),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    FuncSpace(#[from] FuncSpaceError),
}

type Derivative = Result<Option<Expr>, OperatorError>;

#[derive(Debug, Clone)]
pub struct OperatorSpec {
    kernels: KernelSpec,
    grid: Arc<Grid>,
    k0_u: Derivative,
    k1_v: Derivative,
    k2_u: Derivative,
    k2_v: Derivative,
}

fn derivative(slot: &'static str, e: Option<&Expr>, var: Var) -> Derivative {
    e.map(|e| {
        diff_expr(e, var).map_err(|source| OperatorError::Diff {
            slot,
            var: var.name(),
            source,
        })
    })
    .transpose()
}

impl OperatorSpec {
    pub fn new(kernels: KernelSpec, grid: Arc<Grid>, value_dim: usize) -> Result<Self, OperatorError> {
        if value_dim != 1 {
            return Err(OperatorError::ValueDim(value_dim));
        }
        kernels.validate()?;
        Ok(OperatorSpec {
            k0_u: derivative("k0", kernels.k0.as_ref(), Var::U),
            k1_v: derivative("k1", kernels.k1.as_ref(), Var::V),
            k2_u: derivative("k2", kernels.k2.as_ref(), Var::U),
            k2_v: derivative("k2", kernels.k2.as_ref(), Var::V),
            kernels,
            grid,
        })
    }

    pub fn kernels(&self) -> &KernelSpec {
        &self.kernels
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// The same kernels on another grid.
    pub fn with_grid(&self, grid: Arc<Grid>) -> Self {
        OperatorSpec { grid, ..self.clone() }
    }

    fn check(&self, x: &GridFunction) -> Result<(), OperatorError> {
        if !Grid::same(&self.grid, x.grid()) {
            return Err(GridError::GridMismatch.into());
        }
        if x.dim() != 1 {
            return Err(OperatorError::FunctionDim(x.dim()));
        }
        Ok(())
    }

    /// Quadrature value of `G(x1, x2)`.
    pub fn eval_g(&self, x1: &GridFunction, x2: &GridFunction) -> Result<GridFunction, OperatorError> {
        self.check(x1)?;
        self.check(x2)?;
        let (a, b) = (x1.values(), x2.values());
        let k = &self.kernels;
        let values = self.rows(|i, t, w, ts| {
            let mut out = 0.0;
            if let Some(k0) = &k.k0 {
                out += eval("k0", k0, &[t, 0.0, a[i], 0.0], i, i)?;
            }
            if let Some(k1) = &k.k1 {
                let mut s = 0.0;
                for j in 0..ts.len() {
                    s += w[j] * eval("k1", k1, &[t, ts[j], 0.0, b[j]], i, j)?;
                }
                out += s;
            }
            if let Some(k2) = &k.k2 {
                let mut s = 0.0;
                for j in 0..ts.len() {
                    s += w[j] * eval("k2", k2, &[t, ts[j], a[i], b[j]], i, j)?;
                }
                out += s;
            }
            Ok(out)
        })?;
        Ok(GridFunction::scalar(Arc::clone(&self.grid), values)?)
    }

    /// `F(x) = G(x, x)`.
    pub fn eval_f(&self, x: &GridFunction) -> Result<GridFunction, OperatorError> {
        self.eval_g(x, x)
    }

    /// `D2G(x1, x2)`: `M_ij = w_j (∂v k1(t_i, t_j, x2_j) + ∂v k2(t_i, t_j, x1_i, x2_j))`.
    pub fn d2g_matrix(&self, x1: &GridFunction, x2: &GridFunction) -> Result<LinearOp, OperatorError> {
        self.check(x1)?;
        self.check(x2)?;
        let matrix = self.kernel_part(x1.values(), x2.values())?;
        Ok(LinearOp {
            grid: Arc::clone(&self.grid),
            diag: vec![0.0; self.grid.len()],
            matrix,
        })
    }

    /// Directional derivative of `F` at `x0` as a [`LinearOp`]: the kernel part
    /// of [`d2g_matrix`](Self::d2g_matrix) at `(x0, x0)` plus the diagonal
    /// `∂u k0(t_i, x0_i) + Σ_j w_j ∂u k2(t_i, t_j, x0_i, x0_j)`.
    pub fn gateaux_f_matrix(&self, x0: &GridFunction) -> Result<LinearOp, OperatorError> {
        self.check(x0)?;
        let diag = self.diagonal_part(x0.values())?;
        let matrix = self.kernel_part(x0.values(), x0.values())?;
        Ok(LinearOp {
            grid: Arc::clone(&self.grid),
            matrix,
            diag,
        })
    }

    /// `D1G(x0, x0) = DF(x0) − D2G(x0, x0)`, the only candidate for the
    /// Fréchet derivative of `G(·, x0)` at `x0`. It is a multiplication operator.
    pub fn frechet_candidate_d1g(&self, x0: &GridFunction) -> Result<LinearOp, OperatorError> {
        let df = self.gateaux_f_matrix(x0)?;
        let d2 = self.d2g_matrix(x0, x0)?;
        Ok(df.sub(&d2))
    }

    /// `DF(x0) h` without assembling the matrix.
    pub fn gateaux_f_apply(&self, x0: &GridFunction, h: &GridFunction) -> Result<GridFunction, OperatorError> {
        self.check(x0)?;
        self.check(h)?;
        let diag = self.diagonal_part(x0.values())?;
        let mut values = self.kernel_apply(x0.values(), x0.values(), h.values())?;
        for ((v, d), hi) in values.iter_mut().zip(&diag).zip(h.values()) {
            *v += d * hi;
        }
        Ok(GridFunction::scalar(Arc::clone(&self.grid), values)?)
    }

    /// `D2G(x1, x2) h` without assembling the matrix.
    pub fn d2g_apply(&self, x1: &GridFunction, x2: &GridFunction, h: &GridFunction) -> Result<GridFunction, OperatorError> {
        self.check(x1)?;
        self.check(x2)?;
        self.check(h)?;
        let values = self.kernel_apply(x1.values(), x2.values(), h.values())?;
        Ok(GridFunction::scalar(Arc::clone(&self.grid), values)?)
    }

    fn kernel_apply(&self, a: &[f64], b: &[f64], h: &[f64]) -> Result<Vec<f64>, OperatorError> {
        let k1_v = self.k1_v.clone()?;
        let k2_v = self.k2_v.clone()?;
        self.rows(|i, t, w, ts| {
            let mut s = 0.0;
            for j in 0..ts.len() {
                let mut d = 0.0;
                if let Some(e) = &k1_v {
                    d += eval("∂v k1", e, &[t, ts[j], 0.0, b[j]], i, j)?;
                }
                if let Some(e) = &k2_v {
                    d += eval("∂v k2", e, &[t, ts[j], a[i], b[j]], i, j)?;
                }
                s += w[j] * d * h[j];
            }
            Ok(s)
        })
    }

    fn kernel_part(&self, a: &[f64], b: &[f64]) -> Result<Vec<f64>, OperatorError> {
        let k1_v = self.k1_v.clone()?;
        let k2_v = self.k2_v.clone()?;
        let n = self.grid.len();
        let rows: Vec<Result<Vec<f64>, OperatorError>> = self.par_rows(|i, t, w, ts| {
            let mut row = vec![0.0; n];
            for j in 0..n {
                let mut d = 0.0;
                if let Some(e) = &k1_v {
                    d += eval("∂v k1", e, &[t, ts[j], 0.0, b[j]], i, j)?;
                }
                if let Some(e) = &k2_v {
                    d += eval("∂v k2", e, &[t, ts[j], a[i], b[j]], i, j)?;
                }
                row[j] = w[j] * d;
            }
            Ok(row)
        });
        let mut matrix = Vec::with_capacity(n * n);
        for r in rows {
            matrix.extend(r?);
        }
        Ok(matrix)
    }

    fn diagonal_part(&self, x: &[f64]) -> Result<Vec<f64>, OperatorError> {
        let k0_u = self.k0_u.clone()?;
        let k2_u = self.k2_u.clone()?;
        self.rows(|i, t, w, ts| {
            let mut d = 0.0;
            if let Some(e) = &k0_u {
                d += eval("∂u k0", e, &[t, 0.0, x[i], 0.0], i, i)?;
            }
            if let Some(e) = &k2_u {
                let mut s = 0.0;
                for j in 0..ts.len() {
                    s += w[j] * eval("∂u k2", e, &[t, ts[j], x[i], x[j]], i, j)?;
                }
                d += s;
            }
            Ok(d)
        })
    }

    fn par_rows<R: Send>(
        &self,
        f: impl Fn(usize, f64, &[f64], &[f64]) -> Result<R, OperatorError> + Sync,
    ) -> Vec<Result<R, OperatorError>> {
        let w: Vec<f64> = self.grid.weights().collect();
        let ts: Vec<f64> = self.grid.representatives().collect();
        (0..ts.len())
            .into_par_iter()
            .map(|i| f(i, ts[i], &w, &ts))
            .collect()
    }

    /// One value per output cell; the first failing row (lowest index) wins.
    fn rows(
        &self,
        f: impl Fn(usize, f64, &[f64], &[f64]) -> Result<f64, OperatorError> + Sync,
    ) -> Result<Vec<f64>, OperatorError> {
        self.par_rows(f).into_iter().collect()
    }
}

fn eval(slot: &'static str, e: &Expr, slots: &[f64; 4], i: usize, j: usize) -> Result<f64, OperatorError> {
    let r = e
        .eval_slots(slots)
        .map_err(|source| OperatorError::Eval { slot, i, j, source })?;
    if r.is_finite() {
        Ok(r)
    } else {
        Err(OperatorError::Eval {
            slot,
            i,
            j,
            source: EvalError::NotANumber,
        })
    }
}

/// `(L h)_i = diag_i h_i + Σ_j M_ij h_j` on scalar grid functions.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOp {
    grid: Arc<Grid>,
    matrix: Vec<f64>,
    diag: Vec<f64>,
}

impl LinearOp {
    pub fn new(grid: Arc<Grid>, matrix: Vec<f64>, diag: Vec<f64>) -> Result<Self, OperatorError> {
        let n = grid.len();
        if matrix.len() != n * n || diag.len() != n {
            return Err(FuncSpaceError::Length {
                expected: n * n + n,
                got: matrix.len() + diag.len(),
            }
            .into());
        }
        if let Some(k) = matrix.iter().chain(&diag).position(|v| !v.is_finite()) {
            return Err(FuncSpaceError::NonFinite { cell: (k % (n * n)) / n.max(1) }.into());
        }
        Ok(LinearOp { grid, matrix, diag })
    }

    pub fn zero(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        LinearOp {
            grid,
            matrix: vec![0.0; n * n],
            diag: vec![0.0; n],
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    /// Row-major `n × n` kernel part.
    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Entry of the combined matrix `M + diag`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let m = self.matrix[i * self.size() + j];
        if i == j {
            m + self.diag[i]
        } else {
            m
        }
    }

    /// Combined matrix `M + diag`, row-major.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.size();
        let mut out = self.matrix.clone();
        for i in 0..n {
            out[i * n + i] += self.diag[i];
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().chain(&self.diag).all(|&v| v == 0.0)
    }

    /// True when the kernel part vanishes identically.
    pub fn is_multiplication(&self) -> bool {
        self.matrix.iter().all(|&v| v == 0.0)
    }

    pub fn apply(&self, h: &GridFunction) -> Result<GridFunction, OperatorError> {
        if !Grid::same(&self.grid, h.grid()) {
            return Err(GridError::GridMismatch.into());
        }
        if h.dim() != 1 {
            return Err(OperatorError::FunctionDim(h.dim()));
        }
        let n = self.size();
        let hv = h.values();
        let values: Vec<f64> = self
            .matrix
            .par_chunks(n.max(1))
            .zip(self.diag.par_iter())
            .enumerate()
            .map(|(i, (row, d))| {
                let mut s = 0.0;
                for (m, x) in row.iter().zip(hv) {
                    s += m * x;
                }
                d * hv[i] + s
            })
            .collect();
        Ok(GridFunction::scalar(Arc::clone(&self.grid), values)?)
    }

    /// `self − other` (both parts entrywise).
    pub fn sub(&self, other: &LinearOp) -> LinearOp {
        LinearOp {
            grid: Arc::clone(&self.grid),
            matrix: self.matrix.iter().zip(&other.matrix).map(|(a, b)| a - b).collect(),
            diag: self.diag.iter().zip(&other.diag).map(|(a, b)| a - b).collect(),
        }
    }
}

pub fn eval_g(spec: &OperatorSpec, x1: &GridFunction, x2: &GridFunction) -> Result<GridFunction, OperatorError> {
    spec.eval_g(x1, x2)
}

pub fn d2g_matrix(spec: &OperatorSpec, x1: &GridFunction, x2: &GridFunction) -> Result<LinearOp, OperatorError> {
    spec.d2g_matrix(x1, x2)
}

pub fn gateaux_f_matrix(spec: &OperatorSpec, x0: &GridFunction) -> Result<LinearOp, OperatorError> {
    spec.gateaux_f_matrix(x0)
}

pub fn frechet_candidate_d1g(spec: &OperatorSpec, x0: &GridFunction) -> Result<LinearOp, OperatorError> {
    spec.frechet_candidate_d1g(x0)
}
