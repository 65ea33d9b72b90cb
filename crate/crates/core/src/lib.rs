//! Fully nonlinear integral operators on discretized measure spaces.
//!
//! A [`Grid`] partitions a finite measure space into cells, functions are
//! cellwise constant ([`GridFunction`]), integrals are midpoint sums, and
//! operators are built from kernel expressions ([`KernelSpec`]). The
//! [`probes`] module runs numerical experiments that look for the failure of
//! differentiability, Lipschitz transfer and compactness.

pub mod funcspace;
pub mod grid;
pub mod kernel_lang;
pub mod operators;
pub mod probes;

pub use funcspace::{FuncSpaceError, GridFunction, NormSpec, YoungFunction};
pub use grid::{Cell, Grid, GridError, Refinement, SubsetMask};
pub use kernel_lang::{Expr, KernelSpec, KernelSpecError, ParseError, VarSet};
pub use operators::{LinearOp, OperatorError, OperatorSpec};
pub use probes::{ProbeError, ProbeReport, ProbeSetup, Verdict};
