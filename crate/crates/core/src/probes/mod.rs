//! Degeneracy probes: numerical experiments that build the witness
//! configurations (shrinking characteristic perturbations, mixture sets,
//! packings) and measure the quantity each statement constrains.
//!
//! On a grid every bounded set is precompact, so measures of noncompactness
//! are reported as budgeted bounds: `lower(k)` and `upper(k)` bracket the
//! best covering radius with `k` centers of the *sampled* set. Degeneracy
//! shows up as lower bounds that stay put under grid refinement.

mod darbo;
mod frechet;
mod lipschitz;
mod mnc;
mod report;
mod sampler;

use thiserror::Error;

use crate::funcspace::{FuncSpaceError, GridFunction, NormSpec};
use crate::grid::{Grid, GridError};
use crate::operators::{OperatorError, OperatorSpec};

pub use darbo::{
    compactness_probe, darbo_growth_probe, local_mnc_ratio, Compactness, DarboGrowth, DarboParams, LocalMncRatio,
    RadiusEstimate,
};
pub use frechet::{frechet_residual_probe, FrechetResidual};
pub use lipschitz::{
    lipschitz_local_estimate, lipschitz_pointwise_check, lipschitz_transfer_check, LipschitzParams, PointwiseExcess,
    TransferCheck,
};
pub use mnc::{mixture_set, mnc_estimate, MixtureMode, MncEstimate};
pub use report::{CurvePoint, ProbeReport, Verdict};
pub use sampler::{ball_directions, ball_samples};

/// Default floor for Monte Carlo verdicts.
pub const DEFAULT_FLOOR: f64 = 1e-3;
/// Default tolerance for exact identities.
pub const EXACT_TOLERANCE: f64 = 1e-9;
/// Largest cell count for which mixtures are enumerated.
pub const MAX_ENUMERATION_CELLS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbeError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    FuncSpace(#[from] FuncSpaceError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },
    #[error("point set is empty")]
    EmptyPointSet,
    #[error("points live on different grids or have different dimensions")]
    MixedPoints,
    #[error("enumeration over {cells} cells is too large (limit {MAX_ENUMERATION_CELLS})")]
    EnumerationTooLarge { cells: usize },
}

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> ProbeError {
    ProbeError::Parameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn positive(name: &'static str, v: f64) -> Result<(), ProbeError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(param(name, format!("must be positive and finite, got {v}")))
    }
}

/// Operator, base point and the norms on its domain and target.
#[derive(Debug, Clone)]
pub struct ProbeSetup {
    pub op: OperatorSpec,
    pub x0: GridFunction,
    pub ns_x: NormSpec,
    pub ns_y: NormSpec,
}

impl ProbeSetup {
    pub fn new(op: OperatorSpec, x0: GridFunction, ns_x: NormSpec, ns_y: NormSpec) -> Result<Self, ProbeError> {
        if !Grid::same(op.grid(), x0.grid()) {
            return Err(GridError::GridMismatch.into());
        }
        if x0.dim() != 1 {
            return Err(OperatorError::FunctionDim(x0.dim()).into());
        }
        Ok(ProbeSetup { op, x0, ns_x, ns_y })
    }

    pub fn grid(&self) -> &std::sync::Arc<Grid> {
        self.op.grid()
    }
}
