use std::path::PathBuf;
use std::sync::Arc;

use degenkit_core::funcspace::{Exponent, YoungSpec};
use degenkit_core::kernel_lang::parse_expr;
use degenkit_core::{
    Grid, GridFunction, KernelSpec, NormSpec, OperatorSpec, ProbeSetup, SubsetMask, VarSet, YoungFunction,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

/// A full run description. Reports embed the effective copy, so a report file
/// is itself a valid config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    #[serde(default)]
    pub space: SpaceConfig,
    pub kernels: KernelConfig,
    #[serde(default)]
    pub x0: FunctionConfig,
    pub probe: ProbeConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "OutputConfig::is_empty")]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Uniform cells before refinement.
    pub n: usize,
    #[serde(default)]
    pub refinements: usize,
    #[serde(default = "one")]
    pub total: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    #[serde(default)]
    pub norm_x: NormConfig,
    #[serde(default)]
    pub norm_y: NormConfig,
}

/// `{"lp": 2}`, `{"lp": "inf"}`, `{"orlicz": "(1 + t) * u^2"}` or
/// `{"variable_exponent": "2 + t"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NormConfig {
    Lp(PValue),
    Orlicz(String),
    VariableExponent(String),
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig::Lp(PValue::Number(2.0))
    }
}

/// An exponent written as a JSON number or the string `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PValue {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k2: Option<String>,
}

/// A scalar function on the grid: `{"constant": 0.5}`,
/// `{"step": {"lo": 0, "hi": 0.5, "value": 1}}` or `{"expr": "sin(t)"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionConfig {
    Constant(f64),
    Step {
        lo: f64,
        hi: f64,
        value: f64,
        #[serde(default)]
        base: f64,
    },
    Expr(String),
}

impl Default for FunctionConfig {
    fn default() -> Self {
        FunctionConfig::Constant(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub name: String,
    #[serde(default = "empty_object")]
    pub params: Value,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

impl OutputConfig {
    fn is_empty(&self) -> bool {
        self.report.is_none() && self.csv.is_none()
    }
}

fn config_err(location: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{location}: {e}"))
}

impl RunConfig {
    /// Parses a config file's text. A report written by `run` is accepted too;
    /// its embedded `config` object is used.
    pub fn from_json(text: &str, origin: &str) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text).map_err(|e| config_err(origin, e))?;
        match value {
            Value::Object(mut m) if m.contains_key("config") && !m.contains_key("grid") => {
                serde_json::from_value(m.remove("config").unwrap()).map_err(|e| config_err(&format!("{origin}: config"), e))
            }
            _ => serde_json::from_str(text).map_err(|e| config_err(origin, e)),
        }
    }

    /// Hex SHA-256 of the canonical JSON encoding, output paths excluded.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.output = OutputConfig::default();
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn build_grid(&self) -> Result<Arc<Grid>, CliError> {
        let g = &self.grid;
        let base = Grid::uniform(g.n, g.total).map_err(|e| config_err("grid", e))?;
        Ok(Arc::new(base).refine_times(g.refinements))
    }

    pub fn build_setup(&self) -> Result<ProbeSetup, CliError> {
        let grid = self.build_grid()?;
        let k = &self.kernels;
        let kernels = KernelSpec::parse(k.k0.as_deref(), k.k1.as_deref(), k.k2.as_deref())
            .map_err(|e| config_err("kernels", e))?;
        let op = OperatorSpec::new(kernels, Arc::clone(&grid), 1).map_err(|e| config_err("kernels", e))?;
        let x0 = self.x0.build(&grid, "x0")?;
        let total = self.grid.total;
        let ns_x = self.space.norm_x.build(total, "space.norm_x")?;
        let ns_y = self.space.norm_y.build(total, "space.norm_y")?;
        ProbeSetup::new(op, x0, ns_x, ns_y).map_err(|e| config_err("x0", e))
    }
}

impl NormConfig {
    pub fn build(&self, total: f64, location: &str) -> Result<NormSpec, CliError> {
        let young = |spec| YoungFunction::new_on(spec, 0.0, total).map_err(|e| config_err(location, e));
        match self {
            NormConfig::Lp(PValue::Number(p)) => NormSpec::lp(*p).map_err(|e| config_err(location, e)),
            NormConfig::Lp(PValue::Text(s)) if s == "inf" => Ok(NormSpec::Lp(f64::INFINITY)),
            NormConfig::Lp(PValue::Text(s)) => Err(config_err(location, format!("exponent `{s}` is neither a number nor \"inf\""))),
            NormConfig::Orlicz(text) => {
                let e = parse_expr(text, VarSet::YOUNG).map_err(|e| config_err(location, e))?;
                Ok(NormSpec::orlicz(young(YoungSpec::Expr(e))?))
            }
            NormConfig::VariableExponent(text) => {
                let e = parse_expr(text, VarSet::T_ONLY).map_err(|e| config_err(location, e))?;
                Ok(NormSpec::orlicz(young(YoungSpec::VariableExponent(Exponent::Expr(e)))?))
            }
        }
    }
}

impl FunctionConfig {
    pub fn build(&self, grid: &Arc<Grid>, location: &str) -> Result<GridFunction, CliError> {
        let g = Arc::clone(grid);
        let out = match self {
            FunctionConfig::Constant(c) => GridFunction::constant(g, *c),
            FunctionConfig::Step { lo, hi, value, base } => {
                let mask = SubsetMask::interval(Arc::clone(grid), *lo, *hi);
                GridFunction::from_fn(g, |_| *base).and_then(|b| b.add(&GridFunction::indicator(&mask, value - base)?))
            }
            FunctionConfig::Expr(text) => {
                let e = parse_expr(text, VarSet::T_ONLY).map_err(|e| config_err(location, e))?;
                let values = grid
                    .representatives()
                    .map(|t| e.eval_slots(&[t, 0.0, 0.0, 0.0]))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|err| config_err(location, err))?;
                GridFunction::scalar(g, values)
            }
        };
        out.map_err(|e| config_err(location, e))
    }
}
