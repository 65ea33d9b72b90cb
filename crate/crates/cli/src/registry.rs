use degenkit_core::probes::{
    compactness_probe, darbo_growth_probe, frechet_residual_probe, lipschitz_local_estimate,
    lipschitz_pointwise_check, lipschitz_transfer_check, local_mnc_ratio, mixture_set, mnc_estimate, CurvePoint,
    DarboParams, LipschitzParams, MixtureMode, DEFAULT_FLOOR, EXACT_TOLERANCE,
};
use degenkit_core::{ProbeError, ProbeReport, ProbeSetup, Verdict};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::FunctionConfig;
use crate::CliError;

type Runner = fn(&Value, &ProbeSetup, u64) -> Result<(ProbeReport, Value), CliError>;

pub struct ProbeInfo {
    pub name: &'static str,
    /// The property the probe tests, in a few words.
    pub anchor: &'static str,
    pub required: &'static [&'static str],
    run: Runner,
}

pub const PROBES: &[ProbeInfo] = &[
    ProbeInfo {
        name: "frechet_residual",
        anchor: "Frechet non-differentiability along shrinking supports",
        required: &["amplitude", "levels"],
        run: run_frechet,
    },
    ProbeInfo {
        name: "lipschitz_local",
        anchor: "local Lipschitz constant of F on a ball",
        required: &["r"],
        run: run_lipschitz_local,
    },
    ProbeInfo {
        name: "lipschitz_pointwise",
        anchor: "pointwise Lipschitz bound of G in its first argument",
        required: &["y1", "y2", "l1"],
        run: run_pointwise,
    },
    ProbeInfo {
        name: "lipschitz_transfer",
        anchor: "local (tau, ell) transfer condition",
        required: &["tau", "ell", "r"],
        run: run_transfer,
    },
    ProbeInfo {
        name: "local_mnc_ratio",
        anchor: "noncompactness ratio of F on shrinking balls",
        required: &["radii"],
        run: run_local_mnc,
    },
    ProbeInfo {
        name: "darbo_growth",
        anchor: "Darbo-type growth bound for the first argument of G",
        required: &["radii"],
        run: run_darbo,
    },
    ProbeInfo {
        name: "compactness",
        anchor: "non-compact image next to a compact linear part",
        required: &[],
        run: run_compactness,
    },
    ProbeInfo {
        name: "mixture_mnc",
        anchor: "(alpha, c)-nondegeneracy on mixtures of two functions",
        required: &["y1", "y2"],
        run: run_mixture,
    },
];

pub fn lookup(name: &str) -> Result<&'static ProbeInfo, CliError> {
    PROBES.iter().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<&str> = PROBES.iter().map(|p| p.name).collect();
        CliError::Config(format!("probe.name: unknown probe `{name}`; available: {}", names.join(", ")))
    })
}

impl ProbeInfo {
    /// Runs the probe and returns its report with the parameters as used,
    /// defaults included.
    pub fn run(&self, params: &Value, setup: &ProbeSetup, seed: u64) -> Result<(ProbeReport, Value), CliError> {
        let (report, used) = (self.run)(params, setup, seed)?;
        Ok((report.with_seed(seed), used))
    }
}

fn parse<T: DeserializeOwned + Serialize>(params: &Value) -> Result<(T, Value), CliError> {
    let p: T = serde_json::from_value(params.clone()).map_err(|e| CliError::Config(format!("probe.params: {e}")))?;
    let used = serde_json::to_value(&p).expect("params serialize");
    Ok((p, used))
}

fn probe_err(name: &str, e: ProbeError) -> CliError {
    match e {
        ProbeError::Parameter { .. } | ProbeError::EnumerationTooLarge { .. } => {
            CliError::Config(format!("probe.params: {e}"))
        }
        _ => CliError::Numeric(format!("probe {name}: {e}")),
    }
}

fn floor() -> f64 {
    DEFAULT_FLOOR
}

fn exact() -> f64 {
    EXACT_TOLERANCE
}

fn unit() -> f64 {
    1.0
}

fn trials() -> usize {
    1000
}

fn mc_trials() -> usize {
    256
}

fn k_budget() -> usize {
    8
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Frechet {
    amplitude: f64,
    levels: usize,
    #[serde(default = "floor")]
    floor: f64,
}

fn run_frechet(params: &Value, setup: &ProbeSetup, _seed: u64) -> Result<(ProbeReport, Value), CliError> {
    let (p, used) = parse::<Frechet>(params)?;
    let out = frechet_residual_probe(setup, p.amplitude, p.levels, p.floor).map_err(|e| probe_err("frechet_residual", e))?;
    Ok((out.report(), used))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LipschitzLocal {
    r: f64,
    #[serde(default = "trials")]
    trials: usize,
    /// Optional claimed constant; without it the verdict is `NO_WITNESS_FOUND`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bound: Option<f64>,
}

fn run_lipschitz_local(params: &Value, setup: &ProbeSetup, seed: u64) -> Result<(ProbeReport, Value), CliError> {
    let (p, used) = parse::<LipschitzLocal>(params)?;
    let l = lipschitz_local_estimate(setup, p.r, p.trials, seed).map_err(|e| probe_err("lipschitz_local", e))?;
    let verdict = match p.bound {
        None => Verdict::NoWitnessFound,
        Some(b) if l <= b => Verdict::BoundSatisfied,
        Some(_) => Verdict::BoundViolated,
    };
    let mut report = ProbeReport::new("lipschitz_local", verdict)
        .with_curve(vec![CurvePoint::new(p.r, l)])
        .bound("l_hat", l);
    if let Some(b) = p.bound {
        report = report.bound("claimed", b);
    }
    Ok((report, used))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Pointwise {
    y1: FunctionConfig,
    y2: FunctionConfig,
    l1: f64,
    #[serde(default)]
    tolerance: f64,
}

fn run_pointwise(params: &Value, setup: &ProbeSetup, _seed: u64) -> Result<(ProbeReport, Value), CliError> {
    let (p, used) = parse::<Pointwise>(params)?;
    let y1 = p.y1.build(setup.grid(), "probe.params.y1")?;
    let y2 = p.y2.build(setup.grid(), "probe.params.y2")?;
    let e = lipschitz_pointwise_check(&setup.op, &y1, &y2, &setup.x0, p.l1)
        .map_err(|e| probe_err("lipschitz_pointwise", e))?;
    let verdict = if e.max_excess <= p.tolerance {
        Verdict::BoundSatisfied
    } else {
        Verdict::BoundViolated
    };
    let report = ProbeReport::new("lipschitz_pointwise", verdict)
        .with_curve(vec![CurvePoint::new(e.cell as f64, e.max_excess)])
        .bound("max_excess", e.max_excess)
        .bound("cell", e.cell as f64)
        .bound("l1", p.l1);
    Ok((report, used))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Transfer {
    tau: f64,
    ell: f64,
    #[serde(default)]
    l: f64,
    #[serde(default)]
    l2: f64,
    r: f64,
    #[serde(default = "trials")]
    trials: usize,
    #[serde(default = "exact")]
    tolerance: f64,
}

fn run_transfer(params: &Value, setup: &ProbeSetup, seed: u64) -> Result<(ProbeReport, Value), CliError> {
    let (p, used) = parse::<Transfer>(params)?;
    let err = |e| probe_err("lipschitz_transfer", e);
    let lp = LipschitzParams::derived(p.tau, p.ell, p.l, p.l2).map_err(err)?;
    let out = lipschitz_transfer_check(setup, &lp, p.r, p.trials, seed, p.tolerance).map_err(err)?;
    Ok((out.report(&lp), used))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LocalMnc {
    radii: Vec<f64>,
    #[serde(default = "mc_trials")]
    samples: usize,
    #[serde(default = "k_budget")]
    k_budget: usize,
}

fn run_local_mnc(params: &Value, setup: &ProbeSetup, seed: u64) -> Result<(ProbeReport, Value), CliError> {
    let (p, used) = parse::<LocalMnc>(params)?;
    let out = local_mnc_ratio(setup, &p.radii, p.samples, p.k_budget, seed).map_err(|e| probe_err("local_mnc_ratio", e))?;
    Ok((out.report(), used))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Darbo {
    radii: Vec<f64>,
    #[serde(default = "mc_trials")]
    trials: usize,
    #[serde(default = "k_budget")]
    k_budget: usize,
    #[serde(default = "unit")]
    c: f64,
    #[serde(default = "floor")]
    tolerance: f64,
}

fn run_darbo(params: &Value, setup: &ProbeSetup, seed: u64) -> Result<(ProbeReport, Value), CliError> {
    let (p, used) = parse::<Darbo>(params)?;
    let dp = DarboParams {
        radii: p.radii,
        trials: p.trials,
        k_budget: p.k_budget,
        c: p.c,
        tolerance: p.tolerance,
        seed,
    };
    let out = darbo_growth_probe(setup, &dp).map_err(|e| probe_err("darbo_growth", e))?;
    Ok((out.report(), used))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompactnessParams {
    #[serde(default = "unit")]
    r: f64,
    #[serde(default = "trials")]
    trials: usize,
    #[serde(default = "compact_budget")]
    k_budget: usize,
    #[serde(default = "floor")]
    tolerance: f64,
}

fn compact_budget() -> usize {
    32
}

fn run_compactness(params: &Value, setup: &ProbeSetup, seed: u64) -> Result<(ProbeReport, Value), CliError> {
    let (p, used) = parse::<CompactnessParams>(params)?;
    let out = compactness_probe(setup, p.r, p.trials, p.k_budget, seed, p.tolerance)
        .map_err(|e| probe_err("compactness", e))?;
    Ok((out.report(p.k_budget), used))
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum Mode {
    Enumerate,
    Sample { count: usize },
}

fn enumerate() -> Mode {
    Mode::Enumerate
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Mixture {
    y1: FunctionConfig,
    y2: FunctionConfig,
    #[serde(default = "enumerate")]
    mode: Mode,
    #[serde(default = "k_budget")]
    k_max: usize,
    #[serde(default = "unit")]
    c: f64,
    #[serde(default = "exact")]
    tolerance: f64,
}

/// MNC bounds of the mixture set of `y1` and `y2` in `norm_y`, compared with
/// the nondegeneracy bound `‖y1 − y2‖/(2c)`. The verdict is `BOUND_SATISFIED`
/// when no budgeted net covers the set more cheaply than the bound.
fn run_mixture(params: &Value, setup: &ProbeSetup, seed: u64) -> Result<(ProbeReport, Value), CliError> {
    let (p, used) = parse::<Mixture>(params)?;
    if !(p.c >= 1.0) || !p.c.is_finite() {
        return Err(CliError::Config(format!("probe.params.c: must be at least 1, got {}", p.c)));
    }
    let err = |e| probe_err("mixture_mnc", e);
    let y1 = p.y1.build(setup.grid(), "probe.params.y1")?;
    let y2 = p.y2.build(setup.grid(), "probe.params.y2")?;
    let mode = match p.mode {
        Mode::Enumerate => MixtureMode::Enumerate,
        Mode::Sample { count } => MixtureMode::Sample { count, seed },
    };
    let set = mixture_set(&y1, &y2, mode).map_err(err)?;
    let est = mnc_estimate(&set, &setup.ns_y, p.k_max).map_err(err)?;
    let bound = setup.ns_y.distance(&y1, &y2).map_err(|e| err(e.into()))? / (2.0 * p.c);
    let cheapest = est.upper.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    let verdict = if cheapest >= bound - p.tolerance {
        Verdict::BoundSatisfied
    } else {
        Verdict::BoundViolated
    };
    let curve = est
        .upper
        .iter()
        .zip(&est.lower)
        .map(|(&(k, u), &(_, l))| CurvePoint::mnc(k as f64, l, k, u, l))
        .collect();
    let report = ProbeReport::new("mixture_mnc", verdict)
        .with_curve(curve)
        .bound("bound", bound)
        .bound("min_upper", if cheapest.is_finite() { cheapest } else { 0.0 })
        .bound("points", set.len() as f64);
    Ok((report, used))
}
