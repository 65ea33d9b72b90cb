use std::fmt;

use crate::grid::Grid;
use crate::kernel_lang::{parse_expr, EvalError, Expr, Var, VarSet};

use super::{FuncSpaceError, GridFunction};

const SAMPLE: usize = 32;
const BISECTION_STEPS: usize = 60;

/// Exponent function `p(t)` of a variable-exponent Young function.
#[derive(Debug, Clone, PartialEq)]
pub enum Exponent {
    /// Expression in `t`; may evaluate to `inf`.
    Expr(Expr),
    /// Piecewise constant: `values[k]` on `(breaks[k-1], breaks[k]]`.
    Steps { breaks: Vec<f64>, values: Vec<f64> },
}

impl Exponent {
    pub fn constant(p: f64) -> Exponent {
        Exponent::Steps {
            breaks: vec![],
            values: vec![p],
        }
    }

    pub fn at(&self, t: f64) -> Result<f64, EvalError> {
        match self {
            Exponent::Expr(e) => e.eval_slots(&[t, 0.0, 0.0, 0.0]),
            Exponent::Steps { breaks, values } => {
                let k = breaks.iter().take_while(|&&b| t > b).count();
                Ok(values[k])
            }
        }
    }

    fn is_constant(&self) -> bool {
        match self {
            Exponent::Expr(e) => !e.depends_on(Var::T),
            Exponent::Steps { values, .. } => values.windows(2).all(|w| w[0] == w[1]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum YoungSpec {
    /// `Φ(t, u)` written in the kernel language over `(t, u)`.
    Expr(Expr),
    /// `Φ(t, u) = u^{p(t)}`, with `Φ(t, u) = 0` for `u ≤ 1` and `+∞` otherwise when `p(t) = ∞`.
    VariableExponent(Exponent),
}

/// A generalized Young function, checked on a `32 × 32` sample at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct YoungFunction {
    spec: YoungSpec,
}

impl YoungFunction {
    /// Validates on `t ∈ [0, 1]`.
    pub fn new(spec: YoungSpec) -> Result<Self, FuncSpaceError> {
        Self::new_on(spec, 0.0, 1.0)
    }

    /// Validates on `t ∈ [lo, hi]`.
    pub fn new_on(spec: YoungSpec, lo: f64, hi: f64) -> Result<Self, FuncSpaceError> {
        if let YoungSpec::Expr(e) = &spec {
            for v in [Var::S, Var::V] {
                if e.depends_on(v) {
                    return Err(FuncSpaceError::Young(format!("uses `{}`; only t and u are allowed", v.name())));
                }
            }
        }
        if let YoungSpec::VariableExponent(Exponent::Steps { breaks, values }) = &spec {
            if values.len() != breaks.len() + 1 {
                return Err(FuncSpaceError::Young(format!(
                    "{} breaks need {} values, got {}",
                    breaks.len(),
                    breaks.len() + 1,
                    values.len()
                )));
            }
            if breaks.windows(2).any(|w| w[0] >= w[1]) || breaks.iter().any(|b| !b.is_finite()) {
                return Err(FuncSpaceError::Young("breaks must be finite and increasing".into()));
            }
        }
        let f = YoungFunction { spec };
        f.validate(lo, hi)?;
        Ok(f)
    }

    /// Parse `Φ(t, u)` and validate on `t ∈ [0, 1]`.
    pub fn parse(text: &str) -> Result<Self, FuncSpaceError> {
        Self::new(YoungSpec::Expr(parse_expr(text, VarSet::YOUNG)?))
    }

    /// `u^p` with constant `p`.
    pub fn power(p: f64) -> Result<Self, FuncSpaceError> {
        Self::new(YoungSpec::VariableExponent(Exponent::constant(p)))
    }

    pub fn spec(&self) -> &YoungSpec {
        &self.spec
    }

    pub fn is_t_independent(&self) -> bool {
        match &self.spec {
            YoungSpec::Expr(e) => !e.depends_on(Var::T),
            YoungSpec::VariableExponent(p) => p.is_constant(),
        }
    }

    /// `Φ(t, u)` for `u ≥ 0`.
    pub fn phi(&self, t: f64, u: f64) -> Result<f64, FuncSpaceError> {
        let wrap = |source| FuncSpaceError::YoungEval { t, u, source };
        match &self.spec {
            YoungSpec::Expr(e) => {
                let r = e.eval_slots(&[t, 0.0, u, 0.0]).map_err(wrap)?;
                if r < 0.0 {
                    return Err(FuncSpaceError::Young(format!("Φ({t}, {u}) = {r} is negative")));
                }
                Ok(r)
            }
            YoungSpec::VariableExponent(p) => {
                let p = p.at(t).map_err(wrap)?;
                if !(p >= 1.0) {
                    return Err(FuncSpaceError::BadExponent(p));
                }
                Ok(if p == f64::INFINITY {
                    if u <= 1.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    u.powf(p)
                })
            }
        }
    }

    fn validate(&self, lo: f64, hi: f64) -> Result<(), FuncSpaceError> {
        let bad = |msg: String| Err(FuncSpaceError::Young(msg));
        let ladder = u_ladder();
        for i in 0..SAMPLE {
            let t = lo + (i as f64 + 0.5) * (hi - lo) / SAMPLE as f64;
            let vals = ladder
                .iter()
                .map(|&u| self.phi(t, u))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| FuncSpaceError::Young(e.to_string()))?;
            if vals[0] != 0.0 {
                return bad(format!("Φ({t}, 0) = {} instead of 0", vals[0]));
            }
            if vals.iter().all(|&v| v == 0.0) {
                return bad(format!("Φ({t}, ·) vanishes on the whole sample"));
            }
            for j in 1..SAMPLE {
                let (a, b) = (vals[j - 1], vals[j]);
                if b < a * (1.0 - 1e-12) {
                    return bad(format!("Φ({t}, ·) decreases between u = {} and u = {}", ladder[j - 1], ladder[j]));
                }
                let mid_u = 0.5 * (ladder[j - 1] + ladder[j]);
                let mid = self.phi(t, mid_u).map_err(|e| FuncSpaceError::Young(e.to_string()))?;
                let chord = 0.5 * (a + b);
                if mid > chord * (1.0 + 1e-9) + 1e-300 {
                    return bad(format!("Φ({t}, ·) is not convex near u = {mid_u}"));
                }
            }
        }
        Ok(())
    }
}

/// `u = 0` followed by a geometric ladder from `2^-7.5` to `2^7.5`.
fn u_ladder() -> Vec<f64> {
    std::iter::once(0.0)
        .chain((1..SAMPLE).map(|j| 2f64.powf((j as f64 - 16.0) / 2.0)))
        .collect()
}

impl fmt::Display for YoungFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.spec {
            YoungSpec::Expr(e) => write!(f, "{e}"),
            YoungSpec::VariableExponent(Exponent::Expr(p)) => write!(f, "u^p(t), p(t) = {p}"),
            YoungSpec::VariableExponent(Exponent::Steps { breaks, values }) => {
                write!(f, "u^p(t), p steps {values:?} at {breaks:?}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NormSpec {
    Lp(f64),
    Orlicz(YoungFunction),
}

impl NormSpec {
    pub fn lp(p: f64) -> Result<Self, FuncSpaceError> {
        if !(p >= 1.0) {
            return Err(FuncSpaceError::BadExponent(p));
        }
        Ok(NormSpec::Lp(p))
    }

    pub fn orlicz(phi: YoungFunction) -> Self {
        NormSpec::Orlicz(phi)
    }

    pub fn norm(&self, x: &GridFunction) -> Result<f64, FuncSpaceError> {
        self.norm_of_magnitudes(x.grid(), &x.magnitudes())
    }

    /// `‖x − y‖`
    pub fn distance(&self, x: &GridFunction, y: &GridFunction) -> Result<f64, FuncSpaceError> {
        x.check_compatible(y)?;
        let d = x.dim();
        let mags: Vec<f64> = x
            .values()
            .chunks_exact(d)
            .zip(y.values().chunks_exact(d))
            .map(|(a, b)| {
                if d == 1 {
                    (a[0] - b[0]).abs()
                } else {
                    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
                }
            })
            .collect();
        self.norm_of_magnitudes(x.grid(), &mags)
    }

    /// Norm of the scalar function with cell values `mags` (all `≥ 0`).
    pub fn norm_of_magnitudes(&self, grid: &Grid, mags: &[f64]) -> Result<f64, FuncSpaceError> {
        if mags.len() != grid.len() {
            return Err(FuncSpaceError::Length {
                expected: grid.len(),
                got: mags.len(),
            });
        }
        if let Some(cell) = mags.iter().position(|m| !m.is_finite()) {
            return Err(FuncSpaceError::NonFinite { cell });
        }
        match self {
            NormSpec::Lp(p) => Ok(lp_norm(grid, mags, *p)),
            NormSpec::Orlicz(phi) => luxemburg(grid, mags, phi),
        }
    }

    /// A constant `C` with `‖z‖_other ≤ C ‖z‖_self` for every `z`, when one is known.
    pub fn embedding_constant(&self, other: &NormSpec, total: f64) -> Option<f64> {
        if self == other {
            return Some(1.0);
        }
        match (self, other) {
            // ‖z‖_q ≤ mes(Ω)^{1/q - 1/p} ‖z‖_p for q ≤ p
            (NormSpec::Lp(p), NormSpec::Lp(q)) if q <= p => Some(total.powf(1.0 / q - 1.0 / p)),
            _ => None,
        }
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpec::Lp(p) if p.is_infinite() => write!(f, "L_inf"),
            NormSpec::Lp(p) => write!(f, "L_{p}"),
            NormSpec::Orlicz(phi) => write!(f, "Orlicz[{phi}]"),
        }
    }
}

fn lp_norm(grid: &Grid, mags: &[f64], p: f64) -> f64 {
    let m = mags.iter().copied().fold(0.0, f64::max);
    if m == 0.0 || p.is_infinite() {
        return m;
    }
    if p == 1.0 {
        return grid.weights().zip(mags).map(|(w, v)| w * v).sum();
    }
    let s: f64 = grid.weights().zip(mags).map(|(w, v)| w * (v / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

fn luxemburg(grid: &Grid, mags: &[f64], phi: &YoungFunction) -> Result<f64, FuncSpaceError> {
    let terms: Vec<(f64, f64, f64)> = grid
        .cells()
        .iter()
        .zip(mags)
        .filter(|(_, &m)| m > 0.0)
        .map(|(c, &m)| (c.measure, c.representative, m))
        .collect();
    let Some(sup) = terms.iter().map(|t| t.2).reduce(f64::max) else {
        return Ok(0.0);
    };
    // modular(λ) ≤ 1, summing with early exit; +∞ saturates
    let fits = |lambda: f64| -> Result<bool, FuncSpaceError> {
        let mut acc = 0.0;
        for &(w, t, m) in &terms {
            acc += w * phi.phi(t, m / lambda)?;
            if acc > 1.0 {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let (mut lo, mut hi);
    if fits(sup)? {
        hi = sup;
        lo = 0.5 * sup;
        while fits(lo)? {
            hi = lo;
            lo *= 0.5;
            if lo < f64::MIN_POSITIVE {
                return Ok(hi);
            }
        }
    } else {
        lo = sup;
        hi = 2.0 * sup;
        while !fits(hi)? {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(FuncSpaceError::ModularInfinite);
            }
        }
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if fits(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
