//! Shared helpers for the integration tests and the acceptance harness.
#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use degenkit_core::{Grid, GridFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(n: usize) -> Arc<Grid> {
    Arc::new(Grid::uniform(n, 1.0).unwrap())
}

pub fn random_function(grid: &Arc<Grid>, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> GridFunction {
    let values = (0..grid.len()).map(|_| rng.random_range(lo..hi)).collect();
    GridFunction::scalar(Arc::clone(grid), values).unwrap()
}

fn coefficient(rng: &mut ChaCha8Rng) -> String {
    let c: f64 = rng.random_range(-2.0..2.0);
    format!("{:.3}", c)
}

/// A random smooth expression over `vars`, written as source text.
///
/// Every construct is differentiable and bounded on `[-1, 1]^k`: divisions
/// and logarithms are guarded by offsets that keep their arguments away
/// from zero.
pub fn random_expression(rng: &mut ChaCha8Rng, vars: &[&str], depth: u32) -> String {
    let leaf = |rng: &mut ChaCha8Rng| {
        if rng.random_bool(0.7) {
            vars[rng.random_range(0..vars.len())].to_string()
        } else {
            format!("({})", coefficient(rng))
        }
    };
    if depth == 0 {
        return leaf(rng);
    }
    let sub = |rng: &mut ChaCha8Rng| random_expression(rng, vars, depth - 1);
    match rng.random_range(0..11) {
        0 => format!("{} + {}", sub(rng), sub(rng)),
        1 => format!("{} - ({})", sub(rng), sub(rng)),
        2 => format!("({}) * ({})", sub(rng), sub(rng)),
        3 => format!("({}) / (2.5 + sin({}))", sub(rng), sub(rng)),
        4 => format!("({})^{}", sub(rng), rng.random_range(2..4)),
        5 => format!("sin({})", sub(rng)),
        6 => format!("cos({} * {})", coefficient(rng), sub(rng)),
        7 => format!("exp(0.5 * sin({}))", sub(rng)),
        8 => format!("ln(3 + cos({}))", sub(rng)),
        9 => format!("-({})", sub(rng)),
        _ => format!("{} * {}", coefficient(rng), sub(rng)),
    }
}

pub fn bindings<'a>(names: &[&'a str], values: &[f64]) -> HashMap<&'a str, f64> {
    names.iter().copied().zip(values.iter().copied()).collect()
}
