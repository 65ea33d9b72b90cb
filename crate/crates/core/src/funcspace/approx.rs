use std::collections::BTreeMap;
use std::sync::Arc;

use super::{euclid, FuncSpaceError, GridFunction};

/// Exponent `k` with `2^k ≤ m < 2^{k+1}`.
fn dyadic_band(m: f64) -> i32 {
    let mut k = m.log2().floor() as i32;
    while 2f64.powi(k) > m {
        k -= 1;
    }
    while 2f64.powi(k + 1) <= m {
        k += 1;
    }
    k
}

/// Simple-function approximation with `|x(t_i) − y(t_i)| ≤ eps·|x(t_i)|`.
///
/// Magnitudes are grouped into bands `[2^k, 2^{k+1})`; within a band each
/// value snaps to the first already-chosen value within `eps·2^k`, or becomes
/// a new net point. Zeros stay zero.
pub fn simple_approx(x: &GridFunction, eps: f64) -> Result<GridFunction, FuncSpaceError> {
    if !(eps > 0.0) {
        return Err(FuncSpaceError::NonPositive("eps"));
    }
    let dim = x.dim();
    let mut nets: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    let mut out = vec![0.0; x.values().len()];
    for i in 0..x.len() {
        let v = x.value(i);
        let m = euclid(v);
        if m == 0.0 {
            continue;
        }
        let k = dyadic_band(m);
        let radius = eps * 2f64.powi(k);
        let net = nets.entry(k).or_default();
        let hit = net.iter().copied().find(|&j| {
            let c = x.value(j);
            euclid(&v.iter().zip(c).map(|(a, b)| a - b).collect::<Vec<_>>()) <= radius
        });
        let src = match hit {
            Some(j) => j,
            None => {
                net.push(i);
                i
            }
        };
        out[i * dim..(i + 1) * dim].copy_from_slice(x.value(src));
    }
    GridFunction::new(Arc::clone(x.grid()), dim, out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanValueCheck {
    /// `‖φ(b) − φ(a)‖`
    pub lhs: f64,
    /// Largest central-difference derivative norm over interior samples.
    pub m: f64,
    /// `M·(b − a)`
    pub bound: f64,
    pub pass: bool,
}

/// Mean value inequality on equally spaced samples of a curve `φ`.
pub fn mean_value_check(samples: &[Vec<f64>], step: f64) -> Result<MeanValueCheck, FuncSpaceError> {
    if samples.len() < 3 {
        return Err(FuncSpaceError::TooFewSamples {
            need: 3,
            got: samples.len(),
        });
    }
    if !(step > 0.0) {
        return Err(FuncSpaceError::NonPositive("step"));
    }
    let d = samples[0].len();
    if let Some(s) = samples.iter().find(|s| s.len() != d) {
        return Err(FuncSpaceError::DimMismatch(d, s.len()));
    }
    let dist = |a: &[f64], b: &[f64]| euclid(&a.iter().zip(b).map(|(p, q)| p - q).collect::<Vec<_>>());
    let m = samples
        .windows(3)
        .map(|w| dist(&w[2], &w[0]) / (2.0 * step))
        .fold(0.0, f64::max);
    let lhs = dist(&samples[samples.len() - 1], &samples[0]);
    let bound = m * step * (samples.len() - 1) as f64;
    Ok(MeanValueCheck {
        lhs,
        m,
        bound,
        pass: lhs <= bound * (1.0 + 1e-6),
    })
}
