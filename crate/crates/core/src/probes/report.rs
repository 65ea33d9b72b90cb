use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    DegeneracyWitnessed,
    NoWitnessFound,
    BoundSatisfied,
    BoundViolated,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::DegeneracyWitnessed => "DEGENERACY_WITNESSED",
            Verdict::NoWitnessFound => "NO_WITNESS_FOUND",
            Verdict::BoundSatisfied => "BOUND_SATISFIED",
            Verdict::BoundViolated => "BOUND_VIOLATED",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One CSV row. MNC probes fill `k`, `upper` and `lower`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub parameter: f64,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
}

impl CurvePoint {
    pub fn new(parameter: f64, value: f64) -> Self {
        CurvePoint {
            parameter,
            value,
            k: None,
            upper: None,
            lower: None,
        }
    }

    pub fn mnc(parameter: f64, value: f64, k: usize, upper: f64, lower: f64) -> Self {
        CurvePoint {
            parameter,
            value,
            k: Some(k),
            upper: Some(upper),
            lower: Some(lower),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub probe: String,
    /// Digest of the inputs, filled in by whoever knows the full configuration.
    #[serde(default)]
    pub digest: Option<String>,
    pub curve: Vec<CurvePoint>,
    pub bounds: BTreeMap<String, f64>,
    pub verdict: Verdict,
    pub seed: Option<u64>,
}

impl ProbeReport {
    pub fn new(probe: &str, verdict: Verdict) -> Self {
        ProbeReport {
            probe: probe.to_string(),
            digest: None,
            curve: Vec::new(),
            bounds: BTreeMap::new(),
            verdict,
            seed: None,
        }
    }

    pub fn bound(mut self, name: &str, value: f64) -> Self {
        self.bounds.insert(name.to_string(), value);
        self
    }

    pub fn with_curve(mut self, curve: Vec<CurvePoint>) -> Self {
        self.curve = curve;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    fn has_mnc_columns(&self) -> bool {
        self.curve.iter().any(|p| p.k.is_some())
    }

    /// Header `parameter,value` or `parameter,value,k,upper,lower`, one row per
    /// curve point. Numbers use the shortest round-trip decimal form.
    pub fn to_csv(&self) -> String {
        let mnc = self.has_mnc_columns();
        let mut out = String::from(if mnc {
            "parameter,value,k,upper,lower\n"
        } else {
            "parameter,value\n"
        });
        for p in &self.curve {
            write!(out, "{},{}", p.parameter, p.value).unwrap();
            if mnc {
                let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
                write!(
                    out,
                    ",{},{},{}",
                    p.k.map(|k| k.to_string()).unwrap_or_default(),
                    opt(p.upper),
                    opt(p.lower)
                )
                .unwrap();
            }
            out.push('\n');
        }
        out
    }
}
