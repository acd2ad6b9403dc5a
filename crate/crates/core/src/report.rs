//! Tolerance table and the versioned JSON report envelope shared by the
//! command-line harness and the acceptance suite.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::{circuit, eigen, game, qds, qip, state};

pub const REPORT_SCHEMA: u32 = 1;

/// Every numeric tolerance in one place, addressable by name.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        let entries = [
            ("hermitian", state::HERMITIAN_TOL),
            ("trace", state::TRACE_TOL),
            ("psd", state::PSD_TOL),
            ("jacobi-sweep", eigen::SWEEP_TOL),
            ("unitary", circuit::UNITARY_TOL),
            ("distribution", qip::DISTRIBUTION_TOL),
            ("payoff-range", game::PAYOFF_RANGE_TOL),
            ("qds-weight", qds::WEIGHT_TOL),
            ("duality-gap", 1e-7),
            ("exact", 1e-9),
            ("bound", 1e-6),
        ];
        Self(entries.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    /// Applies a `name=value` override; unknown names are rejected.
    pub fn set_from_str(&mut self, spec: &str) -> Result<()> {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::Misconfigured(format!("tolerance override `{spec}` is not name=value")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Misconfigured(format!("tolerance `{name}` has a non-numeric value")))?;
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::Misconfigured(format!("tolerance `{name}` must be a nonnegative number")));
        }
        match self.0.get_mut(name.trim()) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => Err(Error::Misconfigured(format!("unknown tolerance `{name}`"))),
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}

/// One row of a claimed-versus-measured table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub quantity: String,
    pub claimed: f64,
    pub measured: f64,
    pub tolerance: f64,
    pub holds: bool,
}

impl Comparison {
    /// `measured ≤ claimed + tolerance`.
    pub fn at_most(quantity: &str, claimed: f64, measured: f64, tolerance: f64) -> Self {
        Self { quantity: quantity.into(), claimed, measured, tolerance, holds: measured <= claimed + tolerance }
    }

    /// `|measured − claimed| ≤ tolerance`.
    pub fn equal(quantity: &str, claimed: f64, measured: f64, tolerance: f64) -> Self {
        Self { quantity: quantity.into(), claimed, measured, tolerance, holds: (measured - claimed).abs() <= tolerance }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub inputs: Value,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub results: Value,
    pub comparisons: Vec<Comparison>,
}

impl Report {
    pub fn new(command: &str, inputs: Value, seed: Option<u64>, tolerances: &Tolerances) -> Self {
        Self {
            schema: REPORT_SCHEMA,
            command: command.into(),
            inputs,
            seed,
            tolerances: tolerances.clone(),
            results: Value::Null,
            comparisons: Vec::new(),
        }
    }

    pub fn with_results<T: Serialize>(mut self, results: &T) -> Result<Self> {
        self.results = serde_json::to_value(results).map_err(|e| Error::Misconfigured(e.to_string()))?;
        Ok(self)
    }

    pub fn compare(&mut self, row: Comparison) {
        self.comparisons.push(row);
    }

    pub fn all_hold(&self) -> bool {
        self.comparisons.iter().all(|c| c.holds)
    }

    /// Pretty JSON with a trailing newline; byte-identical for equal reports.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn overrides_replace_known_names_only() {
        let mut t = Tolerances::default();
        t.set_from_str("psd=1e-8").unwrap();
        assert_eq!(t.get("psd"), 1e-8);
        assert!(t.set_from_str("nope=1").is_err());
        assert!(t.set_from_str("psd").is_err());
        assert!(t.set_from_str("psd=-1").is_err());
    }

    #[test]
    fn report_carries_schema_and_is_stable() {
        let mut r = Report::new("demo", json!({"k": 4}), Some(7), &Tolerances::default())
            .with_results(&json!({"value": 0.5}))
            .unwrap();
        r.compare(Comparison::equal("value", 0.5, 0.5, 1e-9));
        let a = r.to_json();
        assert_eq!(a, r.clone().to_json());
        let v: Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["schema"], 1);
        assert!(r.all_hold());
        assert!(!Comparison::at_most("x", 0.1, 0.2, 1e-6).holds);
    }
}
