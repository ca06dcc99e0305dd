//! Sampled residual checks and their configuration.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::chart::Chart;
use crate::error::{Error, Result};

/// Outcome of one sampled identity check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub max_residual: f64,
    pub samples: usize,
    /// Point attaining the largest residual.
    pub witness: Option<Vec<f64>>,
    pub tolerance: f64,
    /// Free-form note (first evaluation error, observed values).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckResult {
    /// Builds a result from a residual and tolerance, with `passed` derived.
    pub fn new(name: impl Into<String>, max_residual: f64, samples: usize, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: max_residual <= tolerance,
            max_residual,
            samples,
            witness: None,
            tolerance,
            detail: None,
        }
    }

    pub fn with_witness(mut self, witness: Option<Vec<f64>>) -> Self {
        self.witness = witness;
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// Named tolerances with defaults; any entry can be overridden by name.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    values: BTreeMap<String, f64>,
}

/// Default tolerance table. Identities that hold exactly up to rounding get
/// tighter bounds than identities assembled from several solves.
pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("antisymmetry", 1e-9),
    ("closure", 1e-10),
    ("cone_hamiltonian", 1e-8),
    ("conformal", 1e-7),
    ("conjugacy", 1e-8),
    // minimum scaled contact volume, see `contact::is_contact_form`
    ("contact", 1e-10),
    ("expected", 1e-9),
    ("first_integral", 1e-8),
    ("flow_identity", 1e-8),
    ("good", 1e-8),
    ("hamiltonian", 1e-9),
    ("homogeneity", 1e-8),
    ("inverse", 1e-9),
    ("involution", 1e-8),
    ("jacobi_identity", 1e-8),
    ("level_set", 1e-12),
    ("lift", 1e-8),
    // relative singular value cutoff
    ("rank", 1e-9),
    ("reeb", 1e-9),
    ("scale_covariance", 1e-9),
    ("transformation", 1e-8),
];

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            values: DEFAULT_TOLERANCES
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
        }
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        *self
            .values
            .get(name)
            .unwrap_or_else(|| panic!("no tolerance named `{name}`"))
    }

    /// Overrides a known tolerance; unknown names and nonpositive values are
    /// rejected.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance `{name}` must be positive, got {value}"
            )));
        }
        match self.values.get_mut(name) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => Err(Error::InvalidParameter(format!("unknown tolerance `{name}`"))),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Sample count, seed and tolerances shared by every check of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub samples: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    /// Fraction of samples on which the maximal rank must be attained for a
    /// family to count as independent on a dense set.
    pub dense_fraction: f64,
}

pub const DEFAULT_SEED: u64 = 20110615;
pub const DEFAULT_SAMPLES: usize = 128;

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            tolerances: Tolerances::default(),
            dense_fraction: 0.5,
        }
    }
}

impl CheckConfig {
    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances.get(name)
    }

    pub fn points(&self, chart: &Chart) -> Result<Vec<Vec<f64>>> {
        chart.sample_points(self.samples, self.seed)
    }
}

/// Running maximum of pointwise residuals.
#[derive(Debug, Clone, Default)]
pub struct ResidualMax {
    max: f64,
    witness: Option<Vec<f64>>,
    samples: usize,
    first_error: Option<String>,
}

impl ResidualMax {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records one sample. Evaluation errors and NaN count as infinite.
    pub fn record(&mut self, point: &[f64], residual: Result<f64>) {
        self.samples += 1;
        let value = match residual {
            Ok(v) if v.is_nan() => f64::INFINITY,
            Ok(v) => v.abs(),
            Err(e) => {
                if self.first_error.is_none() {
                    self.first_error = Some(e.to_string());
                }
                f64::INFINITY
            }
        };
        if self.witness.is_none() || value > self.max {
            self.max = value;
            self.witness = Some(point.to_vec());
        }
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn finish(self, name: impl Into<String>, tolerance: f64) -> CheckResult {
        let result = CheckResult::new(name, self.max, self.samples, tolerance).with_witness(self.witness);
        match self.first_error {
            Some(e) => result.with_detail(e),
            None => result,
        }
    }
}

/// Evaluates `residual` at every sample point and reports the maximum.
pub fn sampled_check(
    name: impl Into<String>,
    points: &[Vec<f64>],
    tolerance: f64,
    mut residual: impl FnMut(&[f64]) -> Result<f64>,
) -> CheckResult {
    let mut acc = ResidualMax::new();
    for p in points {
        let r = residual(p);
        acc.record(p, r);
    }
    acc.finish(name, tolerance)
}

/// Largest absolute entry of a slice.
pub fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| if v.is_nan() { f64::INFINITY } else { m.max(v.abs()) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flag_follows_tolerance() {
        assert!(CheckResult::new("a", 1e-9, 4, 1e-9).passed);
        assert!(!CheckResult::new("a", 2e-9, 4, 1e-9).passed);
        assert!(!CheckResult::new("a", f64::INFINITY, 4, 1e-9).passed);
    }

    #[test]
    fn errors_become_infinite_residuals_with_witness() {
        let points = vec![vec![1.0], vec![0.0], vec![2.0]];
        let result = sampled_check("inv", &points, 1.0, |p| {
            if p[0] == 0.0 {
                Err(Error::DivisionByZero { point: p.to_vec() })
            } else {
                Ok(1.0 / p[0])
            }
        });
        assert!(!result.passed);
        assert_eq!(result.max_residual, f64::INFINITY);
        assert_eq!(result.witness, Some(vec![0.0]));
        assert!(result.detail.unwrap().contains("division by zero"));
        assert_eq!(result.samples, 3);
    }

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        assert_eq!(t.get("reeb"), 1e-9);
        t.set("reeb", 1e-6).unwrap();
        assert_eq!(t.get("reeb"), 1e-6);
        assert!(t.set("nope", 1.0).is_err());
        assert!(t.set("reeb", -1.0).is_err());
    }
}
