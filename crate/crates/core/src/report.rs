//! Structured results of the verification suites.

use serde::Serialize;
use serde_json::Value;

use crate::monoid::AffineMonoid;

#[derive(Clone, Debug, Serialize)]
pub struct Parameters {
    pub monoid: AffineMonoid,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    pub samples: usize,
    pub seed: u64,
    #[serde(serialize_with = "tolerance_string")]
    pub tolerance: f64,
}

fn tolerance_string<S: serde::Serializer>(t: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{t:e}"))
}

/// One counterexample. `sample` is the index of the sampled input and `face`
/// its support face as generator indices.
#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub sample: usize,
    pub face: Vec<usize>,
    pub input: Value,
    pub expected: Value,
    pub actual: Value,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub parameters: Parameters,
    pub passed: bool,
    pub cases_run: usize,
    pub failures: Vec<Failure>,
}

impl VerificationReport {
    pub fn new(suite: &str, parameters: Parameters, cases_run: usize, failures: Vec<Failure>) -> Self {
        VerificationReport {
            suite: suite.to_string(),
            parameters,
            passed: failures.is_empty(),
            cases_run,
            failures,
        }
    }
}

/// Sampling parameters shared by the verification suites.
#[derive(Clone, Copy, Debug)]
pub struct SuiteOptions {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub mode: crate::exec::ExecMode,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            samples: 100,
            seed: 0,
            tol: crate::points::DEFAULT_TOL,
            mode: crate::exec::ExecMode::default(),
        }
    }
}

impl SuiteOptions {
    pub fn parameters(&self, monoid: &AffineMonoid, n: Option<u64>, m: Option<u64>) -> Parameters {
        Parameters {
            monoid: monoid.clone(),
            n,
            m,
            samples: self.samples,
            seed: self.seed,
            tolerance: self.tol,
        }
    }
}
