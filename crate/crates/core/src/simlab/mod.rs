//! Monte Carlo laboratory: data models with known truth and the experiments
//! that check the estimators and bands against it.

pub mod experiments;
pub mod model;
pub mod quadrature;

use serde::{Deserialize, Serialize};

pub use experiments::{
    coverage_experiment, gamma_consistency_sweep, gill_bound_check, integration_by_parts_check,
    jump_inequality_check, BandSpec,
};
pub use model::{generate, DataModel, Law};

/// One unit of an experiment, e.g. a Monte Carlo repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub group: String,
    pub index: usize,
    /// Measured quantity; `None` when it was undefined for this unit.
    pub value: Option<f64>,
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStat {
    pub name: String,
    pub value: f64,
    pub std_error: Option<f64>,
    /// Threshold the value was judged against, if any.
    pub bound: Option<f64>,
    pub pass: Option<bool>,
}

impl SummaryStat {
    pub fn plain(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            std_error: None,
            bound: None,
            pass: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub scenario: String,
    pub seed: u64,
    pub replications: usize,
    pub outcomes: Vec<Outcome>,
    pub summary: Vec<SummaryStat>,
}

impl ExperimentReport {
    pub fn stat(&self, name: &str) -> Option<&SummaryStat> {
        self.summary.iter().find(|s| s.name == name)
    }

    /// `false` if any summary statistic or outcome failed.
    pub fn passed(&self) -> bool {
        self.summary.iter().all(|s| s.pass != Some(false))
            && self.outcomes.iter().all(|o| o.pass != Some(false))
    }
}

/// Binomial standard error of a proportion.
pub fn binomial_se(p: f64, trials: usize) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    (p * (1.0 - p) / trials as f64).sqrt()
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}
