//! Declarative scenario files for `simulate`.

use std::path::Path;

use kmboot_core::simlab::{
    coverage_experiment, gamma_consistency_sweep, generate, gill_bound_check,
    integration_by_parts_check, jump_inequality_check, BandSpec, DataModel, ExperimentReport,
};
use kmboot_core::ResamplePlan;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// What a scenario file describes. The `experiment` key selects the variant.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case", deny_unknown_fields)]
pub enum Scenario {
    Coverage {
        model: DataModel,
        n: usize,
        #[serde(rename = "B")]
        replicates: usize,
        #[serde(default = "default_alpha")]
        alpha: f64,
        reps: usize,
        band: BandSpec,
        seed: Option<u64>,
    },
    GammaSweep {
        model: DataModel,
        n_list: Vec<usize>,
        #[serde(rename = "B")]
        replicates: usize,
        seed: Option<u64>,
    },
    Gill {
        model: DataModel,
        n: usize,
        #[serde(rename = "B")]
        replicates: usize,
        betas: Vec<f64>,
        seed: Option<u64>,
    },
    JumpInequality {
        trials: usize,
        seed: Option<u64>,
    },
    IntegrationByParts {
        trials: usize,
        seed: Option<u64>,
    },
}

fn default_alpha() -> f64 {
    0.05
}

impl Scenario {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid scenario: {e}")))
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Scenario::Coverage { seed, .. }
            | Scenario::GammaSweep { seed, .. }
            | Scenario::Gill { seed, .. }
            | Scenario::JumpInequality { seed, .. }
            | Scenario::IntegrationByParts { seed, .. } => *seed,
        }
    }

    pub fn sample_size(&self) -> Option<usize> {
        match self {
            Scenario::Coverage { n, .. } | Scenario::Gill { n, .. } => Some(*n),
            _ => None,
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            Scenario::Coverage { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    pub fn replicates(&self) -> Option<usize> {
        match self {
            Scenario::Coverage { replicates, .. }
            | Scenario::GammaSweep { replicates, .. }
            | Scenario::Gill { replicates, .. } => Some(*replicates),
            _ => None,
        }
    }

    pub fn run(&self, seed: u64) -> CliResult<ExperimentReport> {
        let report = match self {
            Scenario::Coverage {
                model,
                n,
                replicates,
                alpha,
                reps,
                band,
                ..
            } => coverage_experiment(model, *n, *replicates, *alpha, *band, *reps, seed)?,
            Scenario::GammaSweep {
                model,
                n_list,
                replicates,
                ..
            } => gamma_consistency_sweep(model, n_list, *replicates, seed)?,
            Scenario::Gill {
                model,
                n,
                replicates,
                betas,
                ..
            } => {
                let sample = generate(model, *n, seed)?;
                let plan = ResamplePlan::new(seed.wrapping_add(1), *replicates)?;
                gill_bound_check(&sample, &plan, betas)?
            }
            Scenario::JumpInequality { trials, .. } => jump_inequality_check(*trials, seed)?,
            Scenario::IntegrationByParts { trials, .. } => {
                integration_by_parts_check(*trials, seed)?
            }
        };
        Ok(report)
    }
}
