//! Kaplan-Meier based estimation and bootstrap confidence bands for
//! right-censored lifetimes: survival, cumulative hazard, mean residual
//! lifetime, Lorenz curve and Gini index.
//!
//! ```
//! use kmboot_core::{km_fit, mrl_band, ObservedSample, ResamplePlan};
//!
//! let sample = ObservedSample::from_pairs(&[1.0, 2.0, 3.0, 4.5], &[true, false, true, true])?;
//! let fit = km_fit(&sample);
//! assert_eq!(fit.km().eval(1.0), 0.75);
//!
//! let plan = ResamplePlan::new(7, 1000)?;
//! let band = mrl_band(&sample, 0.0, 3.0, 0.05, &plan)?;
//! assert_eq!(band.grid.first(), Some(&0.0));
//! # Ok::<(), kmboot_core::Error>(())
//! ```

pub mod bands;
pub mod bootstrap;
pub mod covariance;
pub mod error;
pub mod estimators;
pub mod functionals;
pub mod parallel;
pub mod rng;
pub mod simlab;
pub mod stepfn;

pub use bands::{
    gini_interval, lorenz_band, mrl_band, suggest_t2, BandKind, ConfidenceBand, ConfidenceInterval,
    DEFAULT_T2_THRESHOLD,
};
pub use bootstrap::{resample, BootstrapDistribution, ResamplePlan, Resampler, StatisticKind};
pub use covariance::{
    censoring_diagnostic, gamma_hat, sigma2_hat, CensoringDiagnostic, CovarianceSurface,
};
pub use error::{Error, Result};
pub use estimators::{km_fit, na_fit, ObservedSample, Record, Status, SurvivalFit};
pub use functionals::{gini, lorenz, mean, mrl, LorenzCurve, MrlCurve};
pub use stepfn::{PiecewiseLinear, StepFunction};
