//! Bootstrap-calibrated simultaneous confidence bands for the mean residual
//! lifetime and the Lorenz curve, and confidence intervals for the Gini index.
//!
//! All regions are linear (untransformed): center plus or minus `q / sqrt(n)`
//! where `q` is the upper `(1 - alpha)` empirical quantile of the bootstrap
//! sup-statistics. Bounds are clipped to the parameter range afterwards and
//! the clipping is recorded.

use serde::{Deserialize, Serialize};

use crate::bootstrap::{
    sup_mrl_distance, BootstrapDistribution, ResamplePlan, Resampler, StatisticKind,
};
use crate::error::{Error, Result};
use crate::estimators::{km_fit, ObservedSample, SurvivalFit};
use crate::functionals::{gini_of, lorenz, tail_adjusted, LorenzCurve, MrlCurve};

/// Default survival level for [`suggest_t2`].
pub const DEFAULT_T2_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandKind {
    Mrl,
    Lorenz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceBand {
    pub kind: BandKind,
    pub alpha: f64,
    pub grid: Vec<f64>,
    pub center: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Raw bootstrap quantile `q` of the sup-statistic.
    pub quantile: f64,
    /// Half-width `q / sqrt(n)`.
    pub quantile_used: f64,
    pub replicates_used: usize,
    pub replicates_dropped: usize,
    /// At least one bound was clipped to the parameter range.
    pub clipped: bool,
    /// Residual Kaplan-Meier mass was moved to the largest time.
    pub tail_adjusted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub alpha: f64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub quantile: f64,
    pub quantile_used: f64,
    pub replicates_used: usize,
    pub replicates_dropped: usize,
    pub tail_adjusted: bool,
}

/// A band together with the bootstrap distribution that calibrated it.
#[derive(Debug, Clone, PartialEq)]
pub struct BandRun<T> {
    pub region: T,
    pub distribution: BootstrapDistribution,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

fn quantile_of(dist: &BootstrapDistribution, alpha: f64) -> Result<f64> {
    if dist.used() == 0 {
        return Err(Error::BootstrapDegenerate {
            replicates: dist.dropped,
        });
    }
    dist.quantile(alpha)
}

/// Largest observation time `t` with `S_n(t) >= threshold`, or 0 if none.
pub fn suggest_t2(fit: &SurvivalFit, threshold: f64) -> f64 {
    fit.groups()
        .iter()
        .rev()
        .map(|g| g.time)
        .find(|&t| fit.km().eval(t) >= threshold)
        .unwrap_or(0.0)
}

/// Band grid on `[t1, t2]`: both endpoints plus every Kaplan-Meier breakpoint between.
fn mrl_grid(fit: &SurvivalFit, t1: f64, t2: f64) -> Vec<f64> {
    let mut grid = vec![t1];
    grid.extend(
        fit.km()
            .breakpoints()
            .iter()
            .copied()
            .filter(|&b| b > t1 && b < t2),
    );
    if t2 > t1 {
        grid.push(t2);
    }
    grid
}

/// Simultaneous band for the mean residual lifetime on `[t1, t2]`.
pub fn mrl_band(
    sample: &ObservedSample,
    t1: f64,
    t2: f64,
    alpha: f64,
    plan: &ResamplePlan,
) -> Result<ConfidenceBand> {
    Ok(mrl_band_run(sample, t1, t2, alpha, plan)?.region)
}

pub fn mrl_band_run(
    sample: &ObservedSample,
    t1: f64,
    t2: f64,
    alpha: f64,
    plan: &ResamplePlan,
) -> Result<BandRun<ConfidenceBand>> {
    check_alpha(alpha)?;
    if !(t1 >= 0.0 && t1 <= t2 && t2.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= t1 <= t2, got [{t1}, {t2}]"
        )));
    }
    let fit = km_fit(sample);
    if fit.km().eval(t2) <= 0.0 {
        return Err(Error::OutsideSupport(format!(
            "t2 exceeds estimator support (S_n({t2}) = 0)"
        )));
    }
    let curve = MrlCurve::new(&fit);
    let scale = (fit.n() as f64).sqrt();

    let outcomes = Resampler::new(sample, *plan).map(|_, boot| {
        if boot.km().eval(t2) <= 0.0 {
            return None;
        }
        sup_mrl_distance(&MrlCurve::new(boot), &curve, t1, t2)
            .ok()
            .map(|d| scale * d)
    });
    let dist = BootstrapDistribution::from_outcomes(StatisticKind::MrlSup, *plan, outcomes);
    let q = quantile_of(&dist, alpha)?;
    let half = q / scale;

    let grid = mrl_grid(&fit, t1, t2);
    let center: Vec<f64> = grid.iter().map(|&t| curve.eval(t)).collect::<Result<_>>()?;
    let raw_lower: Vec<f64> = center.iter().map(|c| c - half).collect();
    let clipped = raw_lower.iter().any(|&l| l < 0.0);
    let band = ConfidenceBand {
        kind: BandKind::Mrl,
        alpha,
        lower: raw_lower.into_iter().map(|l| l.max(0.0)).collect(),
        upper: center.iter().map(|c| c + half).collect(),
        grid,
        center,
        quantile: q,
        quantile_used: half,
        replicates_used: dist.used(),
        replicates_dropped: dist.dropped,
        clipped,
        tail_adjusted: tail_adjusted(&fit),
    };
    Ok(BandRun {
        region: band,
        distribution: dist,
    })
}

/// Exact `sup_p |a(p) - b(p)|` over the union of the two node sets.
pub fn sup_lorenz_distance(a: &LorenzCurve, b: &LorenzCurve) -> f64 {
    a.nodes()
        .iter()
        .chain(b.nodes())
        .map(|&p| (a.eval(p) - b.eval(p)).abs())
        .fold(0.0, f64::max)
}

/// Simultaneous band for the Lorenz curve on `[0, 1]`, reported on a uniform
/// grid of `resolution + 1` points.
pub fn lorenz_band(
    sample: &ObservedSample,
    alpha: f64,
    plan: &ResamplePlan,
    resolution: usize,
) -> Result<ConfidenceBand> {
    Ok(lorenz_band_run(sample, alpha, plan, resolution)?.region)
}

pub fn lorenz_band_run(
    sample: &ObservedSample,
    alpha: f64,
    plan: &ResamplePlan,
    resolution: usize,
) -> Result<BandRun<ConfidenceBand>> {
    check_alpha(alpha)?;
    if resolution == 0 {
        return Err(Error::InvalidArgument(
            "grid resolution must be >= 1".into(),
        ));
    }
    let fit = km_fit(sample);
    let curve = lorenz(&fit)?;
    let scale = (fit.n() as f64).sqrt();
    let outcomes = Resampler::new(sample, *plan).map(|_, boot| {
        lorenz(boot)
            .ok()
            .map(|l| scale * sup_lorenz_distance(&l, &curve))
    });
    let dist = BootstrapDistribution::from_outcomes(StatisticKind::LorenzSup, *plan, outcomes);
    let q = quantile_of(&dist, alpha)?;
    let half = q / scale;

    let grid: Vec<f64> = (0..=resolution)
        .map(|k| k as f64 / resolution as f64)
        .collect();
    let center: Vec<f64> = grid.iter().map(|&p| curve.eval(p)).collect();
    let clipped = center.iter().any(|c| c - half < 0.0 || c + half > 1.0);
    let band = ConfidenceBand {
        kind: BandKind::Lorenz,
        alpha,
        lower: center.iter().map(|c| (c - half).max(0.0)).collect(),
        upper: center.iter().map(|c| (c + half).min(1.0)).collect(),
        grid,
        center,
        quantile: q,
        quantile_used: half,
        replicates_used: dist.used(),
        replicates_dropped: dist.dropped,
        clipped,
        tail_adjusted: tail_adjusted(&fit),
    };
    Ok(BandRun {
        region: band,
        distribution: dist,
    })
}

/// Confidence interval for the Gini index.
pub fn gini_interval(
    sample: &ObservedSample,
    alpha: f64,
    plan: &ResamplePlan,
) -> Result<ConfidenceInterval> {
    Ok(gini_interval_run(sample, alpha, plan)?.region)
}

pub fn gini_interval_run(
    sample: &ObservedSample,
    alpha: f64,
    plan: &ResamplePlan,
) -> Result<BandRun<ConfidenceInterval>> {
    check_alpha(alpha)?;
    let fit = km_fit(sample);
    let estimate = gini_of(&lorenz(&fit)?);
    let scale = (fit.n() as f64).sqrt();
    let outcomes = Resampler::new(sample, *plan).map(|_, boot| {
        lorenz(boot)
            .ok()
            .map(|l| scale * (gini_of(&l) - estimate).abs())
    });
    let dist = BootstrapDistribution::from_outcomes(StatisticKind::GiniAbs, *plan, outcomes);
    let q = quantile_of(&dist, alpha)?;
    let half = q / scale;
    let interval = ConfidenceInterval {
        alpha,
        estimate,
        lower: (estimate - half).max(0.0),
        upper: (estimate + half).min(1.0),
        quantile: q,
        quantile_used: half,
        replicates_used: dist.used(),
        replicates_dropped: dist.dropped,
        tail_adjusted: tail_adjusted(&fit),
    };
    Ok(BandRun {
        region: interval,
        distribution: dist,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::Record;
    use crate::functionals::mrl;

    fn staggered(n: usize) -> ObservedSample {
        let recs = (1..=n)
            .map(|k| {
                let t = k as f64 * 0.37 + (k * k % 7) as f64 * 0.01;
                if k % 4 == 0 {
                    Record::censored(t)
                } else {
                    Record::event(t)
                }
            })
            .collect();
        ObservedSample::new(recs).unwrap()
    }

    #[test]
    fn band_collapses_when_resample_equals_original() {
        let s = ObservedSample::from_pairs(&[2.0, 2.0, 2.0, 2.0], &[true; 4]).unwrap();
        let plan = ResamplePlan::new(5, 1).unwrap();
        let band = mrl_band(&s, 0.0, 1.0, 0.05, &plan).unwrap();
        assert_eq!(band.quantile, 0.0);
        assert_eq!(band.lower, band.center);
        assert_eq!(band.upper, band.center);
    }

    #[test]
    fn mrl_band_structure() {
        let s = staggered(40);
        let plan = ResamplePlan::new(17, 200).unwrap();
        let fit = km_fit(&s);
        let (t1, t2) = (1.0, 8.0);
        let run = mrl_band_run(&s, t1, t2, 0.05, &plan).unwrap();
        let band = &run.region;
        assert_eq!(
            band.replicates_used + band.replicates_dropped,
            plan.replicates
        );
        assert_eq!(band.grid.first(), Some(&t1));
        assert_eq!(band.grid.last(), Some(&t2));
        for (k, &t) in band.grid.iter().enumerate() {
            assert_eq!(band.center[k], mrl(&fit, t).unwrap());
            assert!(band.lower[k] <= band.center[k] && band.center[k] <= band.upper[k]);
            if !band.clipped {
                assert!((band.upper[k] - band.lower[k] - 2.0 * band.quantile_used).abs() < 1e-12);
            }
        }
        assert_eq!(
            band.quantile_used,
            run.distribution.quantile(0.05).unwrap() / (40f64).sqrt()
        );

        let wide = mrl_band(&s, t1, t2, 0.05, &plan).unwrap();
        let narrow = mrl_band(&s, t1, t2, 0.10, &plan).unwrap();
        assert!(narrow.quantile <= wide.quantile);
        assert_eq!(wide, mrl_band(&s, t1, t2, 0.05, &plan).unwrap());
    }

    #[test]
    fn mrl_band_errors() {
        let s = staggered(10);
        let plan = ResamplePlan::new(1, 10).unwrap();
        assert!(matches!(
            mrl_band(
                &ObservedSample::from_pairs(&[1.0, 2.0], &[true, true]).unwrap(),
                0.0,
                2.0,
                0.05,
                &plan
            ),
            Err(Error::OutsideSupport(_))
        ));
        assert!(mrl_band(&s, 2.0, 1.0, 0.05, &plan).is_err());
        assert!(mrl_band(&s, 0.0, 1.0, 1.5, &plan).is_err());
    }

    #[test]
    fn dropped_replicates_are_counted() {
        // S_n(1) = 1/2, but a replicate drawing the event twice has S* = 0 at 1.
        let s = ObservedSample::from_pairs(&[1.0, 1.0], &[true, false]).unwrap();
        let plan = ResamplePlan::new(4, 64).unwrap();
        let run = mrl_band_run(&s, 0.0, 1.0, 0.05, &plan).unwrap();
        assert!(run.region.replicates_dropped > 0);
        assert!(run.region.replicates_used > 0);
        assert_eq!(
            run.region.replicates_used + run.region.replicates_dropped,
            64
        );

        let seed = (0..)
            .find(|&seed| {
                let plan = ResamplePlan::new(seed, 1).unwrap();
                crate::bootstrap::resample(&s, &plan, 0)
                    .unwrap()
                    .records()
                    .iter()
                    .all(|r| r.status.is_event())
            })
            .unwrap();
        let single = ResamplePlan::new(seed, 1).unwrap();
        assert_eq!(
            mrl_band(&s, 0.0, 1.0, 0.05, &single),
            Err(Error::BootstrapDegenerate { replicates: 1 })
        );
    }

    #[test]
    fn suggest_t2_threshold() {
        let s = ObservedSample::from_pairs(&[1.0, 2.0, 3.0, 4.0], &[true; 4]).unwrap();
        let fit = km_fit(&s);
        assert_eq!(suggest_t2(&fit, 0.25), 3.0);
        assert_eq!(suggest_t2(&fit, 0.3), 2.0);
        assert_eq!(suggest_t2(&fit, DEFAULT_T2_THRESHOLD), 3.0);
        assert!(fit.km().eval(suggest_t2(&fit, DEFAULT_T2_THRESHOLD)) > 0.0);
    }

    #[test]
    fn lorenz_band_basics() {
        let s = staggered(30);
        let plan = ResamplePlan::new(8, 100).unwrap();
        let run = lorenz_band_run(&s, 0.1, &plan, 50).unwrap();
        let band = &run.region;
        assert_eq!(band.grid.len(), 51);
        assert_eq!(band.center[0], 0.0);
        assert_eq!(band.center[50], 1.0);
        for k in 0..band.grid.len() {
            assert!(band.lower[k] <= band.center[k] && band.center[k] <= band.upper[k]);
            assert!(band.lower[k] >= 0.0 && band.upper[k] <= 1.0);
        }
        assert!(run.distribution.statistics.iter().all(|&v| v >= 0.0));

        // Identical replicate gives a zero statistic; endpoints are pinned.
        let fit = km_fit(&s);
        let l = lorenz(&fit).unwrap();
        assert_eq!(sup_lorenz_distance(&l, &l), 0.0);
        let resampler = Resampler::new(&s, plan);
        for b in 0..plan.replicates {
            let lb = lorenz(&resampler.fit(b).unwrap()).unwrap();
            assert_eq!(lb.eval(0.0), l.eval(0.0));
            assert_eq!(lb.eval(1.0), l.eval(1.0));
        }
    }

    #[test]
    fn gini_interval_equal_values() {
        let s = ObservedSample::from_pairs(&[4.0; 6], &[true; 6]).unwrap();
        let plan = ResamplePlan::new(2, 50).unwrap();
        let ci = gini_interval(&s, 0.05, &plan).unwrap();
        assert_eq!((ci.estimate, ci.lower, ci.upper), (0.0, 0.0, 0.0));
    }

    #[test]
    fn gini_interval_contains_estimate() {
        let s = staggered(50);
        let plan = ResamplePlan::new(99, 300).unwrap();
        let ci = gini_interval(&s, 0.05, &plan).unwrap();
        assert!(ci.lower <= ci.estimate && ci.estimate <= ci.upper);
        assert_eq!(ci.replicates_used, 300);
        let wider = gini_interval(&s, 0.01, &plan).unwrap();
        assert!(wider.upper - wider.lower >= ci.upper - ci.lower);
    }
}
