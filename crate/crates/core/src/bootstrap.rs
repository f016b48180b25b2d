//! Efron's bootstrap for right-censored data: resample `(time, status)`
//! pairs with replacement and refit every estimator on each resample.
//!
//! Replicate `b` draws its indices from its own random stream, so results
//! are a pure function of `(sample, plan, b)` regardless of scheduling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::covariance::CovarianceSurface;
use crate::error::{Error, Result};
use crate::estimators::{fit_sorted, ObservedSample, Record, SurvivalFit};
use crate::functionals::MrlCurve;
use crate::parallel::map_indexed;
use crate::rng::replicate_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResamplePlan {
    pub seed: u64,
    pub replicates: usize,
    pub stream_id: u64,
}

impl ResamplePlan {
    pub fn new(seed: u64, replicates: usize) -> Result<Self> {
        if replicates == 0 {
            return Err(Error::InvalidArgument(
                "replicate count must be >= 1".into(),
            ));
        }
        Ok(Self {
            seed,
            replicates,
            stream_id: 0,
        })
    }

    pub fn with_stream(mut self, stream_id: u64) -> Self {
        self.stream_id = stream_id;
        self
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.replicates {
            return Err(Error::InvalidArgument(format!(
                "replicate index {index} out of range for {} replicates",
                self.replicates
            )));
        }
        Ok(())
    }

    /// Indices into the original record order drawn for replicate `index`.
    fn draw_indices(&self, n: usize, index: usize) -> Vec<usize> {
        let mut rng = replicate_rng(self.seed, self.stream_id, index as u64);
        (0..n).map(|_| rng.random_range(0..n)).collect()
    }
}

/// The `n` records of replicate `index`, in draw order.
pub fn resample(
    sample: &ObservedSample,
    plan: &ResamplePlan,
    index: usize,
) -> Result<ObservedSample> {
    plan.check_index(index)?;
    let records = sample.records();
    let drawn = plan
        .draw_indices(records.len(), index)
        .into_iter()
        .map(|i| records[i])
        .collect();
    Ok(ObservedSample::from_valid(drawn))
}

/// Refits resamples without re-sorting: the original is sorted once and each
/// replicate expands its draw counts in that order.
#[derive(Debug, Clone)]
pub struct Resampler<'a> {
    sample: &'a ObservedSample,
    plan: ResamplePlan,
    order: Vec<usize>,
}

impl<'a> Resampler<'a> {
    pub fn new(sample: &'a ObservedSample, plan: ResamplePlan) -> Self {
        let records = sample.records();
        let mut order: Vec<usize> = (0..records.len()).collect();
        // Same order as `resolve_ties`.
        order.sort_by(|&a, &b| {
            let (ra, rb) = (records[a], records[b]);
            ra.time
                .total_cmp(&rb.time)
                .then_with(|| rb.status.is_event().cmp(&ra.status.is_event()))
        });
        Self {
            sample,
            plan,
            order,
        }
    }

    pub fn plan(&self) -> &ResamplePlan {
        &self.plan
    }

    pub fn fit(&self, index: usize) -> Result<SurvivalFit> {
        self.plan.check_index(index)?;
        let records = self.sample.records();
        let n = records.len();
        let mut counts = vec![0u32; n];
        for i in self.plan.draw_indices(n, index) {
            counts[i] += 1;
        }
        let mut expanded: Vec<Record> = Vec::with_capacity(n);
        for &i in &self.order {
            for _ in 0..counts[i] {
                expanded.push(records[i]);
            }
        }
        Ok(fit_sorted(&expanded))
    }

    /// Runs `stat` on every replicate fit in parallel, in replicate order.
    pub fn map<T, F>(&self, stat: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize, &SurvivalFit) -> T + Sync + Send,
    {
        map_indexed(self.plan.replicates, |b| {
            let fit = self.fit(b).expect("index within plan");
            stat(b, &fit)
        })
    }
}

/// Kaplan-Meier, Nelson-Aalen, censoring and empirical fits of replicate `index`.
pub fn bootstrap_fit(
    sample: &ObservedSample,
    plan: &ResamplePlan,
    index: usize,
) -> Result<SurvivalFit> {
    Resampler::new(sample, *plan).fit(index)
}

/// Covariance surface of the bootstrap fit of replicate `index` at `(u, v)`.
pub fn gamma_star(
    sample: &ObservedSample,
    plan: &ResamplePlan,
    index: usize,
    u: f64,
    v: f64,
) -> Result<f64> {
    let fit = bootstrap_fit(sample, plan, index)?;
    Ok(CovarianceSurface::new(&fit).eval(u, v))
}

/// `sqrt(n) sup_{t in [t1, t2]} |g*_n(t) - g_n(t)|` for two mean residual
/// lifetime curves.
///
/// Between consecutive breakpoints of either fit both curves are linear in
/// `t`, so the supremum is attained at an endpoint, a breakpoint, a left
/// limit at a breakpoint, or a kink at either curve's upper limit.
pub fn sup_statistic_mrl(
    original: &SurvivalFit,
    boot: &SurvivalFit,
    t1: f64,
    t2: f64,
) -> Result<f64> {
    let scale = (original.n() as f64).sqrt();
    Ok(scale * sup_mrl_distance(&MrlCurve::new(original), &MrlCurve::new(boot), t1, t2)?)
}

/// Unscaled `sup_{t in [t1, t2]} |a(t) - b(t)|`.
pub fn sup_mrl_distance(a: &MrlCurve, b: &MrlCurve, t1: f64, t2: f64) -> Result<f64> {
    if !(t1 >= 0.0 && t1 <= t2) {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= t1 <= t2, got [{t1}, {t2}]"
        )));
    }
    if a.km().eval(t2) <= 0.0 || b.km().eval(t2) <= 0.0 {
        return Err(Error::OutsideSupport(
            "band undefined: estimator support exceeded".into(),
        ));
    }
    let diff = |t: f64| -> Result<f64> { Ok((a.eval(t)? - b.eval(t)?).abs()) };
    let diff_left = |t: f64| -> Result<f64> { Ok((a.eval_left(t)? - b.eval_left(t)?).abs()) };

    let mut sup = diff(t1)?.max(diff(t2)?);
    let inside = |t: f64| t > t1 && t <= t2;
    for &bp in a.km().breakpoints().iter().chain(b.km().breakpoints()) {
        if inside(bp) {
            sup = sup.max(diff(bp)?).max(diff_left(bp)?);
        }
    }
    for upper in [a.upper(), b.upper()] {
        if inside(upper) {
            sup = sup.max(diff(upper)?);
        }
    }
    Ok(sup)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    MrlSup,
    LorenzSup,
    GiniAbs,
    Custom,
}

/// Replicate statistics of one bootstrap run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapDistribution {
    pub kind: StatisticKind,
    pub plan: ResamplePlan,
    /// Values of the replicates whose statistic was defined, in replicate order.
    pub statistics: Vec<f64>,
    /// Replicates whose statistic was undefined.
    pub dropped: usize,
}

impl BootstrapDistribution {
    /// Collects per-replicate outcomes, dropping the undefined ones.
    pub fn from_outcomes(
        kind: StatisticKind,
        plan: ResamplePlan,
        outcomes: Vec<Option<f64>>,
    ) -> Self {
        let total = outcomes.len();
        let statistics: Vec<f64> = outcomes.into_iter().flatten().collect();
        Self {
            kind,
            plan,
            dropped: total - statistics.len(),
            statistics,
        }
    }

    pub fn used(&self) -> usize {
        self.statistics.len()
    }

    /// The `ceil(B (1 - alpha))`-th order statistic.
    pub fn quantile(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        let b = self.statistics.len();
        if b == 0 {
            return Err(Error::BootstrapDegenerate {
                replicates: self.dropped,
            });
        }
        let mut sorted = self.statistics.clone();
        sorted.sort_by(f64::total_cmp);
        // Guard against B (1 - alpha) landing a rounding error above an integer.
        let rank = ((b as f64) * (1.0 - alpha) - 1e-9)
            .ceil()
            .clamp(1.0, b as f64) as usize;
        Ok(sorted[rank - 1])
    }
}

pub fn quantile(dist: &BootstrapDistribution, alpha: f64) -> Result<f64> {
    dist.quantile(alpha)
}
