//! Monte Carlo experiments: band coverage, covariance consistency and the
//! auxiliary inequalities behind the bootstrap argument.

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{generate, DataModel};
use super::{binomial_se, median, ExperimentReport, Outcome, SummaryStat};
use crate::bands::{gini_interval, lorenz_band, mrl_band};
use crate::bootstrap::{ResamplePlan, Resampler};
use crate::covariance::CovarianceSurface;
use crate::error::{Error, Result};
use crate::estimators::{km_fit, ObservedSample, SurvivalFit};
use crate::functionals::{lorenz, MrlCurve};
use crate::parallel::map_indexed;
use crate::rng::derive_seed;
use crate::stepfn::{integrate_by_parts, stieltjes_integral, StepFunction};

const TAG_SAMPLE: u64 = 1;
const TAG_BOOT: u64 = 2;
const TAG_SWEEP: u64 = 3;
const TAG_JUMP: u64 = 4;
const TAG_IBP: u64 = 5;

/// Dense evaluation points added to every coverage check.
const DENSE_POINTS: usize = 1000;
/// The covariance grid stops where the observed-time survival drops to this level.
pub const GAMMA_GRID_LEVEL: f64 = 0.1;
pub const GAMMA_GRID_POINTS: usize = 51;
/// Tolerance of the integration-by-parts check.
pub const IBP_TOLERANCE: f64 = 1e-10;

/// Which confidence region a coverage experiment builds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BandSpec {
    Mrl { t1: f64, t2: f64 },
    Lorenz { resolution: usize },
    Gini,
}

fn check_positive(name: &str, value: usize) -> Result<()> {
    if value == 0 {
        return Err(Error::InvalidArgument(format!("{name} must be >= 1")));
    }
    Ok(())
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![lo];
    }
    (0..points)
        .map(|k| {
            if k + 1 == points {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (points - 1) as f64
            }
        })
        .collect()
}

/// Simultaneous coverage of the true functional by `reps` independent bands.
///
/// Each repetition draws a fresh sample of size `n`, builds the band with
/// `replicates` bootstrap resamples and records the largest distance between
/// the estimate and the truth together with whether the band contains the
/// truth everywhere on its domain.
pub fn coverage_experiment(
    model: &DataModel,
    n: usize,
    replicates: usize,
    alpha: f64,
    band: BandSpec,
    reps: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    check_positive("n", n)?;
    check_positive("replicate count", replicates)?;
    check_positive("repetition count", reps)?;
    let law = model.survival;
    if let BandSpec::Mrl { t1, t2 } = band {
        if !(t1 >= 0.0 && t1 <= t2) {
            return Err(Error::InvalidArgument(format!(
                "need 0 <= t1 <= t2, got [{t1}, {t2}]"
            )));
        }
        if law.survival(t2) <= 0.0 {
            return Err(Error::TruthUnavailable(format!(
                "mean residual lifetime undefined at t2 = {t2}"
            )));
        }
    }
    // Fails early on bad alpha or parameters instead of once per repetition.
    ResamplePlan::new(seed, replicates)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    generate(model, 1, seed)?;

    let results: Vec<Result<(Option<f64>, bool, usize)>> = map_indexed(reps, |r| {
        let sample = generate(model, n, derive_seed(seed, TAG_SAMPLE, r as u64))?;
        let plan = ResamplePlan::new(derive_seed(seed, TAG_BOOT, r as u64), replicates)?;
        let fit = km_fit(&sample);
        let outcome = match band {
            BandSpec::Mrl { t1, t2 } => mrl_band(&sample, t1, t2, alpha, &plan).map(|b| {
                let curve = MrlCurve::new(&fit);
                let mut points = b.grid.clone();
                points.extend(linspace(t1, t2, DENSE_POINTS));
                let mut dist = 0.0f64;
                for &t in &points {
                    let truth = law.mrl(t).expect("checked above");
                    dist = dist.max((curve.eval(t).expect("within support") - truth).abs());
                }
                for &t in b.grid.iter().filter(|&&t| t > t1) {
                    let truth = law.mrl(t).expect("checked above");
                    dist = dist.max((curve.eval_left(t).expect("within support") - truth).abs());
                }
                (dist, dist <= b.quantile_used, b.replicates_dropped)
            }),
            BandSpec::Lorenz { resolution } => lorenz_band(&sample, alpha, &plan, resolution)
                .and_then(|b| {
                    let curve = lorenz(&fit)?;
                    let dist = curve
                        .nodes()
                        .iter()
                        .copied()
                        .chain(linspace(0.0, 1.0, DENSE_POINTS))
                        .map(|p| (curve.eval(p) - law.lorenz(p)).abs())
                        .fold(0.0, f64::max);
                    Ok((dist, dist <= b.quantile_used, b.replicates_dropped))
                }),
            BandSpec::Gini => gini_interval(&sample, alpha, &plan).map(|ci| {
                let truth = law.gini();
                let dist = (ci.estimate - truth).abs();
                (
                    dist,
                    ci.lower <= truth && truth <= ci.upper,
                    ci.replicates_dropped,
                )
            }),
        };
        Ok(match outcome {
            Ok((dist, covered, dropped)) => (Some(dist), covered, dropped),
            // A band that cannot be built covers nothing.
            Err(Error::OutsideSupport(_)) | Err(Error::BootstrapDegenerate { .. }) => {
                (None, false, 0)
            }
            Err(e) => return Err(e),
        })
    });

    let mut outcomes = Vec::with_capacity(reps);
    let (mut covered, mut failed, mut dropped, mut dist_sum) = (0usize, 0usize, 0usize, 0.0);
    for (r, res) in results.into_iter().enumerate() {
        let (dist, hit, drop) = res?;
        covered += usize::from(hit);
        dropped += drop;
        match dist {
            Some(d) => dist_sum += d,
            None => failed += 1,
        }
        outcomes.push(Outcome {
            group: "repetition".into(),
            index: r,
            value: dist,
            pass: Some(hit),
        });
    }
    let coverage = covered as f64 / reps as f64;
    let built = reps - failed;
    let summary = vec![
        SummaryStat {
            name: "coverage".into(),
            value: coverage,
            std_error: Some(binomial_se(coverage, reps)),
            bound: None,
            pass: None,
        },
        SummaryStat::plain("nominal", 1.0 - alpha),
        SummaryStat::plain(
            "mean_sup_distance",
            if built > 0 {
                dist_sum / built as f64
            } else {
                f64::NAN
            },
        ),
        SummaryStat::plain("failed_repetitions", failed as f64),
        SummaryStat::plain("mean_replicates_dropped", dropped as f64 / reps as f64),
    ];
    Ok(ExperimentReport {
        scenario: format!(
            "coverage: model={model:?} n={n} B={replicates} alpha={alpha} band={band:?}"
        ),
        seed,
        replications: reps,
        outcomes,
        summary,
    })
}

/// Right end of the covariance grid: the first time the observed-time
/// survival reaches [`GAMMA_GRID_LEVEL`], or the end of its support.
pub fn gamma_grid_end(model: &DataModel) -> f64 {
    let hi = model.observed_end().min(model.survival.effective_end());
    if model.observed_survival(hi) > GAMMA_GRID_LEVEL {
        return hi;
    }
    let (mut lo, mut hi) = (0.0, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if model.observed_survival(mid) <= GAMMA_GRID_LEVEL {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn surface_on_grid(fit: &SurvivalFit, grid: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let surface = CovarianceSurface::new(fit);
    (
        grid.iter().map(|&t| surface.km().eval(t)).collect(),
        grid.iter().map(|&t| surface.sigma2().eval(t)).collect(),
    )
}

fn sup_distance(a: &(Vec<f64>, Vec<f64>), b: &[Vec<f64>]) -> f64 {
    let (s, sig) = a;
    let mut sup = 0.0f64;
    for i in 0..s.len() {
        for j in 0..s.len() {
            let est = s[i] * s[j] * sig[i.min(j)];
            sup = sup.max((est - b[i][j]).abs());
        }
    }
    sup
}

fn surface_matrix(a: &(Vec<f64>, Vec<f64>)) -> Vec<Vec<f64>> {
    let (s, sig) = a;
    (0..s.len())
        .map(|i| (0..s.len()).map(|j| s[i] * s[j] * sig[i.min(j)]).collect())
        .collect()
}

fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

/// Grid-sup distances of the plug-in covariance surface from the truth and of
/// bootstrap surfaces from the plug-in, for each sample size in `n_list`.
///
/// For each `n`, `replicates` independent samples give the median of
/// `sup |Gamma_hat - Gamma|`; the first of them is resampled `replicates`
/// times to give the median of `sup |Gamma* - Gamma_hat|`.
pub fn gamma_consistency_sweep(
    model: &DataModel,
    n_list: &[usize],
    replicates: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    if n_list.is_empty() {
        return Err(Error::InvalidArgument("n_list must not be empty".into()));
    }
    for &n in n_list {
        check_positive("n", n)?;
    }
    check_positive("replicate count", replicates)?;
    generate(model, 1, seed)?;

    let grid = linspace(0.0, gamma_grid_end(model), GAMMA_GRID_POINTS);
    let truth = model.gamma_grid(&grid)?;

    let mut outcomes = Vec::new();
    let mut summary = Vec::new();
    let (mut hat_medians, mut star_medians) = (Vec::new(), Vec::new());
    for (k, &n) in n_list.iter().enumerate() {
        let child = derive_seed(seed, TAG_SWEEP, k as u64);
        let samples: Vec<ObservedSample> = map_indexed(replicates, |r| {
            generate(model, n, derive_seed(child, TAG_SAMPLE, r as u64)).expect("validated model")
        });
        let hat: Vec<f64> = map_indexed(replicates, |r| {
            sup_distance(&surface_on_grid(&km_fit(&samples[r]), &grid), &truth)
        });
        let base = surface_matrix(&surface_on_grid(&km_fit(&samples[0]), &grid));
        let plan = ResamplePlan::new(derive_seed(child, TAG_BOOT, 0), replicates)?;
        let star: Vec<f64> = Resampler::new(&samples[0], plan)
            .map(|_, boot| sup_distance(&surface_on_grid(boot, &grid), &base));

        for (group, values) in [("hat_vs_truth", &hat), ("star_vs_hat", &star)] {
            outcomes.extend(values.iter().enumerate().map(|(r, &v)| Outcome {
                group: format!("n={n}/{group}"),
                index: r,
                value: Some(v),
                pass: None,
            }));
        }
        let (hm, sm) = (median(&mut hat.clone()), median(&mut star.clone()));
        summary.push(SummaryStat::plain(
            format!("median_hat_vs_truth[n={n}]"),
            hm,
        ));
        summary.push(SummaryStat::plain(format!("median_star_vs_hat[n={n}]"), sm));
        hat_medians.push(hm);
        star_medians.push(sm);
    }
    for (name, medians) in [
        ("hat_vs_truth_decreasing", &hat_medians),
        ("star_vs_hat_decreasing", &star_medians),
    ] {
        let ok = strictly_decreasing(medians);
        summary.push(SummaryStat {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            std_error: None,
            bound: None,
            pass: Some(ok),
        });
    }
    Ok(ExperimentReport {
        scenario: format!(
            "gamma sweep: model={model:?} n={n_list:?} B={replicates} grid=[0, {}] x {}",
            grid[grid.len() - 1],
            GAMMA_GRID_POINTS
        ),
        seed,
        replications: replicates,
        outcomes,
        summary,
    })
}

/// `sup_{t <= T*} S*(t) / S_n(t)` and `inf_{t <= T*} H*(t-) / H_n(t-)`.
fn gill_ratios(original: &SurvivalFit, boot: &SurvivalFit) -> (f64, f64) {
    let end = boot.largest_time();
    let mut sup = 1.0f64;
    for &t in original
        .km()
        .breakpoints()
        .iter()
        .take_while(|&&t| t <= end)
    {
        let (s_boot, s_hat) = (boot.km().eval(t), original.km().eval(t));
        if s_boot > 0.0 {
            sup = sup.max(if s_hat > 0.0 {
                s_boot / s_hat
            } else {
                f64::INFINITY
            });
        }
    }
    let mut inf = 1.0f64;
    for &t in original
        .emp_surv()
        .breakpoints()
        .iter()
        .take_while(|&&t| t <= end)
    {
        let h_boot = boot.emp_surv().eval_left(t).expect("positive time");
        let h_hat = original.emp_surv().eval_left(t).expect("positive time");
        inf = inf.min(h_boot / h_hat);
    }
    (sup, inf)
}

/// Bound on `P(exists t <= T*: H*(t-) < beta H_n(t-))`.
pub fn at_risk_bound(beta: f64) -> f64 {
    std::f64::consts::E / beta * (-1.0 / beta).exp()
}

/// Frequencies over bootstrap replicates of the two uniform ratio events,
/// compared with their probability bounds `beta` and `(e / beta) exp(-1 / beta)`.
/// A bound passes when the frequency is at most the bound plus three binomial
/// standard errors evaluated at the bound.
pub fn gill_bound_check(
    sample: &ObservedSample,
    plan: &ResamplePlan,
    betas: &[f64],
) -> Result<ExperimentReport> {
    if betas.is_empty() {
        return Err(Error::InvalidArgument("beta list must not be empty".into()));
    }
    if let Some(b) = betas.iter().find(|&&b| !(b > 0.0 && b < 1.0)) {
        return Err(Error::InvalidArgument(format!(
            "beta must lie in (0, 1), got {b}"
        )));
    }
    let fit = km_fit(sample);
    let ratios = Resampler::new(sample, *plan).map(|_, boot| gill_ratios(&fit, boot));
    let reps = ratios.len();

    let mut summary = Vec::new();
    for &beta in betas {
        let events = [
            (
                "survival_ratio",
                ratios.iter().filter(|r| r.0 > 1.0 / beta).count(),
                beta,
            ),
            (
                "at_risk_ratio",
                ratios.iter().filter(|r| r.1 < beta).count(),
                at_risk_bound(beta),
            ),
        ];
        for (name, count, bound) in events {
            let freq = count as f64 / reps as f64;
            let sigma = binomial_se(bound.min(1.0), reps);
            summary.push(SummaryStat {
                name: format!("{name}[beta={beta}]"),
                value: freq,
                std_error: Some(binomial_se(freq, reps)),
                bound: Some(bound),
                pass: Some(freq <= bound + 3.0 * sigma),
            });
        }
    }
    let outcomes = ratios
        .iter()
        .enumerate()
        .flat_map(|(b, &(sup, inf))| {
            [
                Outcome {
                    group: "sup_survival_ratio".into(),
                    index: b,
                    value: Some(sup),
                    pass: None,
                },
                Outcome {
                    group: "inf_at_risk_ratio".into(),
                    index: b,
                    value: Some(inf),
                    pass: None,
                },
            ]
        })
        .collect();
    Ok(ExperimentReport {
        scenario: format!("gill bounds: n={} betas={betas:?}", sample.len()),
        seed: plan.seed,
        replications: reps,
        outcomes,
        summary,
    })
}

/// `(sup_s h(s) |Z(s)|, 2 sup_s |int_0^s h dZ|)` over all jump times.
pub fn jump_inequality_sides(h: &StepFunction, z: &StepFunction) -> (f64, f64) {
    let mut points: Vec<f64> = vec![0.0];
    points.extend(h.breakpoints().iter().chain(z.breakpoints()).copied());
    let mut lhs = 0.0f64;
    let mut rhs = 0.0f64;
    for &s in &points {
        lhs = lhs.max(h.eval(s) * z.eval(s).abs());
        rhs = rhs.max(stieltjes_integral(h, z, s).abs());
    }
    (lhs, 2.0 * rhs)
}

const JUMP_TIME_POOL: usize = 24;
const MAX_JUMPS: usize = 20;

/// Step function with up to [`MAX_JUMPS`] jumps on a shared time lattice, so
/// two draws often jump together.
fn random_jump_process<R: Rng>(
    rng: &mut R,
    initial: f64,
    mut next: impl FnMut(&mut R, f64) -> f64,
) -> StepFunction {
    let count = rng.random_range(0..=MAX_JUMPS);
    let mut slots: Vec<usize> = sample_indices(rng, JUMP_TIME_POOL, count).into_vec();
    slots.sort_unstable();
    let times: Vec<f64> = slots.iter().map(|&k| (k + 1) as f64 * 0.5).collect();
    let mut values = Vec::with_capacity(times.len());
    let mut current = initial;
    for _ in 0..times.len() {
        current = next(rng, current);
        values.push(current);
    }
    StepFunction::new(initial, times, values).expect("lattice times are increasing")
}

/// Checks `sup h |Z| <= 2 sup |int h dZ|` on random pairs with `h`
/// non-negative, non-increasing, `h(0) = 1`, and `Z(0) = 0`.
pub fn jump_inequality_check(trials: usize, seed: u64) -> Result<ExperimentReport> {
    check_positive("trial count", trials)?;
    let outcomes: Vec<Outcome> = map_indexed(trials, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, TAG_JUMP, i as u64));
        let h = random_jump_process(&mut rng, 1.0, |r, v| v * r.random::<f64>());
        let z = random_jump_process(&mut rng, 0.0, |r, v| v + r.random_range(-1.0..1.0));
        let (lhs, rhs) = jump_inequality_sides(&h, &z);
        Outcome {
            group: "pair".into(),
            index: i,
            value: Some(lhs - rhs),
            pass: Some(lhs <= rhs + 1e-12 * (1.0 + rhs)),
        }
    });
    let violations = outcomes.iter().filter(|o| o.pass == Some(false)).count();
    Ok(ExperimentReport {
        scenario: format!("jump inequality: {trials} random pairs"),
        seed,
        replications: trials,
        summary: vec![SummaryStat {
            name: "violations".into(),
            value: violations as f64,
            std_error: None,
            bound: Some(0.0),
            pass: Some(violations == 0),
        }],
        outcomes,
    })
}

/// Compares `int_0^s a db` with its integration-by-parts form on random
/// pairs of jump processes.
pub fn integration_by_parts_check(trials: usize, seed: u64) -> Result<ExperimentReport> {
    check_positive("trial count", trials)?;
    let outcomes: Vec<Outcome> = map_indexed(trials, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, TAG_IBP, i as u64));
        let a0 = rng.random_range(-2.0..2.0);
        let b0 = rng.random_range(-2.0..2.0);
        let a = random_jump_process(&mut rng, a0, |r, v| v + r.random_range(-3.0..3.0));
        let b = random_jump_process(&mut rng, b0, |r, v| v + r.random_range(-3.0..3.0));
        let s = rng.random_range(0.0..(JUMP_TIME_POOL as f64 * 0.5 + 1.0));
        let err = (stieltjes_integral(&a, &b, s) - integrate_by_parts(&a, &b, s)).abs();
        Outcome {
            group: "pair".into(),
            index: i,
            value: Some(err),
            pass: Some(err <= IBP_TOLERANCE),
        }
    });
    let max_err = outcomes.iter().filter_map(|o| o.value).fold(0.0, f64::max);
    Ok(ExperimentReport {
        scenario: format!("integration by parts: {trials} random pairs"),
        seed,
        replications: trials,
        summary: vec![SummaryStat {
            name: "max_abs_error".into(),
            value: max_err,
            std_error: None,
            bound: Some(IBP_TOLERANCE),
            pass: Some(max_err <= IBP_TOLERANCE),
        }],
        outcomes,
    })
}
