//! Plug-in variance and covariance estimators of the Kaplan-Meier process,
//! and plug-in diagnostics for the censoring integrability conditions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::SurvivalFit;
use crate::functionals::mrl;
use crate::stepfn::StepFunction;

/// `t -> int_0^t dA_n / H_n(-)`, with `H_n(u-) = Y(u) / n`.
pub fn sigma2_hat(fit: &SurvivalFit) -> StepFunction {
    let n = fit.n() as f64;
    let mut acc = 0.0;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for g in fit.groups().iter().filter(|g| g.events > 0) {
        let y = g.at_risk as f64;
        acc += (g.events as f64 / y) / (y / n);
        times.push(g.time);
        values.push(acc);
    }
    StepFunction::from_sorted(0.0, times, values)
}

/// `Gamma_n(u, v) = S_n(u) sigma_n^2(u ^ v) S_n(v)` for one fit.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSurface {
    km: StepFunction,
    sigma2: StepFunction,
}

impl CovarianceSurface {
    pub fn new(fit: &SurvivalFit) -> Self {
        Self {
            km: fit.km().clone(),
            sigma2: sigma2_hat(fit),
        }
    }

    pub fn sigma2(&self) -> &StepFunction {
        &self.sigma2
    }

    pub fn km(&self) -> &StepFunction {
        &self.km
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
        self.km.eval(lo) * self.sigma2.eval(lo) * self.km.eval(hi)
    }
}

pub fn gamma_hat(fit: &SurvivalFit, u: f64, v: f64) -> f64 {
    CovarianceSurface::new(fit).eval(u, v)
}

/// Plug-in value of `-int_t^tau dS / G(-)^power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensoringDiagnostic {
    pub t: f64,
    pub power: u32,
    pub value: f64,
    /// Jumps of `S_n` where `G_n(u-) = 0`; skipped in `value`. Any such jump
    /// means the condition is likely violated.
    pub zero_denominator_jumps: usize,
}

impl CensoringDiagnostic {
    pub fn zero_denominator(&self) -> bool {
        self.zero_denominator_jumps > 0
    }
}

/// `-sum_{u in (t, T_n]} dS_n(u) / G_n(u-)^power`.
///
/// `power = 1` targets the integrability condition for the Kaplan-Meier
/// process itself, `power = 3` the stronger condition needed by the bootstrap
/// covariance.
pub fn censoring_diagnostic(fit: &SurvivalFit, t: f64, power: u32) -> Result<CensoringDiagnostic> {
    if power == 0 {
        return Err(Error::InvalidArgument(
            "power must be a positive integer".into(),
        ));
    }
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidArgument(format!("t must be >= 0, got {t}")));
    }
    let mut value = 0.0;
    let mut zero_denominator_jumps = 0;
    for jump in fit.km().jumps().filter(|j| j.time > t) {
        let g_left = fit.censor_km().eval_left(jump.time)?;
        if g_left <= 0.0 {
            zero_denominator_jumps += 1;
            continue;
        }
        value -= jump.size() / g_left.powi(power as i32);
    }
    Ok(CensoringDiagnostic {
        t,
        power,
        value,
        zero_denominator_jumps,
    })
}

/// Plug-in covariance of the limiting mean-residual-lifetime process at
/// `(r, s)`:
/// `int int_{r v s}^T Gamma_n(u, v) du dv / (S_n(r) S_n(s)) - sigma_n^2(r v s) g_n(r) g_n(s)`.
///
/// The double integral is exact: `Gamma_n` is constant on every rectangle of
/// the breakpoint grid, including the diagonal cells.
pub fn mrl_asymptotic_covariance(fit: &SurvivalFit, r: f64, s: f64) -> Result<f64> {
    let km = fit.km();
    let (sr, ss) = (km.eval(r), km.eval(s));
    if sr <= 0.0 || ss <= 0.0 {
        return Err(Error::OutsideSupport(
            "estimate undefined beyond support of fit".into(),
        ));
    }
    let surface = CovarianceSurface::new(fit);
    let lo = r.max(s);
    let hi = fit.largest_time().max(lo);

    // By symmetry the square is twice the lower triangle u < v:
    // 2 int_lo^hi S(v) [int_lo^v S(u) sigma2(u) du] dv.
    let mut grid = vec![lo];
    grid.extend(
        km.breakpoints()
            .iter()
            .copied()
            .filter(|&b| b > lo && b < hi),
    );
    if hi > lo {
        grid.push(hi);
    }
    let mut inner = 0.0;
    let mut double = 0.0;
    for w in grid.windows(2) {
        let len = w[1] - w[0];
        let s_level = km.eval(w[0]);
        let sig = surface.sigma2().eval(w[0]);
        // Within a cell the inner integral grows linearly.
        let inner_next = inner + s_level * sig * len;
        double += s_level * 0.5 * (inner + inner_next) * len;
        inner = inner_next;
    }
    let double = 2.0 * double / (sr * ss);
    let g_r = mrl(fit, r)?;
    let g_s = mrl(fit, s)?;
    Ok(double - surface.sigma2().eval(lo) * g_r * g_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{km_fit, ObservedSample, Record};
    use proptest::prelude::*;

    fn three() -> SurvivalFit {
        km_fit(
            &ObservedSample::new(vec![
                Record::event(1.0),
                Record::censored(2.0),
                Record::event(3.0),
            ])
            .unwrap(),
        )
    }

    #[test]
    fn sigma2_examples() {
        let s2 = sigma2_hat(&three());
        assert!((s2.eval(1.5) - 1.0 / 3.0).abs() < 1e-15);
        assert!((s2.eval(3.0) - 10.0 / 3.0).abs() < 1e-14);
        assert_eq!(s2.eval(0.0), 0.0);

        let none = km_fit(&ObservedSample::from_pairs(&[1.0, 2.0], &[false, false]).unwrap());
        assert!(sigma2_hat(&none).breakpoints().is_empty());
        assert_eq!(sigma2_hat(&none).eval(10.0), 0.0);

        let single = km_fit(&ObservedSample::new(vec![Record::event(5.0)]).unwrap());
        assert_eq!(sigma2_hat(&single).eval(5.0), 1.0);
        assert_eq!(sigma2_hat(&single).eval(4.0), 0.0);
    }

    #[test]
    fn gamma_examples() {
        let fit = three();
        assert!((gamma_hat(&fit, 1.5, 2.5) - 4.0 / 27.0).abs() < 1e-15);
        assert_eq!(gamma_hat(&fit, 0.0, 2.0), 0.0);
        assert_eq!(gamma_hat(&fit, 3.5, 4.0), 0.0);
    }

    #[test]
    fn censoring_diagnostic_examples() {
        let d = censoring_diagnostic(&three(), 0.0, 1).unwrap();
        assert!((d.value - 5.0 / 3.0).abs() < 1e-14);
        assert!(!d.zero_denominator());
        assert!(censoring_diagnostic(&three(), 0.0, 0).is_err());

        let uncensored =
            km_fit(&ObservedSample::from_pairs(&[1.0, 2.0, 4.0, 7.0], &[true; 4]).unwrap());
        for t in [0.0, 1.5, 3.0, 7.0] {
            let d = censoring_diagnostic(&uncensored, t, 1).unwrap();
            let expected = uncensored.km().eval(t) - uncensored.km().eval(7.0);
            assert!((d.value - expected).abs() < 1e-15);
            assert!(d.value <= 1.0);
        }
    }

    #[test]
    fn mrl_covariance_degenerate_cases() {
        // Last record censored: S_n(T_n) > 0 and the integration range is empty.
        let fit =
            km_fit(&ObservedSample::from_pairs(&[1.0, 2.0, 3.0], &[true, true, false]).unwrap());
        assert_eq!(mrl_asymptotic_covariance(&fit, 3.0, 3.0).unwrap(), 0.0);

        let single = km_fit(&ObservedSample::new(vec![Record::event(5.0)]).unwrap());
        assert_eq!(mrl_asymptotic_covariance(&single, 0.0, 0.0).unwrap(), 0.0);
        assert!(mrl_asymptotic_covariance(&single, 5.0, 0.0).is_err());
    }

    /// Independent oracle: midpoint sum over every cell of the breakpoint grid.
    fn mrl_cov_oracle(fit: &SurvivalFit, r: f64, s: f64) -> f64 {
        let km = fit.km();
        let lo = r.max(s);
        let hi = fit.largest_time();
        let mut pts: Vec<f64> = vec![lo];
        for &b in km.breakpoints() {
            if b > lo && b < hi {
                pts.push(b);
            }
        }
        pts.push(hi);
        let mut total = 0.0;
        for a in pts.windows(2) {
            for b in pts.windows(2) {
                let (mu, mv) = (0.5 * (a[0] + a[1]), 0.5 * (b[0] + b[1]));
                // sigma2(u ^ v) on a diagonal cell is the cell's own level.
                let min_left = a[0].min(b[0]);
                let sig = sigma2_hat(fit).eval(min_left);
                total += km.eval(mu) * km.eval(mv) * sig * (a[1] - a[0]) * (b[1] - b[0]);
            }
        }
        let sr = km.eval(r);
        let ss = km.eval(s);
        let area = |t: f64| crate::stepfn::lebesgue_integral(km, t, hi).unwrap();
        total / (sr * ss) - sigma2_hat(fit).eval(lo) * (area(r) / sr) * (area(s) / ss)
    }

    fn small_sample() -> impl Strategy<Value = ObservedSample> {
        prop::collection::btree_map(1u32..500, prop::bool::weighted(0.7), 2..25).prop_map(|m| {
            let (t, e): (Vec<f64>, Vec<bool>) =
                m.into_iter().map(|(t, e)| (t as f64 / 50.0, e)).unzip();
            ObservedSample::from_pairs(&t, &e).unwrap()
        })
    }

    proptest! {
        #[test]
        fn mrl_covariance_matches_cell_oracle(sample in small_sample(), fr in 0.0f64..1.0, fs in 0.0f64..1.0) {
            let fit = km_fit(&sample);
            // Probe inside the region where S_n > 0.
            let last_pos = fit.groups().iter().rev()
                .map(|g| g.time).find(|&t| fit.km().eval(t) > 0.0).unwrap_or(0.0);
            let (r, s) = (fr * last_pos, fs * last_pos);
            let got = mrl_asymptotic_covariance(&fit, r, s).unwrap();
            let want = mrl_cov_oracle(&fit, r, s);
            prop_assert!((got - want).abs() <= 1e-6 * (1.0 + want.abs()), "{} vs {}", got, want);
        }

        #[test]
        fn gamma_symmetric_and_cauchy_schwarz(sample in small_sample()) {
            let fit = km_fit(&sample);
            let surf = CovarianceSurface::new(&fit);
            let pts: Vec<f64> = std::iter::once(0.0).chain(fit.groups().iter().map(|g| g.time)).collect();
            for &u in &pts {
                prop_assert!(surf.eval(u, u) >= 0.0);
                for &v in &pts {
                    prop_assert_eq!(surf.eval(u, v), surf.eval(v, u));
                    let g = surf.eval(u, v);
                    prop_assert!(g * g <= surf.eval(u, u) * surf.eval(v, v) * (1.0 + 1e-12) + 1e-300);
                }
            }
            let s2 = surf.sigma2();
            prop_assert_eq!(s2.eval(0.0), 0.0);
            prop_assert!(s2.values().windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn diagnostic_non_increasing_in_t(sample in small_sample()) {
            let fit = km_fit(&sample);
            let mut prev = f64::INFINITY;
            for k in 0..=100 {
                let t = k as f64 * 0.1;
                let v = censoring_diagnostic(&fit, t, 1).unwrap().value;
                prop_assert!(v <= prev + 1e-12);
                prev = v;
            }
        }
    }
}
