//! Plug-in functionals of a Kaplan-Meier fit: mean residual lifetime, mean,
//! Lorenz curve and Gini index.
//!
//! Tail convention: when the largest observation is censored the fitted
//! survival curve stays positive after `T_n`. The residual mass `S_n(T_n)`
//! is then placed as an atom at `T_n`, so the mean is `int_0^{T_n} S_n` and
//! the Lorenz curve reaches 1 at `p = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::SurvivalFit;
use crate::stepfn::{PiecewiseLinear, StepFunction};

/// `t -> (1 / S_n(t)) int_t^{T_n} S_n(u) du` on `{S_n > 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MrlCurve {
    km: StepFunction,
    cumulative: PiecewiseLinear,
    upper: f64,
}

impl MrlCurve {
    pub fn new(fit: &SurvivalFit) -> Self {
        let upper = fit.largest_time();
        Self {
            km: fit.km().clone(),
            cumulative: fit.km().antiderivative(upper),
            upper,
        }
    }

    /// Largest observation time, the upper integration limit.
    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn km(&self) -> &StepFunction {
        &self.km
    }

    /// `int_t^{T_n} S_n(u) du`, zero for `t >= T_n`.
    pub fn tail_area(&self, t: f64) -> f64 {
        if t >= self.upper {
            0.0
        } else {
            self.cumulative.eval(self.upper) - self.cumulative.eval(t)
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let s = self.km.eval(t);
        if s <= 0.0 {
            return Err(Error::OutsideSupport(format!(
                "MRL undefined beyond support (S_n({t}) = 0)"
            )));
        }
        Ok(self.tail_area(t) / s)
    }

    /// Left limit `g_n(t-)`; the tail area is continuous so only `S_n` jumps.
    pub fn eval_left(&self, t: f64) -> Result<f64> {
        let s = self.km.eval_left(t)?;
        if s <= 0.0 {
            return Err(Error::OutsideSupport(format!(
                "MRL undefined beyond support (S_n({t}-) = 0)"
            )));
        }
        Ok(self.tail_area(t) / s)
    }

    /// Supremum of the domain `{t : S_n(t) > 0}`.
    pub fn domain_end(&self) -> f64 {
        self.km
            .jumps()
            .find(|j| j.after <= 0.0)
            .map_or(f64::INFINITY, |j| j.time)
    }
}

pub fn mrl(fit: &SurvivalFit, t: f64) -> Result<f64> {
    MrlCurve::new(fit).eval(t)
}

/// Kaplan-Meier mean `int_0^{T_n} S_n(u) du`.
pub fn mean(fit: &SurvivalFit) -> f64 {
    MrlCurve::new(fit).tail_area(0.0)
}

/// True when the tail convention moved residual mass to `T_n`.
pub fn tail_adjusted(fit: &SurvivalFit) -> bool {
    fit.km().final_value() > 0.0
}

/// The probability atoms of the fitted lifetime distribution, including the
/// tail atom at `T_n` when the fit does not reach zero.
pub fn atoms(fit: &SurvivalFit) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = fit
        .km()
        .jumps()
        .map(|j| (j.time, -j.size()))
        .filter(|&(_, m)| m > 0.0)
        .collect();
    let residual = fit.km().final_value();
    if residual > 0.0 {
        let t = fit.largest_time();
        match out.last_mut() {
            Some(last) if last.0 == t => last.1 += residual,
            _ => out.push((t, residual)),
        }
    }
    out
}

/// `p -> (1 / mu_n) int_0^p F_n^{-1}(u) du`, exact and piecewise linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LorenzCurve {
    mean: f64,
    curve: PiecewiseLinear,
}

impl LorenzCurve {
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn curve(&self) -> &PiecewiseLinear {
        &self.curve
    }

    pub fn eval(&self, p: f64) -> f64 {
        self.curve.eval(p)
    }

    /// Cumulative probability levels at the nodes.
    pub fn nodes(&self) -> &[f64] {
        self.curve.breakpoints()
    }

    pub fn integral(&self) -> f64 {
        self.curve.integral()
    }
}

pub fn lorenz(fit: &SurvivalFit) -> Result<LorenzCurve> {
    let atoms = atoms(fit);
    // The quantile function is the atom location on (p_{k-1}, p_k].
    let total: f64 = atoms.iter().map(|&(t, m)| t * m).sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::InvalidArgument(
            "Lorenz curve needs a positive mean".into(),
        ));
    }
    let mut levels = Vec::with_capacity(atoms.len() + 1);
    let mut shares = Vec::with_capacity(atoms.len() + 1);
    levels.push(0.0);
    shares.push(0.0);
    let (mut p, mut area) = (0.0, 0.0);
    for (k, &(t, m)) in atoms.iter().enumerate() {
        p += m;
        area += t * m;
        if k + 1 == atoms.len() {
            // Total mass is one by construction; pin the end node.
            p = 1.0;
            area = total;
        }
        if p <= *levels.last().expect("non-empty") {
            continue;
        }
        levels.push(p);
        shares.push(area / total);
    }
    if *levels.last().expect("non-empty") < 1.0 {
        levels.push(1.0);
        shares.push(1.0);
    }
    Ok(LorenzCurve {
        mean: mean(fit),
        curve: PiecewiseLinear::from_nodes(levels, shares),
    })
}

/// `1 - 2 int_0^1 L_n(u) du`.
pub fn gini(fit: &SurvivalFit) -> Result<f64> {
    Ok(gini_of(&lorenz(fit)?))
}

pub fn gini_of(curve: &LorenzCurve) -> f64 {
    (1.0 - 2.0 * curve.integral()).clamp(0.0, 1.0)
}
