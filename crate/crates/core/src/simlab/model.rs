//! Lifetime and censoring laws with known truth.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::quadrature::integrate;
use crate::error::{Error, Result};
use crate::estimators::{ObservedSample, Record};

const QUAD_TOL: f64 = 1e-8;
/// Survival level beyond which an unbounded support is truncated for quadrature.
const TAIL_CUTOFF: f64 = 1e-17;

/// A distribution on `(0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum Law {
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
    Weibull { shape: f64, scale: f64 },
    PointMass { c: f64 },
}

impl Law {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Law::Uniform { a, b } => a >= 0.0 && a < b && b.is_finite(),
            Law::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            Law::Weibull { shape, scale } => {
                shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite()
            }
            Law::PointMass { c } => c > 0.0 && c.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "invalid law parameters: {self:?}"
            )))
        }
    }

    /// `P(X > t)`.
    pub fn survival(&self, t: f64) -> f64 {
        match *self {
            Law::Uniform { a, b } => ((b - t) / (b - a)).clamp(0.0, 1.0),
            Law::Exponential { rate } => (-rate * t.max(0.0)).exp(),
            Law::Weibull { shape, scale } => (-(t.max(0.0) / scale).powf(shape)).exp(),
            Law::PointMass { c } => {
                if t < c {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `P(X >= t)`.
    pub fn survival_left(&self, t: f64) -> f64 {
        match *self {
            Law::PointMass { c } => {
                if t <= c {
                    1.0
                } else {
                    0.0
                }
            }
            _ => self.survival(t),
        }
    }

    /// Lebesgue density, `None` for atoms.
    pub fn density(&self, t: f64) -> Option<f64> {
        match *self {
            Law::Uniform { a, b } => Some(if t > a && t < b { 1.0 / (b - a) } else { 0.0 }),
            Law::Exponential { rate } => Some(if t >= 0.0 {
                rate * (-rate * t).exp()
            } else {
                0.0
            }),
            Law::Weibull { shape, scale } => Some(if t > 0.0 {
                let z = t / scale;
                shape / scale * z.powf(shape - 1.0) * (-z.powf(shape)).exp()
            } else {
                0.0
            }),
            Law::PointMass { .. } => None,
        }
    }

    /// Inverse of the distribution function at `p in (0, 1)`.
    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            Law::Uniform { a, b } => a + (b - a) * p,
            Law::Exponential { rate } => -(-p).ln_1p() / rate,
            Law::Weibull { shape, scale } => scale * (-(-p).ln_1p()).powf(1.0 / shape),
            Law::PointMass { c } => c,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        self.quantile(u)
    }

    /// Lower end of the support.
    pub fn support_start(&self) -> f64 {
        match *self {
            Law::Uniform { a, .. } => a,
            Law::PointMass { c } => c,
            _ => 0.0,
        }
    }

    /// Upper end of the support, infinite for unbounded laws.
    pub fn support_end(&self) -> f64 {
        match *self {
            Law::Uniform { b, .. } => b,
            Law::PointMass { c } => c,
            _ => f64::INFINITY,
        }
    }

    /// Finite point beyond which the survival function is negligible.
    pub fn effective_end(&self) -> f64 {
        match *self {
            Law::Exponential { rate } => -TAIL_CUTOFF.ln() / rate,
            Law::Weibull { shape, scale } => scale * (-TAIL_CUTOFF.ln()).powf(1.0 / shape),
            _ => self.support_end(),
        }
    }

    /// `int_t^inf S(u) du`.
    pub fn tail_area(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match *self {
            Law::Uniform { a, b } => {
                if t >= b {
                    0.0
                } else if t <= a {
                    (a - t) + 0.5 * (b - a)
                } else {
                    0.5 * (b - t) * (b - t) / (b - a)
                }
            }
            Law::Exponential { rate } => (-rate * t).exp() / rate,
            Law::Weibull { .. } => {
                let end = self.effective_end();
                if t >= end {
                    0.0
                } else {
                    integrate(&|u| self.survival(u), t, end, QUAD_TOL * 1e-3)
                }
            }
            Law::PointMass { c } => (c - t).max(0.0),
        }
    }

    pub fn mean(&self) -> f64 {
        self.tail_area(0.0)
    }

    /// Mean residual lifetime `E[X - t | X > t]`.
    pub fn mrl(&self, t: f64) -> Option<f64> {
        let s = self.survival(t);
        match *self {
            Law::Uniform { a, b } if t < b => Some(if t <= a {
                (a - t) + 0.5 * (b - a)
            } else {
                0.5 * (b - t)
            }),
            Law::Exponential { rate } => Some(1.0 / rate),
            _ if s > 0.0 => Some(self.tail_area(t) / s),
            _ => None,
        }
    }

    /// Lorenz curve `(1 / mu) int_0^p F^{-1}(u) du`.
    pub fn lorenz(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match *self {
            Law::Uniform { a, b } => (a * p + 0.5 * (b - a) * p * p) / (0.5 * (a + b)),
            Law::Exponential { .. } => {
                if p >= 1.0 {
                    1.0
                } else {
                    p + (1.0 - p) * (1.0 - p).ln()
                }
            }
            Law::PointMass { .. } => p,
            Law::Weibull { .. } => {
                if p >= 1.0 {
                    return 1.0;
                }
                // Partial first moment in the time domain avoids the quantile singularity.
                let upper = self.quantile(p);
                let partial = integrate(
                    &|t| t * self.density(t).unwrap_or(0.0),
                    0.0,
                    upper,
                    QUAD_TOL * 1e-3,
                );
                partial / self.mean()
            }
        }
    }

    pub fn gini(&self) -> f64 {
        match *self {
            Law::Uniform { a, b } => 1.0 - (a + (b - a) / 3.0) / (0.5 * (a + b)),
            Law::Exponential { .. } => 0.5,
            Law::Weibull { shape, .. } => 1.0 - 2f64.powf(-1.0 / shape),
            Law::PointMass { .. } => 0.0,
        }
    }
}

/// Independent lifetime and censoring laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataModel {
    pub survival: Law,
    /// `None` means no censoring.
    pub censoring: Option<Law>,
}

impl DataModel {
    pub fn new(survival: Law, censoring: Option<Law>) -> Result<Self> {
        survival.validate()?;
        if let Some(c) = censoring {
            c.validate()?;
        }
        Ok(Self {
            survival,
            censoring,
        })
    }

    pub fn uncensored(survival: Law) -> Result<Self> {
        Self::new(survival, None)
    }

    /// `G(t) = P(C > t)`.
    pub fn censor_survival(&self, t: f64) -> f64 {
        self.censoring.map_or(1.0, |c| c.survival(t))
    }

    /// `G(t-) = P(C >= t)`.
    pub fn censor_survival_left(&self, t: f64) -> f64 {
        self.censoring.map_or(1.0, |c| c.survival_left(t))
    }

    /// `H(t) = S(t) G(t)`, survival function of the observed times.
    pub fn observed_survival(&self, t: f64) -> f64 {
        self.survival.survival(t) * self.censor_survival(t)
    }

    /// Upper end of the support of the observed times.
    pub fn observed_end(&self) -> f64 {
        let c_end = self.censoring.map_or(f64::INFINITY, |c| c.support_end());
        self.survival.support_end().min(c_end)
    }

    /// `P(T <= C)`.
    pub fn event_probability(&self) -> f64 {
        match self.survival {
            Law::PointMass { c } => self.censor_survival_left(c),
            law => {
                let end = law.effective_end();
                let start = law.support_start();
                integrate(
                    &|t| law.density(t).unwrap_or(0.0) * self.censor_survival_left(t),
                    start,
                    end,
                    QUAD_TOL,
                )
            }
        }
    }

    /// `-int dS / G(-)^power`; infinite when `G` vanishes on the lifetime support.
    pub fn condition_integral(&self, power: u32) -> Result<f64> {
        let law = self.survival;
        if let Law::PointMass { c } = law {
            let g = self.censor_survival_left(c);
            return Ok(if g > 0.0 {
                g.powi(-(power as i32))
            } else {
                f64::INFINITY
            });
        }
        let (start, end) = (law.support_start(), law.effective_end());
        let c_end = self.censoring.map_or(f64::INFINITY, |c| c.support_end());
        if c_end < law.support_end() {
            return Ok(f64::INFINITY);
        }
        Ok(integrate(
            &|t| law.density(t).unwrap_or(0.0) / self.censor_survival_left(t).powi(power as i32),
            start,
            end,
            QUAD_TOL,
        ))
    }

    /// `sigma^2(t) = int_0^t dA / H(-)` by quadrature.
    pub fn sigma2(&self, t: f64) -> Result<f64> {
        Ok(self.sigma2_grid(&[t])?[0])
    }

    /// `sigma^2` at sorted points, accumulated piece by piece.
    pub fn sigma2_grid(&self, points: &[f64]) -> Result<Vec<f64>> {
        let law = self.survival;
        if let Law::PointMass { c } = law {
            // The only hazard mass sits at c, where H(c-) = G(c-).
            let jump = 1.0 / self.censor_survival_left(c);
            return Ok(points
                .iter()
                .map(|&t| if t >= c { jump } else { 0.0 })
                .collect());
        }
        let integrand = |u: f64| {
            let s = law.survival(u);
            let g = self.censor_survival_left(u);
            let f = law.density(u).unwrap_or(0.0);
            if f == 0.0 {
                0.0
            } else {
                f / (s * s * g)
            }
        };
        let end = self.observed_end();
        let mut out = Vec::with_capacity(points.len());
        let (mut acc, mut cursor) = (0.0, 0.0);
        for &t in points {
            if t >= end {
                out.push(f64::INFINITY);
                continue;
            }
            if t > cursor {
                acc += integrate(&integrand, cursor, t, QUAD_TOL);
                cursor = t;
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// True covariance `S(u) S(v) sigma^2(u ^ v)` on a sorted grid.
    pub fn gamma_grid(&self, grid: &[f64]) -> Result<Vec<Vec<f64>>> {
        let sig = self.sigma2_grid(grid)?;
        let surv: Vec<f64> = grid.iter().map(|&t| self.survival.survival(t)).collect();
        Ok((0..grid.len())
            .map(|i| {
                (0..grid.len())
                    .map(|j| {
                        let s = surv[i] * surv[j];
                        if s == 0.0 {
                            0.0
                        } else {
                            s * sig[i.min(j)]
                        }
                    })
                    .collect()
            })
            .collect())
    }
}

/// `n` i.i.d. observations `(min(T, C), 1{T <= C})`.
pub fn generate(model: &DataModel, n: usize, seed: u64) -> Result<ObservedSample> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    model.survival.validate()?;
    if let Some(c) = model.censoring {
        c.validate()?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = (0..n)
        .map(|_| {
            let t = model.survival.sample(&mut rng);
            match model.censoring {
                Some(law) => {
                    let c = law.sample(&mut rng);
                    if t <= c {
                        Record::event(t)
                    } else {
                        Record::censored(c)
                    }
                }
                None => Record::event(t),
            }
        })
        .collect();
    ObservedSample::new(records)
}
