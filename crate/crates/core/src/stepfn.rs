//! Right-continuous step functions and their piecewise-linear antiderivatives.
//!
//! Every fitted estimator in this crate is a [`StepFunction`] on `[0, inf)`.
//! Breakpoints are compared with exact floating-point equality: bootstrap
//! resamples reuse the original observation times verbatim, so ties are exact.
//!
//! The Stieltjes integral `int_0^s a db` sums `a(t) * (b(t) - b(t-))` over the
//! discontinuities of `b` in `(0, s]`, with the integrand taken at the jump.
//! Callers needing the predictable version pass a left-limit closure to
//! [`stieltjes_sum`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A right-continuous piecewise-constant function on `[0, inf)`.
///
/// Takes `initial_value` on `[0, breakpoints[0])` and `values[k]` on
/// `[breakpoints[k], breakpoints[k + 1])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    initial_value: f64,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

/// One breakpoint of a step function with the values on either side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub time: f64,
    pub before: f64,
    pub after: f64,
}

impl Jump {
    #[inline]
    pub fn size(&self) -> f64 {
        self.after - self.before
    }
}

fn check_increasing(breakpoints: &[f64]) -> Result<()> {
    if breakpoints.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidStepFunction(
            "breakpoints must be finite and >= 0".into(),
        ));
    }
    if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidStepFunction(
            "breakpoints must be strictly increasing".into(),
        ));
    }
    Ok(())
}

impl StepFunction {
    pub fn new(initial_value: f64, breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() {
            return Err(Error::InvalidStepFunction(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        check_increasing(&breakpoints)?;
        if !initial_value.is_finite() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidStepFunction("values must be finite".into()));
        }
        Ok(Self {
            initial_value,
            breakpoints,
            values,
        })
    }

    /// Builder used by the estimators, whose output is valid by construction.
    pub(crate) fn from_sorted(initial_value: f64, breakpoints: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert!(check_increasing(&breakpoints).is_ok());
        debug_assert_eq!(breakpoints.len(), values.len());
        Self {
            initial_value,
            breakpoints,
            values,
        }
    }

    pub fn constant(value: f64) -> Self {
        Self {
            initial_value: value,
            breakpoints: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn initial_value(&self) -> f64 {
        self.initial_value
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value after the last breakpoint.
    pub fn final_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(self.initial_value)
    }

    /// Value immediately before breakpoint `k`.
    #[inline]
    fn before(&self, k: usize) -> f64 {
        if k == 0 {
            self.initial_value
        } else {
            self.values[k - 1]
        }
    }

    /// Right-continuous evaluation `f(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&b| b <= t);
        self.before(k)
    }

    /// Left limit `f(t-)`, defined for `t > 0`.
    pub fn eval_left(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "left limit requires t > 0, got {t}"
            )));
        }
        let k = self.breakpoints.partition_point(|&b| b < t);
        Ok(self.before(k))
    }

    pub fn jumps(&self) -> impl Iterator<Item = Jump> + '_ {
        self.breakpoints.iter().enumerate().map(|(k, &time)| Jump {
            time,
            before: self.before(k),
            after: self.values[k],
        })
    }

    /// Applies `op` to every value, keeping the breakpoints.
    pub fn map_values(&self, op: impl Fn(f64) -> f64) -> Self {
        Self {
            initial_value: op(self.initial_value),
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|&v| op(v)).collect(),
        }
    }

    /// `t -> int_0^t f(u) du` on `[0, upper]`, exact.
    pub fn antiderivative(&self, upper: f64) -> PiecewiseLinear {
        let upper = upper.max(0.0);
        let mut nodes = vec![0.0];
        nodes.extend(
            self.breakpoints
                .iter()
                .copied()
                .filter(|&b| b > 0.0 && b < upper),
        );
        if upper > 0.0 {
            nodes.push(upper);
        }
        let mut acc = 0.0;
        let mut node_values = Vec::with_capacity(nodes.len());
        node_values.push(0.0);
        for w in nodes.windows(2) {
            acc += self.eval(w[0]) * (w[1] - w[0]);
            node_values.push(acc);
        }
        PiecewiseLinear {
            breakpoints: nodes,
            node_values,
        }
    }
}

/// `sum a(t) * db(t)` over the jumps of `b` in `(0, s]`, with `integrand(t)`
/// supplying the integrand at each jump time.
pub fn stieltjes_sum(b: &StepFunction, s: f64, integrand: impl Fn(f64) -> f64) -> f64 {
    b.jumps()
        .take_while(|j| j.time <= s)
        .filter(|j| j.time > 0.0)
        .map(|j| integrand(j.time) * j.size())
        .sum()
}

/// `int_0^s a db` with the integrand evaluated at each jump of `b`.
pub fn stieltjes_integral(a: &StepFunction, b: &StepFunction, s: f64) -> f64 {
    stieltjes_sum(b, s, |t| a.eval(t))
}

/// `a(s) b(s) - a(0) b(0) - int_0^s b(t-) da(t)`, the integration-by-parts
/// form of `int_0^s a db`.
pub fn integrate_by_parts(a: &StepFunction, b: &StepFunction, s: f64) -> f64 {
    let boundary = a.eval(s) * b.eval(s) - a.eval(0.0) * b.eval(0.0);
    boundary - stieltjes_sum(a, s, |t| b.eval_left(t).expect("jump times are positive"))
}

/// Exact `int_lo^hi f(u) du`.
pub fn lebesgue_integral(f: &StepFunction, lo: f64, hi: f64) -> Result<f64> {
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::InvalidArgument(format!(
            "integration bounds out of order: [{lo}, {hi}]"
        )));
    }
    let start = f.breakpoints.partition_point(|&b| b <= lo);
    let mut cursor = lo;
    let mut level = f.before(start);
    let mut area = 0.0;
    for k in start..f.breakpoints.len() {
        let b = f.breakpoints[k];
        if b >= hi {
            break;
        }
        area += level * (b - cursor);
        cursor = b;
        level = f.values[k];
    }
    Ok(area + level * (hi - cursor))
}

/// Left-continuous generalized inverse `inf{u >= 0 : F(u) >= p}` of a
/// non-decreasing step function.
pub fn generalized_inverse(cdf: &StepFunction, p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "level must be > 0, got {p}"
        )));
    }
    if cdf.initial_value >= p {
        return Ok(0.0);
    }
    let k = cdf.values.partition_point(|&v| v < p);
    cdf.breakpoints
        .get(k)
        .copied()
        .ok_or(Error::MassDeficit { level: p })
}

/// A continuous piecewise-linear function given by its nodes; constant
/// beyond the first and last node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    breakpoints: Vec<f64>,
    node_values: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(breakpoints: Vec<f64>, node_values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != node_values.len() {
            return Err(Error::InvalidStepFunction(
                "piecewise-linear function needs matching, non-empty nodes".into(),
            ));
        }
        if breakpoints.iter().any(|t| !t.is_finite())
            || breakpoints.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidStepFunction(
                "nodes must be finite and strictly increasing".into(),
            ));
        }
        if node_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidStepFunction(
                "node values must be finite".into(),
            ));
        }
        Ok(Self {
            breakpoints,
            node_values,
        })
    }

    pub(crate) fn from_nodes(breakpoints: Vec<f64>, node_values: Vec<f64>) -> Self {
        debug_assert!(breakpoints.windows(2).all(|w| w[0] < w[1]));
        Self {
            breakpoints,
            node_values,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn node_values(&self) -> &[f64] {
        &self.node_values
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&b| b <= x);
        if k == 0 {
            return self.node_values[0];
        }
        if k == self.breakpoints.len() {
            return self.node_values[k - 1];
        }
        let (x0, x1) = (self.breakpoints[k - 1], self.breakpoints[k]);
        let (y0, y1) = (self.node_values[k - 1], self.node_values[k]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Slope of each segment between consecutive nodes.
    pub fn slopes(&self) -> Vec<f64> {
        self.breakpoints
            .windows(2)
            .zip(self.node_values.windows(2))
            .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
            .collect()
    }

    /// Exact integral over the node range.
    pub fn integral(&self) -> f64 {
        self.breakpoints
            .windows(2)
            .zip(self.node_values.windows(2))
            .map(|(x, y)| 0.5 * (y[0] + y[1]) * (x[1] - x[0]))
            .sum()
    }
}
