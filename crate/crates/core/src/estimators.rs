//! Kaplan-Meier, Nelson-Aalen, censoring Kaplan-Meier and empirical survival
//! fits for right-censored samples.
//!
//! At tied times events are processed before censorings. Tied events are
//! aggregated into a single factor `1 - d / Y`, which bootstrap resamples
//! rely on since they always contain exact ties.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stepfn::StepFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Event,
    Censored,
}

impl Status {
    #[inline]
    pub fn is_event(self) -> bool {
        matches!(self, Status::Event)
    }
}

/// One observation `(min(T, C), 1{T <= C})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub time: f64,
    pub status: Status,
}

impl Record {
    pub fn event(time: f64) -> Self {
        Self {
            time,
            status: Status::Event,
        }
    }

    pub fn censored(time: f64) -> Self {
        Self {
            time,
            status: Status::Censored,
        }
    }
}

/// Events sort before censorings at equal times.
fn record_order(a: &Record, b: &Record) -> Ordering {
    a.time
        .total_cmp(&b.time)
        .then_with(|| b.status.is_event().cmp(&a.status.is_event()))
}

/// A validated right-censored sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedSample {
    records: Vec<Record>,
}

impl ObservedSample {
    pub fn new(records: Vec<Record>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InvalidSample("sample is empty".into()));
        }
        if let Some((i, r)) = records
            .iter()
            .enumerate()
            .find(|(_, r)| !(r.time.is_finite() && r.time > 0.0))
        {
            return Err(Error::InvalidSample(format!(
                "record {i}: times must be strictly positive and finite, got {}",
                r.time
            )));
        }
        Ok(Self { records })
    }

    /// Convenience constructor from parallel slices.
    pub fn from_pairs(times: &[f64], events: &[bool]) -> Result<Self> {
        if times.len() != events.len() {
            return Err(Error::InvalidSample(format!(
                "times/events length mismatch: {} vs {}",
                times.len(),
                events.len()
            )));
        }
        Self::new(
            times
                .iter()
                .zip(events)
                .map(|(&time, &e)| {
                    if e {
                        Record::event(time)
                    } else {
                        Record::censored(time)
                    }
                })
                .collect(),
        )
    }

    pub(crate) fn from_valid(records: Vec<Record>) -> Self {
        debug_assert!(!records.is_empty());
        Self { records }
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn event_count(&self) -> usize {
        self.records.iter().filter(|r| r.status.is_event()).count()
    }

    /// Number of records whose time equals that of an earlier record.
    pub fn duplicate_time_count(&self) -> usize {
        let mut times: Vec<f64> = self.records.iter().map(|r| r.time).collect();
        times.sort_by(f64::total_cmp);
        times.windows(2).filter(|w| w[0] == w[1]).count()
    }

    /// Rescales every time by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        Self::new(
            self.records
                .iter()
                .map(|r| Record {
                    time: r.time * factor,
                    status: r.status,
                })
                .collect(),
        )
    }
}

/// Stable sort by time with events ordered before censorings at tied times.
pub fn resolve_ties(sample: &ObservedSample) -> ObservedSample {
    let mut records = sample.records.clone();
    records.sort_by(record_order);
    ObservedSample { records }
}

/// Counts at one distinct observation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGroup {
    pub time: f64,
    /// `Y(t) = #{i : X_i >= t}`.
    pub at_risk: usize,
    pub events: usize,
    pub censored: usize,
}

/// Jointly fitted estimators of one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalFit {
    km: StepFunction,
    na: StepFunction,
    censor_km: StepFunction,
    emp_surv: StepFunction,
    /// Right-continuous `#{i : X_i > t}`; its left limit is the at-risk count.
    at_risk: StepFunction,
    groups: Vec<TimeGroup>,
    largest_time: f64,
    n: usize,
}

impl SurvivalFit {
    /// Kaplan-Meier estimator of the survival function.
    pub fn km(&self) -> &StepFunction {
        &self.km
    }

    /// Nelson-Aalen estimator of the cumulative hazard.
    pub fn na(&self) -> &StepFunction {
        &self.na
    }

    /// Kaplan-Meier estimator of the censoring survival function.
    pub fn censor_km(&self) -> &StepFunction {
        &self.censor_km
    }

    /// Empirical survival function of the observed times.
    pub fn emp_surv(&self) -> &StepFunction {
        &self.emp_surv
    }

    pub fn at_risk_process(&self) -> &StepFunction {
        &self.at_risk
    }

    /// `Y(u) = #{i : X_i >= u}`.
    pub fn at_risk(&self, u: f64) -> f64 {
        if u <= 0.0 {
            self.n as f64
        } else {
            self.at_risk.eval_left(u).expect("u > 0")
        }
    }

    /// Distinct observation times with their risk-set counts.
    pub fn groups(&self) -> &[TimeGroup] {
        &self.groups
    }

    pub fn largest_time(&self) -> f64 {
        self.largest_time
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Fits every estimator in one pass over the tie-resolved sample.
pub fn km_fit(sample: &ObservedSample) -> SurvivalFit {
    fit_sorted(&resolve_ties(sample).records)
}

/// Nelson-Aalen estimator alone.
pub fn na_fit(sample: &ObservedSample) -> StepFunction {
    km_fit(sample).na
}

pub fn largest_time(fit: &SurvivalFit) -> f64 {
    fit.largest_time
}

/// Fit from records already in `record_order`.
pub(crate) fn fit_sorted(records: &[Record]) -> SurvivalFit {
    debug_assert!(!records.is_empty());
    debug_assert!(records
        .windows(2)
        .all(|w| record_order(&w[0], &w[1]) != Ordering::Greater));
    let n = records.len();
    let nf = n as f64;

    let mut groups: Vec<TimeGroup> = Vec::new();
    let mut remaining = n;
    for r in records {
        match groups.last_mut() {
            Some(g) if g.time == r.time => {}
            _ => groups.push(TimeGroup {
                time: r.time,
                at_risk: remaining,
                events: 0,
                censored: 0,
            }),
        }
        let g = groups.last_mut().expect("group pushed above");
        if r.status.is_event() {
            g.events += 1;
        } else {
            g.censored += 1;
        }
        remaining -= 1;
    }

    // Between two anchors the product-limit factors telescope, so each value
    // is the anchor value times a ratio of counts. Without censoring this
    // reproduces the empirical survival function exactly.
    let mut km_anchor = (1.0f64, n);
    let mut g_anchor = (1.0f64, n);
    let mut km = 1.0;
    let mut cens = 1.0;
    let mut hazard = 0.0;

    let mut km_t = Vec::new();
    let mut km_v = Vec::new();
    let mut na_v = Vec::new();
    let mut g_t = Vec::new();
    let mut g_v = Vec::new();
    let mut times = Vec::with_capacity(groups.len());
    let mut h_v = Vec::with_capacity(groups.len());
    let mut y_v = Vec::with_capacity(groups.len());

    for g in &groups {
        let y = g.at_risk;
        let after_events = y - g.events;
        let after_all = after_events - g.censored;
        if g.events > 0 {
            km = km_anchor.0 * after_events as f64 / km_anchor.1 as f64;
            hazard += g.events as f64 / y as f64;
            km_t.push(g.time);
            km_v.push(km);
            na_v.push(hazard);
            g_anchor = (cens, after_events);
        }
        if g.censored > 0 {
            cens = g_anchor.0 * after_all as f64 / g_anchor.1 as f64;
            g_t.push(g.time);
            g_v.push(cens);
            km_anchor = (km, after_all);
        }
        times.push(g.time);
        h_v.push(after_all as f64 / nf);
        y_v.push(after_all as f64);
    }

    let largest_time = groups.last().expect("non-empty sample").time;
    SurvivalFit {
        km: StepFunction::from_sorted(1.0, km_t.clone(), km_v),
        na: StepFunction::from_sorted(0.0, km_t, na_v),
        censor_km: StepFunction::from_sorted(1.0, g_t, g_v),
        emp_surv: StepFunction::from_sorted(1.0, times.clone(), h_v),
        at_risk: StepFunction::from_sorted(nf, times, y_v),
        groups,
        largest_time,
        n,
    }
}
