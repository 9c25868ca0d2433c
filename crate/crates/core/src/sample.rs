//! Right-censored observations and their ordered collection.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One follow-up record: the observed time `Y = min(T, C)` and whether the
/// event was observed (`δ = 1`) or the subject was censored (`δ = 0`).
///
/// Cured subjects never carry an infinite time; they appear as ordinary
/// censored observations at their censoring time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub time: f64,
    pub event: bool,
}

impl Observation {
    pub fn new(time: f64, event: bool) -> Self {
        Self { time, event }
    }

    pub fn event(time: f64) -> Self {
        Self::new(time, true)
    }

    pub fn censored(time: f64) -> Self {
        Self::new(time, false)
    }
}

/// Order used for the survival estimator: ascending time, events before
/// censorings at equal times.
pub(crate) fn events_first(a: &Observation, b: &Observation) -> Ordering {
    a.time
        .total_cmp(&b.time)
        .then_with(|| b.event.cmp(&a.event))
}

/// Order used for the censoring estimator: ascending time, censorings before
/// events at equal times.
pub(crate) fn censorings_first(a: &Observation, b: &Observation) -> Ordering {
    a.time
        .total_cmp(&b.time)
        .then_with(|| a.event.cmp(&b.event))
}

/// A nonempty sample sorted ascending by time with events preceding
/// censorings at tied times.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalSample {
    observations: Vec<Observation>,
}

impl SurvivalSample {
    /// Validates and sorts raw observations.
    pub fn new(mut observations: Vec<Observation>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::EmptySample);
        }
        for (index, obs) in observations.iter().enumerate() {
            if !obs.time.is_finite() {
                return Err(Error::NonFiniteTime { index });
            }
            if obs.time < 0.0 {
                return Err(Error::NegativeTime {
                    index,
                    time: obs.time,
                });
            }
        }
        observations.sort_by(events_first);
        Ok(Self { observations })
    }

    /// Builds a sample from `(time, event)` pairs.
    pub fn from_pairs<I>(raw: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, bool)>,
    {
        Self::new(
            raw.into_iter()
                .map(|(time, event)| Observation::new(time, event))
                .collect(),
        )
    }

    /// Builds a sample from parallel time and event slices.
    pub fn from_columns(times: &[f64], events: &[bool]) -> Result<Self> {
        if times.len() != events.len() {
            return Err(Error::invalid(
                "events",
                format!("{} times but {} event flags", times.len(), events.len()),
            ));
        }
        Self::from_pairs(times.iter().copied().zip(events.iter().copied()))
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    /// Always false; kept for API symmetry with collections.
    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Largest observed time `Y_(n)`.
    pub fn max_time(&self) -> f64 {
        self.observations[self.observations.len() - 1].time
    }

    pub fn event_count(&self) -> usize {
        self.observations.iter().filter(|o| o.event).count()
    }

    /// Fraction of observations that are censored.
    pub fn censoring_proportion(&self) -> f64 {
        let censored = self.len() - self.event_count();
        censored as f64 / self.len() as f64
    }

    /// Applies a strictly increasing map to every time, keeping the
    /// indicators. The caller guarantees monotonicity.
    pub(crate) fn map_times<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        Self::new(
            self.observations
                .iter()
                .map(|o| Observation::new(f(o.time), o.event))
                .collect(),
        )
    }

    pub fn into_observations(self) -> Vec<Observation> {
        self.observations
    }
}

/// Free-function form of [`SurvivalSample::from_pairs`].
pub fn build_sample(raw: &[(f64, bool)]) -> Result<SurvivalSample> {
    SurvivalSample::from_pairs(raw.iter().copied())
}

/// Fraction of censored observations in `sample`.
pub fn censoring_proportion(sample: &SurvivalSample) -> f64 {
    sample.censoring_proportion()
}
