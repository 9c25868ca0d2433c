//! Product-limit (Kaplan-Meier) estimation of the event and censoring
//! distributions, and the plateau estimator of the susceptible fraction.

use serde::Serialize;

use crate::sample::{censorings_first, Observation, SurvivalSample};

/// Right-continuous nondecreasing step function on `[0, ∞)` with values in
/// `[0, 1]`.
///
/// `values[k]` is the value on `[jump_times[k], jump_times[k + 1])`; before the
/// first jump the curve equals `baseline`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepCurve {
    jump_times: Vec<f64>,
    values: Vec<f64>,
    baseline: f64,
}

impl StepCurve {
    pub fn new(jump_times: Vec<f64>, values: Vec<f64>, baseline: f64) -> Self {
        debug_assert_eq!(jump_times.len(), values.len());
        debug_assert!(jump_times.windows(2).all(|w| w[0] < w[1]));
        Self {
            jump_times,
            values,
            baseline,
        }
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn baseline(&self) -> f64 {
        self.baseline
    }

    /// Value at `t` (right-continuous).
    pub fn evaluate(&self, t: f64) -> f64 {
        // number of jumps at or before t
        let k = self.jump_times.partition_point(|&s| s <= t);
        if k == 0 {
            self.baseline
        } else {
            self.values[k - 1]
        }
    }

    /// Left limit at `t`.
    pub fn evaluate_left(&self, t: f64) -> f64 {
        let k = self.jump_times.partition_point(|&s| s < t);
        if k == 0 {
            self.baseline
        } else {
            self.values[k - 1]
        }
    }

    /// Jump size at `t` (zero away from jump times).
    pub fn jump_at(&self, t: f64) -> f64 {
        self.evaluate(t) - self.evaluate_left(t)
    }

    /// Value after the last jump.
    pub fn terminal_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(self.baseline)
    }
}

/// Runs the product-limit recursion over observations already in processing
/// order. `is_event` selects which indicator counts as a "death".
fn product_limit<'a, I, P>(ordered: I, n: usize, is_event: P) -> StepCurve
where
    I: IntoIterator<Item = &'a Observation>,
    P: Fn(&Observation) -> bool,
{
    let mut jump_times = Vec::new();
    let mut values = Vec::new();
    let mut survival = 1.0_f64;
    let mut iter = ordered.into_iter().enumerate().peekable();

    while let Some((i, obs)) = iter.next() {
        let at_risk = (n - i) as f64;
        let mut jumped = false;
        if is_event(obs) {
            survival *= 1.0 - 1.0 / at_risk;
            jumped = true;
        }
        // Finish the whole tie group before recording the value.
        while let Some(&(j, next)) = iter.peek() {
            if next.time != obs.time {
                break;
            }
            if is_event(next) {
                survival *= 1.0 - 1.0 / (n - j) as f64;
                jumped = true;
            }
            iter.next();
        }
        if jumped {
            jump_times.push(obs.time);
            values.push((1.0 - survival).clamp(0.0, 1.0));
        }
    }

    StepCurve::new(jump_times, values, 0.0)
}

/// Kaplan-Meier estimate `F̂_n` of the (sub-)distribution of the event time.
///
/// Uses the risk set `n − i + 1` at the `i`-th order statistic; tied event
/// times are processed one at a time, which equals grouping the deaths.
pub fn kaplan_meier(sample: &SurvivalSample) -> StepCurve {
    product_limit(sample.observations(), sample.len(), |o| o.event)
}

/// Kaplan-Meier estimate `F̂_c` of the censoring distribution: indicators are
/// flipped and censorings are processed before events at tied times.
pub fn censoring_km(sample: &SurvivalSample) -> StepCurve {
    let mut ordered = sample.observations().to_vec();
    ordered.sort_by(censorings_first);
    product_limit(&ordered, ordered.len(), |o| !o.event)
}

/// The plateau estimator `p̂_n = F̂_n(Y_(n))`.
pub fn plateau_estimate(sample: &SurvivalSample) -> f64 {
    kaplan_meier(sample).evaluate(sample.max_time())
}
