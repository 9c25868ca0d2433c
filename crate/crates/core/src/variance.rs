//! Asymptotic variance of the extrapolated estimator and Wald intervals.
//!
//! For fixed `y`, `√n (p̂_y − p_y(τ_c))` is asymptotically normal with variance
//!
//! ```text
//! σ² = Σ_{i,j=0..2} a_i a_j (1 − F(yⁱτ_c)) (1 − F(yʲτ_c)) v(y^{max(i,j)} τ_c)
//! v(t) = ∫_0^t dF(s) / ((1 − F(s)) (1 − F(s⁻)) (1 − F_c(s⁻)))
//! ```
//!
//! where `a_i` are the partial derivatives of
//! `p_y = F_0 − (F_0 − F_1)² / (F_2 − 2F_1 + F_0)` with respect to
//! `F_i = F(yⁱτ_c)`. With `b = (F_0 − F_1) / (F_2 − 2F_1 + F_0)` these are
//! `a_0 = (1 − b)²`, `a_1 = 2b(1 − b)`, `a_2 = b²`.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::evt::check_y;
use crate::km::{censoring_km, kaplan_meier};
use crate::quadrature::integrate_adaptive;
use crate::sample::SurvivalSample;

/// Ingredients and result of a variance evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceBreakdown {
    /// `F` at `τ`, `yτ`, `y²τ`.
    pub f_values: [f64; 3],
    /// `v` at `τ`, `yτ`, `y²τ`.
    pub v_values: [f64; 3],
    pub b: f64,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub sigma2: f64,
}

/// Delta-method coefficients `(a_0, a_1, a_2)` for a given `b`.
pub fn coefficients(b: f64) -> [f64; 3] {
    [(1.0 - b) * (1.0 - b), 2.0 * b * (1.0 - b), b * b]
}

fn assemble(f_values: [f64; 3], v_values: [f64; 3]) -> Result<VarianceBreakdown> {
    let [f0, f1, f2] = f_values;
    let second_diff = f2 - 2.0 * f1 + f0;
    if second_diff == 0.0 || !second_diff.is_finite() {
        return Err(Error::DegenerateDenominator);
    }
    let b = (f0 - f1) / second_diff;
    if !b.is_finite() {
        return Err(Error::DegenerateDenominator);
    }
    let a = coefficients(b);
    let mut sigma2 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            // y^{max(i,j)} τ is the smaller of the two time points
            sigma2 += a[i] * a[j] * (1.0 - f_values[i]) * (1.0 - f_values[j]) * v_values[i.max(j)];
        }
    }
    Ok(VarianceBreakdown {
        f_values,
        v_values,
        b,
        a0: a[0],
        a1: a[1],
        a2: a[2],
        sigma2: sigma2.max(0.0),
    })
}

/// Plug-in estimate of `v(·)` built from the survival and censoring
/// Kaplan-Meier curves of one sample.
#[derive(Debug, Clone)]
pub struct PluginVariance {
    event_times: Vec<f64>,
    cumulative: Vec<f64>,
    max_time: f64,
    dropped_terms: usize,
}

impl PluginVariance {
    pub fn new(sample: &SurvivalSample) -> Self {
        let f = kaplan_meier(sample);
        let fc = censoring_km(sample);
        let mut event_times = Vec::with_capacity(f.jump_times().len());
        let mut cumulative = Vec::with_capacity(f.jump_times().len());
        let mut acc = 0.0;
        let mut dropped_terms = 0;
        let mut before = f.baseline();
        for (&s, &after) in f.jump_times().iter().zip(f.values()) {
            let denom = (1.0 - after) * (1.0 - before) * (1.0 - fc.evaluate_left(s));
            if denom > 0.0 {
                acc += (after - before) / denom;
            } else {
                dropped_terms += 1;
            }
            event_times.push(s);
            cumulative.push(acc);
            before = after;
        }
        Self {
            event_times,
            cumulative,
            max_time: sample.max_time(),
            dropped_terms,
        }
    }

    /// `v̂(t)`; fails for `t` beyond the largest observation.
    pub fn at(&self, t: f64) -> Result<f64> {
        if t > self.max_time {
            return Err(Error::PointBeyondData {
                t,
                max: self.max_time,
            });
        }
        let k = self.event_times.partition_point(|&s| s <= t);
        Ok(if k == 0 { 0.0 } else { self.cumulative[k - 1] })
    }

    /// Number of event-time terms skipped because a denominator factor was
    /// zero (only possible at the last order statistic).
    pub fn dropped_terms(&self) -> usize {
        self.dropped_terms
    }
}

pub fn v_hat(sample: &SurvivalSample, t: f64) -> Result<f64> {
    PluginVariance::new(sample).at(t)
}

/// Plug-in `σ̂²` at `y`, using `τ̂ = Y_(n)`.
pub fn sigma2_plugin(sample: &SurvivalSample, y: f64) -> Result<VarianceBreakdown> {
    check_y(y)?;
    let f = kaplan_meier(sample);
    let plugin = PluginVariance::new(sample);
    let tau = sample.max_time();
    let points = [tau, y * tau, y * y * tau];
    let f_values = points.map(|t| f.evaluate(t));
    let v_values = [plugin.at(points[0])?, plugin.at(points[1])?, plugin.at(points[2])?];
    assemble(f_values, v_values)
}

/// Exact `v(t)` for a continuous sub-distribution with density `density`
/// and censoring left limits `censoring_cdf_left`.
pub fn v_exact<F, D, C>(cdf: F, density: D, censoring_cdf_left: C, t: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
    C: Fn(f64) -> f64,
{
    if t <= 0.0 {
        return Ok(0.0);
    }
    let integrand = |s: f64| {
        let surv = 1.0 - cdf(s);
        density(s) / (surv * surv * (1.0 - censoring_cdf_left(s)))
    };
    integrate_adaptive(integrand, 0.0, t, 1e-10)
}

/// `σ²_{y,τ_c}` from the true distributions.
pub fn sigma2_exact<F, D, C>(
    cdf: F,
    density: D,
    censoring_cdf_left: C,
    y: f64,
    tau_c: f64,
) -> Result<VarianceBreakdown>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
    C: Fn(f64) -> f64,
{
    check_y(y)?;
    let points = [tau_c, y * tau_c, y * y * tau_c];
    let f_values = points.map(&cdf);
    let mut v_values = [0.0; 3];
    for (v, &t) in v_values.iter_mut().zip(&points) {
        *v = v_exact(&cdf, &density, &censoring_cdf_left, t)?;
    }
    assemble(f_values, v_values)
}

/// Standard normal quantile.
pub fn normal_quantile(q: f64) -> f64 {
    Normal::standard().inverse_cdf(q)
}

/// `p̂ ± z_{(1+level)/2} √(σ̂²/n)`, clamped to `[0, 1]`.
pub fn wald_interval(p_hat: f64, sigma2: f64, n: usize, level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("level", format!("{level} is not in (0, 1)")));
    }
    if sigma2.is_nan() || sigma2 < 0.0 {
        return Err(Error::invalid("sigma2", "must be nonnegative"));
    }
    if n == 0 {
        return Err(Error::invalid("n", "must be positive"));
    }
    let half = normal_quantile(0.5 * (1.0 + level)) * (sigma2 / n as f64).sqrt();
    Ok((
        (p_hat - half).clamp(0.0, 1.0),
        (p_hat + half).clamp(0.0, 1.0),
    ))
}
