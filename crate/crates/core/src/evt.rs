//! Extreme-value extrapolation of the Kaplan-Meier plateau.
//!
//! Under insufficient follow-up the plateau `F̂_n(τ̂_n)` only estimates
//! `F(τ_c) < p`. If the susceptible time distribution lies in the Fréchet
//! domain of attraction with index `γ > 0`, the tail ratio
//! `(1 − F_0(yτ)) / (1 − F_0(τ))` tends to `y^{-1/γ}`, so the missing mass
//! `p − F(τ_c)` can be recovered from the increments of `F` over
//! `[y²τ_c, yτ_c, τ_c]`:
//!
//! ```text
//! ŷ_γ = (F̂(y²τ̂) − F̂(yτ̂)) / (F̂(yτ̂) − F̂(τ̂))
//! p̂_y = F̂(τ̂) + (F̂(τ̂) − F̂(yτ̂)) / (ŷ_γ − 1)
//! ```
//!
//! Weibull-domain data (`γ < 0`, finite known endpoint `τ_0`) are first mapped
//! through `x ↦ 1 / (τ_0 − x)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::km::{kaplan_meier, StepCurve};
use crate::sample::SurvivalSample;

/// `ψ(x) = 1 / (τ_0 − x)`, applied elementwise.
pub fn psi_transform(times: &[f64], tau0: f64) -> Result<Vec<f64>> {
    if !tau0.is_finite() {
        return Err(Error::invalid("tau0", "endpoint must be finite"));
    }
    times
        .iter()
        .map(|&x| {
            if x >= tau0 {
                Err(Error::EndpointNotAbove { time: x, tau0 })
            } else {
                Ok(1.0 / (tau0 - x))
            }
        })
        .collect()
}

/// Applies [`psi_transform`] to every observed time of a sample. Indicators
/// and order are unchanged because the map is strictly increasing.
pub fn psi_transform_sample(sample: &SurvivalSample, tau0: f64) -> Result<SurvivalSample> {
    if !tau0.is_finite() {
        return Err(Error::invalid("tau0", "endpoint must be finite"));
    }
    let max = sample.max_time();
    if max >= tau0 {
        return Err(Error::EndpointNotAbove { time: max, tau0 });
    }
    sample.map_times(|x| 1.0 / (tau0 - x))
}

/// The three estimated CDF levels that enter the correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionInput {
    /// `F̂(τ̂)`
    pub f_tau: f64,
    /// `F̂(yτ̂)`
    pub f_y_tau: f64,
    /// `F̂(y²τ̂)`
    pub f_y2_tau: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrectedEstimate {
    /// Raw corrected estimate; may exceed 1.
    pub p_hat_y: f64,
    /// Ratio statistic estimating `y^{-1/γ}`. NaN when it is undefined.
    pub y_gamma_hat: f64,
    /// The correction degenerated and `p̂_y` fell back to the plateau.
    pub fallback_used: bool,
}

impl CorrectedEstimate {
    pub fn clamped(&self) -> f64 {
        self.p_hat_y.clamp(0.0, 1.0)
    }
}

/// Extrapolated estimate from three CDF levels.
///
/// Falls back to `F̂(τ̂)` when either increment `F̂(τ̂) − F̂(yτ̂)` or
/// `F̂(yτ̂) − F̂(y²τ̂)` vanishes, when `ŷ_γ = 1`, or when the result is not
/// finite.
pub fn corrected_estimate(input: &CorrectionInput) -> CorrectedEstimate {
    let CorrectionInput {
        f_tau,
        f_y_tau,
        f_y2_tau,
        ..
    } = *input;
    let fallback = |y_gamma_hat| CorrectedEstimate {
        p_hat_y: f_tau,
        y_gamma_hat,
        fallback_used: true,
    };

    let near = f_y_tau - f_tau;
    if near == 0.0 {
        return fallback(f64::NAN);
    }
    let y_gamma_hat = (f_y2_tau - f_y_tau) / near;
    if !y_gamma_hat.is_finite() || y_gamma_hat == 1.0 || y_gamma_hat == 0.0 {
        return fallback(y_gamma_hat);
    }
    let p_hat_y = f_tau + (f_tau - f_y_tau) / (y_gamma_hat - 1.0);
    if !p_hat_y.is_finite() {
        return fallback(y_gamma_hat);
    }
    CorrectedEstimate {
        p_hat_y,
        y_gamma_hat,
        fallback_used: false,
    }
}

pub(crate) fn check_y(y: f64) -> Result<()> {
    if y > 0.0 && y < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("y", format!("{y} is not in (0, 1)")))
    }
}

/// Reads the three CDF levels off an estimated curve at `τ`, `yτ`, `y²τ`.
pub fn correction_input(curve: &StepCurve, tau_hat: f64, y: f64) -> CorrectionInput {
    CorrectionInput {
        f_tau: curve.evaluate(tau_hat),
        f_y_tau: curve.evaluate(y * tau_hat),
        f_y2_tau: curve.evaluate(y * y * tau_hat),
        y,
    }
}

/// `p̂_y` from a precomputed Kaplan-Meier curve with `τ̂ = tau_hat`.
pub fn p_hat_y_from_curve(curve: &StepCurve, tau_hat: f64, y: f64) -> Result<CorrectedEstimate> {
    check_y(y)?;
    Ok(corrected_estimate(&correction_input(curve, tau_hat, y)))
}

/// `p̂_y` for a sample, with `τ̂_n = Y_(n)`.
pub fn p_hat_y_from_sample(sample: &SurvivalSample, y: f64) -> Result<CorrectedEstimate> {
    p_hat_y_from_curve(&kaplan_meier(sample), sample.max_time(), y)
}

/// Population target of `p̂_y`:
/// `F(τ_c) − (F(τ_c) − F(yτ_c))² / (F(y²τ_c) − 2F(yτ_c) + F(τ_c))`.
pub fn p_y_true<F>(cdf: F, y: f64, tau_c: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    check_y(y)?;
    let f0 = cdf(tau_c);
    let f1 = cdf(y * tau_c);
    let f2 = cdf(y * y * tau_c);
    let second_diff = f2 - 2.0 * f1 + f0;
    if second_diff == 0.0 || !second_diff.is_finite() {
        return Err(Error::DegenerateDenominator);
    }
    let near = f0 - f1;
    Ok(f0 - near * near / second_diff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::build_sample;

    #[test]
    fn psi_values() {
        assert_eq!(psi_transform(&[0.5, 0.75], 1.0).unwrap(), vec![2.0, 4.0]);
        assert!(matches!(
            psi_transform(&[1.0], 1.0),
            Err(Error::EndpointNotAbove { .. })
        ));
    }

    #[test]
    fn worked_correction() {
        let e = corrected_estimate(&CorrectionInput {
            f_tau: 0.6,
            f_y_tau: 0.5,
            f_y2_tau: 0.3,
            y: 0.5,
        });
        assert!(!e.fallback_used);
        assert!((e.y_gamma_hat - 2.0).abs() < 1e-15);
        assert!((e.p_hat_y - 0.7).abs() < 1e-15);
    }

    #[test]
    fn flat_curve_falls_back() {
        let e = corrected_estimate(&CorrectionInput {
            f_tau: 0.6,
            f_y_tau: 0.6,
            f_y2_tau: 0.6,
            y: 0.5,
        });
        assert!(e.fallback_used);
        assert_eq!(e.p_hat_y, 0.6);
    }

    #[test]
    fn unit_ratio_falls_back() {
        // equal increments: ŷ_γ = 1
        let e = corrected_estimate(&CorrectionInput {
            f_tau: 0.5,
            f_y_tau: 0.25,
            f_y2_tau: 0.0,
            y: 0.5,
        });
        assert!(e.fallback_used);
        assert_eq!(e.p_hat_y, 0.5);
    }

    #[test]
    fn exact_pareto_plugin() {
        // F(t) = 0.5 (1 − 1/t) at t = 10, 5, 2.5
        let e = corrected_estimate(&CorrectionInput {
            f_tau: 0.45,
            f_y_tau: 0.40,
            f_y2_tau: 0.30,
            y: 0.5,
        });
        assert!((e.y_gamma_hat - 2.0).abs() < 1e-12);
        assert!((e.p_hat_y - 0.5).abs() < 1e-12);
    }

    #[test]
    fn from_sample_matches_worked_values() {
        // Ten observations, τ̂ = 10, y = 0.5: F̂ reaches 0.3 by 2.5, 0.5 by 5 and
        // 0.6 by 10.
        let s = build_sample(&[
            (1.0, true),
            (1.5, true),
            (2.0, true),
            (3.0, true),
            (4.0, true),
            (6.0, true),
            (10.0, false),
            (10.0, false),
            (10.0, false),
            (10.0, false),
        ])
        .unwrap();
        let e = p_hat_y_from_sample(&s, 0.5).unwrap();
        assert!((e.y_gamma_hat - 2.0).abs() < 1e-12);
        assert!((e.p_hat_y - 0.7).abs() < 1e-12);
    }

    #[test]
    fn degenerate_samples_fall_back() {
        let early = build_sample(&[(0.1, true), (0.1, true), (5.0, false), (10.0, false)]).unwrap();
        let e = p_hat_y_from_sample(&early, 0.7).unwrap();
        assert!(e.fallback_used);
        assert!((e.p_hat_y - 0.5).abs() < 1e-15);

        let single = build_sample(&[(3.0, true)]).unwrap();
        assert!(p_hat_y_from_sample(&single, 0.7).unwrap().fallback_used);
    }

    #[test]
    fn rejects_y_outside_unit_interval() {
        let s = build_sample(&[(1.0, true)]).unwrap();
        assert!(p_hat_y_from_sample(&s, 1.0).is_err());
        assert!(p_hat_y_from_sample(&s, 0.0).is_err());
    }

    #[test]
    fn p_y_true_exact_pareto() {
        let cdf = |t: f64| 0.5 * (1.0 - 1.0 / t);
        assert!((p_y_true(cdf, 0.5, 10.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn p_y_true_flat_is_degenerate() {
        assert!(matches!(
            p_y_true(|_| 0.3, 0.5, 10.0),
            Err(Error::DegenerateDenominator)
        ));
    }
}
