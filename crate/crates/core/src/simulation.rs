//! Mixture-cure data generation and the Monte Carlo experiment runner.
//!
//! A subject is susceptible with probability `p` and then has a finite event
//! time `T ~ F_0`; otherwise it is cured and never experiences the event. The
//! censoring time equals `τ_c` with probability `ε` and is uniform on
//! `[0, τ_c]` otherwise. We observe `Y = min(T, C)` and `δ = 1{T ≤ C}`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::km::plateau_estimate;
use crate::rng::{derive_path, stream_at, StreamRng};
use crate::sample::{Observation, SurvivalSample};
use crate::selection::{default_y_grid, select_y_star, YSelectionConfig};

/// Distribution of the susceptible event time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SimModel {
    /// Standard generalized Pareto, `F_0(t) = 1 − (1 + γt)^{-1/γ}`, `γ ≠ 0`.
    Gpd { gamma: f64 },
    /// Absolute value of a standard Cauchy variable (`γ = 1`).
    HalfCauchy,
    /// `Beta(1, μ)`, `F_0(t) = 1 − (1 − t)^μ` on `[0, 1]` (`γ = −1/μ`).
    Beta { mu: f64 },
}

impl SimModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SimModel::Gpd { gamma } if gamma == 0.0 || !gamma.is_finite() => {
                Err(Error::invalid("gamma", "GPD index must be finite and nonzero"))
            }
            SimModel::Beta { mu } if !(mu > 0.0 && mu.is_finite()) => {
                Err(Error::invalid("mu", "Beta shape must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Extreme value index of `F_0`.
    pub fn gamma(&self) -> f64 {
        match *self {
            SimModel::Gpd { gamma } => gamma,
            SimModel::HalfCauchy => 1.0,
            SimModel::Beta { mu } => -1.0 / mu,
        }
    }

    /// Right endpoint of `F_0`.
    pub fn tau0(&self) -> f64 {
        match *self {
            SimModel::Gpd { gamma } if gamma < 0.0 => -1.0 / gamma,
            SimModel::Gpd { .. } | SimModel::HalfCauchy => f64::INFINITY,
            SimModel::Beta { .. } => 1.0,
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= self.tau0() {
            return 1.0;
        }
        match *self {
            SimModel::Gpd { gamma } => 1.0 - (1.0 + gamma * t).powf(-1.0 / gamma),
            SimModel::HalfCauchy => t.atan() / FRAC_PI_2,
            SimModel::Beta { mu } => 1.0 - (1.0 - t).powf(mu),
        }
    }

    pub fn density(&self, t: f64) -> f64 {
        if t < 0.0 || t >= self.tau0() {
            return 0.0;
        }
        match *self {
            SimModel::Gpd { gamma } => (1.0 + gamma * t).powf(-1.0 / gamma - 1.0),
            SimModel::HalfCauchy => 1.0 / (FRAC_PI_2 * (1.0 + t * t)),
            SimModel::Beta { mu } => mu * (1.0 - t).powf(mu - 1.0),
        }
    }

    /// Closed-form inverse of [`SimModel::cdf`] on `[0, 1)`.
    pub fn quantile(&self, q: f64) -> f64 {
        match *self {
            SimModel::Gpd { gamma } => ((1.0 - q).powf(-gamma) - 1.0) / gamma,
            SimModel::HalfCauchy => (FRAC_PI_2 * q).tan(),
            SimModel::Beta { mu } => 1.0 - (1.0 - q).powf(1.0 / mu),
        }
    }
}

impl fmt::Display for SimModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimModel::Gpd { gamma } => write!(f, "gpd:{gamma}"),
            SimModel::HalfCauchy => write!(f, "half-cauchy"),
            SimModel::Beta { mu } => write!(f, "beta:{mu}"),
        }
    }
}

impl FromStr for SimModel {
    type Err = Error;

    /// `gpd:<gamma>`, `half-cauchy` (or `cauchy`), `beta:<mu>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (family, arg) = match s.split_once(':') {
            Some((f, a)) => (f.trim(), Some(a.trim())),
            None => (s, None),
        };
        let number = |name: &str| -> Result<f64> {
            arg.ok_or_else(|| Error::bad_config("model", format!("`{family}` needs a {name} value")))?
                .parse::<f64>()
                .map_err(|_| Error::bad_config("model", format!("bad {name} in `{s}`")))
        };
        let model = match family.to_ascii_lowercase().as_str() {
            "gpd" | "pareto" => SimModel::Gpd {
                gamma: number("gamma")?,
            },
            "half-cauchy" | "cauchy" => SimModel::HalfCauchy,
            "beta" => SimModel::Beta { mu: number("mu")? },
            _ => return Err(Error::bad_config("model", format!("unknown family `{family}`"))),
        };
        model
            .validate()
            .map_err(|e| Error::bad_config("model", e.to_string()))?;
        Ok(model)
    }
}

pub fn sample_susceptible(model: &SimModel, rng: &mut StreamRng) -> f64 {
    model.quantile(rng.random::<f64>())
}

pub fn quantile_susceptible(model: &SimModel, q: f64) -> f64 {
    model.quantile(q)
}

/// True distributions of one simulated design, for oracle computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Population {
    pub model: SimModel,
    pub p: f64,
    pub tau_c: f64,
    pub epsilon: f64,
}

impl Population {
    /// Sub-distribution `F(t) = p F_0(t)` of the event time.
    pub fn sub_cdf(&self, t: f64) -> f64 {
        self.p * self.model.cdf(t)
    }

    pub fn sub_density(&self, t: f64) -> f64 {
        self.p * self.model.density(t)
    }

    pub fn censoring_cdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            0.0
        } else if t < self.tau_c {
            (1.0 - self.epsilon) * t / self.tau_c
        } else {
            1.0
        }
    }

    /// `F_c(t⁻)`.
    pub fn censoring_cdf_left(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else if t <= self.tau_c {
            (1.0 - self.epsilon) * t / self.tau_c
        } else {
            1.0
        }
    }

    /// Probability that an observation is censored.
    pub fn censoring_probability(&self) -> Result<f64> {
        // P(T > C | susceptible) = ε S_0(τ_c) + (1 − ε)/τ_c ∫_0^τ_c S_0
        let survival = |c: f64| 1.0 - self.model.cdf(c);
        let mean_survival =
            crate::quadrature::integrate_adaptive(survival, 0.0, self.tau_c, 1e-12)? / self.tau_c;
        let beyond =
            self.epsilon * survival(self.tau_c) + (1.0 - self.epsilon) * mean_survival;
        Ok(1.0 - self.p + self.p * beyond)
    }
}

/// One generated data set.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub sample: SurvivalSample,
    /// Number of cured subjects (all of them censored).
    pub cured: usize,
}

/// Draws `n` subjects from the mixture-cure design. With `psi_endpoint`
/// set, every observed time is mapped through `1 / (τ_0 − x)` afterwards.
pub fn gen_dataset(
    model: &SimModel,
    p: f64,
    tau_c: f64,
    epsilon: f64,
    n: usize,
    psi_endpoint: Option<f64>,
    rng: &mut StreamRng,
) -> Result<Dataset> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid("p", format!("{p} is not in (0, 1)")));
    }
    if !(tau_c > 0.0 && tau_c.is_finite()) {
        return Err(Error::invalid("tau_c", "must be positive and finite"));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::invalid("epsilon", format!("{epsilon} is not in [0, 1]")));
    }
    if n == 0 {
        return Err(Error::invalid("n", "must be positive"));
    }

    let mut cured = 0;
    let mut observations = Vec::with_capacity(n);
    for _ in 0..n {
        let susceptible = rng.random::<f64>() < p;
        let t = sample_susceptible(model, rng);
        let c = if rng.random::<f64>() < epsilon {
            tau_c
        } else {
            tau_c * rng.random::<f64>()
        };
        let obs = if susceptible && t <= c {
            Observation::event(t)
        } else {
            if !susceptible {
                cured += 1;
            }
            Observation::censored(c)
        };
        observations.push(obs);
    }
    if let Some(tau0) = psi_endpoint {
        for obs in &mut observations {
            if obs.time >= tau0 {
                return Err(Error::EndpointNotAbove {
                    time: obs.time,
                    tau0,
                });
            }
            obs.time = 1.0 / (tau0 - obs.time);
        }
    }
    Ok(Dataset {
        sample: SurvivalSample::new(observations)?,
        cured,
    })
}

/// Uniform ratio grid `k / points`, `k = 1..=points`.
pub fn uniform_ratio_grid(points: usize) -> Vec<f64> {
    (1..=points).map(|k| k as f64 / points as f64).collect()
}

/// Full description of a Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: SimModel,
    pub p: f64,
    pub epsilon: f64,
    pub n: usize,
    /// Number of simulated data sets per grid point.
    pub replications: usize,
    pub n_bootstrap: usize,
    /// Values of `τ_c / τ_{0.95}`.
    pub grid_ratios: Vec<f64>,
    pub y_grid: Vec<f64>,
    pub seed: u64,
    /// Map data through `ψ` when the model has a negative index.
    pub apply_psi: bool,
}

impl ExperimentConfig {
    /// Settings of the full study: `n = 1000`, 200 replications, 200
    /// bootstrap resamples, 24 ratios.
    pub fn full_scale(model: SimModel, p: f64) -> Self {
        Self {
            model,
            p,
            epsilon: 0.05,
            n: 1000,
            replications: 200,
            n_bootstrap: 200,
            grid_ratios: uniform_ratio_grid(24),
            y_grid: default_y_grid(),
            seed: 2019,
            apply_psi: true,
        }
    }

    /// Reduced study: 50 replications, 100 resamples, ratios 0.4 to 1.0.
    pub fn desk_scale(model: SimModel, p: f64) -> Self {
        Self {
            replications: 50,
            n_bootstrap: 100,
            grid_ratios: vec![0.4, 0.6, 0.8, 1.0],
            ..Self::full_scale(model, p)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::invalid("p", format!("{} is not in (0, 1)", self.p)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon < 1.0) {
            return Err(Error::invalid("epsilon", "must be in [0, 1)"));
        }
        if self.n == 0 || self.replications == 0 || self.n_bootstrap == 0 {
            return Err(Error::invalid("n", "all counts must be positive"));
        }
        if self.grid_ratios.is_empty()
            || self.grid_ratios.iter().any(|&r| !(r > 0.0 && r <= 1.0))
            || self.grid_ratios.windows(2).any(|w| w[0] > w[1])
        {
            return Err(Error::invalid(
                "grid_ratios",
                "ratios must be nondecreasing and lie in (0, 1]",
            ));
        }
        YSelectionConfig {
            grid: self.y_grid.clone(),
            n_bootstrap: self.n_bootstrap,
            seed: self.seed,
        }
        .validate()
    }

    fn psi_endpoint(&self) -> Option<f64> {
        (self.apply_psi && self.model.gamma() < 0.0).then(|| self.model.tau0())
    }
}

/// Summary of all replications at one follow-up horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub ratio: f64,
    /// Censoring endpoint on the original time scale.
    pub tau_c: f64,
    pub mean_p_star: f64,
    pub mse_p_star: f64,
    pub mean_p_n: f64,
    pub mse_p_n: f64,
    pub censoring_prop: f64,
    /// Monte Carlo standard error of `censoring_prop`.
    pub censoring_prop_se: f64,
}

/// Estimates from one replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Replication {
    pub p_hat_n: f64,
    pub p_hat_star: f64,
    pub y_star: f64,
    pub censoring_prop: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Progress {
    Replication { grid_index: usize, replication: usize },
    GridPoint { grid_index: usize },
}

/// Receiver for progress notifications; called concurrently.
pub trait ProgressSink: Sync {
    fn record(&self, event: Progress);
}

impl ProgressSink for () {
    fn record(&self, _: Progress) {}
}

impl ProgressSink for Mutex<Vec<Progress>> {
    fn record(&self, event: Progress) {
        self.lock().expect("progress log poisoned").push(event);
    }
}

impl<F: Fn(Progress) + Sync> ProgressSink for F {
    fn record(&self, event: Progress) {
        self(event)
    }
}

/// Runs one replication. Data come from stream `(seed, k, j, 0)`; the
/// bootstrap uses seeds below `(seed, k, j, 1)`.
pub fn run_replication(cfg: &ExperimentConfig, grid_index: usize, replication: usize) -> Result<Replication> {
    let tau_c = cfg.grid_ratios[grid_index] * cfg.model.quantile(0.95);
    let (k, j) = (grid_index as u64, replication as u64);
    let mut rng = stream_at(cfg.seed, &[k, j, 0]);
    let data = gen_dataset(
        &cfg.model,
        cfg.p,
        tau_c,
        cfg.epsilon,
        cfg.n,
        cfg.psi_endpoint(),
        &mut rng,
    )?;
    let selection = select_y_star(
        &data.sample,
        &YSelectionConfig {
            grid: cfg.y_grid.clone(),
            n_bootstrap: cfg.n_bootstrap,
            seed: derive_path(cfg.seed, &[k, j, 1]),
        },
    )?;
    Ok(Replication {
        p_hat_n: plateau_estimate(&data.sample),
        p_hat_star: selection.estimate.p_hat_y,
        y_star: selection.y_star,
        censoring_prop: data.sample.censoring_proportion(),
    })
}

fn summarize(cfg: &ExperimentConfig, grid_index: usize, reps: &[Replication]) -> CurvePoint {
    let count = reps.len() as f64;
    let mean = |f: fn(&Replication) -> f64| reps.iter().map(f).sum::<f64>() / count;
    let mse = |f: fn(&Replication) -> f64| {
        reps.iter().map(|r| (f(r) - cfg.p).powi(2)).sum::<f64>() / count
    };
    let ratio = cfg.grid_ratios[grid_index];
    let censoring_prop = mean(|r| r.censoring_prop);
    let censoring_prop_se = if reps.len() > 1 {
        let ss: f64 = reps
            .iter()
            .map(|r| (r.censoring_prop - censoring_prop).powi(2))
            .sum();
        (ss / (count - 1.0) / count).sqrt()
    } else {
        0.0
    };
    CurvePoint {
        ratio,
        tau_c: ratio * cfg.model.quantile(0.95),
        mean_p_star: mean(|r| r.p_hat_star),
        mse_p_star: mse(|r| r.p_hat_star),
        mean_p_n: mean(|r| r.p_hat_n),
        mse_p_n: mse(|r| r.p_hat_n),
        censoring_prop,
        censoring_prop_se,
    }
}

/// Runs every replication at every grid ratio and summarizes each ratio.
/// Output is identical for identical configurations regardless of thread
/// count.
pub fn run_experiment(cfg: &ExperimentConfig, progress: &dyn ProgressSink) -> Result<Vec<CurvePoint>> {
    cfg.validate()?;
    let cells: Vec<(usize, usize)> = (0..cfg.grid_ratios.len())
        .flat_map(|k| (0..cfg.replications).map(move |j| (k, j)))
        .collect();
    let reps = cells
        .par_iter()
        .map(|&(k, j)| {
            let r = run_replication(cfg, k, j);
            progress.record(Progress::Replication {
                grid_index: k,
                replication: j,
            });
            r
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(reps
        .chunks(cfg.replications)
        .enumerate()
        .map(|(k, chunk)| {
            progress.record(Progress::GridPoint { grid_index: k });
            summarize(cfg, k, chunk)
        })
        .collect())
}

/// Simulated censoring proportions only (no estimation), per ratio: mean and
/// Monte Carlo standard error over `replications` data sets.
pub fn censoring_curve(cfg: &ExperimentConfig) -> Result<Vec<(f64, f64, f64)>> {
    cfg.validate()?;
    cfg.grid_ratios
        .iter()
        .enumerate()
        .map(|(k, &ratio)| {
            let tau_c = ratio * cfg.model.quantile(0.95);
            let props = (0..cfg.replications)
                .into_par_iter()
                .map(|j| {
                    let mut rng = stream_at(cfg.seed, &[k as u64, j as u64, 0]);
                    gen_dataset(&cfg.model, cfg.p, tau_c, cfg.epsilon, cfg.n, None, &mut rng)
                        .map(|d| d.sample.censoring_proportion())
                })
                .collect::<Result<Vec<f64>>>()?;
            let count = props.len() as f64;
            let mean = props.iter().sum::<f64>() / count;
            let var = props.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (count - 1.0).max(1.0);
            Ok((ratio, mean, (var / count).sqrt()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn inverse_transform_values() {
        let gpd1 = SimModel::Gpd { gamma: 1.0 };
        assert!((gpd1.quantile(0.95) - 19.0).abs() < 1e-12);
        assert_eq!(SimModel::Beta { mu: 10.0 / 7.0 }.quantile(0.0), 0.0);
        let gpd_neg = SimModel::Gpd { gamma: -0.5 };
        assert!((gpd_neg.quantile(1.0 - 1e-15) - 2.0).abs() < 1e-6);
        assert!((gpd_neg.quantile(0.95) - 2.0 * (1.0 - 0.05_f64.sqrt())).abs() < 1e-12);
        assert!((gpd_neg.quantile(0.95) - 1.55279).abs() < 1e-5);
        assert!((SimModel::HalfCauchy.quantile(0.5) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn model_invariants() {
        assert_eq!(SimModel::Gpd { gamma: 0.5 }.tau0(), f64::INFINITY);
        assert_eq!(SimModel::Gpd { gamma: -0.5 }.tau0(), 2.0);
        assert_eq!(SimModel::HalfCauchy.gamma(), 1.0);
        let beta = SimModel::Beta { mu: 10.0 / 7.0 };
        assert!((beta.gamma() + 0.7).abs() < 1e-12);
        assert_eq!(beta.tau0(), 1.0);
    }

    #[test]
    fn cdf_inverts_quantile() {
        for model in [
            SimModel::Gpd { gamma: 1.5 },
            SimModel::Gpd { gamma: -0.7 },
            SimModel::HalfCauchy,
            SimModel::Beta { mu: 2.0 },
        ] {
            for q in [0.1, 0.5, 0.9, 0.99] {
                assert!((model.cdf(model.quantile(q)) - q).abs() < 1e-12, "{model} {q}");
            }
        }
    }

    #[test]
    fn parse_models() {
        assert_eq!("gpd:1".parse::<SimModel>().unwrap(), SimModel::Gpd { gamma: 1.0 });
        assert_eq!("half-cauchy".parse::<SimModel>().unwrap(), SimModel::HalfCauchy);
        assert_eq!("beta:2".parse::<SimModel>().unwrap(), SimModel::Beta { mu: 2.0 });
        assert!("gpd:0".parse::<SimModel>().is_err());
        assert!("gpd".parse::<SimModel>().is_err());
        assert!("weibull:2".parse::<SimModel>().is_err());
        let m = SimModel::Gpd { gamma: -0.7 };
        assert_eq!(m.to_string().parse::<SimModel>().unwrap(), m);
    }

    #[test]
    fn atom_only_censoring() {
        // every C equals τ_c, so censoring happens iff T > τ_c
        let model = SimModel::Gpd { gamma: 1.0 };
        let d = gen_dataset(&model, 0.999_999, 3.0, 1.0, 500, None, &mut stream(4)).unwrap();
        for o in d.sample.observations() {
            if o.event {
                assert!(o.time <= 3.0);
            } else {
                assert_eq!(o.time, 3.0);
            }
        }
    }

    #[test]
    fn small_p_is_mostly_censored() {
        let model = SimModel::Gpd { gamma: 1.0 };
        let d = gen_dataset(&model, 0.01, 19.0, 0.05, 2000, None, &mut stream(5)).unwrap();
        assert!(d.sample.censoring_proportion() > 0.97);
        assert!(d.cured > 1900);
    }

    #[test]
    fn times_bounded_by_censoring_endpoint() {
        let model = SimModel::Beta { mu: 10.0 / 7.0 };
        let d = gen_dataset(&model, 0.5, 0.6, 0.05, 3000, None, &mut stream(6)).unwrap();
        assert!(d.sample.max_time() <= 0.6);
        assert!(d.sample.censoring_proportion() >= d.cured as f64 / 3000.0);
    }

    #[test]
    fn psi_applied_for_negative_index() {
        let model = SimModel::Gpd { gamma: -0.5 };
        let raw = gen_dataset(&model, 0.5, 1.0, 0.05, 100, None, &mut stream(8)).unwrap();
        let mapped = gen_dataset(&model, 0.5, 1.0, 0.05, 100, Some(2.0), &mut stream(8)).unwrap();
        for (a, b) in raw.sample.observations().iter().zip(mapped.sample.observations()) {
            assert_eq!(a.event, b.event);
            assert!((b.time - 1.0 / (2.0 - a.time)).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_estimator_mse() {
        let cfg = ExperimentConfig::desk_scale(SimModel::Gpd { gamma: 1.0 }, 0.5);
        let reps = vec![
            Replication {
                p_hat_n: 0.3,
                p_hat_star: 0.3,
                y_star: 0.9,
                censoring_prop: 0.5,
            };
            7
        ];
        let point = summarize(&cfg, 0, &reps);
        assert!((point.mse_p_n - 0.04).abs() < 1e-15);
        assert!((point.mean_p_star - 0.3).abs() < 1e-15);
        assert_eq!(point.censoring_prop_se, 0.0);
    }

    #[test]
    fn rejects_bad_experiment() {
        let mut cfg = ExperimentConfig::desk_scale(SimModel::Gpd { gamma: 1.0 }, 0.5);
        cfg.grid_ratios = vec![0.0, 0.5];
        assert!(run_experiment(&cfg, &()).is_err());
        cfg.grid_ratios = vec![0.8, 0.5];
        assert!(run_experiment(&cfg, &()).is_err());
    }

    #[test]
    fn population_censoring_probability() {
        // uniform F_0 on [0,1] (GPD γ = −1), τ_c = 1, ε = 0:
        // P(T > C) = ∫ (1 − c) dc = 1/2
        let pop = Population {
            model: SimModel::Gpd { gamma: -1.0 },
            p: 0.5,
            tau_c: 1.0,
            epsilon: 0.0,
        };
        assert!((pop.censoring_probability().unwrap() - 0.75).abs() < 1e-12);
    }
}
