//! Bootstrap choice of the extrapolation parameter `y`.
//!
//! For every resample `j` we take the largest grid value whose corrected
//! estimate exceeds that resample's plateau, average the resulting estimates,
//! and pick the grid value whose estimate on the original sample lies closest
//! to that average. Each resample contributes its estimate clamped to
//! `[0, 1]`; a handful of near-degenerate resamples would otherwise swamp the
//! average with values far above one.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evt::{p_hat_y_from_curve, CorrectedEstimate};
use crate::km::kaplan_meier;
use crate::rng::{derive_seed, stream, StreamRng};
use crate::sample::SurvivalSample;

/// Grid `{0.60, 0.62, …, 0.98}`.
pub fn default_y_grid() -> Vec<f64> {
    (0..20).map(|k| (60 + 2 * k) as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YSelectionConfig {
    pub grid: Vec<f64>,
    pub n_bootstrap: usize,
    pub seed: u64,
}

impl Default for YSelectionConfig {
    fn default() -> Self {
        Self {
            grid: default_y_grid(),
            n_bootstrap: 200,
            seed: 0,
        }
    }
}

impl YSelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::invalid("y_grid", "grid is empty"));
        }
        if let Some(y) = self.grid.iter().find(|&&y| !(y > 0.0 && y < 1.0)) {
            return Err(Error::invalid("y_grid", format!("{y} is not in (0, 1)")));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("y_grid", "grid must be strictly increasing"));
        }
        if self.n_bootstrap == 0 {
            return Err(Error::invalid("n_bootstrap", "must be positive"));
        }
        Ok(())
    }
}

/// Outcome of the bootstrap selection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YSelection {
    pub y_star: f64,
    pub estimate: CorrectedEstimate,
    /// Plateau `p̂_n` of the original sample.
    pub p_hat_n: f64,
    /// Average of the per-resample estimates.
    pub bootstrap_mean: f64,
}

/// `n` draws with replacement, re-sorted.
pub fn bootstrap_resample(sample: &SurvivalSample, rng: &mut StreamRng) -> SurvivalSample {
    let obs = sample.observations();
    let n = obs.len();
    let drawn = (0..n).map(|_| obs[rng.random_range(0..n)]).collect();
    SurvivalSample::new(drawn).expect("resample of a valid sample is valid")
}

/// Estimates `p̂_y` for every grid value on one sample, plus its plateau.
fn grid_estimates(sample: &SurvivalSample, grid: &[f64]) -> Result<(f64, Vec<CorrectedEstimate>)> {
    let curve = kaplan_meier(sample);
    let tau_hat = sample.max_time();
    let plateau = curve.evaluate(tau_hat);
    let estimates = grid
        .iter()
        .map(|&y| p_hat_y_from_curve(&curve, tau_hat, y))
        .collect::<Result<Vec<_>>>()?;
    Ok((plateau, estimates))
}

/// The estimate at the largest grid value whose `p̂_y` exceeds the plateau,
/// or the plateau itself when no grid value does, clamped to `[0, 1]`.
fn resample_estimate(sample: &SurvivalSample, grid: &[f64]) -> Result<f64> {
    let (plateau, estimates) = grid_estimates(sample, grid)?;
    Ok(estimates
        .iter()
        .rev()
        .find(|e| e.p_hat_y > plateau)
        .map_or(plateau, |e| e.clamped()))
}

/// Selects `y*` by the bootstrap rule. Resample `j` draws from the stream
/// `derive_seed(cfg.seed, j)`, so the result does not depend on scheduling.
pub fn select_y_star(sample: &SurvivalSample, cfg: &YSelectionConfig) -> Result<YSelection> {
    cfg.validate()?;
    let (p_hat_n, estimates) = grid_estimates(sample, &cfg.grid)?;

    let per_resample = (0..cfg.n_bootstrap as u64)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream(derive_seed(cfg.seed, j));
            resample_estimate(&bootstrap_resample(sample, &mut rng), &cfg.grid)
        })
        .collect::<Result<Vec<f64>>>()?;
    // sequential sum keeps the result bit-identical across thread counts
    let bootstrap_mean = per_resample.iter().sum::<f64>() / per_resample.len() as f64;

    let mut best = cfg.grid.len() - 1;
    let mut best_dist = (estimates[best].p_hat_y - bootstrap_mean).abs();
    for k in (0..best).rev() {
        let d = (estimates[k].p_hat_y - bootstrap_mean).abs();
        // strict: ties stay with the larger y
        if d < best_dist {
            best = k;
            best_dist = d;
        }
    }

    Ok(YSelection {
        y_star: cfg.grid[best],
        estimate: estimates[best],
        p_hat_n,
        bootstrap_mean,
    })
}
