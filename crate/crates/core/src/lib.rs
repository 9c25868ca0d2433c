//! Cure-rate estimation from right-censored survival data when follow-up is
//! too short for the Kaplan-Meier curve to reach its plateau.
//!
//! The crate provides the product-limit machinery ([`km`]), the
//! extreme-value corrected estimator and its bootstrap tuning ([`evt`],
//! [`selection`]), its asymptotic variance ([`variance`]), a Monte Carlo
//! harness ([`simulation`]) and file-level workflows ([`io`]).

pub mod error;
pub mod evt;
pub mod io;
pub mod km;
pub mod quadrature;
pub mod rng;
pub mod sample;
pub mod selection;
pub mod simulation;
pub mod variance;

pub use error::{Error, Result};
pub use evt::{
    corrected_estimate, p_hat_y_from_sample, p_y_true, psi_transform, psi_transform_sample,
    CorrectedEstimate, CorrectionInput,
};
pub use km::{censoring_km, kaplan_meier, plateau_estimate, StepCurve};
pub use sample::{build_sample, censoring_proportion, Observation, SurvivalSample};
pub use selection::{bootstrap_resample, default_y_grid, select_y_star, YSelection, YSelectionConfig};
pub use simulation::{run_experiment, CurvePoint, ExperimentConfig, SimModel};
pub use variance::{sigma2_exact, sigma2_plugin, v_hat, wald_interval, VarianceBreakdown};
