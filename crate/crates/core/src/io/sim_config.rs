//! Flat `key = value` configuration for simulation runs and the files a run
//! writes.
//!
//! ```text
//! # model 1 with three tail indices, all three susceptible fractions
//! model = gpd:0.5, gpd:1, gpd:1.5
//! p = 0.25, 0.5, 0.75
//! N = 200
//! N_b = 200
//! grid_points = 24
//! seed = 2019
//! ```
//!
//! Keys mirror [`ExperimentConfig`]: `model`, `p`, `epsilon`, `n`,
//! `N`/`replications`, `N_b`/`n_bootstrap`, `grid_ratios`, `grid_points`,
//! `y_grid`, `seed`, `apply_psi`, plus `preset` (`desk` or `full`). `model`
//! and `p` take comma-separated lists; every combination is run.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::simulation::{
    run_experiment, uniform_ratio_grid, CurvePoint, ExperimentConfig, ProgressSink, SimModel,
};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

pub const CURVE_COLUMNS: [&str; 7] = [
    "ratio",
    "tau_c",
    "mean_p_star",
    "mse_p_star",
    "mean_p_n",
    "mse_p_n",
    "censoring_prop",
];

/// Models of the full study: GPD with six indices, half-Cauchy, Beta(1, 10/7).
pub fn full_study_models() -> Vec<SimModel> {
    let mut models: Vec<SimModel> = [0.5, 1.0, 1.5, -0.5, -0.7, -1.0]
        .into_iter()
        .map(|gamma| SimModel::Gpd { gamma })
        .collect();
    models.push(SimModel::HalfCauchy);
    models.push(SimModel::Beta { mu: 10.0 / 7.0 });
    models
}

pub fn full_study_p() -> Vec<f64> {
    vec![0.25, 0.5, 0.75]
}

/// A resolved simulation request: every `(model, p)` pair shares the other
/// settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationPlan {
    pub models: Vec<SimModel>,
    pub p_values: Vec<f64>,
    pub epsilon: f64,
    pub n: usize,
    pub replications: usize,
    pub n_bootstrap: usize,
    pub grid_ratios: Vec<f64>,
    pub y_grid: Vec<f64>,
    pub seed: u64,
    pub apply_psi: bool,
}

#[derive(Debug, Default, Clone)]
struct Partial {
    models: Option<Vec<SimModel>>,
    p_values: Option<Vec<f64>>,
    epsilon: Option<f64>,
    n: Option<usize>,
    replications: Option<usize>,
    n_bootstrap: Option<usize>,
    grid_ratios: Option<Vec<f64>>,
    y_grid: Option<Vec<f64>>,
    seed: Option<u64>,
    apply_psi: Option<bool>,
}

fn parse_one<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::bad_config(key, format!("cannot parse `{value}`")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_one(key, s))
        .collect::<Result<Vec<T>>>()?;
    if items.is_empty() {
        return Err(Error::bad_config(key, "empty list"));
    }
    Ok(items)
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::bad_config(key, format!("`{value}` is not a boolean"))),
    }
}

impl Partial {
    fn preset(name: &str) -> Result<Self> {
        let full = Partial {
            models: Some(full_study_models()),
            p_values: Some(full_study_p()),
            epsilon: Some(0.05),
            n: Some(1000),
            replications: Some(200),
            n_bootstrap: Some(200),
            grid_ratios: Some(uniform_ratio_grid(24)),
            y_grid: None,
            seed: None,
            apply_psi: Some(true),
        };
        match name.trim() {
            "full" => Ok(full),
            "desk" => Ok(Partial {
                models: Some(vec![SimModel::Gpd { gamma: 1.0 }]),
                p_values: Some(vec![0.5]),
                replications: Some(50),
                n_bootstrap: Some(100),
                grid_ratios: Some(vec![0.4, 0.6, 0.8, 1.0]),
                ..full
            }),
            other => Err(Error::bad_config("preset", format!("unknown preset `{other}`"))),
        }
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "model" | "models" => self.models = Some(parse_list(key, value)?),
            "p" => self.p_values = Some(parse_list(key, value)?),
            "epsilon" => self.epsilon = Some(parse_one(key, value)?),
            "n" => self.n = Some(parse_one(key, value)?),
            "N" | "replications" => self.replications = Some(parse_one(key, value)?),
            "N_b" | "n_bootstrap" | "nb" => self.n_bootstrap = Some(parse_one(key, value)?),
            "grid_ratios" => self.grid_ratios = Some(parse_list(key, value)?),
            "grid_points" => {
                let points: usize = parse_one(key, value)?;
                if points == 0 {
                    return Err(Error::bad_config(key, "must be positive"));
                }
                self.grid_ratios = Some(uniform_ratio_grid(points));
            }
            "y_grid" => self.y_grid = Some(parse_list(key, value)?),
            "seed" => self.seed = Some(parse_one(key, value)?),
            "apply_psi" => self.apply_psi = Some(parse_bool(key, value)?),
            _ => return Err(Error::bad_config(key, "unknown key")),
        }
        Ok(())
    }

    fn overlay(self, top: Partial) -> Partial {
        Partial {
            models: top.models.or(self.models),
            p_values: top.p_values.or(self.p_values),
            epsilon: top.epsilon.or(self.epsilon),
            n: top.n.or(self.n),
            replications: top.replications.or(self.replications),
            n_bootstrap: top.n_bootstrap.or(self.n_bootstrap),
            grid_ratios: top.grid_ratios.or(self.grid_ratios),
            y_grid: top.y_grid.or(self.y_grid),
            seed: top.seed.or(self.seed),
            apply_psi: top.apply_psi.or(self.apply_psi),
        }
    }
}

/// Splits `key = value` lines; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::bad_config(format!("line {}", i + 1), format!("expected `key = value`, got `{line}`"))
        })?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

impl SimulationPlan {
    /// Resolves settings with precedence preset < config pairs < overrides.
    /// A `preset` key in either layer selects the base.
    pub fn resolve(
        file_pairs: &[(String, String)],
        overrides: &[(String, String)],
        default_seed: u64,
    ) -> Result<Self> {
        let preset = overrides
            .iter()
            .chain(file_pairs)
            .filter(|(k, _)| k == "preset")
            .map(|(_, v)| v.as_str())
            .next();
        let base = match preset {
            Some(name) => Partial::preset(name)?,
            None => Partial::default(),
        };
        let mut file = Partial::default();
        for (k, v) in file_pairs.iter().filter(|(k, _)| k != "preset") {
            file.set(k, v)?;
        }
        let mut top = Partial::default();
        for (k, v) in overrides.iter().filter(|(k, _)| k != "preset") {
            top.set(k, v)?;
        }
        let merged = base.overlay(file).overlay(top);

        let plan = SimulationPlan {
            models: merged.models.ok_or_else(|| Error::bad_config("model", "missing"))?,
            p_values: merged.p_values.ok_or_else(|| Error::bad_config("p", "missing"))?,
            epsilon: merged.epsilon.unwrap_or(0.05),
            n: merged.n.unwrap_or(1000),
            replications: merged.replications.unwrap_or(200),
            n_bootstrap: merged.n_bootstrap.unwrap_or(200),
            grid_ratios: merged.grid_ratios.unwrap_or_else(|| uniform_ratio_grid(24)),
            y_grid: merged.y_grid.unwrap_or_else(crate::selection::default_y_grid),
            seed: merged.seed.unwrap_or(default_seed),
            apply_psi: merged.apply_psi.unwrap_or(true),
        };
        for cfg in plan.experiments() {
            cfg.validate()
                .map_err(|e| Error::bad_config("config", e.to_string()))?;
        }
        Ok(plan)
    }

    /// One experiment per `(model, p)`, models outermost.
    pub fn experiments(&self) -> Vec<ExperimentConfig> {
        self.models
            .iter()
            .flat_map(|&model| {
                self.p_values.iter().map(move |&p| ExperimentConfig {
                    model,
                    p,
                    epsilon: self.epsilon,
                    n: self.n,
                    replications: self.replications,
                    n_bootstrap: self.n_bootstrap,
                    grid_ratios: self.grid_ratios.clone(),
                    y_grid: self.y_grid.clone(),
                    seed: self.seed,
                    apply_psi: self.apply_psi,
                })
            })
            .collect()
    }
}

/// File name of the curve for one experiment, e.g. `curve_gpd_1_p0.5.csv`.
pub fn curve_file_name(cfg: &ExperimentConfig) -> String {
    let model: String = cfg
        .model
        .to_string()
        .chars()
        .map(|c| if c == ':' { '_' } else { c })
        .collect();
    format!("curve_{model}_p{}.csv", cfg.p)
}

pub fn write_curve_csv(path: &Path, points: &[CurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CURVE_COLUMNS)?;
    for pt in points {
        w.write_record([
            pt.ratio,
            pt.tau_c,
            pt.mean_p_star,
            pt.mse_p_star,
            pt.mean_p_n,
            pt.mse_p_n,
            pt.censoring_prop,
        ]
        .map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct ManifestEntry<'a> {
    file: String,
    config: &'a ExperimentConfig,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    seed: u64,
    plan: &'a SimulationPlan,
    runs: Vec<ManifestEntry<'a>>,
}

/// Runs every experiment of the plan, writing one curve CSV each and a
/// `manifest.json`. Returns the written paths, manifest last.
pub fn run_plan(plan: &SimulationPlan, out_dir: &Path, progress: &dyn ProgressSink) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let experiments = plan.experiments();
    let mut written = Vec::with_capacity(experiments.len() + 1);
    let mut entries = Vec::with_capacity(experiments.len());
    for cfg in &experiments {
        let points = run_experiment(cfg, progress)?;
        let name = curve_file_name(cfg);
        let path = out_dir.join(&name);
        write_curve_csv(&path, &points)?;
        written.push(path);
        entries.push(ManifestEntry { file: name, config: cfg });
    }
    let manifest = Manifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        seed: plan.seed,
        plan,
        runs: entries,
    };
    let path = out_dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text)?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(text: &str) -> Vec<(String, String)> {
        parse_pairs(text).unwrap()
    }

    #[test]
    fn missing_model_is_reported() {
        match SimulationPlan::resolve(&pairs("p = 0.5\n"), &[], 1) {
            Err(Error::BadConfig { key, .. }) => assert_eq!(key, "model"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_reported() {
        match SimulationPlan::resolve(&pairs("model = gpd:1\np = 0.5\nfoo = 3\n"), &[], 1) {
            Err(Error::BadConfig { key, .. }) => assert_eq!(key, "foo"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn overrides_win_over_file_and_preset() {
        let file = pairs("preset = desk\nN = 10 # small\n");
        let over = vec![("N".to_string(), "3".to_string()), ("seed".to_string(), "8".to_string())];
        let plan = SimulationPlan::resolve(&file, &over, 1).unwrap();
        assert_eq!(plan.replications, 3);
        assert_eq!(plan.seed, 8);
        assert_eq!(plan.n_bootstrap, 100);
        assert_eq!(plan.grid_ratios, vec![0.4, 0.6, 0.8, 1.0]);
    }

    #[test]
    fn full_preset_covers_study() {
        let plan = SimulationPlan::resolve(&pairs("preset = full"), &[], 2019).unwrap();
        assert_eq!(plan.experiments().len(), 24);
        assert_eq!(plan.grid_ratios.len(), 24);
        assert_eq!((plan.replications, plan.n_bootstrap, plan.n), (200, 200, 1000));
    }

    #[test]
    fn lists_expand_to_combinations() {
        let plan = SimulationPlan::resolve(
            &pairs("model = gpd:1, beta:2\np = 0.25, 0.75\ngrid_points = 4"),
            &[],
            0,
        )
        .unwrap();
        let names: Vec<String> = plan.experiments().iter().map(curve_file_name).collect();
        assert_eq!(
            names,
            [
                "curve_gpd_1_p0.25.csv",
                "curve_gpd_1_p0.75.csv",
                "curve_beta_2_p0.25.csv",
                "curve_beta_2_p0.75.csv"
            ]
        );
        assert_eq!(plan.grid_ratios, vec![0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn malformed_line() {
        assert!(parse_pairs("model gpd:1").is_err());
    }
}
