use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use evtcure::io::input::read_survival_csv;
use evtcure::plateau_estimate;
use evtcure::rng::stream_at;
use evtcure::simulation::{gen_dataset, SimModel};

fn evtcure(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evtcure"))
        .args(args)
        .env_remove("EVTCURE_SEED")
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Model 1 data (γ = 1, p = 0.75) censored at ratio 0.9 of the 95% quantile.
fn write_fixture(path: &Path, n: usize, seed: u64) {
    let model = SimModel::Gpd { gamma: 1.0 };
    let tau_c = 0.9 * model.quantile(0.95);
    let mut rng = stream_at(seed, &[0]);
    let d = gen_dataset(&model, 0.75, tau_c, 0.05, n, None, &mut rng).unwrap();
    let mut text = String::from("time,status,arm\n");
    for (i, o) in d.sample.observations().iter().enumerate() {
        text.push_str(&format!("{},{},{}\n", o.time, o.event as u8, if i % 2 == 0 { "a" } else { "b" }));
    }
    fs::write(path, text).unwrap();
}

#[test]
fn analyze_corrects_toward_truth_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("fixture.csv");
    write_fixture(&data, 2000, 42);
    let run = |out: &str| {
        let out = dir.path().join(out);
        let o = evtcure(&["analyze", "--input", p(&data), "--group", "arm", "--nb", "200", "--seed", "3", "--out", p(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read_to_string(out).unwrap()
    };
    let a = run("a.json");
    assert_eq!(a, run("b.json"));

    let report: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(report["schema_version"], 1);
    let groups = report["groups"].as_array().unwrap();
    assert_eq!(groups.len(), 3);
    assert_eq!(groups[0]["label"], "All");
    let all = &groups[0];
    let km = all["cure_rate_km"].as_f64().unwrap();
    let corrected = all["cure_rate_corrected"].as_f64().unwrap();
    assert!((corrected - 0.25).abs() < (km - 0.25).abs(), "corrected {corrected}, km {km}");
    for g in groups {
        let star = g["p_hat_y_star"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&star));
        if let (Some(lo), Some(hi)) = (g["ci_lower"].as_f64(), g["ci_upper"].as_f64()) {
            assert!(lo <= hi);
        }
    }
}

#[test]
fn analyze_seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    write_fixture(&data, 300, 1);
    let with_env = Command::new(env!("CARGO_BIN_EXE_evtcure"))
        .args(["analyze", "--input", p(&data), "--nb", "20"])
        .env("EVTCURE_SEED", "11")
        .output()
        .unwrap();
    let with_flag = evtcure(&["analyze", "--input", p(&data), "--nb", "20", "--seed", "11"]);
    assert!(with_env.status.success());
    assert_eq!(with_env.stdout, with_flag.stdout);
}

#[test]
fn bad_row_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    fs::write(&data, "time,status\n1,1\n2,0\n3,1\n4,2\n").unwrap();
    let o = evtcure(&["analyze", "--input", p(&data)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 5"));

    let o = evtcure(&["analyze", "--input", p(&dir.path().join("missing.csv"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn transform_round_trip_keeps_plateau() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let out = dir.path().join("t.csv");
    fs::write(&data, "time,status,arm\n0.1,1,a\n0.4,0,b\n0.2,1,a\n0.9,1,b\n0.6,0,a\n").unwrap();
    let o = evtcure(&["transform", "--input", p(&data), "--tau0", "1", "--out", p(&out)]);
    assert!(o.status.success());
    let before = read_survival_csv(&data, Some("arm")).unwrap();
    let after = read_survival_csv(&out, Some("arm")).unwrap();
    assert_eq!(before.len(), after.len());
    for (b, a) in before.iter().zip(&after) {
        assert_eq!(b.label, a.label);
        assert_eq!(b.sample.len(), a.sample.len());
        assert_eq!(b.sample.event_count(), a.sample.event_count());
        assert_eq!(b.sample.censoring_proportion(), a.sample.censoring_proportion());
        assert!((plateau_estimate(&b.sample) - plateau_estimate(&a.sample)).abs() < 1e-15);
    }

    let o = evtcure(&["transform", "--input", p(&data), "--tau0", "0.9", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_requires_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.cfg");
    fs::write(&cfg, "p = 0.5\nN = 2\n").unwrap();
    let o = evtcure(&["simulate", "--config", p(&cfg), "--out-dir", p(&dir.path().join("out"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`model`"));
}

#[test]
fn simulate_writes_curves_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.cfg");
    fs::write(&cfg, "# tiny run\nmodel = gpd:1, beta:2\np = 0.5\nn = 200\nN = 3\nN_b = 5\ngrid_ratios = 0.5, 1\n").unwrap();
    let out = dir.path().join("out");
    let o = evtcure(&["simulate", "--config", p(&cfg), "--set", "seed=4", "--out-dir", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("curve_gpd_1_p0.5.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "ratio,tau_c,mean_p_star,mse_p_star,mean_p_n,mse_p_n,censoring_prop");
    assert_eq!(lines.len(), 3);
    assert!(out.join("curve_beta_2_p0.5.csv").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 4);
    assert_eq!(manifest["plan"]["replications"], 3);
    assert_eq!(manifest["runs"].as_array().unwrap().len(), 2);
}

#[test]
fn simulate_desk_preset_emits_four_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = evtcure(&["simulate", "--preset", "desk", "--set", "N=2", "--set", "N_b=5", "--out-dir", p(&out)]);
    assert!(o.status.success());
    let csv = fs::read_to_string(out.join("curve_gpd_1_p0.5.csv")).unwrap();
    let ratios: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ratios, ["0.4", "0.6", "0.8", "1"]);
}

#[test]
fn unknown_config_key_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let o = evtcure(&["simulate", "--preset", "desk", "--set", "bogus=1", "--out-dir", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}
