use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;
use qtwm_cli::run::{metric, sweep_seed, Regime};
use qtwm_cli::{load, spm_scan, sweep, RunOptions};

fn template(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("templates").join(format!("{name}.toml"))
}

fn qtwm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtwm")).args(args).output().expect("run qtwm")
}

fn options(dir: &Path) -> RunOptions {
    RunOptions { out: Some(dir.to_path_buf()), workers: 1, emit_plots: false }
}

/// Template text with its data paths made absolute, for configs written elsewhere.
fn relocated(name: &str) -> String {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("templates").join("data");
    std::fs::read_to_string(template(name)).unwrap().replace("\"data/", &format!("\"{}/", data.display()))
}

fn diagnostic(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.lines().last().expect("diagnostic line")).expect("diagnostic is JSON")
}

#[test]
fn simulate_is_deterministic_and_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let config = template("sm_psg");
    for out in [&a, &b] {
        let run = qtwm(&["simulate", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    }
    for file in ["fom.json", "jsa_abs.csv", "jsa_phase.csv", "jsa.json", "state.json", "propagator.json"] {
        assert_eq!(std::fs::read(a.join(file)).unwrap(), std::fs::read(b.join(file)).unwrap(), "{file}");
    }
    let fom: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("fom.json")).unwrap()).unwrap();
    let f = &fom["figures_of_merit"];
    assert!(f["schmidt_number"].as_f64().unwrap() >= 1.0);
    let (ns, ni) = (f["photons_signal"].as_f64().unwrap(), f["photons_idler"].as_f64().unwrap());
    assert!((ns - ni).abs() <= 1e-10 * ns);
}

#[test]
fn every_output_names_the_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let loaded = load(&template("qfc")).unwrap();
    let opts = RunOptions { emit_plots: true, ..options(dir.path()) };
    let report = qtwm_cli::simulate(&loaded, &opts).unwrap();
    assert!(report.files.iter().any(|f| f.ends_with("jsa_abs.png")));
    for file in report.files.iter().filter(|f| f.extension().is_some_and(|e| e != "png")) {
        let text = std::fs::read_to_string(file).unwrap();
        assert!(text.contains(&loaded.sha256), "{}", file.display());
    }
    let back = qtwm_core::propagator::Propagator::read_json(dir.path().join("propagator.json")).unwrap();
    assert_eq!(back.dim(), 32);
}

#[test]
fn binary_propagator_carries_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bin.toml");
    std::fs::write(&config, relocated("qfc").replace("propagator = \"json\"", "propagator = \"binary\"")).unwrap();
    let loaded = load(&config).unwrap();
    qtwm_cli::simulate(&loaded, &options(dir.path())).unwrap();
    let bytes = std::fs::read(dir.path().join("propagator.bin")).unwrap();
    let (p, meta) = qtwm_core::propagator::Propagator::read_binary_with_metadata(bytes.as_slice()).unwrap();
    assert!(meta.contains(&loaded.sha256));
    assert!(p.commutator_defect() < 1e-9);
}

#[test]
fn missing_dispersion_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("broken.toml");
    let text = relocated("sm_psg");
    let pump_line = text.lines().find(|l| l.starts_with("pump = ")).unwrap().to_string();
    std::fs::write(&config, text.replace(&pump_line, "pump = \"nowhere/pump.csv\"")).unwrap();
    let run = qtwm(&["simulate", config.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    let d = diagnostic(&run);
    assert_eq!(d["kind"], "config");
    assert_eq!(d["key"], "dispersion.pump");
    assert!(d["message"].as_str().unwrap().contains("file not found"));
    assert!(!dir.path().join("fom.json").exists());
}

#[test]
fn bad_values_and_paths_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let config = template("qfc");
    let run = qtwm(&["sweep", config.to_str().unwrap(), "--param", "errors.loss_db_per_inch", "--values", "1"]);
    assert_eq!(run.status.code(), Some(2));
    assert_eq!(diagnostic(&run)["key"], "errors.loss_db_per_inch");

    let run = qtwm(&["sweep", config.to_str().unwrap(), "--param", "errors.missing_probability", "--values", "1.5"]);
    assert_eq!(run.status.code(), Some(2));
    assert_eq!(diagnostic(&run)["key"], "errors.missing_probability");

    let energy = dir.path().join("energy.toml");
    std::fs::write(&energy, relocated("qfc").replace("idler_wavelength = 7.070175438596492e-7", "idler_wavelength = 7.2e-7"))
        .unwrap();
    let run = qtwm(&["simulate", energy.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    assert_eq!(diagnostic(&run)["key"], "grid.idler_wavelength");
}

#[test]
fn sweep_rows_cover_every_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = template("qfc");
    let run = qtwm(&[
        "sweep",
        config.to_str().unwrap(),
        "--param",
        "errors.domain_shift",
        "--values",
        "1e-6",
        "--seeds",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.iter().filter(|l| l.starts_with("run,")).count(), 3);
    assert_eq!(rows.iter().filter(|l| l.starts_with("aggregate,")).count(), 1);
    assert_eq!(rows.len(), 4);
}

#[test]
fn loss_sweep_lowers_photon_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let loaded = load(&template("sm_psg")).unwrap();
    let report = sweep(&loaded, "errors.loss_db_per_cm", Some(&[0.0, 0.5, 1.0]), 1, &options(dir.path())).unwrap();
    let k = metric("photons_signal").unwrap();
    let n: Vec<f64> = report.aggregates.iter().map(|a| a.mean[k].unwrap()).collect();
    assert!(n[0] > n[1] && n[1] > n[2], "{n:?}");
}

#[test]
fn erased_grating_stops_conversion() {
    let dir = tempfile::tempdir().unwrap();
    let loaded = load(&template("qfc")).unwrap();
    let report = sweep(&loaded, "errors.missing_probability", Some(&[0.0, 1.0]), 2, &options(dir.path())).unwrap();
    let k = metric("conversion_probability").unwrap();
    let (clean, erased) = (report.aggregates[0].mean[k].unwrap(), report.aggregates[1].max[k].unwrap());
    assert!(erased < 0.05 * clean, "{erased} vs {clean}");
}

#[test]
fn sweep_output_does_not_depend_on_workers() {
    let loaded = load(&template("qfc")).unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for (dir, workers) in dirs.iter().zip([1, 3]) {
        let opts = RunOptions { workers, ..options(dir.path()) };
        sweep(&loaded, "errors.missing_probability", Some(&[0.0, 0.3]), 3, &opts).unwrap();
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("sweep.csv")).unwrap();
    assert_eq!(read(&dirs[0]), read(&dirs[1]));
}

#[test]
fn combined_preset_scales_every_listed_key() {
    let loaded = load(&template("bsvg")).unwrap();
    let half = loaded.with_combined(0.5).unwrap();
    for (key, max) in &loaded.config.combined.maxima {
        let mut node = &half.raw;
        for part in key.split('.') {
            node = &node[part];
        }
        assert_eq!(node.as_float().unwrap(), 0.5 * max, "{key}");
    }
    let none = loaded.with_combined(0.0).unwrap();
    assert_eq!(none.config.errors.loss_db_per_cm, 0.0);
}

#[test]
fn derived_seeds_do_not_collide() {
    let mut seen = HashSet::with_capacity(1_000_000);
    for value in 0..1000 {
        for rep in 0..1000 {
            assert!(seen.insert(sweep_seed(7, value, rep)), "collision at ({value}, {rep})");
        }
    }
}

#[test]
fn spm_scan_is_monotone_with_contiguous_regimes() {
    let dir = tempfile::tempdir().unwrap();
    let loaded = load(&template("sm_psg")).unwrap();
    let photons = [1e5, 1e6, 1e7, 3e7, 1e8, 2e8];
    let report = spm_scan(&loaded, &photons, &options(dir.path())).unwrap();
    let fom: Vec<f64> = report.rows.iter().map(|r| r.overlap_fom).collect();
    assert!(fom.windows(2).all(|w| w[1] <= w[0]), "{fom:?}");
    assert!((fom[0] - 1.0).abs() < 1e-6);
    assert_eq!(report.rows[0].regime, Regime::NearZero);
    assert_eq!(report.rows.last().unwrap().regime, Regime::Strong);
    let mut changes = 0;
    for w in report.rows.windows(2) {
        if w[0].regime != w[1].regime {
            changes += 1;
        }
    }
    assert!(changes <= 2);
    let text = std::fs::read_to_string(&report.path).unwrap();
    assert!(text.starts_with(&format!("# config_sha256={}", loaded.sha256)));
}

fn severity(r: Regime) -> u8 {
    match r {
        Regime::NearZero => 0,
        Regime::Weak => 1,
        Regime::Strong => 2,
    }
}

proptest! {
    #[test]
    fn regimes_follow_threshold_order(mut foms in proptest::collection::vec(0.0f64..=1.0, 1..40), a in 0.01f64..1.0, b in 0.01f64..1.0) {
        let thresholds = [a.max(b), a.min(b)];
        foms.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let labels: Vec<u8> = foms.iter().map(|&f| severity(Regime::classify(f, thresholds))).collect();
        prop_assert!(labels.windows(2).all(|w| w[0] <= w[1]));
    }
}
