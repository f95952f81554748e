//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::{single_mode, sinc_oracle, Poling, Synth};
use num_complex::Complex64;
use qtwm_cli::run::{metric, Aggregate};
use qtwm_cli::{evaluate, load, spm_scan, sweep, RunOptions};
use qtwm_core::analysis::{
    figures_of_merit, jsa_decompose, moment_m, photon_moments, qfc_decompose, trace_real, transform_through,
    LadderOp, Term,
};
use qtwm_core::linalg::relative_distance;
use qtwm_core::profile::{inject_domain_errors, periodic_poling, DomainErrorModel};
use qtwm_core::propagator::{
    build_mesh, ode_reference, propagator_distance, trotter_propagate, trotter_propagate_with, uniform_mesh,
    LossModel, MeshOptions, ProcessKind, Propagator, TrotterOptions,
};
use qtwm_core::pump::{spm_overlap_fom, AttenuationProfile, PumpPulse};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn template(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("templates").join(format!("{name}.toml"))
}

fn scratch() -> tempfile::TempDir {
    tempfile::tempdir().expect("temporary directory")
}

fn run(s: &Synth) -> Propagator {
    let scenario = s.scenario();
    let mesh = build_mesh(&scenario, &MeshOptions::default()).unwrap();
    trotter_propagate(&scenario, &mesh).unwrap()
}

fn db_per_cm(db: f64) -> f64 {
    db * 10f64.ln() / 10.0 * 100.0
}

fn commutators() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    for case in 0..20 {
        let kind = if case % 2 == 0 { ProcessKind::Pdc } else { ProcessKind::Qfc };
        let poling = [Poling::Unpoled, Poling::Periodic, Poling::Apodized][rng.gen_range(0..3)];
        let modes = rng.gen_range(16..=64);
        // Collective PDC gain grows with the number of coupled modes.
        let gain = match kind {
            ProcessKind::Pdc => rng.gen_range(0.1..1.5) * 4.0 / modes as f64,
            ProcessKind::Qfc => rng.gen_range(0.1..2.5),
        };
        let s = Synth {
            kind,
            modes,
            gain,
            poling,
            detuning: rng.gen_range(-500.0..500.0),
            pump_width: rng.gen_range(0.2..1.2),
            xpm: rng.gen_range(0.0..0.8),
            spm: rng.gen_range(0.0..0.5),
            pump_alpha: rng.gen_range(0.0..20.0),
            inhomogeneity: rng.gen_bool(0.5).then(|| (rng.gen_range(0.0..3e3), 1e-3, 30, rng.gen())),
            ..Synth::default()
        };
        let p = run(&s);
        worst = worst.max(p.commutator_defect());
    }
    let elapsed = start.elapsed();
    check(
        worst < 1e-9 && elapsed < Duration::from_secs(120),
        format!("worst defect {worst:.2e} over 20 scenarios in {:.1} s", elapsed.as_secs_f64()),
    )
}

fn oracle() -> Outcome {
    let start = Instant::now();
    let base = Synth { modes: 32, ..Synth::default() };
    let cases = [
        Synth { poling: Poling::Apodized, inhomogeneity: Some((3e3, 1e-3, 40, 3)), ..base.clone() },
        Synth { gain: 1.5, xpm: 0.4, poling: Poling::Periodic, detuning: 200.0, ..base.clone() },
        Synth { kind: ProcessKind::Qfc, gain: 2.0, poling: Poling::Apodized, xpm: 0.3, ..base.clone() },
        Synth {
            kind: ProcessKind::Qfc,
            gain: 1.2,
            poling: Poling::Apodized,
            inhomogeneity: Some((2e3, 1e-3, 40, 9)),
            pump_alpha: 10.0,
            ..base.clone()
        },
        Synth { gain: 0.8, poling: Poling::Unpoled, detuning: 300.0, pump_width: 0.3, ..base.clone() },
    ];
    let mut worst = 0.0f64;
    for s in &cases {
        let scenario = s.scenario();
        let mesh = uniform_mesh(&scenario, 500);
        let a = trotter_propagate(&scenario, &mesh).unwrap();
        let b = ode_reference(&scenario, &mesh).unwrap();
        worst = worst.max(propagator_distance(&a, &b));
    }
    let elapsed = start.elapsed();
    check(
        worst < 1e-6 && elapsed < Duration::from_secs(300),
        format!("worst relative distance {worst:.2e} in {:.1} s", elapsed.as_secs_f64()),
    )
}

fn normalized_abs(m: &qtwm_core::CMatrix) -> Vec<f64> {
    let peak = m.iter().map(|c| c.norm()).fold(0.0, f64::max);
    m.iter().map(|c| c.norm() / peak).collect()
}

fn low_gain_jsa() -> Outcome {
    let s = Synth { modes: 24, gain: 1e-3, poling: Poling::Unpoled, detuning: 150.0, pump_width: 0.4, ..Synth::default() };
    let scenario = s.scenario();
    let p = trotter_propagate(&scenario, &uniform_mesh(&scenario, 50)).unwrap();
    let dec = jsa_decompose(&moment_m(&p).unwrap()).unwrap();
    let ours = normalized_abs(&dec.jsa);
    let oracle = normalized_abs(&sinc_oracle(&s, &scenario));
    let worst = ours.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    check(worst < 0.01, format!("L-infinity deviation {worst:.2e}"))
}

fn pair_symmetry() -> Outcome {
    let (mut sym, mut schmidt) = (0.0f64, 0.0f64);
    for gain in [0.05, 0.9, 2.2] {
        let p = run(&Synth {
            modes: 24,
            gain,
            poling: Poling::Apodized,
            xpm: 0.3,
            spm: 0.2,
            inhomogeneity: Some((2e3, 1e-3, 30, 5)),
            ..Synth::default()
        });
        let (ns, ni) = photon_moments(&p).unwrap();
        let (ts, ti) = (trace_real(&ns), trace_real(&ni));
        let dec = jsa_decompose(&moment_m(&p).unwrap()).unwrap();
        let total: f64 = dec.squeezing.iter().map(|r| r.sinh().powi(2)).sum();
        sym = sym.max((ts - ti).abs() / ts);
        schmidt = schmidt.max((total - ts).abs() / ts);
    }
    check(sym < 1e-10 && schmidt < 1e-8, format!("trace mismatch {sym:.2e}, sinh^2 sum mismatch {schmidt:.2e}"))
}

fn loss_law() -> Outcome {
    let length = 1e-2;
    let loss = LossModel::Uniform(AttenuationProfile::uniform(db_per_cm(0.5), length).unwrap());
    let expected = 10f64.powf(-0.025);
    let free = Synth { gain: 0.0, modes: 8, length, loss: loss.clone(), ..Synth::default() }.scenario();
    let p = trotter_propagate(&free, &uniform_mesh(&free, 50)).unwrap();
    let amplitude = (0..8).map(|m| (p.k_ss()[(m, m)].norm() - expected).abs()).fold(0.0, f64::max);

    let coupled = Synth { modes: 12, length, gain: 1.2, loss, ..Synth::default() }.scenario();
    let mesh = uniform_mesh(&coupled, 300);
    let factored = trotter_propagate(&coupled, &mesh).unwrap();
    let interleaved = trotter_propagate_with(&coupled, &mesh, TrotterOptions { interleave_uniform_loss: true }).unwrap();
    let d = relative_distance(interleaved.matrix(), &factored.effective());
    check(
        amplitude < 1e-12 && (p.transmission() - expected).abs() < 1e-12 && d < 1e-10,
        format!("amplitude error {amplitude:.2e}, interleaved vs factored {d:.2e}"),
    )
}

fn error_limits() -> Outcome {
    let clean = Synth { kind: ProcessKind::Qfc, modes: 16, gain: 1.5, poling: Poling::Apodized, ..Synth::default() };
    let zero = Synth {
        domain_errors: Some(DomainErrorModel { shift: 0.0, missing_probability: 0.0, seed: 42 }),
        ..clean.clone()
    };
    let (a, b) = (run(&clean), run(&zero));
    let identical = a.matrix() == b.matrix() && figures_of_merit(&a).unwrap() == figures_of_merit(&b).unwrap();

    let loaded = load(&template("qfc")).unwrap();
    let total = metric("conversion_total").unwrap();
    let conversion = |l: &qtwm_cli::LoadedConfig| {
        qtwm_cli::run::metric_values(&evaluate(l, 1).unwrap().fom)[total].unwrap()
    };
    let base = conversion(&loaded);
    let erased = conversion(&loaded.with_value("errors.missing_probability", 1.0).unwrap());

    let (period, length, delta) = (5e-6, 5e-3, 0.4e-6);
    let pattern = periodic_poling(period, length, 0.5).unwrap();
    let harmonic = |shift: f64| {
        let shifted =
            inject_domain_errors(&pattern, &DomainErrorModel { shift, missing_probability: 0.0, seed: 1 }).unwrap();
        shifted.fourier(2.0 * std::f64::consts::PI / period).norm()
    };
    let (wide, narrow) = (harmonic(delta), harmonic(-delta));
    let asymmetry = (wide - narrow).abs() / wide.max(narrow);
    check(
        identical && erased < 0.05 * base && asymmetry < 1e-3,
        format!(
            "clean reproduced: {identical}; conversion {erased:.3e} vs {base:.3e}; harmonic asymmetry {asymmetry:.2e}"
        ),
    )
}

fn inhomogeneity_trend() -> Outcome {
    let dir = scratch();
    let loaded = load(&template("sm_psg")).unwrap();
    let options = RunOptions { out: Some(dir.path().to_path_buf()), workers: 0, emit_plots: false };
    let report = sweep(&loaded, "errors.inhomogeneity_range", None, 20, &options).unwrap();
    let (n, sn) = (metric("photons_signal").unwrap(), metric("schmidt_number").unwrap());
    let series = |k: usize| report.aggregates.iter().map(|a: &Aggregate| a.mean[k].unwrap()).collect::<Vec<_>>();
    let (photons, schmidt) = (series(n), series(sn));
    let ratio = schmidt.last().unwrap() / schmidt[0];
    check(
        photons.windows(2).all(|w| w[1] <= w[0]) && schmidt.windows(2).all(|w| w[1] >= w[0]) && ratio >= 2.0,
        format!("photons {photons:.4?}, Schmidt number {schmidt:.3?}, increase x{ratio:.2}"),
    )
}

fn spm_fom() -> Outcome {
    let dir = scratch();
    let loaded = load(&template("sm_psg")).unwrap();
    let options = RunOptions { out: Some(dir.path().to_path_buf()), workers: 0, emit_plots: false };
    let photons: Vec<f64> = (0..10).map(|k| 1e5 * 10f64.powf(k as f64 * (5e8f64 / 1e5).log10() / 9.0)).collect();
    let report = spm_scan(&loaded, &photons, &options).unwrap();
    let fom: Vec<f64> = report.rows.iter().map(|r| r.overlap_fom).collect();
    let pulse = PumpPulse::gaussian(1e7, 2.4e15, 1.3e8, 4.9e-13).unwrap();
    let unit = spm_overlap_fom(&pulse, Complex64::new(0.0, 0.0), 1e-2, &AttenuationProfile::lossless(1e-2)).unwrap();
    check(
        fom.windows(2).all(|w| w[1] <= w[0]) && unit == 1.0,
        format!("scan {fom:.4?}; without SPM {unit}"),
    )
}

fn qfc_closed_form() -> Outcome {
    let length = 1e-2;
    let (mut gamma, mut amplitude) = (0.0f64, 0.0f64);
    for t in [0.2, 0.7, 1.1, 1.5] {
        let p = trotter_propagate(&single_mode(ProcessKind::Qfc, t / length, length), &[0.0, length]).unwrap();
        let dec = qfc_decompose(&p).unwrap();
        gamma = gamma.max((dec.probabilities[0] - t.sin().powi(2)).abs());
        let photon = vec![Term { coefficient: Complex64::new(1.0, 0.0), ops: vec![LadderOp::create(0)] }];
        let out = transform_through(&p, &photon).unwrap();
        let converted = out.iter().find(|term| term.ops == vec![LadderOp::create(1)]).unwrap();
        amplitude = amplitude.max((converted.coefficient.norm() - t.sin()).abs());
    }
    check(gamma < 1e-8 && amplitude < 1e-8, format!("gamma error {gamma:.2e}, amplitude error {amplitude:.2e}"))
}

fn determinism() -> Outcome {
    let dir = scratch();
    let mut differing = Vec::new();
    for name in ["sm_psg", "bsvg", "qfc"] {
        let mut outputs = Vec::new();
        for pass in 0..2 {
            let out = dir.path().join(format!("{name}-{pass}"));
            let status = Command::new(env!("CARGO_BIN_EXE_qtwm"))
                .args(["simulate", template(name).to_str().unwrap(), "--out", out.to_str().unwrap()])
                .output()
                .unwrap();
            if !status.status.success() {
                return Err(format!("{name}: {}", String::from_utf8_lossy(&status.stderr)));
            }
            outputs.push(std::fs::read(out.join("fom.json")).unwrap());
        }
        if outputs[0] != outputs[1] {
            differing.push(name);
        }
    }
    check(differing.is_empty(), format!("templates with differing fom.json: {differing:?}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("commutator preservation", commutators),
        ("Trotter vs RK4 oracle", oracle),
        ("low-gain JSA shape", low_gain_jsa),
        ("pair symmetry", pair_symmetry),
        ("loss law", loss_law),
        ("error-model limits", error_limits),
        ("inhomogeneity trend", inhomogeneity_trend),
        ("SPM figure of merit", spm_fom),
        ("single-mode converter", qfc_closed_form),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, criterion)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(criterion))
            .unwrap_or_else(|e| Err(format!("panicked: {}", e.downcast_ref::<String>().cloned().unwrap_or_default())));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.1} s): {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.1} s): {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
