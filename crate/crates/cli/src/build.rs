//! Turns a config into a propagation scenario.

use std::f64::consts::PI;

use num_complex::Complex64;
use qtwm_core::constants::{db_per_cm_to_per_m, SPEED_OF_LIGHT};
use qtwm_core::profile::{
    apodized_poling, generate_inhomogeneity, inject_domain_errors, overlap_coefficients, periodic_poling,
    Chi2Tensor, Chi3Tensor, DomainErrorModel, InhomogeneityProfile, InteractionCoefficients, ModeField,
    ModeFieldGrid, PolingPattern,
};
use qtwm_core::propagator::{build_mesh, LossModel, MeshOptions, ProcessKind, Scenario, ScenarioSpec};
use qtwm_core::pump::{AttenuationProfile, PumpPulse};
use qtwm_core::seed::{stream, Stream};
use qtwm_core::spectral::{baseline_phase_mismatch, walk_off, DispersionModel, FieldLabel, FrequencyGrid};

use crate::config::{LoadedConfig, PolingKind};
use crate::diag::{Context, HarnessError, HarnessResult};

/// A scenario together with the pieces reported alongside its results.
#[derive(Debug, Clone)]
pub struct Built {
    pub scenario: Scenario,
    pub mesh: Vec<f64>,
    pub pulse: PumpPulse,
    pub pump_attenuation: AttenuationProfile,
    pub spm: Complex64,
    /// `Δβ0` at the band centres (rad/m).
    pub baseline_mismatch: f64,
    pub poling_period: Option<f64>,
}

/// Band centres `(ω_p, ω_s, ω_i)` in rad/s.
pub fn centres(loaded: &LoadedConfig) -> HarnessResult<(f64, f64, f64)> {
    let c = &loaded.config;
    let to_omega = |lambda: f64| 2.0 * PI * SPEED_OF_LIGHT / lambda;
    let (wp, ws) = (to_omega(c.pump.wavelength), to_omega(c.grid.signal_wavelength));
    let wi = match ProcessKind::from(c.kind) {
        ProcessKind::Pdc => wp - ws,
        ProcessKind::Qfc => wp + ws,
    };
    if !(wi > 0.0) {
        return Err(HarnessError::config("validate", "grid.signal_wavelength", "idler frequency would be non-positive"));
    }
    if let Some(lambda) = c.grid.idler_wavelength {
        let given = to_omega(lambda);
        if (given - wi).abs() > 1e-6 * wi {
            return Err(HarnessError::config(
                "validate",
                "grid.idler_wavelength",
                format!(
                    "violates energy conservation: expected {:.6e} m, got {lambda:e} m",
                    2.0 * PI * SPEED_OF_LIGHT / wi
                ),
            ));
        }
    }
    Ok((wp, ws, wi))
}

fn dispersion(loaded: &LoadedConfig, key: &str, file: &std::path::Path, centre: f64) -> HarnessResult<DispersionModel> {
    let path = loaded.resolve(file);
    DispersionModel::from_csv_path(&path, centre).map_err(|e| match e {
        qtwm_core::Error::Io { message, .. } => HarnessError::config("load", key, message),
        qtwm_core::Error::MalformedTable(m) => HarnessError::config("load", key, m),
        other => HarnessError::Numeric { module: "spectral-dispersion", operation: "load", source: other },
    })
}

/// Builds the scenario for one run; `seed` drives every random error model.
pub fn build(loaded: &LoadedConfig, seed: u64) -> HarnessResult<Built> {
    let c = &loaded.config;
    let kind = ProcessKind::from(c.kind);
    let length = c.waveguide.length;
    let (wp, ws, wi) = centres(loaded)?;

    let pump = dispersion(loaded, "dispersion.pump", &c.dispersion.pump, wp)?;
    let signal_model = dispersion(loaded, "dispersion.signal", &c.dispersion.signal, ws)?;
    let idler_model = dispersion(loaded, "dispersion.idler", &c.dispersion.idler, wi)?;

    let n = c.grid.modes;
    let signal = FrequencyGrid::centered(ws, c.grid.spacing, n, FieldLabel::Signal).within("spectral-dispersion", "grid")?;
    let idler = FrequencyGrid::centered(wi, c.grid.spacing, n, FieldLabel::Idler).within("spectral-dispersion", "grid")?;
    let walk_off_signal = walk_off(&signal_model, &pump, &signal).within("spectral-dispersion", "walk_off")?;
    let walk_off_idler = walk_off(&idler_model, &pump, &idler).within("spectral-dispersion", "walk_off")?;
    let baseline = baseline_phase_mismatch(kind, &pump, &signal_model, &idler_model, wp, ws, wi)
        .within("spectral-dispersion", "baseline_phase_mismatch")?;

    let vp = pump.central_group_velocity();
    let pulse = PumpPulse::gaussian(c.pump.photons, wp, vp, c.pump.fwhm).within("pump-field", "pulse")?;

    let alpha = db_per_cm_to_per_m(c.errors.loss_db_per_cm);
    let pump_alpha = db_per_cm_to_per_m(c.errors.pump_loss_db_per_cm.unwrap_or(c.errors.loss_db_per_cm));
    let pump_attenuation = if pump_alpha > 0.0 {
        AttenuationProfile::uniform(pump_alpha, length).within("pump-field", "attenuation")?
    } else {
        AttenuationProfile::lossless(length)
    };
    let loss = if alpha > 0.0 {
        LossModel::Uniform(AttenuationProfile::uniform(alpha, length).within("propagator-core", "loss")?)
    } else {
        LossModel::Lossless
    };

    let coefficients = coefficients(loaded, kind, (&pump, &signal_model, &idler_model), (wp, ws, wi))?;

    let (poling, period) = poling(loaded, baseline, seed)?;

    let inhomogeneity = if c.errors.inhomogeneity_range > 0.0 {
        let nodes = c.errors.inhomogeneity_nodes;
        let mesh: Vec<f64> = (0..=nodes).map(|k| length * k as f64 / nodes as f64).collect();
        let smoothing = c.errors.smoothing_length.unwrap_or(length / nodes as f64);
        generate_inhomogeneity(c.errors.inhomogeneity_range, smoothing, &mesh, stream(seed, Stream::Inhomogeneity))
            .map_err(|e| HarnessError::config("validate", "errors.smoothing_length", e))?
    } else {
        InhomogeneityProfile::zero(length)
    };

    let scenario = Scenario::from_spec(ScenarioSpec {
        kind,
        length,
        signal,
        idler,
        walk_off_signal,
        walk_off_idler,
        pulse: pulse.clone(),
        pump_attenuation: pump_attenuation.clone(),
        coefficients,
        poling,
        inhomogeneity,
        baseline_mismatch: baseline,
        loss,
    })
    .within("propagator-core", "scenario")?;
    let options = MeshOptions { max_generator_phase: c.mesh.max_generator_phase, max_step: c.mesh.max_step };
    let mesh = build_mesh(&scenario, &options).within("propagator-core", "build_mesh")?;
    Ok(Built {
        scenario,
        mesh,
        pulse,
        pump_attenuation,
        spm: coefficients.spm,
        baseline_mismatch: baseline,
        poling_period: period,
    })
}

fn coefficients(
    loaded: &LoadedConfig,
    kind: ProcessKind,
    models: (&DispersionModel, &DispersionModel, &DispersionModel),
    omegas: (f64, f64, f64),
) -> HarnessResult<InteractionCoefficients> {
    let c = &loaded.config.coefficients;
    let zero = Complex64::new(0.0, 0.0);
    let Some(fields) = &c.mode_fields else {
        return Ok(InteractionCoefficients {
            twm: c.twm.map(|v| v.value()).unwrap_or(zero),
            xpm_signal: c.xpm_signal.map(|v| v.value()).unwrap_or(zero),
            xpm_idler: c.xpm_idler.map(|v| v.value()).unwrap_or(zero),
            spm: c.spm.map(|v| v.value()).unwrap_or(zero),
        });
    };
    let read = |key: &str, file: &std::path::Path, model: &DispersionModel, omega: f64| -> HarnessResult<ModeField> {
        let grid = ModeFieldGrid::read_csv(loaded.resolve(file)).map_err(|e| HarnessError::config("load", key, e))?;
        Ok(ModeField {
            grid,
            frequency: omega,
            phase_velocity: model.phase_velocity(omega).within("spectral-dispersion", "phase_velocity")?,
            group_velocity: model.group_velocity(omega).within("spectral-dispersion", "group_velocity")?,
        })
    };
    let pump = read("coefficients.mode_fields.pump", &fields.pump, models.0, omegas.0)?;
    let signal = read("coefficients.mode_fields.signal", &fields.signal, models.1, omegas.1)?;
    let idler = read("coefficients.mode_fields.idler", &fields.idler, models.2, omegas.2)?;
    let [j, k, l] = fields.chi2_component;
    if j > 2 || k > 2 || l > 2 {
        return Err(HarnessError::config("validate", "coefficients.mode_fields.chi2_component", "indices must be 0, 1 or 2"));
    }
    let chi3 = match fields.chi3_component {
        Some([a, b, c, d]) if a.max(b).max(c).max(d) <= 2 => Chi3Tensor::single(a, b, c, d, fields.chi3),
        Some(_) => {
            return Err(HarnessError::config("validate", "coefficients.mode_fields.chi3_component", "indices must be 0, 1 or 2"))
        }
        None => Chi3Tensor::zero(),
    };
    overlap_coefficients(kind, &signal, &idler, &pump, &Chi2Tensor::single(j, k, l, fields.chi2), &chi3)
        .within("nonlinearity-profile", "overlap_coefficients")
}

fn poling(loaded: &LoadedConfig, baseline: f64, seed: u64) -> HarnessResult<(PolingPattern, Option<f64>)> {
    let c = &loaded.config;
    let length = c.waveguide.length;
    let period = match (c.poling.kind, c.poling.period) {
        (PolingKind::Unpoled | PolingKind::File, p) => p,
        (_, Some(p)) => Some(p),
        (_, None) if baseline != 0.0 => Some(2.0 * PI / baseline.abs()),
        (_, None) => {
            return Err(HarnessError::config("validate", "poling.period", "bands are phase matched; no period to derive"))
        }
    };
    let bad_pattern = |e: qtwm_core::Error| HarnessError::config("validate", "poling", e);
    let base = match c.poling.kind {
        PolingKind::Unpoled => PolingPattern::unpoled(length).map_err(bad_pattern)?,
        PolingKind::Periodic => periodic_poling(period.unwrap(), length, c.poling.duty).map_err(bad_pattern)?,
        PolingKind::Apodized => {
            let w = c.poling.apodization_width * length;
            let target = |z: f64| (-((z - 0.5 * length) / w).powi(2)).exp();
            apodized_poling(target, period.unwrap(), length).map_err(bad_pattern)?
        }
        PolingKind::File => {
            let file = loaded.resolve(c.poling.file.as_ref().unwrap());
            PolingPattern::read_csv(&file, length).map_err(|e| HarnessError::config("load", "poling.file", e))?
        }
    };
    if c.poling.kind == PolingKind::Unpoled {
        return Ok((base, period));
    }
    let model = DomainErrorModel {
        shift: c.errors.domain_shift,
        missing_probability: c.errors.missing_probability,
        seed: stream(seed, Stream::DomainErrors),
    };
    let pattern = inject_domain_errors(&base, &model).map_err(|e| HarnessError::config("validate", "errors.domain_shift", e))?;
    Ok((pattern, period))
}
