//! Synthetic waveguide scenarios with controllable gain, shared by the
//! integration and acceptance suites.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use qtwm_core::profile::{
    apodized_poling, generate_inhomogeneity, inject_domain_errors, periodic_poling, DomainErrorModel,
    InhomogeneityProfile, InteractionCoefficients, PolingPattern,
};
use qtwm_core::propagator::{LossModel, ProcessKind, Scenario, ScenarioSpec};
use qtwm_core::pump::{AttenuationProfile, PumpPulse};
use qtwm_core::spectral::{FieldLabel, FrequencyGrid, WalkOffProfile};
use qtwm_core::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Poling {
    Unpoled,
    Periodic,
    Apodized,
}

#[derive(Debug, Clone)]
pub struct Synth {
    pub kind: ProcessKind,
    pub modes: usize,
    pub length: f64,
    /// Target `max|F|·L`.
    pub gain: f64,
    pub poling: Poling,
    pub period: f64,
    /// Mismatch left over after quasi-phase matching (rad/m).
    pub detuning: f64,
    pub spacing: f64,
    /// Pump spectral intensity FWHM as a fraction of the grid span.
    pub pump_width: f64,
    /// Target `max|XPM|·L` on both bands.
    pub xpm: f64,
    /// Peak self-phase at the device end without pump loss.
    pub spm: f64,
    pub pump_alpha: f64,
    /// `(range, smoothing, nodes, seed)`.
    pub inhomogeneity: Option<(f64, f64, usize, u64)>,
    pub domain_errors: Option<DomainErrorModel>,
    pub loss: LossModel,
    pub walk_off_slopes: (f64, f64),
    pub curvature: f64,
    /// Pump photons relative to the calibration pulse; the coupling
    /// constants are fixed by the calibration, so gain scales with √photons.
    pub photon_scale: f64,
}

impl Default for Synth {
    fn default() -> Self {
        Self {
            kind: ProcessKind::Pdc,
            modes: 16,
            length: 5e-3,
            gain: 1.0,
            poling: Poling::Periodic,
            period: 250e-6,
            detuning: 0.0,
            spacing: 1e11,
            pump_width: 0.5,
            xpm: 0.0,
            spm: 0.0,
            pump_alpha: 0.0,
            inhomogeneity: None,
            domain_errors: None,
            loss: LossModel::Lossless,
            walk_off_slopes: (2e-10, -1.5e-10),
            curvature: 1e-25,
            photon_scale: 1.0,
        }
    }
}

pub const OMEGA_SIGNAL: f64 = 1.2e15;

pub fn centres(kind: ProcessKind) -> (f64, f64, f64) {
    match kind {
        ProcessKind::Pdc => (2.4e15, OMEGA_SIGNAL, 1.2e15),
        ProcessKind::Qfc => (0.9e15, OMEGA_SIGNAL, 2.1e15),
    }
}

impl Synth {
    pub fn grids(&self) -> (FrequencyGrid, FrequencyGrid) {
        let (_, ws, wi) = centres(self.kind);
        (
            FrequencyGrid::centered(ws, self.spacing, self.modes, FieldLabel::Signal).unwrap(),
            FrequencyGrid::centered(wi, self.spacing, self.modes, FieldLabel::Idler).unwrap(),
        )
    }

    pub fn walk_off(&self, grid: &FrequencyGrid, centre: f64, slope: f64) -> WalkOffProfile {
        WalkOffProfile::from_values(
            grid.points().iter().map(|w| slope * (w - centre) + self.curvature * (w - centre).powi(2)).collect(),
        )
    }

    pub fn pulse(&self) -> PumpPulse {
        let (wp, _, _) = centres(self.kind);
        let band = self.pump_width * self.modes as f64 * self.spacing;
        let fwhm = 4.0 * 2f64.ln() / band;
        PumpPulse::gaussian(1e6, wp, 1.9e8, fwhm).unwrap()
    }

    pub fn pattern(&self) -> PolingPattern {
        let base = match self.poling {
            Poling::Unpoled => PolingPattern::unpoled(self.length).unwrap(),
            Poling::Periodic => periodic_poling(self.period, self.length, 0.5).unwrap(),
            Poling::Apodized => {
                let (l, w) = (self.length, 0.3 * self.length);
                apodized_poling(|z| (-((z - 0.5 * l) / w).powi(2)).exp(), self.period, l).unwrap()
            }
        };
        match &self.domain_errors {
            Some(model) => inject_domain_errors(&base, model).unwrap(),
            None => base,
        }
    }

    pub fn baseline(&self) -> f64 {
        match self.poling {
            Poling::Unpoled => self.detuning,
            _ => 2.0 * PI / self.period + self.detuning,
        }
    }

    pub fn inhomogeneity_profile(&self) -> InhomogeneityProfile {
        match self.inhomogeneity {
            None => InhomogeneityProfile::zero(self.length),
            Some((range, smoothing, nodes, seed)) => {
                let mesh: Vec<f64> = (0..=nodes).map(|k| self.length * k as f64 / nodes as f64).collect();
                generate_inhomogeneity(range, smoothing, &mesh, seed).unwrap()
            }
        }
    }

    pub fn scenario(&self) -> Scenario {
        let (signal, idler) = self.grids();
        let (_, ws, wi) = centres(self.kind);
        let pulse = self.pulse();
        let driven = pulse.with_photons(pulse.photons() * self.photon_scale).unwrap();
        let pairs = qtwm_core::propagator::pair_frequencies(self.kind, &signal, &idler).unwrap();
        let peak = pulse
            .spectral_amplitudes(Complex64::new(0.0, 0.0), &pairs)
            .unwrap()
            .iter()
            .map(|a| a.norm())
            .fold(0.0, f64::max);
        let twm = self.gain * (2.0 * PI).sqrt() / (self.length * self.spacing * peak);
        let energy_peak = pulse.energy_distribution(&[0.0]).unwrap()[0].norm();
        let xpm = self.xpm * 2.0 * PI / (self.length * self.spacing * energy_peak);
        let spm = self.spm * pulse.group_velocity() / (self.length * pulse.peak_density());
        let coefficients = InteractionCoefficients {
            twm: Complex64::new(twm, 0.0),
            xpm_signal: Complex64::new(xpm, 0.0),
            xpm_idler: Complex64::new(0.8 * xpm, 0.0),
            spm: Complex64::new(spm, 0.0),
        };
        let attenuation = if self.pump_alpha > 0.0 {
            AttenuationProfile::uniform(self.pump_alpha, self.length).unwrap()
        } else {
            AttenuationProfile::lossless(self.length)
        };
        Scenario::from_spec(ScenarioSpec {
            kind: self.kind,
            length: self.length,
            walk_off_signal: self.walk_off(&signal, ws, self.walk_off_slopes.0),
            walk_off_idler: self.walk_off(&idler, wi, self.walk_off_slopes.1),
            signal,
            idler,
            pulse: driven,
            pump_attenuation: attenuation,
            coefficients,
            poling: self.pattern(),
            inhomogeneity: self.inhomogeneity_profile(),
            baseline_mismatch: self.baseline(),
            loss: self.loss.clone(),
        })
        .unwrap()
    }
}

/// Single-mode scenario with constant coupling `κ` (rad/m) and no mismatch.
pub fn single_mode(kind: ProcessKind, kappa: f64, length: f64) -> Scenario {
    // F = C·A·Δω/√(2π) with A = Δω = 1.
    let twm = kappa * (2.0 * PI).sqrt();
    Scenario::from_table(
        kind,
        length,
        vec![0.0],
        vec![0.0],
        1.0,
        vec![Complex64::new(1.0, 0.0)],
        vec![Complex64::new(0.0, 0.0)],
        InteractionCoefficients::three_wave_only(twm),
        PolingPattern::unpoled(length).unwrap(),
        0.0,
    )
    .unwrap()
}

/// First-order oracle: `|J_mn| ∝ |𝒜(ω_s+ω_i)|·|sinc(Δ_mn L/2)|` with the
/// Gaussian spectrum written from the temporal FWHM.
pub fn sinc_oracle(s: &Synth, scenario: &Scenario) -> CMatrix {
    let (signal, idler) = s.grids();
    let (wp, _, _) = centres(s.kind);
    let band = s.pump_width * s.modes as f64 * s.spacing;
    CMatrix::from_fn(s.modes, s.modes, |m, n| {
        let detune = signal.point(m) + idler.point(n) - wp;
        let envelope = (-2.0 * 2f64.ln() * (detune / band).powi(2)).exp();
        let x = 0.5 * s.length * (s.detuning - scenario.walk_off_signal[m] - scenario.walk_off_idler[n]);
        let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
        Complex64::new(envelope * sinc.abs(), 0.0)
    })
}
