use std::borrow::Cow;

use num_complex::Complex64;

use super::step::{assemble_step, StepInputs};
use super::{LossModel, ProcessKind};
use crate::linalg;
use crate::profile::{InhomogeneityProfile, InteractionCoefficients, PolingPattern};
use crate::pump::{AttenuationProfile, PumpEvolution, PumpPulse};
use crate::spectral::{FrequencyGrid, WalkOffProfile};
use crate::{CMatrix, Error, Result};

/// Source of the pump samples entering the generator.
#[derive(Debug, Clone)]
pub enum PumpDrive {
    /// Fixed samples: `amplitude` at the `2N − 1` pair frequencies and
    /// `energy` at offsets `−(N−1)Δω … (N−1)Δω`.
    Table { amplitude: Vec<Complex64>, energy: Vec<Complex64> },
    Pulse(PulseDrive),
}

#[derive(Debug, Clone)]
pub struct PulseDrive {
    pulse: PumpPulse,
    attenuation: AttenuationProfile,
    pair_frequencies: Vec<f64>,
    energy: Vec<Complex64>,
    amplitude: Vec<Complex64>,
}

impl PulseDrive {
    pub fn pulse(&self) -> &PumpPulse {
        &self.pulse
    }

    pub fn attenuation(&self) -> &AttenuationProfile {
        &self.attenuation
    }

    pub fn pair_frequencies(&self) -> &[f64] {
        &self.pair_frequencies
    }
}

/// The `2N − 1` distinct pump frequencies `ω_{i,n} ± ω_{s,m}`.
pub fn pair_frequencies(kind: ProcessKind, signal: &FrequencyGrid, idler: &FrequencyGrid) -> Result<Vec<f64>> {
    check_grids(signal, idler)?;
    let n = signal.len();
    let dw = signal.spacing();
    Ok(match kind {
        ProcessKind::Pdc => (0..2 * n - 1).map(|k| signal.first() + idler.first() + k as f64 * dw).collect(),
        ProcessKind::Qfc => (0..2 * n - 1)
            .map(|k| idler.first() - signal.first() + (k as f64 - (n - 1) as f64) * dw)
            .collect(),
    })
}

fn check_grids(signal: &FrequencyGrid, idler: &FrequencyGrid) -> Result<()> {
    if signal.len() != idler.len() {
        return Err(Error::InconsistentBands(format!(
            "signal and idler grids have {} and {} points",
            signal.len(),
            idler.len()
        )));
    }
    if (signal.spacing() - idler.spacing()).abs() > 1e-12 * signal.spacing() {
        return Err(Error::InconsistentBands("signal and idler grids must share one spacing".into()));
    }
    Ok(())
}

/// Physical inputs for a scenario built on frequency grids.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub kind: ProcessKind,
    pub length: f64,
    pub signal: FrequencyGrid,
    pub idler: FrequencyGrid,
    pub walk_off_signal: WalkOffProfile,
    pub walk_off_idler: WalkOffProfile,
    pub pulse: PumpPulse,
    pub pump_attenuation: AttenuationProfile,
    pub coefficients: InteractionCoefficients,
    pub poling: PolingPattern,
    pub inhomogeneity: InhomogeneityProfile,
    pub baseline_mismatch: f64,
    pub loss: LossModel,
}

/// Everything needed to propagate one device configuration.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub kind: ProcessKind,
    pub length: f64,
    pub walk_off_signal: Vec<f64>,
    pub walk_off_idler: Vec<f64>,
    pub spacing: f64,
    pub drive: PumpDrive,
    pub coefficients: InteractionCoefficients,
    pub poling: PolingPattern,
    pub inhomogeneity: InhomogeneityProfile,
    pub baseline_mismatch: f64,
    pub loss: LossModel,
    pub grids: Option<(FrequencyGrid, FrequencyGrid)>,
}

impl Scenario {
    pub fn from_spec(spec: ScenarioSpec) -> Result<Self> {
        check_grids(&spec.signal, &spec.idler)?;
        let n = spec.signal.len();
        if spec.walk_off_signal.len() != n || spec.walk_off_idler.len() != n {
            return Err(Error::InconsistentBands("walk-off profiles must match the grids".into()));
        }
        let pair = pair_frequencies(spec.kind, &spec.signal, &spec.idler)?;
        let offsets: Vec<f64> = (0..2 * n - 1).map(|k| (k as f64 - (n - 1) as f64) * spec.signal.spacing()).collect();
        let amplitude = spec.pulse.spectral_amplitudes(Complex64::new(0.0, 0.0), &pair)?;
        let energy = spec.pulse.energy_distribution(&offsets)?;
        let scenario = Self {
            kind: spec.kind,
            length: spec.length,
            walk_off_signal: spec.walk_off_signal.values().to_vec(),
            walk_off_idler: spec.walk_off_idler.values().to_vec(),
            spacing: spec.signal.spacing(),
            drive: PumpDrive::Pulse(PulseDrive {
                pulse: spec.pulse,
                attenuation: spec.pump_attenuation,
                pair_frequencies: pair,
                energy,
                amplitude,
            }),
            coefficients: spec.coefficients,
            poling: spec.poling,
            inhomogeneity: spec.inhomogeneity,
            baseline_mismatch: spec.baseline_mismatch,
            loss: spec.loss,
            grids: Some((spec.signal, spec.idler)),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Scenario driven by fixed pump samples, without frequency grids.
    #[allow(clippy::too_many_arguments)]
    pub fn from_table(
        kind: ProcessKind,
        length: f64,
        walk_off_signal: Vec<f64>,
        walk_off_idler: Vec<f64>,
        spacing: f64,
        amplitude: Vec<Complex64>,
        energy: Vec<Complex64>,
        coefficients: InteractionCoefficients,
        poling: PolingPattern,
        baseline_mismatch: f64,
    ) -> Result<Self> {
        let scenario = Self {
            kind,
            length,
            walk_off_signal,
            walk_off_idler,
            spacing,
            drive: PumpDrive::Table { amplitude, energy },
            coefficients,
            inhomogeneity: InhomogeneityProfile::zero(length),
            poling,
            baseline_mismatch,
            loss: LossModel::Lossless,
            grids: None,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if n == 0 || self.walk_off_idler.len() != n {
            return Err(Error::InconsistentBands("signal and idler need the same non-zero number of modes".into()));
        }
        if !(self.length > 0.0) || (self.poling.length() - self.length).abs() > 1e-12 * self.length {
            return Err(Error::InvalidInput("poling pattern must span the device length".into()));
        }
        let (amplitude, energy) = match &self.drive {
            PumpDrive::Table { amplitude, energy } => (amplitude, energy),
            PumpDrive::Pulse(p) => (&p.amplitude, &p.energy),
        };
        if amplitude.len() != 2 * n - 1 || energy.len() != 2 * n - 1 {
            return Err(Error::Coverage(format!("{} pair frequencies required", 2 * n - 1)));
        }
        if !self.coefficients.is_finite() {
            return Err(Error::Numeric("interaction coefficients".into()));
        }
        self.loss.validate(n)
    }

    pub fn dim(&self) -> usize {
        self.walk_off_signal.len()
    }

    pub fn pulse_drive(&self) -> Option<&PulseDrive> {
        match &self.drive {
            PumpDrive::Pulse(p) => Some(p),
            PumpDrive::Table { .. } => None,
        }
    }

    /// `Δβ₀ + Δβ_TWM(z)`.
    pub fn delta_beta(&self, z: f64) -> f64 {
        self.baseline_mismatch + self.inhomogeneity.value_at(z)
    }

    /// `∫₀^z (Δβ₀ + Δβ_TWM)`.
    pub fn mismatch_phase(&self, z: f64) -> f64 {
        self.baseline_mismatch * z + self.inhomogeneity.phase_at(z)
    }

    /// Whether the pump samples change along the device.
    pub fn pump_varies(&self) -> bool {
        match &self.drive {
            PumpDrive::Table { .. } => false,
            PumpDrive::Pulse(p) => self.coefficients.spm != Complex64::new(0.0, 0.0) || !p.attenuation.is_lossless(),
        }
    }

    /// Photon fraction and pump self-phase factor evolution on `mesh` (which
    /// must start at 0).
    pub fn pump_evolution(&self, mesh: &[f64]) -> Option<PumpEvolution> {
        self.pulse_drive().map(|p| {
            PumpEvolution::new(mesh, self.coefficients.spm, p.pulse.group_velocity(), p.attenuation.clone())
        })
    }

    /// Exact photon fraction and self-phase factor at `z`.
    pub fn pump_state(&self, z: f64) -> (f64, Complex64) {
        match &self.drive {
            PumpDrive::Table { .. } => (1.0, Complex64::new(0.0, 0.0)),
            PumpDrive::Pulse(p) => {
                let rho = p.attenuation.transmission(z);
                let phase = self.coefficients.spm / p.pulse.group_velocity() * p.attenuation.integrated_transmission(0.0, z);
                (rho, phase)
            }
        }
    }

    /// Pump samples for photon fraction `rho` and self-phase factor `spm`.
    pub fn pump_samples(&self, rho: f64, spm: Complex64) -> Result<(Cow<'_, [Complex64]>, Cow<'_, [Complex64]>)> {
        match &self.drive {
            PumpDrive::Table { amplitude, energy } => Ok((Cow::Borrowed(amplitude), Cow::Borrowed(energy))),
            PumpDrive::Pulse(p) => {
                let amplitude: Cow<[Complex64]> = if spm == Complex64::new(0.0, 0.0) {
                    Cow::Borrowed(&p.amplitude)
                } else {
                    Cow::Owned(p.pulse.spectral_amplitudes(spm, &p.pair_frequencies)?)
                };
                if rho == 1.0 {
                    return Ok((amplitude, Cow::Borrowed(&p.energy)));
                }
                let s = rho.sqrt();
                Ok((
                    Cow::Owned(amplitude.iter().map(|a| a * s).collect()),
                    Cow::Owned(p.energy.iter().map(|e| e * rho).collect()),
                ))
            }
        }
    }

    fn generator_with(&self, amplitude: &[Complex64], energy: &[Complex64], g: f64, phase: f64, dz: f64) -> Result<CMatrix> {
        let step = assemble_step(&StepInputs {
            kind: self.kind,
            walk_off_signal: &self.walk_off_signal,
            walk_off_idler: &self.walk_off_idler,
            pump: amplitude,
            energy,
            coefficients: &self.coefficients,
            g,
            h: 1.0,
            mismatch_phase: phase,
            spacing: self.spacing,
            dz,
        })?;
        Ok(step.generator(self.kind))
    }

    /// Laboratory-frame generator `Q(z)` with explicit pump state.
    pub fn lab_generator(&self, z: f64, g: f64, amplitude: &[Complex64], energy: &[Complex64]) -> Result<CMatrix> {
        self.generator_with(amplitude, energy, g, self.mismatch_phase(z), 0.0)
    }

    /// Generator in the frame co-rotating with the accumulated mismatch
    /// phase, for local mismatch `delta_beta`.
    ///
    /// With `a_s → e^{±iφ/2} a_s` and the idler component counter-rotating,
    /// the phasor drops out of the coupling block and `∓Δβ/2` moves onto the
    /// diagonal.
    pub fn rotating_generator(&self, g: f64, delta_beta: f64, amplitude: &[Complex64], energy: &[Complex64]) -> Result<CMatrix> {
        let mut q = self.generator_with(amplitude, energy, g, 0.0, 0.0)?;
        let n = self.dim();
        let half = 0.5 * delta_beta;
        let (top, bottom) = match self.kind {
            ProcessKind::Pdc => (-half, half),
            ProcessKind::Qfc => (half, -half),
        };
        for k in 0..n {
            q[(k, k)] += top;
            q[(n + k, n + k)] += bottom;
        }
        Ok(q)
    }

    /// Diagonal of the frame transformation at accumulated phase `phi`.
    pub fn frame_phases(&self, phi: f64) -> (Complex64, Complex64) {
        match self.kind {
            ProcessKind::Pdc => (Complex64::from_polar(1.0, 0.5 * phi), Complex64::from_polar(1.0, -0.5 * phi)),
            ProcessKind::Qfc => (Complex64::from_polar(1.0, -0.5 * phi), Complex64::from_polar(1.0, 0.5 * phi)),
        }
    }

    /// Upper estimate of `‖Q(z)‖∞` over the device, sampling the pump state
    /// at a few positions with unit mismatch phasor.
    pub fn generator_norm(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        let positions: Vec<f64> = if self.pump_varies() { (0..=4).map(|k| self.length * k as f64 / 4.0).collect() } else { vec![0.0] };
        for z in positions {
            let (rho, spm) = self.pump_state(z);
            let (a, e) = self.pump_samples(rho, spm)?;
            let q = self.generator_with(&a, &e, 1.0, 0.0, 0.0)?;
            worst = worst.max(linalg::norm_inf(&q));
        }
        Ok(worst)
    }
}
