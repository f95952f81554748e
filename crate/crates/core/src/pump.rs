//! The classical, undepleted pump: real-space amplitude, spectral amplitude
//! dressed by self-phase modulation, energy distribution and photon loss.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::constants::HBAR;
use crate::quadrature::{self, Tolerance};
use crate::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Gaussian half-width, in standard deviations, beyond which the envelope is
/// treated as zero (relative amplitude below 1e-15).
const GAUSSIAN_EXTENT: f64 = 12.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Envelope {
    /// Transform-limited Gaussian; `sigma` is the standard deviation of
    /// `|Λ(z)|²` in the co-moving coordinate (m).
    Gaussian { sigma: f64 },
    /// Linearly interpolated samples of `Λ(z)`; zero outside the table.
    Tabulated { z: Vec<f64>, amplitude: Vec<Complex64> },
}

/// Pump pulse in the frame co-moving at the pump group velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpPulse {
    envelope: Envelope,
    photons: f64,
    central_frequency: f64,
    group_velocity: f64,
    /// Multiplies the unit-normalized shape so that ∫|Λ|² = photons.
    scale: f64,
}

impl PumpPulse {
    /// Gaussian pulse with intensity full width at half maximum `fwhm_duration` (s).
    pub fn gaussian(photons: f64, central_frequency: f64, group_velocity: f64, fwhm_duration: f64) -> Result<Self> {
        if !(fwhm_duration > 0.0) {
            return Err(Error::InvalidInput(format!("pulse duration must be positive, got {fwhm_duration}")));
        }
        let sigma = fwhm_duration * group_velocity / (2.0 * (2.0 * 2f64.ln()).sqrt());
        Self::new(Envelope::Gaussian { sigma }, photons, central_frequency, group_velocity)
    }

    pub fn new(envelope: Envelope, photons: f64, central_frequency: f64, group_velocity: f64) -> Result<Self> {
        if !(photons >= 0.0) || !photons.is_finite() {
            return Err(Error::InvalidInput(format!("photon number must be non-negative, got {photons}")));
        }
        if !(central_frequency > 0.0 && group_velocity > 0.0) {
            return Err(Error::InvalidInput("pump frequency and group velocity must be positive".into()));
        }
        let unit_norm = match &envelope {
            Envelope::Gaussian { sigma } => {
                if !(*sigma > 0.0) {
                    return Err(Error::InvalidInput(format!("pulse width must be positive, got {sigma}")));
                }
                1.0
            }
            Envelope::Tabulated { z, amplitude } => {
                if z.len() < 2 || z.len() != amplitude.len() || z.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidInput(
                        "tabulated envelope needs ≥ 2 strictly increasing positions with matching amplitudes".into(),
                    ));
                }
                // Exact ∫|Λ|² of the piecewise-linear interpolant.
                let norm: f64 = z
                    .windows(2)
                    .zip(amplitude.windows(2))
                    .map(|(zw, aw)| {
                        let (a, b) = (aw[0], aw[1]);
                        (zw[1] - zw[0]) * (a.norm_sqr() + b.norm_sqr() + (a * b.conj()).re) / 3.0
                    })
                    .sum();
                if !(norm > 0.0) {
                    return Err(Error::InvalidInput("tabulated envelope is identically zero".into()));
                }
                norm
            }
        };
        Ok(Self {
            envelope,
            photons,
            central_frequency,
            group_velocity,
            scale: (photons / unit_norm).sqrt(),
        })
    }

    pub fn photons(&self) -> f64 {
        self.photons
    }

    pub fn central_frequency(&self) -> f64 {
        self.central_frequency
    }

    pub fn group_velocity(&self) -> f64 {
        self.group_velocity
    }

    pub fn envelope(&self) -> &Envelope {
        &self.envelope
    }

    /// Same shape with a different photon number.
    pub fn with_photons(&self, photons: f64) -> Result<Self> {
        Self::new(self.envelope.clone(), photons, self.central_frequency, self.group_velocity)
    }

    /// `Λ(z)` in photons^½/m^½.
    pub fn amplitude(&self, z: f64) -> Complex64 {
        match &self.envelope {
            Envelope::Gaussian { sigma } => {
                let peak = 1.0 / (sigma * (2.0 * PI).sqrt()).sqrt();
                Complex64::new(self.scale * peak * (-z * z / (4.0 * sigma * sigma)).exp(), 0.0)
            }
            Envelope::Tabulated { z: zs, amplitude } => {
                if z < zs[0] || z > zs[zs.len() - 1] {
                    return Complex64::new(0.0, 0.0);
                }
                let k = zs.partition_point(|&v| v <= z).clamp(1, zs.len() - 1) - 1;
                let t = (z - zs[k]) / (zs[k + 1] - zs[k]);
                (amplitude[k] * (1.0 - t) + amplitude[k + 1] * t) * self.scale
            }
        }
    }

    /// Breakpoints covering the support of the envelope.
    pub fn support(&self) -> Vec<f64> {
        match &self.envelope {
            Envelope::Gaussian { sigma } => {
                let w = GAUSSIAN_EXTENT * sigma;
                (0..=8).map(|k| -w + 2.0 * w * k as f64 / 8.0).collect()
            }
            Envelope::Tabulated { z, .. } => z.clone(),
        }
    }

    /// Peak of `|Λ(z)|²`.
    pub fn peak_density(&self) -> f64 {
        match &self.envelope {
            Envelope::Gaussian { sigma } => self.photons / (sigma * (2.0 * PI).sqrt()),
            Envelope::Tabulated { amplitude, .. } => {
                amplitude.iter().map(|a| a.norm_sqr()).fold(0.0, f64::max) * self.scale * self.scale
            }
        }
    }

    /// RMS width of `|Λ(z)|²` about its centroid (m).
    pub fn rms_width(&self) -> f64 {
        match &self.envelope {
            Envelope::Gaussian { sigma } => *sigma,
            Envelope::Tabulated { z, amplitude } => {
                let w: Vec<f64> = amplitude.iter().map(|a| a.norm_sqr()).collect();
                let total: f64 = w.iter().sum();
                let mean: f64 = z.iter().zip(&w).map(|(z, w)| z * w).sum::<f64>() / total;
                (z.iter().zip(&w).map(|(z, w)| (z - mean).powi(2) * w).sum::<f64>() / total).sqrt()
            }
        }
    }

    fn tolerance(&self, scale: f64) -> Tolerance {
        Tolerance { absolute: 1e-8 * scale, relative: 1e-6, ..Tolerance::default() }
    }

    /// Spectral amplitude `𝒜(ω)` for an accumulated self-phase-modulation
    /// factor `spm_phase = ∫ C_SPM(z'')·ρ(z'')/v_p dz''` (units m, the
    /// phase at `z'` is `spm_phase·|Λ(z')|²`), evaluated at absolute
    /// frequencies `omegas`. Pump loss is not applied here.
    pub fn spectral_amplitudes(&self, spm_phase: Complex64, omegas: &[f64]) -> Result<Vec<Complex64>> {
        if omegas.is_empty() {
            return Ok(Vec::new());
        }
        let vp = self.group_velocity;
        let prefactor = (HBAR * self.central_frequency / (2.0 * PI * vp)).sqrt();
        let kappas: Vec<f64> = omegas.iter().map(|w| (w - self.central_frequency) / vp).collect();
        let support = self.support();
        let extent = support[support.len() - 1] - support[0];
        let tol = self.tolerance((self.photons * extent).sqrt());
        let values = quadrature::integrate(
            |z, out| {
                let lambda = self.amplitude(z);
                let base = lambda * (I * spm_phase * lambda.norm_sqr()).exp();
                for (o, k) in out.iter_mut().zip(&kappas) {
                    *o = base * Complex64::from_polar(1.0, -k * z);
                }
            },
            omegas.len(),
            &support,
            tol,
        )?;
        Ok(values.into_iter().map(|v| v * prefactor).collect())
    }

    pub fn spectral_amplitude(&self, spm_phase: Complex64, omega: f64) -> Result<Complex64> {
        Ok(self.spectral_amplitudes(spm_phase, &[omega])?[0])
    }

    /// Energy distribution `ℰ(ω) = ħω_p ∫|Λ(z)|² e^{−iωz/v_p} dz` (J) at
    /// relative frequencies `omegas`.
    pub fn energy_distribution(&self, omegas: &[f64]) -> Result<Vec<Complex64>> {
        if omegas.is_empty() {
            return Ok(Vec::new());
        }
        let vp = self.group_velocity;
        let kappas: Vec<f64> = omegas.iter().map(|w| w / vp).collect();
        let tol = self.tolerance(self.photons);
        let values = quadrature::integrate(
            |z, out| {
                let density = self.amplitude(z).norm_sqr();
                for (o, k) in out.iter_mut().zip(&kappas) {
                    *o = Complex64::from_polar(density, -k * z);
                }
            },
            omegas.len(),
            &self.support(),
            tol,
        )?;
        let energy = HBAR * self.central_frequency;
        Ok(values.into_iter().map(|v| v * energy).collect())
    }
}

/// Piecewise-constant linear power attenuation `α(z)` (1/m).
#[derive(Debug, Clone, PartialEq)]
pub struct AttenuationProfile {
    breaks: Vec<f64>,
    alpha: Vec<f64>,
}

impl AttenuationProfile {
    pub fn lossless(length: f64) -> Self {
        Self { breaks: vec![0.0, length], alpha: vec![0.0] }
    }

    pub fn uniform(alpha: f64, length: f64) -> Result<Self> {
        Self::piecewise(vec![0.0, length], vec![alpha])
    }

    /// `breaks` has one more entry than `alpha`; segment `k` spans
    /// `[breaks[k], breaks[k+1])`.
    pub fn piecewise(breaks: Vec<f64>, alpha: Vec<f64>) -> Result<Self> {
        if breaks.len() != alpha.len() + 1 || alpha.is_empty() {
            return Err(Error::InvalidLoss("breakpoints must bracket every segment".into()));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidLoss("breakpoints must be strictly increasing".into()));
        }
        if let Some(a) = alpha.iter().find(|a| !(**a >= 0.0) || !a.is_finite()) {
            return Err(Error::InvalidLoss(format!("attenuation must be non-negative, got {a}")));
        }
        Ok(Self { breaks, alpha })
    }

    pub fn is_lossless(&self) -> bool {
        self.alpha.iter().all(|&a| a == 0.0)
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn alpha_at(&self, z: f64) -> f64 {
        let k = self.breaks.partition_point(|&b| b <= z).clamp(1, self.alpha.len()) - 1;
        self.alpha[k]
    }

    /// `∫₀^z α dz'`; the last segment extends beyond the final breakpoint.
    pub fn integral_to(&self, z: f64) -> f64 {
        let mut acc = 0.0;
        for (k, &a) in self.alpha.iter().enumerate() {
            let lo = self.breaks[k];
            let hi = if k + 1 == self.alpha.len() { f64::INFINITY } else { self.breaks[k + 1] };
            if z <= lo {
                break;
            }
            acc += a * (z.min(hi) - lo);
        }
        acc
    }

    pub fn integral(&self, z0: f64, z1: f64) -> f64 {
        self.integral_to(z1) - self.integral_to(z0)
    }

    /// Remaining photon fraction `exp(−∫₀^z α)`.
    pub fn transmission(&self, z: f64) -> f64 {
        (-self.integral_to(z)).exp()
    }

    /// `∫_{z0}^{z1} exp(−∫₀^z α) dz`, evaluated exactly segment by segment.
    pub fn integrated_transmission(&self, z0: f64, z1: f64) -> f64 {
        let mut points = vec![z0];
        points.extend(self.breaks.iter().copied().filter(|&b| b > z0 && b < z1));
        points.push(z1);
        points
            .windows(2)
            .map(|w| {
                let a = self.alpha_at(0.5 * (w[0] + w[1]));
                let start = self.transmission(w[0]);
                let len = w[1] - w[0];
                if a * len < 1e-12 {
                    start * len * (1.0 - 0.5 * a * len)
                } else {
                    start * (1.0 - (-a * len).exp()) / a
                }
            })
            .sum()
    }
}

/// Pump photon numbers `N_p(z_l) = exp(−∫_{z_0}^{z_l} α) N_p(z_0)` at the
/// given positions; `positions[0]` is `z_0`.
pub fn pump_loss_schedule(pulse: &PumpPulse, attenuation: &AttenuationProfile, positions: &[f64]) -> Vec<f64> {
    let Some(&z0) = positions.first() else {
        return Vec::new();
    };
    positions
        .iter()
        .map(|&z| {
            if z == z0 {
                pulse.photons()
            } else {
                (-attenuation.integral(z0, z)).exp() * pulse.photons()
            }
        })
        .collect()
}

/// Photon fraction and accumulated self-phase-modulation factor along a
/// propagation mesh.
///
/// The factor `Φ(z) = ∫₀^z C_SPM ρ(z'')/v_p dz''` is accumulated with the
/// trapezoid rule on the mesh, where `ρ` is the surviving photon fraction.
#[derive(Debug, Clone)]
pub struct PumpEvolution {
    mesh: Vec<f64>,
    phase: Vec<Complex64>,
    c_spm: Complex64,
    attenuation: AttenuationProfile,
    group_velocity: f64,
}

impl PumpEvolution {
    pub fn new(mesh: &[f64], c_spm: Complex64, group_velocity: f64, attenuation: AttenuationProfile) -> Self {
        let mut phase = Vec::with_capacity(mesh.len());
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &z) in mesh.iter().enumerate() {
            if k > 0 {
                let z_prev = mesh[k - 1];
                let f0 = attenuation.transmission(z_prev);
                let f1 = attenuation.transmission(z);
                acc += c_spm / group_velocity * 0.5 * (f0 + f1) * (z - z_prev);
            }
            phase.push(acc);
        }
        Self { mesh: mesh.to_vec(), phase, c_spm, attenuation, group_velocity }
    }

    pub fn c_spm(&self) -> Complex64 {
        self.c_spm
    }

    pub fn attenuation(&self) -> &AttenuationProfile {
        &self.attenuation
    }

    pub fn mesh(&self) -> &[f64] {
        &self.mesh
    }

    pub fn phase_at_nodes(&self) -> &[Complex64] {
        &self.phase
    }

    /// Photon fraction `ρ(z)`.
    pub fn photon_fraction(&self, z: f64) -> f64 {
        self.attenuation.transmission(z)
    }

    /// Accumulated SPM factor at `z`, linear between mesh nodes.
    pub fn spm_phase(&self, z: f64) -> Complex64 {
        if self.mesh.len() < 2 {
            return Complex64::new(0.0, 0.0);
        }
        let k = self.mesh.partition_point(|&v| v <= z).clamp(1, self.mesh.len() - 1) - 1;
        let t = ((z - self.mesh[k]) / (self.mesh[k + 1] - self.mesh[k])).clamp(0.0, 1.0);
        self.phase[k] * (1.0 - t) + self.phase[k + 1] * t
    }

    /// Exact SPM factor `∫₀^z C_SPM ρ/v_p dz''` for the piecewise-constant attenuation.
    pub fn exact_spm_phase(&self, z: f64) -> Complex64 {
        self.c_spm / self.group_velocity * self.attenuation.integrated_transmission(0.0, z)
    }
}

/// Spectral amplitude at position `z`: `√ρ(z)·𝒜(Φ(z), ω)`.
pub fn pump_spectral_amplitude(pulse: &PumpPulse, evolution: &PumpEvolution, z: f64, omega: f64) -> Result<Complex64> {
    let rho = evolution.photon_fraction(z);
    Ok(pulse.spectral_amplitude(evolution.spm_phase(z), omega)? * rho.sqrt())
}

/// Overlap between the self-phase-modulated pump spectrum at the end of the
/// device and the spectrum evolving without self-phase modulation,
/// `|⟨𝒜_SPM, 𝒜_0⟩|² / (‖𝒜_SPM‖² ‖𝒜_0‖²)`, computed on a frequency window
/// wide enough for the broadened spectrum.
pub fn spm_overlap_fom(pulse: &PumpPulse, c_spm: Complex64, length: f64, attenuation: &AttenuationProfile) -> Result<f64> {
    if pulse.photons() == 0.0 {
        return Err(Error::UndefinedOverlap);
    }
    let phase = c_spm / pulse.group_velocity() * attenuation.integrated_transmission(0.0, length);
    if phase == Complex64::new(0.0, 0.0) {
        return Ok(1.0);
    }
    let theta = phase.norm() * pulse.peak_density();
    // Amplitude spectral standard deviation of the unmodulated pulse.
    let spread = pulse.group_velocity() / (pulse.rms_width() * 2f64.sqrt());
    let half_width = 10.0 * spread * (1.0 + theta);
    let count = ((340.0 * (1.0 + theta)).ceil() as usize).clamp(401, 40_001) | 1;
    let omegas: Vec<f64> = (0..count)
        .map(|k| pulse.central_frequency() - half_width + 2.0 * half_width * k as f64 / (count - 1) as f64)
        .collect();
    let modulated = pulse.spectral_amplitudes(phase, &omegas)?;
    let reference = pulse.spectral_amplitudes(Complex64::new(0.0, 0.0), &omegas)?;
    let weight = |k: usize| if k == 0 || k == count - 1 { 0.5 } else { 1.0 };
    let mut inner = Complex64::new(0.0, 0.0);
    let (mut na, mut nb) = (0.0, 0.0);
    for k in 0..count {
        let w = weight(k);
        inner += modulated[k].conj() * reference[k] * w;
        na += modulated[k].norm_sqr() * w;
        nb += reference[k].norm_sqr() * w;
    }
    if !(na > 0.0 && nb > 0.0) {
        return Err(Error::UndefinedOverlap);
    }
    Ok((inner.norm_sqr() / (na * nb)).min(1.0))
}
