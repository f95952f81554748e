use crate::pump::AttenuationProfile;
use crate::{Error, Result};

/// Linear loss of the signal and idler fields.
#[derive(Debug, Clone, PartialEq)]
pub enum LossModel {
    Lossless,
    /// `α(z)` shared by every signal and idler frequency.
    Uniform(AttenuationProfile),
    /// Frequency-dependent `α(ω)` (1/m) at each signal and idler grid point,
    /// constant along the device.
    Band(BandLoss),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandLoss {
    pub signal: Vec<f64>,
    pub idler: Vec<f64>,
}

impl LossModel {
    pub fn validate(&self, n: usize) -> Result<()> {
        if let LossModel::Band(b) = self {
            if b.signal.len() != n || b.idler.len() != n {
                return Err(Error::InvalidLoss(format!("band loss needs {n} values per field")));
            }
            if let Some(a) = b.signal.iter().chain(&b.idler).find(|a| !(**a >= 0.0) || !a.is_finite()) {
                return Err(Error::InvalidLoss(format!("attenuation must be non-negative, got {a}")));
            }
        }
        Ok(())
    }

    pub fn is_lossless(&self) -> bool {
        match self {
            LossModel::Lossless => true,
            LossModel::Uniform(a) => a.is_lossless(),
            LossModel::Band(b) => b.signal.iter().chain(&b.idler).all(|&a| a == 0.0),
        }
    }

    /// Amplitude transmission `exp(−½∫α)` over `[z0, z1]`, one factor per
    /// mode (signal modes first).
    pub fn step_factors(&self, n: usize, z0: f64, z1: f64) -> Vec<f64> {
        match self {
            LossModel::Lossless => vec![1.0; 2 * n],
            LossModel::Uniform(a) => vec![(-0.5 * a.integral(z0, z1)).exp(); 2 * n],
            LossModel::Band(b) => b.signal.iter().chain(&b.idler).map(|a| (-0.5 * a * (z1 - z0)).exp()).collect(),
        }
    }

    /// Band-uniform amplitude transmission over `[z0, z1]`, if the loss is band-uniform.
    pub fn uniform_transmission(&self, z0: f64, z1: f64) -> Option<f64> {
        match self {
            LossModel::Lossless => Some(1.0),
            LossModel::Uniform(a) => Some((-0.5 * a.integral(z0, z1)).exp()),
            LossModel::Band(_) => None,
        }
    }
}
