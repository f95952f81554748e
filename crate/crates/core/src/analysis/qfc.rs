use super::moments::require_qfc;
use crate::linalg::svd;
use crate::propagator::{LossKind, Propagator};
use crate::{CMatrix, Error, Result};

/// Joint Schmidt decomposition of a frequency converter.
///
/// `K^is = V^i,out diag(sin t) (W^s,in)ᵀ` and `K^si = V^s,out diag(sin t) (W^i,in)ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct QfcDecomposition {
    pub signal_input: CMatrix,
    pub idler_input: CMatrix,
    pub signal_output: CMatrix,
    pub idler_output: CMatrix,
    pub angles: Vec<f64>,
    /// `γ_n = sin² t_n`, descending.
    pub probabilities: Vec<f64>,
}

pub fn qfc_decompose(p: &Propagator) -> Result<QfcDecomposition> {
    require_qfc(p)?;
    if p.loss() == LossKind::Interleaved {
        return Err(Error::InvalidLoss("conversion modes need lossless or band-uniform loss".into()));
    }
    let forward = svd(&p.k_is())?;
    let backward = svd(&p.k_si())?;
    let angles: Vec<f64> = forward.singular_values.iter().map(|&s| s.min(1.0).asin()).collect();
    let probabilities = angles.iter().map(|t| t.sin().powi(2)).collect();
    Ok(QfcDecomposition {
        signal_input: forward.v_t.transpose(),
        idler_output: forward.u,
        idler_input: backward.v_t.transpose(),
        signal_output: backward.u,
        angles,
        probabilities,
    })
}

/// Share of the dominant mode in the total conversion probability.
pub fn separability(probabilities: &[f64]) -> Result<f64> {
    let total: f64 = probabilities.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Undefined("separability without conversion"));
    }
    let first = probabilities.iter().copied().fold(0.0, f64::max);
    Ok(first / total)
}
