use serde::{Deserialize, Serialize};

use crate::linalg::{matmul, svd};
use crate::propagator::{ProcessKind, Propagator};
use crate::{CMatrix, Error, Result};

/// Phase-sensitive moment `M_mn = ⟨a_s,m a_i,n⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSensitiveMoment {
    pub m: CMatrix,
}

fn require(p: &Propagator, kind: ProcessKind) -> Result<()> {
    if p.kind() != kind {
        return Err(Error::KindMismatch { expected: kind.name(), actual: p.kind().name() });
    }
    Ok(())
}

pub(crate) fn require_pdc(p: &Propagator) -> Result<()> {
    require(p, ProcessKind::Pdc)
}

pub(crate) fn require_qfc(p: &Propagator) -> Result<()> {
    require(p, ProcessKind::Qfc)
}

/// `M = K^ss (K^is)ᵀ`, including any loss carried by the propagator.
pub fn moment_m(p: &Propagator) -> Result<PhaseSensitiveMoment> {
    require_pdc(p)?;
    Ok(PhaseSensitiveMoment { m: matmul(&p.k_ss(), &p.k_is().transpose()) })
}

/// Photon-number moments `N^s_mn = ⟨a_s,m† a_s,n⟩` and the idler analogue.
pub fn photon_moments(p: &Propagator) -> Result<(CMatrix, CMatrix)> {
    require_pdc(p)?;
    let si = p.k_si();
    let is = p.k_is();
    let ns = matmul(&si.map(|c| c.conj()), &si.transpose());
    let ni = matmul(&is.map(|c| c.conj()), &is.transpose());
    Ok((ns, ni))
}

pub fn trace_real(m: &CMatrix) -> f64 {
    m.diagonal().iter().map(|c| c.re).sum()
}

/// Schmidt decomposition of the two-mode squeezed state, `J = V diag(r) Wᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct JsaDecomposition {
    /// Signal Schmidt modes (columns).
    pub v: CMatrix,
    /// Idler Schmidt modes (columns).
    pub w: CMatrix,
    /// Singular values of `M`, descending.
    pub singular_values: Vec<f64>,
    pub squeezing: Vec<f64>,
    pub jsa: CMatrix,
}

pub fn squeezing_from_moment(singular: f64) -> f64 {
    0.5 * (2.0 * singular).asinh()
}

pub fn jsa_decompose(m: &PhaseSensitiveMoment) -> Result<JsaDecomposition> {
    let dec = svd(&m.m)?;
    let squeezing: Vec<f64> = dec.singular_values.iter().map(|&s| squeezing_from_moment(s)).collect();
    let w = dec.v_t.transpose();
    let scaled = CMatrix::from_fn(dec.u.nrows(), squeezing.len(), |r, c| dec.u[(r, c)] * squeezing[c]);
    let jsa = matmul(&scaled, &dec.v_t);
    Ok(JsaDecomposition { v: dec.u, w, singular_values: dec.singular_values, squeezing, jsa })
}

/// `SN = (Σ sinh² r)² / Σ sinh⁴ r`.
pub fn schmidt_number(squeezing: &[f64]) -> Result<f64> {
    let (mut s2, mut s4) = (0.0, 0.0);
    for &r in squeezing {
        let p = r.sinh().powi(2);
        s2 += p;
        s4 += p * p;
    }
    if !(s4 > 0.0) || !s2.is_finite() || !s4.is_finite() {
        return Err(Error::Undefined("Schmidt number without squeezing"));
    }
    Ok(s2 * s2 / s4)
}

pub fn purity(squeezing: &[f64]) -> Result<f64> {
    schmidt_number(squeezing).map(|sn| 1.0 / sn)
}

/// One Schmidt-mode squeezer: `exp[r A_s† A_i† − h.c.]` with `A_s† = Σ V_m a_s,m†`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezerMode {
    pub r: f64,
    pub signal_mode: Vec<[f64; 2]>,
    pub idler_mode: Vec<[f64; 2]>,
}

/// Product of independent two-mode squeezers describing the output state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDescriptor {
    pub modes: Vec<SqueezerMode>,
}

fn column(m: &CMatrix, c: usize) -> Vec<[f64; 2]> {
    m.column(c).iter().map(|z| [z.re, z.im]).collect()
}

impl StateDescriptor {
    pub fn from_decomposition(dec: &JsaDecomposition) -> Self {
        let modes = dec
            .squeezing
            .iter()
            .enumerate()
            .filter(|(_, &r)| r > 0.0)
            .map(|(k, &r)| SqueezerMode { r, signal_mode: column(&dec.v, k), idler_mode: column(&dec.w, k) })
            .collect();
        Self { modes }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("state descriptor: {e}")))
    }
}

pub fn write_state_descriptor(dec: &JsaDecomposition) -> Result<String> {
    StateDescriptor::from_decomposition(dec).to_json()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::relative_distance;
    use crate::propagator::LossKind;
    use num_complex::Complex64;

    fn unit(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn squeezing_map() {
        assert!((squeezing_from_moment(0.5) - 0.5 * 1f64.asinh()).abs() < 1e-15);
        assert!((squeezing_from_moment(0.5) - 0.440_686_793_509_771_6).abs() < 1e-12);
        assert_eq!(squeezing_from_moment(0.0), 0.0);
    }

    #[test]
    fn schmidt_number_examples() {
        assert!((schmidt_number(&[0.7, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((schmidt_number(&[0.3, 0.3]).unwrap() - 2.0).abs() < 1e-14);
        let (a, b) = (1f64.sinh().powi(2), 0.5f64.sinh().powi(2));
        let expected = (a + b).powi(2) / (a * a + b * b);
        let sn = schmidt_number(&[1.0, 0.5]).unwrap();
        assert!((sn - expected).abs() < 1e-14);
        assert!((sn - 1.378_589_033_296_508_5).abs() < 1e-12);
        assert!(matches!(schmidt_number(&[0.0, 0.0]), Err(Error::Undefined(_))));
        assert!((purity(&[1.0, 0.5]).unwrap() - 1.0 / expected).abs() < 1e-14);
    }

    #[test]
    fn zero_moment_has_no_modes() {
        let dec = jsa_decompose(&PhaseSensitiveMoment { m: CMatrix::zeros(4, 4) }).unwrap();
        assert!(dec.squeezing.iter().all(|&r| r == 0.0));
        assert!(StateDescriptor::from_decomposition(&dec).modes.is_empty());
    }

    #[test]
    fn kind_is_checked() {
        let p = Propagator::new(ProcessKind::Qfc, CMatrix::identity(2, 2), 1.0, LossKind::Lossless).unwrap();
        assert!(matches!(moment_m(&p), Err(Error::KindMismatch { .. })));
        assert!(matches!(photon_moments(&p), Err(Error::KindMismatch { .. })));
    }

    #[test]
    fn reconstruction_and_descriptor() {
        let m = CMatrix::from_fn(3, 3, |r, c| Complex64::new(0.1 * (r + 2 * c) as f64, 0.05 * (r as f64 - c as f64)));
        let dec = jsa_decompose(&PhaseSensitiveMoment { m: m.clone() }).unwrap();
        let mut back = CMatrix::zeros(3, 3);
        for k in 0..3 {
            back += (dec.v.column(k) * dec.w.column(k).transpose()) * unit(dec.singular_values[k]);
        }
        assert!(relative_distance(&back, &m) < 1e-12);
        let descriptor = StateDescriptor::from_decomposition(&dec);
        let text = descriptor.to_json().unwrap();
        let parsed = StateDescriptor::from_json(&text).unwrap();
        assert_eq!(parsed, descriptor);
        for mode in &parsed.modes {
            let norm: f64 = mode.signal_mode.iter().map(|z| z[0] * z[0] + z[1] * z[1]).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }
}
