use serde::{Deserialize, Serialize};

use super::moments::{jsa_decompose, moment_m, photon_moments, purity, schmidt_number, trace_real};
use super::qfc::{qfc_decompose, separability};
use crate::propagator::{ProcessKind, Propagator};
use crate::{CMatrix, Error, Result};

/// Scalar summary of one propagation. Quantities that are undefined for the
/// process, or at zero gain, are `None` and flagged in `undefined`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiguresOfMerit {
    pub kind: ProcessKind,
    pub schmidt_number: Option<f64>,
    pub purity: Option<f64>,
    pub dominant_squeezing: Option<f64>,
    pub photons_signal: Option<f64>,
    pub photons_idler: Option<f64>,
    pub conversion_probability: Option<f64>,
    pub separability: Option<f64>,
    /// Squeezing parameters (down-conversion) or conversion probabilities.
    pub mode_weights: Vec<f64>,
    /// Share of `|M|²` (or `|K^is|²`) within the outer 10% of the grid.
    pub edge_energy_fraction: f64,
    pub undefined: Vec<String>,
}

/// Fraction of `Σ|x|²` in rows or columns belonging to the outermost 10%
/// of the grid, split evenly between both ends.
pub fn edge_energy_fraction(x: &CMatrix) -> f64 {
    let n = x.nrows();
    let band = ((n as f64) * 0.05).round().max(1.0) as usize;
    let edge = |k: usize| k < band || k + band >= n;
    let (mut total, mut outer) = (0.0, 0.0);
    for r in 0..n {
        for c in 0..x.ncols() {
            let w = x[(r, c)].norm_sqr();
            total += w;
            if edge(r) || edge(c) {
                outer += w;
            }
        }
    }
    if total > 0.0 {
        outer / total
    } else {
        0.0
    }
}

fn defined(value: Result<f64>, name: &str, undefined: &mut Vec<String>) -> Result<Option<f64>> {
    match value {
        Ok(v) => Ok(Some(v)),
        Err(Error::Undefined(_)) => {
            undefined.push(name.to_string());
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

pub fn figures_of_merit(p: &Propagator) -> Result<FiguresOfMerit> {
    let mut undefined = Vec::new();
    match p.kind() {
        ProcessKind::Pdc => {
            let m = moment_m(p)?;
            let (ns, ni) = photon_moments(p)?;
            let dec = jsa_decompose(&m)?;
            let sn = defined(schmidt_number(&dec.squeezing), "schmidt_number", &mut undefined)?;
            let pu = defined(purity(&dec.squeezing), "purity", &mut undefined)?;
            Ok(FiguresOfMerit {
                kind: p.kind(),
                schmidt_number: sn,
                purity: pu,
                dominant_squeezing: dec.squeezing.first().copied(),
                photons_signal: Some(trace_real(&ns)),
                photons_idler: Some(trace_real(&ni)),
                conversion_probability: None,
                separability: None,
                edge_energy_fraction: edge_energy_fraction(&m.m),
                mode_weights: dec.squeezing,
                undefined,
            })
        }
        ProcessKind::Qfc => {
            let dec = qfc_decompose(p)?;
            let s = defined(separability(&dec.probabilities), "separability", &mut undefined)?;
            Ok(FiguresOfMerit {
                kind: p.kind(),
                schmidt_number: None,
                purity: None,
                dominant_squeezing: None,
                photons_signal: None,
                photons_idler: None,
                conversion_probability: dec.probabilities.first().copied(),
                separability: s,
                edge_energy_fraction: edge_energy_fraction(&p.k_is()),
                mode_weights: dec.probabilities,
                undefined,
            })
        }
    }
}
