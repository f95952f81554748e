use std::collections::HashMap;

use num_complex::Complex64;

use super::mesh::validate_mesh;
use super::trotter::{LossKind, Propagator};
use super::Scenario;
use crate::linalg::{matmul, relative_distance};
use crate::{CMatrix, Error, Result};

/// Controls for the reference integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    /// Bound on `(‖Q‖∞ + |Δβ|)·h` for the base substep `h`.
    pub max_phase_per_step: f64,
    /// Required relative change between successive extrapolated results.
    pub tolerance: f64,
    /// Additional halvings attempted before giving up.
    pub max_refinements: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { max_phase_per_step: 0.1, tolerance: 1e-8, max_refinements: 2 }
    }
}

/// Classical fourth-order Runge-Kutta integration of `∂K/∂z = iQ(z)K` in
/// the laboratory frame, with the mismatch phasor evaluated exactly.
pub fn ode_reference(scenario: &Scenario, mesh: &[f64]) -> Result<Propagator> {
    ode_reference_with(scenario, mesh, &OdeOptions::default())
}

pub fn ode_reference_with(scenario: &Scenario, mesh: &[f64], options: &OdeOptions) -> Result<Propagator> {
    validate_mesh(scenario, mesh)?;
    if !scenario.loss.is_lossless() {
        return Err(Error::InvalidLoss("the reference integrator handles lossless signal and idler only".into()));
    }
    let beta_max = scenario.baseline_mismatch.abs()
        + scenario.inhomogeneity.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rate = scenario.generator_norm()? + beta_max;
    let mut integrator = Integrator { scenario, cache: HashMap::new() };

    // Step doubling with Richardson extrapolation; successive extrapolants
    // must agree to the tolerance.
    let mut density = options.max_phase_per_step;
    let mut coarse = integrator.run(mesh, rate, density)?;
    let mut previous: Option<CMatrix> = None;
    let mut change = f64::INFINITY;
    for _ in 0..=options.max_refinements + 1 {
        density *= 0.5;
        let fine = integrator.run(mesh, rate, density)?;
        let extrapolated = (&fine * Complex64::new(16.0, 0.0) - &coarse) / Complex64::new(15.0, 0.0);
        if let Some(prev) = &previous {
            change = relative_distance(&extrapolated, prev);
            if change < options.tolerance {
                return Propagator::new(scenario.kind, extrapolated, 1.0, LossKind::Lossless)
                    .map(|p| p.with_grids(scenario.grids.clone()));
            }
        }
        previous = Some(extrapolated);
        coarse = fine;
    }
    Err(Error::OracleUnconverged { change })
}

struct Integrator<'a> {
    scenario: &'a Scenario,
    cache: HashMap<(u64, u64, u64), (Vec<Complex64>, Vec<Complex64>)>,
}

impl Integrator<'_> {
    fn generator(&mut self, z: f64, g: f64) -> Result<CMatrix> {
        let s = self.scenario;
        let (rho, spm) = s.pump_state(z);
        let key = (rho.to_bits(), spm.re.to_bits(), spm.im.to_bits());
        if !self.cache.contains_key(&key) {
            if self.cache.len() > 4096 {
                self.cache.clear();
            }
            let (a, e) = s.pump_samples(rho, spm)?;
            self.cache.insert(key, (a.into_owned(), e.into_owned()));
        }
        let (a, e) = &self.cache[&key];
        let mut q = s.lab_generator(z, g, a, e)?;
        q *= Complex64::new(0.0, 1.0);
        Ok(q)
    }

    fn run(&mut self, mesh: &[f64], rate: f64, max_phase: f64) -> Result<CMatrix> {
        let n = self.scenario.dim();
        let mut k = CMatrix::identity(2 * n, 2 * n);
        for w in mesh.windows(2) {
            let (z0, z1) = (w[0], w[1]);
            let g = f64::from(self.scenario.poling.orientation_at(0.5 * (z0 + z1)));
            let steps = ((z1 - z0) * rate / max_phase).ceil().max(1.0) as usize;
            let h = (z1 - z0) / steps as f64;
            for j in 0..steps {
                let z = z0 + j as f64 * h;
                let q0 = self.generator(z, g)?;
                let qm = self.generator(z + 0.5 * h, g)?;
                let q1 = self.generator(if j + 1 == steps { z1 } else { z + h }, g)?;
                let half = Complex64::new(0.5 * h, 0.0);
                let k1 = matmul(&q0, &k);
                let k2 = matmul(&qm, &(&k + &k1 * half));
                let k3 = matmul(&qm, &(&k + &k2 * half));
                let k4 = matmul(&q1, &(&k + &k3 * Complex64::new(h, 0.0)));
                k += (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * Complex64::new(h / 6.0, 0.0);
            }
        }
        if k.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numeric("reference propagator".into()));
        }
        Ok(k)
    }
}
