//! Frequency grids, ingested waveguide dispersion, walk-off terms and the
//! baseline three-wave-mixing phase mismatch.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::SPEED_OF_LIGHT;
use crate::propagator::ProcessKind;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldLabel {
    Signal,
    Idler,
    Pump,
}

/// Uniform grid `ω_n = band_start + n·spacing` for `n = 1..=count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    band_start: f64,
    spacing: f64,
    count: usize,
    label: FieldLabel,
}

impl FrequencyGrid {
    pub fn new(band_start: f64, spacing: f64, count: usize, label: FieldLabel) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {spacing}")));
        }
        if count < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {count}")));
        }
        if !band_start.is_finite() {
            return Err(Error::InvalidGrid("band start is not finite".into()));
        }
        Ok(Self { band_start, spacing, count, label })
    }

    /// Grid of `count` points centred on `center`.
    pub fn centered(center: f64, spacing: f64, count: usize, label: FieldLabel) -> Result<Self> {
        let band_start = center - spacing * (count as f64 + 1.0) / 2.0;
        Self::new(band_start, spacing, count, label)
    }

    pub fn band_start(&self) -> f64 {
        self.band_start
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn label(&self) -> FieldLabel {
        self.label
    }

    /// Frequency of the `index`-th point, zero-based (`index = n - 1`).
    pub fn point(&self, index: usize) -> f64 {
        self.band_start + (index as f64 + 1.0) * self.spacing
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.point(k)).collect()
    }

    pub fn first(&self) -> f64 {
        self.point(0)
    }

    pub fn last(&self) -> f64 {
        self.point(self.count - 1)
    }
}

/// Not-a-knot cubic spline with analytic first derivative.
#[derive(Debug, Clone)]
struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl CubicSpline {
    /// Requires at least four strictly increasing abscissae.
    fn not_a_knot(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        debug_assert!(n >= 4);
        let dx: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let m: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / dx[k]).collect();

        // Tridiagonal system for the knot slopes.
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];

        let d0 = x[2] - x[0];
        diag[0] = dx[1];
        sup[0] = d0;
        rhs[0] = ((dx[0] + 2.0 * d0) * dx[1] * m[0] + dx[0] * dx[0] * m[1]) / d0;
        for k in 1..n - 1 {
            sub[k] = dx[k];
            diag[k] = 2.0 * (dx[k - 1] + dx[k]);
            sup[k] = dx[k - 1];
            rhs[k] = 3.0 * (dx[k] * m[k - 1] + dx[k - 1] * m[k]);
        }
        let dn = x[n - 1] - x[n - 3];
        sub[n - 1] = dn;
        diag[n - 1] = dx[n - 3];
        rhs[n - 1] =
            (dx[n - 2] * dx[n - 2] * m[n - 3] + (2.0 * dn + dx[n - 2]) * dx[n - 3] * m[n - 2]) / dn;

        let slope = solve_tridiagonal(&sub, &diag, &sup, &rhs);
        Self { x, y, slope }
    }

    fn segment(&self, t: f64) -> usize {
        match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            k if k >= self.x.len() => self.x.len() - 2,
            k => k - 1,
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let k = self.segment(t);
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let (y0, y1) = (self.y[k], self.y[k + 1]);
        let (m0, m1) = (self.slope[k] * h, self.slope[k + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1
    }

    fn derivative(&self, t: f64) -> f64 {
        let k = self.segment(t);
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let (y0, y1) = (self.y[k], self.y[k + 1]);
        let (m0, m1) = (self.slope[k] * h, self.slope[k + 1] * h);
        let s2 = s * s;
        ((6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * m0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * m1)
            / h
    }
}

/// Gaussian elimination with partial pivoting on a tridiagonal system whose
/// first and last rows may be non-dominant.
fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    // Row k holds columns k-1, k, k+1 and a possible fill-in at k+2.
    let mut rows: Vec<[f64; 4]> = (0..n).map(|k| [sub[k], diag[k], sup[k], 0.0]).collect();
    let mut b = rhs.to_vec();
    for k in 0..n - 1 {
        // Candidate pivot rows are k and k+1 (column k).
        let a = rows[k][1];
        let c = rows[k + 1][0];
        if c.abs() > a.abs() {
            // Swap rows k and k+1, re-aligning the column offsets.
            let rk = rows[k];
            let rk1 = rows[k + 1];
            rows[k] = [0.0, rk1[0], rk1[1], rk1[2]];
            rows[k + 1] = [rk[1], rk[2], rk[3], 0.0];
            b.swap(k, k + 1);
        }
        let pivot = rows[k][1];
        let factor = rows[k + 1][0] / pivot;
        rows[k + 1][0] = 0.0;
        rows[k + 1][1] -= factor * rows[k][2];
        rows[k + 1][2] -= factor * rows[k][3];
        b[k + 1] -= factor * b[k];
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut acc = b[k];
        if k + 1 < n {
            acc -= rows[k][2] * x[k + 1];
        }
        if k + 2 < n {
            acc -= rows[k][3] * x[k + 2];
        }
        x[k] = acc / rows[k][1];
    }
    x
}

/// Effective-index dispersion of one waveguide mode.
///
/// The propagation constant `β(ω) = n_eff(ω)·ω/c` is interpolated with a
/// not-a-knot cubic spline; the group velocity is the reciprocal of the
/// spline's analytic derivative.
#[derive(Debug, Clone)]
pub struct DispersionModel {
    samples: Vec<(f64, f64)>,
    beta: CubicSpline,
    central_frequency: f64,
    central_group_velocity: f64,
}

impl DispersionModel {
    /// Builds a model from `(ω, n_eff)` samples with strictly increasing ω.
    pub fn from_samples(samples: Vec<(f64, f64)>, central_frequency: f64) -> Result<Self> {
        if samples.len() < 4 {
            return Err(Error::MalformedTable(format!(
                "need at least 4 samples, got {}",
                samples.len()
            )));
        }
        for &(w, n) in &samples {
            if !(w.is_finite() && n.is_finite()) || w <= 0.0 || n <= 0.0 {
                return Err(Error::MalformedTable(format!(
                    "sample ({w}, {n}) must be finite and positive"
                )));
            }
        }
        if samples.windows(2).any(|p| p[1].0 <= p[0].0) {
            return Err(Error::MalformedTable("frequencies must be strictly increasing".into()));
        }
        let lo = samples[0].0;
        let hi = samples[samples.len() - 1].0;
        if !(lo..=hi).contains(&central_frequency) {
            return Err(Error::Extrapolation { omega: central_frequency, lo, hi });
        }
        let x: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let y: Vec<f64> = samples.iter().map(|&(w, n)| n * w / SPEED_OF_LIGHT).collect();
        let beta = CubicSpline::not_a_knot(x, y);

        let mut probes: Vec<f64> = samples.iter().map(|s| s.0).collect();
        probes.extend(samples.windows(2).map(|p| 0.5 * (p[0].0 + p[1].0)));
        for w in probes {
            let slope = beta.derivative(w);
            if !(slope.is_finite() && slope > 0.0) {
                return Err(Error::MalformedTable(format!(
                    "group velocity not finite and positive at ω = {w:e} rad/s"
                )));
            }
        }
        let central_group_velocity = 1.0 / beta.derivative(central_frequency);
        Ok(Self { samples, beta, central_frequency, central_group_velocity })
    }

    /// Reads a two-column CSV with header `omega_rad_s,n_eff` or
    /// `lambda_m,n_eff`. Wavelength tables may be in either order.
    pub fn from_csv_path(path: impl AsRef<Path>, central_frequency: f64) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file, central_frequency)
    }

    pub fn from_csv_reader(reader: impl std::io::Read, central_frequency: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::MalformedTable(e.to_string()))?
            .clone();
        let columns: Vec<&str> = headers.iter().collect();
        let wavelength = match columns.as_slice() {
            ["omega_rad_s", "n_eff"] => false,
            ["lambda_m", "n_eff"] => true,
            other => {
                return Err(Error::MalformedTable(format!(
                    "expected header omega_rad_s,n_eff or lambda_m,n_eff, got {}",
                    other.join(",")
                )))
            }
        };
        let mut samples = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| Error::MalformedTable(e.to_string()))?;
            let parse = |k: usize| -> Result<f64> {
                record
                    .get(k)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| Error::MalformedTable(format!("bad row {:?}", record)))
            };
            let (a, n) = (parse(0)?, parse(1)?);
            let omega = if wavelength {
                if a <= 0.0 {
                    return Err(Error::MalformedTable(format!("non-positive wavelength {a}")));
                }
                2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / a
            } else {
                a
            };
            samples.push((omega, n));
        }
        if wavelength && samples.len() >= 2 && samples[0].0 > samples[1].0 {
            samples.reverse();
        }
        Self::from_samples(samples, central_frequency)
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn window(&self) -> (f64, f64) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }

    fn check(&self, omega: f64) -> Result<()> {
        let (lo, hi) = self.window();
        if omega.is_nan() || omega < lo || omega > hi {
            return Err(Error::Extrapolation { omega, lo, hi });
        }
        Ok(())
    }

    /// Propagation constant β(ω) in rad/m.
    pub fn beta(&self, omega: f64) -> Result<f64> {
        self.check(omega)?;
        Ok(self.beta.eval(omega))
    }

    pub fn n_eff(&self, omega: f64) -> Result<f64> {
        Ok(self.beta(omega)? * SPEED_OF_LIGHT / omega)
    }

    /// Group velocity `c / (n_eff + ω ∂n_eff/∂ω)` in m/s.
    pub fn group_velocity(&self, omega: f64) -> Result<f64> {
        self.check(omega)?;
        Ok(1.0 / self.beta.derivative(omega))
    }

    pub fn phase_velocity(&self, omega: f64) -> Result<f64> {
        Ok(SPEED_OF_LIGHT / self.n_eff(omega)?)
    }

    pub fn central_frequency(&self) -> f64 {
        self.central_frequency
    }

    pub fn central_group_velocity(&self) -> f64 {
        self.central_group_velocity
    }
}

/// Walk-off `Δk_j(ω_n)` between a signal or idler field and the pump frame.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkOffProfile {
    values: Vec<f64>,
}

impl WalkOffProfile {
    pub fn from_values(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Evaluates `Δk_j(ω) = β_j(ω) − β_j(ω_j) − (ω − ω_j)/v_p(ω_p)` on `grid`.
///
/// The full propagation constant of field `j` is kept, so all orders of its
/// dispersion enter; for a linear `β_j` this is `(1/v_j − 1/v_p)(ω − ω_j)`.
pub fn walk_off(
    field: &DispersionModel,
    pump: &DispersionModel,
    grid: &FrequencyGrid,
) -> Result<WalkOffProfile> {
    let center = field.central_frequency();
    let beta_center = field.beta(center)?;
    let inv_vp = 1.0 / pump.central_group_velocity();
    let values = grid
        .points()
        .into_iter()
        .map(|w| Ok(field.beta(w)? - beta_center - (w - center) * inv_vp))
        .collect::<Result<Vec<_>>>()?;
    Ok(WalkOffProfile { values })
}

/// `β_p(ω_p) − β_s(ω_s) − β_i(ω_i)` for down-conversion, and
/// `β_p(ω_p) + β_s(ω_s) − β_i(ω_i)` for frequency conversion.
pub fn baseline_phase_mismatch(
    kind: ProcessKind,
    pump: &DispersionModel,
    signal: &DispersionModel,
    idler: &DispersionModel,
    omega_p: f64,
    omega_s: f64,
    omega_i: f64,
) -> Result<f64> {
    check_energy_conservation(kind, omega_p, omega_s, omega_i)?;
    let (bp, bs, bi) = (pump.beta(omega_p)?, signal.beta(omega_s)?, idler.beta(omega_i)?);
    Ok(match kind {
        ProcessKind::Pdc => bp - bs - bi,
        ProcessKind::Qfc => bp + bs - bi,
    })
}

/// Energy conservation at the band centres to one part in 10⁹.
pub fn check_energy_conservation(kind: ProcessKind, omega_p: f64, omega_s: f64, omega_i: f64) -> Result<()> {
    let (lhs, rhs) = match kind {
        ProcessKind::Pdc => (omega_p, omega_s + omega_i),
        ProcessKind::Qfc => (omega_i, omega_p + omega_s),
    };
    if (lhs - rhs).abs() > 1e-9 * lhs.abs().max(rhs.abs()) {
        return Err(Error::InconsistentBands(format!(
            "{kind:?} requires energy conservation; got {lhs:e} vs {rhs:e} rad/s"
        )));
    }
    Ok(())
}
