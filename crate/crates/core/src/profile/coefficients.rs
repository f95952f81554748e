use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{EPSILON_0, HBAR};
use crate::propagator::ProcessKind;
use crate::{Error, Result};

const NORMALIZATION_TOLERANCE: f64 = 1e-3;

/// Nonlinear interaction strengths, held constant along the device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionCoefficients {
    pub twm: Complex64,
    pub xpm_signal: Complex64,
    pub xpm_idler: Complex64,
    pub spm: Complex64,
}

impl InteractionCoefficients {
    pub fn three_wave_only(twm: f64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self { twm: Complex64::new(twm, 0.0), xpm_signal: zero, xpm_idler: zero, spm: zero }
    }

    pub fn is_finite(&self) -> bool {
        [self.twm, self.xpm_signal, self.xpm_idler, self.spm].iter().all(|c| c.is_finite())
    }
}

/// Transverse displacement field and material index on a rectangular mesh
/// of cell centres, stored row by row (x fastest).
///
/// CSV layout: header `x_m,y_m,n,dx_re,dx_im,dy_re,dy_im,dz_re,dz_im`, one
/// row per cell centre in the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeFieldGrid {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    origin: (f64, f64),
    field: Vec<[Complex64; 3]>,
    index: Vec<f64>,
}

impl ModeFieldGrid {
    pub fn new(
        nx: usize,
        ny: usize,
        spacing: (f64, f64),
        origin: (f64, f64),
        field: Vec<[Complex64; 3]>,
        index: Vec<f64>,
    ) -> Result<Self> {
        let (dx, dy) = spacing;
        if nx == 0 || ny == 0 || !(dx > 0.0 && dy > 0.0) {
            return Err(Error::InvalidMode("mesh must be non-empty with positive spacings".into()));
        }
        if field.len() != nx * ny || index.len() != nx * ny {
            return Err(Error::InvalidMode(format!("expected {} samples", nx * ny)));
        }
        if index.iter().any(|n| !(*n > 0.0)) {
            return Err(Error::InvalidMode("refractive index must be positive".into()));
        }
        Ok(Self { nx, ny, dx, dy, origin, field, index })
    }

    /// Samples `field(x, y)` and `index(x, y)` at the cell centres of
    /// `[x0, x0 + nx·dx] × [y0, y0 + ny·dy]`.
    pub fn from_fn(
        nx: usize,
        ny: usize,
        spacing: (f64, f64),
        origin: (f64, f64),
        field: impl Fn(f64, f64) -> [Complex64; 3],
        index: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut f = Vec::with_capacity(nx * ny);
        let mut n = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                let x = origin.0 + (ix as f64 + 0.5) * spacing.0;
                let y = origin.1 + (iy as f64 + 0.5) * spacing.1;
                f.push(field(x, y));
                n.push(index(x, y));
            }
        }
        Self::new(nx, ny, spacing, origin, f, n)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn spacing(&self) -> (f64, f64) {
        (self.dx, self.dy)
    }

    fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    fn same_mesh(&self, other: &Self) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.dx == other.dx && self.dy == other.dy && self.origin == other.origin
    }

    /// `∫ d·d* / (ε₀ n²) dx dy`.
    pub fn energy_integral(&self) -> f64 {
        self.field
            .iter()
            .zip(&self.index)
            .map(|(d, n)| d.iter().map(|c| c.norm_sqr()).sum::<f64>() / (EPSILON_0 * n * n))
            .sum::<f64>()
            * self.cell_area()
    }

    /// Copy rescaled to unit normalization for the given velocity ratio.
    pub fn normalized(&self, phase_velocity: f64, group_velocity: f64) -> Self {
        let scale = (self.energy_integral() * phase_velocity / group_velocity).sqrt().recip();
        let mut out = self.clone();
        out.field.iter_mut().for_each(|d| d.iter_mut().for_each(|c| *c *= scale));
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e))?;
        w.write_record(["x_m", "y_m", "n", "dx_re", "dx_im", "dy_re", "dy_im", "dz_re", "dz_im"])
            .map_err(|e| Error::io(path, e))?;
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let k = iy * self.nx + ix;
                let x = self.origin.0 + (ix as f64 + 0.5) * self.dx;
                let y = self.origin.1 + (iy as f64 + 0.5) * self.dy;
                let mut row = vec![format!("{x:e}"), format!("{y:e}"), format!("{:e}", self.index[k])];
                for c in self.field[k] {
                    row.push(format!("{:e}", c.re));
                    row.push(format!("{:e}", c.im));
                }
                w.write_record(&row).map_err(|e| Error::io(path, e))?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::io(path, e))?;
        let mut rows: Vec<[f64; 9]> = Vec::new();
        for record in r.records() {
            let record = record.map_err(|e| Error::io(path, e))?;
            if record.len() != 9 {
                return Err(Error::InvalidMode(format!("expected 9 columns, got {}", record.len())));
            }
            let mut row = [0.0; 9];
            for (k, v) in row.iter_mut().enumerate() {
                *v = record[k].parse().map_err(|e| Error::InvalidMode(format!("{}: {e}", &record[k])))?;
            }
            rows.push(row);
        }
        if rows.len() < 2 {
            return Err(Error::InvalidMode("mode table needs at least two rows".into()));
        }
        let nx = rows.iter().take_while(|r| r[1] == rows[0][1]).count();
        if rows.len() % nx != 0 {
            return Err(Error::InvalidMode("rows do not form a rectangular mesh".into()));
        }
        let ny = rows.len() / nx;
        let dx = if nx > 1 { rows[1][0] - rows[0][0] } else { 1.0 };
        let dy = if ny > 1 { rows[nx][1] - rows[0][1] } else { 1.0 };
        let origin = (rows[0][0] - 0.5 * dx, rows[0][1] - 0.5 * dy);
        let field = rows
            .iter()
            .map(|r| [Complex64::new(r[3], r[4]), Complex64::new(r[5], r[6]), Complex64::new(r[7], r[8])])
            .collect();
        let index = rows.iter().map(|r| r[2]).collect();
        Self::new(nx, ny, (dx, dy), origin, field, index)
    }
}

/// Mode of one field together with the quantities its normalization refers to.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeField {
    pub grid: ModeFieldGrid,
    pub frequency: f64,
    pub phase_velocity: f64,
    pub group_velocity: f64,
}

impl ModeField {
    pub fn normalization(&self) -> f64 {
        self.grid.energy_integral() * self.phase_velocity / self.group_velocity
    }

    fn check(&self, name: &str) -> Result<()> {
        let n = self.normalization();
        if (n - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidMode(format!("{name} mode normalization is {n}, expected 1")));
        }
        Ok(())
    }
}

/// Second-order susceptibility `χ_jkl` (m/V), index `9j + 3k + l` with x, y, z = 0, 1, 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chi2Tensor(pub [f64; 27]);

impl Chi2Tensor {
    pub fn single(j: usize, k: usize, l: usize, value: f64) -> Self {
        let mut t = [0.0; 27];
        t[9 * j + 3 * k + l] = value;
        Self(t)
    }
}

/// Third-order susceptibility `χ_jklm` (m²/V²), index `27j + 9k + 3l + m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chi3Tensor(pub [f64; 81]);

impl Chi3Tensor {
    pub fn single(j: usize, k: usize, l: usize, m: usize, value: f64) -> Self {
        let mut t = [0.0; 81];
        t[27 * j + 9 * k + 3 * l + m] = value;
        Self(t)
    }

    pub fn zero() -> Self {
        Self([0.0; 81])
    }
}

/// Interaction coefficients from transverse mode overlaps, evaluated with
/// the midpoint rule on the common mesh. The signal field enters the
/// three-wave overlap conjugated for down-conversion and unconjugated for
/// frequency conversion.
pub fn overlap_coefficients(
    kind: ProcessKind,
    signal: &ModeField,
    idler: &ModeField,
    pump: &ModeField,
    chi2: &Chi2Tensor,
    chi3: &Chi3Tensor,
) -> Result<InteractionCoefficients> {
    signal.check("signal")?;
    idler.check("idler")?;
    pump.check("pump")?;
    if !(signal.grid.same_mesh(&pump.grid) && idler.grid.same_mesh(&pump.grid)) {
        return Err(Error::InvalidMode("mode fields must share one mesh".into()));
    }
    let area = pump.grid.cell_area();
    let cells = pump.grid.field.len();
    let conj_signal = matches!(kind, ProcessKind::Pdc);

    let mut twm = Complex64::new(0.0, 0.0);
    let mut xpm_s = Complex64::new(0.0, 0.0);
    let mut xpm_i = Complex64::new(0.0, 0.0);
    let mut spm = Complex64::new(0.0, 0.0);
    for c in 0..cells {
        let ds = signal.grid.field[c].map(|v| if conj_signal { v.conj() } else { v });
        let di = idler.grid.field[c].map(|v| v.conj());
        let dp = pump.grid.field[c];
        let (ns2, ni2, np2) = (
            signal.grid.index[c].powi(2),
            idler.grid.index[c].powi(2),
            pump.grid.index[c].powi(2),
        );
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let chi = chi2.0[9 * j + 3 * k + l];
                    if chi != 0.0 {
                        acc += ds[j] * di[k] * dp[l] * chi;
                    }
                }
            }
        }
        twm += acc / (ns2 * ni2 * np2);
        let four = |a: &[Complex64; 3], b: &[Complex64; 3]| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        for m in 0..3 {
                            let chi = chi3.0[27 * j + 9 * k + 3 * l + m];
                            if chi != 0.0 {
                                acc += dp[j].conj() * a[k].conj() * dp[l] * b[m] * chi;
                            }
                        }
                    }
                }
            }
            acc
        };
        spm += four(&dp, &dp) / np2.powi(4);
        let s = signal.grid.field[c];
        let i = idler.grid.field[c];
        xpm_s += four(&s, &s) / (np2 * np2 * ns2 * ns2);
        xpm_i += four(&i, &i) / (np2 * np2 * ni2 * ni2);
    }
    let (ws, wi, wp) = (signal.frequency, idler.frequency, pump.frequency);
    let (vs, vi, vp) = (signal.group_velocity, idler.group_velocity, pump.group_velocity);
    let twm_prefactor = (ws * wi / (2.0 * vp * vs * vi)).sqrt() / EPSILON_0.powi(2);
    let spm_prefactor = 3.0 / (EPSILON_0.powi(3) * HBAR) * (HBAR * wp / 2.0).powi(2);
    let xpm_prefactor = |w: f64, v: f64| 1.5 / EPSILON_0.powi(3) * w / (vp * v);
    let out = InteractionCoefficients {
        twm: twm * area * twm_prefactor,
        xpm_signal: xpm_s * area * xpm_prefactor(ws, vs),
        xpm_idler: xpm_i * area * xpm_prefactor(wi, vi),
        spm: spm * area * spm_prefactor,
    };
    if !out.is_finite() {
        return Err(Error::Numeric("interaction coefficients".into()));
    }
    Ok(out)
}
