//! Globally adaptive Gauss–Kronrod (7/15) quadrature for vector-valued
//! complex integrands.

use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Absolute and relative tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub absolute: f64,
    pub relative: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { absolute: 1e-8, relative: 1e-6, max_intervals: 4000 }
    }
}

struct Interval {
    a: f64,
    b: f64,
    value: Vec<Complex64>,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn norm_inf(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn kronrod<F>(f: &mut F, dim: usize, a: f64, b: f64, buf: &mut [Complex64]) -> Interval
where
    F: FnMut(f64, &mut [Complex64]),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut k15 = vec![Complex64::new(0.0, 0.0); dim];
    let mut g7 = vec![Complex64::new(0.0, 0.0); dim];
    f(center, buf);
    for d in 0..dim {
        k15[d] += buf[d] * WGK[7];
        g7[d] += buf[d] * WG[3];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        for x in [center - dx, center + dx] {
            f(x, buf);
            for d in 0..dim {
                k15[d] += buf[d] * WGK[j];
                if j % 2 == 1 {
                    g7[d] += buf[d] * WG[j / 2];
                }
            }
        }
    }
    let mut error: f64 = 0.0;
    for d in 0..dim {
        k15[d] *= half;
        g7[d] *= half;
        error = error.max((k15[d] - g7[d]).norm());
    }
    Interval { a, b, value: k15, error }
}

/// Integrates `f` over the partition given by `breaks` (sorted, ≥ 2 entries).
///
/// `f(x, out)` writes the `dim` integrand components at `x` into `out`.
/// Convergence is declared when the summed error estimate is below
/// `max(absolute, relative·‖I‖∞)`.
pub fn integrate<F>(mut f: F, dim: usize, breaks: &[f64], tol: Tolerance) -> Result<Vec<Complex64>>
where
    F: FnMut(f64, &mut [Complex64]),
{
    assert!(breaks.len() >= 2, "need at least one interval");
    let mut buf = vec![Complex64::new(0.0, 0.0); dim];
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod(&mut f, dim, w[0], w[1], &mut buf));
        }
    }
    loop {
        let mut total = vec![Complex64::new(0.0, 0.0); dim];
        let mut error = 0.0;
        for iv in heap.iter() {
            for d in 0..dim {
                total[d] += iv.value[d];
            }
            error += iv.error;
        }
        let scale = norm_inf(&total);
        if error <= tol.absolute.max(tol.relative * scale) {
            return Ok(total);
        }
        if heap.len() >= tol.max_intervals {
            let estimate = if scale > 0.0 { error / scale } else { f64::INFINITY };
            return Err(Error::Quadrature { estimate });
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            let estimate = if scale > 0.0 { error / scale } else { f64::INFINITY };
            return Err(Error::Quadrature { estimate });
        }
        heap.push(kronrod(&mut f, dim, worst.a, mid, &mut buf));
        heap.push(kronrod(&mut f, dim, mid, worst.b, &mut buf));
    }
}

/// Scalar convenience wrapper over [`integrate`].
pub fn integrate_scalar<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Complex64>
where
    F: FnMut(f64) -> Complex64,
{
    let v = integrate(|x, out| out[0] = f(x), 1, &[a, b], tol)?;
    Ok(v[0])
}
