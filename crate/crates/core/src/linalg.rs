//! Dense complex linear algebra helpers.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{CMatrix, Error, Result};

/// `a·b` through the blocked complex kernel of `matrixmultiply`.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "matmul dimension mismatch");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut c = CMatrix::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    // nalgebra storage is column-major: element (i, j) sits at i + j·rows.
    // Complex64 is #[repr(C)] {re, im}, the layout zgemm expects.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    c
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖a − b‖_F / ‖b‖_F`.
pub fn relative_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    frobenius(&(a - b)) / frobenius(b)
}

/// Largest absolute row sum.
pub fn norm_inf(a: &CMatrix) -> f64 {
    a.row_iter().map(|r| r.iter().map(|c| c.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `diag(I_n, −I_n)`.
pub fn symplectic_metric(n: usize) -> CMatrix {
    CMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if i != j {
            Complex64::new(0.0, 0.0)
        } else if i < n {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        }
    })
}

/// `exp(a)` by scaling and squaring with the Padé approximant of degree 3,
/// 5, 7, 9 or 13 chosen from the 1-norm (Higham 2005).
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    if a.iter().any(|c| !c.is_finite()) {
        return Err(Error::Numeric("matrix exponential argument".into()));
    }
    let n = a.nrows();
    let id = CMatrix::identity(n, n);
    let norm = norm_one(a);
    if norm == 0.0 {
        return Ok(id);
    }
    let lincomb = |terms: &[(f64, &CMatrix)]| -> CMatrix {
        let mut out = CMatrix::zeros(n, n);
        for (c, m) in terms {
            out.zip_apply(*m, |o, v| *o += v * *c);
        }
        out
    };
    let a2 = matmul(a, a);
    for (theta, b) in [
        (1.495_585_217_958_292e-2, &PADE3[..]),
        (2.539_398_330_063_230e-1, &PADE5[..]),
        (9.504_178_996_162_932e-1, &PADE7[..]),
        (2.097_847_961_257_068, &PADE9[..]),
    ] {
        if norm <= theta {
            let mut powers = vec![id.clone(), a2.clone()];
            while powers.len() < b.len() / 2 {
                let next = matmul(powers.last().unwrap(), &a2);
                powers.push(next);
            }
            let odd: Vec<(f64, &CMatrix)> = powers.iter().enumerate().map(|(k, p)| (b[2 * k + 1], p)).collect();
            let even: Vec<(f64, &CMatrix)> = powers.iter().enumerate().map(|(k, p)| (b[2 * k], p)).collect();
            let u = matmul(a, &lincomb(&odd));
            let v = lincomb(&even);
            return solve(&(&v - &u), &(&v + &u));
        }
    }
    let theta13 = 5.371_920_351_148_152;
    let s = (norm / theta13).log2().ceil().max(0.0) as i32;
    let scale = Complex64::new(0.5f64.powi(s), 0.0);
    let a1 = a * scale;
    let a2 = matmul(&a1, &a1);
    let a4 = matmul(&a2, &a2);
    let a6 = matmul(&a4, &a2);
    let b = &PADE13;
    let u_inner = matmul(&a6, &lincomb(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)]));
    let u = matmul(&a1, &(u_inner + lincomb(&[(b[7], &a6), (b[5], &a4), (b[3], &a2), (b[1], &id)])));
    let v_inner = matmul(&a6, &lincomb(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)]));
    let v = v_inner + lincomb(&[(b[6], &a6), (b[4], &a4), (b[2], &a2), (b[0], &id)]);
    let mut r = solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..s {
        r = matmul(&r, &r);
    }
    Ok(r)
}

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Largest absolute column sum.
pub fn norm_one(a: &CMatrix) -> f64 {
    a.column_iter().map(|c| c.iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Singular value decomposition `m = u·diag(s)·vᵗ` with descending `s`.
///
/// Each column of `u` is rotated so that its first significant component is
/// real and positive; the matching row of `vᵗ` absorbs the opposite phase.
/// Equal singular values keep the order of their first differing `|u|`
/// component, largest first.
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    /// Transpose (not adjoint) of the right factor.
    pub v_t: CMatrix,
}

pub fn svd(m: &CMatrix) -> Result<Svd> {
    if m.iter().any(|c| !c.is_finite()) {
        return Err(Error::Numeric("SVD argument".into()));
    }
    let n = m.nrows().min(m.ncols());
    let dec = m.clone().try_svd(true, true, 1e-15, 10_000).ok_or_else(|| Error::Numeric("SVD did not converge".into()))?;
    let u = dec.u.ok_or_else(|| Error::Numeric("SVD left factor".into()))?;
    let v_adj = dec.v_t.ok_or_else(|| Error::Numeric("SVD right factor".into()))?;
    let s = dec.singular_values;

    let mut order: Vec<usize> = (0..n).collect();
    let scale = s.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    order.sort_by(|&a, &b| {
        let (sa, sb) = (s[a], s[b]);
        if (sa - sb).abs() > 1e-12 * scale {
            return sb.partial_cmp(&sa).unwrap();
        }
        for r in 0..u.nrows() {
            let (x, y) = (u[(r, a)].norm(), u[(r, b)].norm());
            if (x - y).abs() > 1e-12 {
                return y.partial_cmp(&x).unwrap();
            }
        }
        a.cmp(&b)
    });

    let mut u_out = CMatrix::zeros(u.nrows(), n);
    // Right factor W with m = U Σ W^T, i.e. W^T = (V^†) rows.
    let mut vt_out = CMatrix::zeros(n, v_adj.ncols());
    // Tie-broken vectors keep their order; values within a tie differ by at
    // most 1e-12 of the largest and are reported sorted.
    let mut values: Vec<f64> = order.iter().map(|&k| s[k]).collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    for (k, &src) in order.iter().enumerate() {
        let col = u.column(src);
        let peak = col.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let lead = col.iter().find(|c| c.norm() > 1e-8 * peak).copied().unwrap_or(Complex64::new(1.0, 0.0));
        let phase = if lead.norm() > 0.0 { lead.conj() / lead.norm() } else { Complex64::new(1.0, 0.0) };
        for r in 0..u.nrows() {
            u_out[(r, k)] = col[r] * phase;
        }
        for c in 0..v_adj.ncols() {
            vt_out[(k, c)] = v_adj[(src, c)] / phase;
        }
    }
    Ok(Svd { u: u_out, singular_values: values, v_t: vt_out })
}

/// Solves `a·x = b`.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    a.clone().lu().solve(b).ok_or_else(|| Error::Numeric("singular linear system".into()))
}

/// Real part helper for tests and exports.
pub fn to_real_imag(a: &CMatrix) -> (DMatrix<f64>, DMatrix<f64>) {
    (a.map(|c| c.re), a.map(|c| c.im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn random(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn matmul_matches_reference() {
        let a = random(7, 5, 1);
        let b = random(5, 9, 2);
        assert!(frobenius(&(matmul(&a, &b) - &a * &b)) < 1e-13);
    }

    #[test]
    fn exponential_of_zero_and_diagonal() {
        let z = CMatrix::zeros(6, 6);
        assert_eq!(expm(&z).unwrap(), CMatrix::identity(6, 6));
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(5, |k, _| Complex64::new(0.0, k as f64 * 0.7)));
        let e = expm(&d).unwrap();
        for k in 0..5 {
            assert!((e[(k, k)] - Complex64::from_polar(1.0, k as f64 * 0.7)).norm() < 1e-15);
        }
        let mut bad = z.clone();
        bad[(0, 0)] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(expm(&bad), Err(Error::Numeric(_))));
    }

    #[test]
    fn svd_reconstructs_with_convention() {
        let m = random(6, 6, 7);
        let d = svd(&m).unwrap();
        let sigma = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(6, d.singular_values.iter().map(|&s| Complex64::new(s, 0.0))));
        assert!(frobenius(&(&d.u * sigma * &d.v_t - &m)) < 1e-12);
        assert!(d.singular_values.windows(2).all(|w| w[0] >= w[1]));
        for k in 0..6 {
            let lead = d.u.column(k).iter().find(|c| c.norm() > 1e-8).copied().unwrap();
            assert!(lead.im.abs() < 1e-14 && lead.re > 0.0);
        }
    }

    #[test]
    fn exponential_matches_library_reference() {
        for (k, scale) in [1e-3, 0.1, 0.9, 2.0, 7.0, 60.0].iter().enumerate() {
            let a = random(12, 12, 40 + k as u64) * Complex64::new(*scale, 0.0);
            let ours = expm(&a).unwrap();
            let reference = a.exp();
            assert!(relative_distance(&ours, &reference) < 1e-12, "scale {scale}");
        }
    }

    proptest! {
        #[test]
        fn exponential_of_hermitian_is_unitary(seed in any::<u64>(), scale in 0.01f64..20.0) {
            let a = random(8, 8, seed);
            let h = (&a + a.adjoint()) * Complex64::new(0.5 * scale, 0.0);
            let u = expm(&(h * Complex64::new(0.0, 1.0))).unwrap();
            let err = frobenius(&(u.adjoint() * &u - CMatrix::identity(8, 8)));
            prop_assert!(err < 1e-12, "{}", err);
        }
    }
}
