//! Small dense complex linear-algebra helpers.
//!
//! Matrices are `nalgebra` column-major `DMatrix<Complex64>`. The Hermitian
//! factorizations below work directly on the column-major storage so the
//! scheduling hot path can reuse buffers.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// `a^T · conj(b)`.
pub fn transpose_gram(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.tr_mul(&b.conjugate())
}

/// `aᵀ·P·Pᴴ·a*`, the covariance a precoder `p` induces through channel `a`.
pub fn induced_covariance(a: &CMatrix, p: &CMatrix) -> CMatrix {
    let t = a.tr_mul(p);
    &t * t.adjoint()
}

/// In-place lower Cholesky factorization of a Hermitian matrix stored
/// column-major in `a` (only the lower triangle is read). Returns the natural
/// log-determinant, or `None` if the matrix is not numerically positive
/// definite.
pub fn cholesky_in_place(a: &mut [C64], n: usize) -> Option<f64> {
    debug_assert_eq!(a.len(), n * n);
    let mut logdet = 0.0;
    for j in 0..n {
        let d = a[j * n + j].re;
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let ljj = d.sqrt();
        logdet += 2.0 * ljj.ln();
        a[j * n + j] = C64::new(ljj, 0.0);
        let inv = 1.0 / ljj;
        for i in (j + 1)..n {
            a[j * n + i] *= inv;
        }
        // Right-looking update of the trailing lower triangle.
        for k in (j + 1)..n {
            let lkj = a[j * n + k].conj();
            if lkj == C64::new(0.0, 0.0) {
                continue;
            }
            let (head, tail) = a.split_at_mut(k * n);
            let col_j = &head[j * n..j * n + n];
            let col_k = &mut tail[..n];
            for i in k..n {
                col_k[i] -= col_j[i] * lkj;
            }
        }
    }
    Some(logdet)
}

/// Natural log-determinant of a Hermitian positive-definite matrix.
pub fn hermitian_logdet(m: &CMatrix) -> Option<f64> {
    assert_eq!(m.nrows(), m.ncols(), "log-det of a non-square matrix");
    let n = m.nrows();
    let mut buf = m.as_slice().to_vec();
    cholesky_in_place(&mut buf, n)
}

/// Inverse of a Hermitian positive-definite matrix from its Cholesky factor
/// (stored in the lower triangle of `l`). Writes the full Hermitian inverse
/// into `out`.
pub fn inverse_from_cholesky(l: &[C64], n: usize, out: &mut [C64]) {
    // Y = L^{-1}, lower triangular, built column by column into `out`.
    let zero = C64::new(0.0, 0.0);
    out.iter_mut().for_each(|v| *v = zero);
    let mut y = vec![zero; n * n];
    for c in 0..n {
        // Solve L · y_c = e_c by forward substitution; y_c[i] = 0 for i < c.
        y[c * n + c] = C64::new(1.0 / l[c * n + c].re, 0.0);
        for i in (c + 1)..n {
            let mut s = zero;
            for k in c..i {
                s += l[k * n + i] * y[c * n + k];
            }
            y[c * n + i] = -s / l[i * n + i].re;
        }
    }
    // Q = Yᴴ·Y, Q[i,j] = Σ_k conj(Y[k,i]) · Y[k,j], k ≥ max(i,j).
    for j in 0..n {
        for i in 0..=j {
            let mut s = zero;
            for k in j..n {
                s += y[i * n + k].conj() * y[j * n + k];
            }
            out[j * n + i] = s;
            out[i * n + j] = s.conj();
        }
    }
}

/// Inverse of a Hermitian positive-definite matrix.
pub fn hermitian_inverse(m: &CMatrix) -> Option<CMatrix> {
    let n = m.nrows();
    let mut l = m.as_slice().to_vec();
    cholesky_in_place(&mut l, n)?;
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    inverse_from_cholesky(&l, n, &mut out);
    Some(CMatrix::from_vec(n, n, out))
}

/// `log2 det(R + I)` for a general square complex matrix, through a partially
/// pivoted LU factorization. The log-determinant is accumulated from the
/// pivots, and the imaginary part must vanish to `1e-6` relative.
pub fn log2_det_identity_plus(r: &CMatrix) -> Result<f64> {
    if r.nrows() != r.ncols() {
        return Err(Error::Usage(format!(
            "expected a square matrix, got {}x{}",
            r.nrows(),
            r.ncols()
        )));
    }
    let n = r.nrows();
    let a = r + CMatrix::identity(n, n);
    let lu = a.clone().lu();
    let u = lu.u();
    let mut ln_abs = 0.0;
    let mut phase = C64::new(1.0, 0.0);
    for i in 0..n {
        let p = u[(i, i)];
        let mag = p.norm();
        if mag == 0.0 || !mag.is_finite() {
            return Err(Error::Numeric(format!(
                "det(R + I) is singular or non-finite (pivot {i} = {p}); condition estimate {:e}",
                condition_estimate(&a)
            )));
        }
        ln_abs += mag.ln();
        phase *= p / mag;
    }
    // The row permutation contributes a sign.
    if lu.p().determinant::<f64>() < 0.0 {
        phase = -phase;
    }
    if phase.re <= 0.0 || phase.im.abs() > 1e-6 {
        return Err(Error::Numeric(format!(
            "det(R + I) is not positive real (phase {phase}); condition estimate {:e}",
            condition_estimate(&a)
        )));
    }
    Ok(ln_abs / std::f64::consts::LN_2)
}

/// Ratio of the largest to the smallest singular value.
pub fn condition_estimate(a: &CMatrix) -> f64 {
    let sv = a.singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Gathers the principal submatrix `m[idx, idx]` into a column-major buffer.
pub(crate) fn gather_principal(m: &CMatrix, idx: &[usize], out: &mut Vec<C64>) {
    let l = idx.len();
    out.clear();
    out.reserve(l * l);
    for &cj in idx {
        for &ri in idx {
            out.push(m[(ri, cj)]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample_hpd() -> CMatrix {
        let b = CMatrix::from_fn(4, 4, |i, j| {
            C64::new((i as f64 + 1.0) * 0.3 - j as f64 * 0.1, (i * j) as f64 * 0.07 - 0.2)
        });
        &b * b.adjoint() + CMatrix::identity(4, 4) * C64::new(0.5, 0.0)
    }

    #[test]
    fn cholesky_logdet_matches_nalgebra() {
        let m = sample_hpd();
        let ours = hermitian_logdet(&m).unwrap();
        let theirs = m.clone().cholesky().unwrap().ln_determinant();
        assert_relative_eq!(ours, theirs, epsilon = 1e-12);
    }

    #[test]
    fn inverse_is_inverse() {
        let m = sample_hpd();
        let q = hermitian_inverse(&m).unwrap();
        let err = (&m * &q - CMatrix::identity(4, 4)).norm();
        assert!(err < 1e-12, "residual {err}");
    }

    #[test]
    fn indefinite_is_rejected() {
        let mut m = CMatrix::identity(2, 2);
        m[(1, 1)] = C64::new(-1.0, 0.0);
        assert!(hermitian_logdet(&m).is_none());
    }

    #[test]
    fn empty_matrix_has_zero_logdet() {
        assert_eq!(hermitian_logdet(&CMatrix::zeros(0, 0)), Some(0.0));
        assert_eq!(log2_det_identity_plus(&CMatrix::zeros(0, 0)).unwrap(), 0.0);
    }

    #[test]
    fn lu_log2det_matches_hermitian_route() {
        let m = sample_hpd();
        let lu = log2_det_identity_plus(&m).unwrap();
        let ch = hermitian_logdet(&(&m + CMatrix::identity(4, 4))).unwrap() / std::f64::consts::LN_2;
        assert_relative_eq!(lu, ch, epsilon = 1e-12);
    }
}
