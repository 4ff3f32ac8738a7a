//! Normalized linear precoders with equal power loading.
//!
//! Weights are computed from the channel estimate of the scheduled users
//! (`M_c × n`, columns in schedule order). The transmit matrix is
//! `P = W·D` with unit-norm columns in `W` and `D = diag(√p_i)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_inverse, transpose_gram, CMatrix, C64};

/// Columns whose norm falls below this are treated as zero.
const ZERO_COLUMN: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PrecoderKind {
    #[default]
    Mmse,
    Zf,
}

impl std::fmt::Display for PrecoderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PrecoderKind::Mmse => "mmse",
            PrecoderKind::Zf => "zf",
        })
    }
}

/// Column-normalized weight matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    pub matrix: CMatrix,
    /// Columns forced to zero because the user's channel vanished.
    pub zero_columns: Vec<usize>,
}

/// Scales every column to unit norm; zero columns stay zero and are reported.
pub fn normalize_columns(mut w: CMatrix) -> Weights {
    let mut zero_columns = Vec::new();
    for (j, mut col) in w.column_iter_mut().enumerate() {
        let norm = col.norm();
        if norm > ZERO_COLUMN && norm.is_finite() {
            col /= C64::new(norm, 0.0);
        } else {
            col.fill(C64::new(0.0, 0.0));
            zero_columns.push(j);
        }
    }
    if !zero_columns.is_empty() {
        log::warn!("zero channel columns {zero_columns:?}: precoder columns set to zero");
    }
    Weights {
        matrix: w,
        zero_columns,
    }
}

fn regularized_weights(h_hat: &CMatrix, reg: f64) -> Option<CMatrix> {
    let n = h_hat.ncols();
    let gram = transpose_gram(h_hat, h_hat) + CMatrix::identity(n, n) * C64::new(reg, 0.0);
    let inv = hermitian_inverse(&gram)?;
    Some(h_hat.conjugate() * inv)
}

/// Normalized MMSE (regularized ZF) weights
/// `normalize(conj(H)·(Hᵀ·conj(H) + (n·σ²/ρ)·I)⁻¹)`.
pub fn mmse_weights(h_hat: &CMatrix, rho_f: f64, sigma_w2: f64) -> Result<Weights> {
    if h_hat.nrows() == 0 || h_hat.ncols() == 0 {
        return Err(Error::Usage(format!(
            "MMSE weights need a non-empty channel, got {}x{}",
            h_hat.nrows(),
            h_hat.ncols()
        )));
    }
    if !(rho_f > 0.0) || !(sigma_w2 > 0.0) {
        return Err(Error::Config(format!(
            "transmit power and noise variance must be positive (rho_f={rho_f}, sigma_w2={sigma_w2})"
        )));
    }
    let reg = h_hat.ncols() as f64 * sigma_w2 / rho_f;
    let w = regularized_weights(h_hat, reg).ok_or_else(|| {
        Error::Numeric(format!("regularized Gram matrix not positive definite (reg={reg:e})"))
    })?;
    Ok(normalize_columns(w))
}

/// Unnormalized ZF weights `conj(H)·(Hᵀ·conj(H))⁻¹`, for which `Hᵀ·W = I`.
pub fn zf_weights_unnormalized(h_hat: &CMatrix) -> Result<CMatrix> {
    let (m, n) = h_hat.shape();
    if n == 0 || n > m {
        return Err(Error::Precoding(format!(
            "ZF needs 1 <= n <= M_c scheduled users (n={n}, M_c={m})"
        )));
    }
    regularized_weights(h_hat, 0.0).ok_or_else(|| {
        Error::Precoding(format!(
            "rank-deficient Gram matrix for {n} users on {m} APs; reschedule or drop users"
        ))
    })
}

/// Normalized ZF weights.
pub fn zf_weights(h_hat: &CMatrix) -> Result<Weights> {
    Ok(normalize_columns(zf_weights_unnormalized(h_hat)?))
}

pub fn weights(kind: PrecoderKind, h_hat: &CMatrix, rho_f: f64, sigma_w2: f64) -> Result<Weights> {
    match kind {
        PrecoderKind::Mmse => mmse_weights(h_hat, rho_f, sigma_w2),
        PrecoderKind::Zf => zf_weights(h_hat),
    }
}

/// Diagonal power loading, stored as the amplitudes `√p_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLoading {
    pub amplitudes: Vec<f64>,
}

impl PowerLoading {
    pub fn total_power(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum()
    }

    pub fn to_matrix(&self) -> CMatrix {
        let n = self.amplitudes.len();
        CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(self.amplitudes[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }
}

/// Equal split of `p_total` over `n` streams.
pub fn equal_power(n: usize, p_total: f64) -> Result<PowerLoading> {
    if n == 0 || !(p_total > 0.0) {
        return Err(Error::Usage(format!(
            "equal power loading needs n >= 1 and P > 0 (n={n}, P={p_total})"
        )));
    }
    Ok(PowerLoading {
        amplitudes: vec![(p_total / n as f64).sqrt(); n],
    })
}

/// Transmit precoder `P = W·D` under a total power cap.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    pub weights: CMatrix,
    pub power: PowerLoading,
    pub matrix: CMatrix,
    pub power_cap: f64,
}

impl Precoder {
    /// `‖P‖²_F`.
    pub fn transmit_power(&self) -> f64 {
        self.matrix.norm_squared()
    }

    /// Precoder that transmits nothing on `m` APs.
    pub fn silent(m: usize) -> Self {
        Self {
            weights: CMatrix::zeros(m, 0),
            power: PowerLoading { amplitudes: vec![] },
            matrix: CMatrix::zeros(m, 0),
            power_cap: 0.0,
        }
    }
}

/// Forms `P = W·D` and checks the unit-column and power-cap invariants.
pub fn assemble(weights: &CMatrix, power: &PowerLoading, power_cap: f64) -> Result<Precoder> {
    if weights.ncols() != power.amplitudes.len() {
        return Err(Error::Usage(format!(
            "weights have {} columns but power loading has {} entries",
            weights.ncols(),
            power.amplitudes.len()
        )));
    }
    if power.amplitudes.iter().any(|a| !(*a >= 0.0)) {
        return Err(Error::Precoding("power amplitudes must be nonnegative".into()));
    }
    for (j, col) in weights.column_iter().enumerate() {
        let norm = col.norm();
        if norm != 0.0 && (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Precoding(format!("weight column {j} has norm {norm}, expected 1")));
        }
    }
    let mut matrix = weights.clone();
    for (mut col, a) in matrix.column_iter_mut().zip(&power.amplitudes) {
        col *= C64::new(*a, 0.0);
    }
    let p = matrix.norm_squared();
    if p > power_cap * (1.0 + 1e-9) + 1e-12 {
        return Err(Error::Precoding(format!(
            "precoder power {p} exceeds the cap {power_cap}"
        )));
    }
    Ok(Precoder {
        weights: weights.clone(),
        power: power.clone(),
        matrix,
        power_cap,
    })
}

/// Weights plus equal power loading at the full cap, in one step.
pub fn equal_power_precoder(
    kind: PrecoderKind,
    h_hat: &CMatrix,
    rho_f: f64,
    sigma_w2: f64,
    p_total: f64,
) -> Result<Precoder> {
    let w = weights(kind, h_hat, rho_f, sigma_w2)?;
    let d = equal_power(h_hat.ncols(), p_total)?;
    assemble(&w.matrix, &d, p_total)
}
