//! Large-scale fading (three-slope path loss with conditional log-normal
//! shadowing), Rayleigh small-scale fading and the scaled CSI split.

use std::collections::HashSet;
use std::io::Write;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::topology::NetworkLayout;

/// Parameters of the three-slope path-loss model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LargeScaleParams {
    /// Carrier frequency in MHz.
    pub carrier_freq_mhz: f64,
    /// AP antenna height in meters.
    pub ap_height_m: f64,
    /// User antenna height in meters.
    pub user_height_m: f64,
    /// Inner break distance in meters.
    pub d0_m: f64,
    /// Outer break distance in meters; shadowing applies beyond it.
    pub d1_m: f64,
    /// Shadowing standard deviation in dB.
    pub shadowing_std_db: f64,
}

impl Default for LargeScaleParams {
    fn default() -> Self {
        Self {
            carrier_freq_mhz: 1900.0,
            ap_height_m: 15.0,
            user_height_m: 1.5,
            d0_m: 10.0,
            d1_m: 50.0,
            shadowing_std_db: 8.0,
        }
    }
}

impl LargeScaleParams {
    pub fn validate(&self) -> Result<()> {
        let all_positive = [
            self.carrier_freq_mhz,
            self.ap_height_m,
            self.user_height_m,
            self.d0_m,
            self.d1_m,
            self.shadowing_std_db,
        ]
        .iter()
        .all(|v| *v > 0.0 && v.is_finite());
        if !all_positive {
            return Err(Error::Config(format!("large-scale parameters must be positive: {self:?}")));
        }
        if self.d0_m >= self.d1_m {
            return Err(Error::Config(format!(
                "break distances must satisfy d0 < d1 (got {} and {})",
                self.d0_m, self.d1_m
            )));
        }
        Ok(())
    }
}

/// The frequency/height dependent attenuation constant `D` in dB.
pub fn attenuation_constant(params: &LargeScaleParams) -> Result<f64> {
    params.validate()?;
    let lf = params.carrier_freq_mhz.log10();
    Ok(46.3 + 33.9 * lf - 13.82 * params.ap_height_m.log10()
        - (1.11 * lf - 0.7) * params.user_height_m
        + 1.56 * lf
        - 0.8)
}

/// Three-slope path loss in dB (a negative number) at distance `d` meters.
pub fn pathloss_db(d: f64, attenuation_db: f64, params: &LargeScaleParams) -> f64 {
    let (d0, d1) = (params.d0_m, params.d1_m);
    if d > d1 {
        -attenuation_db - 35.0 * d.log10()
    } else if d > d0 {
        -attenuation_db - 10.0 * (d1.powf(1.5) * d * d).log10()
    } else {
        -attenuation_db - 10.0 * (d1.powf(1.5) * d0 * d0).log10()
    }
}

/// Linear-scale large-scale coefficients `β` (M×K). Shadowing draws
/// `z ~ N(0,1)` are taken for every pair in row-major order but only applied
/// when the AP–user distance exceeds `d1`.
pub fn large_scale_matrix(
    layout: &NetworkLayout,
    params: &LargeScaleParams,
    seed: u64,
) -> Result<DMatrix<f64>> {
    let att = attenuation_constant(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (m, k) = (layout.ap_count(), layout.user_count());
    let mut beta = DMatrix::zeros(m, k);
    for (mi, ap) in layout.ap_positions.iter().enumerate() {
        for (ki, user) in layout.user_positions.iter().enumerate() {
            let z: f64 = StandardNormal.sample(&mut rng);
            let d = ap.distance(user);
            let shadow_db = if d > params.d1_m {
                params.shadowing_std_db * z
            } else {
                0.0
            };
            beta[(mi, ki)] = 10f64.powf((pathloss_db(d, att, params) + shadow_db) / 10.0);
        }
    }
    Ok(beta)
}

/// Linear gain of the unshadowed path loss at `distance_m`; used to put the
/// large-scale coefficients on a normalized scale.
pub fn reference_gain(params: &LargeScaleParams, distance_m: f64) -> Result<f64> {
    let att = attenuation_constant(params)?;
    Ok(10f64.powf(pathloss_db(distance_m, att, params) / 10.0))
}

/// Small-scale Rayleigh fading on top of `β`: `g = √β · h`, `h ~ CN(0,1)`.
pub fn draw_channel(beta: &DMatrix<f64>, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    // Column-major fill order keeps draws aligned with storage.
    CMatrix::from_fn(beta.nrows(), beta.ncols(), |i, j| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re * scale, im * scale) * beta[(i, j)].sqrt()
    })
}

/// True channel together with its estimate and estimation error.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub g: CMatrix,
    pub g_hat: CMatrix,
    pub g_tilde: CMatrix,
    pub gamma: f64,
    pub alpha: f64,
}

/// Scaled CSI model: `Ĝ = γG`, `G̃ = αG` with `α = √(1 − γ²)`.
pub fn split_csi(g: &CMatrix, gamma: f64) -> Result<ChannelRealization> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Config(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    let alpha = (1.0 - gamma * gamma).max(0.0).sqrt();
    Ok(ChannelRealization {
        g: g.clone(),
        g_hat: g * C64::new(gamma, 0.0),
        g_tilde: g * C64::new(alpha, 0.0),
        gamma,
        alpha,
    })
}

fn check_indices(kind: &str, idx: &[usize], bound: usize) -> Result<()> {
    let mut seen = HashSet::with_capacity(idx.len());
    for &i in idx {
        if i >= bound {
            return Err(Error::Usage(format!("{kind} index {i} out of range (< {bound})")));
        }
        if !seen.insert(i) {
            return Err(Error::Usage(format!("duplicate {kind} index {i}")));
        }
    }
    Ok(())
}

/// Submatrix with rows `ap_indices` and columns `user_indices`, in the given
/// order.
pub fn subchannel(g: &CMatrix, ap_indices: &[usize], user_indices: &[usize]) -> Result<CMatrix> {
    check_indices("AP", ap_indices, g.nrows())?;
    check_indices("user", user_indices, g.ncols())?;
    Ok(CMatrix::from_fn(ap_indices.len(), user_indices.len(), |i, j| {
        g[(ap_indices[i], user_indices[j])]
    }))
}

/// Dumps a real matrix as CSV, one row per AP.
pub fn write_real_matrix_csv<W: Write>(m: &DMatrix<f64>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record((0..m.ncols()).map(|k| format!("user{k}")))?;
    for r in 0..m.nrows() {
        w.write_record(m.row(r).iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Dumps a complex matrix as CSV with real and imaginary parts interleaved.
pub fn write_complex_matrix_csv<W: Write>(m: &CMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record((0..m.ncols()).flat_map(|k| [format!("re{k}"), format!("im{k}")]))?;
    for r in 0..m.nrows() {
        w.write_record(m.row(r).iter().flat_map(|v| [v.re.to_string(), v.im.to_string()]))?;
    }
    w.flush()?;
    Ok(())
}
