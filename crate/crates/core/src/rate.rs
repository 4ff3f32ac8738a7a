//! Sum-rate upper bounds with imperfect CSI.
//!
//! Network-wide (CF):
//! `R = ρĜᵀPPᴴĜ*·(ρG̃ᵀPPᴴG̃* + σ²I)⁻¹`, rate `log2 det(R + I)`.
//!
//! Clustered (CLCF): each cluster treats its own estimation error and every
//! other cluster's transmission as noise,
//! `R_c = ρG̃_ccᵀP_cP_cᴴG̃_cc* + Σ_{i≠c} ρ(Ĝ_icᵀP_iP_iᴴĜ_ic* + G̃_icᵀP_iP_iᴴG̃_ic*) + σ²I`,
//! rate `log2 det(ρĜ_ccᵀP_cP_cᴴĜ_cc*·R_c⁻¹ + I)`.
//!
//! Identity dimensions follow the number of scheduled users. Since
//! `det(S·B⁻¹ + I) = det(S + B) / det(B)` with both `S + B` and `B` Hermitian
//! positive definite, the production path evaluates two Cholesky log-dets.
//! [`cf_sumrate`] keeps the literal `log2 det(R + I)` form for an explicit `R`.

use std::f64::consts::LN_2;

use crate::channel::{subchannel, ChannelRealization};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_logdet, induced_covariance, log2_det_identity_plus, CMatrix, C64};
use crate::topology::ClusterPartition;

fn check_noise(sigma_w2: f64) -> Result<()> {
    if !(sigma_w2 > 0.0) || !sigma_w2.is_finite() {
        return Err(Error::Config(format!("noise variance must be positive, got {sigma_w2}")));
    }
    Ok(())
}

fn check_link(what: &str, g: &CMatrix, p: &CMatrix) -> Result<()> {
    if g.nrows() != p.nrows() {
        return Err(Error::Usage(format!(
            "{what}: channel has {} AP rows but precoder has {}",
            g.nrows(),
            p.nrows()
        )));
    }
    Ok(())
}

fn scaled(m: CMatrix, s: f64) -> CMatrix {
    m * C64::new(s, 0.0)
}

fn noise(n: usize, sigma_w2: f64) -> CMatrix {
    CMatrix::identity(n, n) * C64::new(sigma_w2, 0.0)
}

/// `log2 det(S + B) − log2 det(B)` for Hermitian `S ⪰ 0`, `B ≻ 0`.
pub fn log2_det_ratio(signal: &CMatrix, interference: &CMatrix) -> Result<f64> {
    let total = signal + interference;
    let num = hermitian_logdet(&total);
    let den = hermitian_logdet(interference);
    match (num, den) {
        (Some(a), Some(b)) => {
            let r = (a - b) / LN_2;
            if !r.is_finite() {
                return Err(Error::Numeric(format!("non-finite rate {r}")));
            }
            Ok(r.max(0.0))
        }
        _ => Err(Error::Numeric(format!(
            "covariance is not positive definite; condition estimate {:e}",
            crate::linalg::condition_estimate(interference)
        ))),
    }
}

/// Error-plus-noise covariance `ρG̃ᵀPPᴴG̃* + σ²I` of the network-wide system.
pub fn cf_error_covariance(
    g_tilde: &CMatrix,
    p: &CMatrix,
    rho_f: f64,
    sigma_w2: f64,
) -> Result<CMatrix> {
    check_noise(sigma_w2)?;
    check_link("error channel", g_tilde, p)?;
    let n = g_tilde.ncols();
    Ok(scaled(induced_covariance(g_tilde, p), rho_f) + noise(n, sigma_w2))
}

/// The matrix `R` of the network-wide rate bound (not Hermitian in general).
pub fn cf_covariance(
    g_hat: &CMatrix,
    g_tilde: &CMatrix,
    p: &CMatrix,
    rho_f: f64,
    sigma_w2: f64,
) -> Result<CMatrix> {
    check_link("estimated channel", g_hat, p)?;
    if g_hat.shape() != g_tilde.shape() {
        return Err(Error::Usage("estimate and error matrices differ in shape".into()));
    }
    let b = cf_error_covariance(g_tilde, p, rho_f, sigma_w2)?;
    let b_inv = crate::linalg::hermitian_inverse(&b)
        .ok_or_else(|| Error::Numeric("error-plus-noise covariance is singular".into()))?;
    Ok(scaled(induced_covariance(g_hat, p), rho_f) * b_inv)
}

/// `log2 det(R + I)`.
pub fn cf_sumrate(r: &CMatrix) -> Result<f64> {
    log2_det_identity_plus(r).map(|v| v.max(0.0))
}

/// Network-wide rate bound evaluated through the Hermitian factorization.
pub fn cf_rate(
    g_hat: &CMatrix,
    g_tilde: &CMatrix,
    p: &CMatrix,
    rho_f: f64,
    sigma_w2: f64,
) -> Result<f64> {
    check_link("estimated channel", g_hat, p)?;
    let b = cf_error_covariance(g_tilde, p, rho_f, sigma_w2)?;
    let s = scaled(induced_covariance(g_hat, p), rho_f);
    log2_det_ratio(&s, &b)
}

/// Estimate and error from one set of APs to one set of users.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub g_hat: CMatrix,
    pub g_tilde: CMatrix,
}

/// Everything the clustered rate needs for one trial: every cluster's
/// precoder and every cluster-to-cluster link restricted to scheduled users.
#[derive(Debug, Clone)]
pub struct ClusteredInputs {
    pub rho_f: f64,
    pub sigma_w2: f64,
    /// `precoders[i]` is `M_i × n_i`.
    pub precoders: Vec<CMatrix>,
    /// `links[i][c]` runs from the APs of cluster `i` to the scheduled users of
    /// cluster `c` (`M_i × n_c`).
    pub links: Vec<Vec<Link>>,
}

impl ClusteredInputs {
    /// Gathers the links for scheduled users `schedules[c]` (global user
    /// indices) from a channel realization.
    pub fn from_realization(
        realization: &ChannelRealization,
        partition: &ClusterPartition,
        schedules: &[Vec<usize>],
        precoders: Vec<CMatrix>,
        rho_f: f64,
        sigma_w2: f64,
    ) -> Result<Self> {
        let c_count = partition.cluster_count;
        if schedules.len() != c_count || precoders.len() != c_count {
            return Err(Error::Usage(format!(
                "expected {c_count} schedules and precoders, got {} and {}",
                schedules.len(),
                precoders.len()
            )));
        }
        let aps: Vec<Vec<usize>> = (0..c_count).map(|c| partition.aps_of(c)).collect();
        let mut links = Vec::with_capacity(c_count);
        for ap_set in &aps {
            let mut row = Vec::with_capacity(c_count);
            for users in schedules {
                row.push(Link {
                    g_hat: subchannel(&realization.g_hat, ap_set, users)?,
                    g_tilde: subchannel(&realization.g_tilde, ap_set, users)?,
                });
            }
            links.push(row);
        }
        let inputs = Self {
            rho_f,
            sigma_w2,
            precoders,
            links,
        };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn cluster_count(&self) -> usize {
        self.precoders.len()
    }

    pub fn validate(&self) -> Result<()> {
        check_noise(self.sigma_w2)?;
        let c_count = self.cluster_count();
        if self.links.len() != c_count || self.links.iter().any(|r| r.len() != c_count) {
            return Err(Error::Usage(format!("links must form a {c_count}x{c_count} grid")));
        }
        for (i, row) in self.links.iter().enumerate() {
            for (c, link) in row.iter().enumerate() {
                let p_i = &self.precoders[i];
                if link.g_hat.shape() != link.g_tilde.shape() {
                    return Err(Error::Usage(format!("link {i}->{c}: estimate/error shapes differ")));
                }
                if link.g_hat.nrows() != p_i.nrows() {
                    return Err(Error::Usage(format!(
                        "link {i}->{c} has {} AP rows but P_{i} has {}",
                        link.g_hat.nrows(),
                        p_i.nrows()
                    )));
                }
                if link.g_hat.ncols() != self.precoders[c].ncols() {
                    return Err(Error::Usage(format!(
                        "link {i}->{c} has {} user columns but cluster {c} schedules {}",
                        link.g_hat.ncols(),
                        self.precoders[c].ncols()
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_cluster(&self, c: usize) -> Result<()> {
        if c >= self.cluster_count() {
            return Err(Error::Usage(format!(
                "cluster {c} out of range ({} clusters)",
                self.cluster_count()
            )));
        }
        self.validate()
    }

    /// Desired-signal covariance `ρĜ_ccᵀP_cP_cᴴĜ_cc*`.
    pub fn signal_covariance(&self, c: usize) -> Result<CMatrix> {
        self.check_cluster(c)?;
        Ok(scaled(induced_covariance(&self.links[c][c].g_hat, &self.precoders[c]), self.rho_f))
    }
}

/// Interference-plus-noise covariance `R_c` of cluster `c`.
pub fn cluster_covariance(inputs: &ClusteredInputs, c: usize) -> Result<CMatrix> {
    inputs.check_cluster(c)?;
    let n_c = inputs.precoders[c].ncols();
    let mut r = scaled(
        induced_covariance(&inputs.links[c][c].g_tilde, &inputs.precoders[c]),
        inputs.rho_f,
    );
    for (i, p_i) in inputs.precoders.iter().enumerate() {
        if i == c || p_i.ncols() == 0 {
            continue;
        }
        let link = &inputs.links[i][c];
        r += scaled(induced_covariance(&link.g_hat, p_i), inputs.rho_f);
        r += scaled(induced_covariance(&link.g_tilde, p_i), inputs.rho_f);
    }
    Ok(r + noise(n_c, inputs.sigma_w2))
}

/// Rate bound of cluster `c`.
pub fn cluster_rate(inputs: &ClusteredInputs, c: usize) -> Result<f64> {
    let r_c = cluster_covariance(inputs, c)?;
    let s = inputs.signal_covariance(c)?;
    log2_det_ratio(&s, &r_c)
}

/// Same bound written literally as `log2 det(S·R_c⁻¹ + I)`.
pub fn cluster_rate_literal(inputs: &ClusteredInputs, c: usize) -> Result<f64> {
    let r_c = cluster_covariance(inputs, c)?;
    let s = inputs.signal_covariance(c)?;
    let inv = crate::linalg::hermitian_inverse(&r_c)
        .ok_or_else(|| Error::Numeric("cluster covariance is singular".into()))?;
    cf_sumrate(&(s * inv))
}

/// Sum-rate of a network, with per-cluster rates for clustered runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RateResult {
    pub sum_rate: f64,
    pub per_cluster: Option<Vec<f64>>,
}

/// Sum of the cluster rates.
pub fn network_rate(inputs: &ClusteredInputs) -> Result<RateResult> {
    let per: Vec<f64> = (0..inputs.cluster_count())
        .map(|c| cluster_rate(inputs, c))
        .collect::<Result<_>>()?;
    Ok(RateResult {
        sum_rate: per.iter().sum(),
        per_cluster: Some(per),
    })
}
