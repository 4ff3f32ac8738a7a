//! Closed-form scheduling cost: FLOP polynomials for one cluster and for the
//! network-wide system, and channel-parameter signaling counts.
//!
//! The polynomials are evaluated exactly in 128-bit integers (the `7/2`
//! terms always combine to whole numbers). They go negative when `K_c` is
//! small relative to `M_c`; such values are returned as-is with a warning.

use std::io::Write;

use crate::error::{Error, Result};

/// FLOPs quoted for C-ESG, greedy, WSR and exhaustive search at
/// `M = 64, K = 16, C = 4, n = 8`.
pub const TABLE_FLOPS: [(&str, i128); 4] = [
    ("cesg", 70_728),
    ("greedy", 37_432),
    ("wsr", 52_864),
    ("exhaustive", 221_472),
];

/// FLOP count of C-ESG in one cluster with `m` APs and `k` users.
pub fn flops_cluster(m: u64, k: u64) -> i128 {
    let (m, k) = (m as i128, k as i128);
    let twice = 2 * (16 * k.pow(4) + 16 * (m + 1) * k.pow(3)
        + 2 * (-16 * m * m + 16 * m + 1) * k * k
        + (4 * m + 6) * k
        + 3)
        - 7 * m * m
        - 7 * m;
    let v = twice / 2;
    if v < 0 {
        log::warn!("cluster FLOP polynomial is negative ({v}) at M_c={m}, K_c={k}");
    }
    v
}

/// FLOP count of C-ESG over the whole network.
pub fn flops_cf(m: u64, k: u64) -> i128 {
    let (m, k) = (m as i128, k as i128);
    let twice = 2 * (6 * k.pow(4) + (2 * m + 6) * k.pow(3)
        + 2 * (-4 * m * m + 4 * m + 1) * k * k
        + (4 * m + 2) * k
        - 1)
        - 7 * m * m
        + m;
    let v = twice / 2;
    if v < 0 {
        log::warn!("network FLOP polynomial is negative ({v}) at M={m}, K={k}");
    }
    v
}

/// Channel parameters exchanged for `m` APs and `k` users (three per link).
pub fn signaling(m: u64, k: u64) -> u128 {
    3 * m as u128 * k as u128
}

/// Splits `total` into `parts` near-equal shares, larger shares first.
pub fn equal_split(total: usize, parts: usize) -> Vec<usize> {
    (0..parts)
        .map(|i| total / parts + usize::from(i < total % parts))
        .collect()
}

/// Costs of one configuration, network-wide and clustered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostReport {
    pub m: usize,
    pub k: usize,
    pub c: usize,
    pub cluster_aps: Vec<usize>,
    pub cluster_users: Vec<usize>,
    pub flops_cf: i128,
    pub flops_clustered: i128,
    pub signaling_cf: u128,
    pub signaling_clustered: u128,
}

impl CostReport {
    /// Costs with explicit per-cluster AP and user counts.
    pub fn new(m: usize, k: usize, cluster_aps: Vec<usize>, cluster_users: Vec<usize>) -> Result<Self> {
        if m == 0 || k == 0 {
            return Err(Error::Config("complexity needs M, K >= 1".into()));
        }
        if cluster_aps.is_empty() || cluster_aps.len() != cluster_users.len() {
            return Err(Error::Config("per-cluster AP and user lists must be non-empty and equally long".into()));
        }
        if cluster_aps.iter().sum::<usize>() != m || cluster_users.iter().sum::<usize>() != k {
            return Err(Error::Config(format!(
                "cluster sizes {cluster_aps:?}/{cluster_users:?} do not sum to M={m}, K={k}"
            )));
        }
        let pairs = cluster_aps.iter().zip(&cluster_users);
        let flops_clustered = pairs
            .clone()
            .filter(|(&a, &u)| a > 0 && u > 0)
            .map(|(&a, &u)| flops_cluster(a as u64, u as u64))
            .sum();
        let signaling_clustered = pairs.map(|(&a, &u)| signaling(a as u64, u as u64)).sum();
        Ok(Self {
            m,
            k,
            c: cluster_aps.len(),
            flops_cf: flops_cf(m as u64, k as u64),
            flops_clustered,
            signaling_cf: signaling(m as u64, k as u64),
            signaling_clustered,
            cluster_aps,
            cluster_users,
        })
    }

    /// Costs with APs and users spread evenly over `c` clusters.
    pub fn equal(m: usize, k: usize, c: usize) -> Result<Self> {
        if c == 0 {
            return Err(Error::Config("cluster count must be positive".into()));
        }
        Self::new(m, k, equal_split(m, c), equal_split(k, c))
    }
}

/// Writes `M,K,C,N_CF,sum_N_cl,L_CF,sum_L_cl` rows.
pub fn write_report_csv<W: Write>(reports: &[CostReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["M", "K", "C", "N_CF", "sum_N_cl", "L_CF", "sum_L_cl"])?;
    for r in reports {
        w.write_record([
            r.m.to_string(),
            r.k.to_string(),
            r.c.to_string(),
            r.flops_cf.to_string(),
            r.flops_clustered.to_string(),
            r.signaling_cf.to_string(),
            r.signaling_clustered.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the quoted per-method FLOPs next to the polynomial value of the
/// same configuration, flagging every disagreement.
pub fn write_table_comparison<W: Write>(report: &CostReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "quoted_flops", "formula_sum_N_cl", "matches"])?;
    for (method, quoted) in TABLE_FLOPS {
        w.write_record([
            method.to_string(),
            quoted.to_string(),
            report.flops_clustered.to_string(),
            (quoted == report.flops_clustered).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
