//! Applying a scheduler in every cluster of a partition.
//!
//! One round works on a single channel realization and SNR. Every cluster
//! first runs greedy selection on its own channel, ignoring the rest of the
//! network. Those stage-1 sets fix the precoders that every other cluster
//! sees as interference while it evaluates its candidate sets (a single
//! pass, no iteration to a fixed point). The network-wide system is the
//! one-cluster case.

use crate::channel::{subchannel, ChannelRealization};
use crate::error::{Error, Result};
use crate::harness::seeds::mix;
use crate::linalg::{induced_covariance, CMatrix, C64};
use crate::precoding::{equal_power_precoder, Precoder};
use crate::rate::{network_rate, ClusteredInputs, RateResult};
use crate::topology::ClusterPartition;

use super::{
    baseline_random, baseline_top_power, cesg_refine, exhaustive_schedule_up_to, greedy_select,
    ChannelGrams, GramRateOracle, RateOracle, RateParams, ScheduleSet, ScheduleTrace,
    SchedulerKind,
};

/// Whether scheduling and rates cover the whole network or its clusters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scope {
    Cf,
    Clcf,
}

impl Scope {
    pub fn name(&self) -> &'static str {
        match self {
            Scope::Cf => "cf",
            Scope::Clcf => "clcf",
        }
    }
}

impl std::fmt::Display for Scope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-cluster targets: `n_total / C` each, the remainder going to the
/// lowest-index clusters, then capped at `min(M_c, K_c)`.
pub fn cluster_targets(partition: &ClusterPartition, n_total: usize) -> Vec<usize> {
    let c = partition.cluster_count;
    (0..c)
        .map(|i| {
            let share = n_total / c + usize::from(i < n_total % c);
            share.min(partition.ap_counts[i]).min(partition.user_counts[i])
        })
        .collect()
}

/// Outcome of one policy in one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSchedule {
    pub cluster: usize,
    /// Scheduled users as global indices, in selection order.
    pub users: Vec<usize>,
    /// Rate estimate used for the decision (with stage-1 interference).
    pub estimate: f64,
    /// C-ESG stages in cluster-local indices.
    pub trace: Option<ScheduleTrace>,
}

/// Shared per-realization state: cluster channels, stage-1 greedy sets and
/// the interference they induce.
pub struct ClusteredRound<'a> {
    realization: &'a ChannelRealization,
    partition: &'a ClusterPartition,
    params: RateParams,
    targets: Vec<usize>,
    aps: Vec<Vec<usize>>,
    users: Vec<Vec<usize>>,
    grams: Vec<Option<ChannelGrams>>,
    stage_one: Vec<Option<ScheduleSet>>,
    interference: Vec<CMatrix>,
}

impl<'a> ClusteredRound<'a> {
    pub fn new(
        realization: &'a ChannelRealization,
        partition: &'a ClusterPartition,
        n_total: usize,
        params: RateParams,
    ) -> Result<Self> {
        params.validate()?;
        let c_count = partition.cluster_count;
        if partition.ap_cluster.len() != realization.g_hat.nrows()
            || partition.user_cluster.len() != realization.g_hat.ncols()
        {
            return Err(Error::Usage(format!(
                "partition covers {}x{} but the channel is {}x{}",
                partition.ap_cluster.len(),
                partition.user_cluster.len(),
                realization.g_hat.nrows(),
                realization.g_hat.ncols()
            )));
        }
        let targets = cluster_targets(partition, n_total);
        let aps: Vec<Vec<usize>> = (0..c_count).map(|c| partition.aps_of(c)).collect();
        let users: Vec<Vec<usize>> = (0..c_count).map(|c| partition.users_of(c)).collect();

        let mut grams = Vec::with_capacity(c_count);
        let mut stage_one = Vec::with_capacity(c_count);
        for c in 0..c_count {
            if targets[c] == 0 {
                grams.push(None);
                stage_one.push(None);
                continue;
            }
            let g = ChannelGrams::new(
                &subchannel(&realization.g_hat, &aps[c], &users[c])?,
                &subchannel(&realization.g_tilde, &aps[c], &users[c])?,
            )?;
            let set = greedy_select(&GramRateOracle::new(&g, params), targets[c])?;
            grams.push(Some(g));
            stage_one.push(Some(set));
        }

        let mut round = Self {
            realization,
            partition,
            params,
            targets,
            aps,
            users,
            grams,
            stage_one,
            interference: Vec::new(),
        };
        let sets: Vec<Vec<usize>> = (0..c_count).map(|c| round.stage_one_global(c)).collect();
        let precoders = round.precoders(&sets)?;
        round.interference = (0..c_count)
            .map(|c| round.interference_from(c, &precoders))
            .collect::<Result<_>>()?;
        Ok(round)
    }

    pub fn cluster_count(&self) -> usize {
        self.partition.cluster_count
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    /// Global user indices of cluster `c`.
    pub fn users_of(&self, c: usize) -> &[usize] {
        &self.users[c]
    }

    /// Stage-1 greedy set of cluster `c`, in global indices.
    pub fn stage_one_global(&self, c: usize) -> Vec<usize> {
        self.stage_one[c]
            .as_ref()
            .map(|s| self.to_global(c, &s.users))
            .unwrap_or_default()
    }

    fn to_global(&self, c: usize, local: &[usize]) -> Vec<usize> {
        local.iter().map(|&u| self.users[c][u]).collect()
    }

    /// Equal-power precoders of every cluster for the given global sets.
    pub fn precoders(&self, sets: &[Vec<usize>]) -> Result<Vec<CMatrix>> {
        sets.iter()
            .enumerate()
            .map(|(c, set)| {
                if set.is_empty() {
                    return Ok(Precoder::silent(self.aps[c].len()).matrix);
                }
                let h = subchannel(&self.realization.g_hat, &self.aps[c], set)?;
                let p = equal_power_precoder(
                    self.params.precoder,
                    &h,
                    self.params.rho_f,
                    self.params.sigma_w2,
                    self.params.p_total,
                )?;
                Ok(p.matrix)
            })
            .collect()
    }

    /// `ρ Σ_{i≠c} (Ĝ_icᵀP_iP_iᴴĜ_ic* + G̃_icᵀP_iP_iᴴG̃_ic*)` over all users of `c`.
    fn interference_from(&self, c: usize, precoders: &[CMatrix]) -> Result<CMatrix> {
        let k_c = self.users[c].len();
        let mut j = CMatrix::zeros(k_c, k_c);
        if k_c == 0 {
            return Ok(j);
        }
        for (i, p_i) in precoders.iter().enumerate() {
            if i == c || p_i.ncols() == 0 {
                continue;
            }
            let hat = subchannel(&self.realization.g_hat, &self.aps[i], &self.users[c])?;
            let tilde = subchannel(&self.realization.g_tilde, &self.aps[i], &self.users[c])?;
            j += induced_covariance(&hat, p_i);
            j += induced_covariance(&tilde, p_i);
        }
        Ok(j * C64::new(self.params.rho_f, 0.0))
    }

    /// Schedules cluster `c` under `policy`.
    pub fn schedule_cluster(
        &self,
        c: usize,
        policy: SchedulerKind,
        exhaustive_cap: u128,
        seed: u64,
    ) -> Result<ClusterSchedule> {
        let (Some(grams), Some(first)) = (&self.grams[c], &self.stage_one[c]) else {
            return Ok(ClusterSchedule {
                cluster: c,
                users: vec![],
                estimate: 0.0,
                trace: None,
            });
        };
        let n = self.targets[c];
        let oracle = GramRateOracle::new(grams, self.params).with_interference(&self.interference[c]);
        let (local, trace) = match policy {
            SchedulerKind::Greedy => (first.users.clone(), None),
            SchedulerKind::Cesg => {
                let t = cesg_refine(&first.users, &oracle)?;
                (t.best().users.clone(), Some(t))
            }
            SchedulerKind::Exhaustive => {
                (exhaustive_schedule_up_to(&oracle, n, exhaustive_cap)?.users, None)
            }
            SchedulerKind::Random => {
                (baseline_random(self.users[c].len(), n, mix(seed, c as u64)), None)
            }
            SchedulerKind::TopPower => {
                let powers: Vec<f64> =
                    (0..oracle.user_count()).map(|k| oracle.channel_power(k)).collect();
                (baseline_top_power(&powers, n), None)
            }
        };
        let estimate = oracle.rate(&local).unwrap_or(0.0);
        Ok(ClusterSchedule {
            cluster: c,
            users: self.to_global(c, &local),
            estimate,
            trace,
        })
    }

    /// Schedules every cluster under `policy`.
    pub fn schedule(
        &self,
        policy: SchedulerKind,
        exhaustive_cap: u128,
        seed: u64,
    ) -> Result<Vec<ClusterSchedule>> {
        (0..self.cluster_count())
            .map(|c| self.schedule_cluster(c, policy, exhaustive_cap, seed))
            .collect()
    }

    /// Network sum-rate when every cluster serves `sets[c]` (global indices).
    pub fn evaluate(&self, sets: &[Vec<usize>]) -> Result<RateResult> {
        let precoders = self.precoders(sets)?;
        let inputs = ClusteredInputs::from_realization(
            self.realization,
            self.partition,
            sets,
            precoders,
            self.params.rho_f,
            self.params.sigma_w2,
        )?;
        network_rate(&inputs)
    }
}

/// Schedules every cluster of one realization and returns the schedules and
/// the resulting network rate.
pub fn schedule_all_clusters(
    realization: &ChannelRealization,
    partition: &ClusterPartition,
    n_total: usize,
    params: RateParams,
    policy: SchedulerKind,
    exhaustive_cap: u128,
    seed: u64,
) -> Result<(Vec<ClusterSchedule>, RateResult)> {
    let round = ClusteredRound::new(realization, partition, n_total, params)?;
    let schedules = round.schedule(policy, exhaustive_cap, seed)?;
    let sets: Vec<Vec<usize>> = schedules.iter().map(|s| s.users.clone()).collect();
    let rate = round.evaluate(&sets)?;
    Ok((schedules, rate))
}
