//! One Monte Carlo trial: draw a network, then schedule and score it for
//! every requested system, SNR and policy.

use nalgebra::DMatrix;

use crate::channel::{draw_channel, large_scale_matrix, reference_gain, split_csi, ChannelRealization};
use crate::error::Result;
use crate::scheduler::{ClusterSchedule, ClusteredRound, RateParams, SchedulerKind, Scope};
use crate::topology::{generate_layout_split, partition_grid, ClusterPartition, NetworkLayout};

use super::config::ScenarioConfig;
use super::seeds::{shared_seed, trial_seed, Stream};

/// Random draws of one trial.
#[derive(Debug, Clone)]
pub struct TrialNetwork {
    pub layout: NetworkLayout,
    /// Single-cluster partition for the network-wide system.
    pub whole: ClusterPartition,
    pub clusters: ClusterPartition,
    /// Normalized large-scale gains.
    pub beta: DMatrix<f64>,
    pub channel: ChannelRealization,
}

impl TrialNetwork {
    pub fn partition(&self, scope: Scope) -> &ClusterPartition {
        match scope {
            Scope::Cf => &self.whole,
            Scope::Clcf => &self.clusters,
        }
    }
}

/// Draws layout, partitions and channels of `trial`.
pub fn draw_network(config: &ScenarioConfig, trial: usize) -> Result<TrialNetwork> {
    let (seed, t) = (config.master_seed, trial as u64);
    let ap_seed = if config.redraw_aps {
        trial_seed(seed, t, Stream::AccessPoints)
    } else {
        shared_seed(seed, Stream::AccessPoints)
    };
    let layout = generate_layout_split(
        config.ap_count,
        config.user_count,
        config.side_length_m,
        ap_seed,
        trial_seed(seed, t, Stream::Users),
    )?;
    let params = config.large_scale();
    let mut beta = large_scale_matrix(&layout, &params, trial_seed(seed, t, Stream::Shadowing))?;
    beta /= reference_gain(&params, config.reference_distance_m)?;
    let g = draw_channel(&beta, trial_seed(seed, t, Stream::Fading));
    Ok(TrialNetwork {
        whole: partition_grid(&layout, 1)?,
        clusters: partition_grid(&layout, config.cluster_count)?,
        channel: split_csi(&g, config.gamma)?,
        beta,
        layout,
    })
}

/// Result of one policy for one system at one SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub scope: Scope,
    pub scheduler: SchedulerKind,
    pub snr_db: f64,
    pub sum_rate: f64,
    pub per_cluster: Vec<f64>,
    pub schedules: Vec<ClusterSchedule>,
}

/// Everything computed in one trial, ordered by system, SNR, then policy
/// (in configuration order).
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub outcomes: Vec<Outcome>,
}

impl TrialRecord {
    pub fn rate(&self, scope: Scope, scheduler: SchedulerKind, snr_db: f64) -> Option<f64> {
        self.outcomes
            .iter()
            .find(|o| o.scope == scope && o.scheduler == scheduler && o.snr_db == snr_db)
            .map(|o| o.sum_rate)
    }
}

/// Runs every system, SNR and policy of `config` on trial `trial`.
pub fn run_trial(config: &ScenarioConfig, trial: usize) -> Result<TrialRecord> {
    config.validate()?;
    let net = draw_network(config, trial).map_err(|e| e.in_trial(trial, None))?;
    let sched_seed = trial_seed(config.master_seed, trial as u64, Stream::Scheduler);
    let mut outcomes = Vec::new();
    for &scope in config.mode.scopes() {
        for &snr_db in &config.snr_db {
            let params = RateParams {
                rho_f: config.rho_f(snr_db),
                sigma_w2: config.noise_power,
                p_total: config.precoder_power(scope),
                precoder: config.precoder,
            };
            let run = || -> Result<Vec<Outcome>> {
                let round = ClusteredRound::new(
                    &net.channel,
                    net.partition(scope),
                    config.scheduled_users,
                    params,
                )?;
                config
                    .schedulers
                    .iter()
                    .map(|&scheduler| {
                        let schedules =
                            round.schedule(scheduler, config.exhaustive_cap as u128, sched_seed)?;
                        let sets: Vec<Vec<usize>> =
                            schedules.iter().map(|s| s.users.clone()).collect();
                        let rate = round.evaluate(&sets)?;
                        Ok(Outcome {
                            scope,
                            scheduler,
                            snr_db,
                            sum_rate: rate.sum_rate,
                            per_cluster: rate.per_cluster.unwrap_or_default(),
                            schedules,
                        })
                    })
                    .collect()
            };
            outcomes.extend(run().map_err(|e| e.in_trial(trial, Some(snr_db)))?);
        }
    }
    Ok(TrialRecord { trial, outcomes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Mode;

    fn small() -> ScenarioConfig {
        ScenarioConfig {
            ap_count: 8,
            user_count: 16,
            cluster_count: 4,
            scheduled_users: 4,
            snr_db: vec![-10.0, 10.0],
            trials: 2,
            schedulers: SchedulerKind::ALL.to_vec(),
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn deterministic() {
        let c = small();
        assert_eq!(run_trial(&c, 3).unwrap(), run_trial(&c, 3).unwrap());
        assert_ne!(run_trial(&c, 3).unwrap(), run_trial(&c, 4).unwrap());
    }

    #[test]
    fn one_cluster_systems_coincide() {
        let c = ScenarioConfig { cluster_count: 1, ..small() };
        let rec = run_trial(&c, 0).unwrap();
        for o in rec.outcomes.iter().filter(|o| o.scope == Scope::Cf) {
            let other = rec.rate(Scope::Clcf, o.scheduler, o.snr_db).unwrap();
            assert!((o.sum_rate - other).abs() < 1e-9);
        }
    }

    #[test]
    fn exhaustive_bounds_cesg_per_cluster() {
        let c = small();
        for t in 0..5 {
            let rec = run_trial(&c, t).unwrap();
            for o in rec.outcomes.iter().filter(|o| o.scheduler == SchedulerKind::Cesg) {
                let ex = rec
                    .outcomes
                    .iter()
                    .find(|x| x.scheduler == SchedulerKind::Exhaustive && x.scope == o.scope && x.snr_db == o.snr_db)
                    .unwrap();
                for (a, b) in o.schedules.iter().zip(&ex.schedules) {
                    assert!(a.estimate <= b.estimate + 1e-9);
                }
            }
        }
    }

    #[test]
    fn outcome_order_and_shape() {
        let c = ScenarioConfig { mode: Mode::Clcf, ..small() };
        let rec = run_trial(&c, 1).unwrap();
        assert_eq!(rec.outcomes.len(), 2 * SchedulerKind::ALL.len());
        assert!(rec.outcomes.iter().all(|o| o.per_cluster.len() == 4 && o.sum_rate >= 0.0));
        let n: usize = rec.outcomes[0].schedules.iter().map(|s| s.users.len()).sum();
        assert!(n <= 4);
    }

    #[test]
    fn shared_deployment() {
        let c = ScenarioConfig { redraw_aps: false, ..small() };
        let a = draw_network(&c, 0).unwrap();
        let b = draw_network(&c, 1).unwrap();
        assert_eq!(a.layout.ap_positions, b.layout.ap_positions);
        assert_ne!(a.layout.user_positions, b.layout.user_positions);
    }
}
