//! Multiuser scheduling: greedy selection, the C-ESG refinement over
//! power-ordered swaps, exhaustive search and simple baselines.
//!
//! Schedulers work on the local user indices `0..K` of one scope (a cluster
//! or the whole network) and score subsets through a [`RateOracle`]. Ties are
//! always broken towards the lowest user index (lexicographically smallest
//! subset).

pub mod clustered;
pub mod oracle;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
pub use clustered::{cluster_targets, schedule_all_clusters, ClusterSchedule, ClusteredRound, Scope};
pub use oracle::{ChannelGrams, FnOracle, GramRateOracle, RateOracle, RateParams};

/// Scheduling policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulerKind {
    Greedy,
    Cesg,
    Exhaustive,
    Random,
    TopPower,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 5] = [
        SchedulerKind::Greedy,
        SchedulerKind::Cesg,
        SchedulerKind::Exhaustive,
        SchedulerKind::Random,
        SchedulerKind::TopPower,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SchedulerKind::Greedy => "greedy",
            SchedulerKind::Cesg => "cesg",
            SchedulerKind::Exhaustive => "exhaustive",
            SchedulerKind::Random => "random",
            SchedulerKind::TopPower => "top_power",
        }
    }
}

impl std::fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SchedulerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchedulerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheduler '{s}'")))
    }
}

/// A scheduled user set and the rate it achieves.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSet {
    pub users: Vec<usize>,
    pub rate: f64,
}

impl ScheduleSet {
    /// Scores `users` with `oracle`; infeasible sets score zero.
    pub fn evaluate(users: Vec<usize>, oracle: &impl RateOracle) -> Self {
        let rate = oracle.rate(&users).unwrap_or_else(|| {
            log::warn!("no precoder for user set {users:?}; scoring it as zero");
            0.0
        });
        Self { users, rate }
    }
}

/// Every candidate set visited by C-ESG.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleTrace {
    /// One set per stage; stage 1 is the greedy set.
    pub stage_sets: Vec<ScheduleSet>,
    /// `excluded_users[j]` left the set between stage `j + 1` and `j + 2`.
    pub excluded_users: Vec<usize>,
    /// `new_users[j]` entered the set between stage `j + 1` and `j + 2`.
    pub new_users: Vec<usize>,
    /// Zero-based stage index of the best set.
    pub best_stage: usize,
}

impl ScheduleTrace {
    pub fn best(&self) -> &ScheduleSet {
        &self.stage_sets[self.best_stage]
    }

    pub fn stage_count(&self) -> usize {
        self.stage_sets.len()
    }
}

/// Squared norm of user `k`'s channel column.
pub fn channel_power(g: &CMatrix, k: usize) -> f64 {
    g.column(k).norm_squared()
}

pub fn channel_powers(g: &CMatrix) -> Vec<f64> {
    (0..g.ncols()).map(|k| channel_power(g, k)).collect()
}

/// Member of `users` with the lowest channel power.
pub fn excluded_user(users: &[usize], powers: &[f64]) -> Result<usize> {
    users
        .iter()
        .copied()
        .min_by(|&a, &b| powers[a].total_cmp(&powers[b]).then(a.cmp(&b)))
        .ok_or_else(|| Error::Usage("cannot exclude a user from an empty set".into()))
}

/// Member of `remaining` with the highest channel power.
pub fn new_user(remaining: &[usize], powers: &[f64]) -> Result<usize> {
    remaining
        .iter()
        .copied()
        .min_by(|&a, &b| powers[b].total_cmp(&powers[a]).then(a.cmp(&b)))
        .ok_or_else(|| Error::Usage("no remaining users to bring in".into()))
}

fn powers_of(oracle: &impl RateOracle) -> Vec<f64> {
    (0..oracle.user_count()).map(|k| oracle.channel_power(k)).collect()
}

/// Greedy selection: seed with the strongest user, then repeatedly add the
/// user that maximizes the rate of the augmented set, stopping at `n` users
/// or as soon as the best augmentation does not increase the rate.
pub fn greedy_select(oracle: &impl RateOracle, n: usize) -> Result<ScheduleSet> {
    let k_total = oracle.user_count();
    if k_total == 0 {
        return Err(Error::Usage("greedy selection on an empty user pool".into()));
    }
    if n == 0 {
        return Err(Error::Usage("greedy selection needs a target of at least one user".into()));
    }
    if k_total <= n {
        let users: Vec<usize> = (0..k_total).collect();
        let rate = oracle.rate(&users).ok_or_else(|| {
            Error::Precoding(format!("no precoder for all {k_total} users"))
        })?;
        return Ok(ScheduleSet { users, rate });
    }
    let powers = powers_of(oracle);
    let all: Vec<usize> = (0..k_total).collect();
    let first = new_user(&all, &powers)?;
    let mut users = vec![first];
    let mut rate = oracle
        .rate(&users)
        .ok_or_else(|| Error::Precoding(format!("no precoder for user {first}")))?;
    let mut in_set = vec![false; k_total];
    in_set[first] = true;
    while users.len() < n {
        let candidates: Vec<usize> = (0..k_total).filter(|&k| !in_set[k]).collect();
        let rates = oracle.extension_rates(&users, &candidates);
        let mut best: Option<(usize, f64)> = None;
        for (&k, r) in candidates.iter().zip(rates) {
            if let Some(r) = r {
                if best.is_none_or(|(_, b)| r > b) {
                    best = Some((k, r));
                }
            }
        }
        match best {
            Some((k, r)) if r > rate => {
                users.push(k);
                in_set[k] = true;
                rate = r;
            }
            _ => break,
        }
    }
    Ok(ScheduleSet { users, rate })
}

/// C-ESG stages after the first: drop the weakest scheduled user, bring in
/// the strongest remaining one, and score each new set with `oracle`. The
/// set size stays at `|stage_one|`, giving `K − |stage_one| + 1` stages.
pub fn cesg_refine(stage_one: &[usize], oracle: &impl RateOracle) -> Result<ScheduleTrace> {
    let k_total = oracle.user_count();
    if stage_one.is_empty() {
        return Err(Error::Usage("C-ESG needs a non-empty first-stage set".into()));
    }
    let mut member = vec![false; k_total];
    for &u in stage_one {
        if u >= k_total || std::mem::replace(&mut member[u], true) {
            return Err(Error::Usage(format!("invalid first-stage set {stage_one:?}")));
        }
    }
    let powers = powers_of(oracle);
    let mut remaining: Vec<usize> = (0..k_total).filter(|&k| !member[k]).collect();
    let stages = remaining.len() + 1;

    let mut current = stage_one.to_vec();
    let mut stage_sets = Vec::with_capacity(stages);
    let mut excluded_users = Vec::with_capacity(stages - 1);
    let mut new_users = Vec::with_capacity(stages - 1);
    stage_sets.push(ScheduleSet::evaluate(current.clone(), oracle));
    for _ in 1..stages {
        let out = excluded_user(&current, &powers)?;
        let inn = new_user(&remaining, &powers)?;
        current.retain(|&u| u != out);
        current.push(inn);
        remaining.retain(|&u| u != inn);
        excluded_users.push(out);
        new_users.push(inn);
        stage_sets.push(ScheduleSet::evaluate(current.clone(), oracle));
    }
    let mut best_stage = 0;
    for (j, s) in stage_sets.iter().enumerate() {
        if s.rate > stage_sets[best_stage].rate {
            best_stage = j;
        }
    }
    Ok(ScheduleTrace {
        stage_sets,
        excluded_users,
        new_users,
        best_stage,
    })
}

/// Full C-ESG: greedy first stage scored by `selection`, refinement scored by
/// `evaluation`. Network-wide scheduling passes the same oracle twice.
pub fn cesg_schedule(
    selection: &impl RateOracle,
    evaluation: &impl RateOracle,
    n: usize,
) -> Result<ScheduleTrace> {
    let first = greedy_select(selection, n)?;
    cesg_refine(&first.users, evaluation)
}

/// `C(n, k)` in 128-bit arithmetic, saturating on overflow.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Advances `idx` to the next `k`-combination of `0..n` in lexicographic
/// order; returns `false` after the last one.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in (i + 1)..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn search_sizes(
    oracle: &impl RateOracle,
    sizes: impl Iterator<Item = usize> + Clone,
    cap: u128,
) -> Result<ScheduleSet> {
    let k_total = oracle.user_count();
    let count = sizes
        .clone()
        .map(|s| binomial(k_total, s))
        .fold(0u128, |a, b| a.saturating_add(b));
    if count > cap {
        return Err(Error::SearchTooLarge { count, cap });
    }
    let mut best: Option<ScheduleSet> = None;
    for size in sizes {
        if size == 0 || size > k_total {
            continue;
        }
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            if let Some(r) = oracle.rate(&idx) {
                if best.as_ref().is_none_or(|b| r > b.rate) {
                    best = Some(ScheduleSet {
                        users: idx.clone(),
                        rate: r,
                    });
                }
            }
            if !next_combination(&mut idx, k_total) {
                break;
            }
        }
    }
    best.ok_or_else(|| Error::Precoding("no feasible user set in exhaustive search".into()))
}

/// Best subset of exactly `min(n, K)` users, enumerated lexicographically.
pub fn exhaustive_schedule(oracle: &impl RateOracle, n: usize, cap: u128) -> Result<ScheduleSet> {
    if oracle.user_count() == 0 || n == 0 {
        return Err(Error::Usage("exhaustive search needs users and n >= 1".into()));
    }
    let size = n.min(oracle.user_count());
    search_sizes(oracle, std::iter::once(size), cap)
}

/// Best subset with between 1 and `min(n, K)` users; smaller sizes are
/// enumerated first, so ties favour fewer users.
pub fn exhaustive_schedule_up_to(
    oracle: &impl RateOracle,
    n: usize,
    cap: u128,
) -> Result<ScheduleSet> {
    if oracle.user_count() == 0 || n == 0 {
        return Err(Error::Usage("exhaustive search needs users and n >= 1".into()));
    }
    let max = n.min(oracle.user_count());
    search_sizes(oracle, 1..=max, cap)
}

/// Number of subsets [`exhaustive_schedule_up_to`] visits.
pub fn up_to_count(k: usize, n: usize) -> u128 {
    (1..=n.min(k)).map(|s| binomial(k, s)).fold(0, |a, b| a.saturating_add(b))
}

/// Uniformly random `min(n, K)`-subset, sorted ascending.
pub fn baseline_random(k: usize, n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut users = sample(&mut rng, k, n.min(k)).into_vec();
    users.sort_unstable();
    users
}

/// The `min(n, K)` users with the highest channel power, strongest first.
pub fn baseline_top_power(powers: &[f64], n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..powers.len()).collect();
    order.sort_by(|&a, &b| powers[b].total_cmp(&powers[a]).then(a.cmp(&b)));
    order.truncate(n.min(powers.len()));
    order
}
