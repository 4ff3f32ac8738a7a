//! Acceptance checks. Each test prints one `ACCEPTANCE <id> PASS|FAIL` line
//! before asserting, so `cargo test --test acceptance -- --nocapture` gives a
//! readable report.

use std::process::Command;
use std::time::Instant;

use nalgebra::DMatrix;

use cellfree::channel::{draw_channel, split_csi, subchannel};
use cellfree::complexity::{flops_cf, flops_cluster, write_table_comparison, CostReport, TABLE_FLOPS};
use cellfree::harness::{draw_network, run_sweep, Mode, ScenarioConfig, SweepResult};
use cellfree::linalg::induced_covariance;
use cellfree::precoding::{equal_power_precoder, PrecoderKind};
use cellfree::rate::{cf_covariance, cf_rate, cf_sumrate, network_rate, ClusteredInputs, Link};
use cellfree::scheduler::{
    cesg_schedule, exhaustive_schedule, greedy_select, ChannelGrams, GramRateOracle, RateParams,
    SchedulerKind, Scope,
};
use cellfree::{CMatrix, C64};

/// Proposition ordering slack.
const ORDER_SLACK: f64 = 1e-9;
/// Agreement between the two exhaustive searches.
const ENUM_TOL: f64 = 1e-9;
/// Identity checks on rates and powers.
const IDENTITY_TOL: f64 = 1e-9;
/// Relative agreement with the eigenvalue oracle.
const EIGEN_REL_TOL: f64 = 1e-8;
/// C-ESG over exhaustive at the lowest SNR of the small network.
const LOW_SNR_RATIO: f64 = 0.9;
/// Network-wide trials behind the default run of the large-network check.
const FIG2A_REDUCED_CF_TRIALS: usize = 24;
const FIG2A_FULL_TRIALS: usize = 500;

fn report(id: &str, pass: bool, detail: String) {
    println!("ACCEPTANCE {id} {}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "acceptance {id} failed: {detail}");
}

fn rate_params(snr_db: f64) -> RateParams {
    RateParams {
        rho_f: 10f64.powf(snr_db / 10.0),
        sigma_w2: 1.0,
        p_total: 1.0,
        precoder: PrecoderKind::Mmse,
    }
}

fn small_network(m: usize, k: usize, seed: u64) -> cellfree::channel::ChannelRealization {
    let cfg = ScenarioConfig {
        ap_count: m,
        user_count: k,
        cluster_count: 1,
        scheduled_users: 1,
        master_seed: seed,
        ..ScenarioConfig::default()
    };
    draw_network(&cfg, 0).unwrap().channel
}

#[test]
fn criterion_1_proposition_ordering() {
    let start = Instant::now();
    let snrs = [-10.0, 0.0, 10.0, 20.0];
    let mut worst = f64::INFINITY;
    let mut strict = 0;
    for seed in 0..1000u64 {
        let real = small_network(4, 8, seed);
        let grams = ChannelGrams::new(&real.g_hat, &real.g_tilde).unwrap();
        let oracle = GramRateOracle::new(&grams, rate_params(snrs[seed as usize % 4]));
        let g = greedy_select(&oracle, 2).unwrap();
        let c = cesg_schedule(&oracle, &oracle, 2).unwrap();
        let best = c.best();
        let x = exhaustive_schedule(&oracle, best.users.len(), 1_000_000).unwrap();
        worst = worst.min(best.rate - g.rate).min(x.rate - best.rate);
        if best.rate > g.rate + 1e-9 {
            strict += 1;
        }
    }
    report(
        "1",
        worst >= -ORDER_SLACK,
        format!(
            "greedy <= C-ESG <= exhaustive on 1000 instances (M=4, K=8, n=2); smallest margin {worst:.3e}, C-ESG strictly better than greedy in {strict}; {:.1?}",
            start.elapsed()
        ),
    );
}

/// Every `n`-subset of `0..k` via bitmasks, scored with the direct precoder
/// and rate equations.
fn naive_best(real: &cellfree::channel::ChannelRealization, n: usize, params: RateParams) -> (Vec<usize>, f64) {
    let k = real.g.ncols();
    let aps: Vec<usize> = (0..real.g.nrows()).collect();
    let mut best: (Vec<usize>, f64) = (vec![], f64::NEG_INFINITY);
    for mask in 0u32..(1 << k) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let users: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
        let gh = subchannel(&real.g_hat, &aps, &users).unwrap();
        let gt = subchannel(&real.g_tilde, &aps, &users).unwrap();
        let p = equal_power_precoder(params.precoder, &gh, params.rho_f, params.sigma_w2, params.p_total).unwrap();
        let r = cf_rate(&gh, &gt, &p.matrix, params.rho_f, params.sigma_w2).unwrap();
        if r > best.1 {
            best = (users, r);
        }
    }
    best
}

#[test]
fn criterion_2_exhaustive_matches_naive_enumerator() {
    let start = Instant::now();
    let mut mismatches = 0;
    let mut worst = 0.0f64;
    for seed in 0..200u64 {
        let real = small_network(4, 10, 10_000 + seed);
        let params = rate_params([-10.0, 0.0, 10.0, 20.0][seed as usize % 4]);
        let grams = ChannelGrams::new(&real.g_hat, &real.g_tilde).unwrap();
        let oracle = GramRateOracle::new(&grams, params);
        let prod = exhaustive_schedule(&oracle, 3, 1_000_000).unwrap();
        let (users, rate) = naive_best(&real, 3, params);
        let mut sorted = prod.users.clone();
        sorted.sort_unstable();
        let diff = (prod.rate - rate).abs() / rate.abs().max(1.0);
        worst = worst.max(diff);
        if sorted != users || diff > ENUM_TOL {
            mismatches += 1;
        }
    }
    report(
        "2",
        mismatches == 0,
        format!(
            "200 instances (K=10, n=3): {mismatches} argmax mismatches, largest rate difference {worst:.3e}; {:.1?}",
            start.elapsed()
        ),
    );
}

fn fig2a_config(trials: usize) -> ScenarioConfig {
    ScenarioConfig {
        ap_count: 64,
        user_count: 256,
        cluster_count: 4,
        scheduled_users: 64,
        gamma: 0.95f64.sqrt(),
        snr_db: vec![-10.0, 0.0, 10.0, 20.0],
        trials,
        schedulers: vec![SchedulerKind::Greedy, SchedulerKind::Cesg, SchedulerKind::Random],
        mode: Mode::Both,
        ..ScenarioConfig::default()
    }
}

fn fig2a_checks(res: &SweepResult, cfg: &ScenarioConfig) -> Vec<String> {
    let mut failures = Vec::new();
    for &scope in &[Scope::Cf, Scope::Clcf] {
        for &s in &cfg.schedulers {
            let means: Vec<f64> = cfg.snr_db.iter().map(|&v| res.mean(scope, s, v).unwrap()).collect();
            if means.windows(2).any(|w| w[1] < w[0]) {
                failures.push(format!("(a) {scope}/{s} not nondecreasing: {means:?}"));
            }
        }
        for &v in &cfg.snr_db {
            let m = |s| res.mean(scope, s, v).unwrap();
            let (c, g, r) = (m(SchedulerKind::Cesg), m(SchedulerKind::Greedy), m(SchedulerKind::Random));
            if !(c >= g && g >= r) {
                failures.push(format!("(b) {scope} at {v} dB: cesg {c:.4}, greedy {g:.4}, random {r:.4}"));
            }
        }
    }
    for &s in &cfg.schedulers {
        let gap = |v: f64| res.mean(Scope::Cf, s, v).unwrap() - res.mean(Scope::Clcf, s, v).unwrap();
        for &v in &cfg.snr_db {
            if gap(v) < 0.0 {
                failures.push(format!("(c) {s} at {v} dB: CF below CLCF by {:.4}", -gap(v)));
            }
        }
        if gap(20.0) < gap(0.0) {
            failures.push(format!("(c) {s}: gap at 20 dB {:.4} < gap at 0 dB {:.4}", gap(20.0), gap(0.0)));
        }
    }
    failures
}

fn summarize(res: &SweepResult, cfg: &ScenarioConfig) -> String {
    let mut parts = Vec::new();
    for &scope in &[Scope::Cf, Scope::Clcf] {
        for &s in &cfg.schedulers {
            let means: Vec<String> =
                cfg.snr_db.iter().map(|&v| format!("{:.2}", res.mean(scope, s, v).unwrap())).collect();
            parts.push(format!("{scope}/{s}=[{}]", means.join(",")));
        }
    }
    parts.join(" ")
}

fn merge(cf: SweepResult, clcf: SweepResult) -> SweepResult {
    let mut rows = cf.rows;
    rows.extend(clcf.rows);
    SweepResult { rows, ..cf }
}

fn run_fig2a(cf_trials: usize, clcf_trials: usize, label: &str) {
    let start = Instant::now();
    let cfg = fig2a_config(clcf_trials);
    let cf = run_sweep(&ScenarioConfig { mode: Mode::Cf, trials: cf_trials, ..cfg.clone() }).unwrap();
    let clcf = run_sweep(&ScenarioConfig { mode: Mode::Clcf, ..cfg.clone() }).unwrap();
    let res = merge(cf, clcf);
    let failures = fig2a_checks(&res, &cfg);
    report(
        "3",
        failures.is_empty(),
        format!(
            "{label}: M=64, K=256, n=64, C=4, {cf_trials} CF trials and {clcf_trials} CLCF trials; means {}; violations {failures:?}; {:.1?}",
            summarize(&res, &cfg),
            start.elapsed()
        ),
    );
}

/// All 500 trials for the clustered system, fewer for the network-wide one
/// (about 6 s per trial on one core). The network-wide comparisons either
/// hold per trial (C-ESG keeps the greedy set as a candidate and sees no
/// interference) or have margins far above the trial-to-trial spread.
#[test]
fn criterion_3_fig2a_trends() {
    run_fig2a(FIG2A_REDUCED_CF_TRIALS, FIG2A_FULL_TRIALS, "reduced network-wide trial count");
}

/// The full 500-trial run for both systems (about an hour on one core).
#[test]
#[ignore]
fn criterion_3_fig2a_trends_full() {
    run_fig2a(FIG2A_FULL_TRIALS, FIG2A_FULL_TRIALS, "full trial count");
}

#[test]
fn criterion_4_fig2b_exhaustive_comparison() {
    let start = Instant::now();
    let cfg = ScenarioConfig {
        ap_count: 64,
        user_count: 16,
        cluster_count: 4,
        scheduled_users: 8,
        trials: 500,
        snr_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
        schedulers: vec![SchedulerKind::Greedy, SchedulerKind::Cesg, SchedulerKind::Exhaustive],
        mode: Mode::Clcf,
        ..ScenarioConfig::default()
    };
    let res = run_sweep(&cfg).unwrap();
    let mut failures = Vec::new();
    let mut table = Vec::new();
    for &v in &cfg.snr_db {
        let m = |s| res.mean(Scope::Clcf, s, v).unwrap();
        let (x, c, g) = (m(SchedulerKind::Exhaustive), m(SchedulerKind::Cesg), m(SchedulerKind::Greedy));
        table.push(format!("{v}dB: ex {x:.3} cesg {c:.3} greedy {g:.3}"));
        if !(x >= c && c >= g) {
            failures.push(format!("ordering at {v} dB"));
        }
    }
    let low = cfg.snr_db[0];
    let ratio = res.mean(Scope::Clcf, SchedulerKind::Cesg, low).unwrap()
        / res.mean(Scope::Clcf, SchedulerKind::Exhaustive, low).unwrap();
    if ratio < LOW_SNR_RATIO {
        failures.push(format!("ratio {ratio:.4} < {LOW_SNR_RATIO} at {low} dB"));
    }
    report(
        "4",
        failures.is_empty(),
        format!(
            "M=64, K=16, n=8, C=4, 500 trials; C-ESG/exhaustive at {low} dB = {ratio:.4} (threshold {LOW_SNR_RATIO}); {}; violations {failures:?}; {:.1?}",
            table.join("; "),
            start.elapsed()
        ),
    );
}

#[test]
fn criterion_5_closed_form_costs() {
    let start = Instant::now();
    let mut failures = Vec::new();
    // Hand evaluation: 16 + 32 + 2 + 10 − 3.5 − 3.5 + 3 and 6 + 8 + 2 + 6 − 3.5 + 0.5 − 1.
    if flops_cluster(1, 1) != 56 {
        failures.push("flops_cluster(1,1)".to_string());
    }
    if flops_cf(1, 1) != 18 {
        failures.push("flops_cf(1,1)".to_string());
    }
    for (m, k, c) in [(64, 256, 4), (16, 16, 4), (36, 72, 9), (64, 16, 4), (100, 400, 4)] {
        let r = CostReport::equal(m, k, c).unwrap();
        if r.signaling_clustered * c as u128 != r.signaling_cf {
            failures.push(format!("signaling split at M={m}, K={k}, C={c}"));
        }
    }
    let fig3 = CostReport::equal(64, 256, 4).unwrap();
    if !(fig3.flops_cf > 10 * fig3.flops_clustered) {
        failures.push("clustered FLOPs not negligible at M=64".into());
    }
    let table = CostReport::equal(64, 16, 4).unwrap();
    let mut buf = Vec::new();
    write_table_comparison(&table, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    for (method, quoted) in TABLE_FLOPS {
        let line = format!("{method},{quoted},{},false", table.flops_clustered);
        if !text.lines().any(|l| l == line) {
            failures.push(format!("table line for {method} missing"));
        }
    }
    report(
        "5",
        failures.is_empty(),
        format!(
            "N_cl(1,1)=56, N_CF(1,1)=18; sum L_cl = L_CF/C on equal splits; M=64,K=16,C=4 formula sum N_cl={} printed against quoted {:?} (flagged as mismatch); violations {failures:?}; {:.1?}",
            table.flops_clustered,
            TABLE_FLOPS.map(|t| t.1),
            start.elapsed()
        ),
    );
}

fn random_channel(m: usize, k: usize, seed: u64) -> CMatrix {
    let beta = DMatrix::from_fn(m, k, |i, j| 0.1 + ((i * 5 + j * 11 + seed as usize) % 7) as f64 * 0.3);
    draw_channel(&beta, seed)
}

#[test]
fn criterion_6_numerical_identities() {
    let start = Instant::now();
    let mut worst = [0.0f64; 4];

    // (a) one cluster equals the network-wide system.
    for seed in 0..100u64 {
        let real = split_csi(&random_channel(6, 4, seed), 0.95f64.sqrt()).unwrap();
        let rho = 10f64.powf((seed % 7) as f64 * 5.0 / 10.0 - 1.0);
        let p = equal_power_precoder(PrecoderKind::Mmse, &real.g_hat, rho, 1.0, 1.0).unwrap().matrix;
        let cf = cf_rate(&real.g_hat, &real.g_tilde, &p, rho, 1.0).unwrap();
        let cl = network_rate(&ClusteredInputs {
            rho_f: rho,
            sigma_w2: 1.0,
            precoders: vec![p],
            links: vec![vec![Link { g_hat: real.g_hat.clone(), g_tilde: real.g_tilde.clone() }]],
        })
        .unwrap()
        .sum_rate;
        worst[0] = worst[0].max((cf - cl).abs());
    }

    // (b) perfect CSI.
    for seed in 0..100u64 {
        let real = split_csi(&random_channel(5, 3, 500 + seed), 1.0).unwrap();
        assert!(real.g_tilde.iter().all(|z| *z == C64::new(0.0, 0.0)));
        let rho = 3.0;
        let p = equal_power_precoder(PrecoderKind::Mmse, &real.g_hat, rho, 1.0, 1.0).unwrap().matrix;
        let s = induced_covariance(&real.g_hat, &p) * C64::new(rho, 0.0) + CMatrix::identity(3, 3);
        let perfect = s.determinant().re.log2();
        let r = cf_rate(&real.g_hat, &real.g_tilde, &p, rho, 1.0).unwrap();
        worst[1] = worst[1].max((perfect - r).abs());
    }

    // (c) eigenvalue oracle for log2 det(R + I).
    for seed in 0..100u64 {
        let real = split_csi(&random_channel(4, 3, 900 + seed), 0.9).unwrap();
        let p = equal_power_precoder(PrecoderKind::Mmse, &real.g_hat, 5.0, 1.0, 1.0).unwrap().matrix;
        let r = cf_covariance(&real.g_hat, &real.g_tilde, &p, 5.0, 1.0).unwrap();
        let eig = r.clone().eigenvalues().expect("Schur decomposition converges");
        let oracle: f64 = eig.iter().map(|l| (C64::new(1.0, 0.0) + l).norm().log2()).sum();
        let got = cf_sumrate(&r).unwrap();
        worst[2] = worst[2].max((got - oracle).abs() / oracle.abs().max(1e-300));
    }

    // (d) transmit power equals the budget.
    for seed in 0..100u64 {
        let h = random_channel(8, 1 + seed as usize % 8, 1300 + seed);
        let budget = 0.5 + (seed % 5) as f64;
        for kind in [PrecoderKind::Mmse, PrecoderKind::Zf] {
            let p = equal_power_precoder(kind, &h, 2.0, 1.0, budget).unwrap();
            worst[3] = worst[3].max((p.transmit_power() - budget).abs());
        }
    }

    let pass = worst[0] <= IDENTITY_TOL
        && worst[1] <= IDENTITY_TOL
        && worst[2] <= EIGEN_REL_TOL
        && worst[3] <= IDENTITY_TOL;
    report(
        "6",
        pass,
        format!(
            "max deviations: one-cluster vs network {:.2e}, perfect CSI {:.2e}, eigenvalue oracle (relative) {:.2e}, precoder power {:.2e}; {:.1?}",
            worst[0], worst[1], worst[2], worst[3],
            start.elapsed()
        ),
    );
}

#[test]
fn criterion_7_sweep_is_byte_identical() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("tiny.toml");
    std::fs::write(
        &cfg_path,
        "ap_count = 16\nuser_count = 32\ncluster_count = 4\nscheduled_users = 8\nsnr_db = [-5.0, 10.0]\ntrials = 6\nmode = \"clcf\"\nschedulers = [\"greedy\", \"cesg\", \"exhaustive\", \"random\", \"top_power\"]\n",
    )
    .unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_cellfree"))
            .args(["sweep", "--config"])
            .arg(&cfg_path)
            .args(["--seed", "42", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out).unwrap()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    let rows = a.iter().filter(|&&c| c == b'\n').count();
    report(
        "7",
        a == b && rows == 1 + 5 * 2,
        format!("two sweep runs with seed 42 wrote {} and {} bytes, identical: {}; {:.1?}", a.len(), b.len(), a == b, start.elapsed()),
    );
}
