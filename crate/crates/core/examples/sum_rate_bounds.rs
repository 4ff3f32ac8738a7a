//! The log-det sum-rate bound for the network-wide system and for a 2x2
//! cluster grid on the same channel.
//!
//! cargo run -p cellfree --example sum_rate_bounds

use cellfree::channel::{subchannel, ChannelRealization};
use cellfree::harness::{draw_network, ScenarioConfig};
use cellfree::precoding::{equal_power_precoder, PrecoderKind};
use cellfree::rate::{cf_covariance, cf_rate, cf_sumrate, network_rate, ClusteredInputs};
use cellfree::topology::ClusterPartition;

fn cluster_precoders(
    real: &ChannelRealization,
    part: &ClusterPartition,
    sets: &[Vec<usize>],
    rho: f64,
    power: f64,
) -> anyhow::Result<Vec<cellfree::CMatrix>> {
    let mut out = Vec::new();
    for (c, users) in sets.iter().enumerate() {
        let h = subchannel(&real.g_hat, &part.aps_of(c), users)?;
        out.push(equal_power_precoder(PrecoderKind::Mmse, &h, rho, 1.0, power)?.matrix);
    }
    Ok(out)
}

fn main() -> anyhow::Result<()> {
    let cfg = ScenarioConfig { ap_count: 16, user_count: 32, ..ScenarioConfig::default() };
    let net = draw_network(&cfg, 0)?;
    let real = &net.channel;

    // Two users per cluster, the same eight users network-wide.
    let sets: Vec<Vec<usize>> = (0..4).map(|c| net.clusters.users_of(c)[..2].to_vec()).collect();
    let all: Vec<usize> = sets.concat();
    let aps: Vec<usize> = (0..cfg.ap_count).collect();

    println!("snr_db   cf      clcf    per-cluster");
    for snr in [-10.0, 0.0, 10.0, 20.0] {
        let rho = cfg.rho_f(snr);
        let gh = subchannel(&real.g_hat, &aps, &all)?;
        let gt = subchannel(&real.g_tilde, &aps, &all)?;
        let p = equal_power_precoder(PrecoderKind::Mmse, &gh, rho, 1.0, 1.0)?;
        let cf = cf_rate(&gh, &gt, &p.matrix, rho, 1.0)?;
        // The same number from the literal log2 det(R + I) form.
        let literal = cf_sumrate(&cf_covariance(&gh, &gt, &p.matrix, rho, 1.0)?)?;
        assert!((cf - literal).abs() < 1e-9);

        let pre = cluster_precoders(real, &net.clusters, &sets, rho, 0.25)?;
        let inputs = ClusteredInputs::from_realization(real, &net.clusters, &sets, pre, rho, 1.0)?;
        let cl = network_rate(&inputs)?;
        let per: Vec<String> = cl.per_cluster.unwrap().iter().map(|r| format!("{r:.2}")).collect();
        println!("{snr:>6}  {cf:6.2}  {:6.2}  [{}]", cl.sum_rate, per.join(", "));
    }
    Ok(())
}
