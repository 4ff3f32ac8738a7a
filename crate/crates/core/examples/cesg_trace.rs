//! Stage-by-stage C-ESG on one network: the greedy first stage, then each
//! swap of the weakest scheduled user for the strongest remaining one.
//!
//! cargo run -p cellfree --example cesg_trace

use cellfree::harness::{draw_network, ScenarioConfig};
use cellfree::scheduler::{cesg_schedule, greedy_select, ChannelGrams, GramRateOracle, RateParams};

fn main() -> anyhow::Result<()> {
    let cfg = ScenarioConfig { ap_count: 8, user_count: 14, cluster_count: 1, scheduled_users: 4, ..ScenarioConfig::default() };
    let net = draw_network(&cfg, 2)?;
    let grams = ChannelGrams::new(&net.channel.g_hat, &net.channel.g_tilde)?;
    let params = RateParams { rho_f: cfg.rho_f(15.0), sigma_w2: 1.0, p_total: 1.0, precoder: cfg.precoder };
    let oracle = GramRateOracle::new(&grams, params);

    let greedy = greedy_select(&oracle, 4)?;
    println!("greedy set {:?}: {:.4} bits/s/Hz", greedy.users, greedy.rate);

    let trace = cesg_schedule(&oracle, &oracle, 4)?;
    for (j, set) in trace.stage_sets.iter().enumerate() {
        let swap = match j {
            0 => String::from("(greedy)"),
            _ => format!("-{} +{}", trace.excluded_users[j - 1], trace.new_users[j - 1]),
        };
        let mark = if j == trace.best_stage { "  <- best" } else { "" };
        println!("stage {:>2} {swap:>9}  {:?}  {:.4}{mark}", j + 1, set.users, set.rate);
    }
    Ok(())
}
