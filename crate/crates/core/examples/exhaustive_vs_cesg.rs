//! Small clustered network (M=64, K=16, n=8, C=4) where every cluster can be
//! searched exhaustively: mean rates of greedy, C-ESG and exhaustive search.
//!
//! cargo run --release -p cellfree --example exhaustive_vs_cesg

use cellfree::harness::{run_sweep, Mode, ScenarioConfig};
use cellfree::scheduler::{binomial, SchedulerKind, Scope};

fn main() -> anyhow::Result<()> {
    println!("subsets of 8 out of 16 users: {}", binomial(16, 8));
    let cfg = ScenarioConfig {
        ap_count: 64,
        user_count: 16,
        cluster_count: 4,
        scheduled_users: 8,
        trials: 200,
        snr_db: vec![-10.0, 0.0, 10.0, 20.0],
        schedulers: vec![SchedulerKind::Greedy, SchedulerKind::Cesg, SchedulerKind::Exhaustive],
        mode: Mode::Clcf,
        ..ScenarioConfig::default()
    };
    let res = run_sweep(&cfg)?;
    println!("snr_db  greedy   cesg     exhaustive  cesg/exhaustive");
    for &v in &cfg.snr_db {
        let m = |s| res.mean(Scope::Clcf, s, v).unwrap();
        let (g, c, x) = (m(SchedulerKind::Greedy), m(SchedulerKind::Cesg), m(SchedulerKind::Exhaustive));
        println!("{v:>6}  {g:7.3}  {c:7.3}  {x:10.3}  {:.4}", c / x);
    }
    Ok(())
}
