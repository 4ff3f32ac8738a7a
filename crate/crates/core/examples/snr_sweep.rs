//! A desk-scale SNR sweep of both systems, written as CSV to stdout.
//!
//! cargo run --release -p cellfree --example snr_sweep [trials]

use cellfree::harness::{run_sweep, write_csv, write_metadata, ScenarioConfig};

fn main() -> anyhow::Result<()> {
    let trials = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(4);
    let cfg = ScenarioConfig {
        ap_count: 32,
        user_count: 96,
        scheduled_users: 16,
        snr_db: vec![-10.0, 0.0, 10.0, 20.0],
        trials,
        ..ScenarioConfig::default()
    };
    let res = run_sweep(&cfg)?;
    write_csv(&res, std::io::stdout())?;
    write_metadata(&res, std::io::stderr())?;
    Ok(())
}
