//! FLOP and signaling counts of the network-wide and clustered schedulers.
//!
//! cargo run -p cellfree --example complexity_report

use cellfree::complexity::{write_report_csv, write_table_comparison, CostReport};

fn main() -> anyhow::Result<()> {
    let reports = [16, 32, 64, 128]
        .iter()
        .map(|&m| CostReport::equal(m, 4 * m, 4))
        .collect::<cellfree::Result<Vec<_>>>()?;
    write_report_csv(&reports, std::io::stdout())?;
    for r in &reports {
        println!("M={:>3}: network-wide / clustered FLOPs = {:.1}", r.m, r.flops_cf as f64 / r.flops_clustered as f64);
    }

    println!();
    // The small network of the exhaustive comparison; the cluster
    // polynomial is negative there.
    write_table_comparison(&CostReport::equal(64, 16, 4)?, std::io::stdout())?;
    Ok(())
}
