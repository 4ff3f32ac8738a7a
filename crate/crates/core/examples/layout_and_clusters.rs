//! Drops APs and users on the square and splits it into a 2x2 cluster grid.
//!
//! cargo run -p cellfree --example layout_and_clusters

use cellfree::topology::{generate_layout, partition_grid, write_layout_csv};

fn main() -> anyhow::Result<()> {
    let layout = generate_layout(64, 256, 400.0, 7)?;
    let partition = partition_grid(&layout, 4)?;

    println!("cluster  APs  users");
    for c in 0..partition.cluster_count {
        println!("{c:>7}  {:>3}  {:>5}", partition.ap_counts[c], partition.user_counts[c]);
    }

    let d = layout.distances();
    let nearest = d.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    println!("closest AP-user pair: {nearest:.2} m");

    // First few rows of the CSV the `dump-topology` subcommand writes.
    let mut buf = Vec::new();
    write_layout_csv(&layout, &partition, &mut buf)?;
    for line in String::from_utf8(buf)?.lines().take(4) {
        println!("{line}");
    }
    Ok(())
}
