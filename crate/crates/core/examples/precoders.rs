//! Normalized MMSE and ZF weights with equal power loading.
//!
//! cargo run -p cellfree --example precoders

use cellfree::channel::draw_channel;
use cellfree::precoding::{equal_power_precoder, PrecoderKind};
use nalgebra::DMatrix;

fn main() -> anyhow::Result<()> {
    let h = draw_channel(&DMatrix::from_element(8, 4, 1.0), 5);
    for kind in [PrecoderKind::Mmse, PrecoderKind::Zf] {
        for rho in [0.1, 10.0, 1e4] {
            let p = equal_power_precoder(kind, &h, rho, 1.0, 1.0)?;
            // Effective channel Hᵀ·P; ZF makes it diagonal.
            let eff = h.transpose() * &p.matrix;
            let leak: f64 = (0..4)
                .flat_map(|i| (0..4).map(move |j| (i, j)))
                .filter(|(i, j)| i != j)
                .map(|(i, j)| eff[(i, j)].norm_sqr())
                .sum();
            let useful: f64 = (0..4).map(|i| eff[(i, i)].norm_sqr()).sum();
            println!(
                "{kind:>4} rho={rho:>7}: power {:.6}, useful {useful:8.4}, leakage {leak:.3e}",
                p.transmit_power()
            );
        }
    }
    let w = equal_power_precoder(PrecoderKind::Mmse, &h, 1.0, 1.0, 2.0)?;
    let norms: Vec<String> = w.weights.column_iter().map(|c| format!("{:.3}", c.norm())).collect();
    println!("MMSE weight column norms: {}", norms.join(" "));
    println!("first entry of P: {:.4}", w.matrix[(0, 0)]);
    Ok(())
}
