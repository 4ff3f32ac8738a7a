//! Large-scale gains from the three-slope path loss with shadowing, Rayleigh
//! fading on top, and the estimate/error split of imperfect CSI.
//!
//! cargo run -p cellfree --example channel_model

use cellfree::channel::{
    attenuation_constant, draw_channel, large_scale_matrix, pathloss_db, reference_gain, split_csi,
    LargeScaleParams,
};
use cellfree::topology::generate_layout;

fn main() -> anyhow::Result<()> {
    let params = LargeScaleParams::default();
    let att = attenuation_constant(&params)?;
    println!("attenuation constant: {att:.2} dB");
    for d in [5.0, 10.0, 30.0, 50.0, 100.0, 300.0] {
        println!("  path loss at {d:>5} m: {:8.2} dB", pathloss_db(d, att, &params));
    }

    let layout = generate_layout(16, 8, 400.0, 3)?;
    let mut beta = large_scale_matrix(&layout, &params, 11)?;
    // Gains relative to the unshadowed gain at 50 m.
    beta /= reference_gain(&params, 50.0)?;
    let g = draw_channel(&beta, 12);
    let csi = split_csi(&g, 0.95f64.sqrt())?;

    let user = 0;
    println!("user {user}: strongest normalized gain {:.3e}", beta.column(user).max());
    println!(
        "||g||^2 = {:.4}, ||g_hat||^2 = {:.4}, ||g_tilde||^2 = {:.4} (gamma = {:.4}, alpha = {:.4})",
        csi.g.column(user).norm_squared(),
        csi.g_hat.column(user).norm_squared(),
        csi.g_tilde.column(user).norm_squared(),
        csi.gamma,
        csi.alpha
    );
    Ok(())
}
