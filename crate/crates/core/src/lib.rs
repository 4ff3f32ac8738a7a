//! Downlink multiuser scheduling for cell-free (CF) and clustered cell-free
//! (CLCF) massive MIMO networks.
//!
//! The crate is organised bottom-up:
//!
//! - [`topology`]: random AP/user layouts and the square-grid cluster partition.
//! - [`channel`]: three-slope path loss with conditional shadowing, Rayleigh
//!   small-scale fading and the scaled imperfect-CSI split.
//! - [`precoding`]: normalized MMSE (regularized ZF) and ZF weights with equal
//!   power loading.
//! - [`rate`]: log-det sum-rate upper bounds for the network-wide and the
//!   clustered systems.
//! - [`scheduler`]: greedy selection, the enhanced subset greedy (C-ESG)
//!   refinement, exhaustive search and simple baselines.
//! - [`complexity`]: closed-form FLOP and signaling-load counts.
//! - [`harness`]: scenario configuration, seeded Monte Carlo trials, SNR
//!   sweeps and CSV output.
//!
//! Runnable walkthroughs for each capability live in the crate's `examples/`
//! directory (`cargo run -p cellfree --example <name>`).

pub mod channel;
pub mod complexity;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod precoding;
pub mod rate;
pub mod scheduler;
pub mod topology;

pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};
