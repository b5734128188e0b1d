//! Polar and LDPC message-passing decoders with per-message cost accounting
//! and a potential-function view of decoding progress.
//!
//! Every decoder emits one event per soft message on a directed edge of the
//! code's factor graph. The potential tracked along that stream starts at
//! `1 - R - mean channel entropy`, decreases with each useful message, and
//! bottoms out at `-H(X|Y)/N` on cycle-free graphs.

pub mod channel;
pub mod decoders;
pub mod density;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod scheduling;

pub use error::{Error, Result};

/// Global LLR clamp. `tanh(L_MAX / 2)` rounds to 1 in double precision.
pub const L_MAX: f64 = 40.0;

/// Clamp an LLR into `[-L_MAX, L_MAX]`, mapping NaN to 0.
#[inline]
pub fn clamp_llr(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(-L_MAX, L_MAX)
    }
}
