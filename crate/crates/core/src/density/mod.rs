//! L-densities, their convolutions, and the Gaussian approximation.

pub mod ga;
mod ldensity;
mod quad;

pub use ga::{ga_c2v, ga_check_entropy, ga_entropy, ga_v2c, log2_1p_exp_neg, phi, phi_inv, try_phi};
pub use ldensity::{Grid, LDensity, PointMass};
