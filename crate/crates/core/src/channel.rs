//! BPSK over AWGN under the all-zero codeword.

use crate::clamp_llr;
use crate::error::{invalid, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub sigma: f64,
}

impl ChannelSpec {
    pub fn new(sigma: f64) -> Result<Self> {
        if sigma > 0.0 && sigma.is_finite() {
            Ok(Self { sigma })
        } else {
            invalid(format!("sigma must be positive and finite, got {sigma}"))
        }
    }

    /// Mean of the channel LLR, `2/σ²`. Its variance is twice this.
    pub fn u0(&self) -> f64 {
        2.0 / (self.sigma * self.sigma)
    }
}

/// `σ² = 1 / (2 R 10^{EbN0/10})`.
pub fn snr_to_sigma(ebn0_db: f64, rate: f64) -> Result<ChannelSpec> {
    if !(rate > 0.0 && rate <= 1.0) {
        return invalid(format!("rate must lie in (0, 1], got {rate}"));
    }
    ChannelSpec::new((1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))).sqrt())
}

/// Independent stream for one Monte Carlo trial; the trial index selects the
/// ChaCha stream so trials can be generated in any order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Fill `out` with clamped channel LLRs.
pub fn fill_llrs(out: &mut [f64], spec: &ChannelSpec, rng: &mut ChaCha8Rng) {
    let u0 = spec.u0();
    let sd = (2.0 * u0).sqrt();
    match Normal::new(u0, sd) {
        Ok(dist) => out.iter_mut().for_each(|x| *x = clamp_llr(dist.sample(rng))),
        // Mean overflowed: noiseless for every practical purpose.
        Err(_) => out.fill(crate::L_MAX),
    }
}

/// LLRs for one trial of the all-zero codeword.
pub fn transmit_trial(n: usize, spec: &ChannelSpec, seed: u64, trial: u64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    fill_llrs(&mut out, spec, &mut trial_rng(seed, trial));
    out
}

/// LLRs of the all-zero codeword; identical seeds give identical vectors.
pub fn transmit_all_zero(n: usize, spec: &ChannelSpec, seed: u64) -> Vec<f64> {
    transmit_trial(n, spec, seed, 0)
}
