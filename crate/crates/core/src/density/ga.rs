//! Gaussian approximation: a symmetric message density is summarized by its
//! mean `m`, with variance `2m`.
//!
//! Expectations over `N(m, 2m)` use 64-point Gauss–Hermite for small means.
//! For larger means the integrand of interest lives near `u = 0`, far in the
//! Gaussian's tail, so the density is tilted onto a centred Gaussian
//! (`N(u; m, 2m) = N(u; 0, 2m) e^{u/2 - m/4}`) and the smooth remainder is
//! integrated with composite Gauss–Legendre. Both rules agree to ~1e-10 at
//! the switch point and keep relative accuracy far into the tail.

use super::quad::{gauss_hermite, gauss_legendre};
use crate::error::{invalid, Result};
use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

/// Largest mean representable by [`phi_inv`].
pub const MEAN_CAP: f64 = 500.0;
const SWITCH: f64 = 2.0;
const TILT_HALF_WIDTH: f64 = 88.0;
const TILT_PANEL: f64 = 4.0;

struct Rules {
    gh_z: Vec<f64>,
    gh_w: Vec<f64>,
    /// Tilted nodes with pre-multiplied weights for phi and entropy.
    tilt_u2: Vec<f64>,
    tilt_phi: Vec<f64>,
    tilt_ent: Vec<f64>,
}

fn rules() -> &'static Rules {
    static RULES: OnceLock<Rules> = OnceLock::new();
    RULES.get_or_init(|| {
        let (gh_z, gh_w) = gauss_hermite(64);
        let gh_w = gh_w.iter().map(|w| w / PI.sqrt()).collect();
        let (gx, gw) = gauss_legendre(16);
        let (mut tilt_u2, mut tilt_phi, mut tilt_ent) = (vec![], vec![], vec![]);
        let panels = (2.0 * TILT_HALF_WIDTH / TILT_PANEL).round() as usize;
        let h = TILT_PANEL / 2.0;
        for p in 0..panels {
            let c = -TILT_HALF_WIDTH + (p as f64 + 0.5) * TILT_PANEL;
            for (x, w) in gx.iter().zip(&gw) {
                let u = c + h * x;
                tilt_u2.push(u * u);
                tilt_phi.push(h * w / (u / 2.0).cosh());
                tilt_ent.push(h * w * (u / 2.0).exp() * log2_1p_exp_neg(u));
            }
        }
        Rules { gh_z, gh_w, tilt_u2, tilt_phi, tilt_ent }
    })
}

/// `log2(1 + e^{-u})` without overflow.
#[inline]
pub fn log2_1p_exp_neg(u: f64) -> f64 {
    if u > 0.0 {
        (-u).exp().ln_1p() / LN_2
    } else {
        (-u + u.exp().ln_1p()) / LN_2
    }
}

#[inline]
fn logistic_twice(u: f64) -> f64 {
    // 2 / (1 + e^u)
    if u > 0.0 {
        let e = (-u).exp();
        2.0 * e / (1.0 + e)
    } else {
        2.0 / (1.0 + u.exp())
    }
}

fn gh_expect(m: f64, f: impl Fn(f64) -> f64) -> f64 {
    let r = rules();
    let sd = 2.0 * m.sqrt();
    r.gh_z.iter().zip(&r.gh_w).map(|(z, w)| w * f(m + sd * z)).sum()
}

fn tilted_expect(m: f64, weights: &[f64]) -> f64 {
    let r = rules();
    let inv = -1.0 / (4.0 * m);
    let s: f64 = r.tilt_u2.iter().zip(weights).map(|(u2, w)| w * (u2 * inv).exp()).sum();
    (-m / 4.0).exp() / (4.0 * PI * m).sqrt() * s
}

/// `E[1 - tanh(u/2)]` for `u ~ N(x, 2x)`; 1 at 0, 0 at infinity.
///
/// # Panics
/// On negative or NaN input. See [`try_phi`].
pub fn phi(x: f64) -> f64 {
    assert!(x >= 0.0, "phi needs a nonnegative mean, got {x}");
    if x == 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else if x <= SWITCH {
        gh_expect(x, logistic_twice)
    } else {
        tilted_expect(x, &rules().tilt_phi)
    }
}

pub fn try_phi(x: f64) -> Result<f64> {
    if x >= 0.0 {
        Ok(phi(x))
    } else {
        invalid(format!("phi needs a nonnegative mean, got {x}"))
    }
}

/// Inverse of [`phi`] on `[0, MEAN_CAP]`, accurate to 1e-10.
///
/// Values below `phi(MEAN_CAP)` map to `MEAN_CAP`. The root is found in the
/// log domain, where `phi` is close to linear, by Illinois-style false
/// position with a bisection fallback.
pub fn phi_inv(y: f64) -> Result<f64> {
    if !(y > 0.0 && y <= 1.0) {
        return invalid(format!("phi_inv needs y in (0, 1], got {y}"));
    }
    if y == 1.0 {
        return Ok(0.0);
    }
    let target = y.ln();
    let f = |x: f64| phi(x).ln() - target;
    let (mut a, mut b) = (0.0, MEAN_CAP);
    let (mut fa, mut fb) = (f(a), f(b));
    if fb >= 0.0 {
        return Ok(MEAN_CAP);
    }
    let mut side = 0i8;
    for _ in 0..200 {
        if b - a < 1e-11 {
            break;
        }
        let mut x = b - fb * (b - a) / (fb - fa);
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx > 0.0 {
            if side == 1 {
                fb *= 0.5;
            }
            a = x;
            fa = fx;
            side = 1;
        } else {
            if side == -1 {
                fa *= 0.5;
            }
            b = x;
            fb = fx;
            side = -1;
        }
        // Converged in value: the next secant step would not move x measurably.
        if (fx.abs() < 1e-15) || (b - a) < 1e-11 {
            return Ok(x);
        }
    }
    Ok(0.5 * (a + b))
}

/// Variable-node update: sums of means, infinity propagates.
pub fn ga_v2c(u0: f64, incoming: &[f64]) -> f64 {
    u0 + incoming.iter().sum::<f64>()
}

/// Check-node update `phi_inv(1 - prod(1 - phi(m)))`.
///
/// No inputs gives 0. A zero input gives 0. Infinite inputs drop out of the
/// product, and if every input is infinite the result is infinite. Results
/// never exceed the smallest input; when the product is closer to 1 than
/// `phi(MEAN_CAP)` resolves, the large-mean asymptote
/// `m_min - 4 ln Σ e^{-(m - m_min)/4}` is used instead.
pub fn ga_c2v(incoming: &[f64]) -> f64 {
    if incoming.is_empty() || incoming.iter().any(|&m| m == 0.0) {
        return 0.0;
    }
    let finite = || incoming.iter().copied().filter(|m| m.is_finite());
    let Some(m_min) = finite().min_by(f64::total_cmp) else {
        return f64::INFINITY;
    };
    if finite().count() == 1 {
        return m_min;
    }
    let prod: f64 = finite().map(|m| 1.0 - phi(m)).product();
    let y = 1.0 - prod;
    if y > 0.0 && y >= phi(MEAN_CAP) {
        phi_inv(y).expect("y in range").min(m_min)
    } else {
        let sum: f64 = finite().map(|m| (-(m - m_min) / 4.0).exp()).sum();
        (m_min - 4.0 * sum.ln()).max(0.0)
    }
}

/// Entropy (bits) of the symmetric Gaussian density with mean `m`.
pub fn ga_entropy(m: f64) -> f64 {
    if m <= 0.0 {
        1.0
    } else if m.is_infinite() {
        0.0
    } else if m <= SWITCH {
        gh_expect(m, log2_1p_exp_neg)
    } else {
        tilted_expect(m, &rules().tilt_ent)
    }
}

/// Entropy of the check-node combination of `inputs`, via duality.
///
/// Two inputs use `H(a) + H(b) - H(a ⊛ b)` exactly; more inputs fold all but
/// the first into one Gaussian through [`ga_c2v`].
pub fn ga_check_entropy(inputs: &[f64]) -> f64 {
    if inputs.iter().any(|&m| m <= 0.0) {
        return 1.0;
    }
    let live: Vec<f64> = inputs.iter().copied().filter(|m| m.is_finite()).collect();
    match live.len() {
        0 => 0.0,
        1 => ga_entropy(live[0]),
        _ => {
            let first = live[0];
            let rest = ga_c2v(&live[1..]);
            ga_entropy(first) + ga_entropy(rest) - ga_entropy(first + rest)
        }
    }
}
