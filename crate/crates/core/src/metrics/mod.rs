//! The decoding potential (GAP) and its companions along a message schedule:
//! Monte Carlo estimates from live decoders, exact density evolution on
//! trees, and the Gaussian approximation.

mod analytic;
mod curve;
mod mc;
mod potential;
mod snapshot;

pub use analytic::{
    evaluate_curve, evaluate_curve_de, evaluate_curve_ga, evaluate_curve_with, sc_gap_trajectory,
    tree_conditional_entropy, Evaluator, ScStep, ScTrajectory, DECREASE_TOL,
};
pub use curve::{Accum, CurvePoint, GapCurve, CSV_HEADER};
pub use mc::{ber_blers, estimate_curve_mc, simulate_bler, BerRow, BerTable, McConfig};
pub use potential::{DeAlgebra, GaAlgebra, MessageAlgebra, Potential, StepFlags};
pub use snapshot::{gap_snapshot, SnapshotBuffers, SnapshotStats};

use crate::graph::{FactorGraph, VarNodeKind};
use crate::clamp_llr;

/// Per-sample entropy `log2(1 + e^-x)` with `x` clamped to `±L_MAX`. Its
/// mean over draws from a symmetric density is that density's entropy.
pub fn entropy_sample(llr: f64) -> f64 {
    crate::density::log2_1p_exp_neg(clamp_llr(llr))
}

/// Prior entropy of every variable node given the channel entropy: channel
/// nodes get `h_channel`, frozen bits 0, every other node 1.
pub fn prior_entropies(graph: &FactorGraph, h_channel: f64) -> Vec<f64> {
    graph
        .var_nodes
        .iter()
        .map(|v| match (v.kind, v.channel) {
            (VarNodeKind::FrozenBit, _) => 0.0,
            (_, Some(_)) => h_channel,
            _ => 1.0,
        })
        .collect()
}

/// Potential before any message: `(#checks - sum of prior entropies) / N`.
pub fn gap_initial(graph: &FactorGraph, entropies: &[f64]) -> f64 {
    let n = graph.var_nodes.len() as f64;
    (graph.check_nodes.len() as f64 - entropies.iter().sum::<f64>()) / n
}

/// `Q(x)`, the standard normal upper tail.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::L_MAX;
    use crate::graph::{build_ldpc_graph, LdpcCode};

    #[test]
    fn sample_endpoints() {
        assert_eq!(entropy_sample(0.0), 1.0);
        assert!(entropy_sample(L_MAX) < 1e-17);
        assert!(entropy_sample(1e9) < 1e-17);
        assert!((entropy_sample(-1e9) - entropy_sample(-L_MAX)).abs() < 1e-12);
    }

    #[test]
    fn initial_value_cases() {
        let code = LdpcCode::new(4, vec![vec![0, 1, 2], vec![1, 2, 3]]).unwrap();
        let g = build_ldpc_graph(&code);
        assert!((gap_initial(&g, &prior_entropies(&g, 0.0)) - 0.5).abs() < 1e-15);
        assert!((gap_initial(&g, &prior_entropies(&g, 1.0)) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn q_tail() {
        assert!((q_function(0.0) - 0.5).abs() < 1e-15);
        assert!((q_function(1.0) - 0.158_655_253_931_457_05).abs() < 1e-14);
    }
}
