//! Single-trial potential from a decoder's current message state.

use super::entropy_sample;
use crate::decoders::{hard, msg_c2v_value, MessageState, Variant};
use crate::graph::FactorGraph;

/// Per-trial values at one snapshot. `ber` is the fraction of variable nodes
/// whose marginal decides 1, i.e. wrong under the all-zero codeword.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SnapshotStats {
    pub gap: f64,
    pub avg_entropy: f64,
    pub ber: f64,
}

/// Scratch space reused across snapshots of the same graph.
#[derive(Debug, Clone, Default)]
pub struct SnapshotBuffers {
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    marginal: Vec<f64>,
}

impl SnapshotBuffers {
    pub fn new(graph: &FactorGraph) -> Self {
        let e = graph.edges.len();
        SnapshotBuffers {
            v2c: vec![0.0; e],
            c2v: vec![0.0; e],
            marginal: vec![0.0; graph.var_nodes.len()],
        }
    }

    /// Evaluate the four potential terms on the state's messages.
    pub fn stats(&mut self, state: &dyn MessageState) -> SnapshotStats {
        let graph = state.graph();
        if self.v2c.len() != graph.edges.len() || self.marginal.len() != graph.var_nodes.len() {
            *self = SnapshotBuffers::new(graph);
        }
        state.fill_messages(&mut self.v2c, &mut self.c2v);
        stats_from(graph, state.priors(), &self.v2c, &self.c2v, &mut self.marginal)
    }
}

fn stats_from(
    graph: &FactorGraph,
    priors: &[f64],
    v2c: &[f64],
    c2v: &[f64],
    marginal: &mut [f64],
) -> SnapshotStats {
    marginal.copy_from_slice(priors);
    for (e, edge) in graph.edges.iter().enumerate() {
        marginal[edge.var] += c2v[e];
    }
    let mut vn_sum = 0.0;
    let mut errors = 0usize;
    for &m in marginal.iter() {
        vn_sum += entropy_sample(m);
        errors += hard(m) as usize;
    }
    let mut edge_sum = 0.0;
    for e in 0..v2c.len() {
        edge_sum += entropy_sample(v2c[e]) - entropy_sample(v2c[e] + c2v[e]);
    }
    let check_sum: f64 = graph
        .check_nodes
        .iter()
        .map(|c| {
            entropy_sample(msg_c2v_value(c.edges.iter().map(|&e| v2c[e]), Variant::SumProduct))
        })
        .sum();
    let n = graph.var_nodes.len() as f64;
    SnapshotStats {
        gap: -(vn_sum + edge_sum - check_sum) / n,
        avg_entropy: vn_sum / n,
        ber: errors as f64 / n,
    }
}

/// Single-trial potential of a decoder state.
pub fn gap_snapshot(state: &dyn MessageState) -> f64 {
    SnapshotBuffers::new(state.graph()).stats(state).gap
}
