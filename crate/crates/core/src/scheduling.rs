//! Schedule quality as the summed potential over a message budget, and a
//! greedy search for schedules that lower the potential quickly.

use crate::channel::ChannelSpec;
use crate::decoders::SchedulePolicy;
use crate::density::{Grid, LDensity};
use crate::error::{invalid, Error, Result};
use crate::graph::FactorGraph;
use crate::metrics::{DeAlgebra, Evaluator, GaAlgebra, MessageAlgebra, Potential};

fn tau_with<A: MessageAlgebra>(mut p: Potential<A>, labels: &[usize]) -> Result<f64> {
    let mut sum = 0.0;
    for &l in labels {
        p.send(l)?;
        sum += p.gap();
    }
    Ok(sum)
}

/// Exact densities on the standard grid; trees only.
fn de_start<'g>(graph: &'g FactorGraph, spec: &ChannelSpec) -> Result<Potential<'g, DeAlgebra>> {
    if !graph.is_tree() {
        return Err(Error::NotATree);
    }
    let grid = Grid::standard();
    let ch = LDensity::quantize_awgn(&grid, spec);
    Potential::with_channel(graph, DeAlgebra::new(grid), ch)
}

/// Sum of the potential after each of the first `horizon` messages.
pub fn tau(
    graph: &FactorGraph,
    spec: &ChannelSpec,
    schedule: &SchedulePolicy,
    horizon: usize,
    evaluator: Evaluator,
) -> Result<f64> {
    if horizon > schedule.len() {
        return Err(Error::HorizonTooLong { horizon, len: schedule.len() });
    }
    schedule.validate(graph)?;
    let labels = &schedule.labels[..horizon];
    match evaluator {
        Evaluator::Ga => tau_with(Potential::with_channel(graph, GaAlgebra, spec.u0())?, labels),
        Evaluator::De => tau_with(de_start(graph, spec)?, labels),
    }
}

fn greedy_with<A: MessageAlgebra>(mut p: Potential<A>, horizon: usize) -> Result<SchedulePolicy> {
    let graph = p.graph();
    let nc = graph.check_nodes.len();
    if nc == 0 {
        return invalid("graph has no check nodes");
    }
    // Checks sharing a variable node with each check, itself included.
    let neighbours: Vec<Vec<usize>> = (0..nc)
        .map(|c| {
            let mut ns: Vec<usize> = graph.check_nodes[c]
                .edges
                .iter()
                .flat_map(|&e| graph.var_nodes[graph.edges[e].var].edges.iter().map(|&x| graph.edges[x].check))
                .collect();
            ns.sort_unstable();
            ns.dedup();
            ns
        })
        .collect();
    let mut score: Vec<f64> = (0..nc).map(|c| p.batch_gain(c)).collect();
    let mut labels = Vec::with_capacity(horizon);
    while labels.len() < horizon {
        let mut best = 0;
        for c in 1..nc {
            if score[c] > score[best] {
                best = c;
            }
        }
        for l in SchedulePolicy::check_batch(graph, best) {
            if labels.len() == horizon {
                break;
            }
            p.send(l)?;
            labels.push(l);
        }
        for &c in &neighbours[best] {
            score[c] = p.batch_gain(c);
        }
    }
    Ok(SchedulePolicy { labels })
}

/// Repeatedly run the check batch with the largest predicted potential
/// decrease per message, until `horizon` messages are scheduled. Ties go to
/// the lowest check index; the last batch may be cut short.
pub fn greedy_schedule(
    graph: &FactorGraph,
    spec: &ChannelSpec,
    horizon: usize,
    evaluator: Evaluator,
) -> Result<SchedulePolicy> {
    if horizon == 0 {
        return invalid("horizon must be at least 1");
    }
    match evaluator {
        Evaluator::Ga => greedy_with(Potential::with_channel(graph, GaAlgebra, spec.u0())?, horizon),
        Evaluator::De => greedy_with(de_start(graph, spec)?, horizon),
    }
}
