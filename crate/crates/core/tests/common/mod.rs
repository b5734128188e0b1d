//! Helpers and independent oracles shared by the integration tests.
#![allow(dead_code)]

use nmpgap::decoders::SchedulePolicy;
use nmpgap::graph::{build_ldpc_graph, load_alist, FactorGraph, LdpcCode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const N512: &str = include_str!("../../data/ldpc_3_6_n512.alist");
pub const N1024: &str = include_str!("../../data/ldpc_3_6_n1024.alist");

pub fn ldpc_graph(text: &str) -> FactorGraph {
    build_ldpc_graph(&load_alist(text).expect("shipped alist parses"))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random tree code: every new check joins one existing variable to
/// fresh ones, so the graph never closes a cycle.
pub fn random_tree(rng: &mut ChaCha8Rng, min_vars: usize, max_degree: usize) -> LdpcCode {
    let mut n = 1;
    let mut rows = Vec::new();
    while n < min_vars {
        let d = rng.random_range(2..=max_degree);
        let mut row = vec![rng.random_range(0..n)];
        row.extend(n..n + d - 1);
        n += d - 1;
        rows.push(row);
    }
    LdpcCode::new(n, rows).expect("tree rows are valid")
}

/// Uniformly random labels, each a directed edge of `graph`.
pub fn random_schedule(rng: &mut ChaCha8Rng, graph: &FactorGraph, len: usize) -> SchedulePolicy {
    SchedulePolicy { labels: (0..len).map(|_| rng.random_range(1..=graph.n_labels())).collect() }
}

/// `E[log2(1 + e^-L)]` for `L ~ N(m, 2m)` by the trapezoid rule.
pub fn awgn_entropy_quadrature(sigma: f64) -> f64 {
    let m = 2.0 / (sigma * sigma);
    let sd = (2.0 * m).sqrt();
    let (lo, hi, steps) = (m - 12.0 * sd, m + 12.0 * sd, 200_000);
    let h = (hi - lo) / steps as f64;
    let f = |x: f64| {
        let z = (x - m) / sd;
        let pdf = (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
        let loss = if x > 0.0 { (-x).exp().ln_1p() } else { -x + x.exp().ln_1p() };
        pdf * loss / std::f64::consts::LN_2
    };
    let inner: f64 = (1..steps).map(|i| f(lo + i as f64 * h)).sum();
    h * (inner + 0.5 * (f(lo) + f(hi)))
}

/// Gaussian upper tail by the same trapezoid rule.
pub fn q_quadrature(x: f64) -> f64 {
    let (hi, steps) = (x + 40.0, 400_000);
    let h = (hi - x) / steps as f64;
    let f = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let inner: f64 = (1..steps).map(|i| f(x + i as f64 * h)).sum();
    h * (inner + 0.5 * (f(x) + f(hi)))
}
