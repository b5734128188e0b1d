//! Incremental potential bookkeeping over per-edge message densities.
//!
//! The potential is `-(1/N)` times
//! `Σ_vn H(prior ⊛ all C2V) + Σ_e H(V2C) - Σ_check H(⊞ all V2C) - Σ_e H(V2C ⊛ C2V)`.
//! Each term is cached, so one message update touches a handful of terms.

use std::sync::Arc;

use crate::density::{ga_c2v, ga_check_entropy, ga_entropy, Grid, LDensity, PointMass};
use crate::error::Result;
use crate::graph::{Dir, FactorGraph, VarNodeKind};

/// The operations density evolution needs from a message representation.
pub trait MessageAlgebra {
    type Msg: Clone;
    /// No information.
    fn zero(&self) -> Self::Msg;
    /// Perfect knowledge.
    fn infinity(&self) -> Self::Msg;
    /// Variable-node combination.
    fn vn(&self, a: &Self::Msg, b: &Self::Msg) -> Self::Msg;
    /// Check-node combination of one or more inputs.
    fn cn(&self, inputs: &[&Self::Msg]) -> Self::Msg;
    fn entropy(&self, m: &Self::Msg) -> f64;
    /// Entropy of the check-node combination of all inputs.
    fn check_entropy(&self, inputs: &[&Self::Msg]) -> f64 {
        self.entropy(&self.cn(inputs))
    }
    /// Check term after input `i` of `inputs` changes to `new`, given the
    /// current term. Moves it by `ΔH(x) - ΔH(x ⊛ R)` with `R` the combination
    /// of the other inputs, so a V2C update whose reverse message is current
    /// leaves the potential unchanged up to rounding even where the check
    /// combination is only approximate.
    fn check_step(&self, old_term: f64, inputs: &[&Self::Msg], i: usize, new: &Self::Msg) -> f64 {
        let others: Vec<&Self::Msg> = inputs.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &m)| m).collect();
        let r = if others.is_empty() { self.infinity() } else { self.cn(&others) };
        let old = inputs[i];
        old_term + (self.entropy(new) - self.entropy(&self.vn(new, &r)))
            - (self.entropy(old) - self.entropy(&self.vn(old, &r)))
    }
    fn error_probability(&self, m: &Self::Msg) -> f64;
    fn same(&self, a: &Self::Msg, b: &Self::Msg) -> bool;
}

/// Symmetric Gaussian messages carried by their mean.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaAlgebra;

impl MessageAlgebra for GaAlgebra {
    type Msg = f64;
    fn zero(&self) -> f64 {
        0.0
    }
    fn infinity(&self) -> f64 {
        f64::INFINITY
    }
    fn vn(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn cn(&self, inputs: &[&f64]) -> f64 {
        let v: Vec<f64> = inputs.iter().map(|&&m| m).collect();
        ga_c2v(&v)
    }
    fn entropy(&self, m: &f64) -> f64 {
        ga_entropy(*m)
    }
    /// Uses `H(a ⊞ R) = H(a) + H(R) - H(a ⊛ R)`, which avoids inverting `φ`
    /// near saturation.
    fn check_entropy(&self, inputs: &[&f64]) -> f64 {
        let v: Vec<f64> = inputs.iter().map(|&&m| m).collect();
        ga_check_entropy(&v)
    }
    fn error_probability(&self, m: &f64) -> f64 {
        if m.is_infinite() {
            0.0
        } else {
            super::q_function((m.max(0.0) / 2.0).sqrt())
        }
    }
    fn same(&self, a: &f64, b: &f64) -> bool {
        a == b
    }
}

/// Quantized symmetric L-densities on a shared grid.
#[derive(Debug, Clone)]
pub struct DeAlgebra {
    pub grid: Arc<Grid>,
}

impl DeAlgebra {
    pub fn new(grid: Arc<Grid>) -> Self {
        DeAlgebra { grid }
    }
}

impl MessageAlgebra for DeAlgebra {
    type Msg = LDensity;
    fn zero(&self) -> LDensity {
        LDensity::point_mass(&self.grid, PointMass::Zero)
    }
    fn infinity(&self) -> LDensity {
        LDensity::point_mass(&self.grid, PointMass::Infinity)
    }
    fn vn(&self, a: &LDensity, b: &LDensity) -> LDensity {
        a.vn_convolve(b).expect("densities share one grid")
    }
    fn cn(&self, inputs: &[&LDensity]) -> LDensity {
        let Some((first, rest)) = inputs.split_first() else {
            return self.infinity();
        };
        rest.iter().fold((*first).clone(), |acc, d| acc.cn_convolve(d).expect("densities share one grid"))
    }
    fn entropy(&self, m: &LDensity) -> f64 {
        m.entropy()
    }
    fn error_probability(&self, m: &LDensity) -> f64 {
        m.error_probability()
    }
    fn same(&self, a: &LDensity, b: &LDensity) -> bool {
        a == b
    }
}

/// What one message update did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepFlags {
    /// The message on the edge changed.
    pub changed: bool,
    /// The message in the opposite direction on the same edge differs from
    /// what its node would send now, i.e. the node aggregate moved.
    pub reverse_stale: bool,
    /// Change of the potential (negative is progress).
    pub delta: f64,
}

/// Per-edge densities plus cached potential terms.
#[derive(Debug, Clone)]
pub struct Potential<'g, A: MessageAlgebra> {
    graph: &'g FactorGraph,
    alg: A,
    prior: Vec<A::Msg>,
    v2c: Vec<A::Msg>,
    c2v: Vec<A::Msg>,
    vn_term: Vec<f64>,
    err: Vec<f64>,
    edge_term: Vec<f64>,
    check_term: Vec<f64>,
    pair_term: Vec<f64>,
    /// `Σ vn + Σ edge - Σ check - Σ pair`.
    total: f64,
    nmp: u64,
}

impl<'g, A: MessageAlgebra> Potential<'g, A> {
    /// Every message starts as no information.
    pub fn new(graph: &'g FactorGraph, alg: A, prior: Vec<A::Msg>) -> Result<Self> {
        if prior.len() != graph.var_nodes.len() {
            return Err(crate::Error::LengthMismatch { expected: graph.var_nodes.len(), got: prior.len() });
        }
        let ne = graph.edges.len();
        let zero = alg.zero();
        let mut p = Potential {
            graph,
            prior,
            v2c: vec![zero.clone(); ne],
            c2v: vec![zero.clone(); ne],
            vn_term: vec![0.0; graph.var_nodes.len()],
            err: vec![0.0; graph.var_nodes.len()],
            edge_term: vec![0.0; ne],
            check_term: vec![0.0; graph.check_nodes.len()],
            pair_term: vec![0.0; ne],
            total: 0.0,
            nmp: 0,
            alg,
        };
        for v in 0..graph.var_nodes.len() {
            let m = p.marginal(v);
            p.vn_term[v] = p.alg.entropy(&m);
            p.err[v] = p.alg.error_probability(&m);
        }
        let h0 = p.alg.entropy(&zero);
        p.edge_term.fill(h0);
        p.pair_term.fill(h0);
        for c in 0..graph.check_nodes.len() {
            p.check_term[c] = p.check_value(c);
        }
        p.total = p.vn_term.iter().sum::<f64>() + p.edge_term.iter().sum::<f64>()
            - p.check_term.iter().sum::<f64>()
            - p.pair_term.iter().sum::<f64>();
        Ok(p)
    }

    /// Channel nodes start from `channel`, frozen bits from perfect
    /// knowledge, all other nodes from no information.
    pub fn with_channel(graph: &'g FactorGraph, alg: A, channel: A::Msg) -> Result<Self> {
        let prior = graph
            .var_nodes
            .iter()
            .map(|v| match (v.kind, v.channel) {
                (VarNodeKind::FrozenBit, _) => alg.infinity(),
                (_, Some(_)) => channel.clone(),
                _ => alg.zero(),
            })
            .collect();
        Self::new(graph, alg, prior)
    }

    pub fn graph(&self) -> &'g FactorGraph {
        self.graph
    }

    pub fn algebra(&self) -> &A {
        &self.alg
    }

    pub fn nmp(&self) -> u64 {
        self.nmp
    }

    pub fn gap(&self) -> f64 {
        -self.total / self.graph.var_nodes.len() as f64
    }

    pub fn avg_entropy(&self) -> f64 {
        self.vn_term.iter().sum::<f64>() / self.graph.var_nodes.len() as f64
    }

    /// Mean error probability of the node marginals.
    pub fn ber(&self) -> f64 {
        self.err.iter().sum::<f64>() / self.graph.var_nodes.len() as f64
    }

    pub fn v2c(&self, e: usize) -> &A::Msg {
        &self.v2c[e]
    }

    pub fn c2v(&self, e: usize) -> &A::Msg {
        &self.c2v[e]
    }

    /// Prior combined with every incoming C2V message.
    pub fn marginal(&self, v: usize) -> A::Msg {
        self.graph.var_nodes[v]
            .edges
            .iter()
            .fold(self.prior[v].clone(), |acc, &e| self.alg.vn(&acc, &self.c2v[e]))
    }

    fn check_value(&self, c: usize) -> f64 {
        let inputs: Vec<&A::Msg> = self.graph.check_nodes[c].edges.iter().map(|&e| &self.v2c[e]).collect();
        self.alg.check_entropy(&inputs)
    }

    /// V2C message the variable node would send on `e` now.
    pub fn compute_v2c(&self, e: usize) -> A::Msg {
        let v = self.graph.edges[e].var;
        self.graph.var_nodes[v]
            .edges
            .iter()
            .filter(|&&x| x != e)
            .fold(self.prior[v].clone(), |acc, &x| self.alg.vn(&acc, &self.c2v[x]))
    }

    /// V2C message built from the incoming C2V messages alone, as if the
    /// node's own prior were not yet known.
    pub fn compute_v2c_without_prior(&self, e: usize) -> A::Msg {
        let v = self.graph.edges[e].var;
        self.graph.var_nodes[v]
            .edges
            .iter()
            .filter(|&&x| x != e)
            .fold(self.alg.zero(), |acc, &x| self.alg.vn(&acc, &self.c2v[x]))
    }

    /// C2V message the check node would send on `e` now. A check with no
    /// other inputs forces its only neighbour to 0.
    pub fn compute_c2v(&self, e: usize) -> A::Msg {
        let c = self.graph.edges[e].check;
        let inputs: Vec<&A::Msg> =
            self.graph.check_nodes[c].edges.iter().filter(|&&x| x != e).map(|&x| &self.v2c[x]).collect();
        if inputs.is_empty() {
            self.alg.infinity()
        } else {
            self.alg.cn(&inputs)
        }
    }

    /// Overwrite a V2C message and refresh the affected terms.
    pub fn set_v2c(&mut self, e: usize, m: A::Msg) -> f64 {
        let before = self.total;
        let c = self.graph.edges[e].check;
        let edge = self.alg.entropy(&m);
        let pair = self.alg.entropy(&self.alg.vn(&m, &self.c2v[e]));
        let check = {
            let edges = &self.graph.check_nodes[c].edges;
            let inputs: Vec<&A::Msg> = edges.iter().map(|&x| &self.v2c[x]).collect();
            let i = edges.iter().position(|&x| x == e).expect("edge belongs to its check");
            self.alg.check_step(self.check_term[c], &inputs, i, &m)
        };
        self.v2c[e] = m;
        self.total += (edge - self.edge_term[e]) - (check - self.check_term[c]) - (pair - self.pair_term[e]);
        self.edge_term[e] = edge;
        self.check_term[c] = check;
        self.pair_term[e] = pair;
        (before - self.total) / self.graph.var_nodes.len() as f64
    }

    /// Overwrite a C2V message and refresh the affected terms.
    pub fn set_c2v(&mut self, e: usize, m: A::Msg) -> f64 {
        let before = self.total;
        let v = self.graph.edges[e].var;
        let pair = self.alg.entropy(&self.alg.vn(&self.v2c[e], &m));
        self.c2v[e] = m;
        let marg = self.marginal(v);
        let vn = self.alg.entropy(&marg);
        self.err[v] = self.alg.error_probability(&marg);
        self.total += (vn - self.vn_term[v]) - (pair - self.pair_term[e]);
        self.vn_term[v] = vn;
        self.pair_term[e] = pair;
        (before - self.total) / self.graph.var_nodes.len() as f64
    }

    /// Send the message with this label and count it. Returns the change of
    /// the potential.
    pub fn send(&mut self, label: usize) -> Result<f64> {
        let (e, dir) = self.graph.decode_label(label)?;
        self.nmp += 1;
        Ok(match dir {
            Dir::V2C => {
                let m = self.compute_v2c(e);
                self.set_v2c(e, m)
            }
            Dir::C2V => {
                let m = self.compute_c2v(e);
                self.set_c2v(e, m)
            }
        })
    }

    /// Like [`send`](Self::send), also reporting which densities moved.
    pub fn send_with_flags(&mut self, label: usize) -> Result<StepFlags> {
        let (e, dir) = self.graph.decode_label(label)?;
        let (changed, reverse_stale) = match dir {
            Dir::V2C => {
                let m = self.compute_v2c(e);
                (!self.alg.same(&m, &self.v2c[e]), !self.alg.same(&self.compute_c2v(e), &self.c2v[e]))
            }
            Dir::C2V => {
                let m = self.compute_c2v(e);
                (!self.alg.same(&m, &self.c2v[e]), !self.alg.same(&self.compute_v2c(e), &self.v2c[e]))
            }
        };
        let delta = self.send(label)?;
        Ok(StepFlags { changed, reverse_stale, delta })
    }

    /// Count a message whose value was set through the `set_*` methods.
    pub fn count_message(&mut self) {
        self.nmp += 1;
    }

    /// Potential decrease per message if check `c` ran its batch (every
    /// V2C into it, then every C2V out of it), without applying it.
    pub fn batch_gain(&self, c: usize) -> f64 {
        let edges = &self.graph.check_nodes[c].edges;
        let new_v2c: Vec<A::Msg> = edges.iter().map(|&e| self.compute_v2c(e)).collect();
        let refs: Vec<&A::Msg> = new_v2c.iter().collect();
        let mut inputs: Vec<&A::Msg> = edges.iter().map(|&e| &self.v2c[e]).collect();
        let mut term = self.check_term[c];
        for i in 0..edges.len() {
            term = self.alg.check_step(term, &inputs, i, refs[i]);
            inputs[i] = refs[i];
        }
        let mut d = -(term - self.check_term[c]);
        for (i, &e) in edges.iter().enumerate() {
            let others: Vec<&A::Msg> =
                refs.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &m)| m).collect();
            let out = if others.is_empty() { self.alg.infinity() } else { self.alg.cn(&others) };
            let v = self.graph.edges[e].var;
            let marg = self.graph.var_nodes[v].edges.iter().fold(self.prior[v].clone(), |acc, &x| {
                self.alg.vn(&acc, if x == e { &out } else { &self.c2v[x] })
            });
            d += self.alg.entropy(&marg) - self.vn_term[v];
            d += self.alg.entropy(&new_v2c[i]) - self.edge_term[e];
            d -= self.alg.entropy(&self.alg.vn(&new_v2c[i], &out)) - self.pair_term[e];
        }
        d / self.graph.var_nodes.len() as f64 / (2 * edges.len()) as f64
    }

    /// Recompute every term from scratch. Equals [`gap`](Self::gap) up to
    /// rounding for exact densities; Gaussian check terms are path dependent.
    pub fn recomputed_gap(&self) -> f64 {
        let g = self.graph;
        let vn: f64 = (0..g.var_nodes.len()).map(|v| self.alg.entropy(&self.marginal(v))).sum();
        let edge: f64 = self.v2c.iter().map(|m| self.alg.entropy(m)).sum();
        let pair: f64 = self.v2c.iter().zip(&self.c2v).map(|(a, b)| self.alg.entropy(&self.alg.vn(a, b))).sum();
        let check: f64 = (0..g.check_nodes.len()).map(|c| self.check_value(c)).sum();
        -(vn + edge - check - pair) / g.var_nodes.len() as f64
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoders::make_schedule;
    use crate::decoders::ScheduleKind;
    use crate::graph::{build_ldpc_graph, LdpcCode};

    fn small() -> FactorGraph {
        build_ldpc_graph(&LdpcCode::new(6, vec![vec![0, 1, 2, 3], vec![2, 3, 4], vec![0, 4, 5]]).unwrap())
    }

    #[test]
    fn starts_at_initial_value() {
        let g = small();
        let p = Potential::with_channel(&g, GaAlgebra, 2.0).unwrap();
        let want = 0.5 - ga_entropy(2.0);
        assert!((p.gap() - want).abs() < 1e-12);
        assert!((p.recomputed_gap() - want).abs() < 1e-12);
    }

    #[test]
    fn incremental_matches_recompute_and_batch_gain() {
        let g = small();
        let mut p = Potential::with_channel(&g, GaAlgebra, 1.5).unwrap();
        let sched = make_schedule(&g, ScheduleKind::Flooding, 3).unwrap();
        for &l in &sched.labels {
            p.send(l).unwrap();
        }
        assert!((p.gap() - p.recomputed_gap()).abs() < 1e-3);
        for c in 0..3 {
            let predicted = p.batch_gain(c);
            let mut q = p.clone();
            let before = q.gap();
            let batch = crate::decoders::SchedulePolicy::check_batch(&g, c);
            for &l in &batch {
                q.send(l).unwrap();
            }
            assert!(((before - q.gap()) / batch.len() as f64 - predicted).abs() < 1e-12);
        }
    }
}
