use super::{
    hard, DecodeResult, MessageEvent, MessageKind, MessageState, NmpLedger, Observer,
    SchedulePolicy, Variant, ATANH_CLAMP,
};
use crate::error::{Error, Result};
use crate::graph::{label_of, Dir, FactorGraph, VarNodeKind};
use crate::{clamp_llr, L_MAX};

/// Prior LLR per variable node: the channel value where observed, `+L_MAX`
/// for frozen bits, 0 otherwise.
pub fn vn_priors(graph: &FactorGraph, llrs: &[f64]) -> Result<Vec<f64>> {
    if llrs.len() != graph.n_channels() {
        return Err(Error::LengthMismatch { expected: graph.n_channels(), got: llrs.len() });
    }
    Ok(graph
        .var_nodes
        .iter()
        .map(|v| match (v.kind, v.channel) {
            (VarNodeKind::FrozenBit, _) => L_MAX,
            (_, Some(ch)) => clamp_llr(llrs[ch]),
            _ => 0.0,
        })
        .collect())
}

/// Check-node output from the other incoming messages.
pub fn msg_c2v_value(inputs: impl Iterator<Item = f64>, variant: Variant) -> f64 {
    match variant {
        Variant::SumProduct => {
            let p: f64 = inputs.map(|m| (m / 2.0).tanh()).product();
            clamp_llr(2.0 * p.clamp(-ATANH_CLAMP, ATANH_CLAMP).atanh())
        }
        Variant::MinSum => {
            let (mut neg, mut min) = (false, L_MAX);
            for m in inputs {
                neg ^= m < 0.0;
                min = min.min(m.abs());
            }
            if neg {
                -min
            } else {
                min
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpOptions {
    pub variant: Variant,
    pub max_nmp: Option<u64>,
    /// Stop once every parity check holds, tested only at sweep boundaries.
    pub early_termination: bool,
    /// Sweep length for the early-termination test; defaults to `2|E|`.
    pub sweep: Option<usize>,
}

impl Default for BpOptions {
    fn default() -> Self {
        Self { variant: Variant::SumProduct, max_nmp: None, early_termination: false, sweep: None }
    }
}

/// Belief propagation over any factor graph, one directed-edge message at a time.
pub struct BpDecoder<'g> {
    graph: &'g FactorGraph,
    variant: Variant,
    prior: Vec<f64>,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    /// A check's V2C inputs changed since its last C2V output was charged.
    dirty: Vec<bool>,
    pub ledger: NmpLedger,
}

impl<'g> BpDecoder<'g> {
    pub fn new(graph: &'g FactorGraph, llrs: &[f64], variant: Variant) -> Result<Self> {
        Ok(Self {
            graph,
            variant,
            prior: vn_priors(graph, llrs)?,
            v2c: vec![0.0; graph.n_edges()],
            c2v: vec![0.0; graph.n_edges()],
            dirty: vec![true; graph.n_checks()],
            ledger: NmpLedger::default(),
        })
    }

    pub fn v2c(&self) -> &[f64] {
        &self.v2c
    }
    pub fn c2v(&self) -> &[f64] {
        &self.c2v
    }

    /// Channel value plus every incoming C2V except the target check's.
    pub fn msg_v2c(&mut self, edge: usize) -> MessageEvent {
        let v = self.graph.edges[edge].var;
        let sum: f64 = self.graph.var_nodes[v]
            .edges
            .iter()
            .filter(|&&e| e != edge)
            .map(|&e| self.c2v[e])
            .sum();
        let value = clamp_llr(self.prior[v] + sum);
        self.v2c[edge] = value;
        self.dirty[self.graph.edges[edge].check] = true;
        self.ledger.nmp += 1;
        self.ledger.additions += 1;
        self.ledger.subtractions += 1;
        self.event(edge, Dir::V2C, MessageKind::V2C, value)
    }

    /// Check combine of every incoming V2C except the target variable's.
    pub fn msg_c2v(&mut self, edge: usize) -> MessageEvent {
        let c = self.graph.edges[edge].check;
        let node = &self.graph.check_nodes[c];
        let v2c = &self.v2c;
        let value = msg_c2v_value(
            node.edges.iter().filter(|&&e| e != edge).map(|&e| v2c[e]),
            self.variant,
        );
        self.c2v[edge] = value;
        if self.dirty[c] {
            // One full min-sum batch at this check: 2 d_c - 3 comparisons.
            self.ledger.comparisons += (2 * node.degree()).saturating_sub(3) as u64;
            self.dirty[c] = false;
        }
        self.ledger.nmp += 1;
        self.event(edge, Dir::C2V, MessageKind::C2V, value)
    }

    fn event(&self, edge: usize, dir: Dir, kind: MessageKind, llr: f64) -> MessageEvent {
        MessageEvent { edge_label: label_of(edge, dir), kind, llr, nmp_after: self.ledger.nmp }
    }

    /// Send the message named by a directed edge label.
    pub fn step(&mut self, label: usize) -> Result<MessageEvent> {
        match self.graph.decode_label(label)? {
            (e, Dir::V2C) => Ok(self.msg_v2c(e)),
            (e, Dir::C2V) => Ok(self.msg_c2v(e)),
        }
    }

    pub fn marginals(&self) -> Vec<f64> {
        self.graph
            .var_nodes
            .iter()
            .zip(&self.prior)
            .map(|(v, p)| p + v.edges.iter().map(|&e| self.c2v[e]).sum::<f64>())
            .collect()
    }

    pub fn decisions(&self) -> Vec<u8> {
        self.marginals().into_iter().map(hard).collect()
    }

    pub fn checks_satisfied(&self) -> bool {
        let x = self.decisions();
        self.graph
            .check_nodes
            .iter()
            .all(|c| c.edges.iter().fold(0u8, |acc, &e| acc ^ x[self.graph.edges[e].var]) == 0)
    }

    /// Execute `schedule` in order.
    pub fn run(
        &mut self,
        schedule: &SchedulePolicy,
        opts: &BpOptions,
        observer: &mut dyn Observer,
    ) -> Result<DecodeResult> {
        schedule.validate(self.graph)?;
        let sweep = opts.sweep.unwrap_or(2 * self.graph.n_edges()).max(1);
        observer.on_start(self);
        for (i, &label) in schedule.labels.iter().enumerate() {
            if opts.max_nmp.is_some_and(|m| self.ledger.nmp >= m) {
                break;
            }
            let ev = self.step(label)?;
            observer.on_message(&ev, self);
            if opts.early_termination && (i + 1) % sweep == 0 && self.checks_satisfied() {
                break;
            }
        }
        Ok(DecodeResult {
            decisions: self.decisions(),
            converged: self.checks_satisfied(),
            ledger: self.ledger,
        })
    }
}

impl MessageState for BpDecoder<'_> {
    fn graph(&self) -> &FactorGraph {
        self.graph
    }
    fn priors(&self) -> &[f64] {
        &self.prior
    }
    fn fill_messages(&self, v2c: &mut [f64], c2v: &mut [f64]) {
        v2c.copy_from_slice(&self.v2c);
        c2v.copy_from_slice(&self.c2v);
    }
}

/// Run belief propagation along `schedule`.
pub fn run_bp(
    graph: &FactorGraph,
    llrs: &[f64],
    schedule: &SchedulePolicy,
    opts: &BpOptions,
    observer: &mut dyn Observer,
) -> Result<DecodeResult> {
    BpDecoder::new(graph, llrs, opts.variant)?.run(schedule, opts, observer)
}
