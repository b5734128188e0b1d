//! Successive cancellation and its simplified (fast-node) variant.
//!
//! Position (c, r) holds a leftward LLR `L` and a rightward value `R`; column
//! `s` is the channel side, column 0 the input bits. The kernel at stage `l`
//! joins rows `r` and `r + 2^l`, and its F output is the C2V message towards
//! the upper-left node of the factor graph while G is the message towards the
//! lower-left node.

use super::{
    f_variant, g_combine, hard, hard_llr, vn_priors, DecodeResult, MessageEvent, MessageKind,
    MessageState, NmpLedger, Observer, Variant,
};
use crate::error::{Error, Result};
use crate::graph::{build_polar_graph, label_of, Dir, FactorGraph, PolarCode, PolarLayout};
use crate::{clamp_llr, L_MAX};

/// Decoder arrays shared by every polar decoder.
pub struct PolarState<'a> {
    pub(crate) code: &'a PolarCode,
    pub(crate) graph: &'a FactorGraph,
    pub(crate) variant: Variant,
    pub(crate) n: usize,
    pub(crate) left: Vec<f64>,
    pub(crate) right: Vec<f64>,
    /// Latest C2V message from each kernel to its lower-left node.
    pub(crate) lower_msg: Vec<f64>,
    pub(crate) prior: Vec<f64>,
    pub(crate) u: Vec<u8>,
    pub ledger: NmpLedger,
    pending: Option<MessageEvent>,
}

impl<'a> PolarState<'a> {
    pub fn new(graph: &'a FactorGraph, code: &'a PolarCode, llrs: &[f64], variant: Variant) -> Result<Self> {
        let lay = graph
            .polar
            .as_ref()
            .filter(|l| l.n == code.n)
            .ok_or_else(|| Error::InvalidArgument("graph is not this code's polar graph".into()))?;
        if llrs.len() != code.n {
            return Err(Error::LengthMismatch { expected: code.n, got: llrs.len() });
        }
        let (n, s) = (code.n, code.s);
        let mut left = vec![0.0; (s + 1) * n];
        for (r, &x) in llrs.iter().enumerate() {
            left[s * n + r] = clamp_llr(x);
        }
        let mut right = vec![0.0; (s + 1) * n];
        for r in 0..n {
            if code.is_frozen(r) {
                right[r] = L_MAX;
            }
        }
        Ok(Self {
            code,
            graph,
            variant,
            n,
            left,
            right,
            lower_msg: vec![0.0; lay.kernels.len()],
            prior: vn_priors(graph, llrs)?,
            u: vec![0; n],
            ledger: NmpLedger::default(),
            pending: None,
        })
    }

    #[inline]
    pub(crate) fn at(&self, c: usize, r: usize) -> usize {
        c * self.n + r
    }

    pub(crate) fn layout(&self) -> &'a PolarLayout {
        self.graph.polar.as_ref().expect("polar graph")
    }

    /// Record a metered message; the observer sees it once the free steps after it are done.
    pub(crate) fn emit(
        &mut self,
        stage: usize,
        row: usize,
        slot: usize,
        dir: Dir,
        kind: MessageKind,
        llr: f64,
        obs: &mut dyn Observer,
    ) {
        self.flush(obs);
        let lay = self.layout();
        let edge = lay.kernels[lay.kernel_at(stage, row)].edges[slot];
        self.ledger.nmp += 1;
        match kind {
            MessageKind::PolarF => self.ledger.comparisons += 1,
            _ => self.ledger.additions += 1,
        }
        self.pending = Some(MessageEvent {
            edge_label: label_of(edge, dir),
            kind,
            llr,
            nmp_after: self.ledger.nmp,
        });
    }

    pub(crate) fn flush(&mut self, obs: &mut dyn Observer) {
        if let Some(ev) = self.pending.take() {
            obs.on_message(&ev, self);
        }
    }

    /// Leftward F at kernel (l, r): message to the upper-left node.
    pub(crate) fn f_step(&mut self, l: usize, r: usize, obs: &mut dyn Observer) {
        let h = 1 << l;
        let extra = self.right[self.at(l, r + h)];
        let v = f_variant(
            self.variant,
            self.left[self.at(l + 1, r)],
            clamp_llr(self.left[self.at(l + 1, r + h)] + extra),
        );
        let i = self.at(l, r);
        self.left[i] = v;
        self.emit(l, r, 0, Dir::C2V, MessageKind::PolarF, v, obs);
    }

    /// SC's G at kernel (l, r) using the hard partial sum at (l, r).
    fn g_step_hard(&mut self, l: usize, r: usize, obs: &mut dyn Observer) {
        let h = 1 << l;
        let bit = hard(self.right[self.at(l, r)]);
        let x = self.left[self.at(l + 1, r)];
        let v = g_combine(x, self.left[self.at(l + 1, r + h)], bit);
        let k = self.layout().kernel_at(l, r);
        self.lower_msg[k] = if bit == 1 { -x } else { x };
        let i = self.at(l, r + h);
        self.left[i] = v;
        self.emit(l, r, 1, Dir::C2V, MessageKind::PolarG, v, obs);
    }

    fn decide_leaf(&mut self, r: usize) {
        let bit = if self.code.is_frozen(r) { 0 } else { hard(self.left[self.at(0, r)]) };
        self.u[r] = bit;
        self.right[r] = hard_llr(bit);
    }

    /// Hard partial sums of column `c` from column `c - 1` over one block.
    fn combine_hard(&mut self, c: usize, base: usize) {
        let (l, h) = (c - 1, 1 << (c - 1));
        for r in base..base + h {
            let (a, b) = (self.at(l, r), self.at(l, r + h));
            let bit = hard(self.right[a]) ^ hard(self.right[b]);
            let (ca, cb) = (self.at(c, r), self.at(c, r + h));
            self.right[ca] = hard_llr(bit);
            self.right[cb] = self.right[b];
        }
    }

    /// Fill hard `R` values over the block `(c, base)` from decided input bits.
    fn fill_block(&mut self, c: usize, base: usize, u: &[u8]) {
        for (i, &b) in u.iter().enumerate() {
            self.u[base + i] = b;
            self.right[base + i] = hard_llr(b);
        }
        for cc in 1..=c {
            for sub in (base..base + (1 << c)).step_by(1 << cc) {
                self.combine_hard(cc, sub);
            }
        }
    }

    fn sc_node(&mut self, c: usize, base: usize, fast: Option<&FastPlan>, obs: &mut dyn Observer) {
        if c == 0 {
            self.decide_leaf(base);
            return;
        }
        if let Some(plan) = fast {
            if self.fast_node(c, base, plan.kind(c, base), obs) {
                return;
            }
        }
        let (l, h) = (c - 1, 1 << (c - 1));
        for r in base..base + h {
            self.f_step(l, r, obs);
        }
        self.sc_node(l, base, fast, obs);
        for r in base..base + h {
            self.g_step_hard(l, r, obs);
        }
        self.sc_node(l, base + h, fast, obs);
        self.combine_hard(c, base);
    }

    /// Decode a pruned subtree directly. Returns false for ordinary nodes.
    fn fast_node(&mut self, c: usize, base: usize, kind: NodeKind, obs: &mut dyn Observer) -> bool {
        let m = 1usize << c;
        match kind {
            NodeKind::Other => return false,
            NodeKind::Rate0 => self.fill_block(c, base, &vec![0; m]),
            NodeKind::Rate1 => {
                let off = self.at(c, base);
                let mut x: Vec<u8> = self.left[off..off + m].iter().map(|&v| hard(v)).collect();
                polar_transform(&mut x);
                self.fill_block(c, base, &x);
            }
            NodeKind::Repetition => {
                // The G path to the last leaf with all-zero partial sums: M - 1 additions.
                for cc in (1..=c).rev() {
                    let (l, h) = (cc - 1, 1 << (cc - 1));
                    let sub = base + m - (1 << cc);
                    for r in sub..sub + h {
                        let i = self.at(l, r);
                        self.right[i] = L_MAX;
                        self.g_step_hard(l, r, obs);
                    }
                }
                let last = base + m - 1;
                let bit = hard(self.left[self.at(0, last)]);
                let mut u = vec![0; m];
                u[m - 1] = bit;
                self.fill_block(c, base, &u);
            }
            NodeKind::SingleParity => {
                // The F path to the first leaf finds the parity and the weakest
                // position: M - 1 comparisons.
                for cc in (1..=c).rev() {
                    for r in base..base + (1 << (cc - 1)) {
                        self.f_step(cc - 1, r, obs);
                    }
                }
                let off = self.at(c, base);
                let vals = self.left[off..off + m].to_vec();
                let mut x: Vec<u8> = vals.iter().map(|&v| hard(v)).collect();
                if x.iter().fold(0, |a, b| a ^ b) == 1 {
                    let weakest = (0..m)
                        .min_by(|&a, &b| vals[a].abs().total_cmp(&vals[b].abs()))
                        .expect("nonempty");
                    x[weakest] ^= 1;
                }
                polar_transform(&mut x);
                self.fill_block(c, base, &x);
            }
        }
        self.harden_block(c, base);
        true
    }

    /// After a pruned subtree is decided, its inner soft values are replaced by
    /// the hard decisions, which is free hard-decision propagation.
    fn harden_block(&mut self, c: usize, base: usize) {
        for l in 0..c {
            for r in base..base + (1 << c) {
                let i = self.at(l, r);
                self.left[i] = self.right[i];
            }
            let h = 1 << l;
            for r in (base..base + (1 << c)).filter(|r| r & h == 0) {
                let k = self.layout().kernel_at(l, r);
                self.lower_msg[k] = self.right[self.at(l, r + h)];
            }
        }
    }

    /// Marginal hard decisions of the input bits.
    pub fn decisions(&self) -> &[u8] {
        &self.u
    }

    pub(crate) fn finish(mut self, converged: bool, obs: &mut dyn Observer) -> DecodeResult {
        self.flush(obs);
        DecodeResult { decisions: self.u, converged, ledger: self.ledger }
    }
}

impl MessageState for PolarState<'_> {
    fn graph(&self) -> &FactorGraph {
        self.graph
    }
    fn priors(&self) -> &[f64] {
        &self.prior
    }
    fn fill_messages(&self, v2c: &mut [f64], c2v: &mut [f64]) {
        for (k, ker) in self.layout().kernels.iter().enumerate() {
            let (l, r, h) = (ker.stage, ker.row, ker.half);
            let [ea, eb, ex] = ker.edges;
            v2c[ea] = self.right[self.at(l, r)];
            c2v[ea] = self.left[self.at(l, r)];
            v2c[eb] = clamp_llr(self.left[self.at(l + 1, r + h)] + self.right[self.at(l, r + h)]);
            c2v[eb] = self.lower_msg[k];
            v2c[ex] = self.left[self.at(l + 1, r)];
            c2v[ex] = self.right[self.at(l + 1, r)];
        }
    }
}

/// In-place `x ← x F^{⊗m}`; the transform is its own inverse.
pub fn polar_transform(x: &mut [u8]) {
    let n = x.len();
    let mut h = 1;
    while h < n {
        for r in (0..n).filter(|r| r & h == 0) {
            x[r] ^= x[r + h];
        }
        h <<= 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NodeKind {
    Rate0,
    Rate1,
    Repetition,
    SingleParity,
    Other,
}

/// Fast-node classification of every subtree `(c, base)`.
struct FastPlan {
    kinds: Vec<Vec<NodeKind>>,
}

impl FastPlan {
    fn new(code: &PolarCode) -> Self {
        let kinds = (0..=code.s)
            .map(|c| {
                let m = 1 << c;
                (0..code.n / m)
                    .map(|b| {
                        let frozen = &code.frozen_mask()[b * m..(b + 1) * m];
                        let n_info = frozen.iter().filter(|&&f| !f).count();
                        if n_info == 0 {
                            NodeKind::Rate0
                        } else if n_info == m {
                            NodeKind::Rate1
                        } else if n_info == 1 && !frozen[m - 1] {
                            NodeKind::Repetition
                        } else if n_info == m - 1 && frozen[0] {
                            NodeKind::SingleParity
                        } else {
                            NodeKind::Other
                        }
                    })
                    .collect()
            })
            .collect();
        Self { kinds }
    }

    fn kind(&self, c: usize, base: usize) -> NodeKind {
        self.kinds[c][base >> c]
    }
}

/// SC with a chosen F rule on a prebuilt polar graph.
pub fn run_sc_with(
    graph: &FactorGraph,
    code: &PolarCode,
    llrs: &[f64],
    variant: Variant,
    obs: &mut dyn Observer,
) -> Result<DecodeResult> {
    let mut st = PolarState::new(graph, code, llrs, variant)?;
    obs.on_start(&st);
    st.sc_node(code.s, 0, None, obs);
    Ok(st.finish(true, obs))
}

/// Successive cancellation with the exact F.
pub fn run_sc(code: &PolarCode, llrs: &[f64]) -> Result<DecodeResult> {
    run_sc_with(&build_polar_graph(code), code, llrs, Variant::SumProduct, &mut super::NoObserver)
}

/// Successive cancellation with the min-sum F.
pub fn run_sc_minsum(code: &PolarCode, llrs: &[f64]) -> Result<DecodeResult> {
    run_sc_with(&build_polar_graph(code), code, llrs, Variant::MinSum, &mut super::NoObserver)
}

/// Simplified SC: rate-0, rate-1, repetition and single-parity subtrees are
/// decoded directly; everything else as min-sum SC.
pub fn run_ssc_with(
    graph: &FactorGraph,
    code: &PolarCode,
    llrs: &[f64],
    obs: &mut dyn Observer,
) -> Result<DecodeResult> {
    let mut st = PolarState::new(graph, code, llrs, Variant::MinSum)?;
    let plan = FastPlan::new(code);
    obs.on_start(&st);
    st.sc_node(code.s, 0, Some(&plan), obs);
    Ok(st.finish(true, obs))
}

pub fn run_ssc(code: &PolarCode, llrs: &[f64]) -> Result<DecodeResult> {
    run_ssc_with(&build_polar_graph(code), code, llrs, &mut super::NoObserver)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{snr_to_sigma, transmit_trial};
    use crate::decoders::Trace;
    use crate::graph::construct_polar;

    #[test]
    fn noiseless_sc_counts() {
        for n in [2usize, 8, 64] {
            let code = construct_polar(n, n / 2, 0.8).unwrap();
            let r = run_sc(&code, &vec![L_MAX; n]).unwrap();
            assert_eq!(r.decisions, vec![0; n]);
            let s = n.trailing_zeros() as u64;
            assert_eq!(r.ledger.nmp, n as u64 * s);
            assert_eq!(r.ledger.comparisons + r.ledger.additions, n as u64 * s);
        }
    }

    /// Successive MAP decisions by enumerating all future bits.
    fn brute_force_sc(code: &PolarCode, llrs: &[f64]) -> Vec<u8> {
        let n = code.n;
        let mut u = vec![0u8; n];
        for i in 0..n {
            if code.is_frozen(i) {
                continue;
            }
            let mut w = [0.0f64; 2];
            for tail in 0..(1usize << (n - i)) {
                let mut cand = u.clone();
                for j in i..n {
                    cand[j] = ((tail >> (j - i)) & 1) as u8;
                }
                let x = code.encode(&cand);
                let ll: f64 = x
                    .iter()
                    .zip(llrs)
                    .map(|(&b, &l)| if b == 0 { -(-l).exp().ln_1p() } else { -l.exp().ln_1p() })
                    .sum();
                w[cand[i] as usize] += ll.exp();
            }
            u[i] = u8::from(w[1] >= w[0]);
        }
        u
    }

    #[test]
    fn sc_matches_successive_map() {
        let code = PolarCode::new(4, vec![1, 3]).unwrap();
        for llrs in [[0.8, -0.3, 1.7, -2.2], [-1.1, 0.4, 0.2, 0.9], [2.0, 0.1, -0.6, 0.3]] {
            assert_eq!(run_sc(&code, &llrs).unwrap().decisions, brute_force_sc(&code, &llrs));
        }
    }

    #[test]
    fn ssc_extremes_cost_nothing() {
        let llrs = transmit_trial(64, &crate::channel::ChannelSpec::new(0.8).unwrap(), 1, 0);
        assert_eq!(run_ssc(&PolarCode::new(64, (0..64).collect()).unwrap(), &llrs).unwrap().ledger.nmp, 0);
        assert_eq!(run_ssc(&PolarCode::new(64, vec![]).unwrap(), &llrs).unwrap().ledger.nmp, 0);
    }

    #[test]
    fn fast_nodes_cost_m_minus_one() {
        let llrs = [0.3, -1.2, 2.1, 0.7, -0.4, 1.9, 0.2, -0.8];
        let rep = PolarCode::new(8, vec![7]).unwrap();
        let r = run_ssc(&rep, &llrs).unwrap();
        assert_eq!((r.ledger.nmp, r.ledger.additions), (7, 7));
        assert_eq!(r.decisions, run_sc_minsum(&rep, &llrs).unwrap().decisions);
        let spc = PolarCode::new(8, (1..8).collect()).unwrap();
        let r = run_ssc(&spc, &llrs).unwrap();
        assert_eq!((r.ledger.nmp, r.ledger.comparisons), (7, 7));
        assert_eq!(r.decisions, run_sc_minsum(&spc, &llrs).unwrap().decisions);
    }

    #[test]
    fn ssc_matches_minsum_sc_on_random_trials() {
        let code = construct_polar(128, 64, 0.8).unwrap();
        let g = build_polar_graph(&code);
        let spec = snr_to_sigma(2.0, 0.5).unwrap();
        let mut saved = 0;
        for t in 0..300 {
            let llrs = transmit_trial(128, &spec, 5, t);
            let a = run_ssc_with(&g, &code, &llrs, &mut super::super::NoObserver).unwrap();
            let b = run_sc_with(&g, &code, &llrs, Variant::MinSum, &mut super::super::NoObserver).unwrap();
            assert_eq!(a.decisions, b.decisions, "trial {t}");
            saved = b.ledger.nmp - a.ledger.nmp;
        }
        assert!(saved > 0);
    }

    #[test]
    fn events_are_sequential_and_observed_after_free_steps() {
        let code = construct_polar(16, 8, 0.9).unwrap();
        let g = build_polar_graph(&code);
        let mut t = Trace::default();
        let llrs = transmit_trial(16, &crate::channel::ChannelSpec::new(0.9).unwrap(), 3, 0);
        run_sc_with(&g, &code, &llrs, Variant::SumProduct, &mut t).unwrap();
        assert_eq!(t.events.len(), 64);
        assert!(t.events.iter().enumerate().all(|(i, e)| e.nmp_after == i as u64 + 1));
    }
}
