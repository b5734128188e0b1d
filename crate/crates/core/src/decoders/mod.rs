//! Instrumented decoders. Every soft message on a directed edge is one unit
//! of NMP and produces a [`MessageEvent`]; hard-decision propagation is free.

mod ldpc;
mod polar;
mod schedule;
mod soft;

pub use ldpc::{msg_c2v_value, run_bp, vn_priors, BpDecoder, BpOptions};
pub use polar::{polar_transform, run_sc, run_sc_minsum, run_sc_with, run_ssc, run_ssc_with, PolarState};
pub use schedule::{make_schedule, ScheduleKind, SchedulePolicy};
pub use soft::{run_polar_bp, run_polar_bp_with, run_scan, run_scan_with};

use crate::graph::FactorGraph;
use crate::{clamp_llr, L_MAX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageKind {
    V2C,
    C2V,
    PolarF,
    PolarG,
}

impl MessageKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MessageKind::V2C => "V2C",
            MessageKind::C2V => "C2V",
            MessageKind::PolarF => "F",
            MessageKind::PolarG => "G",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MessageEvent {
    pub edge_label: usize,
    pub kind: MessageKind,
    pub llr: f64,
    pub nmp_after: u64,
}

/// Message count plus floating-point operation tallies at min-sum rates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NmpLedger {
    pub nmp: u64,
    pub additions: u64,
    pub subtractions: u64,
    pub comparisons: u64,
}

impl NmpLedger {
    pub fn absorb(&mut self, other: &NmpLedger) {
        self.nmp += other.nmp;
        self.additions += other.additions;
        self.subtractions += other.subtractions;
        self.comparisons += other.comparisons;
    }
}

/// Check-node rule for soft combines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    #[default]
    SumProduct,
    MinSum,
}

/// Read access to the current messages of a running decoder, expressed on
/// its factor graph.
pub trait MessageState {
    fn graph(&self) -> &FactorGraph;
    /// Prior LLR per variable node.
    fn priors(&self) -> &[f64];
    /// Write current V2C and C2V values per undirected edge.
    fn fill_messages(&self, v2c: &mut [f64], c2v: &mut [f64]);
}

/// Receives the event stream. `on_message` runs after the message and any
/// free (hard-decision) steps that follow it.
pub trait Observer {
    fn on_start(&mut self, _state: &dyn MessageState) {}
    fn on_message(&mut self, _event: &MessageEvent, _state: &dyn MessageState) {}
}

/// Observer that ignores everything.
pub struct NoObserver;
impl Observer for NoObserver {}

/// Records every event for a trace dump.
#[derive(Debug, Default, Clone)]
pub struct Trace {
    pub events: Vec<MessageEvent>,
}

impl Observer for Trace {
    fn on_message(&mut self, event: &MessageEvent, _: &dyn MessageState) {
        self.events.push(*event);
    }
}

impl Trace {
    /// CSV with columns `event_index,edge_label,kind,llr,nmp_after`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("event_index,edge_label,kind,llr,nmp_after\n");
        for (i, e) in self.events.iter().enumerate() {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                i,
                e.edge_label,
                e.kind.as_str(),
                e.llr,
                e.nmp_after
            ));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// LDPC: one bit per variable node. Polar: the n input bits.
    pub decisions: Vec<u8>,
    pub converged: bool,
    pub ledger: NmpLedger,
}

/// Hard decision; a tie at zero decides 1.
#[inline]
pub fn hard(llr: f64) -> u8 {
    u8::from(llr <= 0.0)
}

/// Exact check combine of two LLRs, `2 atanh(tanh(x/2) tanh(y/2))`.
#[inline]
pub fn f_exact(x: f64, y: f64) -> f64 {
    let p = ((x / 2.0).tanh() * (y / 2.0).tanh()).clamp(-ATANH_CLAMP, ATANH_CLAMP);
    clamp_llr(2.0 * p.atanh())
}

/// Min-sum approximation of [`f_exact`].
#[inline]
pub fn f_minsum(x: f64, y: f64) -> f64 {
    let m = x.abs().min(y.abs());
    if (x < 0.0) != (y < 0.0) {
        -m
    } else {
        m
    }
}

#[inline]
pub fn f_variant(v: Variant, x: f64, y: f64) -> f64 {
    match v {
        Variant::SumProduct => f_exact(x, y),
        Variant::MinSum => f_minsum(x, y),
    }
}

/// Polar G: `(-1)^u x + y`.
#[inline]
pub fn g_combine(x: f64, y: f64, u: u8) -> f64 {
    clamp_llr(if u & 1 == 1 { y - x } else { y + x })
}

/// Largest magnitude passed to `atanh`.
pub const ATANH_CLAMP: f64 = 1.0 - 1e-15;

/// Hard value used for decided bits.
#[inline]
pub fn hard_llr(bit: u8) -> f64 {
    if bit & 1 == 1 {
        -L_MAX
    } else {
        L_MAX
    }
}


/// Any of the six decoders with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum DecoderSpec {
    /// Belief propagation along an explicit schedule (LDPC flooding/layered, or any graph).
    Bp { schedule: SchedulePolicy, options: BpOptions },
    Sc { variant: Variant },
    Ssc,
    Scan { iterations: usize, variant: Variant },
    PolarBp { iterations: usize, variant: Variant },
}

impl DecoderSpec {
    pub fn name(&self) -> String {
        match self {
            DecoderSpec::Bp { options, .. } => format!("bp-{:?}", options.variant).to_lowercase(),
            DecoderSpec::Sc { variant } => format!("sc-{variant:?}").to_lowercase(),
            DecoderSpec::Ssc => "ssc".into(),
            DecoderSpec::Scan { iterations, variant } => {
                format!("scan{iterations}-{variant:?}").to_lowercase()
            }
            DecoderSpec::PolarBp { iterations, variant } => {
                format!("polarbp{iterations}-{variant:?}").to_lowercase()
            }
        }
    }

    fn polar<'a>(&self, polar: Option<&'a crate::graph::PolarCode>) -> crate::Result<&'a crate::graph::PolarCode> {
        polar.ok_or_else(|| crate::Error::InvalidArgument(format!("{} needs a polar code", self.name())))
    }

    /// Decode one received word.
    pub fn run(
        &self,
        graph: &FactorGraph,
        polar: Option<&crate::graph::PolarCode>,
        llrs: &[f64],
        obs: &mut dyn Observer,
    ) -> crate::Result<DecodeResult> {
        match self {
            DecoderSpec::Bp { schedule, options } => run_bp(graph, llrs, schedule, options, obs),
            DecoderSpec::Sc { variant } => run_sc_with(graph, self.polar(polar)?, llrs, *variant, obs),
            DecoderSpec::Ssc => run_ssc_with(graph, self.polar(polar)?, llrs, obs),
            DecoderSpec::Scan { iterations, variant } => {
                run_scan_with(graph, self.polar(polar)?, llrs, *iterations, *variant, obs)
            }
            DecoderSpec::PolarBp { iterations, variant } => {
                run_polar_bp_with(graph, self.polar(polar)?, llrs, *iterations, *variant, obs)
            }
        }
    }

    /// Message count of a full run without early termination. SSC's count
    /// depends only on the frozen pattern, so one noiseless run measures it.
    pub fn planned_nmp(
        &self,
        graph: &FactorGraph,
        polar: Option<&crate::graph::PolarCode>,
    ) -> crate::Result<u64> {
        let ns = |p: &crate::graph::PolarCode| (p.n * p.s) as u64;
        Ok(match self {
            DecoderSpec::Bp { schedule, options } => {
                let len = schedule.len() as u64;
                options.max_nmp.map_or(len, |m| m.min(len))
            }
            DecoderSpec::Sc { .. } => ns(self.polar(polar)?),
            DecoderSpec::Scan { iterations, .. } | DecoderSpec::PolarBp { iterations, .. } => {
                2 * *iterations as u64 * ns(self.polar(polar)?)
            }
            DecoderSpec::Ssc => {
                let p = self.polar(polar)?;
                run_ssc_with(graph, p, &vec![L_MAX; p.n], &mut NoObserver)?.ledger.nmp
            }
        })
    }
}
