//! Monte Carlo estimates over all-zero transmissions.
//!
//! Trials are grouped into fixed chunks; each chunk is simulated in trial
//! order by one worker and the chunk accumulators are merged in chunk order,
//! so results do not depend on the thread count.

use super::curve::{Accum, CurvePoint, GapCurve};
use super::snapshot::{SnapshotBuffers, SnapshotStats};
use crate::channel::{fill_llrs, trial_rng, ChannelSpec};
use crate::decoders::{DecoderSpec, MessageEvent, MessageState, NoObserver, Observer};
use crate::error::{invalid, Result};
use crate::graph::{FactorGraph, PolarCode};

const CHUNK: u64 = 64;

/// Trial budget and sampling parameters of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub trials: u64,
    /// Messages between snapshots; the final message count is always sampled.
    pub stride: u64,
    pub seed: u64,
    pub threads: usize,
}

impl McConfig {
    pub fn new(trials: u64, stride: u64, seed: u64) -> Self {
        McConfig { trials, stride, seed, threads: 1 }
    }
}

/// Snapshot message counts: multiples of `stride` plus the final count.
fn snapshot_grid(planned: u64, stride: u64) -> Vec<u64> {
    let mut grid: Vec<u64> = (0..=planned / stride).map(|i| i * stride).collect();
    if planned % stride != 0 {
        grid.push(planned);
    }
    grid
}

#[derive(Debug, Clone, Default)]
struct SlotAccum {
    gap: Accum,
    entropy: Accum,
    ber: Accum,
}

impl SlotAccum {
    fn push(&mut self, s: &SnapshotStats) {
        self.gap.push(s.gap);
        self.entropy.push(s.avg_entropy);
        self.ber.push(s.ber);
    }

    fn merge(&mut self, o: &SlotAccum) {
        self.gap.merge(&o.gap);
        self.entropy.merge(&o.entropy);
        self.ber.merge(&o.ber);
    }
}

#[derive(Debug, Clone, Default)]
struct Outcome {
    slots: Vec<SlotAccum>,
    block_errors: u64,
    bit_errors: u64,
    bits: u64,
    nmp: Accum,
    trials: u64,
}

impl Outcome {
    fn merge(&mut self, o: &Outcome) {
        if self.slots.len() < o.slots.len() {
            self.slots.resize(o.slots.len(), SlotAccum::default());
        }
        for (a, b) in self.slots.iter_mut().zip(&o.slots) {
            a.merge(b);
        }
        self.block_errors += o.block_errors;
        self.bit_errors += o.bit_errors;
        self.bits += o.bits;
        self.nmp.merge(&o.nmp);
        self.trials += o.trials;
    }
}

/// Records the snapshot statistics whenever the message count hits the grid.
struct SnapshotObserver<'a> {
    grid: &'a [u64],
    next: usize,
    buffers: SnapshotBuffers,
    recorded: Vec<SnapshotStats>,
}

impl SnapshotObserver<'_> {
    fn record(&mut self, nmp: u64, state: &dyn MessageState) {
        if self.grid.get(self.next) == Some(&nmp) {
            self.recorded.push(self.buffers.stats(state));
            self.next += 1;
        }
    }
}

impl Observer for SnapshotObserver<'_> {
    fn on_start(&mut self, state: &dyn MessageState) {
        self.record(0, state);
    }

    fn on_message(&mut self, event: &MessageEvent, state: &dyn MessageState) {
        self.record(event.nmp_after, state);
    }
}

struct Job<'a> {
    graph: &'a FactorGraph,
    polar: Option<&'a PolarCode>,
    decoder: &'a DecoderSpec,
    spec: ChannelSpec,
    seed: u64,
    /// Snapshot grid; empty when only final decisions are wanted.
    grid: Vec<u64>,
}

impl Job<'_> {
    fn run_chunk(&self, first: u64, last: u64) -> Result<Outcome> {
        let mut out = Outcome { slots: vec![SlotAccum::default(); self.grid.len()], ..Default::default() };
        let mut llrs = vec![0.0; self.graph.n_channels()];
        let info: Option<Vec<usize>> = self.polar.map(|p| p.info_set.clone());
        let mut obs = SnapshotObserver {
            grid: &self.grid,
            next: 0,
            buffers: SnapshotBuffers::new(self.graph),
            recorded: Vec::with_capacity(self.grid.len()),
        };
        for trial in first..last {
            fill_llrs(&mut llrs, &self.spec, &mut trial_rng(self.seed, trial));
            let res = if self.grid.is_empty() {
                self.decoder.run(self.graph, self.polar, &llrs, &mut NoObserver)?
            } else {
                obs.next = 0;
                obs.recorded.clear();
                self.decoder.run(self.graph, self.polar, &llrs, &mut obs)?
            };
            // A run that stopped early keeps its last state for the rest of the grid.
            if let Some(&last) = obs.recorded.last() {
                obs.recorded.resize(self.grid.len(), last);
            }
            for (slot, s) in out.slots.iter_mut().zip(&obs.recorded) {
                slot.push(s);
            }
            let errs = match &info {
                Some(idx) => idx.iter().filter(|&&i| res.decisions[i] != 0).count(),
                None => res.decisions.iter().filter(|&&b| b != 0).count(),
            } as u64;
            out.bits += info.as_ref().map_or(res.decisions.len(), |i| i.len()) as u64;
            out.bit_errors += errs;
            out.block_errors += (errs > 0) as u64;
            out.nmp.push(res.ledger.nmp as f64);
            out.trials += 1;
        }
        Ok(out)
    }

    /// Chunks `[c0, c1)` in parallel, returned in chunk order.
    fn run_chunks(&self, c0: u64, c1: u64, total: u64, threads: usize) -> Result<Vec<Outcome>> {
        let bounds = |c: u64| (c * CHUNK, ((c + 1) * CHUNK).min(total));
        let threads = threads.max(1).min((c1 - c0) as usize).max(1);
        if threads == 1 {
            return (c0..c1).map(|c| { let (a, b) = bounds(c); self.run_chunk(a, b) }).collect();
        }
        let mut results: Vec<Option<Result<Outcome>>> = (c0..c1).map(|_| None).collect();
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|w| {
                    scope.spawn(move || {
                        (c0 + w as u64..c1)
                            .step_by(threads)
                            .map(|c| { let (a, b) = bounds(c); (c, self.run_chunk(a, b)) })
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (c, r) in h.join().expect("Monte Carlo worker panicked") {
                    results[(c - c0) as usize] = Some(r);
                }
            }
        });
        results.into_iter().map(|r| r.expect("chunk not simulated")).collect()
    }
}

fn simulate(job: &Job, trials: u64, threads: usize) -> Result<Outcome> {
    let chunks = trials.div_ceil(CHUNK);
    let mut total = Outcome::default();
    for o in job.run_chunks(0, chunks, trials, threads)? {
        total.merge(&o);
    }
    Ok(total)
}

/// Mean potential, average entropy and BER of `trials` all-zero
/// transmissions, sampled every `stride` messages.
pub fn estimate_curve_mc(
    graph: &FactorGraph,
    polar: Option<&PolarCode>,
    decoder: &DecoderSpec,
    spec: ChannelSpec,
    cfg: &McConfig,
) -> Result<GapCurve> {
    if cfg.trials == 0 || cfg.stride == 0 {
        return invalid("trials and stride must be at least 1");
    }
    let planned = decoder.planned_nmp(graph, polar)?;
    let grid = snapshot_grid(planned, cfg.stride);
    let job = Job { graph, polar, decoder, spec, seed: cfg.seed, grid };
    let out = simulate(&job, cfg.trials, cfg.threads)?;
    let points = job
        .grid
        .iter()
        .zip(&out.slots)
        .map(|(&nmp, s)| CurvePoint {
            nmp,
            gap: s.gap.mean,
            gap_se: s.gap.se(),
            avg_entropy: s.entropy.mean,
            avg_entropy_se: s.entropy.se(),
            ber: s.ber.mean,
            ber_se: s.ber.se(),
        })
        .collect();
    Ok(GapCurve { points, trial_count: out.trials, metadata: Vec::new() }
        .with_meta("decoder", decoder.name())
        .with_meta("sigma", spec.sigma)
        .with_meta("seed", cfg.seed))
}

/// One snapshot of the BER trajectory next to its entropy bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerRow {
    pub nmp: u64,
    pub ber: f64,
    pub ber_se: f64,
    /// Half the average entropy, an upper bound on the BER.
    pub bound: f64,
    pub bound_se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerTable {
    pub rows: Vec<BerRow>,
    /// Final block error rate of the decoder's decisions.
    pub bler: f64,
    /// Final bit error rate over information bits (every bit for LDPC).
    pub ber: f64,
    pub avg_nmp: f64,
    pub trials: u64,
    pub block_errors: u64,
}

/// BER trajectory with its entropy bound and final error rates. A `stride`
/// of 0 skips the trajectory, which is much faster.
pub fn ber_blers(
    graph: &FactorGraph,
    polar: Option<&PolarCode>,
    decoder: &DecoderSpec,
    spec: ChannelSpec,
    cfg: &McConfig,
) -> Result<BerTable> {
    if cfg.trials == 0 {
        return invalid("trials must be at least 1");
    }
    let grid = if cfg.stride == 0 {
        Vec::new()
    } else {
        snapshot_grid(decoder.planned_nmp(graph, polar)?, cfg.stride)
    };
    let job = Job { graph, polar, decoder, spec, seed: cfg.seed, grid };
    let out = simulate(&job, cfg.trials, cfg.threads)?;
    Ok(table(&job.grid, &out))
}

fn table(grid: &[u64], out: &Outcome) -> BerTable {
    let rows = grid
        .iter()
        .zip(&out.slots)
        .map(|(&nmp, s)| BerRow {
            nmp,
            ber: s.ber.mean,
            ber_se: s.ber.se(),
            bound: s.entropy.mean / 2.0,
            bound_se: s.entropy.se() / 2.0,
        })
        .collect();
    BerTable {
        rows,
        bler: out.block_errors as f64 / out.trials.max(1) as f64,
        ber: out.bit_errors as f64 / out.bits.max(1) as f64,
        avg_nmp: out.nmp.mean,
        trials: out.trials,
        block_errors: out.block_errors,
    }
}

/// Final error rates, simulating whole chunks until `min_errors` block
/// errors are seen or `max_trials` is reached. Chunks are scanned in order,
/// so the stopping point does not depend on the thread count.
pub fn simulate_bler(
    graph: &FactorGraph,
    polar: Option<&PolarCode>,
    decoder: &DecoderSpec,
    spec: ChannelSpec,
    max_trials: u64,
    min_errors: u64,
    seed: u64,
    threads: usize,
) -> Result<BerTable> {
    if max_trials == 0 {
        return invalid("trial cap must be at least 1");
    }
    let job = Job { graph, polar, decoder, spec, seed, grid: Vec::new() };
    let chunks = max_trials.div_ceil(CHUNK);
    let round = 16u64;
    let mut total = Outcome::default();
    let mut c = 0;
    while c < chunks {
        let c1 = (c + round).min(chunks);
        for o in job.run_chunks(c, c1, max_trials, threads)? {
            total.merge(&o);
            if total.block_errors >= min_errors {
                return Ok(table(&[], &total));
            }
        }
        c = c1;
    }
    Ok(table(&[], &total))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_final_count() {
        assert_eq!(snapshot_grid(10, 4), vec![0, 4, 8, 10]);
        assert_eq!(snapshot_grid(8, 4), vec![0, 4, 8]);
        assert_eq!(snapshot_grid(0, 3), vec![0]);
    }
}
