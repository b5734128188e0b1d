//! The four subcommands. Each returns its output text; the driver writes it.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use nmpgap::channel::snr_to_sigma;
use nmpgap::decoders::{make_schedule, DecoderSpec, ScheduleKind};
use nmpgap::metrics::{estimate_curve_mc, evaluate_curve, sc_gap_trajectory, simulate_bler, Evaluator, GapCurve, McConfig};
use nmpgap::scheduling::{greedy_schedule, tau};

use crate::config::{Code, Config};

fn evaluator(name: &str) -> Result<Evaluator> {
    Ok(match name {
        "ga" => Evaluator::Ga,
        "de" => Evaluator::De,
        other => bail!("unknown evaluator {other:?} (expected ga or de)"),
    })
}

/// Keep points on multiples of `stride` and the last point.
fn thin(mut curve: GapCurve, stride: u64) -> GapCurve {
    if stride > 1 {
        let last = curve.points.last().map(|p| p.nmp);
        curve.points.retain(|p| p.nmp % stride == 0 || Some(p.nmp) == last);
    }
    curve
}

/// The potential curve described by `cfg`.
pub fn curve(cfg: &Config) -> Result<GapCurve> {
    let code = cfg.load_code()?;
    let spec = cfg.channel(&code)?;
    let dec = cfg.decoder(&code)?;
    let m = &cfg.metric;
    if m.stride == 0 {
        bail!("stride must be at least 1");
    }
    let mut curve = match m.mode.as_str() {
        "mc" => {
            if m.trials == 0 {
                bail!("mc mode needs trials >= 1");
            }
            let mc = McConfig { trials: m.trials, stride: m.stride, seed: cfg.seed(), threads: cfg.threads() };
            estimate_curve_mc(&code.graph, code.polar.as_ref(), &dec, spec, &mc)?
        }
        mode @ ("ga" | "de") => {
            let ev = evaluator(mode)?;
            let full = match (&dec, &code.polar) {
                (DecoderSpec::Sc { .. }, Some(p)) => sc_gap_trajectory(p, &spec, ev)?.curve,
                (DecoderSpec::Bp { schedule, .. }, _) => evaluate_curve(&code.graph, schedule, &spec, ev)
                    .with_context(|| format!("{mode} evaluation"))?,
                _ => bail!("{mode} mode supports sc and explicit BP schedules, not {}", cfg.decoder.kind),
            };
            thin(full, m.stride)
        }
        other => bail!("unknown metric mode {other:?}"),
    };
    let hash = match &dec {
        DecoderSpec::Bp { schedule, .. } => format!("{:016x}", schedule.hash()),
        _ => "none".into(),
    };
    curve.metadata = vec![
        ("code".into(), code.id.clone()),
        ("sigma".into(), spec.sigma.to_string()),
        ("decoder".into(), format!("{} ({})", cfg.decoder.kind, dec.name())),
        ("mode".into(), m.mode.clone()),
        ("schedule_hash".into(), hash),
        ("seed".into(), cfg.seed().to_string()),
    ];
    Ok(curve)
}

pub fn cmd_curve(cfg: &Config) -> Result<String> {
    Ok(curve(cfg)?.to_csv())
}

pub fn cmd_bler(cfg: &Config) -> Result<String> {
    let Some(b) = &cfg.bler else { bail!("bler needs a [bler] section") };
    if b.ebn0_db.is_empty() {
        bail!("[bler] ebn0_db sweep is empty");
    }
    let code = cfg.load_code()?;
    let dec = cfg.decoder(&code)?;
    let mut out = String::new();
    writeln!(out, "# code={}", code.id)?;
    writeln!(out, "# decoder={} ({})", cfg.decoder.kind, dec.name())?;
    writeln!(out, "# seed={}", cfg.seed())?;
    writeln!(out, "# max_trials={} min_errors={}", b.max_trials, b.min_errors)?;
    writeln!(out, "ebn0_db,bler,ber,avg_nmp,trials")?;
    for (i, &db) in b.ebn0_db.iter().enumerate() {
        let spec = snr_to_sigma(db, cfg.channel.rate.unwrap_or(code.rate))?;
        // Each sweep point draws from its own seed stream.
        let seed = cfg.seed().wrapping_add(i as u64);
        let t = simulate_bler(&code.graph, code.polar.as_ref(), &dec, spec, b.max_trials, b.min_errors, seed, cfg.threads())?;
        writeln!(out, "{db},{},{},{},{}", t.bler, t.ber, t.avg_nmp, t.trials)?;
    }
    Ok(out)
}

pub fn cmd_compare(cfg: &Config) -> Result<String> {
    let Some(c) = &cfg.compare else { bail!("compare needs a [compare] section") };
    if c.configs.is_empty() {
        bail!("[compare] configs list is empty");
    }
    struct Row {
        name: String,
        conv: Option<u64>,
        target: Option<u64>,
        final_gap: f64,
    }
    let mut rows = Vec::new();
    for p in &c.configs {
        let path = cfg.resolve(p);
        let mut sub = Config::load(&path)?;
        sub.seed = sub.seed.or(cfg.seed);
        sub.threads = cfg.threads.or(sub.threads);
        let curve = curve(&sub).with_context(|| format!("evaluating {}", path.display()))?;
        rows.push(Row {
            name: sub.decoder.kind.clone(),
            conv: curve.convergence_point(),
            target: curve.nmp_to_gap(c.gap_target),
            final_gap: curve.final_gap().unwrap_or(f64::NAN),
        });
    }
    rows.sort_by_key(|r| (r.conv.unwrap_or(u64::MAX), r.target.unwrap_or(u64::MAX)));
    let show = |x: Option<u64>| x.map_or("unreachable".to_string(), |v| v.to_string());
    let mut out = String::new();
    writeln!(out, "# gap_target={}", c.gap_target)?;
    writeln!(out, "rank,decoder,nmp_to_convergence,nmp_to_target,final_gap")?;
    for (i, r) in rows.iter().enumerate() {
        writeln!(out, "{},{},{},{},{}", i + 1, r.name, show(r.conv), show(r.target), r.final_gap)?;
    }
    Ok(out)
}

/// Greedy schedule text and the τ report.
pub fn cmd_schedule(cfg: &Config, horizon: Option<usize>) -> Result<(String, String)> {
    let code: Code = cfg.load_code()?;
    if code.ldpc.is_none() {
        bail!("schedule search needs an LDPC code");
    }
    let sec = cfg.schedule.as_ref();
    let Some(t) = horizon.or(sec.map(|s| s.horizon)) else { bail!("schedule needs a horizon") };
    if t == 0 {
        bail!("horizon must be at least 1");
    }
    let ev = evaluator(sec.map_or("ga", |s| s.evaluator.as_str()))?;
    let spec = cfg.channel(&code)?;
    let g = &code.graph;
    let greedy = greedy_schedule(g, &spec, t, ev)?;
    let iters = t.div_ceil(2 * g.edges.len());
    let layered = make_schedule(g, ScheduleKind::Layered, iters)?;
    let flooding = make_schedule(g, ScheduleKind::Flooding, iters)?;
    let mut report = String::new();
    writeln!(report, "# code={}", code.id)?;
    writeln!(report, "# sigma={}", spec.sigma)?;
    writeln!(report, "# evaluator={} horizon={t}", ev.as_str())?;
    writeln!(report, "schedule,tau")?;
    for (name, s) in [("greedy", &greedy), ("layered", &layered), ("flooding", &flooding)] {
        writeln!(report, "{name},{}", tau(g, &spec, s, t, ev)?)?;
    }
    Ok((greedy.to_text(), report))
}
