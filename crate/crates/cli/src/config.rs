//! Experiment configuration: one TOML file with flat sections, plus flag
//! overrides applied by the driver.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use nmpgap::channel::{snr_to_sigma, ChannelSpec};
use nmpgap::decoders::{make_schedule, BpOptions, DecoderSpec, ScheduleKind, SchedulePolicy, Variant};
use nmpgap::graph::{
    build_ldpc_graph, build_polar_graph, construct_polar, load_alist, load_polar_spec, FactorGraph, LdpcCode, PolarCode,
};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub code: CodeSection,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default)]
    pub decoder: DecoderSection,
    #[serde(default)]
    pub metric: MetricSection,
    pub bler: Option<BlerSection>,
    pub compare: Option<CompareSection>,
    pub schedule: Option<ScheduleSection>,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CodeSection {
    pub alist: Option<PathBuf>,
    pub polar: Option<PathBuf>,
    /// `polar` or `chain` (a cycle-free chain of checks).
    pub family: Option<String>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub design_sigma: Option<f64>,
    pub checks: Option<usize>,
    pub check_degree: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub sigma: Option<f64>,
    pub ebn0_db: Option<f64>,
    /// Rate for the Eb/N0 conversion; defaults to the code rate.
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderSection {
    /// sc, ssc, scan, polar-bp, flooding, layered, schedule
    pub kind: String,
    pub iterations: Option<usize>,
    pub variant: Option<String>,
    #[serde(default)]
    pub early_termination: bool,
    pub max_nmp: Option<u64>,
    pub schedule_file: Option<PathBuf>,
}

impl Default for DecoderSection {
    fn default() -> Self {
        DecoderSection {
            kind: "flooding".into(),
            iterations: None,
            variant: None,
            early_termination: false,
            max_nmp: None,
            schedule_file: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricSection {
    /// mc, de or ga
    pub mode: String,
    pub trials: u64,
    pub stride: u64,
}

impl Default for MetricSection {
    fn default() -> Self {
        MetricSection { mode: "mc".into(), trials: 1000, stride: 1 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlerSection {
    pub ebn0_db: Vec<f64>,
    #[serde(default = "default_max_trials")]
    pub max_trials: u64,
    #[serde(default = "default_min_errors")]
    pub min_errors: u64,
}

fn default_max_trials() -> u64 {
    10_000
}
fn default_min_errors() -> u64 {
    100
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    pub configs: Vec<PathBuf>,
    pub gap_target: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub horizon: usize,
    #[serde(default = "default_evaluator")]
    pub evaluator: String,
}

fn default_evaluator() -> String {
    "ga".into()
}

/// A loaded code with its factor graph.
pub struct Code {
    pub id: String,
    pub graph: FactorGraph,
    pub polar: Option<PolarCode>,
    pub ldpc: Option<LdpcCode>,
    pub rate: f64,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: Config = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn threads(&self) -> usize {
        self.threads.unwrap_or(1).max(1)
    }

    pub fn load_code(&self) -> Result<Code> {
        let c = &self.code;
        let sources = [c.alist.is_some(), c.polar.is_some(), c.family.is_some()];
        if sources.iter().filter(|&&b| b).count() != 1 {
            bail!("[code] needs exactly one of alist, polar, family");
        }
        if let Some(p) = &c.alist {
            let path = self.resolve(p);
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let code = load_alist(&text).with_context(|| format!("loading {}", path.display()))?;
            return Ok(ldpc_code(path.display().to_string(), code));
        }
        if let Some(p) = &c.polar {
            let path = self.resolve(p);
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let code = load_polar_spec(&text).with_context(|| format!("loading {}", path.display()))?;
            return Ok(polar_code(path.display().to_string(), code));
        }
        match c.family.as_deref() {
            Some("polar") => {
                let (Some(n), Some(k)) = (c.n, c.k) else { bail!("polar family needs n and k") };
                let design = match c.design_sigma {
                    Some(s) => s,
                    None => self.channel_for_rate(k as f64 / n as f64)?.sigma,
                };
                let code = construct_polar(n, k, design)?;
                Ok(polar_code(format!("polar(n={n},k={k},design_sigma={design})"), code))
            }
            Some("chain") => {
                let (Some(m), Some(d)) = (c.checks, c.check_degree) else {
                    bail!("chain family needs checks and check_degree")
                };
                if m == 0 || d < 2 {
                    bail!("chain family needs checks >= 1 and check_degree >= 2");
                }
                let rows = (0..m).map(|j| (j * (d - 1)..j * (d - 1) + d).collect()).collect();
                let code = LdpcCode::new(m * (d - 1) + 1, rows)?;
                Ok(ldpc_code(format!("chain(checks={m},degree={d})"), code))
            }
            Some(other) => bail!("unknown code family {other:?}"),
            None => unreachable!("checked above"),
        }
    }

    fn channel_for_rate(&self, code_rate: f64) -> Result<ChannelSpec> {
        let ch = &self.channel;
        match (ch.sigma, ch.ebn0_db) {
            (Some(s), None) => Ok(ChannelSpec::new(s)?),
            (None, Some(db)) => Ok(snr_to_sigma(db, ch.rate.unwrap_or(code_rate))?),
            _ => bail!("[channel] needs exactly one of sigma, ebn0_db"),
        }
    }

    pub fn channel(&self, code: &Code) -> Result<ChannelSpec> {
        self.channel_for_rate(code.rate)
    }

    pub fn variant(&self) -> Result<Variant> {
        Ok(match self.decoder.variant.as_deref() {
            None | Some("sum-product") => Variant::SumProduct,
            Some("min-sum") => Variant::MinSum,
            Some(v) => bail!("unknown variant {v:?}"),
        })
    }

    fn iterations(&self, default: usize) -> Result<usize> {
        let it = self.decoder.iterations.unwrap_or(default);
        if it == 0 {
            bail!("iterations must be at least 1");
        }
        Ok(it)
    }

    /// The message schedule for BP kinds, or `None` for polar decoders.
    pub fn schedule(&self, code: &Code) -> Result<Option<SchedulePolicy>> {
        let kind = match self.decoder.kind.as_str() {
            "flooding" => ScheduleKind::Flooding,
            "layered" => ScheduleKind::Layered,
            "schedule" => {
                let Some(p) = &self.decoder.schedule_file else { bail!("decoder kind schedule needs schedule_file") };
                let path = self.resolve(p);
                let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                return Ok(Some(SchedulePolicy::from_text(&text, &code.graph)?));
            }
            _ => return Ok(None),
        };
        Ok(Some(make_schedule(&code.graph, kind, self.iterations(20)?)?))
    }

    pub fn decoder(&self, code: &Code) -> Result<DecoderSpec> {
        let variant = self.variant()?;
        if let Some(schedule) = self.schedule(code)? {
            let options = BpOptions {
                variant,
                max_nmp: self.decoder.max_nmp,
                early_termination: self.decoder.early_termination,
                sweep: None,
            };
            return Ok(DecoderSpec::Bp { schedule, options });
        }
        if code.polar.is_none() {
            bail!("decoder {:?} needs a polar code", self.decoder.kind);
        }
        Ok(match self.decoder.kind.as_str() {
            "sc" => DecoderSpec::Sc { variant },
            "ssc" => DecoderSpec::Ssc,
            "scan" => DecoderSpec::Scan { iterations: self.iterations(1)?, variant },
            "polar-bp" => DecoderSpec::PolarBp { iterations: self.iterations(40)?, variant },
            other => bail!("unknown decoder kind {other:?}"),
        })
    }
}

fn ldpc_code(id: String, code: LdpcCode) -> Code {
    Code { id, graph: build_ldpc_graph(&code), polar: None, rate: code.design_rate(), ldpc: Some(code) }
}

fn polar_code(id: String, code: PolarCode) -> Code {
    Code { id, graph: build_polar_graph(&code), rate: code.rate(), polar: Some(code), ldpc: None }
}
