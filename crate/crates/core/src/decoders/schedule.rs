use crate::error::{Error, Result};
use crate::graph::{label_of, Dir, FactorGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScheduleKind {
    /// All V2C messages in edge order, then all C2V messages.
    Flooding,
    /// Check by check in index order: V2C into the check, then C2V out of it.
    Layered,
}

/// Fixed message order as directed edge labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SchedulePolicy {
    pub labels: Vec<usize>,
}

impl SchedulePolicy {
    pub fn len(&self) -> usize {
        self.labels.len()
    }
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn validate(&self, graph: &FactorGraph) -> Result<()> {
        match self.labels.iter().find(|&&l| l == 0 || l > graph.n_labels()) {
            Some(&label) => Err(Error::InvalidLabel { label, max: graph.n_labels() }),
            None => Ok(()),
        }
    }

    /// One label per line; blank lines and `#` comments are ignored.
    pub fn from_text(text: &str, graph: &FactorGraph) -> Result<Self> {
        let mut labels = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let label: usize = t.parse().map_err(|_| Error::Parse {
                line: i + 1,
                msg: format!("`{t}` is not an edge label"),
            })?;
            if label == 0 || label > graph.n_labels() {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("label {label} outside 1..={}", graph.n_labels()),
                });
            }
            labels.push(label);
        }
        Ok(Self { labels })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.labels.len() * 6);
        for l in &self.labels {
            s.push_str(&l.to_string());
            s.push('\n');
        }
        s
    }

    /// FNV-1a over the labels, for provenance headers.
    pub fn hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for l in &self.labels {
            for b in (*l as u64).to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }

    /// Labels of one check-node batch: V2C into the check, then C2V out of it.
    pub fn check_batch(graph: &FactorGraph, check: usize) -> Vec<usize> {
        let edges = &graph.check_nodes[check].edges;
        edges
            .iter()
            .map(|&e| label_of(e, Dir::V2C))
            .chain(edges.iter().map(|&e| label_of(e, Dir::C2V)))
            .collect()
    }
}

pub fn make_schedule(graph: &FactorGraph, kind: ScheduleKind, iterations: usize) -> Result<SchedulePolicy> {
    if iterations == 0 {
        return Err(Error::InvalidArgument("iterations must be at least 1".into()));
    }
    let one: Vec<usize> = match kind {
        ScheduleKind::Flooding => (0..graph.n_edges())
            .map(|e| label_of(e, Dir::V2C))
            .chain((0..graph.n_edges()).map(|e| label_of(e, Dir::C2V)))
            .collect(),
        ScheduleKind::Layered => (0..graph.n_checks())
            .flat_map(|c| SchedulePolicy::check_batch(graph, c))
            .collect(),
    };
    Ok(SchedulePolicy { labels: one.repeat(iterations) })
}
