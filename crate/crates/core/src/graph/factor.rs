use super::{LdpcCode, PolarCode};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarNodeKind {
    Channel,
    InfoBit,
    FrozenBit,
    Internal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarNode {
    pub kind: VarNodeKind,
    /// Index into the channel LLR vector when this node observes the channel.
    pub channel: Option<usize>,
    /// Incident undirected edges, ascending.
    pub edges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckNode {
    pub edges: Vec<usize>,
}

impl CheckNode {
    pub fn degree(&self) -> usize {
        self.edges.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub var: usize,
    pub check: usize,
    pub kernel: Option<usize>,
}

/// Direction of a message on an undirected edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dir {
    V2C,
    C2V,
}

/// Edge `e` carries label `2e+1` towards its check and `2e+2` towards its variable.
#[inline]
pub fn label_of(edge: usize, dir: Dir) -> usize {
    match dir {
        Dir::V2C => 2 * edge + 1,
        Dir::C2V => 2 * edge + 2,
    }
}

/// One 2x2 polar kernel: `upper`/`lower` sit in column `stage`, `out` in column `stage + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Kernel {
    pub stage: usize,
    pub row: usize,
    pub half: usize,
    pub upper: usize,
    pub lower: usize,
    pub out: usize,
    /// Edges towards `upper`, `lower`, `out`.
    pub edges: [usize; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarLayout {
    pub n: usize,
    pub s: usize,
    pub kernels: Vec<Kernel>,
    /// `vn_at[c][r]`: variable node covering position (column c, row r).
    pub vn_at: Vec<Vec<usize>>,
}

impl PolarLayout {
    /// Kernel index for the pair starting at `row` (bit `stage` of `row` clear).
    #[inline]
    pub fn kernel_at(&self, stage: usize, row: usize) -> usize {
        let low = row & ((1 << stage) - 1);
        let high = row >> (stage + 1);
        stage * (self.n / 2) + ((high << stage) | low)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorGraph {
    pub var_nodes: Vec<VarNode>,
    pub check_nodes: Vec<CheckNode>,
    pub edges: Vec<Edge>,
    pub polar: Option<PolarLayout>,
}

impl FactorGraph {
    pub fn n_vars(&self) -> usize {
        self.var_nodes.len()
    }
    pub fn n_checks(&self) -> usize {
        self.check_nodes.len()
    }
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn n_labels(&self) -> usize {
        2 * self.edges.len()
    }
    pub fn n_channels(&self) -> usize {
        self.var_nodes.iter().filter(|v| v.channel.is_some()).count()
    }

    /// Inverse of [`label_of`], validated against this graph.
    pub fn decode_label(&self, label: usize) -> Result<(usize, Dir)> {
        if label == 0 || label > self.n_labels() {
            return Err(Error::InvalidLabel { label, max: self.n_labels() });
        }
        let e = (label - 1) / 2;
        Ok((e, if label % 2 == 1 { Dir::V2C } else { Dir::C2V }))
    }

    /// `(#VN - #CN) / #VN`, the rate implied by the graph's constraint count.
    pub fn graph_rate(&self) -> f64 {
        1.0 - self.n_checks() as f64 / self.n_vars() as f64
    }

    fn link(vars: &mut [VarNode], checks: &mut [CheckNode], edges: &[Edge]) {
        for (e, edge) in edges.iter().enumerate() {
            vars[edge.var].edges.push(e);
            checks[edge.check].edges.push(e);
        }
    }

    /// True iff the graph has no cycle. Each component then has `|E| = |V| - 1`.
    pub fn is_tree(&self) -> bool {
        let nv = self.n_vars();
        let mut parent: Vec<usize> = (0..nv + self.n_checks()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in &self.edges {
            let a = find(&mut parent, e.var);
            let b = find(&mut parent, nv + e.check);
            if a == b {
                return false;
            }
            parent[a] = b;
        }
        true
    }
}

/// One channel variable per column and one check per row; edges ordered row-major.
pub fn build_ldpc_graph(code: &LdpcCode) -> FactorGraph {
    let mut vars: Vec<VarNode> = (0..code.n_vars)
        .map(|v| VarNode { kind: VarNodeKind::Channel, channel: Some(v), edges: Vec::new() })
        .collect();
    let mut checks = vec![CheckNode { edges: Vec::new() }; code.n_checks];
    let edges: Vec<Edge> = code
        .rows
        .iter()
        .enumerate()
        .flat_map(|(c, row)| row.iter().map(move |&v| Edge { var: v, check: c, kernel: None }))
        .collect();
    FactorGraph::link(&mut vars, &mut checks, &edges);
    FactorGraph { var_nodes: vars, check_nodes: checks, edges, polar: None }
}

/// Polar factor graph with one degree-3 check per kernel.
///
/// Position (c, r) is merged with (c+1, r) when bit c of r is set, so the
/// lower-right position of every kernel is the same node as its lower-left.
pub fn build_polar_graph(code: &PolarCode) -> FactorGraph {
    let (n, s) = (code.n, code.s);
    let mut vn_at = vec![vec![usize::MAX; n]; s + 1];
    let mut vars = Vec::new();
    for c in 0..=s {
        for r in 0..n {
            if c > 0 && (r >> (c - 1)) & 1 == 1 {
                vn_at[c][r] = vn_at[c - 1][r];
                continue;
            }
            vn_at[c][r] = vars.len();
            vars.push(VarNode { kind: VarNodeKind::Internal, channel: None, edges: Vec::new() });
        }
    }
    for r in 0..n {
        let left = vn_at[0][r];
        vars[left].kind =
            if code.is_frozen(r) { VarNodeKind::FrozenBit } else { VarNodeKind::InfoBit };
        let right = vn_at[s][r];
        vars[right].channel = Some(r);
        if right != left {
            vars[right].kind = VarNodeKind::Channel;
        }
    }

    let mut kernels = Vec::with_capacity(s * n / 2);
    let mut edges = Vec::with_capacity(3 * s * n / 2);
    for stage in 0..s {
        let half = 1 << stage;
        for row in (0..n).filter(|r| (r >> stage) & 1 == 0) {
            let k = kernels.len();
            let upper = vn_at[stage][row];
            let lower = vn_at[stage][row + half];
            let out = vn_at[stage + 1][row];
            let base = edges.len();
            for v in [upper, lower, out] {
                edges.push(Edge { var: v, check: k, kernel: Some(k) });
            }
            kernels.push(Kernel {
                stage,
                row,
                half,
                upper,
                lower,
                out,
                edges: [base, base + 1, base + 2],
            });
        }
    }
    let mut checks = vec![CheckNode { edges: Vec::new() }; kernels.len()];
    FactorGraph::link(&mut vars, &mut checks, &edges);
    FactorGraph {
        var_nodes: vars,
        check_nodes: checks,
        edges,
        polar: Some(PolarLayout { n, s, kernels, vn_at }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn polar(n: usize) -> FactorGraph {
        build_polar_graph(&PolarCode::new(n, (n / 2..n).collect()).unwrap())
    }

    #[test]
    fn ldpc_graph_counts_and_labels() {
        let code = LdpcCode::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let g = build_ldpc_graph(&code);
        assert_eq!((g.n_vars(), g.n_checks(), g.n_edges(), g.n_labels()), (3, 2, 4, 8));
        assert!(g.var_nodes.iter().all(|v| v.kind == VarNodeKind::Channel));
        assert_eq!(g.edges[2], Edge { var: 1, check: 1, kernel: None });
        for label in 1..=g.n_labels() {
            let (e, d) = g.decode_label(label).unwrap();
            assert_eq!(label_of(e, d), label);
        }
        assert!(g.decode_label(0).is_err());
        assert!(g.decode_label(9).is_err());
    }

    #[test]
    fn four_by_two_code_is_all_channel() {
        let code = LdpcCode::new(4, vec![vec![0, 1, 2], vec![1, 2, 3]]).unwrap();
        let g = build_ldpc_graph(&code);
        assert_eq!((g.n_vars(), g.n_checks()), (4, 2));
        assert!(g.var_nodes.iter().all(|v| v.kind == VarNodeKind::Channel));
    }

    #[test]
    fn polar_counts() {
        for s in 1..=5 {
            let n = 1 << s;
            let g = polar(n);
            assert_eq!(g.n_checks(), n / 2 * s);
            assert_eq!(g.n_vars(), n + n * s / 2);
            assert!(g.check_nodes.iter().all(|c| c.degree() == 3));
            assert!(g.edges.iter().all(|e| e.kernel.is_some()));
        }
        assert_eq!(polar(4).n_vars(), 8);
        assert_eq!(polar(8).n_vars(), 20);
    }

    #[test]
    fn single_kernel_gadget() {
        let g = polar(2);
        assert_eq!(g.n_vars(), 3);
        let k = g.polar.as_ref().unwrap().kernels[0];
        assert_eq!(g.var_nodes[k.upper].kind, VarNodeKind::FrozenBit);
        assert_eq!(g.var_nodes[k.lower].kind, VarNodeKind::InfoBit);
        assert_eq!(g.var_nodes[k.lower].channel, Some(1));
        assert_eq!(g.var_nodes[k.out].kind, VarNodeKind::Channel);
        assert_eq!(g.var_nodes[k.out].channel, Some(0));
    }

    #[test]
    fn kernel_lookup_matches_construction() {
        let g = polar(16);
        let lay = g.polar.as_ref().unwrap();
        for (i, k) in lay.kernels.iter().enumerate() {
            assert_eq!(lay.kernel_at(k.stage, k.row), i);
        }
    }

    #[test]
    fn tree_detection() {
        let path = LdpcCode::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        assert!(build_ldpc_graph(&path).is_tree());
        let cyc = LdpcCode::new(2, vec![vec![0, 1], vec![0, 1]]).unwrap();
        assert!(!build_ldpc_graph(&cyc).is_tree());
        assert!(polar(2).is_tree());
        assert!(!polar(4).is_tree());
    }
}
