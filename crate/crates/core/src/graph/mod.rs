//! Codes and their factor graphs.

mod factor;
mod ldpc;
mod polar;

pub use factor::{
    build_ldpc_graph, build_polar_graph, label_of, CheckNode, Dir, Edge, FactorGraph, Kernel,
    PolarLayout, VarNode, VarNodeKind,
};
pub use ldpc::{load_alist, LdpcCode};
pub use polar::{bit_channel_means, construct_polar, load_polar_spec, PolarCode};
