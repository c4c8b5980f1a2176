//! Causal effect identification over cluster DAGs.

pub mod cli;
pub mod cluster;
pub mod docalc;
pub mod error;
pub mod formula;
pub mod graph;
pub mod identify;
pub mod oracle;
pub mod sampler;

pub use cluster::{build_cdag, cdag_d_separated, is_compatible, mutilate_cdag, ClusterDag, Partition};
pub use error::{Error, Result};
pub use formula::{JointTable, ProbExpr, Var};
pub use graph::{Admg, NodeSet};
