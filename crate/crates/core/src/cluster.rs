//! Partitions of an ADMG's variables and the cluster DAGs they induce.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{check_disjoint, Admg, NodeSet};

/// A partition of variables into named clusters. Blocks are kept sorted by
/// cluster name and members sorted by variable name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    blocks: Vec<(String, Vec<String>)>,
    #[serde(skip)]
    owner: BTreeMap<String, usize>,
}

impl Partition {
    pub fn new<C, V, S1, S2>(blocks: C) -> Result<Self>
    where
        C: IntoIterator<Item = (S1, V)>,
        V: IntoIterator<Item = S2>,
        S1: Into<String>,
        S2: Into<String>,
    {
        let mut map: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (name, members) in blocks {
            let name = name.into();
            let members: BTreeSet<String> = members.into_iter().map(Into::into).collect();
            if members.is_empty() {
                return Err(Error::PartitionMismatch(format!("cluster `{name}` is empty")));
            }
            if map.insert(name.clone(), members).is_some() {
                return Err(Error::PartitionMismatch(format!("cluster `{name}` declared twice")));
            }
        }
        let blocks: Vec<(String, Vec<String>)> = map.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect();
        let mut owner = BTreeMap::new();
        for (i, (c, members)) in blocks.iter().enumerate() {
            for v in members {
                if owner.insert(v.clone(), i).is_some() {
                    return Err(Error::PartitionMismatch(format!(
                        "variable `{v}` is in more than one cluster (second: `{c}`)"
                    )));
                }
            }
        }
        Ok(Partition { blocks, owner })
    }

    /// Every variable of `g` in a cluster of its own, named after it.
    pub fn singletons(g: &Admg) -> Self {
        Self::new(g.names().iter().map(|n| (n.clone(), [n.clone()]))).expect("names are unique")
    }

    pub fn blocks(&self) -> &[(String, Vec<String>)] {
        &self.blocks
    }

    pub fn cluster_names(&self) -> impl Iterator<Item = &str> + '_ {
        self.blocks.iter().map(|(c, _)| c.as_str())
    }

    pub fn members(&self, cluster: &str) -> Result<&[String]> {
        self.blocks
            .iter()
            .find(|(c, _)| c == cluster)
            .map(|(_, m)| m.as_slice())
            .ok_or_else(|| Error::UnknownNode(cluster.to_string()))
    }

    pub fn cluster_of(&self, var: &str) -> Result<&str> {
        self.owner.get(var).map(|&i| self.blocks[i].0.as_str()).ok_or_else(|| Error::UnknownNode(var.to_string()))
    }

    pub fn variables(&self) -> NodeSet {
        self.owner.keys().cloned().collect()
    }

    /// Union of the members of the given clusters.
    pub fn expand(&self, clusters: &NodeSet) -> Result<NodeSet> {
        let mut out = NodeSet::new();
        for c in clusters {
            out.extend(self.members(c)?.iter().cloned());
        }
        Ok(out)
    }

    pub fn is_singleton(&self) -> bool {
        self.blocks.iter().all(|(c, m)| m.len() == 1 && &m[0] == c)
    }

    /// Errors unless the blocks cover exactly the nodes of `g`.
    pub fn validate_for(&self, g: &Admg) -> Result<()> {
        for v in self.owner.keys() {
            if !g.contains(v) {
                return Err(Error::PartitionMismatch(format!("`{v}` is not a node of the graph")));
            }
        }
        for v in g.names() {
            if !self.owner.contains_key(v) {
                return Err(Error::PartitionMismatch(format!("`{v}` is not in any cluster")));
            }
        }
        Ok(())
    }

    fn rebuild_owner(&mut self) {
        self.owner =
            self.blocks.iter().enumerate().flat_map(|(i, (_, m))| m.iter().map(move |v| (v.clone(), i))).collect();
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let mut p: Partition = serde_json::from_str(s).map_err(|e| Error::PartitionMismatch(e.to_string()))?;
        p.rebuild_owner();
        Partition::new(p.blocks)
    }
}

/// A cluster DAG: a mixed graph over cluster nodes, optionally with the
/// partition of an underlying diagram it was built from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterDag {
    graph: Admg,
    partition: Option<Partition>,
}

impl ClusterDag {
    /// A C-DAG given directly as domain knowledge, with no known underlying
    /// diagram.
    pub fn direct(graph: Admg) -> Self {
        ClusterDag { graph, partition: None }
    }

    pub fn graph(&self) -> &Admg {
        &self.graph
    }

    pub fn partition(&self) -> Option<&Partition> {
        self.partition.as_ref()
    }

    /// The cluster graph as a plain diagram over cluster names.
    pub fn as_admg(&self) -> Admg {
        self.graph.clone()
    }

    /// Variables behind a set of clusters; clusters stand for themselves when
    /// no partition is attached.
    pub fn variables_of(&self, clusters: &NodeSet) -> Result<NodeSet> {
        for c in clusters {
            self.graph.index_of(c)?;
        }
        match &self.partition {
            Some(p) => p.expand(clusters),
            None => Ok(clusters.clone()),
        }
    }

    pub fn mutilate(&self, cut_into: &NodeSet, cut_out_of: &NodeSet) -> Result<ClusterDag> {
        Ok(ClusterDag { graph: self.graph.mutilate(cut_into, cut_out_of)?, partition: self.partition.clone() })
    }

    pub fn d_separated(&self, x: &NodeSet, y: &NodeSet, z: &NodeSet) -> Result<bool> {
        self.graph.m_separated(x, y, z)
    }
}

/// Quotient of `g` under `p`: `Ci -> Cj` iff some member of `Ci` is a parent
/// of some member of `Cj`, `Ci <-> Cj` iff some bidirected edge crosses the
/// two clusters. Intra-cluster edges are dropped. Fails when the quotient has
/// a directed cycle.
pub fn build_cdag(g: &Admg, p: &Partition) -> Result<ClusterDag> {
    p.validate_for(g)?;
    let cluster = |i: usize| p.cluster_of(g.name(i)).expect("validated").to_string();
    let mut directed = BTreeSet::new();
    for (a, b) in g.directed_edges() {
        let (ca, cb) = (cluster(a), cluster(b));
        if ca != cb {
            directed.insert((ca, cb));
        }
    }
    let mut bidirected = BTreeSet::new();
    for (a, b) in g.bidirected_edges() {
        let (ca, cb) = (cluster(a), cluster(b));
        if ca != cb {
            bidirected.insert(if ca < cb { (ca, cb) } else { (cb, ca) });
        }
    }
    let graph = Admg::new(p.cluster_names(), directed, bidirected).map_err(|e| match e {
        Error::Cycle(c) => Error::Inadmissible(c),
        other => other,
    })?;
    Ok(ClusterDag { graph, partition: Some(p.clone()) })
}

/// True iff `g` partitioned by `p` has exactly the cluster graph of `c`.
pub fn is_compatible(g: &Admg, c: &ClusterDag, p: &Partition) -> Result<bool> {
    p.validate_for(g)?;
    let names: BTreeSet<&str> = p.cluster_names().collect();
    let cnodes: BTreeSet<&str> = c.graph.names().iter().map(String::as_str).collect();
    if names != cnodes {
        return Err(Error::PartitionMismatch("partition clusters differ from the C-DAG's nodes".into()));
    }
    match build_cdag(g, p) {
        Ok(built) => Ok(built.graph == c.graph),
        Err(Error::Inadmissible(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Cluster-level mutilation; commutes with building the C-DAG from the
/// variable-level mutilation on the member variables.
pub fn mutilate_cdag(c: &ClusterDag, cut_into: &NodeSet, cut_out_of: &NodeSet) -> Result<ClusterDag> {
    c.mutilate(cut_into, cut_out_of)
}

/// d-separation between sets of clusters in the cluster graph.
pub fn cdag_d_separated(c: &ClusterDag, x: &NodeSet, y: &NodeSet, z: &NodeSet) -> Result<bool> {
    check_disjoint(&[x, y, z])?;
    c.d_separated(x, y, z)
}
