//! Random diagrams compatible with a cluster DAG.
//!
//! Members of a cluster `C` of size `N > 1` are named `C_1 .. C_N`; a cluster
//! of size one keeps its name. Directed edges inside a cluster always point
//! from a lower to a higher member index and cross-cluster edges follow the
//! cluster edges, so every expansion is acyclic by construction. Each
//! cluster edge first gets one witness edge, which makes the quotient equal
//! to the cluster graph. The witness joins the first members of the two
//! clusters, except under [`CrossPolicy::Random`], where it joins a
//! uniformly drawn pair.
//!
//! Batch item `k` draws from the ChaCha8 stream `k` of the batch seed; a
//! single [`expand`] uses stream 0.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cluster::{ClusterDag, Partition};
use crate::error::{Error, Result};
use crate::graph::Admg;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InternalPolicy {
    /// Each ordered member pair gets a directed edge with probability
    /// `edge_density` and a bidirected edge with probability
    /// `bidirected_density`.
    Random {
        edge_density: f64,
        bidirected_density: f64,
    },
    /// `V_k -> V_k+1` and `V_k <-> V_k+1`.
    Chain,
    /// Every pair, both edge kinds.
    Full,
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CrossPolicy {
    MinimalWitness,
    /// A random witness plus every other cross pair with probability
    /// `density`.
    Random {
        density: f64,
    },
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionSpec {
    /// Clusters not listed have one member.
    #[serde(default)]
    pub sizes: BTreeMap<String, usize>,
    pub internal_policy: InternalPolicy,
    pub cross_policy: CrossPolicy,
    #[serde(default)]
    pub seed: u64,
}

impl ExpansionSpec {
    pub fn new(internal_policy: InternalPolicy, cross_policy: CrossPolicy, seed: u64) -> Self {
        ExpansionSpec { sizes: BTreeMap::new(), internal_policy, cross_policy, seed }
    }

    pub fn with_size(mut self, cluster: &str, size: usize) -> Self {
        self.sizes.insert(cluster.to_string(), size);
        self
    }

    pub fn validate(&self, c: &ClusterDag) -> Result<()> {
        let dens = |d: f64, what: &str| {
            if (0.0..=1.0).contains(&d) {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("{what} must lie in [0, 1], got {d}")))
            }
        };
        if let InternalPolicy::Random { edge_density, bidirected_density } = self.internal_policy {
            dens(edge_density, "edge_density")?;
            dens(bidirected_density, "bidirected_density")?;
        }
        if let CrossPolicy::Random { density } = self.cross_policy {
            dens(density, "density")?;
        }
        for (k, &s) in &self.sizes {
            c.graph().index_of(k)?;
            if s == 0 {
                return Err(Error::InvalidSpec(format!("cluster `{k}` needs at least one member")));
            }
        }
        Ok(())
    }
}

fn members(c: &ClusterDag, sizes: &BTreeMap<String, usize>) -> Result<Vec<Vec<String>>> {
    let out: Vec<Vec<String>> = c
        .graph()
        .names()
        .iter()
        .map(|cl| match sizes.get(cl).copied().unwrap_or(1) {
            1 => vec![cl.clone()],
            n => (1..=n).map(|k| format!("{cl}_{k}")).collect(),
        })
        .collect();
    let mut all: Vec<&String> = out.iter().flatten().collect();
    all.sort();
    if let Some(w) = all.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidSpec(format!("member name `{}` is generated twice", w[0])));
    }
    Ok(out)
}

fn expand_with(c: &ClusterDag, spec: &ExpansionSpec, rng: &mut ChaCha8Rng) -> Result<(Admg, Partition)> {
    spec.validate(c)?;
    let g = c.graph();
    let ms = members(c, &spec.sizes)?;
    let mut directed: Vec<(String, String)> = Vec::new();
    let mut bidirected: Vec<(String, String)> = Vec::new();
    for m in &ms {
        for i in 0..m.len() {
            for j in i + 1..m.len() {
                let (d, b) = match spec.internal_policy {
                    InternalPolicy::Random { edge_density, bidirected_density } => {
                        (rng.random_bool(edge_density), rng.random_bool(bidirected_density))
                    }
                    InternalPolicy::Chain => (j == i + 1, j == i + 1),
                    InternalPolicy::Full => (true, true),
                    InternalPolicy::Empty => (false, false),
                };
                if d {
                    directed.push((m[i].clone(), m[j].clone()));
                }
                if b {
                    bidirected.push((m[i].clone(), m[j].clone()));
                }
            }
        }
    }
    let mut cross = |a: usize, b: usize, out: &mut Vec<(String, String)>| {
        let witness = match spec.cross_policy {
            CrossPolicy::Random { .. } => (rng.random_range(0..ms[a].len()), rng.random_range(0..ms[b].len())),
            _ => (0, 0),
        };
        for (i, u) in ms[a].iter().enumerate() {
            for (j, v) in ms[b].iter().enumerate() {
                let keep = (i, j) == witness
                    || match spec.cross_policy {
                        CrossPolicy::MinimalWitness => false,
                        CrossPolicy::Random { density } => rng.random_bool(density),
                        CrossPolicy::Full => true,
                    };
                if keep {
                    out.push((u.clone(), v.clone()));
                }
            }
        }
    };
    for (a, b) in g.directed_edges() {
        cross(a, b, &mut directed);
    }
    for (a, b) in g.bidirected_edges() {
        cross(a, b, &mut bidirected);
    }
    let admg = Admg::new(ms.iter().flatten().cloned(), directed, bidirected)?;
    let part = Partition::new(g.names().iter().cloned().zip(ms))?;
    Ok((admg, part))
}

/// One compatible expansion of `c`.
pub fn expand(c: &ClusterDag, spec: &ExpansionSpec) -> Result<(Admg, Partition)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    expand_with(c, spec, &mut rng)
}

/// `count` expansions; item `k` uses stream `k` of `spec.seed`.
pub fn sample_batch(c: &ClusterDag, spec: &ExpansionSpec, count: usize) -> Result<Vec<(Admg, Partition)>> {
    (0..count)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(k as u64);
            expand_with(c, spec, &mut rng)
        })
        .collect()
}
