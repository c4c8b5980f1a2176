//! Random graphs, queries and expansions for the randomized checks.

use std::collections::BTreeMap;

use cdag::sampler::{expand, CrossPolicy, ExpansionSpec, InternalPolicy};
use cdag::{Admg, ClusterDag, NodeSet, Partition};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random ADMG on `n` nodes named `V0..`, edges respecting a shuffled order.
pub fn random_admg(rng: &mut ChaCha8Rng, n: usize, p_dir: f64, p_bi: f64) -> Admg {
    let names: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
    let mut order = names.clone();
    order.shuffle(rng);
    let mut d = Vec::new();
    let mut b = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p_dir) {
                d.push((order[i].clone(), order[j].clone()));
            }
            if rng.random_bool(p_bi) {
                b.push((order[i].clone(), order[j].clone()));
            }
        }
    }
    Admg::new(names, d, b).unwrap()
}

pub fn random_cdag(rng: &mut ChaCha8Rng, max_clusters: usize) -> ClusterDag {
    let n = rng.random_range(2..=max_clusters);
    let p_dir = rng.random_range(0.2..0.6);
    let p_bi = rng.random_range(0.0..0.4);
    ClusterDag::direct(random_admg(rng, n, p_dir, p_bi))
}

/// Disjoint `x`, `y`, `z` with `x`, `y` nonempty; each node lands in one of
/// them or none.
pub fn random_query(rng: &mut ChaCha8Rng, g: &Admg) -> (NodeSet, NodeSet, NodeSet) {
    loop {
        let (mut x, mut y, mut z) = (NodeSet::new(), NodeSet::new(), NodeSet::new());
        for n in g.names() {
            match rng.random_range(0..4) {
                0 => x.insert(n.clone()),
                1 => y.insert(n.clone()),
                2 => z.insert(n.clone()),
                _ => false,
            };
        }
        if !x.is_empty() && !y.is_empty() {
            return (x, y, z);
        }
    }
}

/// Random nonempty disjoint `x`, `y`.
pub fn random_effect(rng: &mut ChaCha8Rng, g: &Admg) -> (NodeSet, NodeSet) {
    let (x, y, _) = random_query(rng, g);
    (x, y)
}

pub fn random_sizes(rng: &mut ChaCha8Rng, c: &ClusterDag, max: usize) -> BTreeMap<String, usize> {
    c.graph().names().iter().map(|n| (n.clone(), rng.random_range(1..=max))).collect()
}

/// A compatible expansion under randomly chosen policies.
pub fn random_expansion(rng: &mut ChaCha8Rng, c: &ClusterDag, sizes: BTreeMap<String, usize>) -> (Admg, Partition) {
    let internal = match rng.random_range(0..4) {
        0 => InternalPolicy::Random {
            edge_density: rng.random_range(0.0..1.0),
            bidirected_density: rng.random_range(0.0..0.5),
        },
        1 => InternalPolicy::Chain,
        2 => InternalPolicy::Full,
        _ => InternalPolicy::Empty,
    };
    let cross = match rng.random_range(0..3) {
        0 => CrossPolicy::MinimalWitness,
        1 => CrossPolicy::Random { density: rng.random_range(0.0..1.0) },
        _ => CrossPolicy::Full,
    };
    let mut spec = ExpansionSpec::new(internal, cross, rng.random());
    spec.sizes = sizes;
    expand(c, &spec).unwrap()
}
