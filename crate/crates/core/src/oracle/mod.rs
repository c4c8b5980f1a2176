//! Exact discrete causal models used as ground truth.
//!
//! A model has one exogenous variable per bidirected edge, shared by its two
//! endpoints, and optionally one private exogenous variable per endogenous
//! variable. Each endogenous variable has a table giving its distribution
//! for every configuration of its endogenous parents and its exogenous
//! variables. A model is deterministic when every row puts all mass on one
//! value.

mod exact;
mod sample;
mod scm;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::graph::Admg;

pub use exact::{cluster_factorization_check, interventional_distribution, joint_distribution};
pub use sample::{empirical_table, sample_dataset, sample_table};
pub use scm::{build_macro_scm, counterfactual_prob, expand_cluster_assignment, CfEvent, MacroScm, Structural};

/// Default cap on enumerated states.
pub const DEFAULT_STATE_CAP: u128 = 1 << 22;

/// The enumeration cap, overridable through `CDAG_STATE_CAP`.
pub fn state_cap() -> u128 {
    std::env::var("CDAG_STATE_CAP").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_STATE_CAP)
}

pub(crate) fn check_cap(needed: u128) -> Result<()> {
    let cap = state_cap();
    if needed > cap {
        return Err(Error::StateSpaceCap { needed, cap });
    }
    Ok(())
}

/// Floor applied to random distribution entries before renormalizing.
pub const PROB_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct Exogenous {
    pub name: String,
    pub card: usize,
    pub probs: Vec<f64>,
    /// Endogenous variables that read this variable: the two endpoints of a
    /// bidirected edge, or a single owner for private noise.
    pub children: Vec<usize>,
}

/// Table for one endogenous variable. Rows enumerate endogenous parents and
/// then exogenous inputs, last input fastest; each row holds `card` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Mechanism {
    pub parents: Vec<usize>,
    pub exo: Vec<usize>,
    pub table: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteCbn {
    graph: Admg,
    cards: Vec<usize>,
    exogenous: Vec<Exogenous>,
    mechanisms: Vec<Mechanism>,
    deterministic: bool,
}

fn check_dist(p: &[f64], what: &str) -> Result<()> {
    if p.iter().any(|x| x.is_nan() || *x < 0.0) {
        return Err(Error::InvalidTable(format!("{what}: negative entry")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidTable(format!("{what}: row sums to {s}")));
    }
    Ok(())
}

impl DiscreteCbn {
    /// Checks shapes, normalization and that shared exogenous variables sit
    /// exactly on the bidirected edges.
    pub fn new(graph: Admg, cards: Vec<usize>, exogenous: Vec<Exogenous>, mechanisms: Vec<Mechanism>) -> Result<Self> {
        let n = graph.n();
        if cards.len() != n || mechanisms.len() != n {
            return Err(Error::InvalidTable("one cardinality and mechanism per variable".into()));
        }
        for (i, &c) in cards.iter().enumerate() {
            if c == 0 {
                return Err(Error::InvalidCardinality(graph.name(i).to_string()));
            }
        }
        let mut shared: Vec<(usize, usize)> = Vec::new();
        for u in &exogenous {
            if u.card == 0 || u.probs.len() != u.card {
                return Err(Error::InvalidCardinality(u.name.clone()));
            }
            check_dist(&u.probs, &u.name)?;
            if u.probs.iter().any(|&p| p <= 0.0) {
                return Err(Error::InvalidTable(format!("{}: P(u) must be positive", u.name)));
            }
            match u.children.as_slice() {
                [a] if *a < n => {}
                [a, b] if *a < n && *b < n && graph.has_bidirected(*a, *b) => {
                    shared.push(if a < b { (*a, *b) } else { (*b, *a) })
                }
                _ => {
                    return Err(Error::InvalidTable(format!(
                        "{} must feed one variable or the endpoints of a bidirected edge",
                        u.name
                    )))
                }
            }
        }
        shared.sort_unstable();
        if shared != graph.bidirected_edges() {
            return Err(Error::InvalidTable(
                "shared exogenous variables must match the bidirected edges one to one".into(),
            ));
        }
        for (i, m) in mechanisms.iter().enumerate() {
            let mut ps = m.parents.clone();
            ps.sort_unstable();
            if ps != graph.parents_of(i) {
                return Err(Error::InvalidTable(format!("parents of {} differ from the graph", graph.name(i))));
            }
            for &e in &m.exo {
                if !exogenous.get(e).is_some_and(|u| u.children.contains(&i)) {
                    return Err(Error::InvalidTable(format!("{} reads an unrelated exogenous", graph.name(i))));
                }
            }
            let expected_exo = exogenous.iter().filter(|u| u.children.contains(&i)).count();
            if expected_exo != m.exo.len() {
                return Err(Error::InvalidTable(format!("{} ignores one of its exogenous inputs", graph.name(i))));
            }
            let rows: usize = m.parents.iter().map(|&p| cards[p]).product::<usize>()
                * m.exo.iter().map(|&e| exogenous[e].card).product::<usize>();
            if m.table.len() != rows * cards[i] {
                return Err(Error::InvalidTable(format!("table of {} has the wrong size", graph.name(i))));
            }
            for row in m.table.chunks(cards[i]) {
                check_dist(row, graph.name(i))?;
            }
        }
        let deterministic = mechanisms.iter().all(|m| m.table.iter().all(|&p| p == 0.0 || p == 1.0));
        Ok(DiscreteCbn { graph, cards, exogenous, mechanisms, deterministic })
    }

    pub fn graph(&self) -> &Admg {
        &self.graph
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn card_of(&self, name: &str) -> Result<usize> {
        Ok(self.cards[self.graph.index_of(name)?])
    }

    pub fn exogenous(&self) -> &[Exogenous] {
        &self.exogenous
    }

    pub fn mechanisms(&self) -> &[Mechanism] {
        &self.mechanisms
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    /// Row of `P(v_i | parents, exogenous)` at full endogenous values `v`
    /// and exogenous values `u`.
    pub(crate) fn row(&self, i: usize, v: &[usize], u: &[usize]) -> &[f64] {
        let m = &self.mechanisms[i];
        let mut r = 0;
        for &p in &m.parents {
            r = r * self.cards[p] + v[p];
        }
        for &e in &m.exo {
            r = r * self.exogenous[e].card + u[e];
        }
        let c = self.cards[i];
        &m.table[r * c..(r + 1) * c]
    }

    /// Value taken by `v_i` in a deterministic model.
    pub(crate) fn value(&self, i: usize, v: &[usize], u: &[usize]) -> usize {
        self.row(i, v, u).iter().position(|&p| p == 1.0).expect("deterministic row")
    }
}

fn dirichlet(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = raw.iter().sum();
    let floored: Vec<f64> = raw.iter().map(|x| (x / s).max(PROB_FLOOR)).collect();
    let t: f64 = floored.iter().sum();
    floored.into_iter().map(|x| x / t).collect()
}

fn resolve_cards(g: &Admg, cards: &BTreeMap<String, usize>) -> Result<Vec<usize>> {
    for (k, &c) in cards {
        g.index_of(k)?;
        if c < 2 {
            return Err(Error::InvalidCardinality(k.clone()));
        }
    }
    Ok(g.names().iter().map(|n| cards.get(n).copied().unwrap_or(2)).collect())
}

fn shared_exogenous(g: &Admg, rng: &mut ChaCha8Rng) -> Vec<Exogenous> {
    g.bidirected_edges()
        .into_iter()
        .map(|(a, b)| Exogenous {
            name: format!("U_{}_{}", g.name(a), g.name(b)),
            card: 2,
            probs: dirichlet(rng, 2),
            children: vec![a, b],
        })
        .collect()
}

fn exo_of(exogenous: &[Exogenous], i: usize) -> Vec<usize> {
    (0..exogenous.len()).filter(|&e| exogenous[e].children.contains(&i)).collect()
}

/// Random model with Dirichlet(1) rows floored at [`PROB_FLOOR`]. Variables
/// missing from `cards` are binary. Private noise lives inside the rows.
pub fn random_cbn(g: &Admg, cards: &BTreeMap<String, usize>, seed: u64) -> Result<DiscreteCbn> {
    let cards = resolve_cards(g, cards)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exogenous = shared_exogenous(g, &mut rng);
    let mut mechanisms = Vec::with_capacity(g.n());
    for i in 0..g.n() {
        let parents = g.parents_of(i).to_vec();
        let exo = exo_of(&exogenous, i);
        let rows: usize = parents.iter().map(|&p| cards[p]).product::<usize>()
            * exo.iter().map(|&e| exogenous[e].card).product::<usize>();
        let table = (0..rows).flat_map(|_| dirichlet(&mut rng, cards[i])).collect();
        mechanisms.push(Mechanism { parents, exo, table });
    }
    DiscreteCbn::new(g.clone(), cards, exogenous, mechanisms)
}

/// Random deterministic model. Each variable gets a private exogenous input
/// with as many values as the variable, and every row of its function is a
/// random permutation of those values, so every value keeps positive mass.
pub fn random_scm(g: &Admg, cards: &BTreeMap<String, usize>, seed: u64) -> Result<DiscreteCbn> {
    let cards = resolve_cards(g, cards)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut exogenous = shared_exogenous(g, &mut rng);
    for (i, &card) in cards.iter().enumerate() {
        exogenous.push(Exogenous {
            name: format!("U_{}", g.name(i)),
            card,
            probs: dirichlet(&mut rng, card),
            children: vec![i],
        });
    }
    let mut mechanisms = Vec::with_capacity(g.n());
    for i in 0..g.n() {
        let parents = g.parents_of(i).to_vec();
        // private input last, so consecutive rows share the other inputs
        let exo = exo_of(&exogenous, i);
        let outer: usize = parents.iter().map(|&p| cards[p]).product::<usize>()
            * exo[..exo.len() - 1].iter().map(|&e| exogenous[e].card).product::<usize>();
        let k = cards[i];
        let mut table = Vec::with_capacity(outer * k * k);
        for _ in 0..outer {
            let mut perm: Vec<usize> = (0..k).collect();
            perm.shuffle(&mut rng);
            for &val in &perm {
                table.extend((0..k).map(|j| if j == val { 1.0 } else { 0.0 }));
            }
        }
        mechanisms.push(Mechanism { parents, exo, table });
    }
    DiscreteCbn::new(g.clone(), cards, exogenous, mechanisms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bow() -> Admg {
        Admg::new(["X", "Y"], [("X", "Y")], [("X", "Y")]).unwrap()
    }

    #[test]
    fn random_models_are_reproducible() {
        let a = random_cbn(&bow(), &BTreeMap::new(), 7).unwrap();
        let b = random_cbn(&bow(), &BTreeMap::new(), 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_cbn(&bow(), &BTreeMap::new(), 8).unwrap());
        for m in a.mechanisms() {
            for row in m.table.chunks(2) {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(row.iter().all(|&p| p > 0.0));
            }
        }
        assert_eq!(a.exogenous().len(), 1);
        assert!(!a.is_deterministic());
    }

    #[test]
    fn deterministic_mode() {
        let cards = BTreeMap::from([("Y".to_string(), 3)]);
        let m = random_scm(&bow(), &cards, 1).unwrap();
        assert!(m.is_deterministic());
        assert_eq!(m.exogenous().len(), 3);
        assert_eq!(m.cards(), &[2, 3]);
    }

    #[test]
    fn rejects_bad_cards() {
        let cards = BTreeMap::from([("Y".to_string(), 1)]);
        assert!(matches!(random_cbn(&bow(), &cards, 0), Err(Error::InvalidCardinality(_))));
        let cards = BTreeMap::from([("Q".to_string(), 2)]);
        assert!(random_cbn(&bow(), &cards, 0).is_err());
    }

    #[test]
    fn shared_noise_must_match_edges() {
        let g = bow();
        let m = random_cbn(&g, &BTreeMap::new(), 0).unwrap();
        let mut exo = m.exogenous().to_vec();
        exo[0].children = vec![0];
        assert!(DiscreteCbn::new(g, m.cards().to_vec(), exo, m.mechanisms().to_vec()).is_err());
    }
}
