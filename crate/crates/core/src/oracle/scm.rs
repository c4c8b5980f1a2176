//! Counterfactuals by solving deterministic models at fixed exogenous values,
//! and the macro-variable model over clusters.

use std::collections::BTreeMap;

use super::exact::step;
use super::{check_cap, DiscreteCbn, Exogenous};
use crate::cluster::{build_cdag, ClusterDag, Partition};
use crate::error::{Error, Result};
use crate::graph::Admg;

/// `outcome` holds in the submodel where `intervention` is forced.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CfEvent {
    pub outcome: BTreeMap<String, usize>,
    pub intervention: BTreeMap<String, usize>,
}

impl CfEvent {
    pub fn new<O, I, S1, S2>(outcome: O, intervention: I) -> Self
    where
        O: IntoIterator<Item = (S1, usize)>,
        I: IntoIterator<Item = (S2, usize)>,
        S1: Into<String>,
        S2: Into<String>,
    {
        CfEvent {
            outcome: outcome.into_iter().map(|(k, v)| (k.into(), v)).collect(),
            intervention: intervention.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }
}

/// A model whose endogenous values are a function of the exogenous ones.
pub trait Structural {
    fn exogenous(&self) -> &[Exogenous];
    fn index_of(&self, name: &str) -> Result<usize>;
    fn card(&self, i: usize) -> usize;
    /// Endogenous values at `u` with the `fixed` entries forced.
    fn solve(&self, u: &[usize], fixed: &[Option<usize>]) -> Vec<usize>;
    fn size(&self) -> usize;
}

impl Structural for DiscreteCbn {
    fn exogenous(&self) -> &[Exogenous] {
        DiscreteCbn::exogenous(self)
    }

    fn index_of(&self, name: &str) -> Result<usize> {
        self.graph().index_of(name)
    }

    fn card(&self, i: usize) -> usize {
        self.cards()[i]
    }

    fn solve(&self, u: &[usize], fixed: &[Option<usize>]) -> Vec<usize> {
        let mut v = vec![0; self.graph().n()];
        for i in self.graph().topological_indices() {
            v[i] = fixed[i].unwrap_or_else(|| self.value(i, &v, u));
        }
        v
    }

    fn size(&self) -> usize {
        self.graph().n()
    }
}

fn resolve<S: Structural>(s: &S, a: &BTreeMap<String, usize>) -> Result<Vec<(usize, usize)>> {
    a.iter()
        .map(|(k, &v)| {
            let i = s.index_of(k).map_err(|_| Error::InvalidAssignment(format!("unknown variable `{k}`")))?;
            if v >= s.card(i) {
                return Err(Error::InvalidAssignment(format!("{k}={v} is out of range")));
            }
            Ok((i, v))
        })
        .collect()
}

/// Outcome values and the forced values of one event, by index.
type Resolved = (Vec<(usize, usize)>, Vec<Option<usize>>);

/// Probability that every event holds: `sum_u P(u) prod_e 1[event e at u]`.
pub fn counterfactual_prob<S: Structural>(s: &S, events: &[CfEvent]) -> Result<f64> {
    let resolved: Vec<Resolved> = events
        .iter()
        .map(|e| {
            let out = resolve(s, &e.outcome)?;
            let mut fixed = vec![None; s.size()];
            for (i, v) in resolve(s, &e.intervention)? {
                fixed[i] = Some(v);
            }
            Ok((out, fixed))
        })
        .collect::<Result<_>>()?;
    let ucards: Vec<usize> = s.exogenous().iter().map(|u| u.card).collect();
    let all: Vec<usize> = (0..ucards.len()).collect();
    check_cap(ucards.iter().map(|&c| c as u128).product())?;
    let mut u = vec![0usize; ucards.len()];
    let mut total = 0.0;
    loop {
        let holds = resolved.iter().all(|(out, fixed)| {
            let v = s.solve(&u, fixed);
            out.iter().all(|&(i, val)| v[i] == val)
        });
        if holds {
            total += s.exogenous().iter().zip(&u).map(|(e, &k)| e.probs[k]).product::<f64>();
        }
        if !step(&mut u, &all, &ucards) {
            break;
        }
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq)]
struct MacroMechanism {
    members: Vec<usize>,
    parents: Vec<usize>,
    exo: Vec<usize>,
    table: Vec<usize>,
}

/// The model over cluster values: each cluster's members are composed, in
/// topological order, into one function of the parent clusters and the
/// exogenous inputs of its members.
#[derive(Clone, Debug, PartialEq)]
pub struct MacroScm {
    base: DiscreteCbn,
    partition: Partition,
    cdag: ClusterDag,
    cards: Vec<usize>,
    clusters: Vec<MacroMechanism>,
}

impl MacroScm {
    pub fn base(&self) -> &DiscreteCbn {
        &self.base
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn cluster_cards(&self) -> &[usize] {
        &self.cards
    }

    /// Diagram induced by the macro mechanisms: `Ci -> Cj` when `Ci` is an
    /// argument of `Cj`'s function, `Ci <-> Cj` when they read a common
    /// exogenous variable.
    pub fn induced_graph(&self) -> Result<Admg> {
        let names = self.cdag.graph().names();
        let mut directed = Vec::new();
        let mut bidirected = Vec::new();
        for (k, c) in self.clusters.iter().enumerate() {
            for &p in &c.parents {
                directed.push((names[p].clone(), names[k].clone()));
            }
            for (j, d) in self.clusters.iter().enumerate().skip(k + 1) {
                if c.exo.iter().any(|e| d.exo.contains(e)) {
                    bidirected.push((names[k].clone(), names[j].clone()));
                }
            }
        }
        Admg::new(names.iter().cloned(), directed, bidirected)
    }

    /// Value of cluster `k` when its parents take the values in `c`.
    pub fn table_value(&self, k: usize, c: &[usize], u: &[usize]) -> usize {
        let m = &self.clusters[k];
        let mut r = 0;
        for &p in &m.parents {
            r = r * self.cards[p] + c[p];
        }
        for &e in &m.exo {
            r = r * self.base.exogenous()[e].card + u[e];
        }
        m.table[r]
    }
}

impl Structural for MacroScm {
    fn exogenous(&self) -> &[Exogenous] {
        self.base.exogenous()
    }

    fn index_of(&self, name: &str) -> Result<usize> {
        self.cdag.graph().index_of(name)
    }

    fn card(&self, i: usize) -> usize {
        self.cards[i]
    }

    fn solve(&self, u: &[usize], fixed: &[Option<usize>]) -> Vec<usize> {
        let mut c = vec![0; self.cards.len()];
        for k in self.cdag.graph().topological_indices() {
            c[k] = fixed[k].unwrap_or_else(|| self.table_value(k, &c, u));
        }
        c
    }

    fn size(&self) -> usize {
        self.cards.len()
    }
}

/// Writes each cluster value onto the member variables, members in name
/// order with the last member fastest.
fn spread(p: &Partition, g: &Admg, cards: &[usize], cluster: &str, mut value: usize, v: &mut [usize]) -> Result<()> {
    for name in p.members(cluster)?.iter().rev() {
        let i = g.index_of(name)?;
        v[i] = value % cards[i];
        value /= cards[i];
    }
    Ok(())
}

/// Builds the macro model of a deterministic base model under an admissible
/// partition.
pub fn build_macro_scm(m: &DiscreteCbn, p: &Partition) -> Result<MacroScm> {
    if !m.is_deterministic() {
        return Err(Error::NotDeterministic);
    }
    let g = m.graph();
    let cdag = build_cdag(g, p)?;
    let cg = cdag.graph();
    let cards: Vec<usize> = cg
        .names()
        .iter()
        .map(|c| p.members(c).map(|ms| ms.iter().map(|v| m.card_of(v).expect("validated")).product()))
        .collect::<Result<_>>()?;
    let order = g.topological_indices();
    let ucards: Vec<usize> = m.exogenous().iter().map(|u| u.card).collect();
    let mut clusters = Vec::with_capacity(cg.n());
    for k in 0..cg.n() {
        let members: Vec<usize> = p.members(cg.name(k))?.iter().map(|n| g.index_of(n)).collect::<Result<_>>()?;
        let inner: Vec<usize> = order.iter().copied().filter(|i| members.contains(i)).collect();
        let parents = cg.parents_of(k).to_vec();
        let exo: Vec<usize> =
            (0..ucards.len()).filter(|&e| m.exogenous()[e].children.iter().any(|c| members.contains(c))).collect();
        let rows: u128 = parents.iter().map(|&q| cards[q] as u128).product::<u128>()
            * exo.iter().map(|&e| ucards[e] as u128).product::<u128>();
        check_cap(rows)?;
        let mut table = Vec::with_capacity(rows as usize);
        let mut pc = vec![0usize; cg.n()];
        let mut u = vec![0usize; ucards.len()];
        let mut v = vec![0usize; g.n()];
        loop {
            loop {
                for &q in &parents {
                    spread(p, g, m.cards(), cg.name(q), pc[q], &mut v)?;
                }
                for &i in &inner {
                    v[i] = m.value(i, &v, &u);
                }
                table.push(members.iter().fold(0, |acc, &i| acc * m.cards()[i] + v[i]));
                if !step(&mut u, &exo, &ucards) {
                    break;
                }
            }
            if !step(&mut pc, &parents, &cards) {
                break;
            }
        }
        clusters.push(MacroMechanism { members, parents, exo, table });
    }
    Ok(MacroScm { base: m.clone(), partition: p.clone(), cdag, cards, clusters })
}

/// Variable-level form of an assignment to cluster values.
pub fn expand_cluster_assignment(
    m: &DiscreteCbn,
    p: &Partition,
    a: &BTreeMap<String, usize>,
) -> Result<BTreeMap<String, usize>> {
    let g = m.graph();
    let mut v = vec![0usize; g.n()];
    let mut out = BTreeMap::new();
    for (c, &val) in a {
        let size: usize = p.members(c)?.iter().map(|n| m.card_of(n)).product::<Result<usize>>()?;
        if val >= size {
            return Err(Error::InvalidAssignment(format!("{c}={val} is out of range")));
        }
        spread(p, g, m.cards(), c, val, &mut v)?;
        for n in p.members(c)? {
            out.insert(n.clone(), v[g.index_of(n)?]);
        }
    }
    Ok(out)
}
