//! Exact distributions by enumeration.

use std::collections::BTreeMap;

use super::{check_cap, DiscreteCbn};
use crate::cluster::{build_cdag, Partition};
use crate::error::{Error, Result};
use crate::formula::JointTable;
use crate::graph::NodeSet;

/// Advances a mixed-radix counter over `idx`, last position fastest. Returns
/// false after the final state.
pub(crate) fn step(vals: &mut [usize], idx: &[usize], cards: &[usize]) -> bool {
    for &i in idx.iter().rev() {
        vals[i] += 1;
        if vals[i] < cards[i] {
            return true;
        }
        vals[i] = 0;
    }
    false
}

fn product(idx: &[usize], cards: &[usize]) -> u128 {
    idx.iter().map(|&i| cards[i] as u128).product()
}

pub(crate) fn parse_assignment(m: &DiscreteCbn, x: &BTreeMap<String, usize>) -> Result<Vec<Option<usize>>> {
    let mut fixed = vec![None; m.graph().n()];
    for (k, &v) in x {
        let i = m.graph().index_of(k).map_err(|_| Error::InvalidAssignment(format!("unknown variable `{k}`")))?;
        if v >= m.cards()[i] {
            return Err(Error::InvalidAssignment(format!("{k}={v} is out of range")));
        }
        fixed[i] = Some(v);
    }
    Ok(fixed)
}

/// `P(v \ x | do(x))` by truncated factorization. The product over the
/// non-intervened variables is evaluated one c-component at a time, since
/// each exogenous variable feeds a single c-component.
pub fn interventional_distribution(m: &DiscreteCbn, x: &BTreeMap<String, usize>) -> Result<JointTable> {
    let fixed = parse_assignment(m, x)?;
    let g = m.graph();
    let n = g.n();
    let cards = m.cards();
    let active: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
    check_cap(product(&active, cards))?;

    let all = vec![true; n];
    let mut base = vec![0usize; n];
    for i in 0..n {
        if let Some(v) = fixed[i] {
            base[i] = v;
        }
    }
    // (scope variables, table over scope, last fastest)
    let mut factors: Vec<(Vec<usize>, Vec<f64>)> = Vec::new();
    for comp in g.c_component_indices(&all) {
        let members: Vec<usize> = comp.iter().copied().filter(|&i| fixed[i].is_none()).collect();
        if members.is_empty() {
            continue;
        }
        let mut scope: Vec<usize> = members.clone();
        for &i in &members {
            scope.extend(g.parents_of(i).iter().copied().filter(|&p| fixed[p].is_none()));
        }
        scope.sort_unstable();
        scope.dedup();
        let us: Vec<usize> =
            (0..m.exogenous().len()).filter(|&e| m.exogenous()[e].children.iter().any(|c| comp.contains(c))).collect();
        let ucards: Vec<usize> = m.exogenous().iter().map(|u| u.card).collect();
        check_cap(product(&scope, cards) * product(&us, &ucards))?;

        let mut table = Vec::with_capacity(product(&scope, cards) as usize);
        let mut v = base.clone();
        loop {
            let mut u = vec![0usize; ucards.len()];
            let mut q = 0.0;
            loop {
                let mut p: f64 = us.iter().map(|&e| m.exogenous()[e].probs[u[e]]).product();
                for &i in &members {
                    p *= m.row(i, &v, &u)[v[i]];
                }
                q += p;
                if !step(&mut u, &us, &ucards) {
                    break;
                }
            }
            table.push(q);
            if !step(&mut v, &scope, cards) {
                break;
            }
        }
        factors.push((scope, table));
    }

    let mut probs = Vec::with_capacity(product(&active, cards) as usize);
    let mut v = base;
    loop {
        let mut p = 1.0;
        for (scope, table) in &factors {
            let r = scope.iter().fold(0, |acc, &i| acc * cards[i] + v[i]);
            p *= table[r];
        }
        probs.push(p);
        if !step(&mut v, &active, cards) {
            break;
        }
    }
    let names = active.iter().map(|&i| g.name(i).to_string()).collect();
    let acards = active.iter().map(|&i| cards[i]).collect();
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidTable(format!("enumeration lost mass: {total}")));
    }
    JointTable::normalized(names, acards, probs)
}

/// `P(v)`: the interventional distribution under the empty intervention.
pub fn joint_distribution(m: &DiscreteCbn) -> Result<JointTable> {
    interventional_distribution(m, &BTreeMap::new())
}

/// Cluster mechanism `P(c_k | pa(C_k), u'_k)` as a dense table.
struct ClusterTable {
    members: Vec<usize>,
    ext_parents: Vec<usize>,
    exo: Vec<usize>,
    probs: Vec<f64>,
}

fn cluster_table(m: &DiscreteCbn, members: Vec<usize>) -> Result<ClusterTable> {
    let g = m.graph();
    let cards = m.cards();
    let mut ext: Vec<usize> =
        members.iter().flat_map(|&i| g.parents_of(i).iter().copied()).filter(|p| !members.contains(p)).collect();
    ext.sort_unstable();
    ext.dedup();
    let exo: Vec<usize> =
        (0..m.exogenous().len()).filter(|&e| m.exogenous()[e].children.iter().any(|c| members.contains(c))).collect();
    let ucards: Vec<usize> = m.exogenous().iter().map(|u| u.card).collect();
    check_cap(product(&ext, cards) * product(&exo, &ucards) * product(&members, cards))?;

    let mut probs = Vec::new();
    let mut v = vec![0usize; g.n()];
    let mut u = vec![0usize; ucards.len()];
    loop {
        loop {
            let mut row_sum = 0.0;
            loop {
                let p: f64 = members.iter().map(|&i| m.row(i, &v, &u)[v[i]]).product();
                row_sum += p;
                probs.push(p);
                if !step(&mut v, &members, cards) {
                    break;
                }
            }
            if (row_sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidTable(format!("cluster row sums to {row_sum}")));
            }
            if !step(&mut u, &exo, &ucards) {
                break;
            }
        }
        if !step(&mut v, &ext, cards) {
            break;
        }
    }
    Ok(ClusterTable { members, ext_parents: ext, exo, probs })
}

impl ClusterTable {
    fn lookup(&self, v: &[usize], u: &[usize], cards: &[usize], ucards: &[usize]) -> f64 {
        let mut r = 0;
        for &p in &self.ext_parents {
            r = r * cards[p] + v[p];
        }
        for &e in &self.exo {
            r = r * ucards[e] + u[e];
        }
        for &i in &self.members {
            r = r * cards[i] + v[i];
        }
        self.probs[r]
    }
}

/// Largest absolute gap between `P(c \ x | do(x))` from the oracle and the
/// cluster-level assembly `sum_u P(u) prod_k P(c_k | pa(C_k), u'_k)`, over
/// every value of the intervened clusters.
pub fn cluster_factorization_check(m: &DiscreteCbn, p: &Partition, x_clusters: &NodeSet) -> Result<f64> {
    let g = m.graph();
    let c = build_cdag(g, p)?;
    c.graph().mask(x_clusters)?;
    let cards = m.cards();
    let ucards: Vec<usize> = m.exogenous().iter().map(|u| u.card).collect();
    let xs: Vec<usize> = p.expand(x_clusters)?.iter().map(|n| g.index_of(n)).collect::<Result<_>>()?;
    let active: Vec<usize> = (0..g.n()).filter(|i| !xs.contains(i)).collect();
    let all_u: Vec<usize> = (0..ucards.len()).collect();
    check_cap(product(&active, cards) * product(&all_u, &ucards))?;

    let tables: Vec<ClusterTable> = p
        .blocks()
        .iter()
        .filter(|(k, _)| !x_clusters.contains(k))
        .map(|(_, mem)| {
            let idx = mem.iter().map(|n| g.index_of(n)).collect::<Result<Vec<_>>>()?;
            cluster_table(m, idx)
        })
        .collect::<Result<_>>()?;

    let mut worst: f64 = 0.0;
    let mut v = vec![0usize; g.n()];
    loop {
        let assign: BTreeMap<String, usize> = xs.iter().map(|&i| (g.name(i).to_string(), v[i])).collect();
        let left = interventional_distribution(m, &assign)?;
        let mut right = vec![0.0; left.len()];
        let mut u = vec![0usize; ucards.len()];
        loop {
            let pu: f64 = m.exogenous().iter().zip(&u).map(|(e, &k)| e.probs[k]).product();
            let mut w = v.clone();
            let mut r = 0;
            loop {
                let prod: f64 = tables.iter().map(|t| t.lookup(&w, &u, cards, &ucards)).product();
                right[r] += pu * prod;
                r += 1;
                if !step(&mut w, &active, cards) {
                    break;
                }
            }
            if !step(&mut u, &all_u, &ucards) {
                break;
            }
        }
        for (a, b) in left.probs().iter().zip(&right) {
            worst = worst.max((a - b).abs());
        }
        if !step(&mut v, &xs, cards) {
            break;
        }
    }
    Ok(worst)
}
