//! Identification of `P(y | do(x))` on a cluster DAG.
//!
//! The recursion works on c-factors. The graph is first cut down to the
//! ancestors of `Y`. Let `D` be the ancestors of `Y` once `X` is removed. Every
//! c-component `D_i` of `G[D]` sits inside a c-component `S_j` of the whole
//! graph, and `Q[D_i]` is computed from `Q[S_j]` by alternating ancestral
//! marginalization with c-component factorization. When a set is closed
//! under ancestors but strictly larger than the target component, the two
//! sets form a hedge and the effect is not identifiable.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::cluster::{ClusterDag, Partition};
use crate::error::{Error, Result};
use crate::formula::{ProbExpr, Var};
use crate::graph::{check_disjoint, Admg, NodeSet};

/// Outcome of identification.
#[derive(Clone, Debug, PartialEq)]
pub enum IdResult {
    Identified(ProbExpr),
    NonIdentified(Hedge),
}

impl IdResult {
    pub fn is_identified(&self) -> bool {
        matches!(self, IdResult::Identified(_))
    }

    pub fn expr(&self) -> Option<&ProbExpr> {
        match self {
            IdResult::Identified(e) => Some(e),
            IdResult::NonIdentified(_) => None,
        }
    }

    pub fn hedge(&self) -> Option<&Hedge> {
        match self {
            IdResult::Identified(_) => None,
            IdResult::NonIdentified(h) => Some(h),
        }
    }
}

/// An edge subgraph: node set, chosen directed edges and bidirected edges.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Forest {
    pub nodes: NodeSet,
    pub directed: Vec<(String, String)>,
    pub bidirected: Vec<(String, String)>,
}

impl Forest {
    /// Nodes without a child inside the forest.
    pub fn roots(&self) -> NodeSet {
        let tails: BTreeSet<&str> = self.directed.iter().map(|(t, _)| t.as_str()).collect();
        self.nodes.iter().filter(|n| !tails.contains(n.as_str())).cloned().collect()
    }

    fn is_subgraph_of(&self, other: &Forest) -> bool {
        self.nodes.is_subset(&other.nodes)
            && self.directed.iter().all(|e| other.directed.contains(e))
            && self.bidirected.iter().all(|e| other.bidirected.contains(e))
    }

    fn check(&self, g: &Admg, label: &str) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidHedge(format!("{label}: {m}")));
        if self.nodes.is_empty() {
            return bad("empty".into());
        }
        let mut child: BTreeMap<&str, &str> = BTreeMap::new();
        for (t, h) in &self.directed {
            if !self.nodes.contains(t) || !self.nodes.contains(h) {
                return bad(format!("edge {t} -> {h} leaves the forest"));
            }
            if !g.has_directed(g.index_of(t)?, g.index_of(h)?) {
                return bad(format!("{t} -> {h} is not an edge of the graph"));
            }
            if child.insert(t, h).is_some() {
                return bad(format!("{t} has more than one child"));
            }
        }
        // union-find over bidirected edges
        let names: Vec<&String> = self.nodes.iter().collect();
        let pos = |s: &str| names.iter().position(|n| n.as_str() == s);
        let mut parent: Vec<usize> = (0..names.len()).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for (a, b) in &self.bidirected {
            let (Some(i), Some(j)) = (pos(a), pos(b)) else {
                return bad(format!("edge {a} <-> {b} leaves the forest"));
            };
            if !g.has_bidirected(g.index_of(a)?, g.index_of(b)?) {
                return bad(format!("{a} <-> {b} is not an edge of the graph"));
            }
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            parent[ri] = rj;
        }
        let r0 = find(&mut parent, 0);
        if (0..names.len()).any(|i| find(&mut parent, i) != r0) {
            return bad("not a single c-component".into());
        }
        Ok(())
    }
}

/// A pair of forests sharing the root set `R`, with `F'` inside `F`, `F`
/// meeting the intervention and `F'` avoiding it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Hedge {
    pub root_set: NodeSet,
    pub forest_f: Forest,
    pub forest_fprime: Forest,
    pub intersected_x: NodeSet,
}

impl Hedge {
    /// Checks every structural condition of a hedge for `P(y | do(x))` in `g`.
    pub fn validate(&self, g: &Admg, x: &NodeSet, y: &NodeSet) -> Result<()> {
        self.forest_f.check(g, "F")?;
        self.forest_fprime.check(g, "F'")?;
        let bad = |m: &str| Err(Error::InvalidHedge(m.into()));
        if !self.forest_fprime.is_subgraph_of(&self.forest_f) {
            return bad("F' is not contained in F");
        }
        if self.forest_f.roots() != self.root_set || self.forest_fprime.roots() != self.root_set {
            return bad("root sets differ");
        }
        if !self.forest_fprime.nodes.is_disjoint(x) {
            return bad("F' meets the intervention");
        }
        if self.intersected_x != self.forest_f.nodes.intersection(x) || self.intersected_x.is_empty() {
            return bad("F does not meet the intervention");
        }
        let cut = g.mutilate(x, &NodeSet::new())?;
        if !self.root_set.is_subset(&cut.ancestral_closure(y)?) {
            return bad("roots are not ancestors of the effect once x is cut");
        }
        Ok(())
    }
}

impl fmt::Display for Hedge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges = |fo: &Forest| {
            fo.directed
                .iter()
                .map(|(a, b)| format!("{a} -> {b}"))
                .chain(fo.bidirected.iter().map(|(a, b)| format!("{a} <-> {b}")))
                .collect::<Vec<_>>()
                .join(", ")
        };
        writeln!(f, "R = {}", self.root_set)?;
        writeln!(f, "F = {} [{}]", self.forest_f.nodes, edges(&self.forest_f))?;
        writeln!(f, "F' = {} [{}]", self.forest_fprime.nodes, edges(&self.forest_fprime))?;
        write!(f, "F meets x at {}", self.intersected_x)
    }
}

/// `Q[S] = P(s | do(v \ s))` as an expression over the observed clusters.
#[derive(Clone, Debug, PartialEq)]
pub struct QFactor {
    pub scope: NodeSet,
    pub expr: ProbExpr,
}

fn vars_of(g: &Admg, idx: impl IntoIterator<Item = usize>) -> Vec<Var> {
    idx.into_iter().map(|i| Var::new(g.name(i))).collect()
}

/// Product of `P(c_i | c_1, ..., c_{i-1})` over the members of a
/// c-component, in topological order.
pub fn q_factor(c: &ClusterDag, s: &NodeSet) -> Result<QFactor> {
    let g = c.graph();
    if !g.c_components().contains(s) {
        return Err(Error::NotCComponent(s.to_string()));
    }
    let order = g.topological_indices();
    let mut factors = Vec::new();
    for (i, &v) in order.iter().enumerate() {
        if s.contains(g.name(v)) {
            factors.push(ProbExpr::prob_vars(vars_of(g, [v]), vars_of(g, order[..i].iter().copied())));
        }
    }
    Ok(QFactor { scope: s.clone(), expr: ProbExpr::product(factors).simplify() })
}

/// Ancestors of `y` (inclusive) in the subgraph without `x`.
pub fn ancestral_reduce(c: &ClusterDag, x: &NodeSet, y: &NodeSet) -> Result<NodeSet> {
    let g = c.graph();
    let xm = g.mask(x)?;
    let ym = g.mask(y)?;
    let within: Vec<bool> = xm.iter().map(|b| !b).collect();
    let seeds: Vec<usize> = (0..g.n()).filter(|&v| ym[v]).collect();
    Ok(g.set_of_mask(&g.ancestor_mask_within(&seeds, &within)))
}

/// Reduced `Q[S]` for a c-component of `g`: each member is conditioned on
/// its c-component within the prefix of the order, plus that component's
/// parents.
fn q_reduced(g: &Admg, s: &[usize], order: &[usize]) -> ProbExpr {
    let mut factors = Vec::new();
    let mut prefix = vec![false; g.n()];
    for &v in order {
        prefix[v] = true;
        if !s.contains(&v) {
            continue;
        }
        let comp = g.c_component_indices(&prefix).into_iter().find(|c| c.contains(&v)).expect("v lies in the prefix");
        let mut cond: BTreeSet<usize> = comp.iter().copied().collect();
        for &m in &comp {
            cond.extend(g.parents_of(m).iter().copied());
        }
        cond.remove(&v);
        let cond: Vec<usize> = order.iter().copied().filter(|u| cond.contains(u)).collect();
        factors.push(ProbExpr::prob_vars(vars_of(g, [v]), vars_of(g, cond)));
    }
    ProbExpr::product(factors)
}

fn tidy(e: ProbExpr) -> ProbExpr {
    e.hygienic().simplify()
}

fn mask_of(n: usize, s: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &i in s {
        m[i] = true;
    }
    m
}

/// `sum_{t \ keep} q`.
fn marginal(g: &Admg, q: &ProbExpr, t: &[usize], keep: &[bool]) -> ProbExpr {
    let over = vars_of(g, t.iter().copied().filter(|&v| !keep[v]));
    ProbExpr::sum(over, q.clone())
}

/// Computes `Q[c]` from `Q[t]`, or returns the failing `(c, t)` pair.
fn cfactor(
    g: &Admg,
    c: &[usize],
    t: &[usize],
    q: ProbExpr,
    order: &[usize],
) -> std::result::Result<ProbExpr, (Vec<usize>, Vec<usize>)> {
    let n = g.n();
    let tm = mask_of(n, t);
    let am = g.ancestor_mask_within(c, &tm);
    let a: Vec<usize> = (0..n).filter(|&v| am[v]).collect();
    if a.len() == c.len() {
        return Ok(marginal(g, &q, t, &am));
    }
    if a.len() == t.len() {
        return Err((c.to_vec(), t.to_vec()));
    }
    let qa = tidy(marginal(g, &q, t, &am));
    let t2 = g.c_component_indices(&am).into_iter().find(|comp| comp.contains(&c[0])).expect("c lies inside a");
    let order_a: Vec<usize> = order.iter().copied().filter(|&v| am[v]).collect();
    let mut factors = Vec::new();
    let mut prefix = vec![false; n];
    for &v in &order_a {
        let before = prefix.clone();
        prefix[v] = true;
        if !t2.contains(&v) {
            continue;
        }
        let num = marginal(g, &qa, &a, &prefix);
        let den = if before.iter().any(|&b| b) { marginal(g, &qa, &a, &before) } else { ProbExpr::One };
        factors.push(ProbExpr::fraction(num, den));
    }
    cfactor(g, c, &t2, tidy(ProbExpr::product(factors)), order)
}

/// One child per node, chosen to lead towards `targets` inside `within`;
/// nodes of `targets` that already have an entry keep it.
fn choose_children(g: &Admg, within: &[bool], targets: &[usize], child: &mut BTreeMap<usize, usize>) {
    let mut dist = vec![usize::MAX; g.n()];
    let mut queue = VecDeque::new();
    for &t in targets {
        dist[t] = 0;
        queue.push_back(t);
    }
    while let Some(v) = queue.pop_front() {
        for &p in g.parents_of(v) {
            if within[p] && dist[p] == usize::MAX {
                dist[p] = dist[v] + 1;
                child.entry(p).or_insert(v);
                queue.push_back(p);
            }
        }
    }
}

fn forest(g: &Admg, nodes: &[usize], child: &BTreeMap<usize, usize>) -> Forest {
    let m = mask_of(g.n(), nodes);
    let directed = child
        .iter()
        .filter(|(t, h)| m[**t] && m[**h])
        .map(|(&t, &h)| (g.name(t).to_string(), g.name(h).to_string()))
        .collect();
    let bidirected = g
        .bidirected_edges()
        .into_iter()
        .filter(|&(a, b)| m[a] && m[b])
        .map(|(a, b)| (g.name(a).to_string(), g.name(b).to_string()))
        .collect();
    Forest { nodes: g.set_of_indices(nodes), directed, bidirected }
}

/// Hedge from a failing pair: `F' = c`, `F = t`, where every member of `t`
/// is an ancestor of `c` within `t` and both sets are c-components.
fn build_hedge(g: &Admg, c: &[usize], t: &[usize], x: &NodeSet) -> Hedge {
    let n = g.n();
    let cm = mask_of(n, c);
    let tm = mask_of(n, t);
    let mut child = BTreeMap::new();
    // Inside c: each non-sink points at its first child within c.
    for &v in c {
        if let Some(&w) = g.children_of(v).iter().filter(|&&w| cm[w]).min() {
            child.insert(v, w);
        }
    }
    let roots: Vec<usize> = c.iter().copied().filter(|v| !child.contains_key(v)).collect();
    // Outside c: shortest route into c.
    choose_children(g, &tm, c, &mut child);
    let forest_fprime = forest(g, c, &child);
    let forest_f = forest(g, t, &child);
    Hedge { root_set: g.set_of_indices(&roots), intersected_x: forest_f.nodes.intersection(x), forest_f, forest_fprime }
}

/// Orders conditioning sets with treatment symbols first.
fn arrange(e: &ProbExpr, x: &NodeSet) -> ProbExpr {
    match e {
        ProbExpr::One => ProbExpr::One,
        ProbExpr::Prob { target, given } => {
            let mut target = target.clone();
            target.sort();
            let mut given = given.clone();
            given.sort_by_key(|v| (!x.contains(&v.name), v.clone()));
            ProbExpr::Prob { target, given }
        }
        ProbExpr::Product(fs) => ProbExpr::Product(fs.iter().map(|f| arrange(f, x)).collect()),
        ProbExpr::Sum { over, body } => ProbExpr::Sum { over: over.clone(), body: Box::new(arrange(body, x)) },
        ProbExpr::Fraction { num, den } => ProbExpr::fraction(arrange(num, x), arrange(den, x)),
    }
}

fn check_query(g: &Admg, x: &NodeSet, y: &NodeSet) -> Result<()> {
    if x.is_empty() {
        return Err(Error::EmptyIntervention);
    }
    if y.is_empty() {
        return Err(Error::InvalidQuery("y must be nonempty".into()));
    }
    check_disjoint(&[x, y])?;
    g.mask(x)?;
    g.mask(y)?;
    Ok(())
}

/// Identifies `P(y | do(x))` from the observational distribution over the
/// clusters of `c`.
pub fn identify(c: &ClusterDag, x: &NodeSet, y: &NodeSet) -> Result<IdResult> {
    identify_admg(c.graph(), x, y)
}

/// Identification directly on a diagram (every node its own cluster).
pub fn identify_admg(g0: &Admg, x: &NodeSet, y: &NodeSet) -> Result<IdResult> {
    check_query(g0, x, y)?;
    let g = g0.induced(&g0.ancestral_closure(y)?)?;
    let x = x.intersection(&g.node_set());
    let yv = vars_of(&g, y.iter().map(|n| g.index_of(n).expect("y is in its own closure")));
    if x.is_empty() {
        return Ok(IdResult::Identified(ProbExpr::prob_vars(yv, vec![])));
    }
    let n = g.n();
    let order = g.topological_indices();
    let xm = g.mask(&x)?;
    let ym = g.mask(y)?;
    let not_x: Vec<bool> = xm.iter().map(|b| !b).collect();
    let seeds: Vec<usize> = (0..n).filter(|&v| ym[v]).collect();
    let dm = g.ancestor_mask_within(&seeds, &not_x);
    let all = vec![true; n];
    let s_comps = g.c_component_indices(&all);

    let mut factors = Vec::new();
    for di in g.c_component_indices(&dm) {
        let sj = s_comps.iter().find(|s| s.contains(&di[0])).expect("components cover g");
        match cfactor(&g, &di, sj, q_reduced(&g, sj, &order), &order) {
            Ok(q) => factors.push(q),
            Err((c, t)) => {
                let h = build_hedge(&g, &c, &t, &x);
                h.validate(&g, &x, y)?;
                return Ok(IdResult::NonIdentified(h));
            }
        }
    }
    let over = vars_of(&g, (0..n).filter(|&v| dm[v] && !ym[v]));
    let mut e = tidy(ProbExpr::sum(over, ProbExpr::product(factors)));

    // Leftover symbols do not change the value; average them out so the
    // result only mentions the query.
    let extra: Vec<Var> = e.free_vars().into_iter().filter(|v| !x.contains(&v.name) && !y.contains(&v.name)).collect();
    if !extra.is_empty() {
        e = tidy(ProbExpr::sum(extra.clone(), ProbExpr::product(vec![ProbExpr::prob_vars(extra, vec![]), e])));
    }
    let reserved = x.iter().chain(y).map(Var::new).collect();
    Ok(IdResult::Identified(arrange(&e.hygienic_reserving(&reserved), &x)))
}

/// The hedge for a non-identifiable query.
pub fn find_hedge(c: &ClusterDag, x: &NodeSet, y: &NodeSet) -> Result<Hedge> {
    match identify(c, x, y)? {
        IdResult::NonIdentified(h) => Ok(h),
        IdResult::Identified(_) => Err(Error::Identifiable),
    }
}

fn member_name(cluster: &str, k: usize, size: usize) -> String {
    if size == 1 {
        cluster.to_string()
    } else {
        format!("{cluster}_{k}")
    }
}

/// Partition of the witness built by [`hedge_expansion_witness`].
pub fn witness_partition(c: &ClusterDag, sizes: &BTreeMap<String, usize>) -> Result<Partition> {
    let g = c.graph();
    for (k, &s) in sizes {
        g.index_of(k)?;
        if s == 0 {
            return Err(Error::InvalidSpec(format!("cluster {k} needs at least one variable")));
        }
    }
    Partition::new(g.names().iter().map(|cl| {
        let size = sizes.get(cl).copied().unwrap_or(1);
        (cl.clone(), (1..=size).map(|k| member_name(cl, k, size)).collect::<Vec<_>>())
    }))
}

/// Expands each cluster of `c` into a chain `V_1 -> ... -> V_N` with
/// `V_k <-> V_{k+1}` and wires every cross-cluster pair after the cluster
/// edges. Clusters missing from `sizes` keep one variable.
pub fn hedge_expansion_witness(c: &ClusterDag, h: &Hedge, sizes: &BTreeMap<String, usize>) -> Result<Admg> {
    let g = c.graph();
    for n in h.forest_f.nodes.iter() {
        g.index_of(n)?;
    }
    let p = witness_partition(c, sizes)?;
    let members = |cl: &str| p.members(cl).expect("partition covers g").to_vec();
    let mut directed = Vec::new();
    let mut bidirected = Vec::new();
    for cl in g.names() {
        let m = members(cl);
        for w in m.windows(2) {
            directed.push((w[0].clone(), w[1].clone()));
            bidirected.push((w[0].clone(), w[1].clone()));
        }
    }
    for (a, b) in g.directed_edge_names() {
        for u in members(&a) {
            for v in members(&b) {
                directed.push((u.clone(), v));
            }
        }
    }
    for (a, b) in g.bidirected_edge_names() {
        for u in members(&a) {
            for v in members(&b) {
                bidirected.push((u.clone(), v));
            }
        }
    }
    let names: Vec<String> = p.variables().into_iter().collect();
    if names.len() != p.blocks().iter().map(|(_, m)| m.len()).sum::<usize>() {
        return Err(Error::InvalidSpec("expanded variable names collide".into()));
    }
    Admg::new(names, directed, bidirected)
}
