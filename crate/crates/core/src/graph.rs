//! Acyclic directed mixed graphs (ADMGs) and the graph algorithms the rest of
//! the crate is built on: kinship, mutilation, c-components and m-separation.
//!
//! Nodes are kept in lexicographic order and addressed internally by index, so
//! every derived ordering (topological order, component order, rendering) is
//! reproducible.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A set of node names.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeSet(BTreeSet<String>);

impl NodeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>) -> bool {
        self.0.insert(name.into())
    }

    pub fn remove(&mut self, name: &str) -> bool {
        self.0.remove(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains(name)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &String> + '_ {
        self.0.iter()
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        NodeSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        NodeSet(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        NodeSet(self.0.difference(&other.0).cloned().collect())
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &NodeSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn as_set(&self) -> &BTreeSet<String> {
        &self.0
    }
}

impl<S: Into<String>> FromIterator<S> for NodeSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        NodeSet(iter.into_iter().map(Into::into).collect())
    }
}

impl<S: Into<String>> Extend<S> for NodeSet {
    fn extend<I: IntoIterator<Item = S>>(&mut self, iter: I) {
        self.0.extend(iter.into_iter().map(Into::into));
    }
}

impl IntoIterator for NodeSet {
    type Item = String;
    type IntoIter = std::collections::btree_set::IntoIter<String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a NodeSet {
    type Item = &'a String;
    type IntoIter = std::collections::btree_set::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "}}")
    }
}

/// Shorthand for building a [`NodeSet`] from string literals.
#[macro_export]
macro_rules! nodes {
    () => { $crate::graph::NodeSet::new() };
    ($($n:expr),+ $(,)?) => {
        [$($n),+].into_iter().collect::<$crate::graph::NodeSet>()
    };
}

/// An acyclic directed mixed graph. Bidirected edges encode latent
/// confounding; kinship relations follow directed edges only.
///
/// Values are valid by construction: no self-loops, endpoints are known
/// nodes and the directed part is acyclic.
#[derive(Clone, PartialEq, Eq)]
pub struct Admg {
    names: Vec<String>,
    index: BTreeMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    siblings: Vec<Vec<usize>>,
}

impl Admg {
    /// Builds a graph. Duplicate edges collapse; bidirected edges are
    /// unordered.
    pub fn new<N, D, B, S1, S2, S3, S4, S5>(nodes: N, directed: D, bidirected: B) -> Result<Self>
    where
        N: IntoIterator<Item = S1>,
        D: IntoIterator<Item = (S2, S3)>,
        B: IntoIterator<Item = (S4, S5)>,
        S1: Into<String>,
        S2: AsRef<str>,
        S3: AsRef<str>,
        S4: AsRef<str>,
        S5: AsRef<str>,
    {
        let set: BTreeSet<String> = nodes.into_iter().map(Into::into).collect();
        let names: Vec<String> = set.into_iter().collect();
        let index: BTreeMap<String, usize> = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let lookup = |s: &str| index.get(s).copied().ok_or_else(|| Error::UnknownNode(s.to_string()));

        let n = names.len();
        let mut parents = vec![BTreeSet::new(); n];
        let mut siblings = vec![BTreeSet::new(); n];
        for (a, b) in directed {
            let (a, b) = (lookup(a.as_ref())?, lookup(b.as_ref())?);
            if a == b {
                return Err(Error::SelfLoop(names[a].clone()));
            }
            parents[b].insert(a);
        }
        for (a, b) in bidirected {
            let (a, b) = (lookup(a.as_ref())?, lookup(b.as_ref())?);
            if a == b {
                return Err(Error::SelfLoop(names[a].clone()));
            }
            siblings[a].insert(b);
            siblings[b].insert(a);
        }
        Self::from_index_sets(names, parents, siblings)
    }

    fn from_index_sets(
        names: Vec<String>,
        parents: Vec<BTreeSet<usize>>,
        siblings: Vec<BTreeSet<usize>>,
    ) -> Result<Self> {
        let n = names.len();
        let index = names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let mut children = vec![Vec::new(); n];
        for (v, ps) in parents.iter().enumerate() {
            for &p in ps {
                children[p].push(v);
            }
        }
        let g = Admg {
            names,
            index,
            parents: parents.into_iter().map(|s| s.into_iter().collect()).collect(),
            children,
            siblings: siblings.into_iter().map(|s| s.into_iter().collect()).collect(),
        };
        if let Some(cycle) = g.find_cycle() {
            return Err(Error::Cycle(cycle.into_iter().map(|i| g.names[i].clone()).collect()));
        }
        Ok(g)
    }

    /// Graph with the given nodes and no edges.
    pub fn empty<S: Into<String>>(nodes: impl IntoIterator<Item = S>) -> Self {
        Self::new(nodes, Vec::<(&str, &str)>::new(), Vec::<(&str, &str)>::new())
            .expect("edgeless graph is always valid")
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn node_set(&self) -> NodeSet {
        self.names.iter().cloned().collect()
    }

    pub fn parents_of(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children_of(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn siblings_of(&self, v: usize) -> &[usize] {
        &self.siblings[v]
    }

    /// Directed edges as `(tail, head)` index pairs, sorted.
    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<_> = (0..self.n()).flat_map(|v| self.parents[v].iter().map(move |&p| (p, v))).collect();
        e.sort_unstable();
        e
    }

    /// Bidirected edges as `(a, b)` index pairs with `a < b`, sorted.
    pub fn bidirected_edges(&self) -> Vec<(usize, usize)> {
        (0..self.n()).flat_map(|v| self.siblings[v].iter().filter(move |&&s| v < s).map(move |&s| (v, s))).collect()
    }

    pub fn directed_edge_names(&self) -> Vec<(String, String)> {
        self.directed_edges().into_iter().map(|(a, b)| (self.names[a].clone(), self.names[b].clone())).collect()
    }

    pub fn bidirected_edge_names(&self) -> Vec<(String, String)> {
        self.bidirected_edges().into_iter().map(|(a, b)| (self.names[a].clone(), self.names[b].clone())).collect()
    }

    pub fn has_directed(&self, tail: usize, head: usize) -> bool {
        self.parents[head].binary_search(&tail).is_ok()
    }

    pub fn has_bidirected(&self, a: usize, b: usize) -> bool {
        self.siblings[a].binary_search(&b).is_ok()
    }

    pub fn mask(&self, s: &NodeSet) -> Result<Vec<bool>> {
        let mut m = vec![false; self.n()];
        for name in s {
            m[self.index_of(name)?] = true;
        }
        Ok(m)
    }

    pub fn set_of_mask(&self, m: &[bool]) -> NodeSet {
        m.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| self.names[i].clone()).collect()
    }

    pub fn set_of_indices<'a>(&self, idx: impl IntoIterator<Item = &'a usize>) -> NodeSet {
        idx.into_iter().map(|&i| self.names[i].clone()).collect()
    }

    pub fn parents(&self, s: &NodeSet) -> Result<NodeSet> {
        let m = self.mask(s)?;
        let mut out = vec![false; self.n()];
        for v in (0..self.n()).filter(|&v| m[v]) {
            for &p in &self.parents[v] {
                out[p] = true;
            }
        }
        Ok(self.set_of_mask(&out))
    }

    /// Strict ancestors of `s`: the transitive closure of parents, without
    /// `s` itself unless some member is an ancestor of another.
    pub fn ancestors(&self, s: &NodeSet) -> Result<NodeSet> {
        let m = self.mask(s)?;
        let seeds: Vec<usize> = (0..self.n()).filter(|&v| m[v]).collect();
        Ok(self.set_of_mask(&self.reach(&seeds, |v| &self.parents[v], false)))
    }

    pub fn descendants(&self, s: &NodeSet) -> Result<NodeSet> {
        let m = self.mask(s)?;
        let seeds: Vec<usize> = (0..self.n()).filter(|&v| m[v]).collect();
        Ok(self.set_of_mask(&self.reach(&seeds, |v| &self.children[v], false)))
    }

    /// `s` together with all of its ancestors.
    pub fn ancestral_closure(&self, s: &NodeSet) -> Result<NodeSet> {
        let m = self.mask(s)?;
        let seeds: Vec<usize> = (0..self.n()).filter(|&v| m[v]).collect();
        Ok(self.set_of_mask(&self.ancestor_mask(&seeds)))
    }

    /// Reflexive ancestor mask over indices.
    pub fn ancestor_mask(&self, seeds: &[usize]) -> Vec<bool> {
        self.reach(seeds, |v| &self.parents[v], true)
    }

    /// Reflexive ancestor mask restricted to the nodes allowed by `within`.
    pub fn ancestor_mask_within(&self, seeds: &[usize], within: &[bool]) -> Vec<bool> {
        let mut seen = vec![false; self.n()];
        let mut stack: Vec<usize> = seeds.iter().copied().filter(|&s| within[s]).collect();
        for &s in &stack {
            seen[s] = true;
        }
        while let Some(v) = stack.pop() {
            for &p in &self.parents[v] {
                if within[p] && !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    fn reach<'a, F>(&'a self, seeds: &[usize], next: F, reflexive: bool) -> Vec<bool>
    where
        F: Fn(usize) -> &'a [usize],
    {
        let mut seen = vec![false; self.n()];
        let mut stack: Vec<usize> = Vec::new();
        for &s in seeds {
            if reflexive {
                seen[s] = true;
            }
            stack.push(s);
        }
        let mut expanded = vec![false; self.n()];
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut expanded[v], true) {
                continue;
            }
            for &w in next(v) {
                if !seen[w] {
                    seen[w] = true;
                }
                if !expanded[w] {
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Kahn's algorithm with lexicographic tie-breaking, as indices.
    pub fn topological_indices(&self) -> Vec<usize> {
        let n = self.n();
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        // Names are sorted, so index order is lexicographic order.
        let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        debug_assert_eq!(order.len(), n, "Admg is acyclic by construction");
        order
    }

    pub fn topological_order(&self) -> Vec<String> {
        self.topological_indices().into_iter().map(|i| self.names[i].clone()).collect()
    }

    /// Shortest directed cycle, rotated to start at its smallest node.
    fn find_cycle(&self) -> Option<Vec<usize>> {
        find_shortest_cycle(self.n(), |v| &self.children[v])
    }

    /// Removes edges with an arrowhead into `cut_into` and directed edges out
    /// of `cut_out_of`.
    pub fn mutilate(&self, cut_into: &NodeSet, cut_out_of: &NodeSet) -> Result<Admg> {
        let into = self.mask(cut_into)?;
        let out = self.mask(cut_out_of)?;
        Ok(self.mutilate_masks(&into, &out))
    }

    pub fn mutilate_masks(&self, into: &[bool], out: &[bool]) -> Admg {
        let n = self.n();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        let mut siblings = vec![Vec::new(); n];
        for (t, h) in self.directed_edges() {
            if !into[h] && !out[t] {
                parents[h].push(t);
                children[t].push(h);
            }
        }
        for (a, b) in self.bidirected_edges() {
            if !into[a] && !into[b] {
                siblings[a].push(b);
                siblings[b].push(a);
            }
        }
        for s in &mut siblings {
            s.sort_unstable();
        }
        Admg { names: self.names.clone(), index: self.index.clone(), parents, children, siblings }
    }

    /// Subgraph induced by `s`.
    pub fn induced(&self, s: &NodeSet) -> Result<Admg> {
        let m = self.mask(s)?;
        let keep: Vec<usize> = (0..self.n()).filter(|&v| m[v]).collect();
        let directed: Vec<(&str, &str)> = self
            .directed_edges()
            .into_iter()
            .filter(|&(a, b)| m[a] && m[b])
            .map(|(a, b)| (self.name(a), self.name(b)))
            .collect();
        let bidirected: Vec<(&str, &str)> = self
            .bidirected_edges()
            .into_iter()
            .filter(|&(a, b)| m[a] && m[b])
            .map(|(a, b)| (self.name(a), self.name(b)))
            .collect();
        Admg::new(keep.iter().map(|&i| self.names[i].clone()), directed, bidirected)
    }

    /// Connected components of the bidirected skeleton, ordered by their
    /// smallest member.
    pub fn c_components(&self) -> Vec<NodeSet> {
        let all = vec![true; self.n()];
        self.c_component_indices(&all).into_iter().map(|c| self.set_of_indices(&c)).collect()
    }

    /// C-components of the subgraph induced by `within`, as sorted index lists.
    pub fn c_component_indices(&self, within: &[bool]) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut comp = vec![usize::MAX; n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for start in 0..n {
            if !within[start] || comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &s in &self.siblings[v] {
                    if within[s] && comp[s] == usize::MAX {
                        comp[s] = id;
                        members.push(s);
                        queue.push_back(s);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// True iff `x` and `y` are m-separated given `z`.
    pub fn m_separated(&self, x: &NodeSet, y: &NodeSet, z: &NodeSet) -> Result<bool> {
        check_disjoint(&[x, y, z])?;
        let (xm, ym, zm) = (self.mask(x)?, self.mask(y)?, self.mask(z)?);
        Ok(self.m_separated_masks(&xm, &ym, &zm))
    }

    /// Reachability form of m-separation. A walk passes a collider iff the
    /// collider is in `z` or has a descendant in `z`, and passes a
    /// non-collider iff it is outside `z`.
    pub fn m_separated_masks(&self, x: &[bool], y: &[bool], z: &[bool]) -> bool {
        let n = self.n();
        let zs: Vec<usize> = (0..n).filter(|&v| z[v]).collect();
        let an_z = self.ancestor_mask(&zs);

        // visited[v][h]: arrived at v with (h = 1) or without an arrowhead.
        let mut visited = vec![[false; 2]; n];
        let mut stack: Vec<(usize, bool, bool)> = Vec::new();
        for v in (0..n).filter(|&v| x[v]) {
            stack.push((v, false, true));
        }
        while let Some((v, head_in, start)) = stack.pop() {
            if !start {
                if y[v] {
                    return false;
                }
                if std::mem::replace(&mut visited[v][head_in as usize], true) {
                    continue;
                }
            }
            let can_pass = |head_out: bool| -> bool {
                if start {
                    return true;
                }
                if head_in && head_out {
                    an_z[v]
                } else {
                    !z[v]
                }
            };
            if can_pass(false) {
                for &c in &self.children[v] {
                    stack.push((c, true, false));
                }
            }
            if can_pass(true) {
                for &p in &self.parents[v] {
                    stack.push((p, false, false));
                }
                for &s in &self.siblings[v] {
                    stack.push((s, true, false));
                }
            }
        }
        true
    }
}

impl fmt::Debug for Admg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Admg {{ nodes: {:?}", self.names)?;
        for (a, b) in self.directed_edges() {
            write!(f, ", {}->{}", self.names[a], self.names[b])?;
        }
        for (a, b) in self.bidirected_edges() {
            write!(f, ", {}<->{}", self.names[a], self.names[b])?;
        }
        write!(f, " }}")
    }
}

/// Errors unless the sets are pairwise disjoint.
pub fn check_disjoint(sets: &[&NodeSet]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for s in sets {
        for n in s.iter() {
            if !seen.insert(n.as_str()) {
                return Err(Error::NotDisjoint(n.clone()));
            }
        }
    }
    Ok(())
}

/// Shortest directed cycle in a graph given by successor lists, rotated so
/// that it starts at its smallest vertex.
pub(crate) fn find_shortest_cycle<'a, F>(n: usize, succ: F) -> Option<Vec<usize>>
where
    F: Fn(usize) -> &'a [usize],
{
    let mut best: Option<Vec<usize>> = None;
    for s in 0..n {
        // BFS from s looking for an edge back into s.
        let mut prev = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        let mut found = None;
        'bfs: while let Some(v) = queue.pop_front() {
            for &w in succ(v) {
                if w == s {
                    found = Some(v);
                    break 'bfs;
                }
                if !seen[w] {
                    seen[w] = true;
                    prev[w] = v;
                    queue.push_back(w);
                }
            }
        }
        if let Some(last) = found {
            let mut cycle = vec![last];
            let mut v = last;
            while v != s {
                v = prev[v];
                cycle.push(v);
            }
            cycle.reverse();
            if best.as_ref().is_none_or(|b| cycle.len() < b.len()) {
                best = Some(cycle);
            }
        }
    }
    best.map(|mut c| {
        let pos = c.iter().enumerate().min_by_key(|(_, &v)| v).map(|(i, _)| i).unwrap_or(0);
        c.rotate_left(pos);
        c
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Medication example: lisinopril X, stroke Y, age A, blood pressure B,
    /// comorbidities C, medication history D, sleep quality S.
    fn medication() -> Admg {
        Admg::new(
            ["X", "Y", "A", "B", "C", "D", "S"],
            [("D", "X"), ("X", "S"), ("S", "Y"), ("B", "C"), ("C", "Y"), ("A", "Y"), ("A", "C")],
            [("X", "B"), ("C", "Y"), ("D", "C")],
        )
        .unwrap()
    }

    fn chain() -> Admg {
        Admg::new(["A", "B", "C"], [("A", "B"), ("B", "C")], Vec::<(&str, &str)>::new()).unwrap()
    }

    #[test]
    fn parents_follow_directed_edges_only() {
        let g = Admg::new(["A", "B"], [("A", "B")], Vec::<(&str, &str)>::new()).unwrap();
        assert_eq!(g.parents(&nodes!["B"]).unwrap(), nodes!["A"]);
        let g = Admg::new(["A", "B"], Vec::<(&str, &str)>::new(), [("A", "B")]).unwrap();
        assert!(g.parents(&nodes!["B"]).unwrap().is_empty());
        assert_eq!(medication().parents(&nodes!["X"]).unwrap(), nodes!["D"]);
    }

    #[test]
    fn ancestors_and_descendants() {
        assert_eq!(chain().ancestors(&nodes!["C"]).unwrap(), nodes!["A", "B"]);
        let g = Admg::new(["A", "B", "C"], [("B", "C")], [("A", "B")]).unwrap();
        assert_eq!(g.ancestors(&nodes!["C"]).unwrap(), nodes!["B"]);
        assert_eq!(medication().ancestors(&nodes!["Y"]).unwrap(), nodes!["X", "D", "S", "B", "C", "A"]);

        assert_eq!(chain().descendants(&nodes!["A"]).unwrap(), nodes!["B", "C"]);
        assert!(Admg::empty(["A"]).descendants(&nodes!["A"]).unwrap().is_empty());
        assert_eq!(medication().descendants(&nodes!["X"]).unwrap(), nodes!["S", "Y"]);
    }

    #[test]
    fn ancestral_closure_is_reflexive() {
        assert_eq!(chain().ancestral_closure(&nodes!["C"]).unwrap(), nodes!["A", "B", "C"]);
        let g = Admg::new(["A", "B", "C"], [("B", "C")], [("A", "B")]).unwrap();
        assert_eq!(g.ancestral_closure(&nodes!["C"]).unwrap(), nodes!["B", "C"]);
        assert_eq!(medication().ancestral_closure(&nodes!["Y"]).unwrap(), nodes!["X", "D", "S", "B", "C", "A", "Y"]);
    }

    #[test]
    fn unknown_node_is_an_error() {
        assert_eq!(chain().parents(&nodes!["Q"]), Err(Error::UnknownNode("Q".into())));
        assert!(Admg::new(["A"], [("A", "B")], Vec::<(&str, &str)>::new()).is_err());
    }

    #[test]
    fn topological_order_breaks_ties_lexicographically() {
        let g = Admg::new(["A", "B", "C"], [("A", "B"), ("A", "C")], Vec::<(&str, &str)>::new()).unwrap();
        assert_eq!(g.topological_order(), ["A", "B", "C"]);
        let g = Admg::new(["A", "B"], [("B", "A")], Vec::<(&str, &str)>::new()).unwrap();
        assert_eq!(g.topological_order(), ["B", "A"]);
    }

    #[test]
    fn cycle_is_reported() {
        let err = Admg::new(
            ["X", "W", "Z", "Y"],
            [("X", "W"), ("W", "Z"), ("Z", "X"), ("W", "Y")],
            Vec::<(&str, &str)>::new(),
        )
        .unwrap_err();
        // Rotated to start at the smallest name; same cycle as X -> W -> Z.
        assert_eq!(err, Error::Cycle(vec!["W".into(), "Z".into(), "X".into()]));
    }

    #[test]
    fn self_loops_rejected() {
        let e = Admg::new(["X"], [("X", "X")], Vec::<(&str, &str)>::new()).unwrap_err();
        assert_eq!(e, Error::SelfLoop("X".into()));
        assert!(Admg::new(["X"], Vec::<(&str, &str)>::new(), [("X", "X")]).is_err());
    }

    #[test]
    fn mutilation() {
        let g = Admg::new(["A", "X", "B"], [("A", "X"), ("X", "B")], [("A", "X")]).unwrap();
        let m = g.mutilate(&nodes!["X"], &nodes![]).unwrap();
        assert_eq!(m.directed_edge_names(), [("X".to_string(), "B".to_string())]);
        assert!(m.bidirected_edges().is_empty());

        let g = Admg::new(["Z", "A"], [("Z", "A")], [("Z", "A")]).unwrap();
        let m = g.mutilate(&nodes![], &nodes!["Z"]).unwrap();
        assert!(m.directed_edges().is_empty());
        assert_eq!(m.bidirected_edge_names(), [("A".to_string(), "Z".to_string())]);
    }

    #[test]
    fn mutilating_out_of_treatment_separates_in_three_z_chain() {
        let g = Admg::new(
            ["X", "Y", "Z1", "Z2", "Z3"],
            [("X", "Y"), ("Z1", "Z2"), ("Z1", "X"), ("Z3", "Z2"), ("Z3", "Y")],
            Vec::<(&str, &str)>::new(),
        )
        .unwrap();
        let m = g.mutilate(&nodes![], &nodes!["X"]).unwrap();
        assert!(m.m_separated(&nodes!["X"], &nodes!["Y"], &nodes!["Z1"]).unwrap());
        assert!(!g.m_separated(&nodes!["X"], &nodes!["Y"], &nodes!["Z1"]).unwrap());
    }

    #[test]
    fn c_components_partition_the_nodes() {
        let g = Admg::new(["A", "B", "C", "D"], Vec::<(&str, &str)>::new(), [("A", "B"), ("B", "C")]).unwrap();
        assert_eq!(g.c_components(), [nodes!["A", "B", "C"], nodes!["D"]]);
        assert_eq!(chain().c_components(), [nodes!["A"], nodes!["B"], nodes!["C"]]);
        assert_eq!(three_z_confounded().c_components(), [nodes!["X", "Y", "Z1", "Z3"], nodes!["Z2"]]);
    }

    fn three_z_confounded() -> Admg {
        Admg::new(
            ["X", "Y", "Z1", "Z2", "Z3"],
            [("X", "Y"), ("Z1", "Z2"), ("Z3", "Y"), ("Z3", "Z2")],
            [("Z1", "Z3"), ("Z3", "Y"), ("Z1", "X")],
        )
        .unwrap()
    }

    #[test]
    fn m_separation_basics() {
        let chain = Admg::new(["X", "Z", "Y"], [("X", "Z"), ("Z", "Y")], Vec::<(&str, &str)>::new()).unwrap();
        assert!(chain.m_separated(&nodes!["X"], &nodes!["Y"], &nodes!["Z"]).unwrap());
        assert!(!chain.m_separated(&nodes!["X"], &nodes!["Y"], &nodes![]).unwrap());

        let collider = Admg::new(["X", "Z", "Y"], [("X", "Z"), ("Y", "Z")], Vec::<(&str, &str)>::new()).unwrap();
        assert!(collider.m_separated(&nodes!["X"], &nodes!["Y"], &nodes![]).unwrap());
        assert!(!collider.m_separated(&nodes!["X"], &nodes!["Y"], &nodes!["Z"]).unwrap());

        assert!(!three_z_confounded().m_separated(&nodes!["X"], &nodes!["Y"], &nodes!["Z1", "Z2", "Z3"]).unwrap());
    }

    #[test]
    fn descendant_of_collider_opens_path() {
        let g =
            Admg::new(["X", "W", "Y", "D"], [("X", "W"), ("Y", "W"), ("W", "D")], Vec::<(&str, &str)>::new()).unwrap();
        assert!(!g.m_separated(&nodes!["X"], &nodes!["Y"], &nodes!["D"]).unwrap());
    }

    #[test]
    fn m_separation_rejects_overlapping_sets() {
        let e = chain().m_separated(&nodes!["A"], &nodes!["A"], &nodes![]).unwrap_err();
        assert_eq!(e, Error::NotDisjoint("A".into()));
    }

    #[test]
    fn induced_subgraph_drops_outside_edges() {
        let g = medication().induced(&nodes!["X", "S", "B"]).unwrap();
        assert_eq!(g.directed_edge_names(), [("X".to_string(), "S".to_string())]);
        assert_eq!(g.bidirected_edge_names(), [("B".to_string(), "X".to_string())]);
    }
}
