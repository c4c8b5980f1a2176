//! m-separation by listing every path.

use cdag::{Admg, NodeSet};

/// Edge end as seen from a node on the path: `true` when the edge has an
/// arrowhead there.
struct Adj {
    to: usize,
    head_here: bool,
    head_there: bool,
}

fn adjacency(g: &Admg) -> Vec<Vec<Adj>> {
    let mut adj: Vec<Vec<Adj>> = (0..g.n()).map(|_| Vec::new()).collect();
    for (a, b) in g.directed_edges() {
        adj[a].push(Adj { to: b, head_here: false, head_there: true });
        adj[b].push(Adj { to: a, head_here: true, head_there: false });
    }
    for (a, b) in g.bidirected_edges() {
        adj[a].push(Adj { to: b, head_here: true, head_there: true });
        adj[b].push(Adj { to: a, head_here: true, head_there: true });
    }
    adj
}

/// Nodes with a directed path into `z`, `z` included; plain fixpoint over
/// the edge list.
fn ancestors_of(g: &Admg, z: &[bool]) -> Vec<bool> {
    let mut anc = z.to_vec();
    let edges = g.directed_edges();
    loop {
        let mut changed = false;
        for &(a, b) in &edges {
            if anc[b] && !anc[a] {
                anc[a] = true;
                changed = true;
            }
        }
        if !changed {
            return anc;
        }
    }
}

struct Search<'a> {
    adj: Vec<Vec<Adj>>,
    y: &'a [bool],
    z: &'a [bool],
    anc_z: Vec<bool>,
    on_path: Vec<bool>,
}

impl Search<'_> {
    /// Is there an open simple path that arrived at `v` (with an arrowhead at
    /// `v` iff `head_at_v`) and continues to some node of `y`?
    fn open_from(&mut self, v: usize, head_at_v: Option<bool>) -> bool {
        if head_at_v.is_some() && self.y[v] {
            return true;
        }
        for k in 0..self.adj[v].len() {
            let (to, head_here, head_there) = {
                let a = &self.adj[v][k];
                (a.to, a.head_here, a.head_there)
            };
            if self.on_path[to] {
                continue;
            }
            if let Some(h) = head_at_v {
                let collider = h && head_here;
                let passes = if collider { self.anc_z[v] } else { !self.z[v] };
                if !passes {
                    continue;
                }
            }
            self.on_path[to] = true;
            let found = self.open_from(to, Some(head_there));
            self.on_path[to] = false;
            if found {
                return true;
            }
        }
        false
    }
}

/// True iff no path between `x` and `y` is open given `z`.
pub fn m_separated(g: &Admg, x: &NodeSet, y: &NodeSet, z: &NodeSet) -> bool {
    let mask = |s: &NodeSet| g.mask(s).unwrap();
    let (xm, ym, zm) = (mask(x), mask(y), mask(z));
    let mut s = Search { adj: adjacency(g), y: &ym, z: &zm, anc_z: ancestors_of(g, &zm), on_path: vec![false; g.n()] };
    for (v, &start) in xm.iter().enumerate() {
        if start {
            s.on_path[v] = true;
            let open = s.open_from(v, None);
            s.on_path[v] = false;
            if open {
                return false;
            }
        }
    }
    true
}
