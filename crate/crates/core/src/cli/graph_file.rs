//! Text format for diagrams and cluster DAGs.
//!
//! ```text
//! # front door, clustered
//! cluster Z = { Z1 Z2 }
//! node X
//! node Y
//! edge X -> Z1
//! edge Z1 -> Z2
//! edge Z2 -> Y
//! edge X <-> Y
//! ```
//!
//! One declaration per line. Names are bare (`[A-Za-z0-9_.']+`) or double
//! quoted with `\"` and `\\` escapes. Cluster members count as declared.
//! When an edge or a `node` line names a clustered variable the file
//! describes a diagram plus a partition (unclustered nodes become singleton
//! clusters); otherwise edges run between clusters and bare nodes and the
//! file is a cluster DAG given directly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::cluster::{build_cdag, ClusterDag, Partition};
use crate::error::{Error, Result};
use crate::graph::Admg;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphFile {
    /// Edges between clusters. `labels` keeps declared cluster members, if
    /// any cluster has members other than itself.
    Cdag {
        cdag: ClusterDag,
        labels: Option<Partition>,
    },
    Diagram {
        admg: Admg,
        partition: Partition,
    },
}

impl GraphFile {
    /// The cluster-level graph.
    pub fn cdag(&self) -> Result<ClusterDag> {
        match self {
            GraphFile::Cdag { cdag, .. } => Ok(cdag.clone()),
            GraphFile::Diagram { admg, partition } => build_cdag(admg, partition),
        }
    }

    pub fn diagram(&self) -> Option<(&Admg, &Partition)> {
        match self {
            GraphFile::Diagram { admg, partition } => Some((admg, partition)),
            GraphFile::Cdag { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Name(String),
    Arrow,
    BiArrow,
    Eq,
    Open,
    Close,
}

fn plain(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | '\'')
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { line, col, msg: msg.into() }
}

fn lex(line: usize, text: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let col = i + 1;
        let c = chars[i];
        match c {
            '#' => break,
            c if c.is_whitespace() || c == ',' => i += 1,
            '=' => {
                out.push((col, Tok::Eq));
                i += 1;
            }
            '{' => {
                out.push((col, Tok::Open));
                i += 1;
            }
            '}' => {
                out.push((col, Tok::Close));
                i += 1;
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push((col, Tok::Arrow));
                i += 2;
            }
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                out.push((col, Tok::BiArrow));
                i += 3;
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(syntax(line, col, "unterminated string")),
                        Some('"') => break,
                        Some('\\') => match chars.get(i + 1) {
                            Some(&e @ ('"' | '\\')) => {
                                s.push(e);
                                i += 2;
                            }
                            _ => return Err(syntax(line, i + 1, "bad escape")),
                        },
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                i += 1;
                if s.is_empty() {
                    return Err(syntax(line, col, "empty name"));
                }
                out.push((col, Tok::Name(s)));
            }
            c if plain(c) => {
                let start = i;
                while i < chars.len() && plain(chars[i]) {
                    i += 1;
                }
                out.push((col, Tok::Name(chars[start..i].iter().collect())));
            }
            c => return Err(syntax(line, col, format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

struct Decl {
    line: usize,
    col: usize,
}

#[derive(Default)]
struct Raw {
    nodes: BTreeMap<String, Decl>,
    clusters: BTreeMap<String, (Decl, Vec<String>)>,
    directed: BTreeMap<(String, String), EdgeDecl>,
    bidirected: BTreeMap<(String, String), EdgeDecl>,
}

struct EdgeDecl {
    line: usize,
    /// Column of each endpoint as written.
    cols: [(String, usize); 2],
}

impl EdgeDecl {
    fn col_of(&self, n: &str) -> usize {
        self.cols.iter().find(|(m, _)| m == n).map_or(1, |c| c.1)
    }
}

fn name_at(toks: &[(usize, Tok)], k: usize, line: usize, end: usize, what: &str) -> Result<(usize, String)> {
    match toks.get(k) {
        Some((c, Tok::Name(s))) => Ok((*c, s.clone())),
        Some((c, _)) => Err(syntax(line, *c, format!("expected {what}"))),
        None => Err(syntax(line, end, format!("expected {what}"))),
    }
}

fn parse_raw(text: &str) -> Result<Raw> {
    let mut raw = Raw::default();
    for (ln, l) in text.lines().enumerate() {
        let line = ln + 1;
        let toks = lex(line, l)?;
        let end = l.chars().count() + 1;
        let Some((c0, first)) = toks.first() else { continue };
        let kw = match first {
            Tok::Name(s) => s.as_str(),
            _ => return Err(syntax(line, *c0, "expected `node`, `cluster` or `edge`")),
        };
        match kw {
            "node" => {
                let (c, n) = name_at(&toks, 1, line, end, "a node name")?;
                if toks.len() > 2 {
                    return Err(syntax(line, toks[2].0, "trailing input"));
                }
                if raw.nodes.insert(n.clone(), Decl { line, col: c }).is_some() {
                    return Err(syntax(line, c, format!("node `{n}` declared twice")));
                }
            }
            "cluster" => {
                let (c, n) = name_at(&toks, 1, line, end, "a cluster name")?;
                match toks.get(2) {
                    Some((_, Tok::Eq)) => {}
                    Some((c, _)) => return Err(syntax(line, *c, "expected `=`")),
                    None => return Err(syntax(line, end, "expected `=`")),
                }
                match toks.get(3) {
                    Some((_, Tok::Open)) => {}
                    Some((c, _)) => return Err(syntax(line, *c, "expected `{`")),
                    None => return Err(syntax(line, end, "expected `{`")),
                }
                let mut members = Vec::new();
                let mut k = 4;
                loop {
                    match toks.get(k) {
                        Some((_, Tok::Name(m))) => members.push(m.clone()),
                        Some((_, Tok::Close)) => break,
                        Some((c, _)) => return Err(syntax(line, *c, "expected a member name or `}`")),
                        None => return Err(syntax(line, end, "expected `}`")),
                    }
                    k += 1;
                }
                if toks.len() > k + 1 {
                    return Err(syntax(line, toks[k + 1].0, "trailing input"));
                }
                if members.is_empty() {
                    return Err(syntax(line, c, format!("cluster `{n}` has no members")));
                }
                let set: BTreeSet<&String> = members.iter().collect();
                if set.len() != members.len() {
                    return Err(syntax(line, c, format!("cluster `{n}` lists a member twice")));
                }
                if raw.clusters.insert(n.clone(), (Decl { line, col: c }, members)).is_some() {
                    return Err(syntax(line, c, format!("cluster `{n}` declared twice")));
                }
            }
            "edge" => {
                let (ca, a) = name_at(&toks, 1, line, end, "an edge endpoint")?;
                let bi = match toks.get(2) {
                    Some((_, Tok::Arrow)) => false,
                    Some((_, Tok::BiArrow)) => true,
                    Some((c, _)) => return Err(syntax(line, *c, "expected `->` or `<->`")),
                    None => return Err(syntax(line, end, "expected `->` or `<->`")),
                };
                let (cb, b) = name_at(&toks, 3, line, end, "an edge endpoint")?;
                if toks.len() > 4 {
                    return Err(syntax(line, toks[4].0, "trailing input"));
                }
                if a == b {
                    return Err(syntax(line, ca, format!("self-loop on `{a}`")));
                }
                let (key, map) = if bi {
                    (if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) }, &mut raw.bidirected)
                } else {
                    ((a.clone(), b.clone()), &mut raw.directed)
                };
                if let Some(d) = map.get(&key) {
                    return Err(syntax(
                        line,
                        ca,
                        format!("duplicate edge, first declared at {}:{}", d.line, d.cols[0].1),
                    ));
                }
                map.insert(key, EdgeDecl { line, cols: [(a, ca), (b, cb)] });
            }
            other => return Err(syntax(line, *c0, format!("unknown declaration `{other}`"))),
        }
    }
    Ok(raw)
}

/// Parses the text format. Errors carry line and column where a single
/// declaration is at fault.
pub fn parse_graph(text: &str) -> Result<GraphFile> {
    let raw = parse_raw(text)?;
    let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
    for (k, (d, members)) in &raw.clusters {
        for m in members {
            if let Some(prev) = owner.insert(m, k) {
                return Err(syntax(d.line, d.col, format!("`{m}` is already a member of cluster `{prev}`")));
            }
        }
    }
    for (k, (d, members)) in &raw.clusters {
        if let Some(c) = owner.get(k.as_str()) {
            if c != k {
                return Err(syntax(d.line, d.col, format!("cluster name `{k}` is a member of cluster `{c}`")));
            }
        }
        if raw.nodes.contains_key(k) && !members.contains(k) {
            return Err(syntax(d.line, d.col, format!("cluster name `{k}` is also a node")));
        }
    }
    let edges =
        || raw.directed.iter().map(|(k, d)| (k, d, "->")).chain(raw.bidirected.iter().map(|(k, d)| (k, d, "<->")));
    let clustered = |n: &str| owner.contains_key(n) && !raw.clusters.contains_key(n);
    let diagram = edges().any(|((a, b), _, _)| clustered(a) || clustered(b)) || raw.nodes.keys().any(|n| clustered(n));

    if diagram {
        let mut vars: BTreeSet<String> = raw.nodes.keys().cloned().collect();
        vars.extend(owner.keys().map(|s| s.to_string()));
        for ((a, b), d, _) in edges() {
            for n in [a, b] {
                if !vars.contains(n) {
                    let why = if raw.clusters.contains_key(n) {
                        "a cluster name in a variable-level file"
                    } else {
                        "undeclared"
                    };
                    return Err(syntax(d.line, d.col_of(n), format!("`{n}` is {why}")));
                }
            }
        }
        let admg = Admg::new(vars.iter().cloned(), raw.directed.keys().cloned(), raw.bidirected.keys().cloned())?;
        let mut blocks: Vec<(String, Vec<String>)> =
            raw.clusters.iter().map(|(k, (_, m))| (k.clone(), m.clone())).collect();
        for v in &vars {
            if !owner.contains_key(v.as_str()) {
                blocks.push((v.clone(), vec![v.clone()]));
            }
        }
        let partition = Partition::new(blocks).map_err(|e| match e {
            Error::PartitionMismatch(m) => {
                Error::PartitionMismatch(format!("{m} (singleton cluster for an unclustered node)"))
            }
            e => e,
        })?;
        build_cdag(&admg, &partition)?;
        Ok(GraphFile::Diagram { admg, partition })
    } else {
        let mut nodes: BTreeSet<String> = raw.clusters.keys().cloned().collect();
        for n in raw.nodes.keys() {
            if !owner.contains_key(n.as_str()) {
                nodes.insert(n.clone());
            }
        }
        for ((a, b), d, _) in edges() {
            for n in [a, b] {
                if !nodes.contains(n) {
                    return Err(syntax(d.line, d.col_of(n), format!("`{n}` is undeclared")));
                }
            }
        }
        let g = Admg::new(nodes.iter().cloned(), raw.directed.keys().cloned(), raw.bidirected.keys().cloned())?;
        let blocks = nodes.iter().map(|n| match raw.clusters.get(n) {
            Some((_, m)) => (n.clone(), m.clone()),
            None => (n.clone(), vec![n.clone()]),
        });
        let labels = Partition::new(blocks)?;
        let labels = (!labels.is_singleton()).then_some(labels);
        Ok(GraphFile::Cdag { cdag: ClusterDag::direct(g), labels })
    }
}

/// Name as it appears in the format, quoted when needed.
pub fn quote(name: &str) -> String {
    if !name.is_empty() && name.chars().all(plain) && !matches!(name, "node" | "cluster" | "edge") {
        name.to_string()
    } else {
        let mut s = String::from('"');
        for c in name.chars() {
            if matches!(c, '"' | '\\') {
                s.push('\\');
            }
            s.push(c);
        }
        s.push('"');
        s
    }
}

fn render_edges(out: &mut String, g: &Admg) {
    for (a, b) in g.directed_edge_names() {
        let _ = writeln!(out, "edge {} -> {}", quote(&a), quote(&b));
    }
    for (a, b) in g.bidirected_edge_names() {
        let _ = writeln!(out, "edge {} <-> {}", quote(&a), quote(&b));
    }
}

fn render_clusters(out: &mut String, p: &Partition) {
    for (k, m) in p.blocks() {
        if m.len() == 1 && &m[0] == k {
            continue;
        }
        let ms: Vec<String> = m.iter().map(|v| quote(v)).collect();
        let _ = writeln!(out, "cluster {} = {{ {} }}", quote(k), ms.join(" "));
    }
}

/// Canonical text: clusters, then nodes, then directed and bidirected
/// edges, each sorted.
pub fn render_graph(f: &GraphFile) -> String {
    let mut out = String::new();
    match f {
        GraphFile::Cdag { cdag, labels } => {
            if let Some(p) = labels {
                render_clusters(&mut out, p);
            }
            for n in cdag.graph().names() {
                let declared = labels.as_ref().is_some_and(|p| p.members(n).is_ok_and(|m| m != [n.clone()]));
                if !declared {
                    let _ = writeln!(out, "node {}", quote(n));
                }
            }
            render_edges(&mut out, cdag.graph());
        }
        GraphFile::Diagram { admg, partition } => {
            render_clusters(&mut out, partition);
            for n in admg.names() {
                let _ = writeln!(out, "node {}", quote(n));
            }
            render_edges(&mut out, admg);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nodes;

    const FRONT_DOOR: &str = "\
# treatment, mediators, outcome
cluster Z = { Z1 Z2 }
node X
node Y
edge X -> Z1
edge Z1 -> Z2
edge Z2 -> Y
edge X <-> Y
";

    #[test]
    fn clustered_diagram() {
        let f = parse_graph(FRONT_DOOR).unwrap();
        let (g, p) = f.diagram().unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(p.members("Z").unwrap(), ["Z1", "Z2"]);
        let c = f.cdag().unwrap();
        assert!(c.graph().has_bidirected(c.graph().index_of("X").unwrap(), c.graph().index_of("Y").unwrap()));
        assert_eq!(parse_graph(&render_graph(&f)).unwrap(), f);
        let f = parse_graph("cluster Z = { Z1 Z2 }\nnode Z1\nnode X\nnode Y\nedge X -> Y\n").unwrap();
        assert_eq!(f.diagram().unwrap().0.n(), 4);
        assert_eq!(parse_graph(&render_graph(&f)).unwrap(), f);
    }

    #[test]
    fn cluster_level_file() {
        let f = parse_graph("cluster Z = { a b }\nnode X\nnode Y\nedge X -> Z\nedge Z -> Y\n").unwrap();
        let GraphFile::Cdag { cdag, labels } = &f else { panic!("{f:?}") };
        assert_eq!(cdag.graph().node_set(), nodes!["X", "Y", "Z"]);
        assert_eq!(labels.as_ref().unwrap().members("Z").unwrap(), ["a", "b"]);
        assert_eq!(parse_graph(&render_graph(&f)).unwrap(), f);
        let f = parse_graph("node A\nnode B\nedge A <-> B").unwrap();
        assert!(matches!(f, GraphFile::Cdag { labels: None, .. }));
    }

    #[test]
    fn diagnostics() {
        let err = |s: &str| parse_graph(s).unwrap_err();
        assert_eq!(err("node X\nnode Y\nedge X -> X"), syntax(3, 6, "self-loop on `X`"));
        assert!(matches!(err("node A\nnode B\nedge A -> B\nedge A -> B"), Error::Syntax { line: 4, .. }));
        assert!(matches!(err("node A\nnode B\nedge A <-> B\nedge B <-> A"), Error::Syntax { line: 4, .. }));
        assert!(matches!(err("node A\nedge A -> Q"), Error::Syntax { line: 2, col: 11, .. }));
        assert!(matches!(err("node A\nnode B\nedge A => B"), Error::Syntax { line: 3, col: 9, .. }));
        assert!(matches!(err("cluster C = { a b"), Error::Syntax { line: 1, .. }));
        assert!(matches!(err("nod A"), Error::Syntax { line: 1, col: 1, .. }));
        assert!(matches!(err("node \"A"), Error::Syntax { line: 1, col: 6, .. }));
        assert!(matches!(err("node A\nnode A"), Error::Syntax { line: 2, col: 6, .. }));
        assert!(matches!(err("node A\nnode B\nedge A -> B\nedge B -> A"), Error::Cycle(_)));
        let inadmissible = "cluster C = { a c }\nnode b\nedge a -> b\nedge b -> c\n";
        assert!(matches!(err(inadmissible), Error::Inadmissible(_)));
    }

    #[test]
    fn quoted_names_round_trip() {
        let text = "node \"blood pressure\"\nnode \"a\\\"b\"\nnode \"edge\"\nedge \"blood pressure\" -> \"a\\\"b\"\nedge \"edge\" <-> \"a\\\"b\"\n";
        let f = parse_graph(text).unwrap();
        let GraphFile::Cdag { cdag, .. } = &f else { panic!() };
        assert!(cdag.graph().contains("a\"b"));
        assert!(cdag.graph().contains("blood pressure"));
        assert_eq!(parse_graph(&render_graph(&f)).unwrap(), f);
    }
}
