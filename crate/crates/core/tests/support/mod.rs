//! Shared helpers for integration tests.
#![allow(dead_code)]

pub mod brute;
pub mod gen;

use std::collections::{BTreeMap, BTreeSet};

use cdag::formula::{Assignment, Evaluator, ProbExpr, Var};
use cdag::oracle::{interventional_distribution, joint_distribution, DiscreteCbn};
use cdag::{Admg, ClusterDag, NodeSet, Partition};

pub fn admg(nodes: &[&str], d: &[(&str, &str)], b: &[(&str, &str)]) -> Admg {
    Admg::new(nodes.iter().copied(), d.iter().copied(), b.iter().copied()).unwrap()
}

pub fn direct(nodes: &[&str], d: &[(&str, &str)], b: &[(&str, &str)]) -> ClusterDag {
    ClusterDag::direct(admg(nodes, d, b))
}

/// Medication example.
pub fn medication() -> Admg {
    admg(
        &["A", "B", "C", "D", "S", "X", "Y"],
        &[("D", "X"), ("X", "S"), ("S", "Y"), ("B", "C"), ("C", "Y"), ("A", "Y"), ("A", "C")],
        &[("X", "B"), ("C", "Y"), ("D", "C")],
    )
}

pub fn frontdoor() -> ClusterDag {
    direct(&["S", "X", "Y", "Z"], &[("Z", "X"), ("X", "S"), ("S", "Y"), ("Z", "Y")], &[("X", "Z"), ("Z", "Y")])
}

pub fn frontdoor_partition() -> Partition {
    Partition::new([("Z", vec!["A", "B", "C", "D"]), ("X", vec!["X"]), ("S", vec!["S"]), ("Y", vec!["Y"])]).unwrap()
}

pub fn gc1() -> ClusterDag {
    direct(&["X", "Y", "Z"], &[("X", "Y"), ("Z", "X"), ("Z", "Y")], &[])
}

pub fn gc2() -> ClusterDag {
    direct(&["X", "Y", "Z"], &[("X", "Y"), ("Z", "Y")], &[("Z", "X"), ("Z", "Y")])
}

pub fn joint() -> ClusterDag {
    direct(
        &["X1", "X2", "Y1", "Y2"],
        &[("X1", "X2"), ("X2", "Y1"), ("X2", "Y2"), ("X1", "Y1"), ("Y1", "Y2")],
        &[("X1", "Y2")],
    )
}

pub fn multi_xy() -> ClusterDag {
    direct(&["X", "Y", "Z1", "Z2"], &[("X", "Y"), ("Z1", "Y"), ("Z2", "X")], &[("Z2", "Y"), ("Z1", "X")])
}

pub fn multi_yz() -> ClusterDag {
    direct(&["X1", "X2", "Y", "Z"], &[("X1", "X2"), ("X2", "Y"), ("Z", "X2"), ("Z", "Y")], &[("Z", "Y"), ("Z", "X1")])
}

pub fn bow() -> ClusterDag {
    direct(&["X", "Y"], &[("X", "Y")], &[("X", "Y")])
}

pub fn set(names: &[&str]) -> NodeSet {
    names.iter().copied().collect()
}

pub fn p(t: &[&str], g: &[&str]) -> ProbExpr {
    ProbExpr::prob(t.iter().copied(), g.iter().copied())
}

pub fn pv(t: Vec<Var>, g: Vec<Var>) -> ProbExpr {
    ProbExpr::prob_vars(t, g)
}

/// Largest gap between `e` (a formula for P(y | do(x)) over cluster symbols)
/// evaluated on the model's joint, and the oracle's P(y | do(x)), over every
/// value of the x and y symbols.
pub fn max_gap(m: &DiscreteCbn, p: &Partition, x: &NodeSet, y: &NodeSet, e: &ProbExpr) -> f64 {
    let joint = joint_distribution(m).unwrap();
    let ev = Evaluator::with_partition(&joint, p).unwrap();
    let xv: Vec<Var> = x.iter().map(Var::new).collect();
    let yv: Vec<Var> = y.iter().map(Var::new).collect();
    let prog = ev.compile(e).unwrap();
    let yvars: Vec<String> = p.expand(y).unwrap().into_iter().collect();
    let mut worst: f64 = 0.0;
    for xa in ev.assignments(&xv).unwrap() {
        let mut doa = BTreeMap::new();
        for (v, &val) in &xa {
            for (col, cv) in ev.symbol_values(&v.name, val).unwrap() {
                doa.insert(joint.variables()[col].clone(), cv);
            }
        }
        let post = interventional_distribution(m, &doa).unwrap();
        let refs: Vec<&str> = yvars.iter().map(String::as_str).collect();
        let marg = post.marginalize(&refs).unwrap();
        let mev = Evaluator::with_partition(&marg, &restrict(p, y)).unwrap();
        for ya in ev.assignments(&yv).unwrap() {
            let mut a: Assignment = xa.clone();
            a.extend(ya.clone());
            let got = prog.eval(&ev, &a).unwrap();
            let want = mev.evaluate(&ProbExpr::prob_vars(yv.clone(), vec![]), &ya).unwrap();
            worst = worst.max((got - want).abs());
        }
    }
    worst
}

/// The blocks of `p` that belong to the given clusters.
pub fn restrict(p: &Partition, clusters: &NodeSet) -> Partition {
    Partition::new(p.blocks().iter().filter(|(c, _)| clusters.contains(c)).map(|(c, m)| (c.clone(), m.clone())))
        .unwrap()
}

pub fn names(s: &BTreeSet<Var>) -> Vec<String> {
    s.iter().map(|v| v.to_string()).collect()
}

/// `gc2` plus `Z -> X`.
pub fn gc2_zx() -> ClusterDag {
    direct(&["X", "Y", "Z"], &[("X", "Y"), ("Z", "X"), ("Z", "Y")], &[("Z", "X"), ("Z", "Y")])
}

/// The medication variables clustered as W = {S, B}, Z = {A, C}.
pub fn medication_wz() -> ClusterDag {
    direct(
        &["D", "W", "X", "Y", "Z"],
        &[("D", "X"), ("X", "W"), ("W", "Y"), ("W", "Z"), ("Z", "Y")],
        &[("X", "W"), ("Z", "Y"), ("D", "Z")],
    )
}
