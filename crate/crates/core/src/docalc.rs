//! Applicability of the three do-calculus rules on a cluster DAG.

use std::fmt;

use serde::Serialize;

use crate::cluster::{cdag_d_separated, mutilate_cdag, ClusterDag};
use crate::error::{Error, Result};
use crate::graph::{check_disjoint, NodeSet};

/// Cluster sets of a rule query: effect `y`, intervention `x`, the set `z`
/// being inserted or removed, and observed context `w`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DoQuery {
    pub x: NodeSet,
    pub y: NodeSet,
    pub z: NodeSet,
    pub w: NodeSet,
}

impl DoQuery {
    pub fn new(x: NodeSet, y: NodeSet, z: NodeSet, w: NodeSet) -> Self {
        DoQuery { x, y, z, w }
    }

    pub fn validate(&self, c: &ClusterDag) -> Result<()> {
        if self.y.is_empty() {
            return Err(Error::InvalidQuery("y must be nonempty".into()));
        }
        if self.z.is_empty() {
            return Err(Error::InvalidQuery("z must be nonempty".into()));
        }
        check_disjoint(&[&self.x, &self.y, &self.z, &self.w])?;
        for n in self.x.iter().chain(&self.y).chain(&self.z).chain(&self.w) {
            if !c.graph().contains(n) {
                return Err(Error::UnknownNode(n.clone()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Rule {
    R1,
    R2,
    R3,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            Rule::R1 => 1,
            Rule::R2 => 2,
            Rule::R3 => 3,
        };
        write!(f, "rule {n}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleVerdict {
    pub rule: Rule,
    pub applies: bool,
    pub separation_tested: String,
    /// Empty unless the rule applies.
    pub equality_granted: String,
    /// `Z(W)` for rule 3.
    pub z_of_w: Option<NodeSet>,
}

impl fmt::Display for RuleVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, if self.applies { "applies" } else { "does not apply" })?;
        write!(f, "\n  tested: {}", self.separation_tested)?;
        if let Some(zw) = &self.z_of_w {
            write!(f, "\n  Z(W) = {zw}")?;
        }
        if self.applies {
            write!(f, "\n  grants: {}", self.equality_granted)?;
        }
        Ok(())
    }
}

fn lower(s: &NodeSet) -> String {
    s.iter().map(|n| n.to_lowercase()).collect::<Vec<_>>().join(",")
}

/// `P(y|do(x),...)` with empty parts left out.
fn term(y: &NodeSet, dos: &[&NodeSet], obs: &[&NodeSet]) -> String {
    let mut given: Vec<String> = dos.iter().filter(|s| !s.is_empty()).map(|s| format!("do({})", lower(s))).collect();
    given.extend(obs.iter().filter(|s| !s.is_empty()).map(|s| lower(s)));
    if given.is_empty() {
        format!("P({})", lower(y))
    } else {
        format!("P({}|{})", lower(y), given.join(","))
    }
}

fn described(q: &DoQuery, into: &NodeSet, out_of: &NodeSet) -> String {
    let cond = q.x.union(&q.w);
    let mut s = format!("({} ⊥ {} | {}) in G", q.y, q.z, cond);
    match (into.is_empty(), out_of.is_empty()) {
        (true, true) => {}
        (false, true) => s.push_str(&format!(" with edges into {into} removed")),
        (true, false) => s.push_str(&format!(" with edges out of {out_of} removed")),
        (false, false) => s.push_str(&format!(" with edges into {into} and out of {out_of} removed")),
    }
    s
}

#[allow(clippy::too_many_arguments)]
fn check(
    c: &ClusterDag,
    q: &DoQuery,
    rule: Rule,
    into: &NodeSet,
    out_of: &NodeSet,
    lhs: String,
    rhs: String,
    z_of_w: Option<NodeSet>,
) -> Result<RuleVerdict> {
    let m = mutilate_cdag(c, into, out_of)?;
    let applies = cdag_d_separated(&m, &q.y, &q.z, &q.x.union(&q.w))?;
    Ok(RuleVerdict {
        rule,
        applies,
        separation_tested: described(q, into, out_of),
        equality_granted: if applies { format!("{lhs} = {rhs}") } else { String::new() },
        z_of_w,
    })
}

/// Insertion or deletion of observations.
pub fn rule1(c: &ClusterDag, q: &DoQuery) -> Result<RuleVerdict> {
    q.validate(c)?;
    let lhs = term(&q.y, &[&q.x], &[&q.z, &q.w]);
    let rhs = term(&q.y, &[&q.x], &[&q.w]);
    check(c, q, Rule::R1, &q.x, &NodeSet::new(), lhs, rhs, None)
}

/// Exchange of interventions and observations.
pub fn rule2(c: &ClusterDag, q: &DoQuery) -> Result<RuleVerdict> {
    q.validate(c)?;
    let lhs = term(&q.y, &[&q.x, &q.z], &[&q.w]);
    let rhs = term(&q.y, &[&q.x], &[&q.z, &q.w]);
    check(c, q, Rule::R2, &q.x, &q.z, lhs, rhs, None)
}

/// Insertion or deletion of interventions.
pub fn rule3(c: &ClusterDag, q: &DoQuery) -> Result<RuleVerdict> {
    q.validate(c)?;
    let cut_x = mutilate_cdag(c, &q.x, &NodeSet::new())?;
    let an_w = cut_x.graph().ancestors(&q.w)?;
    let zw: NodeSet = q.z.difference(&an_w);
    let lhs = term(&q.y, &[&q.x, &q.z], &[&q.w]);
    let rhs = term(&q.y, &[&q.x], &[&q.w]);
    check(c, q, Rule::R3, &q.x.union(&zw), &NodeSet::new(), lhs, rhs, Some(zw))
}

pub fn apply_rule(rule: Rule, c: &ClusterDag, q: &DoQuery) -> Result<RuleVerdict> {
    match rule {
        Rule::R1 => rule1(c, q),
        Rule::R2 => rule2(c, q),
        Rule::R3 => rule3(c, q),
    }
}
