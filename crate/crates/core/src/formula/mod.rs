//! Symbolic probability expressions: the output of identification.
//!
//! Variables are symbols (variable or cluster names). A bound copy of a
//! symbol carries a prime count, rendered `x'`, `x''`, ... and ranges over the
//! same domain as the symbol itself.

mod eval;
mod render;
mod simplify;
mod table;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use eval::{equivalent_on, evaluate, Assignment, Evaluator};
pub use render::{from_json, to_json, Format};
pub use table::JointTable;

/// A symbol occurrence: `name` with `copy` primes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: String,
    pub copy: u32,
}

impl Var {
    pub fn new(name: impl Into<String>) -> Self {
        Var { name: name.into(), copy: 0 }
    }

    pub fn primed(name: impl Into<String>, copy: u32) -> Self {
        Var { name: name.into(), copy }
    }

    /// Parses `name` followed by any number of `'`.
    pub fn parse(s: &str) -> Self {
        let trimmed = s.trim_end_matches('\'');
        Var { name: trimmed.to_string(), copy: (s.len() - trimmed.len()) as u32 }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        for _ in 0..self.copy {
            write!(f, "'")?;
        }
        Ok(())
    }
}

/// Expression tree over conditional probabilities.
#[derive(Clone, Debug, PartialEq)]
pub enum ProbExpr {
    One,
    /// `P(target | given)`; the two lists are disjoint.
    Prob {
        target: Vec<Var>,
        given: Vec<Var>,
    },
    Product(Vec<ProbExpr>),
    /// Sum over every value of the bound variables.
    Sum {
        over: Vec<Var>,
        body: Box<ProbExpr>,
    },
    Fraction {
        num: Box<ProbExpr>,
        den: Box<ProbExpr>,
    },
}

impl ProbExpr {
    pub fn prob<T, G>(target: T, given: G) -> Self
    where
        T: IntoIterator,
        T::Item: Into<String>,
        G: IntoIterator,
        G::Item: Into<String>,
    {
        ProbExpr::Prob {
            target: target.into_iter().map(Var::new).collect(),
            given: given.into_iter().map(Var::new).collect(),
        }
    }

    pub fn prob_vars(target: Vec<Var>, given: Vec<Var>) -> Self {
        if target.is_empty() {
            return ProbExpr::One;
        }
        ProbExpr::Prob { target, given }
    }

    pub fn product(factors: Vec<ProbExpr>) -> Self {
        ProbExpr::Product(factors)
    }

    pub fn sum(over: Vec<Var>, body: ProbExpr) -> Self {
        if over.is_empty() {
            return body;
        }
        ProbExpr::Sum { over, body: Box::new(body) }
    }

    pub fn fraction(num: ProbExpr, den: ProbExpr) -> Self {
        ProbExpr::Fraction { num: Box::new(num), den: Box::new(den) }
    }

    /// Variables that occur unbound.
    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Var>) {
        match self {
            ProbExpr::One => {}
            ProbExpr::Prob { target, given } => {
                out.extend(target.iter().cloned());
                out.extend(given.iter().cloned());
            }
            ProbExpr::Product(fs) => fs.iter().for_each(|f| f.collect_free(out)),
            ProbExpr::Sum { over, body } => {
                let mut inner = BTreeSet::new();
                body.collect_free(&mut inner);
                for v in over {
                    inner.remove(v);
                }
                out.extend(inner);
            }
            ProbExpr::Fraction { num, den } => {
                num.collect_free(out);
                den.collect_free(out);
            }
        }
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.free_vars().contains(v)
    }

    /// Every variable bound by some sum, in binding order.
    pub fn bound_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let ProbExpr::Sum { over, .. } = e {
                out.extend(over.iter().cloned());
            }
        });
        out
    }

    fn visit(&self, f: &mut impl FnMut(&ProbExpr)) {
        f(self);
        match self {
            ProbExpr::One | ProbExpr::Prob { .. } => {}
            ProbExpr::Product(fs) => fs.iter().for_each(|e| e.visit(f)),
            ProbExpr::Sum { body, .. } => body.visit(f),
            ProbExpr::Fraction { num, den } => {
                num.visit(f);
                den.visit(f);
            }
        }
    }

    /// Replaces free occurrences of variables per `map`.
    pub fn rename_free(&self, map: &BTreeMap<Var, Var>) -> ProbExpr {
        let sub = |v: &Var| map.get(v).cloned().unwrap_or_else(|| v.clone());
        match self {
            ProbExpr::One => ProbExpr::One,
            ProbExpr::Prob { target, given } => {
                ProbExpr::Prob { target: target.iter().map(sub).collect(), given: given.iter().map(sub).collect() }
            }
            ProbExpr::Product(fs) => ProbExpr::Product(fs.iter().map(|f| f.rename_free(map)).collect()),
            ProbExpr::Sum { over, body } => {
                let mut inner = map.clone();
                for v in over {
                    inner.remove(v);
                }
                ProbExpr::Sum { over: over.clone(), body: Box::new(body.rename_free(&inner)) }
            }
            ProbExpr::Fraction { num, den } => ProbExpr::fraction(num.rename_free(map), den.rename_free(map)),
        }
    }

    /// Renames bound variables so that every sum binds fresh names, distinct
    /// from the free variables and from each other. A bound variable keeps
    /// its name when that name is not yet taken, otherwise it gets the next
    /// free prime count.
    pub fn hygienic(&self) -> ProbExpr {
        self.hygienic_reserving(&BTreeSet::new())
    }

    /// Like [`ProbExpr::hygienic`], also keeping bound names clear of
    /// `reserved`.
    pub fn hygienic_reserving(&self, reserved: &BTreeSet<Var>) -> ProbExpr {
        let mut used: BTreeSet<Var> = self.free_vars();
        used.extend(reserved.iter().cloned());
        self.hygiene(&mut used)
    }

    fn hygiene(&self, used: &mut BTreeSet<Var>) -> ProbExpr {
        match self {
            ProbExpr::One | ProbExpr::Prob { .. } => self.clone(),
            ProbExpr::Product(fs) => ProbExpr::Product(fs.iter().map(|f| f.hygiene(used)).collect()),
            ProbExpr::Fraction { num, den } => {
                let n = num.hygiene(used);
                ProbExpr::fraction(n, den.hygiene(used))
            }
            ProbExpr::Sum { over, body } => {
                let mut map = BTreeMap::new();
                let mut fresh = Vec::with_capacity(over.len());
                for v in over {
                    let mut cand = Var::new(v.name.clone());
                    while used.contains(&cand) {
                        cand.copy += 1;
                    }
                    used.insert(cand.clone());
                    if &cand != v {
                        map.insert(v.clone(), cand.clone());
                    }
                    fresh.push(cand);
                }
                let renamed = body.rename_free(&map);
                ProbExpr::Sum { over: fresh, body: Box::new(renamed.hygiene(used)) }
            }
        }
    }

    /// Checks the structural invariants: disjoint target/given lists and
    /// unique bound names that never clash with free names.
    pub fn validate(&self) -> Result<(), String> {
        let free = self.free_vars();
        let mut seen = BTreeSet::new();
        let mut err = None;
        self.visit(&mut |e| match e {
            ProbExpr::Prob { target, given } => {
                if target.iter().any(|t| given.contains(t)) {
                    err.get_or_insert_with(|| format!("target and given overlap in {e}"));
                }
            }
            ProbExpr::Sum { over, .. } => {
                for v in over {
                    if free.contains(v) || !seen.insert(v.clone()) {
                        err.get_or_insert_with(|| format!("bound variable {v} is not fresh"));
                    }
                }
            }
            _ => {}
        });
        err.map_or(Ok(()), Err)
    }

    pub fn simplify(&self) -> ProbExpr {
        simplify::simplify(self)
    }

    pub fn render(&self, format: Format) -> String {
        render::render(self, format)
    }
}

impl fmt::Display for ProbExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(Format::Text))
    }
}
