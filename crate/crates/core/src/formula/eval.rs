use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use super::{JointTable, ProbExpr, Var};
use crate::cluster::Partition;
use crate::error::{Error, Result};

/// Values for the free variables of an expression. A cluster symbol's value
/// is the mixed-radix index over its members (last member fastest).
pub type Assignment = BTreeMap<Var, usize>;

#[derive(Clone, Debug)]
struct Symbol {
    cols: Vec<usize>,
    cards: Vec<usize>,
    size: usize,
}

/// Evaluates expressions against a joint table. Symbols are the table's
/// variables and, when a partition is supplied, its clusters.
pub struct Evaluator<'t> {
    table: &'t JointTable,
    symbols: BTreeMap<String, Symbol>,
    marginals: RefCell<HashMap<Vec<usize>, Rc<Vec<f64>>>>,
}

impl<'t> Evaluator<'t> {
    pub fn new(table: &'t JointTable) -> Self {
        let symbols = table
            .variables()
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let c = table.cards()[i];
                (v.clone(), Symbol { cols: vec![i], cards: vec![c], size: c })
            })
            .collect();
        Evaluator { table, symbols, marginals: RefCell::default() }
    }

    /// Clusters of `p` become symbols ranging over their members' joint
    /// values. Cluster names shadow variable names.
    pub fn with_partition(table: &'t JointTable, p: &Partition) -> Result<Self> {
        let mut ev = Self::new(table);
        for (name, members) in p.blocks() {
            let cols: Vec<usize> = members.iter().map(|m| table.column(m)).collect::<Result<_>>()?;
            let cards: Vec<usize> = cols.iter().map(|&c| table.cards()[c]).collect();
            let size = cards.iter().product();
            ev.symbols.insert(name.clone(), Symbol { cols, cards, size });
        }
        Ok(ev)
    }

    pub fn table(&self) -> &JointTable {
        self.table
    }

    pub fn symbol_size(&self, name: &str) -> Result<usize> {
        self.symbol(name).map(|s| s.size)
    }

    /// Decodes a symbol value into `(column, value)` pairs.
    pub fn symbol_values(&self, name: &str, value: usize) -> Result<Vec<(usize, usize)>> {
        let s = self.symbol(name)?;
        Ok(decode(s, value))
    }

    /// Encodes per-variable values (by table column) into a symbol value.
    pub fn symbol_value_of(&self, name: &str, column_values: &[usize]) -> Result<usize> {
        let s = self.symbol(name)?;
        Ok(s.cols.iter().zip(&s.cards).fold(0, |acc, (&c, &k)| acc * k + column_values[c]))
    }

    fn symbol(&self, name: &str) -> Result<&Symbol> {
        self.symbols.get(name).ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    fn marginal(&self, cols: &[usize]) -> Rc<Vec<f64>> {
        if let Some(m) = self.marginals.borrow().get(cols) {
            return Rc::clone(m);
        }
        let m = Rc::new(self.table.marginal(cols));
        self.marginals.borrow_mut().insert(cols.to_vec(), Rc::clone(&m));
        m
    }

    pub fn compile(&self, e: &ProbExpr) -> Result<Program> {
        Program::compile(self, &e.hygienic())
    }

    pub fn evaluate(&self, e: &ProbExpr, a: &Assignment) -> Result<f64> {
        self.compile(e)?.eval(self, a)
    }

    /// Every assignment of the given free variables, in odometer order.
    pub fn assignments(&self, vars: &[Var]) -> Result<Vec<Assignment>> {
        let sizes: Vec<usize> = vars.iter().map(|v| self.symbol_size(&v.name)).collect::<Result<_>>()?;
        let total: usize = sizes.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut vals = vec![0usize; vars.len()];
        for _ in 0..total {
            out.push(vars.iter().cloned().zip(vals.iter().copied()).collect());
            for i in (0..vals.len()).rev() {
                vals[i] += 1;
                if vals[i] < sizes[i] {
                    break;
                }
                vals[i] = 0;
            }
        }
        Ok(out)
    }
}

fn decode(s: &Symbol, mut value: usize) -> Vec<(usize, usize)> {
    let mut out = vec![(0, 0); s.cols.len()];
    for i in (0..s.cols.len()).rev() {
        out[i] = (s.cols[i], value % s.cards[i]);
        value /= s.cards[i];
    }
    out
}

#[derive(Debug)]
enum Node {
    One,
    Prob {
        /// Sorted distinct columns of target and given.
        all: Vec<usize>,
        given: Vec<usize>,
        /// (slot, symbol, is_given) per variable occurrence.
        parts: Vec<(usize, Symbol, bool)>,
        label: String,
    },
    Product(Vec<usize>),
    Sum {
        slots: Vec<usize>,
        sizes: Vec<usize>,
        body: usize,
    },
    Fraction {
        num: usize,
        den: usize,
        label: String,
    },
}

/// An expression compiled against an [`Evaluator`]'s symbols. Sum and
/// fraction values are memoized by the values of their free variables, so
/// repeated evaluation at different assignments is cheap.
pub struct Program {
    nodes: Vec<Node>,
    free: Vec<Vec<usize>>,
    root: usize,
    slots: Vec<Var>,
    memo: RefCell<HashMap<Vec<usize>, f64>>,
}

impl Program {
    fn compile(ev: &Evaluator<'_>, e: &ProbExpr) -> Result<Program> {
        let mut p =
            Program { nodes: Vec::new(), free: Vec::new(), root: 0, slots: Vec::new(), memo: RefCell::default() };
        p.root = p.add(ev, e)?;
        Ok(p)
    }

    fn slot(&mut self, v: &Var) -> usize {
        match self.slots.iter().position(|s| s == v) {
            Some(i) => i,
            None => {
                self.slots.push(v.clone());
                self.slots.len() - 1
            }
        }
    }

    fn push(&mut self, node: Node, mut free: Vec<usize>) -> usize {
        free.sort_unstable();
        free.dedup();
        self.nodes.push(node);
        self.free.push(free);
        self.nodes.len() - 1
    }

    fn add(&mut self, ev: &Evaluator<'_>, e: &ProbExpr) -> Result<usize> {
        Ok(match e {
            ProbExpr::One => self.push(Node::One, vec![]),
            ProbExpr::Prob { target, given } => {
                let mut parts = Vec::new();
                let mut all = Vec::new();
                let mut gcols = Vec::new();
                for (v, is_given) in target.iter().map(|v| (v, false)).chain(given.iter().map(|v| (v, true))) {
                    let sym = ev.symbol(&v.name)?.clone();
                    all.extend(sym.cols.iter().copied());
                    if is_given {
                        gcols.extend(sym.cols.iter().copied());
                    }
                    let slot = self.slot(v);
                    parts.push((slot, sym, is_given));
                }
                all.sort_unstable();
                all.dedup();
                gcols.sort_unstable();
                gcols.dedup();
                let free = parts.iter().map(|p| p.0).collect();
                self.push(Node::Prob { all, given: gcols, parts, label: e.to_string() }, free)
            }
            ProbExpr::Product(fs) => {
                let ids = fs.iter().map(|f| self.add(ev, f)).collect::<Result<Vec<_>>>()?;
                let free = ids.iter().flat_map(|&i| self.free[i].clone()).collect();
                self.push(Node::Product(ids), free)
            }
            ProbExpr::Sum { over, body } => {
                let slots: Vec<usize> = over.iter().map(|v| self.slot(v)).collect();
                let sizes = over.iter().map(|v| ev.symbol_size(&v.name)).collect::<Result<_>>()?;
                let b = self.add(ev, body)?;
                let free = self.free[b].iter().copied().filter(|s| !slots.contains(s)).collect();
                self.push(Node::Sum { slots, sizes, body: b }, free)
            }
            ProbExpr::Fraction { num, den } => {
                let n = self.add(ev, num)?;
                let d = self.add(ev, den)?;
                let free = self.free[n].iter().chain(&self.free[d]).copied().collect();
                self.push(Node::Fraction { num: n, den: d, label: den.to_string() }, free)
            }
        })
    }

    /// Free variables the program expects in an assignment.
    pub fn free_vars(&self) -> Vec<Var> {
        self.free[self.root].iter().map(|&s| self.slots[s].clone()).collect()
    }

    pub fn eval(&self, ev: &Evaluator<'_>, a: &Assignment) -> Result<f64> {
        let mut env = vec![usize::MAX; self.slots.len()];
        for &s in &self.free[self.root] {
            let v = &self.slots[s];
            let val = *a.get(v).ok_or_else(|| Error::InvalidAssignment(format!("no value for {v}")))?;
            if val >= ev.symbol_size(&v.name)? {
                return Err(Error::InvalidAssignment(format!("{v}={val} out of range")));
            }
            env[s] = val;
        }
        self.eval_node(ev, self.root, &mut env)
    }

    fn memo_key(&self, id: usize, env: &[usize]) -> Vec<usize> {
        let mut k = Vec::with_capacity(self.free[id].len() + 1);
        k.push(id);
        k.extend(self.free[id].iter().map(|&s| env[s]));
        k
    }

    fn eval_node(&self, ev: &Evaluator<'_>, id: usize, env: &mut Vec<usize>) -> Result<f64> {
        match &self.nodes[id] {
            Node::One => Ok(1.0),
            Node::Prob { all, given, parts, label } => {
                let mut assigned: Vec<(usize, usize, bool)> = Vec::with_capacity(all.len());
                let mut num_conflict = false;
                let mut den_conflict = false;
                for (slot, sym, is_given) in parts {
                    for (col, val) in decode(sym, env[*slot]) {
                        match assigned.iter_mut().find(|(c, _, _)| *c == col) {
                            Some((_, v, g)) => {
                                if *v != val {
                                    num_conflict = true;
                                    if *g && *is_given {
                                        den_conflict = true;
                                    }
                                }
                                *g = *g && *is_given;
                            }
                            None => assigned.push((col, val, *is_given)),
                        }
                    }
                }
                let value_of = |c: usize| assigned.iter().find(|(col, _, _)| *col == c).map(|t| t.1).unwrap_or(0);
                let den = if given.is_empty() {
                    1.0
                } else if den_conflict {
                    0.0
                } else {
                    let m = ev.marginal(given);
                    m[index(ev, given, &value_of)]
                };
                if den <= 0.0 {
                    return Err(Error::ZeroConditioningMass(label.clone()));
                }
                if num_conflict {
                    return Ok(0.0);
                }
                let m = ev.marginal(all);
                Ok(m[index(ev, all, &value_of)] / den)
            }
            Node::Product(ids) => {
                let mut acc = 1.0;
                for &i in ids {
                    acc *= self.eval_node(ev, i, env)?;
                    if acc == 0.0 {
                        break;
                    }
                }
                Ok(acc)
            }
            Node::Sum { slots, sizes, body } => {
                let key = self.memo_key(id, env);
                if let Some(&v) = self.memo.borrow().get(&key) {
                    return Ok(v);
                }
                let saved: Vec<usize> = slots.iter().map(|&s| env[s]).collect();
                let total: usize = sizes.iter().product();
                let mut vals = vec![0usize; slots.len()];
                let mut acc = 0.0;
                for _ in 0..total {
                    for (&s, &v) in slots.iter().zip(&vals) {
                        env[s] = v;
                    }
                    acc += self.eval_node(ev, *body, env)?;
                    for i in (0..vals.len()).rev() {
                        vals[i] += 1;
                        if vals[i] < sizes[i] {
                            break;
                        }
                        vals[i] = 0;
                    }
                }
                for (&s, v) in slots.iter().zip(saved) {
                    env[s] = v;
                }
                self.memo.borrow_mut().insert(key, acc);
                Ok(acc)
            }
            Node::Fraction { num, den, label } => {
                let key = self.memo_key(id, env);
                if let Some(&v) = self.memo.borrow().get(&key) {
                    return Ok(v);
                }
                let d = self.eval_node(ev, *den, env)?;
                if d <= 0.0 {
                    return Err(Error::ZeroConditioningMass(label.clone()));
                }
                let v = self.eval_node(ev, *num, env)? / d;
                self.memo.borrow_mut().insert(key, v);
                Ok(v)
            }
        }
    }
}

fn index(ev: &Evaluator<'_>, cols: &[usize], value_of: &impl Fn(usize) -> usize) -> usize {
    let cards = ev.table.cards();
    cols.iter().fold(0, |acc, &c| acc * cards[c] + value_of(c))
}

/// Evaluates `e` on `t`, with the table's variables as the only symbols.
pub fn evaluate(e: &ProbExpr, t: &JointTable, a: &Assignment) -> Result<f64> {
    Evaluator::new(t).evaluate(e, a)
}

/// True iff the two expressions agree within `tol` at every assignment of
/// their combined free variables.
pub fn equivalent_on(e1: &ProbExpr, e2: &ProbExpr, ev: &Evaluator<'_>, tol: f64) -> Result<bool> {
    let p1 = ev.compile(e1)?;
    let p2 = ev.compile(e2)?;
    let mut vars: Vec<Var> = e1.free_vars().union(&e2.free_vars()).cloned().collect();
    vars.sort();
    for a in ev.assignments(&vars)? {
        if (p1.eval(ev, &a)? - p2.eval(ev, &a)?).abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}
