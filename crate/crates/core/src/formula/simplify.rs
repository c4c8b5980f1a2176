//! Semantics-preserving rewrites.
//!
//! `core` rules run to a fixpoint: flatten products and drop `1` factors,
//! merge directly nested sums, marginalize a summed variable that occurs in a
//! single factor and only as a target (`sum_v P(v, a | c) rest = P(a | c)
//! rest`), pull factors that mention no bound variable out of a sum, and
//! cancel or fold fractions. A final `nest` pass then pushes each summed
//! variable as far inward as its factors allow.

use std::collections::BTreeSet;

use super::{ProbExpr, Var};

pub(super) fn simplify(e: &ProbExpr) -> ProbExpr {
    let mut cur = e.clone();
    // Every core rule shrinks the tree or moves a factor outward, so this
    // converges quickly; the bound is a backstop.
    for _ in 0..64 {
        let next = core(&cur);
        if next == cur {
            break;
        }
        cur = next;
    }
    nest(&cur)
}

fn factors(e: ProbExpr) -> Vec<ProbExpr> {
    match e {
        ProbExpr::One => vec![],
        ProbExpr::Product(fs) => fs.into_iter().flat_map(factors).collect(),
        other => vec![other],
    }
}

fn from_factors(mut fs: Vec<ProbExpr>) -> ProbExpr {
    match fs.len() {
        0 => ProbExpr::One,
        1 => fs.pop().expect("one factor"),
        _ => ProbExpr::Product(fs),
    }
}

fn core(e: &ProbExpr) -> ProbExpr {
    match e {
        ProbExpr::One => ProbExpr::One,
        ProbExpr::Prob { target, .. } if target.is_empty() => ProbExpr::One,
        ProbExpr::Prob { .. } => e.clone(),
        ProbExpr::Product(fs) => from_factors(fs.iter().map(core).flat_map(factors).collect()),
        ProbExpr::Fraction { num, den } => fraction(core(num), core(den)),
        ProbExpr::Sum { over, body } => sum(over.clone(), core(body)),
    }
}

fn fraction(num: ProbExpr, den: ProbExpr) -> ProbExpr {
    if den == ProbExpr::One {
        return num;
    }
    if num == den {
        return ProbExpr::One;
    }
    let mut nf = factors(num);
    let mut df = factors(den);
    let mut i = 0;
    while i < nf.len() {
        if let Some(j) = df.iter().position(|d| d == &nf[i]) {
            df.remove(j);
            nf.remove(i);
        } else {
            i += 1;
        }
    }
    if df.is_empty() {
        return from_factors(nf);
    }
    if let ([ProbExpr::Prob { target: nt, given: ng }], [ProbExpr::Prob { target: dt, given: dg }]) =
        (nf.as_slice(), df.as_slice())
    {
        let ng_set: BTreeSet<&Var> = ng.iter().collect();
        let dg_set: BTreeSet<&Var> = dg.iter().collect();
        if ng_set == dg_set && dt.len() < nt.len() && dt.iter().all(|v| nt.contains(v)) {
            let target = nt.iter().filter(|v| !dt.contains(v)).cloned().collect();
            let given = dt.iter().chain(ng.iter()).cloned().collect();
            return ProbExpr::Prob { target, given };
        }
    }
    ProbExpr::fraction(from_factors(nf), from_factors(df))
}

fn sum(mut over: Vec<Var>, body: ProbExpr) -> ProbExpr {
    if over.is_empty() {
        return body;
    }
    if let ProbExpr::Sum { over: inner, body: ib } = &body {
        if inner.iter().all(|v| !over.contains(v)) {
            over.extend(inner.iter().cloned());
            return sum(over, (**ib).clone());
        }
    }
    let mut fs = factors(body);

    // Marginalize variables confined to the target of a single factor.
    let mut k = 0;
    while k < over.len() {
        let v = &over[k];
        let users: Vec<usize> = (0..fs.len()).filter(|&i| fs[i].mentions(v)).collect();
        let removable = match users.as_slice() {
            [i] => matches!(&fs[*i], ProbExpr::Prob { target, given } if target.contains(v) && !given.contains(v)),
            _ => false,
        };
        if removable {
            let i = users[0];
            if let ProbExpr::Prob { target, given } = &fs[i] {
                let target: Vec<Var> = target.iter().filter(|t| *t != v).cloned().collect();
                fs[i] = ProbExpr::prob_vars(target, given.clone());
            }
            if fs[i] == ProbExpr::One {
                fs.remove(i);
            }
            over.remove(k);
            k = 0;
        } else {
            k += 1;
        }
    }
    if over.is_empty() {
        return from_factors(fs);
    }

    let (inside, outside): (Vec<ProbExpr>, Vec<ProbExpr>) =
        fs.into_iter().partition(|f| over.iter().any(|v| f.mentions(v)));
    let inner = if inside.is_empty() {
        // Nothing left depends on the bound variables; keep the sum so the
        // count of their values is not silently dropped.
        ProbExpr::Sum { over, body: Box::new(ProbExpr::One) }
    } else {
        ProbExpr::Sum { over, body: Box::new(from_factors(inside)) }
    };
    if outside.is_empty() {
        inner
    } else {
        let mut all = outside;
        all.push(inner);
        ProbExpr::Product(all)
    }
}

/// Stable reorder putting sums after plain factors, so a sum's scope can run
/// to the end of the product.
fn sums_last(fs: Vec<ProbExpr>) -> ProbExpr {
    let (mut plain, sums): (Vec<_>, Vec<_>) = fs.into_iter().partition(|f| !matches!(f, ProbExpr::Sum { .. }));
    plain.extend(sums);
    from_factors(plain)
}

fn nest(e: &ProbExpr) -> ProbExpr {
    match e {
        ProbExpr::One | ProbExpr::Prob { .. } => e.clone(),
        ProbExpr::Product(fs) => sums_last(fs.iter().map(nest).flat_map(factors).collect()),
        ProbExpr::Fraction { num, den } => ProbExpr::fraction(nest(num), nest(den)),
        ProbExpr::Sum { over, body } => {
            let fs: Vec<ProbExpr> = factors(nest(body));
            nest_sum(over.clone(), fs)
        }
    }
}

/// Splits `sum_{over} prod(fs)` into nested sums, innermost variable last.
fn nest_sum(over: Vec<Var>, fs: Vec<ProbExpr>) -> ProbExpr {
    let (inside, outside): (Vec<ProbExpr>, Vec<ProbExpr>) =
        fs.into_iter().partition(|f| over.iter().any(|v| f.mentions(v)));
    let body =
        if over.len() < 2 { ProbExpr::Sum { over, body: Box::new(sums_last(inside)) } } else { split(over, inside) };
    if outside.is_empty() {
        body
    } else {
        let mut all = outside;
        all.extend(factors(body));
        sums_last(all)
    }
}

fn split(over: Vec<Var>, inside: Vec<ProbExpr>) -> ProbExpr {
    for v in over.iter().rev() {
        let (with, without): (Vec<ProbExpr>, Vec<ProbExpr>) = inside.iter().cloned().partition(|f| f.mentions(v));
        if with.is_empty() || without.is_empty() {
            continue;
        }
        let rest: Vec<Var> = over.iter().filter(|u| *u != v).cloned().collect();
        let inner = nest_sum(vec![v.clone()], with);
        let inner_stays = rest.iter().any(|u| inner.mentions(u));
        // Avoid leaving a sum whose whole body is another sum.
        let outer_factors = without.len() + usize::from(inner_stays);
        if outer_factors == 1 && matches!(without.first(), Some(ProbExpr::Sum { .. })) && !inner_stays {
            continue;
        }
        let mut fs = without;
        fs.push(inner);
        return nest_sum(rest, fs);
    }
    ProbExpr::Sum { over, body: Box::new(sums_last(inside)) }
}
