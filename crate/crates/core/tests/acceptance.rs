//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

mod support;

use std::collections::BTreeMap;
use std::time::Instant;

use cdag::cli::{simulate, SimConfig};
use cdag::docalc::{apply_rule, DoQuery, Rule};
use cdag::formula::{equivalent_on, Assignment, Evaluator};
use cdag::identify::{hedge_expansion_witness, identify, identify_admg, witness_partition};
use cdag::oracle::{
    build_macro_scm, cluster_factorization_check, counterfactual_prob, expand_cluster_assignment,
    interventional_distribution, joint_distribution, random_cbn, random_scm, CfEvent, DiscreteCbn,
};
use cdag::sampler::{expand, sample_batch, CrossPolicy, ExpansionSpec, InternalPolicy};
use cdag::{build_cdag, cdag_d_separated, ClusterDag, Error, JointTable, NodeSet, Partition, ProbExpr, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::gen::{random_admg, random_cdag, random_effect, random_expansion, random_query, random_sizes};
use support::*;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn v(name: &str) -> Var {
    Var::new(name)
}

fn primed(name: &str) -> Var {
    Var::primed(name, 1)
}

fn pr(t: &[Var], g: &[Var]) -> ProbExpr {
    ProbExpr::prob_vars(t.to_vec(), g.to_vec())
}

fn singletons(c: &ClusterDag, seed: u64) -> (DiscreteCbn, Partition) {
    (random_cbn(c.graph(), &BTreeMap::new(), seed).unwrap(), Partition::singletons(c.graph()))
}

fn golden_formulas() -> Outcome {
    type Source = Box<dyn Fn(u64) -> (DiscreteCbn, Partition)>;
    let front = sum_over(
        &[v("S")],
        ProbExpr::product(vec![
            pr(&[v("S")], &[v("X")]),
            sum_over(
                &[primed("X")],
                ProbExpr::product(vec![pr(&[v("Y")], &[primed("X"), v("S")]), pr(&[primed("X")], &[])]),
            ),
        ]),
    );
    let backdoor_xy = sum_over(
        &[v("Z1"), v("Z2")],
        ProbExpr::product(vec![pr(&[v("Y")], &[v("X"), v("Z1"), v("Z2")]), pr(&[v("Z1"), v("Z2")], &[])]),
    );
    let backdoor_yz = sum_over(
        &[v("Z"), primed("X1")],
        ProbExpr::product(vec![pr(&[v("Y")], &[primed("X1"), v("X2"), v("Z")]), pr(&[primed("X1"), v("Z")], &[])]),
    );
    let joint_fx = ProbExpr::product(vec![
        pr(&[v("Y1")], &[v("X1"), v("X2")]),
        sum_over(
            &[primed("X1")],
            ProbExpr::product(vec![pr(&[v("Y2")], &[primed("X1"), v("X2"), v("Y1")]), pr(&[primed("X1")], &[])]),
        ),
    ]);
    let gc1_fx = sum_over(&[v("Z")], ProbExpr::product(vec![pr(&[v("Y")], &[v("X"), v("Z")]), pr(&[v("Z")], &[])]));

    let c_multi_xy = multi_xy();
    let c_multi_yz = multi_yz();
    let c_joint = joint();
    let cases: Vec<(&str, ClusterDag, NodeSet, NodeSet, ProbExpr, Source)> = vec![
        (
            "front door",
            frontdoor(),
            set(&["X"]),
            set(&["Y"]),
            front,
            Box::new(|s| (random_cbn(&medication(), &BTreeMap::new(), s).unwrap(), frontdoor_partition())),
        ),
        (
            "backdoor over Z1, Z2",
            c_multi_xy.clone(),
            set(&["X"]),
            set(&["Y"]),
            backdoor_xy,
            Box::new(move |s| singletons(&c_multi_xy, s)),
        ),
        (
            "backdoor over Z, X1",
            c_multi_yz.clone(),
            set(&["X1", "X2"]),
            set(&["Y"]),
            backdoor_yz,
            Box::new(move |s| singletons(&c_multi_yz, s)),
        ),
        (
            "joint intervention",
            c_joint.clone(),
            set(&["X1", "X2"]),
            set(&["Y1", "Y2"]),
            joint_fx,
            Box::new(move |s| singletons(&c_joint, s)),
        ),
        (
            "backdoor over cluster Z",
            gc1(),
            set(&["X"]),
            set(&["Y"]),
            gc1_fx,
            Box::new(|s| {
                let mut r = rng(s);
                let (g, p) = random_expansion(&mut r, &gc1(), [("Z".to_string(), 3)].into());
                (random_cbn(&g, &BTreeMap::new(), s).unwrap(), p)
            }),
        ),
    ];
    for (name, c, x, y, reference, source) in &cases {
        let found = identify(c, x, y).map_err(|e| e.to_string())?;
        let found = found.expr().ok_or_else(|| format!("{name}: not identified"))?;
        for seed in 0..20 {
            let (m, p) = source(seed);
            let joint = joint_distribution(&m).unwrap();
            let ev = Evaluator::with_partition(&joint, &p).unwrap();
            ensure(equivalent_on(found, reference, &ev, 1e-9).unwrap(), || {
                format!("{name}: {found} differs, seed {seed}")
            })?;
            let gap = max_gap(&m, &p, x, y, reference);
            ensure(gap < 1e-9, || format!("{name}: reference formula off the oracle by {gap}"))?;
        }
    }
    Ok(format!("{} formulas x 20 tables", cases.len()))
}

fn sum_over(over: &[Var], body: ProbExpr) -> ProbExpr {
    ProbExpr::sum(over.to_vec(), body)
}

fn non_identifiable() -> Outcome {
    for (name, c) in [
        ("confounded covariate", gc2()),
        ("two treatments, one cluster", gc2_zx()),
        ("bow", bow()),
        ("W, Z clustering", medication_wz()),
    ] {
        let (x, y) = (set(&["X"]), set(&["Y"]));
        let r = identify(&c, &x, &y).map_err(|e| e.to_string())?;
        let h = r.hedge().ok_or_else(|| format!("{name}: identified"))?;
        h.validate(c.graph(), &x, &y).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok("4 graphs".into())
}

fn dsep_soundness() -> Outcome {
    let mut r = rng(3);
    let mut separated = 0;
    for case in 0..1000 {
        let c = random_cdag(&mut r, 6);
        let (x, y, z) = random_query(&mut r, c.graph());
        let sizes = random_sizes(&mut r, &c, 3);
        let (g, p) = random_expansion(&mut r, &c, sizes);
        if !cdag_d_separated(&c, &x, &y, &z).unwrap() {
            continue;
        }
        separated += 1;
        let (xe, ye, ze) = (p.expand(&x).unwrap(), p.expand(&y).unwrap(), p.expand(&z).unwrap());
        ensure(g.m_separated(&xe, &ye, &ze).unwrap(), || {
            format!("case {case}: ({x} ⊥ {y} | {z}) fails in an expansion")
        })?;
    }
    Ok(format!("1000 cases, {separated} separated"))
}

fn dsep_completeness() -> Outcome {
    let mut r = rng(4);
    let mut cases = 0;
    while cases < 500 {
        let c = random_cdag(&mut r, 6);
        let (x, y, z) = random_query(&mut r, c.graph());
        if cdag_d_separated(&c, &x, &y, &z).unwrap() {
            continue;
        }
        cases += 1;
        let spec = ExpansionSpec::new(InternalPolicy::Empty, CrossPolicy::MinimalWitness, r.random());
        let (g, _) = expand(&c, &spec).unwrap();
        ensure(!brute::m_separated(&g, &x, &y, &z), || format!("({x} ⊥ {y} | {z}) holds in the singleton expansion"))?;
    }
    Ok("500 connected queries".into())
}

/// Assignments of binary-or-wider variables of `m`, as name maps.
fn assignments(m: &DiscreteCbn, names: &NodeSet) -> Vec<BTreeMap<String, usize>> {
    let mut out = vec![BTreeMap::new()];
    for n in names.iter() {
        let k = m.card_of(n).unwrap();
        out = out
            .into_iter()
            .flat_map(|a| {
                (0..k).map(move |val| {
                    let mut b = a.clone();
                    b.insert(n.clone(), val);
                    b
                })
            })
            .collect();
    }
    out
}

/// `P(y | given)` from `t`, one entry per joint value of `y`.
fn conditional(t: &JointTable, given: &BTreeMap<String, usize>, y: &NodeSet) -> Vec<f64> {
    let ycols: Vec<usize> = y.iter().map(|n| t.column(n).unwrap()).collect();
    let gcols: Vec<(usize, usize)> = given.iter().map(|(n, &val)| (t.column(n).unwrap(), val)).collect();
    let size: usize = ycols.iter().map(|&c| t.cards()[c]).product();
    let mut acc = vec![0.0; size];
    for i in 0..t.len() {
        let row = t.decode(i);
        if gcols.iter().all(|&(c, val)| row[c] == val) {
            let k = ycols.iter().fold(0, |k, &c| k * t.cards()[c] + row[c]);
            acc[k] += t.probs()[i];
        }
    }
    let total: f64 = acc.iter().sum();
    acc.iter().map(|a| a / total).collect()
}

fn merged(a: &BTreeMap<String, usize>, b: &BTreeMap<String, usize>) -> BTreeMap<String, usize> {
    a.iter().chain(b).map(|(k, &v)| (k.clone(), v)).collect()
}

fn post(m: &DiscreteCbn, x: &BTreeMap<String, usize>) -> JointTable {
    if x.is_empty() {
        joint_distribution(m).unwrap()
    } else {
        interventional_distribution(m, x).unwrap()
    }
}

fn gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, w)| (u - w).abs()).fold(0.0, f64::max)
}

fn docalc_soundness() -> Outcome {
    let mut r = rng(5);
    let mut per_rule = [0; 3];
    let mut cases = 0;
    while cases < 300 {
        let c = random_cdag(&mut r, 5);
        let names = c.graph().names().to_vec();
        let mut q = DoQuery::default();
        for n in &names {
            let s = match r.random_range(0..5) {
                0 => &mut q.x,
                1 => &mut q.y,
                2 => &mut q.z,
                3 => &mut q.w,
                _ => continue,
            };
            s.insert(n.clone());
        }
        if q.y.is_empty() || q.z.is_empty() {
            continue;
        }
        let k = r.random_range(0..3);
        let rule = [Rule::R1, Rule::R2, Rule::R3][k];
        if !apply_rule(rule, &c, &q).unwrap().applies {
            continue;
        }
        cases += 1;
        per_rule[k] += 1;
        let sizes = random_sizes(&mut r, &c, 2);
        let (g, p) = random_expansion(&mut r, &c, sizes);
        let m = random_cbn(&g, &BTreeMap::new(), r.random()).unwrap();
        let ex = |s: &NodeSet| p.expand(s).unwrap();
        let (xm, ym, zm, wm) = (ex(&q.x), ex(&q.y), ex(&q.z), ex(&q.w));
        let mut worst: f64 = 0.0;
        for xa in assignments(&m, &xm) {
            let px = post(&m, &xa);
            for za in assignments(&m, &zm) {
                let pxz = post(&m, &merged(&xa, &za));
                for wa in assignments(&m, &wm) {
                    let (lhs, rhs) = match rule {
                        Rule::R1 => (conditional(&px, &merged(&za, &wa), &ym), conditional(&px, &wa, &ym)),
                        Rule::R2 => (conditional(&pxz, &wa, &ym), conditional(&px, &merged(&za, &wa), &ym)),
                        Rule::R3 => (conditional(&pxz, &wa, &ym), conditional(&px, &wa, &ym)),
                    };
                    worst = worst.max(gap(&lhs, &rhs));
                }
            }
        }
        ensure(worst < 1e-9, || format!("{rule} on {q:?}: gap {worst}"))?;
    }
    Ok(format!("300 licensed equalities (rules 1/2/3: {}/{}/{})", per_rule[0], per_rule[1], per_rule[2]))
}

fn id_soundness() -> Outcome {
    let mut r = rng(6);
    let (mut pairs, mut skipped) = (0, 0);
    let mut worst: f64 = 0.0;
    while pairs < 200 {
        let c = random_cdag(&mut r, 5);
        let (x, y) = random_effect(&mut r, c.graph());
        let res = identify(&c, &x, &y).unwrap();
        let Some(e) = res.expr() else { continue };
        pairs += 1;
        let mut done = 0;
        while done < 3 {
            let sizes = random_sizes(&mut r, &c, 2);
            let (g, p) = random_expansion(&mut r, &c, sizes);
            let m = random_cbn(&g, &BTreeMap::new(), r.random()).unwrap();
            match joint_distribution(&m) {
                Err(Error::StateSpaceCap { .. }) => {
                    skipped += 1;
                    continue;
                }
                other => other.map_err(|e| e.to_string())?,
            };
            done += 1;
            let d = max_gap(&m, &p, &x, &y, e);
            worst = worst.max(d);
            ensure(d < 1e-9, || format!("P({y}|do({x})) = {e}: gap {d}"))?;
        }
    }
    Ok(format!("200 pairs x 3 expansions, max gap {worst:.1e}, {skipped} over the state cap redrawn"))
}

fn id_completeness() -> Outcome {
    let mut r = rng(7);
    let mut cases = 0;
    while cases < 100 {
        let c = random_cdag(&mut r, 6);
        let (x, y) = random_effect(&mut r, c.graph());
        let res = identify(&c, &x, &y).unwrap();
        let Some(h) = res.hedge() else { continue };
        cases += 1;
        h.validate(c.graph(), &x, &y).map_err(|e| e.to_string())?;
        let mut mixed = random_sizes(&mut r, &c, 3);
        if mixed.values().all(|&s| s == 1) {
            *mixed.values_mut().next().unwrap() = 2;
        }
        for sizes in [BTreeMap::new(), mixed] {
            let w = hedge_expansion_witness(&c, h, &sizes).unwrap();
            let wp = witness_partition(&c, &sizes).unwrap();
            ensure(build_cdag(&w, &wp).unwrap().graph() == c.graph(), || "witness is not compatible".into())?;
            let again = identify_admg(&w, &wp.expand(&x).unwrap(), &wp.expand(&y).unwrap()).unwrap();
            ensure(!again.is_identified(), || format!("P({y}|do({x})) identified on a witness"))?;
        }
    }
    Ok("100 hedges, 200 witnesses".into())
}

fn factorization() -> Outcome {
    let mut r = rng(8);
    let (mut done, mut skipped) = (0, 0);
    let mut worst: f64 = 0.0;
    while done < 100 {
        let c = random_cdag(&mut r, 5);
        let sizes = random_sizes(&mut r, &c, 3);
        if sizes.values().sum::<usize>() > 12 {
            continue;
        }
        let (g, p) = random_expansion(&mut r, &c, sizes);
        let m = random_cbn(&g, &BTreeMap::new(), r.random()).unwrap();
        let x: NodeSet = c.graph().names().iter().filter(|_| r.random_bool(0.3)).cloned().collect();
        match cluster_factorization_check(&m, &p, &x) {
            Ok(d) => {
                worst = worst.max(d);
                ensure(d < 1e-10, || format!("gap {d} intervening on {x}"))?;
                done += 1;
            }
            Err(Error::StateSpaceCap { .. }) => skipped += 1,
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(format!("100 triples, max gap {worst:.1e}, {skipped} over the state cap redrawn"))
}

/// Cluster-level counterfactual event: some clusters forced, some observed.
fn cluster_event(r: &mut ChaCha8Rng, names: &[String], cards: &[usize]) -> CfEvent {
    loop {
        let mut e = CfEvent::default();
        for (n, &k) in names.iter().zip(cards) {
            match r.random_range(0..3) {
                0 => e.intervention.insert(n.clone(), r.random_range(0..k)),
                1 => e.outcome.insert(n.clone(), r.random_range(0..k)),
                _ => None,
            };
        }
        if !e.outcome.is_empty() {
            return e;
        }
    }
}

fn macro_counterfactuals() -> Outcome {
    let mut r = rng(9);
    let mut models = 0;
    let mut nonzero = 0;
    while models < 50 {
        let c = random_cdag(&mut r, 4);
        let names = c.graph().names().to_vec();
        let mut sizes: BTreeMap<String, usize> = names.iter().map(|n| (n.clone(), 1)).collect();
        let first = r.random_range(0..names.len());
        let second = (first + r.random_range(1..names.len())) % names.len();
        sizes.insert(names[first].clone(), 2);
        sizes.insert(names[second].clone(), 2);
        let (g, p) = random_expansion(&mut r, &c, sizes);
        let m = random_scm(&g, &BTreeMap::new(), r.random()).unwrap();
        let mac = build_macro_scm(&m, &p).unwrap();
        ensure(mac.induced_graph().unwrap() == *c.graph(), || "macro model induces another graph".into())?;
        models += 1;
        for _ in 0..5 {
            let events: Vec<CfEvent> =
                (0..r.random_range(1..=2)).map(|_| cluster_event(&mut r, &names, mac.cluster_cards())).collect();
            let base: Vec<CfEvent> = events
                .iter()
                .map(|e| CfEvent {
                    outcome: expand_cluster_assignment(&m, &p, &e.outcome).unwrap(),
                    intervention: expand_cluster_assignment(&m, &p, &e.intervention).unwrap(),
                })
                .collect();
            let pc = counterfactual_prob(&mac, &events).unwrap();
            let pm = counterfactual_prob(&m, &base).unwrap();
            if pm > 0.0 {
                nonzero += 1;
            }
            ensure((pc - pm).abs() < 1e-12, || format!("{events:?}: {pm} vs {pc}"))?;
        }
    }
    // Effect of treatment on the treated, over a clustered covariate.
    for seed in 0..10 {
        let mut r = rng(100 + seed);
        let (g, p) = random_expansion(&mut r, &gc1(), [("Z".to_string(), 3)].into());
        let m = random_scm(&g, &BTreeMap::new(), seed).unwrap();
        let mac = build_macro_scm(&m, &p).unwrap();
        let none: [(&str, usize); 0] = [];
        let both = [CfEvent::new([("Y", 1)], [("X", 0)]), CfEvent::new([("X", 1)], none)];
        let treated = [CfEvent::new([("X", 1)], none)];
        let cf = counterfactual_prob(&m, &both).unwrap() / counterfactual_prob(&m, &treated).unwrap();
        let cf_macro = counterfactual_prob(&mac, &both).unwrap() / counterfactual_prob(&mac, &treated).unwrap();
        let joint = joint_distribution(&m).unwrap();
        let ev = Evaluator::with_partition(&joint, &p).unwrap();
        let at = |pairs: &[(&str, usize)]| -> Assignment { pairs.iter().map(|&(n, val)| (v(n), val)).collect() };
        let formula: f64 = (0..ev.symbol_size("Z").unwrap())
            .map(|z| {
                ev.evaluate(&pr(&[v("Y")], &[v("X"), v("Z")]), &at(&[("Y", 1), ("X", 0), ("Z", z)])).unwrap()
                    * ev.evaluate(&pr(&[v("Z")], &[v("X")]), &at(&[("Z", z), ("X", 1)])).unwrap()
            })
            .sum();
        ensure((cf - cf_macro).abs() < 1e-12, || format!("seed {seed}: {cf} vs macro {cf_macro}"))?;
        ensure((cf - formula).abs() < 1e-10, || format!("seed {seed}: P(Y_0=1|X=1) = {cf}, formula gives {formula}"))?;
    }
    Ok(format!("50 models x 5 event sets ({nonzero} with positive mass), 10 treated-effect checks"))
}

fn fig_a() -> Outcome {
    let spec = ExpansionSpec::new(
        InternalPolicy::Random { edge_density: 0.3, bidirected_density: 0.1 },
        CrossPolicy::Random { density: 0.25 },
        0,
    )
    .with_size("Z", 10);
    let cfg = SimConfig {
        x: set(&["X"]),
        y: set(&["Y"]),
        diagrams: 20,
        datasets: 20,
        sample_sizes: vec![5000, 10000, 50000],
        spec,
        exact: true,
    };
    let rep = simulate(&gc1(), &cfg).map_err(|e| e.to_string())?;
    let means: Vec<f64> = rep.rows.iter().map(|d| d.mean).collect();
    let exact = rep.exact_max.unwrap_or(f64::NAN);
    let shown = format!("means {means:.4?}, exact {exact:.1e}");
    ensure(means.len() == 3 && means.windows(2).all(|w| w[1] < w[0]), || format!("not decreasing: {shown}"))?;
    ensure(means[2] < 0.02, || format!("too far at N=50000: {shown}"))?;
    ensure(exact < 1e-9, || format!("exact distance: {shown}"))?;
    Ok(shown)
}

fn fig_b() -> Outcome {
    let spec = ExpansionSpec::new(
        InternalPolicy::Random { edge_density: 0.3, bidirected_density: 0.2 },
        CrossPolicy::Random { density: 0.25 },
        0,
    )
    .with_size("Z", 10);
    let c = gc2_zx();
    let batch = sample_batch(&c, &spec, 100).map_err(|e| e.to_string())?;
    let non_id = batch
        .iter()
        .filter(|(g, p)| {
            !identify_admg(g, &p.expand(&set(&["X"])).unwrap(), &p.expand(&set(&["Y"])).unwrap())
                .unwrap()
                .is_identified()
        })
        .count();
    let frac = non_id as f64 / batch.len() as f64;
    ensure((0.70..=0.98).contains(&frac), || format!("non-identifiable fraction {frac}"))?;
    Ok(format!("non-identifiable fraction {frac:.2}"))
}

fn brute_force_msep() -> Outcome {
    let mut r = rng(12);
    let mut separated = 0;
    for case in 0..2000 {
        let n = r.random_range(2..=6);
        let (pd, pb) = (r.random_range(0.0..0.7), r.random_range(0.0..0.5));
        let g = random_admg(&mut r, n, pd, pb);
        let (x, y, z) = random_query(&mut r, &g);
        let fast = g.m_separated(&x, &y, &z).unwrap();
        ensure(fast == brute::m_separated(&g, &x, &y, &z), || format!("case {case}: ({x} ⊥ {y} | {z}) disagrees"))?;
        separated += fast as usize;
    }
    Ok(format!("2000 cases, {separated} separated"))
}

fn main() {
    let checks: [Check; 12] = [
        ("golden formulas", golden_formulas),
        ("non-identifiability verdicts", non_identifiable),
        ("d-separation soundness", dsep_soundness),
        ("d-separation completeness witness", dsep_completeness),
        ("do-calculus soundness", docalc_soundness),
        ("identification soundness", id_soundness),
        ("identification completeness witness", id_completeness),
        ("factorization", factorization),
        ("macro-model counterfactuals", macro_counterfactuals),
        ("effect agreement on sampled data", fig_a),
        ("non-identifiable fraction", fig_b),
        ("m-separation against path enumeration", brute_force_msep),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let t = Instant::now();
        let res = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
