//! Effect agreement between a cluster DAG and random compatible diagrams.
//!
//! For each sampled diagram the effect of `x` on `y` is computed twice from
//! the same data: with the formula identified on the cluster DAG (cluster
//! symbols) and with the formula identified on the diagram itself. The
//! distance between the two interventional tables is the largest absolute
//! cell difference.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cluster::{ClusterDag, Partition};
use crate::error::{Error, Result};
use crate::formula::{Assignment, Evaluator, JointTable, ProbExpr};
use crate::graph::{Admg, NodeSet};
use crate::identify::{identify, identify_admg};
use crate::oracle::{joint_distribution, random_cbn, sample_table};
use crate::sampler::{sample_batch, ExpansionSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    /// Cluster names.
    pub x: NodeSet,
    pub y: NodeSet,
    pub diagrams: usize,
    pub datasets: usize,
    pub sample_sizes: Vec<usize>,
    pub spec: ExpansionSpec,
    /// Also compare on the exact joint distribution.
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiffRow {
    pub n: usize,
    pub count: usize,
    pub mean: f64,
    pub std_err: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimReport {
    pub cdag_identified: bool,
    pub diagrams: usize,
    /// Diagrams on which the effect is identifiable.
    pub identified: usize,
    pub rows: Vec<DiffRow>,
    /// Largest difference over all diagrams on exact distributions.
    pub exact_max: Option<f64>,
}

impl SimReport {
    pub fn identified_fraction(&self) -> f64 {
        if self.diagrams == 0 {
            0.0
        } else {
            self.identified as f64 / self.diagrams as f64
        }
    }

    /// `metric,n,value,std_err` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::InvalidTable(e.to_string());
        wr.write_record(["metric", "n", "value", "std_err"]).map_err(io)?;
        for r in &self.rows {
            wr.write_record(["abs_diff", &r.n.to_string(), &format!("{:?}", r.mean), &format!("{:?}", r.std_err)])
                .map_err(io)?;
        }
        if let Some(e) = self.exact_max {
            wr.write_record(["abs_diff_exact", "", &format!("{e:?}"), ""]).map_err(io)?;
        }
        let p = self.identified_fraction();
        let se = if self.diagrams == 0 { 0.0 } else { (p * (1.0 - p) / self.diagrams as f64).sqrt() };
        wr.write_record(["identified_fraction", "", &format!("{p:?}"), &format!("{se:?}")]).map_err(io)?;
        wr.flush().map_err(|e| Error::InvalidTable(e.to_string()))?;
        Ok(())
    }
}

/// Interventional table of `e` over every joint value of `vars`, in
/// odometer order over the variables' table columns.
fn effect_table(ev: &Evaluator<'_>, e: &ProbExpr, vars: &[usize]) -> Result<Vec<f64>> {
    let prog = ev.compile(e)?;
    let free = prog.free_vars();
    let t = ev.table();
    let mut row = vec![0usize; t.variables().len()];
    let total: usize = vars.iter().map(|&c| t.cards()[c]).product();
    let mut out = Vec::with_capacity(total);
    for _ in 0..total {
        let a: Assignment =
            free.iter().map(|v| Ok((v.clone(), ev.symbol_value_of(&v.name, &row)?))).collect::<Result<_>>()?;
        out.push(prog.eval(ev, &a)?);
        for &c in vars.iter().rev() {
            row[c] += 1;
            if row[c] < t.cards()[c] {
                break;
            }
            row[c] = 0;
        }
    }
    Ok(out)
}

fn distance(
    t: &JointTable,
    p: &Partition,
    cluster_expr: &ProbExpr,
    diagram_expr: &ProbExpr,
    vars: &NodeSet,
) -> Result<f64> {
    let cols: Vec<usize> = vars.iter().map(|v| t.column(v)).collect::<Result<_>>()?;
    let a = effect_table(&Evaluator::with_partition(t, p)?, cluster_expr, &cols)?;
    let b = effect_table(&Evaluator::new(t), diagram_expr, &cols)?;
    Ok(a.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max))
}

struct PerDiagram {
    identified: bool,
    /// Per sample size, one distance per dataset.
    diffs: Vec<Vec<f64>>,
    exact: Option<f64>,
}

fn run_diagram(
    k: usize,
    g: &Admg,
    p: &Partition,
    cfg: &SimConfig,
    cluster_expr: Option<&ProbExpr>,
) -> Result<PerDiagram> {
    let x = p.expand(&cfg.x)?;
    let y = p.expand(&cfg.y)?;
    let res = identify_admg(g, &x, &y)?;
    let (Some(ce), Some(de)) = (cluster_expr, res.expr()) else {
        return Ok(PerDiagram { identified: res.is_identified(), diffs: Vec::new(), exact: None });
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.spec.seed);
    rng.set_stream(k as u64 + 1);
    let m = random_cbn(g, &BTreeMap::new(), rng.next_u64())?;
    let xy = x.union(&y);
    let exact = if cfg.exact { Some(distance(&joint_distribution(&m)?, p, ce, de, &xy)?) } else { None };
    let mut diffs = Vec::with_capacity(cfg.sample_sizes.len());
    for &n in &cfg.sample_sizes {
        let mut row = Vec::with_capacity(cfg.datasets);
        for _ in 0..cfg.datasets {
            let t = sample_table(&m, n, rng.next_u64(), 1.0)?;
            row.push(distance(&t, p, ce, de, &xy)?);
        }
        diffs.push(row);
    }
    Ok(PerDiagram { identified: true, diffs, exact })
}

/// Samples `cfg.diagrams` compatible diagrams of `c` and compares effects.
/// Diagram `k` and its data depend only on `(cfg.spec.seed, k)`.
pub fn simulate(c: &ClusterDag, cfg: &SimConfig) -> Result<SimReport> {
    if cfg.x.is_empty() || cfg.y.is_empty() {
        return Err(Error::InvalidQuery("simulate needs nonempty x and y".into()));
    }
    let cres = identify(c, &cfg.x, &cfg.y)?;
    let batch = sample_batch(c, &cfg.spec, cfg.diagrams)?;
    let per: Vec<PerDiagram> = batch
        .par_iter()
        .enumerate()
        .map(|(k, (g, p))| run_diagram(k, g, p, cfg, cres.expr()))
        .collect::<Result<_>>()?;
    let identified = per.iter().filter(|d| d.identified).count();
    if cres.is_identified() && identified != per.len() {
        return Err(Error::InvalidQuery("identified on the cluster DAG but not on a compatible diagram".into()));
    }
    let mut rows = Vec::new();
    if cres.is_identified() {
        for (i, &n) in cfg.sample_sizes.iter().enumerate() {
            let all: Vec<f64> = per.iter().flat_map(|d| d.diffs[i].iter().copied()).collect();
            let count = all.len();
            let mean = all.iter().sum::<f64>() / count.max(1) as f64;
            let var =
                if count > 1 { all.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (count - 1) as f64 } else { 0.0 };
            rows.push(DiffRow { n, count, mean, std_err: (var / count.max(1) as f64).sqrt() });
        }
    }
    let exact_max = (cfg.exact && cres.is_identified()).then(|| per.iter().filter_map(|d| d.exact).fold(0.0, f64::max));
    Ok(SimReport { cdag_identified: cres.is_identified(), diagrams: per.len(), identified, rows, exact_max })
}
