//! The `cdag` command line.
//!
//! Exit codes: 0 success, 1 negative verdict (not separated, rule does not
//! apply, not identifiable, not compatible), 2 usage error, 3 input error.

mod graph_file;
mod simulate;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use graph_file::{parse_graph, quote, render_graph, GraphFile};
pub use simulate::{simulate, DiffRow, SimConfig, SimReport};

use crate::cluster::is_compatible;
use crate::docalc::{apply_rule, DoQuery, Rule};
use crate::error::{Error, Result};
use crate::formula::{from_json, to_json, Assignment, Evaluator, Format, JointTable, Var};
use crate::graph::NodeSet;
use crate::identify::{identify, IdResult};
use crate::sampler::{expand, CrossPolicy, ExpansionSpec, InternalPolicy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "cdag", version, about = "Causal effect identification over cluster DAGs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Sets {
    /// Comma separated or repeated.
    #[arg(short = 'x', value_delimiter = ',', num_args = 1..)]
    x: Vec<String>,
    #[arg(short = 'y', value_delimiter = ',', num_args = 1..)]
    y: Vec<String>,
    #[arg(short = 'z', value_delimiter = ',', num_args = 1..)]
    z: Vec<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Internal {
    Random,
    Chain,
    Full,
    Empty,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cross {
    Minimal,
    Random,
    Full,
}

#[derive(Args, Debug)]
struct ExpandArgs {
    /// Cluster sizes, e.g. `Z=10,W=3`; unlisted clusters get one member.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<String>,
    /// Edges inside clusters.
    #[arg(long, value_enum, default_value = "random")]
    policy: Internal,
    /// Edges between members of adjacent clusters.
    #[arg(long, value_enum, default_value = "random")]
    cross: Cross,
    #[arg(long, default_value_t = 0.3)]
    edge_density: f64,
    #[arg(long, default_value_t = 0.2)]
    bidirected_density: f64,
    #[arg(long, default_value_t = 0.25)]
    cross_density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ExpandArgs {
    fn spec(&self) -> Result<ExpansionSpec> {
        let internal = match self.policy {
            Internal::Random => {
                InternalPolicy::Random { edge_density: self.edge_density, bidirected_density: self.bidirected_density }
            }
            Internal::Chain => InternalPolicy::Chain,
            Internal::Full => InternalPolicy::Full,
            Internal::Empty => InternalPolicy::Empty,
        };
        let cross = match self.cross {
            Cross::Minimal => CrossPolicy::MinimalWitness,
            Cross::Random => CrossPolicy::Random { density: self.cross_density },
            Cross::Full => CrossPolicy::Full,
        };
        let mut spec = ExpansionSpec::new(internal, cross, self.seed);
        for s in &self.sizes {
            let (k, v) =
                s.split_once('=').ok_or_else(|| Error::InvalidSpec(format!("size `{s}` is not NAME=COUNT")))?;
            let v: usize = v.trim().parse().map_err(|_| Error::InvalidSpec(format!("size `{s}` is not NAME=COUNT")))?;
            spec = spec.with_size(k.trim(), v);
        }
        Ok(spec)
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Parse a file and report admissibility; with --cdag, test compatibility.
    Check {
        file: PathBuf,
        /// Cluster DAG the diagram in FILE should be compatible with.
        #[arg(long)]
        cdag: Option<PathBuf>,
    },
    /// Is x separated from y given z in the cluster graph?
    Dsep {
        file: PathBuf,
        #[command(flatten)]
        sets: Sets,
    },
    /// Test one do-calculus rule for P(y|do(x),z,w).
    Docalc {
        file: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        rule: u8,
        #[command(flatten)]
        sets: Sets,
        #[arg(short = 'w', value_delimiter = ',', num_args = 1..)]
        w: Vec<String>,
    },
    /// Identify P(y|do(x)) or report a hedge.
    Identify {
        file: PathBuf,
        #[command(flatten)]
        sets: Sets,
        #[arg(long, default_value = "text", value_parser = ["text", "latex", "json"])]
        format: String,
    },
    /// Print a random diagram compatible with the cluster graph.
    Expand {
        file: PathBuf,
        #[command(flatten)]
        expand: ExpandArgs,
    },
    /// Evaluate a JSON formula on a joint table.
    Eval {
        formula: PathBuf,
        table: PathBuf,
        /// Values such as `x=1,y=0`; without it every assignment is listed.
        #[arg(long, value_delimiter = ',')]
        at: Vec<String>,
        /// Graph file whose clusters become formula symbols.
        #[arg(long)]
        clusters: Option<PathBuf>,
    },
    /// Compare cluster-level and diagram-level effect estimates on sampled data.
    Simulate {
        file: PathBuf,
        #[command(flatten)]
        sets: Sets,
        #[arg(long, default_value_t = 100)]
        diagrams: usize,
        #[arg(long, default_value_t = 100)]
        datasets: usize,
        /// Sample sizes.
        #[arg(long = "n", value_delimiter = ',')]
        n: Vec<usize>,
        /// Also report the difference on exact distributions.
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        expand: ExpandArgs,
    },
}

enum Failure {
    Usage(String),
    Input(Error),
    /// Error in a graph file, reported as `path:line:col: message`.
    File(PathBuf, Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

type Outcome = std::result::Result<i32, Failure>;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidQuery(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> std::result::Result<GraphFile, Failure> {
    let text = read(path)?;
    parse_graph(&text).map_err(|e| Failure::File(path.to_path_buf(), e))
}

fn set(v: &[String]) -> NodeSet {
    v.iter().map(|s| s.trim().to_string()).collect()
}

fn out_err(e: std::io::Error) -> Failure {
    Failure::Input(Error::InvalidQuery(e.to_string()))
}

fn check(file: &Path, cdag: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let f = match load(file) {
        Err(Failure::File(_, Error::Inadmissible(cycle))) => {
            writeln!(out, "admissible: no (cluster cycle {})", cycle.join(" -> ")).map_err(out_err)?;
            return Ok(EXIT_NEGATIVE);
        }
        r => r?,
    };
    let c = f.cdag()?;
    let g = c.graph();
    match &f {
        GraphFile::Diagram { admg, partition } => {
            writeln!(out, "diagram: {} variables in {} clusters", admg.n(), partition.blocks().len())
                .map_err(out_err)?
        }
        GraphFile::Cdag { .. } => writeln!(out, "cluster dag: {} clusters", g.n()).map_err(out_err)?,
    }
    writeln!(out, "cluster edges: {} directed, {} bidirected", g.directed_edges().len(), g.bidirected_edges().len())
        .map_err(out_err)?;
    writeln!(out, "admissible: yes").map_err(out_err)?;
    let Some(other) = cdag else { return Ok(EXIT_OK) };
    let Some((admg, partition)) = f.diagram() else {
        return Err(Failure::Usage("--cdag needs a diagram with clusters in FILE".into()));
    };
    let target = load(other)?.cdag()?;
    let ok = is_compatible(admg, &target, partition)?;
    writeln!(out, "compatible: {}", if ok { "yes" } else { "no" }).map_err(out_err)?;
    Ok(if ok { EXIT_OK } else { EXIT_NEGATIVE })
}

fn eval(formula: &Path, table: &Path, at: &[String], clusters: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let e = from_json(&read(formula)?)?;
    let file = std::fs::File::open(table).map_err(|e| Error::InvalidTable(format!("{}: {e}", table.display())))?;
    let t = JointTable::read_csv(file)?;
    let ev = match clusters {
        None => Evaluator::new(&t),
        Some(p) => match load(p)? {
            GraphFile::Diagram { partition, .. } | GraphFile::Cdag { labels: Some(partition), .. } => {
                Evaluator::with_partition(&t, &partition)?
            }
            GraphFile::Cdag { labels: None, .. } => Evaluator::new(&t),
        },
    };
    let prog = ev.compile(&e)?;
    let mut free = prog.free_vars();
    free.sort();
    if !at.is_empty() {
        let mut a = Assignment::new();
        for s in at {
            let (k, v) = s.split_once('=').ok_or_else(|| Failure::Usage(format!("`{s}` is not NAME=VALUE")))?;
            let v: usize = v.trim().parse().map_err(|_| Failure::Usage(format!("`{s}` is not NAME=VALUE")))?;
            a.insert(Var::parse(k.trim()), v);
        }
        for v in &free {
            if !a.contains_key(v) {
                return Err(Failure::Usage(format!("--at is missing a value for `{v}`")));
            }
        }
        writeln!(out, "{:?}", prog.eval(&ev, &a)?).map_err(out_err)?;
        return Ok(EXIT_OK);
    }
    let mut wr = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Failure::Input(Error::InvalidTable(e.to_string()));
    let mut header: Vec<String> = free.iter().map(Var::to_string).collect();
    header.push("value".into());
    wr.write_record(&header).map_err(csv_err)?;
    for a in ev.assignments(&free)? {
        let mut row: Vec<String> = free.iter().map(|v| a[v].to_string()).collect();
        row.push(format!("{:?}", prog.eval(&ev, &a)?));
        wr.write_record(&row).map_err(csv_err)?;
    }
    wr.flush().map_err(out_err)?;
    Ok(EXIT_OK)
}

fn dispatch(cmd: Cmd, out: &mut dyn Write) -> Outcome {
    match cmd {
        Cmd::Check { file, cdag } => check(&file, cdag.as_deref(), out),
        Cmd::Dsep { file, sets } => {
            let c = load(&file)?.cdag()?;
            let sep = c.d_separated(&set(&sets.x), &set(&sets.y), &set(&sets.z))?;
            writeln!(out, "{}", if sep { "separated" } else { "not separated" }).map_err(out_err)?;
            Ok(if sep { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Cmd::Docalc { file, rule, sets, w } => {
            let c = load(&file)?.cdag()?;
            let rule = match rule {
                1 => Rule::R1,
                2 => Rule::R2,
                _ => Rule::R3,
            };
            let q = DoQuery::new(set(&sets.x), set(&sets.y), set(&sets.z), set(&w));
            let v = apply_rule(rule, &c, &q)?;
            writeln!(out, "{v}").map_err(out_err)?;
            Ok(if v.applies { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Cmd::Identify { file, sets, format } => {
            if !sets.z.is_empty() {
                return Err(Failure::Usage("identify takes no -z".into()));
            }
            let format: Format = format.parse()?;
            let c = load(&file)?.cdag()?;
            match identify(&c, &set(&sets.x), &set(&sets.y))? {
                IdResult::Identified(e) => {
                    let s = match format {
                        Format::Json => serde_json::to_string_pretty(&to_json(&e)).expect("json value"),
                        f => e.render(f),
                    };
                    writeln!(out, "{s}").map_err(out_err)?;
                    Ok(EXIT_OK)
                }
                IdResult::NonIdentified(h) => {
                    writeln!(out, "not identifiable; hedge:\n{h}").map_err(out_err)?;
                    Ok(EXIT_NEGATIVE)
                }
            }
        }
        Cmd::Expand { file, expand: args } => {
            let c = load(&file)?.cdag()?;
            let (admg, partition) = expand(&c, &args.spec()?)?;
            write!(out, "{}", render_graph(&GraphFile::Diagram { admg, partition })).map_err(out_err)?;
            Ok(EXIT_OK)
        }
        Cmd::Eval { formula, table, at, clusters } => eval(&formula, &table, &at, clusters.as_deref(), out),
        Cmd::Simulate { file, sets, diagrams, datasets, n, exact, expand: args } => {
            if !sets.z.is_empty() {
                return Err(Failure::Usage("simulate takes no -z".into()));
            }
            let c = load(&file)?.cdag()?;
            let cfg = SimConfig {
                x: set(&sets.x),
                y: set(&sets.y),
                diagrams,
                datasets,
                sample_sizes: n,
                spec: args.spec()?,
                exact,
            };
            simulate(&c, &cfg)?.write_csv(out)?;
            Ok(EXIT_OK)
        }
    }
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match dispatch(cli.cmd, out) {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "usage error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Input(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
        Err(Failure::File(p, e)) => {
            let sep = if matches!(e, Error::Syntax { .. }) { ":" } else { ": " };
            let _ = writeln!(err, "error: {}{sep}{e}", p.display());
            EXIT_INPUT
        }
    }
}
