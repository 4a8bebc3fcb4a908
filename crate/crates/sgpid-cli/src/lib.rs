//! The `sgpid` command line: identification queries, policy interventions,
//! network simulation and the two experiments.
//!
//! Exit codes: 0 on success or an identified query, 2 when the query is not
//! identified, 1 on any error.

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use sgpid_estimand::{
    canonicalize, g_formula_cg, g_formula_dag, id_admg, id_sg, policy_id_admg, policy_id_sg, render, Estimand, Expr,
    Format, IdResult, NodeAssignment,
};
use sgpid_experiments::{bias_experiment, policy_experiment, ExperimentConfig, Report};
use sgpid_graph::{GraphClass, MixedGraph, VSet};
use sgpid_intervention::{intervene_graph, Mechanism, PolicySet};
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "sgpid", version, about = "Identification of node and policy interventions in segregated graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Identify the distribution of the outcome under an intervention.
    Identify(IdentifyArgs),
    /// Print the post-intervention graph of a policy set as JSON.
    Intervene {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        policy: PathBuf,
    },
    /// Simulate network replicates of the first configured cell as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for `data.csv`; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the bias or the policy study.
    Experiment {
        #[arg(value_enum)]
        kind: ExperimentKind,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for `summary.csv`, `plot.csv` and `detail.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentKind {
    Bias,
    Policy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Auto,
    GDag,
    GCg,
    IdAdmg,
    IdSg,
    PolicyIdAdmg,
    PolicyIdSg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Latex,
    Json,
}

#[derive(Debug, clap::Args)]
pub struct IdentifyArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Outcome vertices, repeated or comma separated.
    #[arg(long, required = true, value_delimiter = ',')]
    pub y: Vec<String>,
    /// Node intervention `NAME=VALUE`; a bare `NAME` or a non-numeric value
    /// keeps the value symbolic.
    #[arg(long = "do", conflicts_with = "policy")]
    pub do_: Vec<String>,
    /// Policy set JSON file.
    #[arg(long)]
    pub policy: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    pub algorithm: Algorithm,
    #[arg(long, value_enum, default_value = "text")]
    pub format: OutputFormat,
}

/// What a command prints and its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
}

impl Outcome {
    fn ok(stdout: String) -> Outcome {
        Outcome { code: 0, stdout }
    }
}

pub type CliResult<T> = Result<T, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Run a parsed command.
pub fn run(cli: Cli) -> CliResult<Outcome> {
    match cli.command {
        Command::Identify(args) => identify(&args),
        Command::Intervene { graph, policy } => {
            let g = MixedGraph::load(&graph).map_err(err)?;
            let ps = PolicySet::load(&policy).map_err(err)?;
            Ok(Outcome::ok(intervene_graph(&g, &ps).map_err(err)?.to_json() + "\n"))
        }
        Command::Simulate { config, seed, out } => {
            let cfg = load_config(&config, seed)?;
            let data = cfg.cell_data(0, 0).map_err(err)?;
            let mut buf = Vec::new();
            data.write_csv(&mut buf).map_err(err)?;
            let text = String::from_utf8(buf).map_err(err)?;
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir).map_err(err)?;
                    std::fs::write(dir.join("data.csv"), &text).map_err(err)?;
                    Ok(Outcome::ok(format!("wrote {} replicates to {}\n", data.len(), dir.join("data.csv").display())))
                }
                None => Ok(Outcome::ok(text)),
            }
        }
        Command::Experiment { kind, config, seed, out } => {
            let cfg = load_config(&config, seed)?;
            let report: Box<dyn ReportOut> = match kind {
                ExperimentKind::Bias => Box::new(bias_experiment(&cfg).map_err(err)?),
                ExperimentKind::Policy => Box::new(policy_experiment(&cfg).map_err(err)?),
            };
            if let Some(dir) = out {
                report.write(&dir)?;
            }
            report.summary().map(Outcome::ok)
        }
    }
}

trait ReportOut {
    fn write(&self, dir: &Path) -> CliResult<()>;
    fn summary(&self) -> CliResult<String>;
}

impl<R: Report> ReportOut for R {
    fn write(&self, dir: &Path) -> CliResult<()> {
        self.write_to(dir).map_err(err)
    }
    fn summary(&self) -> CliResult<String> {
        self.summary_csv().map_err(err)
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> CliResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path).map_err(err)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Parse `--do` items into a node assignment.
pub fn parse_do(items: &[String]) -> CliResult<NodeAssignment> {
    let mut out = NodeAssignment::new();
    for item in items {
        let (name, value) = match item.split_once('=') {
            Some((n, v)) => (n.trim(), v.trim().parse::<usize>().ok()),
            None => (item.trim(), None),
        };
        if name.is_empty() {
            return Err(format!("malformed --do `{item}`"));
        }
        if out.insert(name.to_string(), value).is_some() {
            return Err(format!("`{name}` is assigned twice"));
        }
    }
    Ok(out)
}

/// The intervention of an identify query.
enum Intervention {
    Node(NodeAssignment),
    Policies(PolicySet),
}

impl Intervention {
    fn node(&self) -> CliResult<NodeAssignment> {
        match self {
            Intervention::Node(a) => Ok(a.clone()),
            Intervention::Policies(ps) => ps
                .iter()
                .map(|p| match p.mechanism {
                    Mechanism::Const { value } => Ok((p.target.clone(), Some(value))),
                    _ => Err(format!("policy on `{}` is not a constant; use a policy algorithm", p.target)),
                })
                .collect(),
        }
    }

    fn policies(&self) -> CliResult<PolicySet> {
        match self {
            Intervention::Policies(ps) => Ok(ps.clone()),
            Intervention::Node(a) => {
                let mut values = Vec::new();
                for (k, v) in a {
                    let v = v.ok_or_else(|| format!("policy algorithms need a value for `{k}`"))?;
                    values.push((k.clone(), v));
                }
                PolicySet::node(values).map_err(err)
            }
        }
    }

    fn is_node(&self) -> bool {
        match self {
            Intervention::Node(_) => true,
            Intervention::Policies(ps) => ps.is_node_intervention(),
        }
    }
}

/// The algorithm `auto` resolves to.
pub fn select_algorithm(g: &MixedGraph, node: bool) -> Algorithm {
    let class = g.classify();
    match (node, class.is(GraphClass::DAG), class.is(GraphClass::CG), class.is(GraphClass::ADMG)) {
        (true, true, _, _) => Algorithm::GDag,
        (true, _, true, _) => Algorithm::GCg,
        (true, _, _, true) => Algorithm::IdAdmg,
        (true, _, _, _) => Algorithm::IdSg,
        (false, _, _, true) => Algorithm::PolicyIdAdmg,
        (false, _, _, _) => Algorithm::PolicyIdSg,
    }
}

/// The estimand of a g-formula: the truncated factorization summed over
/// everything but the outcome.
fn g_formula(g: &MixedGraph, y: &VSet, a: &NodeAssignment, cg: bool) -> CliResult<IdResult> {
    if let Some(v) = y.iter().find(|v| a.contains_key(*v)) {
        return Err(format!("outcome `{v}` is also an intervention target"));
    }
    g.check_names(y).map_err(err)?;
    let order = g.block_depths().map_err(err)?;
    let expr = if a.is_empty() {
        Expr::prob(y.clone(), VSet::new())
    } else {
        let body = if cg { g_formula_cg(g, a) } else { g_formula_dag(g, a) }.map_err(err)?;
        let rest: VSet = g.names().difference(y).filter(|v| !a.contains_key(*v)).cloned().collect();
        canonicalize(&Expr::sum(rest, body))
    };
    let symbolic: VSet = a.iter().filter(|(_, v)| v.is_none()).map(|(k, _)| k.clone()).collect();
    let inert = expr.free_vars().difference(y).filter(|v| !symbolic.contains(*v)).cloned().collect();
    Ok(IdResult::Identified(Estimand { expr, order, outcome: y.clone(), inert, symbolic }))
}

fn kebab(a: Algorithm) -> String {
    a.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
}

fn set_json(s: &VSet) -> serde_json::Value {
    json!(s.iter().collect::<Vec<_>>())
}

pub fn identify(args: &IdentifyArgs) -> CliResult<Outcome> {
    let g = MixedGraph::load(&args.graph).map_err(err)?;
    let y: VSet = args.y.iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    if y.is_empty() {
        return Err("the outcome set is empty".into());
    }
    let intervention = match &args.policy {
        Some(p) => Intervention::Policies(PolicySet::load(p).map_err(err)?),
        None => Intervention::Node(parse_do(&args.do_)?),
    };
    let algorithm = match args.algorithm {
        Algorithm::Auto => select_algorithm(&g, intervention.is_node()),
        a => a,
    };
    let result = match algorithm {
        Algorithm::GDag => g_formula(&g, &y, &intervention.node()?, false)?,
        Algorithm::GCg => g_formula(&g, &y, &intervention.node()?, true)?,
        Algorithm::IdAdmg => id_admg(&g, &y, &intervention.node()?).map_err(err)?,
        Algorithm::IdSg => id_sg(&g, &y, &intervention.node()?).map_err(err)?,
        Algorithm::PolicyIdAdmg => policy_id_admg(&g, &y, &intervention.policies()?).map_err(err)?,
        Algorithm::PolicyIdSg => policy_id_sg(&g, &y, &intervention.policies()?).map_err(err)?,
        Algorithm::Auto => unreachable!("auto is resolved above"),
    };
    Ok(match result {
        IdResult::Identified(e) => Outcome::ok(match args.format {
            OutputFormat::Text => render(&e, Format::Text) + "\n",
            OutputFormat::Latex => render(&e, Format::Latex) + "\n",
            OutputFormat::Json => {
                let v = json!({
                    "status": "identified",
                    "algorithm": kebab(algorithm),
                    "text": render(&e, Format::Text),
                    "latex": render(&e, Format::Latex),
                    "outcome": set_json(&e.outcome),
                    "symbolic": set_json(&e.symbolic),
                    "inert": set_json(&e.inert),
                });
                serde_json::to_string_pretty(&v).map_err(err)? + "\n"
            }
        }),
        IdResult::NotIdentified { district, graph } => Outcome {
            code: 2,
            stdout: match args.format {
                OutputFormat::Json => {
                    let graph: serde_json::Value = serde_json::from_str(&graph.to_json()).map_err(err)?;
                    let v = json!({
                        "status": "not_identified",
                        "algorithm": kebab(algorithm),
                        "district": set_json(&district),
                        "graph": graph,
                    });
                    serde_json::to_string_pretty(&v).map_err(err)? + "\n"
                }
                _ => format!(
                    "not identified\nwitness district: {{{}}}\n",
                    district.iter().cloned().collect::<Vec<_>>().join(", ")
                ),
            },
        },
    })
}
