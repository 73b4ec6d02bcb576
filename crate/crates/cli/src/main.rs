mod config;
mod error;
mod report;
mod spec;
mod table;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use seqnet::format::{parse_dot, parse_matrix_text, parse_path_text, to_dot, to_path_text};
use seqnet::games::solve_equilibrium;
use seqnet::planner::{
    delegated_path, delegation_recipe, greedy_path, myopic_adaptive, optimal_path_dp,
    AgentSequence, DiscountSchedule, DpOptions, FormationPath, UtilitySpec,
};
use seqnet::reallocation::repair_path_report;
use seqnet::structures::{enumerate_nsg, quasi_complete};
use seqnet::weighted::best_weighted_step_kb2;
use seqnet::Graph;

use error::CliError;
use report::{structural_class, OutFormat, Report};
use spec::{parse_discount, parse_list, parse_psi, UtilityParams};

#[derive(Parser)]
#[command(name = "seqnet", version, about = "Sequential network design experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct UtilityArgs {
    /// kb, kb2, diffusion, spectral, walks or welfare
    #[arg(long, default_value = "kb2")]
    utility: String,
    #[arg(long, default_value_t = 0.01)]
    phi: f64,
    /// Walk length for diffusion centrality.
    #[arg(long, default_value_t = 5)]
    length: usize,
    /// Walk coefficients from k = 0, comma separated.
    #[arg(long)]
    coeffs: Option<String>,
    /// Node weights, comma separated.
    #[arg(long)]
    theta: Option<String>,
    /// Best response for `welfare`: linear:a,b | quad:a,b,c | power:a,b,p | softplus:base,shift
    #[arg(long, default_value = "linear:1,0.01")]
    psi: String,
    /// identity, square or exp-minus-one
    #[arg(long, default_value = "identity")]
    transform: String,
}

impl UtilityArgs {
    fn params(&self) -> Result<UtilityParams, CliError> {
        Ok(UtilityParams {
            kind: self.utility.clone(),
            phi: self.phi,
            length: self.length,
            coeffs: match &self.coeffs {
                Some(c) => parse_list(c, "coeffs")?,
                None => UtilityParams::default().coeffs,
            },
            theta: self.theta.as_deref().map(|t| parse_list(t, "theta")).transpose()?,
            psi: self.psi.clone(),
            transform: self.transform.clone(),
        })
    }
}

#[derive(Args, Clone)]
struct SizeArgs {
    #[arg(long)]
    nodes: usize,
    /// Defaults to the number of node pairs.
    #[arg(long)]
    horizon: Option<usize>,
}

impl SizeArgs {
    fn horizon(&self) -> usize {
        self.horizon.unwrap_or(self.nodes * self.nodes.saturating_sub(1) / 2)
    }
}

#[derive(Args, Clone)]
struct OutArgs {
    #[arg(long, value_enum, default_value = "json")]
    out: OutFormat,
    /// Write per-period DOT files, utilities.csv and summary.json here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Add the best single link each period.
    Greedy {
        #[command(flatten)]
        size: SizeArgs,
        #[command(flatten)]
        utility: UtilityArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Exact optimum over isomorphism classes.
    Optimal {
        #[command(flatten)]
        size: SizeArgs,
        #[command(flatten)]
        utility: UtilityArgs,
        /// farsighted | geometric:δ | myopic:ε | file:PATH
        #[arg(long, default_value = "farsighted")]
        discount: String,
        #[arg(long)]
        restrict_nsg: bool,
        /// With a myopic schedule, halve ε until the optimal classes settle.
        #[arg(long)]
        adaptive: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Let nominated agents add their own best link.
    Delegate {
        #[command(flatten)]
        size: SizeArgs,
        #[command(flatten)]
        utility: UtilityArgs,
        /// 1-based agents, comma separated; derived from the greedy planner path when absent.
        #[arg(long)]
        agents: Option<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Score an existing path file.
    Evaluate {
        /// Matrix blocks separated by blank lines.
        #[arg(long)]
        path: PathBuf,
        #[command(flatten)]
        utility: UtilityArgs,
        #[arg(long, default_value = "farsighted")]
        discount: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Equilibrium actions of the network game on one graph.
    Equilibrium {
        /// Matrix text, or DOT when the name ends in `.dot`.
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "linear:1,0.1")]
        psi: String,
        #[arg(long, default_value_t = seqnet::games::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = seqnet::games::DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// Convergence metadata as JSON.
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// Best one-unit weight increment for the sum of squared centralities.
    WeightedStep {
        #[arg(long, conflicts_with_all = ["nodes", "links"])]
        graph: Option<PathBuf>,
        /// Quasi-complete base size.
        #[arg(long, requires = "links")]
        nodes: Option<usize>,
        #[arg(long, requires = "nodes")]
        links: Option<usize>,
        #[arg(long, default_value_t = 0.01)]
        phi: f64,
        #[arg(long, default_value_t = 8)]
        resolution: u32,
    },
    /// Nested split graph classes with a given link count.
    EnumerateNsg {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        links: usize,
        #[arg(long, value_enum, default_value = "csv")]
        out: OutFormat,
    },
    /// Rebuild a path so every period is a nested split graph.
    Repair {
        #[arg(long)]
        path: PathBuf,
        #[command(flatten)]
        utility: UtilityArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Recompute published reference values.
    Reproduce {
        #[command(subcommand)]
        target: ReproduceTarget,
    },
    /// Run a TOML experiment file.
    Run { config: PathBuf },
}

#[derive(Subcommand)]
enum ReproduceTarget {
    /// Sum of squared centralities of the four 8-link NSG classes on 7 nodes.
    Table2 {
        /// Compare raw values to this absolute tolerance instead of rounding.
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))
}

fn read_graph(path: &Path) -> Result<Graph, CliError> {
    let text = read(path)?;
    let g = if path.extension().is_some_and(|e| e == "dot") {
        parse_dot(&text)
    } else {
        parse_matrix_text(&text)
    };
    g.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn read_path(path: &Path) -> Result<FormationPath, CliError> {
    let graphs = parse_path_text(&read(path)?)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if graphs.iter().all(Graph::is_unweighted) {
        Ok(FormationPath::unweighted(graphs)?)
    } else {
        Ok(FormationPath::weighted(graphs)?)
    }
}

fn emit(report: &Report, out: &OutArgs) -> Result<(), CliError> {
    if let Some(dir) = &out.out_dir {
        report.write_dir(dir)?;
    }
    print!("{}", report.render(out.out));
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path.display().to_string(), e))
}

struct Solved {
    path: FormationPath,
    value: Option<f64>,
    discount_label: Option<String>,
    discount: Option<DiscountSchedule>,
}

fn solve_optimal(
    n: usize,
    horizon: usize,
    u: &UtilitySpec,
    discount: &str,
    explicit: Option<Vec<f64>>,
    restrict_nsg: bool,
    adaptive: bool,
) -> Result<Solved, CliError> {
    let opts = DpOptions::nsg(restrict_nsg);
    if adaptive {
        let eps = discount
            .strip_prefix("myopic:")
            .ok_or_else(|| CliError::Config("adaptive search needs a myopic:ε schedule".into()))?
            .parse::<f64>()
            .map_err(|_| CliError::Config(format!("bad schedule `{discount}`")))?;
        let (eps, sol) = myopic_adaptive(n, horizon, u, eps, opts)?;
        return Ok(Solved {
            path: sol.path,
            value: Some(sol.value),
            discount_label: Some(format!("myopic:{eps}")),
            discount: Some(DiscountSchedule::myopic(eps, horizon)?),
        });
    }
    let d = match explicit {
        Some(v) => DiscountSchedule::new(v).map_err(|e| CliError::Config(e.to_string()))?,
        None => parse_discount(discount, horizon)?,
    };
    let sol = optimal_path_dp(n, horizon, &d, u, opts)?;
    Ok(Solved {
        path: sol.path,
        value: Some(sol.value),
        discount_label: Some(discount.to_string()),
        discount: Some(d),
    })
}

fn solve_delegate(
    n: usize,
    horizon: usize,
    u: &UtilitySpec,
    phi: f64,
    agents: Option<Vec<usize>>,
) -> Result<(FormationPath, Vec<usize>), CliError> {
    let q = match agents {
        Some(a) => {
            if a.iter().any(|&v| v == 0) {
                return Err(CliError::Config("agents are 1-based".into()));
            }
            AgentSequence::new(a.iter().map(|v| v - 1).collect(), n)
                .map_err(|e| CliError::Config(e.to_string()))?
        }
        None => delegation_recipe(&greedy_path(n, horizon, u)?, phi)?,
    };
    let path = delegated_path(n, horizon, &q, phi)?;
    Ok((path, q.as_slice().iter().map(|v| v + 1).collect()))
}

fn build_report(
    mode: &str,
    solved: Solved,
    u: &UtilitySpec,
    label: &str,
) -> Result<Report, CliError> {
    let d = solved.discount.as_ref().map(|d| d.as_slice());
    let discount = solved.discount_label.as_deref().zip(d);
    Report::new(mode, solved.path, u, label, discount, solved.value)
}

fn plain(path: FormationPath) -> Solved {
    Solved {
        path,
        value: None,
        discount_label: None,
        discount: None,
    }
}

#[derive(Serialize)]
struct EquilibriumMeta {
    converged: bool,
    residual: f64,
    iterations: usize,
}

#[derive(Serialize)]
struct StepSummary {
    value: f64,
    alpha: Option<f64>,
    final_class: String,
}

fn weighted_step(base: &Graph, phi: f64, resolution: u32) -> Result<(String, StepSummary), CliError> {
    let step = best_weighted_step_kb2(base, phi, resolution)?;
    let csv = step.edit_csv(base);
    let summary = StepSummary {
        value: step.value,
        alpha: step.alpha,
        final_class: structural_class(&step.graph),
    };
    Ok((csv, summary))
}

fn run_config(path: &Path) -> Result<(), CliError> {
    let cfg = config::load(path)?;
    let n = cfg.nodes;
    let horizon = cfg.horizon.unwrap_or(n * n.saturating_sub(1) / 2);
    let params = cfg.utility.params();
    let label = params.kind.clone();
    let u = params.build(n)?;
    let (discount, explicit) = cfg.discount.spec()?;
    let report = match cfg.mode.as_str() {
        "greedy" => build_report("greedy", plain(greedy_path(n, horizon, &u)?), &u, &label)?,
        "optimal" => {
            let solved = solve_optimal(
                n,
                horizon,
                &u,
                &discount,
                explicit,
                cfg.restrict_nsg,
                cfg.discount.adaptive,
            )?;
            build_report("optimal", solved, &u, &label)?
        }
        "delegate" => {
            let phi = cfg.delegate.phi.unwrap_or(params.phi);
            let (p, agents) = solve_delegate(n, horizon, &u, phi, cfg.delegate.agents.clone())?;
            let mut r = build_report("delegate", plain(p), &u, &label)?;
            r.summary.agents = Some(agents);
            r
        }
        "weighted-step" => {
            let links = cfg
                .weighted
                .links
                .ok_or_else(|| CliError::Config("weighted-step needs `weighted.links`".into()))?;
            let base = quasi_complete(n, links)?;
            let (csv, summary) = weighted_step(&base, params.phi, cfg.weighted.resolution)?;
            let json = serde_json::to_string_pretty(&summary).expect("serializes") + "\n";
            match &cfg.output {
                Some(dir) => {
                    fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display().to_string(), e))?;
                    write_file(&dir.join("edit.csv"), &csv)?;
                    write_file(&dir.join("step.json"), &json)?;
                }
                None => print!("{csv}"),
            }
            return Ok(());
        }
        other => return Err(CliError::Config(format!("unknown mode `{other}`"))),
    };
    let mut report = report;
    report.summary.seed = Some(cfg.seed);
    match &cfg.output {
        Some(dir) => report.write_dir(dir)?,
        None => print!("{}", report.json()),
    }
    Ok(())
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Greedy { size, utility, out } => {
            let p = utility.params()?;
            let u = p.build(size.nodes)?;
            let path = greedy_path(size.nodes, size.horizon(), &u)?;
            emit(&build_report("greedy", plain(path), &u, &p.kind)?, &out)
        }
        Command::Optimal {
            size,
            utility,
            discount,
            restrict_nsg,
            adaptive,
            out,
        } => {
            let p = utility.params()?;
            let u = p.build(size.nodes)?;
            let solved = solve_optimal(size.nodes, size.horizon(), &u, &discount, None, restrict_nsg, adaptive)?;
            emit(&build_report("optimal", solved, &u, &p.kind)?, &out)
        }
        Command::Delegate {
            size,
            utility,
            agents,
            out,
        } => {
            let p = utility.params()?;
            let u = p.build(size.nodes)?;
            let agents = agents
                .map(|a| {
                    parse_list(&a, "agents")?
                        .into_iter()
                        .map(|v| {
                            if v >= 1.0 && v.fract() == 0.0 {
                                Ok(v as usize)
                            } else {
                                Err(CliError::Config(format!("agent `{v}` is not a 1-based index")))
                            }
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .transpose()?;
            let (path, agents) = solve_delegate(size.nodes, size.horizon(), &u, p.phi, agents)?;
            let mut r = build_report("delegate", plain(path), &u, &p.kind)?;
            r.summary.agents = Some(agents);
            emit(&r, &out)
        }
        Command::Evaluate {
            path,
            utility,
            discount,
            out,
        } => {
            let s = read_path(&path)?;
            let p = utility.params()?;
            let u = p.build(s.n())?;
            let d = parse_discount(&discount, s.len())?;
            let value = seqnet::planner::evaluate_path(&s, &d, &u)?;
            let solved = Solved {
                path: s,
                value: Some(value),
                discount_label: Some(discount),
                discount: Some(d),
            };
            emit(&build_report("evaluate", solved, &u, &p.kind)?, &out)
        }
        Command::Equilibrium {
            graph,
            psi,
            tol,
            max_iter,
            meta,
        } => {
            let g = read_graph(&graph)?;
            let psi = parse_psi(&psi)?;
            let trace = solve_equilibrium(&g, &psi, tol, max_iter)?;
            let mut csv = String::from("node,action\n");
            for (i, a) in trace.action.iter().enumerate() {
                let _ = writeln!(csv, "{},{}", i + 1, a);
            }
            print!("{csv}");
            if let Some(m) = meta {
                let info = EquilibriumMeta {
                    converged: trace.converged,
                    residual: trace.residual,
                    iterations: trace.iterations,
                };
                write_file(&m, &(serde_json::to_string_pretty(&info).expect("serializes") + "\n"))?;
            }
            Ok(())
        }
        Command::WeightedStep {
            graph,
            nodes,
            links,
            phi,
            resolution,
        } => {
            let base = match (graph, nodes, links) {
                (Some(p), _, _) => read_graph(&p)?,
                (None, Some(n), Some(t)) => quasi_complete(n, t)?,
                _ => return Err(CliError::Config("give --graph or --nodes with --links".into())),
            };
            let (csv, _) = weighted_step(&base, phi, resolution)?;
            print!("{csv}");
            Ok(())
        }
        Command::EnumerateNsg { nodes, links, out } => {
            let classes = enumerate_nsg(nodes, links)?;
            let text = match out {
                OutFormat::Dot => classes
                    .iter()
                    .enumerate()
                    .map(|(k, g)| to_dot(g, &format!("nsg_{}", k + 1)))
                    .collect::<Vec<_>>()
                    .join("\n"),
                OutFormat::Csv => {
                    let mut s = String::from("class,degrees,kind\n");
                    for (k, g) in classes.iter().enumerate() {
                        let _ = writeln!(s, "{},{},{}", k + 1, degree_text(g), structural_class(g));
                    }
                    s
                }
                OutFormat::Json => {
                    #[derive(Serialize)]
                    struct Class {
                        class: usize,
                        degrees: Vec<usize>,
                        kind: String,
                    }
                    let rows: Vec<Class> = classes
                        .iter()
                        .enumerate()
                        .map(|(k, g)| Class {
                            class: k + 1,
                            degrees: sorted_degrees(g),
                            kind: structural_class(g),
                        })
                        .collect();
                    serde_json::to_string_pretty(&rows).expect("serializes") + "\n"
                }
            };
            print!("{text}");
            Ok(())
        }
        Command::Repair { path, utility, out } => {
            let s = read_path(&path)?;
            let p = utility.params()?;
            let u = p.build(s.n())?;
            let rep = repair_path_report(&s, 10)?;
            let passes = rep.passes.len();
            let mut r = build_report("repair", plain(rep.path), &u, &p.kind)?;
            r.summary.repair_passes = Some(passes);
            if let Some(dir) = &out.out_dir {
                r.write_dir(dir)?;
                write_file(&dir.join("path.txt"), &to_path_text(r.path.graphs()))?;
            }
            print!("{}", r.render(out.out));
            Ok(())
        }
        Command::Reproduce {
            target: ReproduceTarget::Table2 { tolerance },
        } => {
            let o = table::reproduce(tolerance)?;
            print!("{}", o.csv);
            if o.pass {
                Ok(())
            } else {
                Err(CliError::Reproduction(
                    "computed values differ from the reference values".into(),
                ))
            }
        }
        Command::Run { config } => run_config(&config),
    }
}

fn sorted_degrees(g: &Graph) -> Vec<usize> {
    let mut d: Vec<usize> = g.degrees().iter().map(|&x| x as usize).collect();
    d.sort_unstable_by(|a, b| b.cmp(a));
    d
}

fn degree_text(g: &Graph) -> String {
    sorted_degrees(g)
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SEQNET_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Config(format!("SEQNET_THREADS=`{v}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|_| run(cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("seqnet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
