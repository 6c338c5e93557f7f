use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use flowtime::equilibrium::{
    check_equilibrium, run, EngineOptions, EquilibriumError, EquilibriumTrace, InflowProfile, DEFAULT_MAX_PHASES,
};
use flowtime::io::{
    load_inflow, load_instance, parametric_to_csv, parametric_to_json, thin_flow_to_csv, thin_flow_to_json, trace_from_json,
    trace_to_csv, trace_to_json, Instance, IoError,
};
use flowtime::network::{derive_sp_graph, static_shortest_labels};
use flowtime::rational::{format_rational, parse_rational};
use flowtime::sp::{decompose_network, SpError};
use flowtime::thinflow::{
    brute_force_thin_flows, parametric_thin_flow, solve_thin_flow, FlowCompletion, Route, ThinFlowOptions,
};
use flowtime::{Network, ShortestPathGraph, Q};

#[derive(Parser)]
#[command(name = "flowtime", version, about = "Exact dynamic equilibria in the fluid queueing model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Auto,
    Lcp,
    Sp,
}

#[derive(Clone, Copy, ValueEnum)]
enum CompletionArg {
    ArcOrder,
    ReverseArcOrder,
}

#[derive(Subcommand)]
enum Command {
    /// Check capacities, transit times, zero-transit cycles and reachability.
    Validate { instance: PathBuf },
    /// Decomposition tree of the active arcs (all arcs if the instance has no thin-flow graph).
    SpDecompose { instance: PathBuf },
    /// Thin flow on the instance's thin-flow graph, or on the static shortest-path graph.
    Thinflow {
        instance: PathBuf,
        /// Flow value; required unless --parametric is given.
        #[arg(long, value_parser = rational)]
        value: Option<Q>,
        #[arg(long, value_parser = rational, default_value = "1")]
        source_label: Q,
        /// List every solution found by support enumeration.
        #[arg(long, conflicts_with = "parametric")]
        all: bool,
        /// Labels and flows as functions of the flow value (series-parallel graphs only).
        #[arg(long)]
        parametric: bool,
        /// Right end of the sampled range for --parametric --format csv.
        #[arg(long, value_parser = rational)]
        upto: Option<Q>,
        #[arg(long, value_enum, default_value = "auto")]
        route: RouteArg,
        #[arg(long, value_enum, default_value = "arc-order")]
        completion: CompletionArg,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long, default_value_t = 0)]
        midpoints: usize,
    },
    /// Run the exact equilibrium engine up to the horizon.
    Equilibrium {
        #[arg(long)]
        network: PathBuf,
        /// File with `{"rate": <step function>, "horizon": [n, d]}`; defaults to the network file's inflow.
        #[arg(long)]
        inflow: Option<PathBuf>,
        #[arg(long, value_parser = rational)]
        horizon: Option<Q>,
        #[arg(long, env = "FLOWTIME_MAX_PHASES", default_value_t = DEFAULT_MAX_PHASES)]
        max_phases: usize,
        #[arg(long, value_enum, default_value = "auto")]
        route: RouteArg,
        #[arg(long, value_enum, default_value = "arc-order")]
        completion: CompletionArg,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long, default_value_t = 0)]
        midpoints: usize,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Verify a trace file against the flow dynamics.
    Check {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        /// Interior sample points per phase.
        #[arg(long, default_value_t = 1)]
        samples: usize,
    },
    /// CSV of a trace file, sampled at every breakpoint.
    PlotData {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value_t = 0)]
        midpoints: usize,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

fn rational(s: &str) -> Result<Q, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

enum Failure {
    /// Invalid input or a failed check.
    Invalid(String),
    Solver(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn options(route: RouteArg, completion: CompletionArg) -> ThinFlowOptions {
    ThinFlowOptions {
        route: match route {
            RouteArg::Auto => Route::Auto,
            RouteArg::Lcp => Route::Lcp,
            RouteArg::Sp => Route::SeriesParallel,
        },
        completion: match completion {
            CompletionArg::ArcOrder => FlowCompletion::ArcOrder,
            CompletionArg::ReverseArcOrder => FlowCompletion::ReverseArcOrder,
        },
    }
}

fn emit(text: &str, output: Option<&Path>) -> Outcome {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Invalid(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serializes");
    s.push('\n');
    s
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("{}: {}", path.display(), IoError::from(e))))
}

fn graph_of(inst: &Instance) -> Result<ShortestPathGraph, Failure> {
    match &inst.graph {
        Some(g) => Ok(g.clone()),
        None => derive_sp_graph(&inst.network, &static_shortest_labels(&inst.network))
            .map_err(|e| Failure::Solver(e.to_string())),
    }
}

fn validate(path: &Path) -> Outcome {
    match load_instance(path) {
        Ok(inst) => {
            let net = &inst.network;
            println!("valid: {} vertices, {} arcs", net.num_vertices(), net.num_arcs());
            Ok(())
        }
        Err(IoError::Validation(problems)) => {
            for p in &problems {
                println!("{p}");
            }
            Err(Failure::Invalid(format!("{} violation(s)", problems.len())))
        }
        Err(e) => Err(e.into()),
    }
}

fn sp_decompose(path: &Path) -> Outcome {
    let inst = load_instance(path)?;
    let net = &inst.network;
    let arcs: Vec<usize> = match &inst.graph {
        Some(g) => g.active_arcs(),
        None => (0..net.num_arcs()).collect(),
    };
    match decompose_network(net, &arcs) {
        Ok(tree) => emit(&pretty(&tree.to_json(net)), None),
        Err(SpError::NotSeriesParallel(rest)) => {
            let edges: Vec<Value> = rest
                .edges
                .iter()
                .map(|(u, v, arcs)| {
                    json!({
                        "tail": net.vertex_name(*u),
                        "head": net.vertex_name(*v),
                        "arcs": arcs.iter().map(|a| net.arc(*a).id.clone()).collect::<Vec<_>>(),
                    })
                })
                .collect();
            emit(&pretty(&json!({ "not_series_parallel": edges })), None)?;
            Err(Failure::Solver("graph is not series-parallel".into()))
        }
        Err(e) => Err(Failure::Solver(e.to_string())),
    }
}

#[allow(clippy::too_many_arguments)]
fn thinflow(
    path: &Path,
    value: Option<Q>,
    source_label: Q,
    all: bool,
    parametric: bool,
    upto: Option<Q>,
    opts: ThinFlowOptions,
    format: Format,
    midpoints: usize,
) -> Outcome {
    let inst = load_instance(path)?;
    let net = &inst.network;
    let g = graph_of(&inst)?;
    if parametric {
        let (labels, flows) = parametric_thin_flow(net, &g)
            .ok_or_else(|| Failure::Solver("active subgraph is not series-parallel".into()))?
            .map_err(|e| Failure::Solver(e.to_string()))?;
        return match format {
            Format::Json => emit(&pretty(&parametric_to_json(net, &labels, &flows)), None),
            Format::Csv => {
                let end = upto.unwrap_or_else(|| labels.breakpoints().last().cloned().unwrap_or_default() + Q::from_integer(1.into()));
                emit(&parametric_to_csv(net, &labels, &flows, &end, midpoints), None)
            }
        };
    }
    let value = value.ok_or_else(|| Failure::Invalid("--value is required".into()))?;
    if all {
        let sols = brute_force_thin_flows(net, &g, &value, &source_label).map_err(|e| Failure::Solver(e.to_string()))?;
        return match format {
            Format::Json => emit(&pretty(&Value::Array(sols.iter().map(|s| thin_flow_to_json(net, s)).collect())), None),
            Format::Csv => emit(&sols.iter().map(|s| thin_flow_to_csv(net, s)).collect::<Vec<_>>().join("\n"), None),
        };
    }
    let sol = solve_thin_flow(net, &g, &value, &source_label, opts).map_err(|e| Failure::Solver(e.to_string()))?;
    match format {
        Format::Json => emit(&pretty(&thin_flow_to_json(net, &sol)), None),
        Format::Csv => emit(&thin_flow_to_csv(net, &sol), None),
    }
}

fn render_trace(net: &Network, trace: &EquilibriumTrace, inflow: &InflowProfile, format: Format, midpoints: usize) -> String {
    match format {
        Format::Json => pretty(&trace_to_json(net, trace, inflow)),
        Format::Csv => trace_to_csv(net, trace, midpoints),
    }
}

#[allow(clippy::too_many_arguments)]
fn equilibrium(
    network: &Path,
    inflow: Option<&Path>,
    horizon: Option<Q>,
    max_phases: usize,
    thin_flow: ThinFlowOptions,
    format: Format,
    midpoints: usize,
    output: Option<&Path>,
) -> Outcome {
    let inst = load_instance(network)?;
    let net = &inst.network;
    let (rate, file_horizon) = match (inflow, &inst.inflow) {
        (Some(p), _) => load_inflow(p)?,
        (None, Some(p)) => (p.rate.clone(), Some(p.horizon.clone())),
        (None, None) => return Err(Failure::Invalid("no inflow given".into())),
    };
    let horizon = horizon
        .or(file_horizon)
        .or_else(|| inst.inflow.as_ref().map(|p| p.horizon.clone()))
        .ok_or_else(|| Failure::Invalid("no horizon given".into()))?;
    let profile = InflowProfile::new(rate, horizon).map_err(|e| Failure::Invalid(e.to_string()))?;
    match run(net, &profile, EngineOptions { max_phases, thin_flow }) {
        Ok(trace) => emit(&render_trace(net, &trace, &profile, format, midpoints), output),
        Err(EquilibriumError::PhaseCapExceeded { limit, trace }) => {
            let partial = InflowProfile { rate: profile.rate.clone(), horizon: trace.end() };
            let trace = EquilibriumTrace { horizon: trace.end(), ..*trace };
            emit(&render_trace(net, &trace, &partial, format, midpoints), output)?;
            Err(Failure::Solver(format!(
                "phase limit of {limit} reached at time {}; the partial trace ends there",
                format_rational(&trace.end())
            )))
        }
        Err(EquilibriumError::InvalidNetwork(msg)) => Err(Failure::Invalid(msg)),
        Err(e) => Err(Failure::Solver(e.to_string())),
    }
}

fn check(network: &Path, trace_path: &Path, samples: usize) -> Outcome {
    let inst = load_instance(network)?;
    let net = &inst.network;
    let (trace, inflow) = trace_from_json(net, &read_json(trace_path)?)?;
    let report = check_equilibrium(&trace, net, &inflow, samples);
    if report.passed() {
        println!("equilibrium verified at {} sample times", report.sample_times);
        Ok(())
    } else {
        for v in &report.violations {
            println!("{v}");
        }
        Err(Failure::Invalid(format!("{} violation(s)", report.violations.len())))
    }
}

fn plot_data(network: &Path, trace_path: &Path, midpoints: usize, output: Option<&Path>) -> Outcome {
    let inst = load_instance(network)?;
    let (trace, _) = trace_from_json(&inst.network, &read_json(trace_path)?)?;
    emit(&trace_to_csv(&inst.network, &trace, midpoints), output)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate { instance } => validate(&instance),
        Command::SpDecompose { instance } => sp_decompose(&instance),
        Command::Thinflow {
            instance,
            value,
            source_label,
            all,
            parametric,
            upto,
            route,
            completion,
            format,
            midpoints,
        } => thinflow(&instance, value, source_label, all, parametric, upto, options(route, completion), format, midpoints),
        Command::Equilibrium { network, inflow, horizon, max_phases, route, completion, format, midpoints, output } => {
            equilibrium(
                &network,
                inflow.as_deref(),
                horizon,
                max_phases,
                options(route, completion),
                format,
                midpoints,
                output.as_deref(),
            )
        }
        Command::Check { network, trace, samples } => check(&network, &trace, samples),
        Command::PlotData { network, trace, midpoints, output } => plot_data(&network, &trace, midpoints, output.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
