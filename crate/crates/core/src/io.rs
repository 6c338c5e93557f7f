//! JSON instance and result files, CSV sampling for plots.
//!
//! Every rational is written as a `[numerator, denominator]` pair of JSON integers of
//! arbitrary size. Piecewise-linear functions use
//! `{"breakpoints": [[xn, xd, yn, yd], ...], "final_slope": [n, d]}` and step functions
//! `{"pieces": [[sn, sd, vn, vd], ...]}`. Vertices and arcs are referred to by name.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::equilibrium::{EquilibriumTrace, InflowProfile, Phase};
use crate::network::{validate_network, Arc, ArcId, Network, ShortestPathGraph, VertexId};
use crate::parametric::{ParallelSplit, ParametricFlow, ParametricLabels};
use crate::pwl::{PwlFn, StepFn};
use crate::rational::{int, to_f64, QPair, Q};
use crate::thinflow::ThinFlowSolution;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IoError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("invalid network: {}", .0.join("; "))]
    Validation(Vec<String>),
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        let message = e.to_string();
        let message = match message.rfind(" at line ") {
            Some(i) => message[..i].to_string(),
            None => message,
        };
        IoError::Parse { line: e.line(), column: e.column(), message }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcRecord {
    pub id: String,
    pub tail: String,
    pub head: String,
    pub capacity: QPair,
    pub transit: QPair,
}

/// Explicit `(A', A*)` for a standalone thin-flow query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphRecord {
    pub active: Vec<String>,
    #[serde(default)]
    pub resetting: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InflowRecord {
    pub rate: StepFn,
    pub horizon: QPair,
}

/// On-disk form of an instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub vertices: Vec<String>,
    pub source: String,
    pub sink: String,
    pub arcs: Vec<ArcRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thin_flow_graph: Option<GraphRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inflow: Option<InflowRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub network: Network,
    pub graph: Option<ShortestPathGraph>,
    pub inflow: Option<InflowProfile>,
}

fn vertex_id(net: &Network, name: &str) -> Result<VertexId, IoError> {
    net.vertex_id(name).ok_or_else(|| IoError::Invalid(format!("unknown vertex `{name}`")))
}

fn arc_id(net: &Network, name: &str) -> Result<ArcId, IoError> {
    net.arc_id(name).ok_or_else(|| IoError::Invalid(format!("unknown arc `{name}`")))
}

fn arc_ids(net: &Network, names: &[String]) -> Result<Vec<ArcId>, IoError> {
    names.iter().map(|n| arc_id(net, n)).collect()
}

fn arc_names(net: &Network, arcs: impl IntoIterator<Item = ArcId>) -> Vec<String> {
    arcs.into_iter().map(|a| net.arc(a).id.clone()).collect()
}

impl InstanceFile {
    pub fn from_instance(instance: &Instance) -> Self {
        let net = &instance.network;
        InstanceFile {
            vertices: net.vertex_names().to_vec(),
            source: net.vertex_name(net.source()).to_string(),
            sink: net.vertex_name(net.sink()).to_string(),
            arcs: net
                .arcs()
                .iter()
                .map(|a| ArcRecord {
                    id: a.id.clone(),
                    tail: net.vertex_name(a.tail).to_string(),
                    head: net.vertex_name(a.head).to_string(),
                    capacity: QPair(a.capacity.clone()),
                    transit: QPair(a.transit.clone()),
                })
                .collect(),
            thin_flow_graph: instance.graph.as_ref().map(|g| GraphRecord {
                active: arc_names(net, g.active_arcs()),
                resetting: arc_names(net, g.resetting_arcs()),
            }),
            inflow: instance
                .inflow
                .as_ref()
                .map(|p| InflowRecord { rate: p.rate.clone(), horizon: QPair(p.horizon.clone()) }),
        }
    }

    /// Builds the network without checking capacities, transit times or reachability.
    pub fn network(&self) -> Result<Network, IoError> {
        let index: BTreeMap<&str, VertexId> = self.vertices.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let lookup = |field: &str, name: &str| {
            index.get(name).copied().ok_or_else(|| IoError::Invalid(format!("{field}: unknown vertex `{name}`")))
        };
        let arcs = self
            .arcs
            .iter()
            .map(|a| {
                Ok(Arc {
                    id: a.id.clone(),
                    tail: lookup(&format!("arc `{}` tail", a.id), &a.tail)?,
                    head: lookup(&format!("arc `{}` head", a.id), &a.head)?,
                    capacity: a.capacity.0.clone(),
                    transit: a.transit.0.clone(),
                })
            })
            .collect::<Result<Vec<_>, IoError>>()?;
        let source = lookup("source", &self.source)?;
        let sink = lookup("sink", &self.sink)?;
        Network::new(self.vertices.clone(), arcs, source, sink).map_err(|e| IoError::Invalid(e.to_string()))
    }

    pub fn into_instance(self) -> Result<Instance, IoError> {
        let network = self.network()?;
        let report = validate_network(&network);
        if !report.is_valid() {
            return Err(IoError::Validation(report.describe(&network)));
        }
        let graph = match &self.thin_flow_graph {
            Some(g) => Some(
                ShortestPathGraph::new(&network, arc_ids(&network, &g.active)?, arc_ids(&network, &g.resetting)?)
                    .map_err(|e| IoError::Invalid(format!("thin_flow_graph: {e}")))?,
            ),
            None => None,
        };
        let inflow = match self.inflow {
            Some(r) => {
                Some(InflowProfile::new(r.rate, r.horizon.0).map_err(|e| IoError::Invalid(format!("inflow: {e}")))?)
            }
            None => None,
        };
        Ok(Instance { network, graph, inflow })
    }
}

pub fn parse_instance(text: &str) -> Result<Instance, IoError> {
    serde_json::from_str::<InstanceFile>(text)?.into_instance()
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, IoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| IoError::Read { path: path.display().to_string(), message: e.to_string() })?;
    parse_instance(&text)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InflowFile {
    rate: StepFn,
    #[serde(default)]
    horizon: Option<QPair>,
}

/// Standalone inflow file `{"rate": <step function>, "horizon": [n, d]}`; the horizon is optional.
pub fn load_inflow(path: impl AsRef<Path>) -> Result<(StepFn, Option<Q>), IoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| IoError::Read { path: path.display().to_string(), message: e.to_string() })?;
    let file: InflowFile = serde_json::from_str(&text)?;
    Ok((file.rate, file.horizon.map(|h| h.0)))
}

pub fn instance_to_json(instance: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_instance(instance)).expect("instance serializes")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThinFlowRecord {
    value: QPair,
    source_label: QPair,
    labels: BTreeMap<String, QPair>,
    flows: BTreeMap<String, QPair>,
    slacks: BTreeMap<String, QPair>,
}

fn by_arc_name(net: &Network, m: &BTreeMap<ArcId, Q>) -> BTreeMap<String, QPair> {
    m.iter().map(|(a, x)| (net.arc(*a).id.clone(), QPair(x.clone()))).collect()
}

fn from_arc_names<T: Clone>(net: &Network, m: &BTreeMap<String, T>) -> Result<BTreeMap<ArcId, T>, IoError> {
    m.iter().map(|(k, x)| Ok((arc_id(net, k)?, x.clone()))).collect()
}

fn per_vertex<T: Clone>(net: &Network, m: &BTreeMap<String, T>, what: &str) -> Result<Vec<T>, IoError> {
    (0..net.num_vertices())
        .map(|v| {
            let name = net.vertex_name(v);
            m.get(name).cloned().ok_or_else(|| IoError::Invalid(format!("{what}: no entry for vertex `{name}`")))
        })
        .collect()
}

fn per_arc<T: Clone>(net: &Network, m: &BTreeMap<String, T>, what: &str) -> Result<Vec<T>, IoError> {
    net.arcs()
        .iter()
        .map(|a| m.get(&a.id).cloned().ok_or_else(|| IoError::Invalid(format!("{what}: no entry for arc `{}`", a.id))))
        .collect()
}

impl ThinFlowRecord {
    fn new(net: &Network, sol: &ThinFlowSolution) -> Self {
        ThinFlowRecord {
            value: QPair(sol.value.clone()),
            source_label: QPair(sol.source_label.clone()),
            labels: sol.labels.iter().enumerate().map(|(v, l)| (net.vertex_name(v).to_string(), QPair(l.clone()))).collect(),
            flows: by_arc_name(net, &sol.flows),
            slacks: by_arc_name(net, &sol.slacks),
        }
    }

    fn solution(&self, net: &Network) -> Result<ThinFlowSolution, IoError> {
        let unpair = |m: BTreeMap<ArcId, QPair>| m.into_iter().map(|(k, v)| (k, v.0)).collect();
        Ok(ThinFlowSolution {
            value: self.value.0.clone(),
            source_label: self.source_label.0.clone(),
            labels: per_vertex(net, &self.labels, "labels")?.into_iter().map(|p| p.0).collect(),
            flows: unpair(from_arc_names(net, &self.flows)?),
            slacks: unpair(from_arc_names(net, &self.slacks)?),
        })
    }
}

pub fn thin_flow_to_json(net: &Network, sol: &ThinFlowSolution) -> Value {
    serde_json::to_value(ThinFlowRecord::new(net, sol)).expect("thin flow serializes")
}

pub fn thin_flow_from_json(net: &Network, value: &Value) -> Result<ThinFlowSolution, IoError> {
    ThinFlowRecord::deserialize(value)?.solution(net)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SplitRecord {
    source: String,
    sink: String,
    left_arcs: Vec<String>,
    right_arcs: Vec<String>,
    left: PwlFn,
    right: PwlFn,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParametricRecord {
    source: String,
    sink: String,
    labels: BTreeMap<String, PwlFn>,
    extended_junctions: Vec<String>,
    flows: BTreeMap<String, PwlFn>,
    splits: Vec<SplitRecord>,
}

pub fn parametric_to_json(net: &Network, labels: &ParametricLabels, flows: &ParametricFlow) -> Value {
    let name = |v: VertexId| net.vertex_name(v).to_string();
    let record = ParametricRecord {
        source: name(labels.source),
        sink: name(labels.sink),
        labels: labels.labels.iter().map(|(v, f)| (name(*v), f.clone())).collect(),
        extended_junctions: labels.extended_junctions.iter().map(|v| name(*v)).collect(),
        flows: flows.flows.iter().map(|(a, f)| (net.arc(*a).id.clone(), f.clone())).collect(),
        splits: flows
            .splits
            .iter()
            .map(|s| SplitRecord {
                source: name(s.source),
                sink: name(s.sink),
                left_arcs: arc_names(net, s.left_arcs.iter().copied()),
                right_arcs: arc_names(net, s.right_arcs.iter().copied()),
                left: s.left.clone(),
                right: s.right.clone(),
            })
            .collect(),
    };
    serde_json::to_value(record).expect("parametric solution serializes")
}

pub fn parametric_from_json(net: &Network, value: &Value) -> Result<(ParametricLabels, ParametricFlow), IoError> {
    let r = ParametricRecord::deserialize(value)?;
    let vertex = |n: &str| vertex_id(net, n);
    let labels = ParametricLabels {
        source: vertex(&r.source)?,
        sink: vertex(&r.sink)?,
        labels: r.labels.iter().map(|(k, f)| Ok((vertex(k)?, f.clone()))).collect::<Result<_, IoError>>()?,
        extended_junctions: r.extended_junctions.iter().map(|n| vertex(n)).collect::<Result<_, _>>()?,
    };
    let splits = r
        .splits
        .iter()
        .map(|s| {
            Ok(ParallelSplit {
                source: vertex(&s.source)?,
                sink: vertex(&s.sink)?,
                left_arcs: arc_ids(net, &s.left_arcs)?,
                right_arcs: arc_ids(net, &s.right_arcs)?,
                left: s.left.clone(),
                right: s.right.clone(),
            })
        })
        .collect::<Result<_, IoError>>()?;
    Ok((labels, ParametricFlow { flows: from_arc_names(net, &r.flows)?, splits }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhaseRecord {
    start: QPair,
    end: QPair,
    inflow: QPair,
    active: Vec<String>,
    resetting: Vec<String>,
    thin_flow: ThinFlowRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceRecord {
    horizon: QPair,
    inflow: StepFn,
    labels: BTreeMap<String, PwlFn>,
    cumulative_flows: BTreeMap<String, PwlFn>,
    queues: BTreeMap<String, PwlFn>,
    phases: Vec<PhaseRecord>,
}

/// Trace file; embeds the inflow profile so that it can be checked on its own.
pub fn trace_to_json(net: &Network, trace: &EquilibriumTrace, inflow: &InflowProfile) -> Value {
    let per_arc = |fs: &[PwlFn]| -> BTreeMap<String, PwlFn> {
        fs.iter().enumerate().map(|(a, f)| (net.arc(a).id.clone(), f.clone())).collect()
    };
    let record = TraceRecord {
        horizon: QPair(trace.horizon.clone()),
        inflow: inflow.rate.clone(),
        labels: trace.labels.iter().enumerate().map(|(v, f)| (net.vertex_name(v).to_string(), f.clone())).collect(),
        cumulative_flows: per_arc(&trace.cumulative_flows),
        queues: per_arc(&trace.queues),
        phases: trace
            .phases
            .iter()
            .map(|p| PhaseRecord {
                start: QPair(p.start.clone()),
                end: QPair(p.end.clone()),
                inflow: QPair(p.inflow.clone()),
                active: arc_names(net, p.graph.active_arcs()),
                resetting: arc_names(net, p.graph.resetting_arcs()),
                thin_flow: ThinFlowRecord::new(net, &p.thin_flow),
            })
            .collect(),
    };
    serde_json::to_value(record).expect("trace serializes")
}

pub fn trace_from_json(net: &Network, value: &Value) -> Result<(EquilibriumTrace, InflowProfile), IoError> {
    let r = TraceRecord::deserialize(value)?;
    let inflow =
        InflowProfile::new(r.inflow, r.horizon.0.clone()).map_err(|e| IoError::Invalid(format!("inflow: {e}")))?;
    let phases = r
        .phases
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let graph = ShortestPathGraph::new(net, arc_ids(net, &p.active)?, arc_ids(net, &p.resetting)?)
                .map_err(|e| IoError::Invalid(format!("phase {k}: {e}")))?;
            Ok(Phase {
                start: p.start.0.clone(),
                end: p.end.0.clone(),
                graph,
                inflow: p.inflow.0.clone(),
                thin_flow: p.thin_flow.solution(net)?,
            })
        })
        .collect::<Result<_, IoError>>()?;
    let trace = EquilibriumTrace {
        horizon: r.horizon.0,
        labels: per_vertex(net, &r.labels, "labels")?,
        phases,
        cumulative_flows: per_arc(net, &r.cumulative_flows, "cumulative_flows")?,
        queues: per_arc(net, &r.queues, "queues")?,
    };
    Ok((trace, inflow))
}

/// Sampling grid on `[0, end]`: every breakpoint, both ends and `midpoints` evenly spaced
/// points inside each gap.
pub fn sample_grid<'a>(breakpoints: impl IntoIterator<Item = &'a Q>, end: &Q, midpoints: usize) -> Vec<Q> {
    let mut base: BTreeSet<Q> = breakpoints.into_iter().filter(|x| *x <= end).cloned().collect();
    base.insert(int(0));
    base.insert(end.clone());
    let base: Vec<Q> = base.into_iter().collect();
    let mut out = Vec::with_capacity(base.len() * (midpoints + 1));
    for (i, x) in base.iter().enumerate() {
        out.push(x.clone());
        if let Some(next) = base.get(i + 1) {
            let gap = next - x;
            for k in 1..=midpoints {
                out.push(x + &gap * int(k as i64) / int(midpoints as i64 + 1));
            }
        }
    }
    out
}

fn csv_table(header: &[String], grid: &[Q], columns: &[&PwlFn]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for x in grid {
        let _ = write!(out, "{}", to_f64(x));
        for f in columns {
            let _ = write!(out, ",{}", to_f64(&f.at(x)));
        }
        out.push('\n');
    }
    out
}

/// One row per sample time: labels, cumulative arc inflows and queues.
pub fn trace_to_csv(net: &Network, trace: &EquilibriumTrace, midpoints: usize) -> String {
    let mut header = vec!["theta".to_string()];
    header.extend(net.vertex_names().iter().map(|v| format!("label_{v}")));
    header.extend(net.arcs().iter().map(|a| format!("inflow_{}", a.id)));
    header.extend(net.arcs().iter().map(|a| format!("queue_{}", a.id)));
    let columns: Vec<&PwlFn> = trace.labels.iter().chain(&trace.cumulative_flows).chain(&trace.queues).collect();
    if trace.phases.is_empty() {
        return csv_table(&header, &[], &columns);
    }
    let grid = sample_grid(columns.iter().flat_map(|f| f.breakpoint_xs()), &trace.horizon, midpoints);
    csv_table(&header, &grid, &columns)
}

/// One row per sampled flow value on `[0, upto]`: vertex labels and arc flows.
pub fn parametric_to_csv(
    net: &Network,
    labels: &ParametricLabels,
    flows: &ParametricFlow,
    upto: &Q,
    midpoints: usize,
) -> String {
    let mut header = vec!["value".to_string()];
    let mut columns: Vec<&PwlFn> = Vec::new();
    for (v, f) in &labels.labels {
        header.push(format!("label_{}", net.vertex_name(*v)));
        columns.push(f);
    }
    for (a, f) in &flows.flows {
        header.push(format!("flow_{}", net.arc(*a).id));
        columns.push(f);
    }
    let grid = sample_grid(columns.iter().flat_map(|f| f.breakpoint_xs()), upto, midpoints);
    csv_table(&header, &grid, &columns)
}

pub fn thin_flow_to_csv(net: &Network, sol: &ThinFlowSolution) -> String {
    let mut out = String::from("kind,name,value\n");
    for (v, l) in sol.labels.iter().enumerate() {
        let _ = writeln!(out, "label,{},{}", net.vertex_name(v), to_f64(l));
    }
    for (a, x) in &sol.flows {
        let _ = writeln!(out, "flow,{},{}", net.arc(*a).id, to_f64(x));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{run, EngineOptions};
    use crate::parametric::parametric_solve;
    use crate::rational::q;
    use crate::sp::SpTree;
    use crate::thinflow::{solve_thin_flow, ThinFlowOptions};

    const TWO_ARC: &str = r#"{
        "vertices": ["s", "t"],
        "source": "s",
        "sink": "t",
        "arcs": [
            {"id": "a", "tail": "s", "head": "t", "capacity": [1, 1], "transit": [0, 1]},
            {"id": "b", "tail": "s", "head": "t", "capacity": [1, 1], "transit": [1, 1]}
        ],
        "inflow": {"rate": {"pieces": [[0, 1, 2, 1], [1, 1, 0, 1]]}, "horizon": [3, 1]}
    }"#;

    #[test]
    fn loads_and_round_trips() {
        let inst = parse_instance(TWO_ARC).unwrap();
        assert_eq!(inst.network.num_arcs(), 2);
        assert_eq!(inst.network.arc(1).transit, int(1));
        assert_eq!(inst.inflow.as_ref().unwrap().horizon, int(3));
        let again = parse_instance(&instance_to_json(&inst)).unwrap();
        assert_eq!(again, inst);
    }

    #[test]
    fn third_capacity_is_exact() {
        let text = TWO_ARC.replacen("\"capacity\": [1, 1]", "\"capacity\": [1, 3]", 1);
        let inst = parse_instance(&text).unwrap();
        assert_eq!(inst.network.arc(0).capacity, q(1, 3));
        assert!(instance_to_json(&inst).contains("[\n        1,\n        3\n      ]"));
    }

    #[test]
    fn rejects_bad_files() {
        let zero = TWO_ARC.replacen("\"capacity\": [1, 1]", "\"capacity\": [0, 1]", 1);
        assert!(matches!(parse_instance(&zero), Err(IoError::Validation(_))));
        match parse_instance("{\n  \"vertices\": [\"s\",\n  }") {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let unknown = TWO_ARC.replacen("\"head\": \"t\"", "\"head\": \"u\"", 1);
        match parse_instance(&unknown) {
            Err(IoError::Invalid(msg)) => assert!(msg.contains("arc `a` head") && msg.contains("`u`")),
            other => panic!("unexpected {other:?}"),
        }
        let half = TWO_ARC.replacen("[0, 1]", "[0, 0]", 1);
        assert!(matches!(parse_instance(&half), Err(IoError::Parse { .. })));
    }

    #[test]
    fn single_resetting_arc_json() {
        let net = Network::builder().arc("a", "s", "t", int(1), int(0)).build().unwrap();
        let (labels, flows) = parametric_solve(&SpTree::leaf(0, 0, 1), |_| true, &net.capacities()).unwrap();
        let json = parametric_to_json(&net, &labels, &flows);
        assert_eq!(json["labels"]["t"].to_string(), r#"{"breakpoints":[[0,1,0,1]],"final_slope":[1,1]}"#);
        assert_eq!(parametric_from_json(&net, &json).unwrap(), (labels, flows));
    }

    #[test]
    fn trace_round_trip_and_csv() {
        let inst = parse_instance(TWO_ARC).unwrap();
        let inflow = inst.inflow.unwrap();
        let trace = run(&inst.network, &inflow, EngineOptions::default()).unwrap();
        let json = trace_to_json(&inst.network, &trace, &inflow);
        let text = serde_json::to_string(&json).unwrap();
        let back = trace_from_json(&inst.network, &serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, (trace.clone(), inflow));
        let csv = trace_to_csv(&inst.network, &trace, 0);
        let lt: Vec<String> = csv.lines().skip(1).map(|r| r.split(',').take(3).skip(2).collect()).collect();
        let theta: Vec<&str> = csv.lines().skip(1).map(|r| r.split(',').next().unwrap()).collect();
        assert_eq!(theta, ["0", "1", "2", "3"]);
        assert_eq!(lt, ["0", "2", "2", "3"]);
        assert_eq!(trace_to_csv(&inst.network, &trace, 1).lines().count(), 1 + 7);
    }

    #[test]
    fn empty_trace_csv_has_header_only() {
        let inst = parse_instance(TWO_ARC).unwrap();
        let inflow = InflowProfile::new(StepFn::constant(int(1)), int(0)).unwrap();
        let trace = run(&inst.network, &inflow, EngineOptions::default()).unwrap();
        let csv = trace_to_csv(&inst.network, &trace, 2);
        assert_eq!(csv, "theta,label_s,label_t,inflow_a,inflow_b,queue_a,queue_b\n");
    }

    #[test]
    fn thin_flow_round_trip() {
        let inst = parse_instance(TWO_ARC).unwrap();
        let net = &inst.network;
        let g = ShortestPathGraph::new(net, [0, 1], [0]).unwrap();
        let sol = solve_thin_flow(net, &g, &int(3), &int(1), ThinFlowOptions::default()).unwrap();
        let json = thin_flow_to_json(net, &sol);
        assert_eq!(thin_flow_from_json(net, &json).unwrap(), sol);
        assert!(thin_flow_to_csv(net, &sol).starts_with("kind,name,value\nlabel,s,1\n"));
    }

    #[test]
    fn grid_contains_breakpoints() {
        let grid = sample_grid([&int(1), &int(5)], &int(2), 1);
        assert_eq!(grid, vec![int(0), q(1, 2), int(1), q(3, 2), int(2)]);
    }
}
