//! Thin flows with resetting: normalization, flow completion, verification and the solver facade.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use num_traits::{Signed, Zero};

use crate::lcp::{brute_force_solve, build_lcp, lemke_solve, LcpError};
use crate::network::{ArcId, Network, ShortestPathGraph, VertexId};
use crate::parametric::{eval_thin_flow, parametric_solve, ParametricError, ParametricFlow, ParametricLabels};
use crate::rational::{format_rational, positive_part, Q};
use crate::sp::{decompose_network, SpTree};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ThinFlowError {
    #[error(transparent)]
    Lcp(#[from] LcpError),
    #[error(transparent)]
    Parametric(#[from] ParametricError),
    #[error("no flow is compatible with the labels: {0}")]
    Infeasible(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// A thin flow `(x', ℓ')` of value `ν'_0` with source label `ℓ'_0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThinFlowSolution {
    pub value: Q,
    pub source_label: Q,
    /// Indexed by vertex.
    pub labels: Vec<Q>,
    /// Active arcs only.
    pub flows: BTreeMap<ArcId, Q>,
    /// `[ℓ'_v - x'_a/ν_a]₊` for every non-resetting active arc.
    pub slacks: BTreeMap<ArcId, Q>,
}

/// How the free part of a flow is filled in once the labels are known.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum FlowCompletion {
    /// Augmenting paths explore arcs in increasing id order.
    #[default]
    ArcOrder,
    /// Augmenting paths explore arcs in decreasing id order.
    ReverseArcOrder,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Route {
    /// Series-parallel evaluation when `(V, A')` is series-parallel, the LCP otherwise.
    #[default]
    Auto,
    Lcp,
    SeriesParallel,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ThinFlowOptions {
    pub route: Route,
    pub completion: FlowCompletion,
}

/// Label of arc `a = (v, w)` given the tail label and the arc flow.
pub fn arc_label(tail_label: &Q, flow: &Q, capacity: &Q, resetting: bool) -> Q {
    let ratio = flow / capacity;
    if resetting || ratio > *tail_label {
        ratio
    } else {
        tail_label.clone()
    }
}

/// Raises each label without a resetting in-arc to the smallest label of its in-neighbours.
pub fn normalize_labels(net: &Network, g: &ShortestPathGraph, labels: &[Q]) -> Vec<Q> {
    let order = g.topological_order(net).expect("shortest-path graphs are acyclic");
    let mut pi = labels.to_vec();
    for w in order {
        if w == g.source() {
            continue;
        }
        let ins: Vec<ArcId> = g.active_in_arcs(net, w).collect();
        if ins.is_empty() || ins.iter().any(|&a| g.is_resetting(a)) {
            continue;
        }
        let lowest = ins.iter().map(|&a| pi[net.arc(a).tail].clone()).min().unwrap();
        if lowest > pi[w] {
            pi[w] = lowest;
        }
    }
    pi
}

pub fn slacks_for(net: &Network, g: &ShortestPathGraph, labels: &[Q], flows: &BTreeMap<ArcId, Q>) -> BTreeMap<ArcId, Q> {
    g.non_resetting_arcs()
        .into_iter()
        .map(|a| {
            let arc = net.arc(a);
            (a, positive_part(&(&labels[arc.tail] - &flows[&a] / &arc.capacity)))
        })
        .collect()
}

/// A flow of value `value` compatible with the given labels.
///
/// Arcs with a resetting or strictly lower tail label carry `ν_a ℓ'_w`, arcs with a higher tail
/// label carry nothing, and the rest are filled by augmenting paths subject to `x'_a ≤ ν_a ℓ'_w`.
pub fn flow_from_labels(
    net: &Network,
    g: &ShortestPathGraph,
    labels: &[Q],
    value: &Q,
    completion: FlowCompletion,
) -> Result<BTreeMap<ArcId, Q>, ThinFlowError> {
    let n = net.num_vertices();
    let mut flows = BTreeMap::new();
    let mut need = vec![Q::zero(); n];
    need[g.source()] = -value.clone();
    need[g.sink()] += value;
    let mut free = Vec::new();
    for a in g.active_arcs() {
        let arc = net.arc(a);
        let (lv, lw) = (&labels[arc.tail], &labels[arc.head]);
        let x = if g.is_resetting(a) || lv < lw {
            &arc.capacity * lw
        } else if lv > lw {
            Q::zero()
        } else {
            free.push(a);
            continue;
        };
        need[arc.head] -= &x;
        need[arc.tail] += &x;
        flows.insert(a, x);
    }
    if completion == FlowCompletion::ReverseArcOrder {
        free.reverse();
    }
    let mut mf = MaxFlow::new(n + 2);
    let (src, dst) = (n, n + 1);
    let free_edges: Vec<(ArcId, usize)> = free
        .iter()
        .map(|&a| {
            let arc = net.arc(a);
            (a, mf.add_edge(arc.tail, arc.head, &arc.capacity * &labels[arc.head]))
        })
        .collect();
    let mut required = Q::zero();
    for (v, d) in need.iter().enumerate() {
        if d.is_positive() {
            mf.add_edge(v, dst, d.clone());
            required += d;
        } else if d.is_negative() {
            mf.add_edge(src, v, -d.clone());
        }
    }
    let pushed = mf.run(src, dst);
    if pushed != required {
        return Err(ThinFlowError::Infeasible(format!(
            "routed {} of the required {}",
            format_rational(&pushed),
            format_rational(&required)
        )));
    }
    for (a, e) in free_edges {
        flows.insert(a, mf.flow(e));
    }
    Ok(flows)
}

struct MaxFlow {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<Q>,
}

impl MaxFlow {
    fn new(n: usize) -> Self {
        MaxFlow { adj: vec![Vec::new(); n], to: Vec::new(), cap: Vec::new() }
    }

    fn add_edge(&mut self, u: usize, v: usize, c: Q) -> usize {
        let e = self.to.len();
        self.to.push(v);
        self.cap.push(c);
        self.adj[u].push(e);
        self.to.push(u);
        self.cap.push(Q::zero());
        self.adj[v].push(e + 1);
        e
    }

    fn flow(&self, e: usize) -> Q {
        self.cap[e + 1].clone()
    }

    /// Shortest augmenting paths, scanning adjacency lists in insertion order.
    fn run(&mut self, s: usize, t: usize) -> Q {
        let mut total = Q::zero();
        loop {
            let mut pred: Vec<Option<usize>> = vec![None; self.adj.len()];
            let mut queue = VecDeque::from([s]);
            let mut seen = vec![false; self.adj.len()];
            seen[s] = true;
            while let Some(u) = queue.pop_front() {
                for &e in &self.adj[u] {
                    let v = self.to[e];
                    if !seen[v] && self.cap[e].is_positive() {
                        seen[v] = true;
                        pred[v] = Some(e);
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut path = Vec::new();
            let mut v = t;
            while let Some(e) = pred[v] {
                path.push(e);
                v = self.to[e ^ 1];
            }
            let delta = path.iter().map(|&e| self.cap[e].clone()).min().unwrap();
            for &e in &path {
                self.cap[e] -= &delta;
                self.cap[e ^ 1] += &delta;
            }
            total += delta;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ThinFlowViolation {
    NegativeFlow { arc: ArcId },
    NegativeLabel { vertex: VertexId },
    InactiveArcFlow { arc: ArcId },
    MissingFlow { arc: ArcId },
    SourceLabel { expected: Q, actual: Q },
    Conservation { vertex: VertexId, expected: Q, actual: Q },
    NoInArc { vertex: VertexId },
    LabelNotMinimum { vertex: VertexId, label: Q, minimum: Q },
    NotTight { arc: ArcId, head_label: Q, arc_label: Q },
}

impl fmt::Display for ThinFlowViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = format_rational;
        match self {
            ThinFlowViolation::NegativeFlow { arc } => write!(f, "negative flow on arc {arc}"),
            ThinFlowViolation::NegativeLabel { vertex } => write!(f, "negative label at vertex {vertex}"),
            ThinFlowViolation::InactiveArcFlow { arc } => write!(f, "flow on inactive arc {arc}"),
            ThinFlowViolation::MissingFlow { arc } => write!(f, "no flow given for active arc {arc}"),
            ThinFlowViolation::SourceLabel { expected, actual } => {
                write!(f, "source label {} instead of {}", r(actual), r(expected))
            }
            ThinFlowViolation::Conservation { vertex, expected, actual } => {
                write!(f, "net inflow {} at vertex {vertex}, expected {}", r(actual), r(expected))
            }
            ThinFlowViolation::NoInArc { vertex } => write!(f, "vertex {vertex} has no active in-arc"),
            ThinFlowViolation::LabelNotMinimum { vertex, label, minimum } => {
                write!(f, "label {} at vertex {vertex} differs from the arc minimum {}", r(label), r(minimum))
            }
            ThinFlowViolation::NotTight { arc, head_label, arc_label } => {
                write!(f, "arc {arc} carries flow but its label {} exceeds the head label {}", r(arc_label), r(head_label))
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ThinFlowReport {
    pub violations: Vec<ThinFlowViolation>,
}

impl ThinFlowReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verifies every defining condition of a thin flow with resetting.
pub fn check_thin_flow(
    net: &Network,
    g: &ShortestPathGraph,
    flows: &BTreeMap<ArcId, Q>,
    labels: &[Q],
    value: &Q,
    source_label: &Q,
) -> ThinFlowReport {
    let mut violations = Vec::new();
    let zero = Q::zero();
    let flow = |a: ArcId| flows.get(&a).unwrap_or(&zero);
    for (&a, x) in flows {
        if x.is_negative() {
            violations.push(ThinFlowViolation::NegativeFlow { arc: a });
        }
        if !g.is_active(a) && !x.is_zero() {
            violations.push(ThinFlowViolation::InactiveArcFlow { arc: a });
        }
    }
    for a in g.active_arcs() {
        if !flows.contains_key(&a) {
            violations.push(ThinFlowViolation::MissingFlow { arc: a });
        }
    }
    for (v, l) in labels.iter().enumerate() {
        if l.is_negative() {
            violations.push(ThinFlowViolation::NegativeLabel { vertex: v });
        }
    }
    let s = g.source();
    if labels[s] != *source_label {
        violations.push(ThinFlowViolation::SourceLabel { expected: source_label.clone(), actual: labels[s].clone() });
    }
    for v in 0..net.num_vertices() {
        let inflow: Q = g.active_in_arcs(net, v).map(|a| flow(a).clone()).sum();
        let outflow: Q = g.active_out_arcs(net, v).map(|a| flow(a).clone()).sum();
        let expected = if v == s {
            -value.clone()
        } else if v == g.sink() {
            value.clone()
        } else {
            Q::zero()
        };
        let actual = inflow - outflow;
        if actual != expected {
            violations.push(ThinFlowViolation::Conservation { vertex: v, expected, actual });
        }
        if v == s {
            continue;
        }
        let arc_labels: Vec<(ArcId, Q)> = g
            .active_in_arcs(net, v)
            .map(|a| {
                let arc = net.arc(a);
                (a, arc_label(&labels[arc.tail], flow(a), &arc.capacity, g.is_resetting(a)))
            })
            .collect();
        let Some(minimum) = arc_labels.iter().map(|(_, l)| l.clone()).min() else {
            violations.push(ThinFlowViolation::NoInArc { vertex: v });
            continue;
        };
        if labels[v] != minimum {
            violations.push(ThinFlowViolation::LabelNotMinimum { vertex: v, label: labels[v].clone(), minimum });
        }
        for (a, l) in arc_labels {
            if flow(a).is_positive() && l != labels[v] {
                violations.push(ThinFlowViolation::NotTight { arc: a, head_label: labels[v].clone(), arc_label: l });
            }
        }
    }
    ThinFlowReport { violations }
}

fn check_inputs(value: &Q, source_label: &Q) -> Result<(), ThinFlowError> {
    if value.is_negative() || source_label.is_negative() {
        return Err(ThinFlowError::Precondition("flow value and source label must be non-negative".into()));
    }
    Ok(())
}

/// Thin flow through Lemke's method, label normalization and flow completion.
pub fn solve_thin_flow_lcp(
    net: &Network,
    g: &ShortestPathGraph,
    value: &Q,
    source_label: &Q,
    completion: FlowCompletion,
) -> Result<ThinFlowSolution, ThinFlowError> {
    check_inputs(value, source_label)?;
    let lcp = build_lcp(net, g, value, source_label);
    let z = lemke_solve(&lcp.matrix, &lcp.q)?.z;
    let labels = normalize_labels(net, g, &z[..net.num_vertices()]);
    let flows = flow_from_labels(net, g, &labels, value, completion)?;
    let slacks = slacks_for(net, g, &labels, &flows);
    Ok(ThinFlowSolution { value: value.clone(), source_label: source_label.clone(), labels, flows, slacks })
}

/// Every complementary basic solution of the thin-flow LCP, with normalized labels.
pub fn brute_force_thin_flows(
    net: &Network,
    g: &ShortestPathGraph,
    value: &Q,
    source_label: &Q,
) -> Result<Vec<ThinFlowSolution>, ThinFlowError> {
    check_inputs(value, source_label)?;
    let lcp = build_lcp(net, g, value, source_label);
    let layout = &lcp.layout;
    let sols = brute_force_solve(&lcp.matrix, &lcp.q)?;
    Ok(sols
        .into_iter()
        .map(|z| {
            let labels = normalize_labels(net, g, &z[..net.num_vertices()]);
            let flows: BTreeMap<ArcId, Q> =
                layout.arcs.iter().enumerate().map(|(k, &a)| (a, z[layout.flow(k)].clone())).collect();
            let slacks = slacks_for(net, g, &labels, &flows);
            ThinFlowSolution { value: value.clone(), source_label: source_label.clone(), labels, flows, slacks }
        })
        .collect())
}

/// Decomposition of `(V, A')` when it is series-parallel between the network terminals.
pub fn series_parallel_tree(net: &Network, g: &ShortestPathGraph) -> Option<SpTree> {
    let tree = decompose_network(net, &g.active_arcs()).ok()?;
    (tree.source == g.source() && tree.sink == g.sink()).then_some(tree)
}

/// Parametric labels and flows of a series-parallel shortest-path graph.
pub fn parametric_thin_flow(
    net: &Network,
    g: &ShortestPathGraph,
) -> Option<Result<(ParametricLabels, ParametricFlow), ParametricError>> {
    let tree = series_parallel_tree(net, g)?;
    Some(parametric_solve(&tree, |a| g.is_resetting(a), &net.capacities()))
}

pub fn solution_from_parametric(
    net: &Network,
    g: &ShortestPathGraph,
    parametric: &(ParametricLabels, ParametricFlow),
    value: &Q,
    source_label: &Q,
) -> Result<ThinFlowSolution, ThinFlowError> {
    let (l, x) = eval_thin_flow(&parametric.0, &parametric.1, value, source_label)?;
    let labels: Vec<Q> = (0..net.num_vertices()).map(|v| l[&v].clone()).collect();
    let slacks = slacks_for(net, g, &labels, &x);
    Ok(ThinFlowSolution { value: value.clone(), source_label: source_label.clone(), labels, flows: x, slacks })
}

/// The thin flow of `G'` for the given value and source label.
pub fn solve_thin_flow(
    net: &Network,
    g: &ShortestPathGraph,
    value: &Q,
    source_label: &Q,
    options: ThinFlowOptions,
) -> Result<ThinFlowSolution, ThinFlowError> {
    check_inputs(value, source_label)?;
    let use_sp = match options.route {
        Route::Lcp => false,
        Route::SeriesParallel => true,
        Route::Auto => source_label.is_positive() || value.is_zero(),
    };
    if use_sp {
        match parametric_thin_flow(net, g) {
            Some(p) => return solution_from_parametric(net, g, &p?, value, source_label),
            None if options.route == Route::SeriesParallel => {
                return Err(ThinFlowError::Precondition("active subgraph is not series-parallel".into()))
            }
            None => {}
        }
    }
    solve_thin_flow_lcp(net, g, value, source_label, options.completion)
}
