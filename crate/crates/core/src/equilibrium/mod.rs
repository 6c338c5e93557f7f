//! Dynamic equilibria by piecewise-linear extension of earliest arrival labels.

mod check;
mod numeric;

pub use check::{check_equilibrium, simulate_queue, EquilibriumReport, EquilibriumViolation};
pub use numeric::{numeric_run, InflowRate, NumericTrace};

use std::fmt;

use num_traits::{Signed, Zero};

use crate::network::{derive_sp_graph, static_shortest_labels, validate_network, ArcId, Network, NetworkError, ShortestPathGraph};
use crate::pwl::{integrate_step, PwlFn, StepFn};
use crate::rational::{format_rational, positive_part, Q};
use crate::thinflow::{solve_thin_flow, ThinFlowError, ThinFlowOptions, ThinFlowSolution};

pub const DEFAULT_MAX_PHASES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EquilibriumError {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid inflow: {0}")]
    InvalidInflow(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    ThinFlow(#[from] ThinFlowError),
    #[error("no event before the horizon")]
    NoEvent,
    #[error("phase limit of {limit} reached at time {}", format_rational(&.trace.end()))]
    PhaseCapExceeded { limit: usize, trace: Box<EquilibriumTrace> },
}

/// Piecewise-constant network inflow rate together with the time horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InflowProfile {
    pub rate: StepFn,
    pub horizon: Q,
}

impl InflowProfile {
    pub fn new(rate: StepFn, horizon: Q) -> Result<Self, EquilibriumError> {
        if rate.pieces().iter().any(|(_, v)| v.is_negative()) {
            return Err(EquilibriumError::InvalidInflow("negative inflow rate".into()));
        }
        if horizon.is_negative() {
            return Err(EquilibriumError::InvalidInflow("negative horizon".into()));
        }
        Ok(InflowProfile { rate, horizon })
    }

    /// Cumulative inflow `N_0(θ)`.
    pub fn cumulative(&self) -> PwlFn {
        integrate_step(&self.rate, &Q::zero())
    }
}

/// One phase: on `[start, end)` the label derivatives equal the thin flow on `graph`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phase {
    pub start: Q,
    pub end: Q,
    pub graph: ShortestPathGraph,
    pub inflow: Q,
    pub thin_flow: ThinFlowSolution,
}

/// Earliest arrival labels, cumulative flows and queues of an equilibrium on `[0, horizon]`.
///
/// Functions are indexed by vertex or arc and parametrized by the source departure time `θ`.
/// Queues are measured at the moment `ℓ_v(θ)` the particle reaches the tail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquilibriumTrace {
    pub horizon: Q,
    pub labels: Vec<PwlFn>,
    pub phases: Vec<Phase>,
    pub cumulative_flows: Vec<PwlFn>,
    pub queues: Vec<PwlFn>,
}

impl EquilibriumTrace {
    /// End of the last phase; equals the horizon for complete traces.
    pub fn end(&self) -> Q {
        self.phases.last().map_or_else(Q::zero, |p| p.end.clone())
    }

    pub fn label_at(&self, theta: &Q) -> Vec<Q> {
        self.labels.iter().map(|f| f.at(theta)).collect()
    }

    /// Times at which any phase begins or ends.
    pub fn boundaries(&self) -> Vec<Q> {
        let mut b: Vec<Q> = self.phases.iter().map(|p| p.start.clone()).collect();
        if let Some(p) = self.phases.last() {
            b.push(p.end.clone());
        }
        b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineOptions {
    pub max_phases: usize,
    pub thin_flow: ThinFlowOptions,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions { max_phases: DEFAULT_MAX_PHASES, thin_flow: ThinFlowOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Activation(ArcId),
    Depletion(ArcId),
    InflowChange,
    Horizon,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Activation(a) => write!(f, "arc {a} becomes active"),
            Event::Depletion(a) => write!(f, "queue on arc {a} runs empty"),
            Event::InflowChange => write!(f, "inflow rate changes"),
            Event::Horizon => write!(f, "horizon reached"),
        }
    }
}

/// Shortest-path graph at the given labels and the thin flow governing the next phase.
pub fn compute_phase(
    net: &Network,
    labels: &[Q],
    inflow: &Q,
    options: ThinFlowOptions,
) -> Result<(ShortestPathGraph, ThinFlowSolution), EquilibriumError> {
    let g = derive_sp_graph(net, labels)?;
    let tf = solve_thin_flow(net, &g, inflow, &Q::from_integer(1.into()), options)?;
    Ok((g, tf))
}

/// Length of the current phase and the events that end it.
pub fn next_event(
    net: &Network,
    labels: &[Q],
    derivatives: &[Q],
    theta: &Q,
    inflow: &InflowProfile,
) -> Result<(Q, Vec<Event>), EquilibriumError> {
    let mut candidates: Vec<(Q, Event)> = Vec::new();
    for (a, arc) in net.arcs().iter().enumerate() {
        let (lv, lw) = (&labels[arc.tail], &labels[arc.head]);
        let (dv, dw) = (&derivatives[arc.tail], &derivatives[arc.head]);
        let gap = lw - lv - &arc.transit;
        if gap.is_negative() && dw > dv {
            candidates.push((-gap / (dw - dv), Event::Activation(a)));
        } else if gap.is_positive() && dv > dw {
            candidates.push((gap / (dv - dw), Event::Depletion(a)));
        }
    }
    if let Some(jump) = inflow.rate.next_jump_after(theta) {
        if *jump < inflow.horizon {
            candidates.push((jump - theta, Event::InflowChange));
        }
    }
    let remaining = &inflow.horizon - theta;
    if !remaining.is_positive() {
        return Err(EquilibriumError::NoEvent);
    }
    candidates.push((remaining, Event::Horizon));
    let alpha = candidates.iter().map(|c| c.0.clone()).min().unwrap();
    let events = candidates.into_iter().filter(|c| c.0 == alpha).map(|c| c.1).collect();
    Ok((alpha, events))
}

/// Computes the equilibrium on `[0, horizon]` starting from the static shortest-path labels.
pub fn run(net: &Network, inflow: &InflowProfile, options: EngineOptions) -> Result<EquilibriumTrace, EquilibriumError> {
    let report = validate_network(net);
    if !report.is_valid() {
        return Err(EquilibriumError::InvalidNetwork(report.describe(net).join("; ")));
    }
    let mut theta = Q::zero();
    let mut labels = static_shortest_labels(net);
    let mut cumulative = vec![Q::zero(); net.num_arcs()];
    let mut snapshots = vec![(labels.clone(), cumulative.clone())];
    let mut phases: Vec<Phase> = Vec::new();
    while theta < inflow.horizon {
        if phases.len() >= options.max_phases {
            let trace = assemble(net, inflow, phases, &snapshots);
            return Err(EquilibriumError::PhaseCapExceeded { limit: options.max_phases, trace: Box::new(trace) });
        }
        let rate = inflow.rate.at(&theta);
        let (g, tf) = compute_phase(net, &labels, &rate, options.thin_flow)?;
        let (alpha, _) = next_event(net, &labels, &tf.labels, &theta, inflow)?;
        for (l, d) in labels.iter_mut().zip(&tf.labels) {
            *l += &alpha * d;
        }
        for (a, x) in &tf.flows {
            cumulative[*a] += &alpha * x;
        }
        let end = &theta + &alpha;
        phases.push(Phase { start: theta.clone(), end: end.clone(), graph: g, inflow: rate, thin_flow: tf });
        snapshots.push((labels.clone(), cumulative.clone()));
        theta = end;
    }
    Ok(assemble(net, inflow, phases, &snapshots))
}

fn assemble(net: &Network, inflow: &InflowProfile, phases: Vec<Phase>, snapshots: &[(Vec<Q>, Vec<Q>)]) -> EquilibriumTrace {
    let times: Vec<Q> = std::iter::once(Q::zero()).chain(phases.iter().map(|p| p.end.clone())).collect();
    let series = |value: &dyn Fn(usize) -> Q| -> PwlFn {
        let points: Vec<(Q, Q)> = times.iter().enumerate().map(|(k, t)| (t.clone(), value(k))).collect();
        let n = points.len();
        let slope = if n >= 2 {
            (&points[n - 1].1 - &points[n - 2].1) / (&points[n - 1].0 - &points[n - 2].0)
        } else {
            Q::zero()
        };
        PwlFn::new(points, slope).expect("phase ends are increasing")
    };
    let labels = (0..net.num_vertices()).map(|v| series(&|k| snapshots[k].0[v].clone())).collect();
    let cumulative_flows = (0..net.num_arcs()).map(|a| series(&|k| snapshots[k].1[a].clone())).collect();
    let queues = net
        .arcs()
        .iter()
        .map(|arc| {
            series(&|k| {
                let l = &snapshots[k].0;
                &arc.capacity * positive_part(&(&l[arc.head] - &l[arc.tail] - &arc.transit))
            })
        })
        .collect();
    EquilibriumTrace { horizon: inflow.horizon.clone(), labels, phases, cumulative_flows, queues }
}
