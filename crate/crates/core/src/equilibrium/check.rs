use std::fmt;

use num_traits::{Signed, Zero};

use super::{EquilibriumTrace, InflowProfile};
use crate::network::{derive_sp_graph, ArcId, Network, VertexId};
use crate::pwl::PwlFn;
use crate::rational::{format_rational, int, positive_part, Q};
use crate::thinflow::{check_thin_flow, ThinFlowViolation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EquilibriumViolation {
    /// The source label must equal the departure time.
    SourceLabel { time: Q, label: Q },
    /// An earliest arrival label differs from the best arrival over its in-arcs.
    Bellman { time: Q, vertex: VertexId, label: Q, best: Q },
    /// A stored queue disagrees with the label gap or with the simulated queue.
    Queue { time: Q, arc: ArcId, stored: Q, from_labels: Q, simulated: Q },
    /// Cumulative outflow at the arrival time differs from the cumulative inflow at departure.
    Outflow { time: Q, arc: ArcId, inflow: Q, outflow: Q },
    Conservation { time: Q, vertex: VertexId, imbalance: Q },
    /// Flow enters an arc while its tail label stands still.
    InstantInflow { arc: ArcId, time: Q },
    GraphMismatch { phase: usize },
    InflowMismatch { phase: usize },
    Slope { phase: usize, what: String },
    ThinFlow { phase: usize, violation: ThinFlowViolation },
    Coverage(String),
}

impl fmt::Display for EquilibriumViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = format_rational;
        match self {
            Self::SourceLabel { time, label } => write!(f, "θ={}: source label {}", r(time), r(label)),
            Self::Bellman { time, vertex, label, best } => {
                write!(f, "θ={}: label {} at vertex {vertex}, best arrival {}", r(time), r(label), r(best))
            }
            Self::Queue { time, arc, stored, from_labels, simulated } => write!(
                f,
                "θ={}: queue on arc {arc} stored {}, from labels {}, simulated {}",
                r(time),
                r(stored),
                r(from_labels),
                r(simulated)
            ),
            Self::Outflow { time, arc, inflow, outflow } => {
                write!(f, "θ={}: arc {arc} took in {} but released {}", r(time), r(inflow), r(outflow))
            }
            Self::Conservation { time, vertex, imbalance } => {
                write!(f, "θ={}: imbalance {} at vertex {vertex}", r(time), r(imbalance))
            }
            Self::InstantInflow { arc, time } => write!(f, "θ={}: arc {arc} receives flow in zero time", r(time)),
            Self::GraphMismatch { phase } => write!(f, "phase {phase}: stored graph differs from the labels"),
            Self::InflowMismatch { phase } => write!(f, "phase {phase}: stored inflow differs from the profile"),
            Self::Slope { phase, what } => write!(f, "phase {phase}: {what}"),
            Self::ThinFlow { phase, violation } => write!(f, "phase {phase}: {violation}"),
            Self::Coverage(msg) => write!(f, "{msg}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EquilibriumReport {
    pub sample_times: usize,
    pub violations: Vec<EquilibriumViolation>,
}

impl EquilibriumReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Queue length over real time for cumulative inflow `inflow` into a bottleneck of rate `capacity`.
pub fn simulate_queue(inflow: &PwlFn, capacity: &Q) -> PwlFn {
    let pts = inflow.points();
    let slopes = inflow.slopes();
    let mut out = vec![(Q::zero(), Q::zero())];
    let mut z = Q::zero();
    for i in 0..pts.len() {
        let d = &slopes[i] - capacity;
        let start = &pts[i].0;
        let Some((end, _)) = pts.get(i + 1) else {
            let final_slope = if z.is_positive() && d.is_negative() {
                out.push((start + &z / -&d, Q::zero()));
                Q::zero()
            } else if z.is_positive() || d.is_positive() {
                d
            } else {
                Q::zero()
            };
            return PwlFn::new(dedup(out), final_slope).expect("queue breakpoints increase");
        };
        if z.is_positive() || d.is_positive() {
            let next = &z + &d * (end - start);
            if next.is_negative() {
                out.push((start + &z / -&d, Q::zero()));
                z = Q::zero();
            } else {
                z = next;
            }
        }
        out.push((end.clone(), z.clone()));
    }
    unreachable!("the loop returns at the last piece")
}

fn dedup(points: Vec<(Q, Q)>) -> Vec<(Q, Q)> {
    let mut out: Vec<(Q, Q)> = Vec::with_capacity(points.len());
    for p in points {
        if out.last().is_some_and(|l| l.0 == p.0) {
            continue;
        }
        out.push(p);
    }
    out
}

struct ArcDynamics {
    inflow: PwlFn,
    queue: PwlFn,
}

impl ArcDynamics {
    fn outflow_at(&self, time: &Q, transit: &Q) -> Q {
        let entry = time - transit;
        if entry.is_negative() {
            return Q::zero();
        }
        self.inflow.at(&entry) - self.queue.at(&entry)
    }
}

/// Reconstructs the real-time inflow of every arc from the trace and simulates its queue.
fn arc_dynamics(trace: &EquilibriumTrace, net: &Network, violations: &mut Vec<EquilibriumViolation>) -> Vec<ArcDynamics> {
    let times = trace.boundaries();
    net.arcs()
        .iter()
        .enumerate()
        .map(|(a, arc)| {
            let lv = &trace.labels[arc.tail];
            let x = &trace.cumulative_flows[a];
            let mut points: Vec<(Q, Q)> = vec![(Q::zero(), Q::zero())];
            for t in &times {
                let (real, cum) = (lv.at(t), x.at(t));
                let last = points.last().unwrap();
                if real == last.0 {
                    if cum != last.1 {
                        violations.push(EquilibriumViolation::InstantInflow { arc: a, time: t.clone() });
                    }
                    continue;
                }
                points.push((real, cum));
            }
            let tail_rate = match trace.phases.last() {
                Some(p) => {
                    let dv = &p.thin_flow.labels[arc.tail];
                    let chi = p.thin_flow.flows.get(&a).cloned().unwrap_or_else(Q::zero);
                    if dv.is_positive() {
                        chi / dv
                    } else {
                        Q::zero()
                    }
                }
                None => Q::zero(),
            };
            let inflow = PwlFn::new(points, tail_rate).unwrap_or_else(|_| PwlFn::constant(Q::zero()));
            let queue = simulate_queue(&inflow, &arc.capacity);
            ArcDynamics { inflow, queue }
        })
        .collect()
}

/// Verifies a trace against the flow dynamics at every phase boundary and at
/// `samples_per_phase` evenly spaced interior points of each phase.
pub fn check_equilibrium(
    trace: &EquilibriumTrace,
    net: &Network,
    inflow: &InflowProfile,
    samples_per_phase: usize,
) -> EquilibriumReport {
    let mut violations = Vec::new();
    let one = int(1);
    if trace.labels.len() != net.num_vertices() || trace.cumulative_flows.len() != net.num_arcs() || trace.queues.len() != net.num_arcs() {
        violations.push(EquilibriumViolation::Coverage("trace does not match the network".into()));
        return EquilibriumReport { sample_times: 0, violations };
    }
    let mut expected_start = Q::zero();
    for (k, p) in trace.phases.iter().enumerate() {
        if p.start != expected_start || p.end <= p.start {
            violations.push(EquilibriumViolation::Coverage(format!("phase {k} does not continue the previous one")));
        }
        expected_start = p.end.clone();
        let start_labels = trace.label_at(&p.start);
        match derive_sp_graph(net, &start_labels) {
            Ok(g) if g == p.graph => {}
            _ => violations.push(EquilibriumViolation::GraphMismatch { phase: k }),
        }
        if p.inflow != inflow.rate.at(&p.start) {
            violations.push(EquilibriumViolation::InflowMismatch { phase: k });
        }
        let tf = &p.thin_flow;
        for v in check_thin_flow(net, &p.graph, &tf.flows, &tf.labels, &p.inflow, &one).violations {
            violations.push(EquilibriumViolation::ThinFlow { phase: k, violation: v });
        }
        let len = &p.end - &p.start;
        for v in 0..net.num_vertices() {
            let rise = trace.labels[v].at(&p.end) - &start_labels[v];
            if rise != &len * &tf.labels[v] {
                violations.push(EquilibriumViolation::Slope { phase: k, what: format!("label slope at vertex {v}") });
            }
        }
        for a in 0..net.num_arcs() {
            let chi = tf.flows.get(&a).cloned().unwrap_or_else(Q::zero);
            let rise = trace.cumulative_flows[a].at(&p.end) - trace.cumulative_flows[a].at(&p.start);
            if rise != &len * chi {
                violations.push(EquilibriumViolation::Slope { phase: k, what: format!("flow slope on arc {a}") });
            }
        }
    }
    if trace.end() != trace.horizon {
        violations.push(EquilibriumViolation::Coverage("phases do not reach the horizon".into()));
    }
    let dynamics = arc_dynamics(trace, net, &mut violations);
    let cumulative_inflow = inflow.cumulative();
    let mut times: Vec<Q> = Vec::new();
    for p in &trace.phases {
        times.push(p.start.clone());
        let len = &p.end - &p.start;
        for i in 1..=samples_per_phase {
            times.push(&p.start + &len * int(i as i64) / int(samples_per_phase as i64 + 1));
        }
    }
    if let Some(p) = trace.phases.last() {
        times.push(p.end.clone());
    }
    for t in &times {
        check_time(trace, net, &dynamics, &cumulative_inflow, t, &mut violations);
    }
    EquilibriumReport { sample_times: times.len(), violations }
}

fn check_time(
    trace: &EquilibriumTrace,
    net: &Network,
    dynamics: &[ArcDynamics],
    cumulative_inflow: &PwlFn,
    t: &Q,
    violations: &mut Vec<EquilibriumViolation>,
) {
    let labels = trace.label_at(t);
    let s = net.source();
    if labels[s] != *t {
        violations.push(EquilibriumViolation::SourceLabel { time: t.clone(), label: labels[s].clone() });
    }
    let x: Vec<Q> = trace.cumulative_flows.iter().map(|f| f.at(t)).collect();
    let mut best: Vec<Option<Q>> = vec![None; net.num_vertices()];
    for (a, arc) in net.arcs().iter().enumerate() {
        let (lv, lw) = (&labels[arc.tail], &labels[arc.head]);
        let from_labels = &arc.capacity * positive_part(&(lw - lv - &arc.transit));
        let stored = trace.queues[a].at(t);
        let simulated = dynamics[a].queue.at(lv);
        if stored != from_labels || simulated != from_labels {
            violations.push(EquilibriumViolation::Queue { time: t.clone(), arc: a, stored, from_labels, simulated: simulated.clone() });
        }
        let arrival = lv + &simulated / &arc.capacity + &arc.transit;
        let b = &mut best[arc.head];
        if b.as_ref().map_or(true, |cur| arrival < *cur) {
            *b = Some(arrival);
        }
        let outflow = dynamics[a].outflow_at(lw, &arc.transit);
        if outflow != x[a] {
            violations.push(EquilibriumViolation::Outflow { time: t.clone(), arc: a, inflow: x[a].clone(), outflow });
        }
    }
    for v in 0..net.num_vertices() {
        if v != s {
            if let Some(b) = &best[v] {
                if *b != labels[v] {
                    violations.push(EquilibriumViolation::Bellman {
                        time: t.clone(),
                        vertex: v,
                        label: labels[v].clone(),
                        best: b.clone(),
                    });
                }
            }
        }
        if v == net.sink() {
            continue;
        }
        let out: Q = net.out_arcs(v).map(|a| x[a].clone()).sum();
        let inn: Q = net.in_arcs(v).map(|a| x[a].clone()).sum();
        let expected = if v == s { cumulative_inflow.at(t) } else { Q::zero() };
        let imbalance = out - inn - expected;
        if !imbalance.is_zero() {
            violations.push(EquilibriumViolation::Conservation { time: t.clone(), vertex: v, imbalance });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::{two_arc, two_arc_inflow};
    use super::super::{run, EngineOptions};
    use super::*;
    use crate::rational::q;

    #[test]
    fn queue_builds_and_drains() {
        let inflow = PwlFn::new(vec![(int(0), int(0)), (int(1), int(2)), (int(3), int(2))], int(1)).unwrap();
        let z = simulate_queue(&inflow, &int(1));
        assert_eq!(z, PwlFn::new(vec![(int(0), int(0)), (int(1), int(1)), (int(2), int(0))], int(0)).unwrap());
        let steady = simulate_queue(&PwlFn::linear(int(0), int(3)), &int(1));
        assert_eq!(steady, PwlFn::linear(int(0), int(2)));
    }

    #[test]
    fn two_arc_trace_passes() {
        let net = two_arc();
        let trace = run(&net, &two_arc_inflow(), EngineOptions::default()).unwrap();
        let report = check_equilibrium(&trace, &net, &two_arc_inflow(), 3);
        assert!(report.passed(), "{:?}", report.violations);
        assert_eq!(report.sample_times, 3 * 4 + 1);
    }

    #[test]
    fn bumped_label_is_caught() {
        let net = two_arc();
        let mut trace = run(&net, &two_arc_inflow(), EngineOptions::default()).unwrap();
        let lt = &trace.labels[1];
        let mut pts = lt.points().to_vec();
        pts.insert(1, (q(1, 2), lt.at(&q(1, 2)) + q(1, 8)));
        trace.labels[1] = PwlFn::new(pts, lt.final_slope().clone()).unwrap();
        let report = check_equilibrium(&trace, &net, &two_arc_inflow(), 1);
        assert!(report.violations.iter().any(|v| matches!(v, EquilibriumViolation::Bellman { vertex: 1, .. })));
    }
}
