use std::collections::HashMap;

use num_traits::{Signed, Zero};

use super::EquilibriumError;
use crate::network::{static_shortest_labels, validate_network, Network, ShortestPathGraph};
use crate::parametric::{ParametricFlow, ParametricLabels};
use crate::pwl::{PwlFn, StepFn};
use crate::rational::{int, to_f64, Q};
use crate::thinflow::{parametric_thin_flow, solution_from_parametric, solve_thin_flow, Route, ThinFlowOptions};

use super::EquilibriumTrace;

/// Network inflow rate for the time-stepping scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InflowRate {
    Step(StepFn),
    Pwl(PwlFn),
}

impl InflowRate {
    pub fn at(&self, theta: &Q) -> Q {
        match self {
            InflowRate::Step(f) => f.at(theta),
            InflowRate::Pwl(f) => f.at(theta),
        }
    }
}

/// Labels of the explicit time-stepping scheme on the grid `times`.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericTrace {
    pub step: Q,
    pub tolerance: f64,
    pub times: Vec<Q>,
    /// `labels[k][v]` is the label of vertex `v` at `times[k]`.
    pub labels: Vec<Vec<f64>>,
}

impl NumericTrace {
    /// Largest deviation from an exact trace over the grid points it covers.
    pub fn max_error(&self, exact: &EquilibriumTrace) -> f64 {
        let end = exact.end();
        self.times
            .iter()
            .zip(&self.labels)
            .filter(|(t, _)| **t <= end)
            .flat_map(|(t, row)| row.iter().zip(&exact.labels).map(move |(x, f)| (x - to_f64(&f.at(t))).abs()))
            .fold(0.0, f64::max)
    }
}

/// Explicit time stepping with floating-point labels: at every grid point the shortest-path
/// graph is read off the labels up to a rounding tolerance, and the labels advance by `step`
/// times the exact thin flow of that graph.
pub fn numeric_run(
    net: &Network,
    inflow: &InflowRate,
    step: &Q,
    horizon: &Q,
    options: ThinFlowOptions,
) -> Result<NumericTrace, EquilibriumError> {
    let report = validate_network(net);
    if !report.is_valid() {
        return Err(EquilibriumError::InvalidNetwork(report.describe(net).join("; ")));
    }
    if !step.is_positive() {
        return Err(EquilibriumError::InvalidInflow("step must be positive".into()));
    }
    if horizon.is_negative() {
        return Err(EquilibriumError::InvalidInflow("negative horizon".into()));
    }
    let h = to_f64(step);
    let mut labels: Vec<f64> = static_shortest_labels(net).iter().map(to_f64).collect();
    let scale = labels.iter().fold(to_f64(horizon), |m, l| m.max(l.abs()));
    let tolerance = 1e-9 * (1.0 + scale);
    let mut theta = Q::zero();
    let mut times = vec![theta.clone()];
    let mut rows = vec![labels.clone()];
    let mut cache: HashMap<ShortestPathGraph, Option<(ParametricLabels, ParametricFlow)>> = HashMap::new();
    let one = int(1);
    while theta < *horizon {
        let rate = inflow.at(&theta);
        if rate.is_negative() {
            return Err(EquilibriumError::InvalidInflow("negative inflow rate".into()));
        }
        let g = approximate_graph(net, &labels, tolerance)?;
        let tf = if options.route == Route::Lcp {
            solve_thin_flow(net, &g, &rate, &one, options)?
        } else {
            let entry = cache.entry(g.clone()).or_insert_with(|| parametric_thin_flow(net, &g).and_then(Result::ok));
            match entry {
                Some(p) => solution_from_parametric(net, &g, p, &rate, &one)?,
                None => solve_thin_flow(net, &g, &rate, &one, options)?,
            }
        };
        let next = std::cmp::min(&theta + step, horizon.clone());
        let dt = if next == &theta + step { h } else { to_f64(&(&next - &theta)) };
        for (l, d) in labels.iter_mut().zip(&tf.labels) {
            *l += dt * to_f64(d);
        }
        theta = next;
        times.push(theta.clone());
        rows.push(labels.clone());
    }
    Ok(NumericTrace { step: step.clone(), tolerance, times, labels: rows })
}

fn approximate_graph(net: &Network, labels: &[f64], tolerance: f64) -> Result<ShortestPathGraph, EquilibriumError> {
    let gaps: Vec<f64> = net
        .arcs()
        .iter()
        .map(|a| labels[a.head] - labels[a.tail] - to_f64(&a.transit))
        .collect();
    let mut active: Vec<bool> = gaps.iter().map(|&d| d >= -tolerance).collect();
    for v in (0..net.num_vertices()).filter(|&v| v != net.source()) {
        if !net.in_arcs(v).any(|a| active[a]) {
            if let Some(a) = net.in_arcs(v).max_by(|&a, &b| gaps[a].total_cmp(&gaps[b])) {
                active[a] = true;
            }
        }
    }
    let resetting = (0..net.num_arcs()).filter(|&a| active[a] && gaps[a] > tolerance);
    Ok(ShortestPathGraph::new(net, (0..net.num_arcs()).filter(|&a| active[a]), resetting)?)
}

#[cfg(test)]
mod tests {
    use super::super::tests::{two_arc, two_arc_inflow};
    use super::super::{run, EngineOptions};
    use super::*;
    use crate::rational::q;

    #[test]
    fn dyadic_steps_reproduce_the_two_arc_labels() {
        let net = two_arc();
        let exact = run(&net, &two_arc_inflow(), EngineOptions::default()).unwrap();
        let inflow = InflowRate::Step(two_arc_inflow().rate);
        for k in 1..4 {
            let trace = numeric_run(&net, &inflow, &q(1, 1 << k), &int(3), ThinFlowOptions::default()).unwrap();
            assert_eq!(trace.times.len(), 3 * (1 << k) + 1);
            assert_eq!(trace.max_error(&exact), 0.0);
        }
    }

    #[test]
    fn step_is_clipped_at_the_horizon() {
        let inflow = InflowRate::Pwl(PwlFn::constant(int(1)));
        let trace = numeric_run(&two_arc(), &inflow, &q(2, 3), &int(1), ThinFlowOptions::default()).unwrap();
        assert_eq!(trace.times, vec![int(0), q(2, 3), int(1)]);
        assert!((trace.labels[2][1] - 1.0).abs() < 1e-12);
    }
}
