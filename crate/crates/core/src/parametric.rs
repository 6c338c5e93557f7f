//! Thin flows on series-parallel graphs as piecewise-linear functions of the flow value.
//!
//! Everything is expressed with source label fixed to 1; other source labels follow by scaling.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use crate::network::{ArcId, VertexId};
use crate::pwl::{compose_monotone, pointwise_min, pseudo_inverse, InverseSide, PwlError, PwlFn};
use crate::rational::Q;
use crate::sp::{SpKind, SpTree};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParametricError {
    #[error("junction {0} has label 0 on an interval of positive flow values")]
    DegenerateJunction(VertexId),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Pwl(#[from] PwlError),
}

/// Vertex labels `ρ_v(ν'_0)` of a series-parallel graph with source label 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParametricLabels {
    pub source: VertexId,
    pub sink: VertexId,
    pub labels: BTreeMap<VertexId, PwlFn>,
    /// Series junctions whose label vanishes at value 0; the composed labels there use the right limit.
    pub extended_junctions: Vec<VertexId>,
}

/// How a parallel node divides its flow value between its two branches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelSplit {
    pub source: VertexId,
    pub sink: VertexId,
    pub left_arcs: Vec<ArcId>,
    pub right_arcs: Vec<ArcId>,
    pub left: PwlFn,
    pub right: PwlFn,
}

/// Arc flows `χ_a(ν'_0)` together with the splits taken at every parallel node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParametricFlow {
    pub flows: BTreeMap<ArcId, PwlFn>,
    pub splits: Vec<ParallelSplit>,
}

impl ParametricLabels {
    pub fn label(&self, v: VertexId) -> &PwlFn {
        &self.labels[&v]
    }

    pub fn sink_label(&self) -> &PwlFn {
        &self.labels[&self.sink]
    }

    /// Distinct flow values at which some label has a kink.
    pub fn breakpoints(&self) -> BTreeSet<Q> {
        self.labels.values().flat_map(|f| f.breakpoint_xs().cloned()).collect()
    }

    pub fn num_breakpoints(&self) -> usize {
        self.breakpoints().len()
    }
}

/// Sink label of a single arc: `max{1, x/ν}`, or `x/ν` when the arc is resetting.
pub fn rho_leaf(capacity: &Q, resetting: bool) -> PwlFn {
    let slope = Q::one() / capacity;
    if resetting {
        PwlFn::linear(Q::zero(), slope)
    } else {
        PwlFn::new(vec![(Q::zero(), Q::one()), (capacity.clone(), Q::one())], slope).expect("capacity is positive")
    }
}

/// `x ↦ f(x) · g(x / f(x))`, continued by its right limit at 0 when `f(0) = 0`.
fn series_transform(f: &PwlFn, g: &PwlFn, junction: VertexId) -> Result<PwlFn, ParametricError> {
    if !f.is_nondecreasing() {
        return Err(ParametricError::Precondition("junction label is not non-decreasing".into()));
    }
    let f0 = f.points()[0].1.clone();
    let first_slope = f.right_slope(&Q::zero());
    if f0.is_zero() && !first_slope.is_positive() {
        return Err(ParametricError::DegenerateJunction(junction));
    }
    if f0.is_negative() {
        return Err(ParametricError::Precondition("junction label is negative".into()));
    }
    let ratio = |x: &Q| -> Q {
        let fx = f.at(x);
        if fx.is_zero() {
            Q::one() / &first_slope
        } else {
            x / fx
        }
    };
    let mut xs: BTreeSet<Q> = f.points().iter().map(|p| p.0.clone()).collect();
    let pts = f.points();
    for i in 0..pts.len() {
        let b = f.right_slope(&pts[i].0);
        let a = &pts[i].1 - &b * &pts[i].0;
        if a.is_zero() {
            continue;
        }
        let upper = pts.get(i + 1).map(|p| &p.0);
        for y in g.breakpoint_xs() {
            let den = Q::one() - y * &b;
            if den.is_zero() {
                continue;
            }
            let x = y * &a / den;
            if x > pts[i].0 && upper.map_or(true, |u| x < *u) {
                xs.insert(x);
            }
        }
    }
    Ok(PwlFn::sample(xs, |x| f.at(x) * g.at(&ratio(x))))
}

/// Branch shares `(ν_1, ν_2)` of the flow value for two parallel branches with sink labels `f1`, `f2`.
pub fn parallel_split(f1: &PwlFn, f2: &PwlFn) -> Result<(PwlFn, PwlFn), ParametricError> {
    let lo = [pseudo_inverse(f1, InverseSide::Lower)?, pseudo_inverse(f2, InverseSide::Lower)?];
    let hi = [pseudo_inverse(f1, InverseSide::Upper)?, pseudo_inverse(f2, InverseSide::Upper)?];
    let mut rhos: BTreeSet<Q> = BTreeSet::new();
    for f in [f1, f2] {
        rhos.extend(f.points().iter().map(|p| p.1.clone()));
    }
    let mut anchors: BTreeMap<Q, (Q, Q)> = BTreeMap::new();
    let mut add = |a: Q, b: Q| {
        anchors.insert(&a + &b, (a, b));
    };
    for rho in &rhos {
        add(lo[0].eval(rho)?, lo[1].eval(rho)?);
        add(hi[0].eval(rho)?, hi[1].eval(rho)?);
    }
    let beyond = rhos.last().unwrap() + Q::one();
    add(lo[0].eval(&beyond)?, lo[1].eval(&beyond)?);
    let pts: Vec<(Q, (Q, Q))> = anchors.into_iter().collect();
    let branch = |i: usize| -> Result<PwlFn, ParametricError> {
        let points: Vec<(Q, Q)> = pts.iter().map(|(x, v)| (x.clone(), if i == 0 { v.0.clone() } else { v.1.clone() })).collect();
        let n = points.len();
        let slope = if n >= 2 {
            (&points[n - 1].1 - &points[n - 2].1) / (&points[n - 1].0 - &points[n - 2].0)
        } else {
            Q::zero()
        };
        Ok(PwlFn::new(points, slope)?)
    };
    Ok((branch(0)?, branch(1)?))
}

/// Labels of a graph whose second part hangs off `junction`, the sink of the first part.
pub fn series_compose(
    first: &ParametricLabels,
    second: &ParametricLabels,
    junction: VertexId,
) -> Result<ParametricLabels, ParametricError> {
    Ok(series_parts(first, second, junction)?.0)
}

fn series_parts(
    first: &ParametricLabels,
    second: &ParametricLabels,
    junction: VertexId,
) -> Result<(ParametricLabels, PwlFn), ParametricError> {
    if first.sink != junction || second.source != junction {
        return Err(ParametricError::Precondition("parts do not meet at the junction".into()));
    }
    let f = first.labels[&junction].clone();
    let mut labels = first.labels.clone();
    for (&v, g) in &second.labels {
        if v != junction {
            labels.insert(v, series_transform(&f, g, junction)?);
        }
    }
    let mut extended_junctions = first.extended_junctions.clone();
    extended_junctions.extend(second.extended_junctions.iter().copied());
    if f.points()[0].1.is_zero() {
        extended_junctions.push(junction);
    }
    Ok((ParametricLabels { source: first.source, sink: second.sink, labels, extended_junctions }, f))
}

/// Labels of two graphs sharing both terminals, with the split of the flow value.
pub fn parallel_compose(
    left: &ParametricLabels,
    right: &ParametricLabels,
) -> Result<(ParametricLabels, PwlFn, PwlFn), ParametricError> {
    if left.source != right.source || left.sink != right.sink {
        return Err(ParametricError::Precondition("branches do not share terminals".into()));
    }
    let (nu1, nu2) = parallel_split(left.sink_label(), right.sink_label())?;
    let mut labels = BTreeMap::new();
    for (branch, nu) in [(left, &nu1), (right, &nu2)] {
        for (&v, g) in &branch.labels {
            if v != branch.source && v != branch.sink {
                labels.insert(v, compose_monotone(g, nu)?);
            }
        }
    }
    let sink = pointwise_min(
        &compose_monotone(left.sink_label(), &nu1)?,
        &compose_monotone(right.sink_label(), &nu2)?,
    );
    labels.insert(left.source, PwlFn::constant(Q::one()));
    labels.insert(left.sink, sink);
    let mut extended_junctions = left.extended_junctions.clone();
    extended_junctions.extend(right.extended_junctions.iter().copied());
    Ok((ParametricLabels { source: left.source, sink: left.sink, labels, extended_junctions }, nu1, nu2))
}

/// Solves every node of the tree bottom-up.
///
/// Flows are transformed alongside labels: series parts scale like labels, parallel branches are
/// reparametrized by their split.
pub fn parametric_solve(
    tree: &SpTree,
    is_resetting: impl Fn(ArcId) -> bool + Copy,
    capacities: &[Q],
) -> Result<(ParametricLabels, ParametricFlow), ParametricError> {
    match &tree.kind {
        SpKind::Leaf(a) => {
            let labels = BTreeMap::from([
                (tree.source, PwlFn::constant(Q::one())),
                (tree.sink, rho_leaf(&capacities[*a], is_resetting(*a))),
            ]);
            Ok((
                ParametricLabels { source: tree.source, sink: tree.sink, labels, extended_junctions: Vec::new() },
                ParametricFlow { flows: BTreeMap::from([(*a, PwlFn::identity())]), splits: Vec::new() },
            ))
        }
        SpKind::Series { left, right, junction } => {
            let (l1, fl1) = parametric_solve(left, is_resetting, capacities)?;
            let (l2, fl2) = parametric_solve(right, is_resetting, capacities)?;
            let (labels, f) = series_parts(&l1, &l2, *junction)?;
            let mut flows = fl1.flows;
            for (a, chi) in fl2.flows {
                flows.insert(a, series_transform(&f, &chi, *junction)?);
            }
            let mut splits = fl1.splits;
            splits.extend(fl2.splits);
            Ok((labels, ParametricFlow { flows, splits }))
        }
        SpKind::Parallel { left, right } => {
            let (l1, fl1) = parametric_solve(left, is_resetting, capacities)?;
            let (l2, fl2) = parametric_solve(right, is_resetting, capacities)?;
            let (labels, nu1, nu2) = parallel_compose(&l1, &l2)?;
            let mut flows = BTreeMap::new();
            for (branch, nu) in [(&fl1, &nu1), (&fl2, &nu2)] {
                for (&a, chi) in &branch.flows {
                    flows.insert(a, compose_monotone(chi, nu)?);
                }
            }
            let mut splits = Vec::with_capacity(fl1.splits.len() + fl2.splits.len() + 1);
            splits.push(ParallelSplit {
                source: tree.source,
                sink: tree.sink,
                left_arcs: left.arcs(),
                right_arcs: right.arcs(),
                left: nu1,
                right: nu2,
            });
            splits.extend(fl1.splits);
            splits.extend(fl2.splits);
            Ok((labels, ParametricFlow { flows, splits }))
        }
    }
}

/// Labels and flows for flow value `value` and source label `source_label`.
pub fn eval_thin_flow(
    labels: &ParametricLabels,
    flows: &ParametricFlow,
    value: &Q,
    source_label: &Q,
) -> Result<(BTreeMap<VertexId, Q>, BTreeMap<ArcId, Q>), ParametricError> {
    if value.is_negative() || source_label.is_negative() {
        return Err(ParametricError::Precondition("flow value and source label must be non-negative".into()));
    }
    if source_label.is_zero() {
        if value.is_positive() {
            return Err(ParametricError::Precondition("positive flow value with source label 0".into()));
        }
        return Ok((
            labels.labels.keys().map(|&v| (v, Q::zero())).collect(),
            flows.flows.keys().map(|&a| (a, Q::zero())).collect(),
        ));
    }
    let x = value / source_label;
    Ok((
        labels.labels.iter().map(|(&v, f)| (v, source_label * f.at(&x))).collect(),
        flows.flows.iter().map(|(&a, f)| (a, source_label * f.at(&x))).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, q};
    use crate::sp::decompose;

    fn pwl(points: &[(Q, Q)], slope: Q) -> PwlFn {
        PwlFn::new(points.to_vec(), slope).unwrap()
    }

    #[test]
    fn leaves() {
        assert_eq!(rho_leaf(&int(2), false), pwl(&[(int(0), int(1)), (int(2), int(1))], q(1, 2)));
        assert_eq!(rho_leaf(&int(2), true), PwlFn::linear(int(0), q(1, 2)));
        assert_eq!(rho_leaf(&int(2), false).num_breakpoints(), 1);
        assert_eq!(rho_leaf(&int(2), true).num_breakpoints(), 0);
    }

    #[test]
    fn resetting_parallel_to_free_arc() {
        let tree = decompose(2, &[(0, 0, 1), (1, 0, 1)]).unwrap();
        let (labels, flows) = parametric_solve(&tree, |a| a == 0, &[int(1), int(1)]).unwrap();
        let expected = pwl(&[(int(0), int(0)), (int(1), int(1)), (int(2), int(1))], q(1, 2));
        assert_eq!(labels.sink_label(), &expected);
        assert_eq!(labels.num_breakpoints(), 2);
        let split = &flows.splits[0];
        assert_eq!(split.left, pwl(&[(int(0), int(0)), (int(1), int(1)), (int(2), int(1))], q(1, 2)));
        assert_eq!(split.right, pwl(&[(int(0), int(0)), (int(1), int(0)), (int(2), int(1))], q(1, 2)));
    }

    #[test]
    fn equal_free_arcs_split_evenly() {
        let tree = decompose(2, &[(0, 0, 1), (1, 0, 1)]).unwrap();
        let (labels, flows) = parametric_solve(&tree, |_| false, &[int(1), int(1)]).unwrap();
        assert_eq!(flows.flows[&0], PwlFn::linear(int(0), q(1, 2)));
        assert_eq!(flows.flows[&1], PwlFn::linear(int(0), q(1, 2)));
        assert_eq!(labels.sink_label(), &pwl(&[(int(0), int(1)), (int(2), int(1))], q(1, 2)));
    }

    #[test]
    fn series_of_free_arcs() {
        let tree = decompose(3, &[(0, 0, 1), (1, 1, 2)]).unwrap();
        let (labels, flows) = parametric_solve(&tree, |_| false, &[int(1), int(2)]).unwrap();
        let max1 = pwl(&[(int(0), int(1)), (int(1), int(1))], int(1));
        assert_eq!(labels.label(1), &max1);
        assert_eq!(labels.sink_label(), &max1);
        assert_eq!(labels.num_breakpoints(), 1);
        assert_eq!(flows.flows[&1], PwlFn::identity());
    }

    #[test]
    fn resetting_first_arc_uses_right_limit() {
        let tree = decompose(3, &[(0, 0, 1), (1, 1, 2)]).unwrap();
        let (labels, _) = parametric_solve(&tree, |a| a == 0, &[int(1), int(1)]).unwrap();
        assert_eq!(labels.label(1), &PwlFn::identity());
        assert_eq!(labels.sink_label(), &PwlFn::identity());
        assert_eq!(labels.extended_junctions, vec![1]);
    }

    #[test]
    fn scaling_in_evaluation() {
        let tree = decompose(2, &[(0, 0, 1)]).unwrap();
        let (labels, flows) = parametric_solve(&tree, |_| false, &[int(1)]).unwrap();
        let (l, x) = eval_thin_flow(&labels, &flows, &int(3), &int(2)).unwrap();
        assert_eq!(l[&1], int(3));
        assert_eq!(x[&0], int(3));
        assert!(eval_thin_flow(&labels, &flows, &int(1), &int(0)).is_err());
        let (l, _) = eval_thin_flow(&labels, &flows, &int(0), &int(0)).unwrap();
        assert!(l.values().all(|v| v.is_zero()));
    }

    #[test]
    fn degenerate_junction_is_reported() {
        let zero = PwlFn::constant(int(0));
        assert_eq!(series_transform(&zero, &PwlFn::identity(), 7), Err(ParametricError::DegenerateJunction(7)));
    }
}
