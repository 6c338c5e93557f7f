//! Seeded random instance generators shared by the integration tests.
#![allow(dead_code)]

use flowtime::equilibrium::InflowProfile;
use flowtime::network::Arc;
use flowtime::rational::{int, q};
use flowtime::{Network, ShortestPathGraph, StepFn, Q};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn capacity(rng: &mut impl Rng) -> Q {
    q(rng.gen_range(1..=4), rng.gen_range(1..=2))
}

/// A value in `{0, 1/4, ..., 6}`.
pub fn flow_value(rng: &mut impl Rng) -> Q {
    q(rng.gen_range(0..=24), 4)
}

fn names(n: usize, sink: usize) -> Vec<String> {
    (0..n)
        .map(|v| match v {
            0 => "s".to_string(),
            v if v == sink => "t".to_string(),
            v => format!("v{v}"),
        })
        .collect()
}

fn network(n: usize, sink: usize, ends: &[(usize, usize)], rng: &mut impl Rng, max_transit: i64) -> Network {
    let arcs = ends
        .iter()
        .enumerate()
        .map(|(i, &(tail, head))| Arc {
            id: format!("a{i}"),
            tail,
            head,
            capacity: capacity(rng),
            transit: int(rng.gen_range(0..=max_transit)),
        })
        .collect();
    Network::new(names(n, sink), arcs, 0, sink).expect("generated network is well formed")
}

/// Arc ends of a random two-terminal series-parallel multigraph with `arcs` arcs; source 0, sink 1.
pub fn sp_ends(rng: &mut impl Rng, arcs: usize) -> (usize, Vec<(usize, usize)>) {
    let mut ends = vec![(0usize, 1usize)];
    let mut n = 2;
    while ends.len() < arcs {
        let i = rng.gen_range(0..ends.len());
        let (u, v) = ends[i];
        if rng.gen_bool(0.5) {
            ends[i] = (u, n);
            ends.push((n, v));
            n += 1;
        } else {
            ends.push((u, v));
        }
    }
    ends.shuffle(rng);
    (n, ends)
}

pub fn random_sp_network(rng: &mut impl Rng, arcs: usize, max_transit: i64) -> Network {
    let (n, ends) = sp_ends(rng, arcs);
    network(n, 1, &ends, rng, max_transit)
}

/// A random layered DAG on `n` vertices in topological order, source 0 and sink `n - 1`.
/// Every vertex after the source has an in-arc from an earlier vertex.
pub fn random_dag_network(rng: &mut impl Rng, n: usize, arcs: usize, max_transit: i64) -> Network {
    let mut ends: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    while ends.len() < arcs {
        let v = rng.gen_range(1..n);
        ends.push((rng.gen_range(0..v), v));
    }
    ends.shuffle(rng);
    network(n, n - 1, &ends, rng, max_transit)
}

/// All arcs active, each resetting with probability `p`.
pub fn all_active(rng: &mut impl Rng, net: &Network, p: f64) -> ShortestPathGraph {
    let resetting: Vec<usize> = (0..net.num_arcs()).filter(|_| rng.gen_bool(p)).collect();
    ShortestPathGraph::new(net, 0..net.num_arcs(), resetting).expect("acyclic and reachable")
}

/// A random active subgraph that keeps every vertex reachable, with random resetting arcs.
pub fn random_active(rng: &mut impl Rng, net: &Network, p: f64) -> ShortestPathGraph {
    loop {
        let active: Vec<usize> = (0..net.num_arcs()).filter(|_| rng.gen_bool(0.75)).collect();
        let resetting: Vec<usize> = active.iter().copied().filter(|_| rng.gen_bool(p)).collect();
        if let Ok(g) = ShortestPathGraph::new(net, active, resetting) {
            return g;
        }
    }
}

/// Number of LCP variables for `g`.
pub fn lcp_size(net: &Network, g: &ShortestPathGraph) -> usize {
    net.num_vertices() + g.active_arcs().len() + g.non_resetting_arcs().len()
}

/// SP graph with all arcs active; half of the time a random DAG instead. At most `limit` LCP variables.
pub fn random_thin_flow_instance(rng: &mut impl Rng, limit: usize) -> (Network, ShortestPathGraph) {
    loop {
        let (net, g) = if rng.gen_bool(0.5) {
            let m = rng.gen_range(1..=8);
            let net = random_sp_network(rng, m, 2);
            let g = all_active(rng, &net, 0.3);
            (net, g)
        } else {
            let n = rng.gen_range(3..=6);
            let m = rng.gen_range(n - 1..=n + 4);
            let net = random_dag_network(rng, n, m, 2);
            let g = random_active(rng, &net, 0.3);
            (net, g)
        };
        if lcp_size(&net, &g) <= limit {
            return (net, g);
        }
    }
}

/// Piecewise-constant inflow with at most `max_pieces` pieces and jumps at multiples of 1/2.
pub fn random_inflow(rng: &mut impl Rng, max_pieces: usize, horizon: Q) -> InflowProfile {
    let pieces = rng.gen_range(1..=max_pieces);
    let mut starts: Vec<i64> = (1..12).collect();
    starts.shuffle(rng);
    let mut starts: Vec<i64> = starts.into_iter().take(pieces - 1).collect();
    starts.sort();
    let rate = std::iter::once(0)
        .chain(starts)
        .map(|s| (q(s, 2), int(rng.gen_range(0..=4))))
        .collect();
    InflowProfile::new(StepFn::new(rate).expect("starts increase"), horizon).expect("non-negative")
}

/// A random SP or DAG network for the equilibrium engine.
pub fn random_dynamic_network(rng: &mut impl Rng) -> Network {
    if rng.gen_bool(0.5) {
        let m = rng.gen_range(1..=6);
        random_sp_network(rng, m, 3)
    } else {
        let n = rng.gen_range(3..=5);
        let m = rng.gen_range(n - 1..=n + 3);
        random_dag_network(rng, n, m, 3)
    }
}

/// Adds a tent of height `height` to `f` on `[start, end]`, peaking at the midpoint.
pub fn add_tent(f: &flowtime::PwlFn, start: &Q, end: &Q, height: &Q) -> flowtime::PwlFn {
    let mid = (start + end) / int(2);
    let mut points: Vec<(Q, Q)> = f.points().iter().filter(|p| p.0 < *start || p.0 > *end).cloned().collect();
    points.push((start.clone(), f.at(start)));
    points.push((mid.clone(), f.at(&mid) + height));
    points.push((end.clone(), f.at(end)));
    points.sort();
    flowtime::PwlFn::new(points, f.final_slope().clone()).expect("tent keeps x increasing")
}

/// Corrupts one phase of a trace: a label (`kind` 0), a cumulative flow (1) or a queue (2).
pub fn corrupt(
    trace: &flowtime::equilibrium::EquilibriumTrace,
    net: &Network,
    phase: usize,
    kind: usize,
) -> flowtime::equilibrium::EquilibriumTrace {
    let mut bad = trace.clone();
    let p = &trace.phases[phase];
    let height = (&p.end - &p.start) / int(4);
    match kind % 3 {
        0 => {
            let v = (0..net.num_vertices()).find(|&v| v != net.source()).unwrap();
            bad.labels[v] = add_tent(&trace.labels[v], &p.start, &p.end, &height);
        }
        1 => bad.cumulative_flows[0] = add_tent(&trace.cumulative_flows[0], &p.start, &p.end, &height),
        _ => bad.queues[0] = add_tent(&trace.queues[0], &p.start, &p.end, &height),
    }
    bad
}
