//! Series-parallel recognition and decomposition trees for two-terminal DAGs.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};

use crate::network::{ArcId, Network, VertexId};

/// An arc of the multigraph to decompose: `(id, tail, head)`.
pub type ArcEnds = (ArcId, VertexId, VertexId);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpKind {
    Leaf(ArcId),
    Series { left: Box<SpTree>, right: Box<SpTree>, junction: VertexId },
    Parallel { left: Box<SpTree>, right: Box<SpTree> },
}

/// A binary decomposition tree. Every node knows the terminals of the subgraph it spans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpTree {
    pub source: VertexId,
    pub sink: VertexId,
    pub kind: SpKind,
}

/// What is left after exhaustive series and parallel reductions of a non-SP graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedGraph {
    /// Remaining edges as `(tail, head, arcs merged into the edge)`.
    pub edges: Vec<(VertexId, VertexId, Vec<ArcId>)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpError {
    #[error("not a two-terminal DAG: {0}")]
    NotTwoTerminal(String),
    #[error("not series-parallel; irreducible remainder has {} edges", .0.edges.len())]
    NotSeriesParallel(ReducedGraph),
}

impl SpTree {
    pub fn leaf(arc: ArcId, source: VertexId, sink: VertexId) -> Self {
        SpTree { source, sink, kind: SpKind::Leaf(arc) }
    }

    /// Leaves with their terminals, left to right.
    pub fn replay(&self) -> Vec<ArcEnds> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<ArcEnds>) {
        match &self.kind {
            SpKind::Leaf(a) => out.push((*a, self.source, self.sink)),
            SpKind::Series { left, right, .. } | SpKind::Parallel { left, right } => {
                left.collect(out);
                right.collect(out);
            }
        }
    }

    pub fn arcs(&self) -> Vec<ArcId> {
        let mut a: Vec<ArcId> = self.replay().into_iter().map(|l| l.0).collect();
        a.sort_unstable();
        a
    }

    pub fn vertices(&self) -> BTreeSet<VertexId> {
        self.replay().into_iter().flat_map(|(_, t, h)| [t, h]).collect()
    }

    pub fn min_arc(&self) -> ArcId {
        match &self.kind {
            SpKind::Leaf(a) => *a,
            SpKind::Series { left, right, .. } | SpKind::Parallel { left, right } => left.min_arc().min(right.min_arc()),
        }
    }

    /// Checks that terminals compose correctly at every node.
    pub fn is_consistent(&self) -> bool {
        match &self.kind {
            SpKind::Leaf(_) => true,
            SpKind::Series { left, right, junction } => {
                left.source == self.source
                    && left.sink == *junction
                    && right.source == *junction
                    && right.sink == self.sink
                    && left.is_consistent()
                    && right.is_consistent()
            }
            SpKind::Parallel { left, right } => {
                left.source == self.source
                    && right.source == self.source
                    && left.sink == self.sink
                    && right.sink == self.sink
                    && left.is_consistent()
                    && right.is_consistent()
            }
        }
    }

    pub fn to_json(&self, net: &Network) -> Value {
        let terminals = |t: &SpTree| (net.vertex_name(t.source).to_string(), net.vertex_name(t.sink).to_string());
        let (s, t) = terminals(self);
        match &self.kind {
            SpKind::Leaf(a) => json!({"leaf": net.arc(*a).id, "source": s, "sink": t}),
            SpKind::Series { left, right, junction } => json!({
                "series": [left.to_json(net), right.to_json(net)],
                "junction": net.vertex_name(*junction),
                "source": s,
                "sink": t,
            }),
            SpKind::Parallel { left, right } => json!({
                "parallel": [left.to_json(net), right.to_json(net)],
                "source": s,
                "sink": t,
            }),
        }
    }
}

struct Edge {
    tail: VertexId,
    head: VertexId,
    tree: SpTree,
    key: ArcId,
}

/// Decomposes the multigraph on `num_vertices` vertices with the given arcs.
///
/// Reductions are applied exhaustively: parallel pairs first, merging the two edges with the
/// lowest arc ids, then series contractions at the lowest-indexed eligible vertex.
pub fn decompose(num_vertices: usize, arcs: &[ArcEnds]) -> Result<SpTree, SpError> {
    let (source, sink) = terminals(num_vertices, arcs)?;
    let mut edges: BTreeMap<ArcId, Edge> = arcs
        .iter()
        .map(|&(a, t, h)| (a, Edge { tail: t, head: h, tree: SpTree::leaf(a, t, h), key: a }))
        .collect();
    loop {
        if let Some((k1, k2)) = lowest_parallel_pair(&edges) {
            let e1 = edges.remove(&k1).unwrap();
            let e2 = edges.remove(&k2).unwrap();
            let tree = SpTree {
                source: e1.tail,
                sink: e1.head,
                kind: SpKind::Parallel { left: Box::new(e1.tree), right: Box::new(e2.tree) },
            };
            edges.insert(k1, Edge { tail: e1.tail, head: e1.head, tree, key: k1 });
            continue;
        }
        if let Some((k_in, k_out, v)) = series_candidate(&edges, source, sink) {
            let e_in = edges.remove(&k_in).unwrap();
            let e_out = edges.remove(&k_out).unwrap();
            let key = e_in.key.min(e_out.key);
            let tree = SpTree {
                source: e_in.tail,
                sink: e_out.head,
                kind: SpKind::Series { left: Box::new(e_in.tree), right: Box::new(e_out.tree), junction: v },
            };
            edges.insert(key, Edge { tail: e_in.tail, head: e_out.head, tree, key });
            continue;
        }
        break;
    }
    if edges.len() == 1 {
        let e = edges.into_values().next().unwrap();
        if e.tail == source && e.head == sink {
            return Ok(e.tree);
        }
        return Err(SpError::NotSeriesParallel(ReducedGraph { edges: vec![(e.tail, e.head, e.tree.arcs())] }));
    }
    Err(SpError::NotSeriesParallel(ReducedGraph {
        edges: edges.values().map(|e| (e.tail, e.head, e.tree.arcs())).collect(),
    }))
}

fn lowest_parallel_pair(edges: &BTreeMap<ArcId, Edge>) -> Option<(ArcId, ArcId)> {
    let mut first_by_ends: BTreeMap<(VertexId, VertexId), ArcId> = BTreeMap::new();
    let mut best: Option<(ArcId, ArcId)> = None;
    for (&k, e) in edges {
        match first_by_ends.get(&(e.tail, e.head)) {
            Some(&k1) => {
                if best.map_or(true, |b| (k1, k) < b) {
                    best = Some((k1, k));
                }
            }
            None => {
                first_by_ends.insert((e.tail, e.head), k);
            }
        }
    }
    best
}

fn series_candidate(edges: &BTreeMap<ArcId, Edge>, source: VertexId, sink: VertexId) -> Option<(ArcId, ArcId, VertexId)> {
    let mut ins: BTreeMap<VertexId, Vec<ArcId>> = BTreeMap::new();
    let mut outs: BTreeMap<VertexId, Vec<ArcId>> = BTreeMap::new();
    for (&k, e) in edges {
        outs.entry(e.tail).or_default().push(k);
        ins.entry(e.head).or_default().push(k);
    }
    ins.iter().find_map(|(&v, i)| {
        let o = outs.get(&v)?;
        (v != source && v != sink && i.len() == 1 && o.len() == 1).then(|| (i[0], o[0], v))
    })
}

fn terminals(num_vertices: usize, arcs: &[ArcEnds]) -> Result<(VertexId, VertexId), SpError> {
    if arcs.is_empty() {
        return Err(SpError::NotTwoTerminal("no arcs".into()));
    }
    let mut indeg = vec![0usize; num_vertices];
    let mut outdeg = vec![0usize; num_vertices];
    for &(a, t, h) in arcs {
        if t >= num_vertices || h >= num_vertices {
            return Err(SpError::NotTwoTerminal(format!("arc {a} leaves the vertex range")));
        }
        if t == h {
            return Err(SpError::NotTwoTerminal(format!("arc {a} is a loop")));
        }
        outdeg[t] += 1;
        indeg[h] += 1;
    }
    let sources: Vec<VertexId> = (0..num_vertices).filter(|&v| indeg[v] == 0).collect();
    let sinks: Vec<VertexId> = (0..num_vertices).filter(|&v| outdeg[v] == 0).collect();
    if sources.len() != 1 || sinks.len() != 1 || sources[0] == sinks[0] {
        return Err(SpError::NotTwoTerminal(format!(
            "{} vertices without in-arcs and {} without out-arcs",
            sources.len(),
            sinks.len()
        )));
    }
    // Kahn's algorithm detects cycles.
    let mut remaining = indeg.clone();
    let mut stack = sources.clone();
    let mut seen = 0;
    while let Some(v) = stack.pop() {
        seen += 1;
        for &(_, t, h) in arcs {
            if t == v {
                remaining[h] -= 1;
                if remaining[h] == 0 {
                    stack.push(h);
                }
            }
        }
    }
    if seen != num_vertices {
        return Err(SpError::NotTwoTerminal("the graph has a cycle".into()));
    }
    Ok((sources[0], sinks[0]))
}

/// Decomposes the active subgraph of a network.
pub fn decompose_network(net: &Network, arcs: &[ArcId]) -> Result<SpTree, SpError> {
    let ends: Vec<ArcEnds> = arcs.iter().map(|&a| (a, net.arc(a).tail, net.arc(a).head)).collect();
    decompose(net.num_vertices(), &ends)
}
