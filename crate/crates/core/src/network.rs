//! Networks, static shortest-path labels and shortest-path subgraphs.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_traits::{Signed, Zero};

use crate::rational::Q;

pub type VertexId = usize;
pub type ArcId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    pub id: String,
    pub tail: VertexId,
    pub head: VertexId,
    pub capacity: Q,
    pub transit: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NetworkError {
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate arc `{0}`")]
    DuplicateArc(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("arc `{arc}` refers to vertex index {vertex} out of range")]
    DanglingArc { arc: String, vertex: VertexId },
    #[error("source and sink must be distinct")]
    SourceIsSink,
    #[error("not a shortest-path graph: {0}")]
    NotShortestPathGraph(String),
    #[error("unknown arc `{0}`")]
    UnknownArc(String),
}

/// A directed multigraph with capacities, transit times and a source–sink pair.
///
/// Vertices and arcs are addressed by dense indices; the textual ids are kept for I/O.
/// Arc order is the order of insertion and doubles as the tie-breaking order everywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    vertices: Vec<String>,
    arcs: Vec<Arc>,
    source: VertexId,
    sink: VertexId,
}

impl Network {
    pub fn new(vertices: Vec<String>, arcs: Vec<Arc>, source: VertexId, sink: VertexId) -> Result<Self, NetworkError> {
        let mut seen = BTreeSet::new();
        for v in &vertices {
            if !seen.insert(v.as_str()) {
                return Err(NetworkError::DuplicateVertex(v.clone()));
            }
        }
        let mut arc_ids = BTreeSet::new();
        for a in &arcs {
            if !arc_ids.insert(a.id.as_str()) {
                return Err(NetworkError::DuplicateArc(a.id.clone()));
            }
            for v in [a.tail, a.head] {
                if v >= vertices.len() {
                    return Err(NetworkError::DanglingArc { arc: a.id.clone(), vertex: v });
                }
            }
        }
        for v in [source, sink] {
            if v >= vertices.len() {
                return Err(NetworkError::UnknownVertex(v.to_string()));
            }
        }
        if source == sink {
            return Err(NetworkError::SourceIsSink);
        }
        Ok(Network { vertices, arcs, source, sink })
    }

    pub fn builder() -> NetworkBuilder {
        NetworkBuilder::default()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn sink(&self) -> VertexId {
        self.sink
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, a: ArcId) -> &Arc {
        &self.arcs[a]
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_id(&self, name: &str) -> Option<VertexId> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn arc_id(&self, name: &str) -> Option<ArcId> {
        self.arcs.iter().position(|a| a.id == name)
    }

    pub fn capacities(&self) -> Vec<Q> {
        self.arcs.iter().map(|a| a.capacity.clone()).collect()
    }

    pub fn in_arcs(&self, v: VertexId) -> impl Iterator<Item = ArcId> + '_ {
        (0..self.arcs.len()).filter(move |&a| self.arcs[a].head == v)
    }

    pub fn out_arcs(&self, v: VertexId) -> impl Iterator<Item = ArcId> + '_ {
        (0..self.arcs.len()).filter(move |&a| self.arcs[a].tail == v)
    }
}

/// Builds a [`Network`] by name, creating vertices on first mention.
#[derive(Debug, Default)]
pub struct NetworkBuilder {
    vertices: Vec<String>,
    arcs: Vec<(String, String, String, Q, Q)>,
    source: Option<String>,
    sink: Option<String>,
}

impl NetworkBuilder {
    pub fn vertex(mut self, name: &str) -> Self {
        self.touch(name);
        self
    }

    pub fn arc(mut self, id: &str, tail: &str, head: &str, capacity: Q, transit: Q) -> Self {
        self.touch(tail);
        self.touch(head);
        self.arcs.push((id.into(), tail.into(), head.into(), capacity, transit));
        self
    }

    pub fn source(mut self, name: &str) -> Self {
        self.touch(name);
        self.source = Some(name.into());
        self
    }

    pub fn sink(mut self, name: &str) -> Self {
        self.touch(name);
        self.sink = Some(name.into());
        self
    }

    fn touch(&mut self, name: &str) {
        if !self.vertices.iter().any(|v| v == name) {
            self.vertices.push(name.into());
        }
    }

    pub fn build(self) -> Result<Network, NetworkError> {
        let index = |name: &str| self.vertices.iter().position(|v| v == name).unwrap();
        let source = self.source.as_deref().unwrap_or("s");
        let sink = self.sink.as_deref().unwrap_or("t");
        let source = self.vertices.iter().position(|v| v == source).ok_or_else(|| NetworkError::UnknownVertex(source.into()))?;
        let sink = self.vertices.iter().position(|v| v == sink).ok_or_else(|| NetworkError::UnknownVertex(sink.into()))?;
        let arcs = self
            .arcs
            .iter()
            .map(|(id, t, h, c, tau)| Arc {
                id: id.clone(),
                tail: index(t),
                head: index(h),
                capacity: c.clone(),
                transit: tau.clone(),
            })
            .collect();
        Network::new(self.vertices.clone(), arcs, source, sink)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NetworkViolation {
    NonPositiveCapacity { arc: ArcId },
    NegativeTransit { arc: ArcId },
    ZeroTransitCycle { arcs: Vec<ArcId> },
    Unreachable { vertex: VertexId },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<NetworkViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn describe(&self, net: &Network) -> Vec<String> {
        self.violations
            .iter()
            .map(|v| match v {
                NetworkViolation::NonPositiveCapacity { arc } => {
                    format!("arc `{}` has non-positive capacity", net.arc(*arc).id)
                }
                NetworkViolation::NegativeTransit { arc } => {
                    format!("arc `{}` has negative transit time", net.arc(*arc).id)
                }
                NetworkViolation::ZeroTransitCycle { arcs } => format!(
                    "zero-transit cycle through arcs {}",
                    arcs.iter().map(|a| format!("`{}`", net.arc(*a).id)).collect::<Vec<_>>().join(", ")
                ),
                NetworkViolation::Unreachable { vertex } => {
                    format!("vertex `{}` is not reachable from the source", net.vertex_name(*vertex))
                }
            })
            .collect()
    }
}

impl fmt::Display for NetworkViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

pub fn validate_network(net: &Network) -> ValidationReport {
    let mut violations = Vec::new();
    for (a, arc) in net.arcs.iter().enumerate() {
        if !arc.capacity.is_positive() {
            violations.push(NetworkViolation::NonPositiveCapacity { arc: a });
        }
        if arc.transit.is_negative() {
            violations.push(NetworkViolation::NegativeTransit { arc: a });
        }
    }
    let zero_arcs: Vec<ArcId> = (0..net.num_arcs()).filter(|&a| net.arc(a).transit.is_zero()).collect();
    for cycle in cycles_per_component(net, &zero_arcs) {
        violations.push(NetworkViolation::ZeroTransitCycle { arcs: cycle });
    }
    let reach = reachable(net, net.source, |_| true);
    for v in 0..net.num_vertices() {
        if !reach[v] {
            violations.push(NetworkViolation::Unreachable { vertex: v });
        }
    }
    ValidationReport { violations }
}

pub(crate) fn reachable(net: &Network, from: VertexId, mut usable: impl FnMut(ArcId) -> bool) -> Vec<bool> {
    let mut seen = vec![false; net.num_vertices()];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        for a in net.out_arcs(v) {
            let h = net.arc(a).head;
            if usable(a) && !seen[h] {
                seen[h] = true;
                queue.push_back(h);
            }
        }
    }
    seen
}

/// One directed cycle per strongly connected component of the subgraph spanned by `arcs`.
fn cycles_per_component(net: &Network, arcs: &[ArcId]) -> Vec<Vec<ArcId>> {
    let n = net.num_vertices();
    let mut out_adj: Vec<Vec<ArcId>> = vec![Vec::new(); n];
    for &a in arcs {
        out_adj[net.arc(a).tail].push(a);
    }
    let comp = strongly_connected(n, |v| out_adj[v].iter().map(|&a| net.arc(a).head).collect());
    let mut cycles = Vec::new();
    let mut done = BTreeSet::new();
    for &a in arcs {
        let arc = net.arc(a);
        if comp[arc.tail] != comp[arc.head] || done.contains(&comp[arc.tail]) {
            continue;
        }
        done.insert(comp[arc.tail]);
        // Close the cycle with a shortest path from head back to tail inside the component.
        let c = comp[arc.tail];
        let mut pred: BTreeMap<VertexId, ArcId> = BTreeMap::new();
        let mut queue = VecDeque::from([arc.head]);
        let mut seen = BTreeSet::from([arc.head]);
        while let Some(v) = queue.pop_front() {
            if v == arc.tail {
                break;
            }
            for &b in &out_adj[v] {
                let h = net.arc(b).head;
                if comp[h] == c && seen.insert(h) {
                    pred.insert(h, b);
                    queue.push_back(h);
                }
            }
        }
        let mut path = Vec::new();
        let mut v = arc.tail;
        while v != arc.head {
            let b = pred[&v];
            path.push(b);
            v = net.arc(b).tail;
        }
        path.reverse();
        let mut cycle = vec![a];
        cycle.extend(path);
        cycles.push(cycle);
    }
    cycles
}

fn strongly_connected(n: usize, succ: impl Fn(usize) -> Vec<usize>) -> Vec<usize> {
    // Kosaraju with explicit stacks.
    let adj: Vec<Vec<usize>> = (0..n).map(&succ).collect();
    let mut radj = vec![Vec::new(); n];
    for (v, ws) in adj.iter().enumerate() {
        for &w in ws {
            radj[w].push(v);
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    for start in 0..n {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut stack = vec![(start, 0usize)];
        while let Some((v, i)) = stack.pop() {
            if i < adj[v].len() {
                stack.push((v, i + 1));
                let w = adj[v][i];
                if !visited[w] {
                    visited[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    for &start in order.iter().rev() {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = count;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &w in &radj[v] {
                if comp[w] == usize::MAX {
                    comp[w] = count;
                    stack.push(w);
                }
            }
        }
        count += 1;
    }
    comp
}

/// Earliest arrival times from the source with respect to transit times.
pub fn static_shortest_labels(net: &Network) -> Vec<Q> {
    let n = net.num_vertices();
    let mut dist: Vec<Option<Q>> = vec![None; n];
    let mut done = vec![false; n];
    dist[net.source] = Some(Q::zero());
    loop {
        let next = (0..n)
            .filter(|&v| !done[v])
            .filter_map(|v| dist[v].as_ref().map(|d| (v, d)))
            .min_by(|x, y| x.1.cmp(y.1).then(x.0.cmp(&y.0)))
            .map(|(v, _)| v);
        let Some(v) = next else { break };
        done[v] = true;
        let dv = dist[v].clone().unwrap();
        for a in net.out_arcs(v) {
            let arc = net.arc(a);
            let cand = &dv + &arc.transit;
            if dist[arc.head].as_ref().map_or(true, |d| cand < *d) {
                dist[arc.head] = Some(cand);
            }
        }
    }
    dist.into_iter()
        .map(|d| d.expect("every vertex is reachable in a validated network"))
        .collect()
}

/// The active arcs `A'` and resetting arcs `A*` of a shortest-path graph over a network.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ShortestPathGraph {
    active: Vec<bool>,
    resetting: Vec<bool>,
    source: VertexId,
    sink: VertexId,
    num_vertices: usize,
}

impl ShortestPathGraph {
    /// Checks that `A* ⊆ A'`, that `(V, A')` is acyclic and that every vertex is reachable from the source.
    pub fn new(
        net: &Network,
        active: impl IntoIterator<Item = ArcId>,
        resetting: impl IntoIterator<Item = ArcId>,
    ) -> Result<Self, NetworkError> {
        let m = net.num_arcs();
        let mut act = vec![false; m];
        let mut res = vec![false; m];
        for a in active {
            if a >= m {
                return Err(NetworkError::UnknownArc(a.to_string()));
            }
            act[a] = true;
        }
        for a in resetting {
            if a >= m {
                return Err(NetworkError::UnknownArc(a.to_string()));
            }
            if !act[a] {
                return Err(NetworkError::NotShortestPathGraph(format!(
                    "resetting arc `{}` is not active",
                    net.arc(a).id
                )));
            }
            res[a] = true;
        }
        let g = ShortestPathGraph {
            active: act,
            resetting: res,
            source: net.source(),
            sink: net.sink(),
            num_vertices: net.num_vertices(),
        };
        let reach = reachable(net, net.source(), |a| g.active[a]);
        if let Some(v) = reach.iter().position(|r| !r) {
            return Err(NetworkError::NotShortestPathGraph(format!(
                "vertex `{}` is not reachable through active arcs",
                net.vertex_name(v)
            )));
        }
        if g.topological_order(net).is_none() {
            return Err(NetworkError::NotShortestPathGraph("active arcs contain a cycle".into()));
        }
        Ok(g)
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn sink(&self) -> VertexId {
        self.sink
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn is_active(&self, a: ArcId) -> bool {
        self.active[a]
    }

    pub fn is_resetting(&self, a: ArcId) -> bool {
        self.resetting[a]
    }

    pub fn active_arcs(&self) -> Vec<ArcId> {
        (0..self.active.len()).filter(|&a| self.active[a]).collect()
    }

    pub fn resetting_arcs(&self) -> Vec<ArcId> {
        (0..self.resetting.len()).filter(|&a| self.resetting[a]).collect()
    }

    pub fn non_resetting_arcs(&self) -> Vec<ArcId> {
        (0..self.active.len()).filter(|&a| self.active[a] && !self.resetting[a]).collect()
    }

    pub fn active_in_arcs<'a>(&'a self, net: &'a Network, v: VertexId) -> impl Iterator<Item = ArcId> + 'a {
        net.in_arcs(v).filter(move |&a| self.active[a])
    }

    pub fn active_out_arcs<'a>(&'a self, net: &'a Network, v: VertexId) -> impl Iterator<Item = ArcId> + 'a {
        net.out_arcs(v).filter(move |&a| self.active[a])
    }

    /// Kahn order of `(V, A')`, smallest vertex index first among ready vertices.
    pub fn topological_order(&self, net: &Network) -> Option<Vec<VertexId>> {
        let n = self.num_vertices;
        let mut indeg = vec![0usize; n];
        for a in self.active_arcs() {
            indeg[net.arc(a).head] += 1;
        }
        let mut ready: BTreeSet<VertexId> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for a in self.active_out_arcs(net, v) {
                let h = net.arc(a).head;
                indeg[h] -= 1;
                if indeg[h] == 0 {
                    ready.insert(h);
                }
            }
        }
        (order.len() == n).then_some(order)
    }
}

/// Active arcs satisfy `ℓ_w ≥ ℓ_v + τ`; resetting arcs satisfy it strictly.
pub fn derive_sp_graph(net: &Network, labels: &[Q]) -> Result<ShortestPathGraph, NetworkError> {
    let mut active = Vec::new();
    let mut resetting = Vec::new();
    for (a, arc) in net.arcs().iter().enumerate() {
        let reach = &labels[arc.tail] + &arc.transit;
        if labels[arc.head] >= reach {
            active.push(a);
            if labels[arc.head] > reach {
                resetting.push(a);
            }
        }
    }
    ShortestPathGraph::new(net, active, resetting)
}
