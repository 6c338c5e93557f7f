//! Thin flows as solutions of a linear complementarity problem.

mod enumerate;
mod lemke;

pub use enumerate::{
    brute_force_solve, determinant, find_negative_principal_minor, is_solution, principal_minor, BRUTE_FORCE_LIMIT,
};
pub use lemke::{lemke_solve, LemkeSolution};

use num_traits::{One, Zero};

use crate::network::{ArcId, Network, ShortestPathGraph, VertexId};
use crate::rational::Q;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LcpError {
    #[error("Lemke's method ended on a secondary ray after {} pivots", .pivots.len())]
    RayTermination { pivots: Vec<(usize, usize)> },
    #[error("pivot limit reached after {pivots} pivots")]
    PivotCap { pivots: usize },
    #[error("{variables} variables exceed the enumeration limit of {limit}")]
    TooLarge { variables: usize, limit: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Variable layout: one label per vertex, one flow per active arc, one slack per non-resetting active arc.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LcpLayout {
    pub num_vertices: usize,
    pub arcs: Vec<ArcId>,
    pub slack_arcs: Vec<ArcId>,
}

impl LcpLayout {
    pub fn new(net: &Network, g: &ShortestPathGraph) -> Self {
        LcpLayout { num_vertices: net.num_vertices(), arcs: g.active_arcs(), slack_arcs: g.non_resetting_arcs() }
    }

    pub fn size(&self) -> usize {
        self.num_vertices + self.arcs.len() + self.slack_arcs.len()
    }

    pub fn label(&self, v: VertexId) -> usize {
        v
    }

    pub fn flow(&self, k: usize) -> usize {
        self.num_vertices + k
    }

    pub fn slack(&self, k: usize) -> usize {
        self.num_vertices + self.arcs.len() + k
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LcpInstance {
    pub matrix: Vec<Vec<Q>>,
    pub q: Vec<Q>,
    pub layout: LcpLayout,
}

/// Builds the complementarity system whose solutions are the (unnormalized) thin flows.
///
/// Rows, in layout order: the source label, flow conservation at every other vertex, the
/// head-side label bound of each active arc and the tail-side bound of each non-resetting arc.
pub fn build_lcp(net: &Network, g: &ShortestPathGraph, value: &Q, source_label: &Q) -> LcpInstance {
    let layout = LcpLayout::new(net, g);
    let n = layout.size();
    let mut m = vec![vec![Q::zero(); n]; n];
    let s = g.source();
    m[layout.label(s)][layout.label(s)] = Q::one();
    for (k, &a) in layout.arcs.iter().enumerate() {
        let arc = net.arc(a);
        if arc.head != s {
            m[layout.label(arc.head)][layout.flow(k)] += Q::one();
        }
        if arc.tail != s {
            m[layout.label(arc.tail)][layout.flow(k)] -= Q::one();
        }
        let inv = Q::one() / &arc.capacity;
        let row = layout.flow(k);
        m[row][layout.label(arc.head)] = -Q::one();
        m[row][layout.flow(k)] = inv;
    }
    for (k, &a) in layout.slack_arcs.iter().enumerate() {
        let arc = net.arc(a);
        let kx = layout.arcs.binary_search(&a).expect("slack arcs are active");
        let inv = Q::one() / &arc.capacity;
        m[layout.flow(kx)][layout.slack(k)] = Q::one();
        let row = layout.slack(k);
        m[row][layout.label(arc.tail)] = -Q::one();
        m[row][layout.flow(kx)] = inv;
        m[row][layout.slack(k)] = Q::one();
    }
    let mut q = vec![Q::zero(); n];
    q[layout.label(s)] = -source_label.clone();
    q[layout.label(g.sink())] -= value;
    LcpInstance { matrix: m, q, layout }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, q};

    #[test]
    fn single_free_arc_matrix() {
        let net = Network::builder().arc("a", "s", "t", int(1), int(0)).build().unwrap();
        let g = ShortestPathGraph::new(&net, [0], []).unwrap();
        let lcp = build_lcp(&net, &g, &int(2), &int(1));
        let expected: Vec<Vec<Q>> = [[1, 0, 0, 0], [0, 0, 1, 0], [0, -1, 1, 1], [-1, 0, 1, 1]]
            .iter()
            .map(|r| r.iter().map(|&x| int(x)).collect())
            .collect();
        assert_eq!(lcp.matrix, expected);
        assert_eq!(lcp.q, vec![int(-1), int(-2), int(0), int(0)]);
        let sol = lemke_solve(&lcp.matrix, &lcp.q).unwrap();
        assert_eq!(sol.z, vec![int(1), int(2), int(2), int(0)]);
    }

    #[test]
    fn resetting_arc_has_no_slack() {
        let net = Network::builder().arc("a", "s", "t", int(2), int(0)).build().unwrap();
        let g = ShortestPathGraph::new(&net, [0], [0]).unwrap();
        let lcp = build_lcp(&net, &g, &int(1), &int(1));
        assert_eq!(lcp.layout.size(), 3);
        assert_eq!(lcp.matrix[2], vec![int(0), int(-1), q(1, 2)]);
        let sol = lemke_solve(&lcp.matrix, &lcp.q).unwrap();
        assert_eq!(sol.z, vec![int(1), q(1, 2), int(1)]);
    }
}
