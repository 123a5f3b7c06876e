//! Combinatorial graphs with assigned directions at every half-edge.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for comparing assigned or propagated angles modulo 2π.
pub const ANGLE_TOL: f64 = 1e-9;

/// Reduces an angle to `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduces an angle to `(-π, π]`.
pub fn wrap_signed(a: f64) -> f64 {
    let r = normalize_angle(a);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Counterclockwise angle from direction `from` to direction `to`, in `[0, 2π)`.
pub fn ccw_angle(from: f64, to: f64) -> f64 {
    normalize_angle(to - from)
}

pub fn angles_equal(a: f64, b: f64, tol: f64) -> bool {
    wrap_signed(a - b).abs() <= tol
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph has no edges")]
    Empty,
    #[error("duplicate edge id `{0}`")]
    DuplicateEdgeId(String),
    #[error("edge `{0}` has a non-finite direction")]
    NonFiniteAngle(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(usize),
    #[error("edge index {0} out of range")]
    EdgeOutOfRange(usize),
    #[error("path is inconsistent at step {0}")]
    InconsistentPath(usize),
    #[error("path has no steps")]
    EmptyPath,
}

/// Endpoint `end` (0 or 1) of edge `edge`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HalfEdge {
    pub edge: usize,
    pub end: u8,
}

impl HalfEdge {
    pub fn new(edge: usize, end: u8) -> Self {
        debug_assert!(end < 2);
        Self { edge, end }
    }

    pub fn opposite(self) -> Self {
        Self {
            edge: self.edge,
            end: 1 - self.end,
        }
    }
}

/// Input record for [`AngledGraph::build`].
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSpec {
    pub id: String,
    pub v0: String,
    pub v1: String,
    pub dir0: f64,
    pub dir1: f64,
}

impl EdgeSpec {
    pub fn new(
        id: impl Into<String>,
        v0: impl Into<String>,
        v1: impl Into<String>,
        dir0: f64,
        dir1: f64,
    ) -> Self {
        Self {
            id: id.into(),
            v0: v0.into(),
            v1: v1.into(),
            dir0,
            dir1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AngledGraph {
    edge_ids: Vec<String>,
    vertex_labels: Vec<String>,
    ends: Vec<[usize; 2]>,
    directions: Vec<[f64; 2]>,
    incident: Vec<Vec<HalfEdge>>,
}

impl AngledGraph {
    /// Builds a graph; vertices get dense ids in order of first appearance.
    pub fn build(edges: &[EdgeSpec]) -> Result<Self, GraphError> {
        if edges.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut seen_ids = HashMap::new();
        let mut vertex_index: HashMap<String, usize> = HashMap::new();
        let mut vertex_labels = Vec::new();
        let mut ends = Vec::with_capacity(edges.len());
        let mut directions = Vec::with_capacity(edges.len());
        for (i, e) in edges.iter().enumerate() {
            if seen_ids.insert(e.id.clone(), i).is_some() {
                return Err(GraphError::DuplicateEdgeId(e.id.clone()));
            }
            if !e.dir0.is_finite() || !e.dir1.is_finite() {
                return Err(GraphError::NonFiniteAngle(e.id.clone()));
            }
            let mut vid = |label: &str| -> usize {
                if let Some(&v) = vertex_index.get(label) {
                    return v;
                }
                let v = vertex_labels.len();
                vertex_labels.push(label.to_string());
                vertex_index.insert(label.to_string(), v);
                v
            };
            let a = vid(&e.v0);
            let b = vid(&e.v1);
            ends.push([a, b]);
            directions.push([e.dir0, e.dir1]);
        }
        let mut incident = vec![Vec::new(); vertex_labels.len()];
        for (i, [a, b]) in ends.iter().enumerate() {
            incident[*a].push(HalfEdge::new(i, 0));
            incident[*b].push(HalfEdge::new(i, 1));
        }
        Ok(Self {
            edge_ids: edges.iter().map(|e| e.id.clone()).collect(),
            vertex_labels,
            ends,
            directions,
            incident,
        })
    }

    pub fn num_edges(&self) -> usize {
        self.ends.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_labels.len()
    }

    pub fn edge_id(&self, edge: usize) -> &str {
        &self.edge_ids[edge]
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edge_ids.iter().position(|e| e == id)
    }

    pub fn vertex_label(&self, v: usize) -> &str {
        &self.vertex_labels[v]
    }

    pub fn vertex_of(&self, h: HalfEdge) -> usize {
        self.ends[h.edge][h.end as usize]
    }

    pub fn endpoints(&self, edge: usize) -> [usize; 2] {
        self.ends[edge]
    }

    pub fn is_loop(&self, edge: usize) -> bool {
        self.ends[edge][0] == self.ends[edge][1]
    }

    /// Assigned direction of a half-edge, as an angle in radians.
    pub fn direction(&self, h: HalfEdge) -> f64 {
        self.directions[h.edge][h.end as usize]
    }

    /// Half-edges at `v`, ordered by edge index then endpoint.
    pub fn incident(&self, v: usize) -> &[HalfEdge] {
        &self.incident[v]
    }

    pub fn junction_order(&self, v: usize) -> Result<usize, GraphError> {
        self.incident
            .get(v)
            .map(Vec::len)
            .ok_or(GraphError::UnknownVertex(v))
    }

    pub fn all_edges(&self) -> Vec<usize> {
        (0..self.num_edges()).collect()
    }

    /// Same topology, new directions (indexed like the edges).
    pub fn with_directions(&self, directions: Vec<[f64; 2]>) -> Self {
        assert_eq!(directions.len(), self.num_edges());
        Self {
            directions,
            ..self.clone()
        }
    }

    pub fn edge_specs(&self) -> Vec<EdgeSpec> {
        (0..self.num_edges())
            .map(|i| EdgeSpec {
                id: self.edge_ids[i].clone(),
                v0: self.vertex_labels[self.ends[i][0]].clone(),
                v1: self.vertex_labels[self.ends[i][1]].clone(),
                dir0: self.directions[i][0],
                dir1: self.directions[i][1],
            })
            .collect()
    }

    pub(crate) fn check_edges(&self, subgraph: &[usize]) -> Result<(), GraphError> {
        match subgraph.iter().find(|&&e| e >= self.num_edges()) {
            Some(&e) => Err(GraphError::EdgeOutOfRange(e)),
            None => Ok(()),
        }
    }

    /// Vertices touched by the given edges, ascending.
    pub fn vertices_of(&self, subgraph: &[usize]) -> Vec<usize> {
        let mut vs: Vec<usize> = subgraph.iter().flat_map(|&e| self.ends[e]).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    /// Connected components of a subgraph, each as an ascending edge list,
    /// ordered by smallest edge.
    pub fn components(&self, subgraph: &[usize]) -> Vec<Vec<usize>> {
        let forest = SpanningForest::new(self, subgraph);
        let mut comps: Vec<Vec<usize>> = vec![Vec::new(); forest.roots.len()];
        let mut edges = subgraph.to_vec();
        edges.sort_unstable();
        edges.dedup();
        for e in edges {
            let c = forest.component[self.ends[e][0]].expect("edge vertex in forest");
            comps[c].push(e);
        }
        comps
    }

    pub fn is_connected(&self, subgraph: &[usize]) -> bool {
        self.components(subgraph).len() <= 1
    }
}

/// Sequence of traversal steps; step `(z, i)` walks edge `i` starting at its end `z`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path {
    pub steps: Vec<HalfEdge>,
    pub closed: bool,
}

impl Path {
    pub fn open(steps: Vec<HalfEdge>) -> Self {
        Self {
            steps,
            closed: false,
        }
    }

    pub fn cycle(steps: Vec<HalfEdge>) -> Self {
        Self {
            steps,
            closed: true,
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn reversed(&self) -> Self {
        Self {
            steps: self.steps.iter().rev().map(|h| h.opposite()).collect(),
            closed: self.closed,
        }
    }

    pub fn rotated(&self, k: usize) -> Self {
        let mut steps = self.steps.clone();
        if !steps.is_empty() {
            let n = steps.len();
            steps.rotate_left(k % n);
        }
        Self {
            steps,
            closed: self.closed,
        }
    }

    pub fn start_vertex(&self, g: &AngledGraph) -> Option<usize> {
        self.steps.first().map(|&h| g.vertex_of(h))
    }

    pub fn end_vertex(&self, g: &AngledGraph) -> Option<usize> {
        self.steps.last().map(|&h| g.vertex_of(h.opposite()))
    }

    pub fn check(&self, g: &AngledGraph) -> Result<(), GraphError> {
        if self.steps.is_empty() {
            return Err(GraphError::EmptyPath);
        }
        for (j, h) in self.steps.iter().enumerate() {
            if h.edge >= g.num_edges() {
                return Err(GraphError::EdgeOutOfRange(h.edge));
            }
            let next = if j + 1 < self.steps.len() {
                self.steps[j + 1]
            } else if self.closed {
                self.steps[0]
            } else {
                continue;
            };
            if next.edge >= g.num_edges() {
                return Err(GraphError::EdgeOutOfRange(next.edge));
            }
            if g.vertex_of(h.opposite()) != g.vertex_of(next) {
                return Err(GraphError::InconsistentPath(j));
            }
        }
        Ok(())
    }
}

/// Turning angle at a junction: from the reversed incoming direction to the outgoing one.
pub(crate) fn turn(dir_arrive_half_edge: f64, dir_leave_half_edge: f64) -> f64 {
    ccw_angle(dir_arrive_half_edge + PI, dir_leave_half_edge)
}

/// Total turning of a path at its junctions, in `[0, 2π)`.
pub fn path_angle(g: &AngledGraph, p: &Path) -> Result<f64, GraphError> {
    p.check(g)?;
    let n = p.steps.len();
    let terms = if p.closed { n } else { n - 1 };
    let mut total = 0.0;
    for j in 0..terms {
        let arrive = p.steps[j].opposite();
        let leave = p.steps[(j + 1) % n];
        total += turn(g.direction(arrive), g.direction(leave));
    }
    Ok(normalize_angle(total))
}

/// Breadth-first spanning forest of a subgraph. Each tree grows from endpoint 0 of
/// the lowest-index edge not yet covered; neighbours are explored in edge order.
#[derive(Clone, Debug)]
pub struct SpanningForest {
    /// Step from the parent into each reached vertex.
    pub parent: Vec<Option<HalfEdge>>,
    pub depth: Vec<usize>,
    pub component: Vec<Option<usize>>,
    pub roots: Vec<usize>,
    /// Vertices in discovery order.
    pub order: Vec<usize>,
    pub tree_edges: Vec<usize>,
    pub chords: Vec<usize>,
}

impl SpanningForest {
    pub fn new(g: &AngledGraph, subgraph: &[usize]) -> Self {
        let nv = g.num_vertices();
        let mut in_sub = vec![false; g.num_edges()];
        for &e in subgraph {
            in_sub[e] = true;
        }
        let mut parent = vec![None; nv];
        let mut depth = vec![0; nv];
        let mut component = vec![None; nv];
        let mut roots = Vec::new();
        let mut order = Vec::new();
        let mut is_tree = vec![false; g.num_edges()];
        let mut queue = std::collections::VecDeque::new();
        for e in 0..g.num_edges() {
            if !in_sub[e] {
                continue;
            }
            let root = g.vertex_of(HalfEdge::new(e, 0));
            if component[root].is_some() {
                continue;
            }
            let c = roots.len();
            roots.push(root);
            component[root] = Some(c);
            queue.push_back(root);
            while let Some(u) = queue.pop_front() {
                order.push(u);
                for &h in g.incident(u) {
                    if !in_sub[h.edge] || is_tree[h.edge] {
                        continue;
                    }
                    let w = g.vertex_of(h.opposite());
                    if component[w].is_none() {
                        component[w] = Some(c);
                        parent[w] = Some(h);
                        depth[w] = depth[u] + 1;
                        is_tree[h.edge] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        let tree_edges = (0..g.num_edges()).filter(|&e| is_tree[e]).collect();
        let chords = (0..g.num_edges())
            .filter(|&e| in_sub[e] && !is_tree[e])
            .collect();
        Self {
            parent,
            depth,
            component,
            roots,
            order,
            tree_edges,
            chords,
        }
    }

    /// Tree path between two vertices of the same tree.
    pub fn tree_path(&self, g: &AngledGraph, from: usize, to: usize) -> Vec<HalfEdge> {
        let mut up = Vec::new();
        let mut down = Vec::new();
        let (mut a, mut b) = (from, to);
        while self.depth[a] > self.depth[b] {
            let h = self.parent[a].expect("non-root has parent");
            up.push(h.opposite());
            a = g.vertex_of(h);
        }
        while self.depth[b] > self.depth[a] {
            let h = self.parent[b].expect("non-root has parent");
            down.push(h);
            b = g.vertex_of(h);
        }
        while a != b {
            let ha = self.parent[a].expect("distinct vertices below root");
            up.push(ha.opposite());
            a = g.vertex_of(ha);
            let hb = self.parent[b].expect("distinct vertices below root");
            down.push(hb);
            b = g.vertex_of(hb);
        }
        down.reverse();
        up.extend(down);
        up
    }

    /// Cycle closed by a chord: the chord from its end 0, then back along the tree.
    pub fn chord_cycle(&self, g: &AngledGraph, chord: usize) -> Path {
        let [a, b] = g.endpoints(chord);
        let mut steps = vec![HalfEdge::new(chord, 0)];
        steps.extend(self.tree_path(g, b, a));
        Path::cycle(steps)
    }
}

/// One cycle per chord of the deterministic spanning forest.
pub fn fundamental_cycles(g: &AngledGraph, subgraph: &[usize]) -> Result<Vec<Path>, GraphError> {
    g.check_edges(subgraph)?;
    let forest = SpanningForest::new(g, subgraph);
    Ok(forest
        .chords
        .iter()
        .map(|&c| forest.chord_cycle(g, c))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn theta() -> AngledGraph {
        let t = 2.0 * PI / 3.0;
        AngledGraph::build(&[
            EdgeSpec::new("e1", "a", "b", 0.0, 0.0),
            EdgeSpec::new("e2", "a", "b", t, t),
            EdgeSpec::new("e3", "a", "b", 2.0 * t, 2.0 * t),
        ])
        .unwrap()
    }

    #[test]
    fn theta_has_two_triple_junctions() {
        let g = theta();
        assert_eq!(g.num_vertices(), 2);
        assert_eq!(g.junction_order(0).unwrap(), 3);
        assert_eq!(g.junction_order(1).unwrap(), 3);
        assert!(g.junction_order(2).is_err());
    }

    #[test]
    fn single_edge_and_loop_orders() {
        let g = AngledGraph::build(&[EdgeSpec::new("e", "a", "b", 0.0, PI)]).unwrap();
        assert_eq!(g.junction_order(0).unwrap(), 1);
        let l = AngledGraph::build(&[EdgeSpec::new("e", "a", "a", 0.0, PI)]).unwrap();
        assert_eq!(l.num_vertices(), 1);
        assert_eq!(l.junction_order(0).unwrap(), 2);
    }

    #[test]
    fn eight_edge_identifications() {
        // (0,1)~(0,2), (1,1)~(0,3), (1,2)~(0,4)~(1,5)~(0,7), (1,3)~(1,4),
        // (0,5)~(0,6), (1,6)~(0,8), (1,7)~(1,8)
        let e = |id: &str, a: &str, b: &str| EdgeSpec::new(id, a, b, 0.0, PI);
        let g = AngledGraph::build(&[
            e("1", "A", "B"),
            e("2", "A", "C"),
            e("3", "B", "D"),
            e("4", "C", "D"),
            e("5", "E", "C"),
            e("6", "E", "F"),
            e("7", "C", "G"),
            e("8", "F", "G"),
        ])
        .unwrap();
        assert_eq!(g.num_vertices(), 7);
        let orders: Vec<usize> = (0..g.num_vertices())
            .map(|v| g.junction_order(v).unwrap())
            .collect();
        assert_eq!(orders, vec![2, 2, 4, 2, 2, 2, 2]);
        assert_eq!(orders.iter().sum::<usize>(), 2 * g.num_edges());
    }

    #[test]
    fn build_errors() {
        assert_eq!(AngledGraph::build(&[]), Err(GraphError::Empty));
        let dup = [
            EdgeSpec::new("e", "a", "b", 0.0, 0.0),
            EdgeSpec::new("e", "b", "c", 0.0, 0.0),
        ];
        assert_eq!(
            AngledGraph::build(&dup),
            Err(GraphError::DuplicateEdgeId("e".into()))
        );
        let nan = [EdgeSpec::new("e", "a", "b", f64::NAN, 0.0)];
        assert!(matches!(
            AngledGraph::build(&nan),
            Err(GraphError::NonFiniteAngle(_))
        ));
    }

    #[test]
    fn straight_continuation_has_zero_angle() {
        let g = AngledGraph::build(&[
            EdgeSpec::new("1", "a", "b", 0.3, 0.3 + PI),
            EdgeSpec::new("2", "b", "c", 0.3, 0.3 + PI),
        ])
        .unwrap();
        let p = Path::open(vec![HalfEdge::new(0, 0), HalfEdge::new(1, 0)]);
        assert!(path_angle(&g, &p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn angle_through_theta_junction() {
        let g = theta();
        // leave a by e1, arrive at b, leave b by e2 (reversed), arrive at a.
        let p = Path::open(vec![HalfEdge::new(0, 0), HalfEdge::new(1, 1)]);
        let theta = path_angle(&g, &p).unwrap();
        let expected = normalize_angle(
            PI + ccw_angle(
                g.direction(HalfEdge::new(0, 1)),
                g.direction(HalfEdge::new(1, 1)),
            ),
        );
        assert!((theta - expected).abs() < 1e-12);
        assert!((theta - 5.0 * PI / 3.0).abs() < 1e-12);
        let q = Path::open(vec![HalfEdge::new(1, 0), HalfEdge::new(0, 1)]);
        assert!((path_angle(&g, &q).unwrap() - PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn inconsistent_path_rejected() {
        let g = theta();
        let p = Path::open(vec![HalfEdge::new(0, 0), HalfEdge::new(1, 0)]);
        assert_eq!(path_angle(&g, &p), Err(GraphError::InconsistentPath(0)));
    }

    #[test]
    fn cycle_bases() {
        let tree = AngledGraph::build(&[
            EdgeSpec::new("1", "a", "b", 0.0, PI),
            EdgeSpec::new("2", "b", "c", 0.0, PI),
        ])
        .unwrap();
        assert!(fundamental_cycles(&tree, &[0, 1]).unwrap().is_empty());
        let lp = AngledGraph::build(&[EdgeSpec::new("1", "a", "a", 0.0, PI)]).unwrap();
        let cs = fundamental_cycles(&lp, &[0]).unwrap();
        assert_eq!(cs, vec![Path::cycle(vec![HalfEdge::new(0, 0)])]);
        let g = theta();
        let cs = fundamental_cycles(&g, &[0, 1, 2]).unwrap();
        assert_eq!(cs.len(), 2);
        for c in &cs {
            c.check(&g).unwrap();
        }
    }

    #[test]
    fn four_cycle_basis() {
        let g = AngledGraph::build(&[
            EdgeSpec::new("1", "p0", "p1", 0.0, PI),
            EdgeSpec::new("2", "p1", "p2", 0.0, PI),
            EdgeSpec::new("3", "p2", "p3", 0.0, PI),
            EdgeSpec::new("4", "p3", "p0", 0.0, PI),
            EdgeSpec::new("5", "p0", "x", 0.0, PI),
        ])
        .unwrap();
        let cs = fundamental_cycles(&g, &g.all_edges()).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].len(), 4);
        cs[0].check(&g).unwrap();
    }

    /// Random multigraph: `n` edges over `v` labels with lattice directions.
    fn arb_graph() -> impl Strategy<Value = AngledGraph> {
        (1usize..7, 1usize..6).prop_flat_map(|(n, v)| {
            proptest::collection::vec((0..v, 0..v, 0i32..12, 0i32..12), n).prop_map(|es| {
                let specs: Vec<EdgeSpec> = es
                    .iter()
                    .enumerate()
                    .map(|(i, &(a, b, k0, k1))| {
                        EdgeSpec::new(
                            i.to_string(),
                            format!("v{a}"),
                            format!("v{b}"),
                            k0 as f64 * PI / 6.0,
                            k1 as f64 * PI / 6.0,
                        )
                    })
                    .collect();
                AngledGraph::build(&specs).unwrap()
            })
        })
    }

    /// Random walk of `len` steps from the first edge.
    fn walk(g: &AngledGraph, choices: &[usize]) -> Path {
        let mut steps = vec![HalfEdge::new(0, 0)];
        for &c in choices {
            let v = g.vertex_of(steps.last().unwrap().opposite());
            let inc = g.incident(v);
            steps.push(inc[c % inc.len()]);
        }
        Path::open(steps)
    }

    proptest! {
        #[test]
        fn reversal_negates_open_angle(g in arb_graph(), choices in proptest::collection::vec(0usize..8, 1..6)) {
            let p = walk(&g, &choices);
            let a = path_angle(&g, &p).unwrap();
            let b = path_angle(&g, &p.reversed()).unwrap();
            prop_assert!(angles_equal(a + b, 0.0, 1e-9));
        }

        #[test]
        fn cycle_angle_is_rotation_invariant(g in arb_graph(), k in 0usize..10) {
            for c in fundamental_cycles(&g, &g.all_edges()).unwrap() {
                let a = path_angle(&g, &c).unwrap();
                let b = path_angle(&g, &c.rotated(k)).unwrap();
                prop_assert!(angles_equal(a, b, 1e-9));
            }
        }

        #[test]
        fn one_step_extension_adds_its_turn(g in arb_graph(), choices in proptest::collection::vec(0usize..8, 1..6)) {
            let p = walk(&g, &choices);
            let mut head = p.clone();
            let last = head.steps.pop().unwrap();
            let before = head.steps.last().copied();
            if let Some(prev) = before {
                let tau = turn(g.direction(prev.opposite()), g.direction(last));
                let a = path_angle(&g, &head).unwrap();
                let b = path_angle(&g, &p).unwrap();
                prop_assert!(angles_equal(a + tau, b, 1e-9));
            }
        }

        #[test]
        fn cycle_count_matches_rank(g in arb_graph(), mask in proptest::collection::vec(any::<bool>(), 6)) {
            let sub: Vec<usize> = (0..g.num_edges()).filter(|&e| mask[e]).collect();
            let cycles = fundamental_cycles(&g, &sub).unwrap();
            let v = g.vertices_of(&sub).len();
            let c = g.components(&sub).len();
            prop_assert_eq!(cycles.len() + v, sub.len() + c);
            for cyc in &cycles {
                prop_assert!(cyc.check(&g).is_ok());
            }
        }
    }
}
