//! Angle condition, straight / stratified-straight decisions and network classification.

mod simplex;
mod square;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Network, Point};
use crate::graph::{
    angles_equal, normalize_angle, path_angle, wrap_signed, AngledGraph, GraphError, HalfEdge,
    Path, SpanningForest, ANGLE_TOL,
};

pub use simplex::{maximize_homogeneous, LpSolution, PIVOT_TOL};
pub use square::{square_angle_straightness, SquareAngleError, SquareVerdict};

/// Lengths at or below this are treated as zero in support computations.
pub const SUPPORT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("subgraph is not connected")]
    Disconnected,
    #[error("seed half-edge is not in the subgraph")]
    SeedNotInSubgraph,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyOptions {
    /// Tolerance for assigned and propagated angles.
    pub angle_tol: f64,
    /// Tolerance when comparing tangents measured on curves.
    pub tangent_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            angle_tol: ANGLE_TOL,
            tangent_tol: ANGLE_TOL,
        }
    }
}

/// Real or virtual tangent angle per half-edge and rotation angle per junction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentAssignment {
    pub tangent: Vec<Option<[f64; 2]>>,
    pub rotation: Vec<Option<f64>>,
}

impl TangentAssignment {
    pub fn empty(g: &AngledGraph) -> Self {
        Self {
            tangent: vec![None; g.num_edges()],
            rotation: vec![None; g.num_vertices()],
        }
    }

    pub fn get(&self, h: HalfEdge) -> Option<f64> {
        self.tangent[h.edge].map(|t| t[h.end as usize])
    }

    /// Direction of travel along an edge from its end 0.
    pub fn edge_direction(&self, edge: usize) -> Option<f64> {
        self.tangent[edge].map(|t| t[0])
    }

    fn rotate_edges(&mut self, g: &AngledGraph, edges: &[usize], by: f64) {
        for &e in edges {
            if let Some(t) = self.tangent[e].as_mut() {
                t[0] = normalize_angle(t[0] + by);
                t[1] = normalize_angle(t[1] + by);
            }
        }
        for v in g.vertices_of(edges) {
            if let Some(r) = self.rotation[v].as_mut() {
                *r = normalize_angle(*r + by);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationFailure {
    pub cycle: Path,
    /// Path angle of the violating cycle, in `[0, 2π)`.
    pub theta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Propagation {
    Consistent(TangentAssignment),
    Violated(PropagationFailure),
}

/// Propagates virtual tangents over a connected subgraph from a seed half-edge.
pub fn propagate_directions(
    g: &AngledGraph,
    subgraph: &[usize],
    seed: HalfEdge,
    seed_angle: f64,
) -> Result<Propagation, ClassifyError> {
    propagate_with_tol(g, subgraph, seed, seed_angle, ANGLE_TOL)
}

pub(crate) fn propagate_with_tol(
    g: &AngledGraph,
    subgraph: &[usize],
    seed: HalfEdge,
    seed_angle: f64,
    tol: f64,
) -> Result<Propagation, ClassifyError> {
    g.check_edges(subgraph)?;
    if !subgraph.contains(&seed.edge) {
        return Err(ClassifyError::SeedNotInSubgraph);
    }
    let forest = SpanningForest::new(g, subgraph);
    if forest.roots.len() != 1 {
        return Err(ClassifyError::Disconnected);
    }
    let mut ta = TangentAssignment::empty(g);
    let root = forest.roots[0];
    ta.rotation[root] = Some(0.0);
    for &w in &forest.order {
        let Some(h) = forest.parent[w] else { continue };
        let u = g.vertex_of(h);
        let phi_u = ta.rotation[u].expect("parent visited first");
        let t_here = phi_u + g.direction(h);
        let t_there = t_here + PI;
        let mut pair = [0.0; 2];
        pair[h.end as usize] = normalize_angle(t_here);
        pair[1 - h.end as usize] = normalize_angle(t_there);
        ta.tangent[h.edge] = Some(pair);
        ta.rotation[w] = Some(normalize_angle(t_there - g.direction(h.opposite())));
    }
    for &c in &forest.chords {
        let cycle = forest.chord_cycle(g, c);
        let theta = path_angle(g, &cycle)?;
        if !angles_equal(theta, 0.0, tol) {
            return Ok(Propagation::Violated(PropagationFailure { cycle, theta }));
        }
        let [a, _] = g.endpoints(c);
        let t0 = ta.rotation[a].expect("chord endpoint reached") + g.direction(HalfEdge::new(c, 0));
        ta.tangent[c] = Some([normalize_angle(t0), normalize_angle(t0 + PI)]);
    }
    let shift = seed_angle - ta.get(seed).expect("seed tangent set");
    ta.rotate_edges(g, subgraph, shift);
    Ok(Propagation::Consistent(ta))
}

/// Reasons a network or subgraph fails a check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    /// Real tangents at a junction disagree with the assigned directions.
    JunctionMismatch {
        vertex: usize,
        half_edge: HalfEdge,
        deviation: f64,
    },
    /// A cycle of a singular component turns by a nonzero angle.
    CycleViolation { cycle: Path, theta: f64 },
    /// Real tangents around a singular component disagree with the propagated ones.
    AdjacentMismatch { vertex: usize, deviation: f64 },
    /// The singular part admits no straight stratification.
    NotStratified { level: usize, stratum: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AngleCheck {
    pub pass: bool,
    pub reasons: Vec<Diagnostic>,
    pub tangents: TangentAssignment,
}

/// Angle condition for a network described by its singular edges and the measured
/// tangents (`real[i] = [τ⁰, τ¹]`) of its regular edges.
pub fn check_angle_condition_with(
    g: &AngledGraph,
    singular: &[bool],
    real: &[Option<[f64; 2]>],
    opts: &ClassifyOptions,
) -> AngleCheck {
    assert_eq!(singular.len(), g.num_edges());
    assert_eq!(real.len(), g.num_edges());
    let mut reasons = Vec::new();
    let mut ta = TangentAssignment::empty(g);
    let mut real_rotation: Vec<Option<f64>> = vec![None; g.num_vertices()];

    for e in 0..g.num_edges() {
        if !singular[e] {
            let t = real[e].expect("regular edge carries real tangents");
            ta.tangent[e] = Some([normalize_angle(t[0]), normalize_angle(t[1])]);
        }
    }
    for (v, rotation) in real_rotation.iter_mut().enumerate() {
        for &h in g.incident(v) {
            if singular[h.edge] {
                continue;
            }
            let r = ta.get(h).unwrap() - g.direction(h);
            match *rotation {
                None => *rotation = Some(normalize_angle(r)),
                Some(r0) => {
                    let dev = wrap_signed(r - r0).abs();
                    if dev > opts.tangent_tol {
                        reasons.push(Diagnostic::JunctionMismatch {
                            vertex: v,
                            half_edge: h,
                            deviation: dev,
                        });
                    }
                }
            }
        }
    }
    ta.rotation = real_rotation.clone();

    let sing: Vec<usize> = (0..g.num_edges()).filter(|&e| singular[e]).collect();
    for comp in g.components(&sing) {
        let seed = HalfEdge::new(comp[0], 0);
        let prop = propagate_with_tol(g, &comp, seed, g.direction(seed), opts.angle_tol)
            .expect("component is connected");
        let mut local = match prop {
            Propagation::Violated(f) => {
                reasons.push(Diagnostic::CycleViolation {
                    cycle: f.cycle,
                    theta: f.theta,
                });
                continue;
            }
            Propagation::Consistent(t) => t,
        };
        let verts = g.vertices_of(&comp);
        let mut shift = None;
        for &v in &verts {
            let (Some(rr), Some(rp)) = (real_rotation[v], local.rotation[v]) else {
                continue;
            };
            match shift {
                None => shift = Some(wrap_signed(rr - rp)),
                Some(s) => {
                    let dev = wrap_signed(rr - rp - s).abs();
                    if dev > opts.tangent_tol {
                        reasons.push(Diagnostic::AdjacentMismatch {
                            vertex: v,
                            deviation: dev,
                        });
                    }
                }
            }
        }
        local.rotate_edges(g, &comp, shift.unwrap_or(0.0));
        for &e in &comp {
            ta.tangent[e] = local.tangent[e];
        }
        for &v in &verts {
            if ta.rotation[v].is_none() {
                ta.rotation[v] = local.rotation[v];
            }
        }
    }
    AngleCheck {
        pass: reasons.is_empty(),
        reasons,
        tangents: ta,
    }
}

/// Measured tangents of every regular curve of a network.
pub fn real_tangents(n: &Network) -> Vec<Option<[f64; 2]>> {
    n.curves()
        .iter()
        .map(|c| {
            if c.is_singular() {
                None
            } else {
                Some([c.start_tangent_angle(), c.end_tangent_angle()])
            }
        })
        .collect()
}

pub fn check_angle_condition(n: &Network, opts: &ClassifyOptions) -> AngleCheck {
    let singular: Vec<bool> = n.curves().iter().map(|c| c.is_singular()).collect();
    check_angle_condition_with(n.graph(), &singular, &real_tangents(n), opts)
}

/// Positions and lengths of one straight realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StraightRealization {
    pub positions: Vec<Option<Point>>,
    pub lengths: Vec<Option<f64>>,
    /// Edges with positive length, ascending.
    pub support: Vec<usize>,
}

/// Relative-interior solution of the straight-segment feasibility system on `subgraph`.
pub fn max_support_realization(
    g: &AngledGraph,
    subgraph: &[usize],
    tangents: &TangentAssignment,
) -> StraightRealization {
    let mut sub = subgraph.to_vec();
    sub.sort_unstable();
    sub.dedup();
    let col: std::collections::HashMap<usize, usize> =
        sub.iter().enumerate().map(|(k, &e)| (e, k)).collect();
    let dir = |e: usize| {
        tangents
            .edge_direction(e)
            .expect("tangent for every subgraph edge")
    };
    let forest = SpanningForest::new(g, &sub);
    let mut rows = Vec::new();
    for &c in &forest.chords {
        let cycle = forest.chord_cycle(g, c);
        let mut rx = vec![0.0; sub.len()];
        let mut ry = vec![0.0; sub.len()];
        for h in &cycle.steps {
            let s = if h.end == 0 { 1.0 } else { -1.0 };
            let t = dir(h.edge);
            rx[col[&h.edge]] += s * t.cos();
            ry[col[&h.edge]] += s * t.sin();
        }
        rows.push(rx);
        rows.push(ry);
    }
    let upper = vec![1.0; sub.len()];
    let first = maximize_homogeneous(&rows, &vec![1.0; sub.len()], &upper);
    let mut acc = first.x.clone();
    let mut count = 1.0;
    for k in 0..sub.len() {
        if acc[k] > SUPPORT_TOL {
            continue;
        }
        let mut c = vec![0.0; sub.len()];
        c[k] = 1.0;
        let sol = maximize_homogeneous(&rows, &c, &upper);
        if sol.objective > SUPPORT_TOL {
            for (a, v) in acc.iter_mut().zip(&sol.x) {
                *a += v;
            }
            count += 1.0;
        }
    }
    let max = acc.iter().cloned().fold(0.0, f64::max);
    let scale = if max > 0.0 { 1.0 / max } else { 1.0 / count };
    let mut lengths = vec![None; g.num_edges()];
    let mut support = Vec::new();
    for (k, &e) in sub.iter().enumerate() {
        let mut l = acc[k] * scale;
        if l <= SUPPORT_TOL {
            l = 0.0;
        } else {
            support.push(e);
        }
        lengths[e] = Some(l);
    }
    let mut positions = vec![None; g.num_vertices()];
    for &r in &forest.roots {
        positions[r] = Some(Point::zeros());
    }
    for &w in &forest.order {
        let Some(h) = forest.parent[w] else { continue };
        let u = g.vertex_of(h);
        let t = dir(h.edge);
        let l = lengths[h.edge].unwrap();
        let s = if h.end == 0 { 1.0 } else { -1.0 };
        positions[w] = Some(positions[u].unwrap() + Point::new(t.cos(), t.sin()) * (s * l));
    }
    StraightRealization {
        positions,
        lengths,
        support,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StrataVerdict {
    Straight,
    StratifiedStraight,
    NotStratified,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrataFailure {
    Propagation { failure: PropagationFailure },
    EmptySupport { level: usize, stratum: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrataReport {
    pub verdict: StrataVerdict,
    /// `H₀ ⊋ H₁ ⊋ …`, nonempty levels only.
    pub strata: Vec<Vec<usize>>,
    pub realizations: Vec<StraightRealization>,
    pub step: usize,
    pub failure: Option<StrataFailure>,
    /// Tangents shared by every level (absent when propagation failed).
    pub tangents: Option<TangentAssignment>,
}

/// Canonical tangents on every component, each seeded at its lowest edge's assigned direction.
pub fn canonical_tangents(
    g: &AngledGraph,
    subgraph: &[usize],
    tol: f64,
) -> Result<TangentAssignment, PropagationFailure> {
    let mut ta = TangentAssignment::empty(g);
    for comp in g.components(subgraph) {
        let seed = HalfEdge::new(comp[0], 0);
        match propagate_with_tol(g, &comp, seed, g.direction(seed), tol)
            .expect("component is connected")
        {
            Propagation::Violated(f) => return Err(f),
            Propagation::Consistent(local) => {
                for &e in &comp {
                    ta.tangent[e] = local.tangent[e];
                }
                for v in g.vertices_of(&comp) {
                    ta.rotation[v] = local.rotation[v];
                }
            }
        }
    }
    Ok(ta)
}

pub fn stratify(g: &AngledGraph, subgraph: &[usize]) -> StrataReport {
    match canonical_tangents(g, subgraph, ANGLE_TOL) {
        Ok(ta) => stratify_with_tangents(g, subgraph, &ta),
        Err(failure) => StrataReport {
            verdict: StrataVerdict::NotStratified,
            strata: Vec::new(),
            realizations: Vec::new(),
            step: 0,
            failure: Some(StrataFailure::Propagation { failure }),
            tangents: None,
        },
    }
}

/// Greedy maximal-support stratification with fixed tangents.
pub fn stratify_with_tangents(
    g: &AngledGraph,
    subgraph: &[usize],
    tangents: &TangentAssignment,
) -> StrataReport {
    let mut level: Vec<usize> = subgraph.to_vec();
    level.sort_unstable();
    level.dedup();
    let mut strata = Vec::new();
    let mut realizations = Vec::new();
    while !level.is_empty() {
        let real = max_support_realization(g, &level, tangents);
        if real.support.is_empty() {
            return StrataReport {
                verdict: StrataVerdict::NotStratified,
                step: strata.len(),
                failure: Some(StrataFailure::EmptySupport {
                    level: strata.len(),
                    stratum: level,
                }),
                strata,
                realizations,
                tangents: Some(tangents.clone()),
            };
        }
        let next: Vec<usize> = level
            .iter()
            .copied()
            .filter(|e| !real.support.contains(e))
            .collect();
        strata.push(level);
        realizations.push(real);
        level = next;
    }
    let step = strata.len();
    StrataReport {
        verdict: if step <= 1 {
            StrataVerdict::Straight
        } else {
            StrataVerdict::StratifiedStraight
        },
        strata,
        realizations,
        step,
        failure: None,
        tangents: Some(tangents.clone()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    Regular,
    Degenerate,
    Inadmissible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub reasons: Vec<Diagnostic>,
    pub tangents: Option<TangentAssignment>,
    pub strata: Option<StrataReport>,
}

/// Classification from the singular set and the real tangents of the regular edges.
pub fn classify_with_tangents(
    g: &AngledGraph,
    singular: &[bool],
    real: &[Option<[f64; 2]>],
    opts: &ClassifyOptions,
) -> Verdict {
    let check = check_angle_condition_with(g, singular, real, opts);
    if !check.pass {
        return Verdict {
            kind: VerdictKind::Inadmissible,
            reasons: check.reasons,
            tangents: None,
            strata: None,
        };
    }
    let sing: Vec<usize> = (0..g.num_edges()).filter(|&e| singular[e]).collect();
    if sing.is_empty() {
        return Verdict {
            kind: VerdictKind::Regular,
            reasons: Vec::new(),
            tangents: Some(check.tangents),
            strata: None,
        };
    }
    let report = stratify_with_tangents(g, &sing, &check.tangents);
    if report.verdict == StrataVerdict::NotStratified {
        let reason = match &report.failure {
            Some(StrataFailure::EmptySupport { level, stratum }) => Diagnostic::NotStratified {
                level: *level,
                stratum: stratum.clone(),
            },
            _ => Diagnostic::NotStratified {
                level: 0,
                stratum: sing.clone(),
            },
        };
        return Verdict {
            kind: VerdictKind::Inadmissible,
            reasons: vec![reason],
            tangents: Some(check.tangents),
            strata: Some(report),
        };
    }
    Verdict {
        kind: VerdictKind::Degenerate,
        reasons: Vec::new(),
        tangents: Some(check.tangents),
        strata: Some(report),
    }
}

pub fn classify_network(n: &Network, opts: &ClassifyOptions) -> Verdict {
    let singular: Vec<bool> = n.curves().iter().map(|c| c.is_singular()).collect();
    classify_with_tangents(n.graph(), &singular, &real_tangents(n), opts)
}
