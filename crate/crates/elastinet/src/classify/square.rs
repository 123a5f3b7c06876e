//! Straightness test for graphs whose junction directions meet at right angles.

use std::collections::VecDeque;
use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{propagate_with_tol, stratify, Propagation, StrataVerdict};
use crate::graph::{angles_equal, AngledGraph, GraphError, HalfEdge, Path, ANGLE_TOL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SquareVerdict {
    Straight,
    /// Stratified straight with a forbidden cycle through a first-stratum singular edge.
    StratifiedNotStraight {
        edge: usize,
        witness: Path,
    },
    NotStratified,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SquareAngleError {
    #[error("junction {vertex} has order {order} > 4")]
    JunctionOrder { vertex: usize, order: usize },
    #[error("directions at junction {vertex} are not distinct multiples of a right angle apart")]
    NotRightAngles { vertex: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn check_preconditions(g: &AngledGraph, subgraph: &[usize]) -> Result<(), SquareAngleError> {
    g.check_edges(subgraph)?;
    for v in g.vertices_of(subgraph) {
        let hs: Vec<HalfEdge> = g
            .incident(v)
            .iter()
            .copied()
            .filter(|h| subgraph.contains(&h.edge))
            .collect();
        if hs.len() > 4 {
            return Err(SquareAngleError::JunctionOrder {
                vertex: v,
                order: hs.len(),
            });
        }
        for (k, &a) in hs.iter().enumerate() {
            for &b in &hs[k + 1..] {
                let d = g.direction(b) - g.direction(a);
                let ok = [FRAC_PI_2, PI, 3.0 * FRAC_PI_2]
                    .iter()
                    .any(|&q| angles_equal(d, q, ANGLE_TOL));
                if !ok {
                    return Err(SquareAngleError::NotRightAngles { vertex: v });
                }
            }
        }
    }
    Ok(())
}

pub fn square_angle_straightness(
    g: &AngledGraph,
    subgraph: &[usize],
) -> Result<SquareVerdict, SquareAngleError> {
    check_preconditions(g, subgraph)?;
    let report = stratify(g, subgraph);
    match report.verdict {
        StrataVerdict::NotStratified => return Ok(SquareVerdict::NotStratified),
        StrataVerdict::Straight => return Ok(SquareVerdict::Straight),
        StrataVerdict::StratifiedStraight => {}
    }
    for &e in &report.strata[1] {
        let comp = g
            .components(subgraph)
            .into_iter()
            .find(|c| c.contains(&e))
            .expect("edge in some component");
        for z0 in 0..2u8 {
            if let Some(witness) = forbidden_cycle(g, &comp, HalfEdge::new(e, z0)) {
                return Ok(SquareVerdict::StratifiedNotStraight { edge: e, witness });
            }
        }
    }
    Ok(SquareVerdict::Straight)
}

/// Cycle starting with `first` (canonical direction 0) whose later steps never head at angle π.
fn forbidden_cycle(g: &AngledGraph, comp: &[usize], first: HalfEdge) -> Option<Path> {
    let ta = match propagate_with_tol(g, comp, first, 0.0, ANGLE_TOL).ok()? {
        Propagation::Consistent(t) => t,
        Propagation::Violated(_) => return None,
    };
    let start = g.vertex_of(first.opposite());
    let target = g.vertex_of(first);
    let mut prev: Vec<Option<HalfEdge>> = vec![None; g.num_vertices()];
    let mut seen = vec![false; g.num_vertices()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        if u == target {
            let mut steps = Vec::new();
            let mut v = u;
            while v != start {
                let h = prev[v].unwrap();
                steps.push(h);
                v = g.vertex_of(h);
            }
            steps.push(first);
            steps.reverse();
            return Some(Path::cycle(steps));
        }
        for &h in g.incident(u) {
            if !comp.contains(&h.edge) {
                continue;
            }
            let t = ta.get(h).expect("component tangent");
            if angles_equal(t, PI, ANGLE_TOL) {
                continue;
            }
            let w = g.vertex_of(h.opposite());
            if !seen[w] {
                seen[w] = true;
                prev[w] = Some(h);
                queue.push_back(w);
            }
        }
    }
    None
}
