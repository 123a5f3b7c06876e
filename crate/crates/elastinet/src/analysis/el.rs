//! Euler–Lagrange residuals of the elastic energy on a network.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{curvature, DiscreteCurve, Network, Point};
use crate::graph::{AngledGraph, HalfEdge};

/// Fewest chords for which the endpoint stencils are defined.
pub const MIN_EL_SEGMENTS: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeResidual {
    pub edge: usize,
    pub sup: f64,
    pub l2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JunctionResidual {
    /// Vertices merged through collapsed edges, ascending.
    pub vertices: Vec<usize>,
    /// `|Σ_ends k − Σ_starts k|`
    pub curvature: f64,
    /// Norm of the force balance `Σ_ends F − Σ_starts F`, `F = 2α k' ν + (α k² − β) τ`.
    pub force: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ELReport {
    pub edges: Vec<EdgeResidual>,
    pub junctions: Vec<JunctionResidual>,
    /// Collapsed or undersampled edges that carry no residual.
    pub skipped: Vec<usize>,
}

impl ELReport {
    pub fn max_interior(&self) -> f64 {
        self.edges.iter().map(|e| e.sup).fold(0.0, f64::max)
    }

    pub fn max_junction(&self) -> f64 {
        self.junctions
            .iter()
            .map(|j| j.curvature.max(j.force))
            .fold(0.0, f64::max)
    }
}

/// Curvature samples with their arclength positions.
struct Profile {
    k: Vec<f64>,
    s: Vec<f64>,
}

impl Profile {
    fn of(c: &DiscreteCurve) -> Self {
        let k = curvature(c).expect("enough points");
        let mut s = vec![0.0];
        for ch in c.chord_lengths() {
            s.push(s.last().unwrap() + ch);
        }
        Self { k, s }
    }

    fn second_derivative(&self, j: usize) -> f64 {
        let (k, s) = (&self.k, &self.s);
        let hl = s[j] - s[j - 1];
        let hr = s[j + 1] - s[j];
        2.0 * ((k[j + 1] - k[j]) / hr - (k[j] - k[j - 1]) / hl) / (hl + hr)
    }

    /// Quadratic extrapolation `(k, k')` to the start from the first three interior nodes.
    fn at_start(&self) -> (f64, f64) {
        let k = &self.k;
        let h = self.s[1];
        (
            3.0 * k[1] - 3.0 * k[2] + k[3],
            (-5.0 * k[1] + 8.0 * k[2] - 3.0 * k[3]) / (2.0 * h),
        )
    }

    fn at_end(&self) -> (f64, f64) {
        let m = self.k.len() - 1;
        let k = &self.k;
        let h = self.s[m] - self.s[m - 1];
        (
            3.0 * k[m - 1] - 3.0 * k[m - 2] + k[m - 3],
            (5.0 * k[m - 1] - 8.0 * k[m - 2] + 3.0 * k[m - 3]) / (2.0 * h),
        )
    }
}

/// Interior residual `2α k'' + α k³ − β k` at nodes `2..=M-2`, paired with arclength.
pub fn interior_residual(c: &DiscreteCurve, alpha: f64, beta: f64) -> Vec<(f64, f64)> {
    let p = Profile::of(c);
    let m = p.k.len() - 1;
    (2..=m - 2)
        .map(|j| {
            let k = p.k[j];
            (
                p.s[j],
                2.0 * alpha * p.second_derivative(j) + alpha * k * k * k - beta * k,
            )
        })
        .collect()
}

fn edge_residual(edge: usize, c: &DiscreteCurve, alpha: f64, beta: f64) -> EdgeResidual {
    let r = interior_residual(c, alpha, beta);
    let sup = r.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
    // trapezoid on the (possibly uneven) node grid
    let l2 = r
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 * w[0].1 + w[1].1 * w[1].1))
        .sum::<f64>()
        .sqrt();
    EdgeResidual { edge, sup, l2 }
}

/// Vertex clusters glued by collapsed edges.
fn clusters(g: &AngledGraph, singular: &[bool]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..g.num_vertices()).collect();
    fn find(p: &mut [usize], v: usize) -> usize {
        let mut r = v;
        while p[r] != r {
            r = p[r];
        }
        p[v] = r;
        r
    }
    for e in (0..g.num_edges()).filter(|&e| singular[e]) {
        let [a, b] = g.endpoints(e);
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra.max(rb)] = ra.min(rb);
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..g.num_vertices() {
        let r = find(&mut parent, v);
        groups.entry(r).or_default().push(v);
    }
    groups.into_values().collect()
}

pub fn el_residual(n: &Network, alpha: f64, beta: f64) -> ELReport {
    let g = n.graph();
    let usable: Vec<bool> = n
        .curves()
        .iter()
        .map(|c| !c.is_singular() && c.segments() >= MIN_EL_SEGMENTS)
        .collect();
    let mut edges = Vec::new();
    let mut skipped = Vec::new();
    for (e, c) in n.curves().iter().enumerate() {
        if usable[e] {
            edges.push(edge_residual(e, c, alpha, beta));
        } else {
            skipped.push(e);
        }
    }
    let singular: Vec<bool> = n.curves().iter().map(DiscreteCurve::is_singular).collect();
    let profiles: Vec<Option<Profile>> = n
        .curves()
        .iter()
        .zip(&usable)
        .map(|(c, &u)| u.then(|| Profile::of(c)))
        .collect();
    let mut junctions = Vec::new();
    for cluster in clusters(g, &singular) {
        let mut scalar = 0.0;
        let mut force = Point::zeros();
        let mut touched = false;
        for &v in &cluster {
            for &h in g.incident(v) {
                let Some(p) = &profiles[h.edge] else { continue };
                touched = true;
                let c = n.curve(h.edge);
                let (k, dk, heading, sign) = match h {
                    HalfEdge { end: 0, .. } => {
                        let (k, dk) = p.at_start();
                        (k, dk, c.start_tangent_angle(), -1.0)
                    }
                    _ => {
                        let (k, dk) = p.at_end();
                        (k, dk, c.end_tangent_angle() - std::f64::consts::PI, 1.0)
                    }
                };
                let tau = Point::new(heading.cos(), heading.sin());
                let nu = Point::new(-tau.y, tau.x);
                scalar += sign * k;
                force += (nu * (2.0 * alpha * dk) + tau * (alpha * k * k - beta)) * sign;
            }
        }
        if touched {
            junctions.push(JunctionResidual {
                vertices: cluster,
                curvature: scalar.abs(),
                force: force.norm(),
            });
        }
    }
    ELReport {
        edges,
        junctions,
        skipped,
    }
}
