//! Discrete planar curves, networks and elastic energies.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{classify_network, ClassifyOptions, VerdictKind};
use crate::graph::{AngledGraph, HalfEdge};

pub type Point = Vector2<f64>;

/// Absolute distance within which curve endpoints meet at a junction.
pub const INCIDENCE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("curve has no points")]
    NoPoints,
    #[error("curve needs at least {0} points")]
    TooFewPoints(usize),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("consecutive points at index {0} coincide")]
    RepeatedPoint(usize),
    #[error("operation needs a regular curve")]
    SingularCurve,
    #[error("expected {expected} curves, found {found}")]
    CurveCount { expected: usize, found: usize },
    #[error("curve endpoints miss junction `{vertex}` by {distance:e}")]
    Incidence { vertex: String, distance: f64 },
    #[error("scale must be positive")]
    NonPositiveScale,
}

fn cross(a: &Point, b: &Point) -> f64 {
    a.x * b.y - a.y * b.x
}

fn angle_of(v: &Point) -> f64 {
    v.y.atan2(v.x)
}

/// Polyline image of one edge, or a single point for a collapsed edge.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteCurve {
    points: Vec<Point>,
}

impl DiscreteCurve {
    pub fn new(points: Vec<Point>) -> Result<Self, GeometryError> {
        if points.is_empty() {
            return Err(GeometryError::NoPoints);
        }
        if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if let Some(j) = points.windows(2).position(|w| w[0] == w[1]) {
            return Err(GeometryError::RepeatedPoint(j));
        }
        Ok(Self { points })
    }

    pub fn singular(at: Point) -> Self {
        Self { points: vec![at] }
    }

    pub fn is_singular(&self) -> bool {
        self.points.len() == 1
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Number of chords.
    pub fn segments(&self) -> usize {
        self.points.len() - 1
    }

    pub fn start(&self) -> Point {
        self.points[0]
    }

    pub fn end(&self) -> Point {
        *self.points.last().unwrap()
    }

    pub fn chord_lengths(&self) -> Vec<f64> {
        self.points
            .windows(2)
            .map(|w| (w[1] - w[0]).norm())
            .collect()
    }

    pub fn length(&self) -> f64 {
        self.chord_lengths().iter().sum()
    }

    pub fn chord_angles(&self) -> Vec<f64> {
        self.points
            .windows(2)
            .map(|w| angle_of(&(w[1] - w[0])))
            .collect()
    }

    /// Signed turning angle at each interior node.
    pub fn turning_angles(&self) -> Vec<f64> {
        self.points
            .windows(3)
            .map(|w| {
                let a = w[1] - w[0];
                let b = w[2] - w[1];
                cross(&a, &b).atan2(a.dot(&b))
            })
            .collect()
    }

    /// Direction of travel at the first point, extrapolated from the first two chords.
    pub fn start_tangent_angle(&self) -> f64 {
        let a = self.chord_angles()[0];
        match self.turning_angles().first() {
            Some(t) => a - 0.5 * t,
            None => a,
        }
    }

    /// Outer tangent at the last point (pointing back into the curve).
    pub fn end_tangent_angle(&self) -> f64 {
        let a = *self.chord_angles().last().unwrap();
        let forward = match self.turning_angles().last() {
            Some(t) => a + 0.5 * t,
            None => a,
        };
        forward + std::f64::consts::PI
    }

    pub fn reversed(&self) -> Self {
        Self {
            points: self.points.iter().rev().copied().collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            points: self.points.iter().map(|p| p * factor).collect(),
        }
    }

    pub fn translated(&self, by: Point) -> Self {
        Self {
            points: self.points.iter().map(|p| p + by).collect(),
        }
    }

    /// Quadrature weights: dual cells around interior nodes plus half chords at the ends.
    fn node_weights(&self) -> Vec<f64> {
        let c = self.chord_lengths();
        let m = c.len();
        let mut w = vec![0.0; m + 1];
        w[0] = 0.5 * c[0];
        w[m] = 0.5 * c[m - 1];
        for j in 1..m {
            w[j] = 0.5 * (c[j - 1] + c[j]);
        }
        w
    }

    fn checked_regular(&self) -> Result<(), GeometryError> {
        if self.is_singular() {
            Err(GeometryError::SingularCurve)
        } else {
            Ok(())
        }
    }
}

/// Signed curvature at every node: turning angle over the mean adjacent chord, with the
/// end nodes copying their neighbours.
pub fn curvature(c: &DiscreteCurve) -> Result<Vec<f64>, GeometryError> {
    if c.points.len() < 3 {
        return Err(GeometryError::TooFewPoints(3));
    }
    let chords = c.chord_lengths();
    let turns = c.turning_angles();
    let m = chords.len();
    let mut k = vec![0.0; m + 1];
    for j in 1..m {
        k[j] = turns[j - 1] / (0.5 * (chords[j - 1] + chords[j]));
    }
    k[0] = k[1];
    k[m] = k[m - 1];
    Ok(k)
}

/// `∫ k² ds` by the node quadrature; zero for one-chord and singular curves.
pub fn bending(c: &DiscreteCurve) -> f64 {
    if c.points.len() < 3 {
        return 0.0;
    }
    let k = curvature(c).expect("three points");
    k.iter().zip(c.node_weights()).map(|(k, w)| k * k * w).sum()
}

/// `∫ |k| ds` with the same quadrature as [`bending`].
pub fn total_curvature(c: &DiscreteCurve) -> Result<f64, GeometryError> {
    c.checked_regular()?;
    if c.points.len() < 3 {
        return Ok(0.0);
    }
    let k = curvature(c)?;
    Ok(k.iter()
        .zip(c.node_weights())
        .map(|(k, w)| k.abs() * w)
        .sum())
}

/// Resamples with `m` chords of identical length on the input polyline.
pub fn resample_constant_speed(
    c: &DiscreteCurve,
    m: usize,
) -> Result<DiscreteCurve, GeometryError> {
    c.checked_regular()?;
    if m == 0 {
        return Err(GeometryError::TooFewPoints(2));
    }
    let pts = &c.points;
    let total = c.length();
    if m == 1 {
        return DiscreteCurve::new(vec![pts[0], c.end()]);
    }
    let end = c.end();
    // Walks m-1 chords of length h; None when the polyline runs out first.
    let march = |h: f64| -> Option<Vec<Point>> {
        let mut out = Vec::with_capacity(m + 1);
        let mut p = pts[0];
        out.push(p);
        let (mut seg, mut t0) = (0usize, 0.0f64);
        for _ in 0..m - 1 {
            let mut found = None;
            while seg + 1 < pts.len() {
                let a = pts[seg];
                let d = pts[seg + 1] - a;
                // |a + t d - p|² = h², smallest root ≥ t0
                let f = a - p;
                let qa = d.dot(&d);
                let qb = 2.0 * f.dot(&d);
                let qc = f.dot(&f) - h * h;
                let disc = qb * qb - 4.0 * qa * qc;
                if disc >= 0.0 {
                    let s = disc.sqrt();
                    let r1 = (-qb - s) / (2.0 * qa);
                    let r2 = (-qb + s) / (2.0 * qa);
                    let root = [r1, r2]
                        .into_iter()
                        .filter(|&r| r >= t0 && r <= 1.0)
                        .fold(None, |acc: Option<f64>, r| {
                            Some(acc.map_or(r, |x| x.min(r)))
                        });
                    if let Some(t) = root {
                        found = Some(t);
                        break;
                    }
                }
                seg += 1;
                t0 = 0.0;
            }
            let t = found?;
            t0 = t;
            p = pts[seg] + (pts[seg + 1] - pts[seg]) * t;
            out.push(p);
        }
        Some(out)
    };
    let gap = |h: f64| -> f64 {
        match march(h) {
            Some(out) => (end - out[m - 1]).norm() - h,
            None => -h,
        }
    };
    let (mut lo, mut hi) = (0.0, total / (m as f64 - 1.0));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut out = march(lo).ok_or(GeometryError::TooFewPoints(2))?;
    out.push(end);
    DiscreteCurve::new(out)
}

/// Pairing of an angled graph with one curve per edge.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    graph: AngledGraph,
    curves: Vec<DiscreteCurve>,
    junctions: Vec<Point>,
}

impl Network {
    pub fn new(graph: AngledGraph, curves: Vec<DiscreteCurve>) -> Result<Self, GeometryError> {
        if curves.len() != graph.num_edges() {
            return Err(GeometryError::CurveCount {
                expected: graph.num_edges(),
                found: curves.len(),
            });
        }
        let endpoint = |h: HalfEdge| -> Point {
            let c = &curves[h.edge];
            if h.end == 0 {
                c.start()
            } else {
                c.end()
            }
        };
        let mut junctions = Vec::with_capacity(graph.num_vertices());
        for v in 0..graph.num_vertices() {
            let hs = graph.incident(v);
            let p = endpoint(hs[0]);
            for &h in &hs[1..] {
                let d = (endpoint(h) - p).norm();
                if d > INCIDENCE_TOL {
                    return Err(GeometryError::Incidence {
                        vertex: graph.vertex_label(v).to_string(),
                        distance: d,
                    });
                }
            }
            junctions.push(p);
        }
        Ok(Self {
            graph,
            curves,
            junctions,
        })
    }

    pub fn graph(&self) -> &AngledGraph {
        &self.graph
    }

    pub fn curves(&self) -> &[DiscreteCurve] {
        &self.curves
    }

    pub fn curve(&self, edge: usize) -> &DiscreteCurve {
        &self.curves[edge]
    }

    pub fn junction(&self, v: usize) -> Point {
        self.junctions[v]
    }

    pub fn singular_edges(&self) -> Vec<usize> {
        (0..self.curves.len())
            .filter(|&e| self.curves[e].is_singular())
            .collect()
    }

    pub fn regular_edges(&self) -> Vec<usize> {
        (0..self.curves.len())
            .filter(|&e| !self.curves[e].is_singular())
            .collect()
    }

    pub fn total_length(&self) -> f64 {
        self.curves
            .iter()
            .filter(|c| !c.is_singular())
            .map(DiscreteCurve::length)
            .sum()
    }

    /// Axis-aligned bounding box `(min, max)` of every stored point.
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in self.curves.iter().flat_map(|c| c.points()) {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (lo, hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeEnergy {
    pub length: f64,
    /// `∫ k² ds`
    pub bending: f64,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub total: f64,
    pub edges: Vec<EdgeEnergy>,
}

pub fn curve_energy(c: &DiscreteCurve, alpha: f64, beta: f64) -> EdgeEnergy {
    if c.is_singular() {
        return EdgeEnergy {
            length: 0.0,
            bending: 0.0,
            energy: 0.0,
        };
    }
    let length = c.length();
    let bending = bending(c);
    EdgeEnergy {
        length,
        bending,
        energy: alpha * bending + beta * length,
    }
}

/// `Σ (α ∫k² ds + β ℓ)` over the regular curves, summed in edge order.
pub fn elastic_energy(n: &Network, alpha: f64, beta: f64) -> EnergyBreakdown {
    let edges: Vec<EdgeEnergy> = n
        .curves
        .iter()
        .map(|c| curve_energy(c, alpha, beta))
        .collect();
    let total = edges.iter().map(|e| e.energy).sum();
    EnergyBreakdown { total, edges }
}

/// Energy on admissible (regular or degenerate) networks, `+∞` otherwise.
pub fn relaxed_energy(n: &Network, alpha: f64, beta: f64, opts: &ClassifyOptions) -> f64 {
    match classify_network(n, opts).kind {
        VerdictKind::Regular | VerdictKind::Degenerate => elastic_energy(n, alpha, beta).total,
        VerdictKind::Inadmissible => f64::INFINITY,
    }
}

/// Dilation about the origin.
pub fn rescale(n: &Network, factor: f64) -> Result<Network, GeometryError> {
    if !(factor > 0.0) || !factor.is_finite() {
        return Err(GeometryError::NonPositiveScale);
    }
    Ok(Network {
        graph: n.graph.clone(),
        curves: n.curves.iter().map(|c| c.scaled(factor)).collect(),
        junctions: n.junctions.iter().map(|p| p * factor).collect(),
    })
}

/// Sampled arc of a circle: `m` equal chords from `start`, initial heading `heading`,
/// signed curvature `k` (zero gives a segment) and arc length `len`.
pub fn arc(start: Point, heading: f64, k: f64, len: f64, m: usize) -> Vec<Point> {
    (0..=m)
        .map(|j| {
            let s = len * j as f64 / m as f64;
            start + arc_offset(heading, k, s)
        })
        .collect()
}

pub(crate) fn arc_offset(heading: f64, k: f64, s: f64) -> Point {
    if k.abs() * s < 1e-12 {
        return Point::new(heading.cos(), heading.sin()) * s;
    }
    // chord of length 2 sin(ks/2)/k along the mid heading; avoids cancellation for small turns
    let half = 0.5 * k * s;
    let chord = 2.0 * half.sin() / k;
    let mid = heading + half;
    Point::new(chord * mid.cos(), chord * mid.sin())
}
