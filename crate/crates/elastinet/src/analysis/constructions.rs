//! Explicit curves and networks: train tracks, endpoint straightening, recovery of
//! degenerate networks by regular ones, and the collapsing fan.

use std::f64::consts::FRAC_PI_2;

use thiserror::Error;

use crate::classify::{
    classify_network, ClassifyOptions, StrataReport, TangentAssignment, VerdictKind,
};
use crate::geometry::{arc, bending, elastic_energy, DiscreteCurve, GeometryError, Network, Point};
use crate::graph::{AngledGraph, EdgeSpec, HalfEdge};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructionError {
    #[error("parameter `{name}` = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("network is not degenerate")]
    NotDegenerate,
    #[error("endpoint lies behind the start along the heading")]
    Backwards,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn unit(angle: f64) -> Point {
    Point::new(angle.cos(), angle.sin())
}

fn energy(c: &DiscreteCurve) -> f64 {
    bending(c) + c.length()
}

fn exact_end(mut pts: Vec<Point>, end: Point) -> Result<DiscreteCurve, GeometryError> {
    *pts.last_mut().unwrap() = end;
    DiscreteCurve::new(pts)
}

/// Two unit arcs joining `(0,0)` to `(2 sin θ, h)`, horizontal at both ends, `θ = arccos(1 − h/2)`.
/// Uses `2·half + 1` chords so the inflection sits at a chord midpoint.
pub fn make_train_tracks(h: f64, half: usize) -> Result<DiscreteCurve, ConstructionError> {
    if !(h > 0.0 && h <= 2.0) {
        return Err(ConstructionError::OutOfRange {
            name: "h",
            value: h,
        });
    }
    let theta = (1.0 - h / 2.0).acos();
    let m = 2 * half + 1;
    let ds = 2.0 * theta / m as f64;
    let pts: Vec<Point> = (0..=m)
        .map(|j| {
            let s = j as f64 * ds;
            if s <= theta {
                Point::new(s.sin(), 1.0 - s.cos())
            } else {
                // second arc, mirrored through the inflection point
                let u = 2.0 * theta - s;
                Point::new(2.0 * theta.sin() - u.sin(), h - (1.0 - u.cos()))
            }
        })
        .collect();
    Ok(exact_end(pts, Point::new(2.0 * theta.sin(), h))?)
}

/// S-shaped pair of congruent arcs from `start` to `end`, with heading `heading` at both ends.
pub fn train_track_between(
    start: Point,
    end: Point,
    heading: f64,
    m: usize,
) -> Result<DiscreteCurve, ConstructionError> {
    let u = unit(heading);
    let n = Point::new(-u.y, u.x);
    let d = end - start;
    let along = d.dot(&u);
    let lat = d.dot(&n);
    if !(along > 0.0) {
        return Err(ConstructionError::Backwards);
    }
    let half = m.div_ceil(2).max(1);
    if lat.abs() <= 1e-15 * along {
        return Ok(exact_end(arc(start, heading, 0.0, along, 2 * half), end)?);
    }
    let phi = 2.0 * (lat / along).atan();
    let radius = along / (2.0 * phi.sin().abs());
    let len = radius * phi.abs();
    let k = phi.signum() / radius;
    let first = arc(start, heading, k, len, half);
    let mid = *first.last().unwrap();
    let second = arc(mid, heading + phi, -k, len, half);
    let mut pts = first;
    pts.extend_from_slice(&second[1..]);
    Ok(exact_end(pts, end)?)
}

/// C² cutoff: 1 on `[0, 1/4]`, 0 on `[1/2, 1]`.
fn cutoff(u: f64) -> f64 {
    let x = ((u - 0.25) * 4.0).clamp(0.0, 1.0);
    1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

/// Result of straightening: the curve and how its leading straight run is stored.
#[derive(Clone, Debug)]
pub struct Straightened {
    pub curve: DiscreteCurve,
    /// Length of the leading straight run.
    pub run: f64,
    /// Index of the point where the run ends.
    pub run_end: usize,
}

/// Straightens the start of `c` over a run of length at most `eps · min(1, L)`.
pub fn straighten_start(c: &DiscreteCurve, eps: f64) -> Result<Straightened, ConstructionError> {
    if !(eps > 0.0) {
        return Err(ConstructionError::OutOfRange {
            name: "eps",
            value: eps,
        });
    }
    if c.is_singular() {
        return Err(GeometryError::SingularCurve.into());
    }
    let pts = c.points();
    let chords = c.chord_lengths();
    let total: f64 = chords.iter().sum();
    let mut s = vec![0.0];
    for ch in &chords {
        s.push(s.last().unwrap() + ch);
    }
    let t0 = unit(c.start_tangent_angle());
    let h = total / chords.len() as f64;
    let budget = energy(c) * (1.0 + eps);
    let mut delta = (eps * total.min(1.0)).min(total / 16.0);
    loop {
        let k = ((delta / h).ceil() as usize).max(2);
        let mut out: Vec<Point> = (0..k)
            .map(|i| pts[0] + t0 * (delta * i as f64 / k as f64))
            .collect();
        out.extend(
            pts.iter()
                .zip(&s)
                .map(|(p, &si)| p + t0 * (delta * cutoff(si / total))),
        );
        let curve = DiscreteCurve::new(out)?;
        if energy(&curve) <= budget || delta < 1e-12 * total {
            return Ok(Straightened {
                curve,
                run: delta,
                run_end: k,
            });
        }
        delta *= 0.5;
    }
}

pub fn straighten_endpoint(
    c: &DiscreteCurve,
    eps: f64,
) -> Result<DiscreteCurve, ConstructionError> {
    Ok(straighten_start(c, eps)?.curve)
}

/// Arc of radius `r` and length `2ar` flanked by two arcs of radius `r·cot a` and length `a·r·cot a`.
pub fn make_collapsing_fan(
    r: f64,
    a: f64,
    m: usize,
) -> Result<[DiscreteCurve; 3], ConstructionError> {
    if !(r > 0.0) {
        return Err(ConstructionError::OutOfRange {
            name: "r",
            value: r,
        });
    }
    if !(a > 0.0 && a < FRAC_PI_2) {
        return Err(ConstructionError::OutOfRange {
            name: "a",
            value: a,
        });
    }
    let big = r / a.tan();
    // middle arc symmetric about the y axis, turning clockwise over the top
    let mid_start = Point::new(-r * a.sin(), r * a.cos());
    let middle = DiscreteCurve::new(arc(mid_start, a, -1.0 / r, 2.0 * a * r, m))?;
    let left = DiscreteCurve::new(arc(mid_start, FRAC_PI_2 + a, 1.0 / big, a * big, m))?;
    let right_start = middle.end();
    let right = DiscreteCurve::new(arc(right_start, FRAC_PI_2 - a, -1.0 / big, a * big, m))?;
    Ok([left, middle, right])
}

/// Closed form of the fan energy with α = β = 1.
pub fn fan_energy(r: f64, a: f64) -> f64 {
    2.0 * (r * a / a.tan() + a * a.tan() / r) + 2.0 * a * r + 2.0 * a / r
}

/// The fan as a network of three separate edges whose directions match their tangents.
pub fn fan_network(r: f64, a: f64, m: usize) -> Result<Network, ConstructionError> {
    let curves = make_collapsing_fan(r, a, m)?;
    let specs: Vec<EdgeSpec> = curves
        .iter()
        .zip(["left", "middle", "right"])
        .map(|(c, id)| {
            EdgeSpec::new(
                id,
                format!("{id}0"),
                format!("{id}1"),
                c.start_tangent_angle(),
                c.end_tangent_angle(),
            )
        })
        .collect();
    let g = AngledGraph::build(&specs).expect("distinct ids");
    Ok(Network::new(g, curves.to_vec())?)
}

/// Network with a single train-track edge.
pub fn train_tracks_network(h: f64, half: usize) -> Result<Network, ConstructionError> {
    let c = make_train_tracks(h, half)?;
    let g = AngledGraph::build(&[EdgeSpec::new(
        "track",
        "start",
        "end",
        0.0,
        std::f64::consts::PI,
    )])
    .expect("one edge");
    Ok(Network::new(g, vec![c])?)
}

/// Scale of each stratum: `min(ε³, ε·ℓ²)` with `ℓ` the shortest segment one level up.
fn stratum_scales(report: &StrataReport, eps: f64, first_run: f64) -> Vec<f64> {
    let mut scales = Vec::with_capacity(report.strata.len());
    let mut prev = first_run;
    for (j, real) in report.realizations.iter().enumerate() {
        let s = (eps * eps * eps).min(eps * prev * prev);
        scales.push(s);
        let shortest = report.strata[j]
            .iter()
            .filter_map(|&e| real.lengths[e])
            .filter(|&l| l > 0.0)
            .fold(f64::INFINITY, f64::min);
        prev = s * shortest;
    }
    scales
}

/// Offsets of every vertex from its collapse point, summed over strata with each component centred.
fn stratum_offsets(g: &AngledGraph, report: &StrataReport, scales: &[f64]) -> Vec<Point> {
    let mut offset = vec![Point::zeros(); g.num_vertices()];
    for (j, (level, real)) in report.strata.iter().zip(&report.realizations).enumerate() {
        for comp in g.components(level) {
            let verts = g.vertices_of(&comp);
            let centre = verts
                .iter()
                .map(|&v| real.positions[v].expect("realized vertex"))
                .sum::<Point>()
                / verts.len() as f64;
            for v in verts {
                offset[v] += (real.positions[v].unwrap() - centre) * scales[j];
            }
        }
    }
    offset
}

/// Regular approximant of a degenerate network at scale `eps`, with `m` chords per new track.
pub fn desingularize(n: &Network, eps: f64, m: usize) -> Result<Network, ConstructionError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ConstructionError::OutOfRange {
            name: "eps",
            value: eps,
        });
    }
    let verdict = classify_network(n, &ClassifyOptions::default());
    if verdict.kind != VerdictKind::Degenerate {
        return Err(ConstructionError::NotDegenerate);
    }
    let report = verdict.strata.expect("degenerate verdict carries strata");
    let tangents: TangentAssignment = verdict
        .tangents
        .expect("degenerate verdict carries tangents");
    let g = n.graph();
    let sing = n.singular_edges();
    let touched: Vec<bool> = {
        let mut t = vec![false; g.num_vertices()];
        for v in g.vertices_of(&sing) {
            t[v] = true;
        }
        t
    };

    // straighten every regular end at a collapsed vertex
    let mut curves: Vec<DiscreteCurve> = n.curves().to_vec();
    let mut runs: Vec<[Option<(f64, usize)>; 2]> = vec![[None, None]; g.num_edges()];
    let mut shortest_run = f64::INFINITY;
    for e in n.regular_edges() {
        let [a, b] = g.endpoints(e);
        for (z, v) in [(0usize, a), (1, b)] {
            if !touched[v] {
                continue;
            }
            let oriented = if z == 0 {
                curves[e].clone()
            } else {
                curves[e].reversed()
            };
            let st = straighten_start(&oriented, eps)?;
            shortest_run = shortest_run.min(st.run);
            runs[e][z] = Some((st.run, st.run_end));
            curves[e] = if z == 0 {
                st.curve
            } else {
                st.curve.reversed()
            };
        }
    }
    if !shortest_run.is_finite() {
        shortest_run = eps;
    }

    let scales = stratum_scales(&report, eps, shortest_run);
    let offsets = stratum_offsets(g, &report, &scales);
    let position: Vec<Point> = (0..g.num_vertices())
        .map(|v| n.junction(v) + offsets[v])
        .collect();

    // replace each straight run by a track into the moved junction
    for e in n.regular_edges() {
        for (z, run) in runs[e].iter().enumerate() {
            let Some((_, run_end)) = *run else {
                continue;
            };
            let v = g.vertex_of(HalfEdge::new(e, z as u8));
            let oriented = if z == 0 {
                curves[e].clone()
            } else {
                curves[e].reversed()
            };
            let pts = oriented.points();
            let heading = oriented.start_tangent_angle();
            let track = train_track_between(position[v], pts[run_end], heading, m)?;
            let mut out = track.points().to_vec();
            out.extend_from_slice(&pts[run_end + 1..]);
            let spliced = DiscreteCurve::new(out)?;
            curves[e] = if z == 0 { spliced } else { spliced.reversed() };
        }
    }
    for &e in &sing {
        let [a, b] = g.endpoints(e);
        let heading = tangents.edge_direction(e).expect("virtual tangent");
        curves[e] = train_track_between(position[a], position[b], heading, m)?;
    }
    Ok(Network::new(g.clone(), curves)?)
}

/// Energy of [`desingularize`] output with α = β = 1, for convenience in sweeps.
pub fn desingularized_energy(n: &Network, eps: f64, m: usize) -> Result<f64, ConstructionError> {
    Ok(elastic_energy(&desingularize(n, eps, m)?, 1.0, 1.0).total)
}
