//! Reference graphs and networks used by tests, the CLI and the FFI layer.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI, TAU};

use crate::geometry::{arc, DiscreteCurve, Network, Point};
use crate::graph::{AngledGraph, EdgeSpec};

fn graph(specs: &[(&str, &str, &str, f64, f64)]) -> AngledGraph {
    let edges: Vec<EdgeSpec> = specs
        .iter()
        .map(|&(id, a, b, d0, d1)| EdgeSpec::new(id, a, b, d0, d1))
        .collect();
    AngledGraph::build(&edges).expect("fixture graph is valid")
}

/// Polyline with its last point moved exactly onto `end`.
pub fn snapped(mut points: Vec<Point>, end: Point) -> DiscreteCurve {
    *points.last_mut().unwrap() = end;
    DiscreteCurve::new(points).expect("fixture curve is valid")
}

/// Circular arc from `start` to `end` leaving at `heading` (a segment when the chord is along `heading`).
pub fn arc_between(start: Point, end: Point, heading: f64, m: usize) -> DiscreteCurve {
    let chord = end - start;
    let c = chord.norm();
    let half_turn = crate::graph::wrap_signed(chord.y.atan2(chord.x) - heading);
    if half_turn.abs() < 1e-15 {
        return snapped(arc(start, heading, 0.0, c, m), end);
    }
    let turn = 2.0 * half_turn;
    let radius = c / (2.0 * half_turn.sin().abs());
    let len = radius * turn.abs();
    snapped(arc(start, heading, turn / len, len, m), end)
}

/// Three edges joining the same two junctions with all directions 2π/3 apart.
pub fn theta_graph() -> AngledGraph {
    graph(&[
        ("E1", "A", "B", 2.0 * PI / 3.0, FRAC_PI_3),
        ("E2", "A", "B", 0.0, PI),
        ("E3", "A", "B", 4.0 * PI / 3.0, 5.0 * FRAC_PI_3),
    ])
}

/// Theta with the same three directions listed at both junctions.
pub fn theta_graph_uniform() -> AngledGraph {
    let d = [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0];
    graph(&[
        ("E1", "a", "b", d[0], d[0]),
        ("E2", "a", "b", d[1], d[1]),
        ("E3", "a", "b", d[2], d[2]),
    ])
}

/// Embedded Theta network: a straight middle edge of unit length and two outer arcs.
pub fn theta_network(m: usize) -> Network {
    let a = Point::new(-0.5, 0.0);
    let b = Point::new(0.5, 0.0);
    let curves = vec![
        arc_between(a, b, 2.0 * PI / 3.0, m),
        arc_between(a, b, 0.0, m),
        arc_between(a, b, 4.0 * PI / 3.0, m),
    ];
    Network::new(theta_graph(), curves).expect("theta network is incident")
}

/// Five edges on four junctions, stratified straight of step 2 on `{E3, E4, E5}`.
pub fn strstr_graph() -> AngledGraph {
    graph(&[
        ("E1", "A", "C", FRAC_PI_2, 3.0 * FRAC_PI_2),
        ("E2", "A", "B", FRAC_PI_2, 3.0 * FRAC_PI_2),
        ("E3", "C", "B", 0.0, PI),
        ("E4", "C", "D", 0.0, PI),
        ("E5", "B", "D", FRAC_PI_2, 3.0 * FRAC_PI_2),
    ])
}

pub fn strstr_triangle() -> Vec<usize> {
    vec![2, 3, 4]
}

pub fn limitstrstr_graph() -> AngledGraph {
    graph(&[
        ("E1", "A", "B", 0.0, PI),
        ("E2", "A", "C", 0.0, PI),
        ("E3", "B", "C", FRAC_PI_2, 3.0 * FRAC_PI_2),
        ("E4", "B", "D", 3.0 * FRAC_PI_4, FRAC_PI_4),
        ("E5", "C", "D", 5.0 * FRAC_PI_4, 7.0 * FRAC_PI_4),
    ])
}

/// `E1, E2, E3` collapsed at the origin, `E4` and `E5` quarter arcs to `(-1, 0)`.
pub fn limitstrstr_network(m: usize) -> Network {
    let o = Point::zeros();
    let d = Point::new(-1.0, 0.0);
    let curves = vec![
        DiscreteCurve::singular(o),
        DiscreteCurve::singular(o),
        DiscreteCurve::singular(o),
        arc_between(o, d, 3.0 * FRAC_PI_4, m),
        arc_between(o, d, 5.0 * FRAC_PI_4, m),
    ];
    Network::new(limitstrstr_graph(), curves).expect("incident")
}

/// Two loops joined by a bridge.
pub fn esempiodeg_graph() -> AngledGraph {
    graph(&[
        ("E1", "P", "P", FRAC_PI_6, 5.0 * FRAC_PI_6),
        ("E2", "P", "Q", 3.0 * FRAC_PI_2, FRAC_PI_2),
        ("E3", "Q", "Q", 7.0 * FRAC_PI_6, 11.0 * FRAC_PI_6),
    ])
}

/// Teardrop loop at the origin leaving at `heading`: straight run, arc turning 5π/3, straight run back.
fn teardrop(heading: f64, m: usize) -> DiscreteCurve {
    let o = Point::zeros();
    let u = Point::new(heading.cos(), heading.sin());
    let p1 = u;
    let turn = 5.0 * PI / 3.0;
    let radius = 3f64.sqrt();
    let mut pts = arc(o, heading, 0.0, 1.0, m);
    let bend = arc(p1, heading, 1.0 / radius, radius * turn, 2 * m);
    let p2 = *bend.last().unwrap();
    pts.extend_from_slice(&bend[1..]);
    let back = arc(p2, heading + turn, 0.0, 1.0, m);
    pts.extend_from_slice(&back[1..]);
    snapped(pts, o)
}

/// Bridge collapsed to the junction shared by both loops.
pub fn esempiodeg_network(m: usize) -> Network {
    let curves = vec![
        teardrop(FRAC_PI_6, m),
        DiscreteCurve::singular(Point::zeros()),
        teardrop(7.0 * FRAC_PI_6, m),
    ];
    Network::new(esempiodeg_graph(), curves).expect("incident")
}

/// Four-cycle `E1..E4` whose turns cancel, plus `E5` across its first junction pair and `E6` across the last.
pub fn condnec_graph() -> AngledGraph {
    graph(&[
        ("E1", "J0", "J1", 0.0, PI),
        ("E2", "J1", "J2", FRAC_PI_3, 4.0 * FRAC_PI_3),
        ("E3", "J2", "J3", 2.0 * FRAC_PI_3, 5.0 * FRAC_PI_3),
        ("E4", "J3", "J0", FRAC_PI_3, 4.0 * FRAC_PI_3),
        ("E5", "J0", "J1", 2.0 * FRAC_PI_3, 5.0 * FRAC_PI_3),
        ("E6", "J2", "J3", 0.0, PI),
    ])
}

pub fn condnec_cycle() -> Vec<usize> {
    vec![0, 1, 2, 3]
}

/// Full circle of radius `r` through the origin, leaving it at `heading` (counterclockwise).
pub fn circle_through_origin(heading: f64, r: f64, m: usize) -> DiscreteCurve {
    snapped(
        arc(Point::zeros(), heading, 1.0 / r, TAU * r, m),
        Point::zeros(),
    )
}

/// The four-cycle collapsed at the origin; `tilt` rotates the `E5` circle.
pub fn condnec_network(m: usize, tilt: f64) -> Network {
    let o = Point::zeros();
    let curves = vec![
        DiscreteCurve::singular(o),
        DiscreteCurve::singular(o),
        DiscreteCurve::singular(o),
        DiscreteCurve::singular(o),
        circle_through_origin(2.0 * FRAC_PI_3 + tilt, 1.0, m),
        circle_through_origin(0.0, 1.0, m),
    ];
    Network::new(condnec_graph(), curves).expect("incident")
}

/// Right-angled four-cycle that is stratified straight but not straight.
pub fn controesempio_graph() -> AngledGraph {
    graph(&[
        ("E1", "P0", "P1", 0.0, PI),
        ("E2", "P1", "P2", FRAC_PI_2, 3.0 * FRAC_PI_2),
        ("E3", "P2", "P3", 0.0, PI),
        ("E4", "P3", "P0", 3.0 * FRAC_PI_2, FRAC_PI_2),
    ])
}

/// Unit square traversed counterclockwise.
pub fn square_graph() -> AngledGraph {
    graph(&[
        ("E1", "P0", "P1", 0.0, PI),
        ("E2", "P1", "P2", FRAC_PI_2, 3.0 * FRAC_PI_2),
        ("E3", "P2", "P3", PI, 0.0),
        ("E4", "P3", "P0", 3.0 * FRAC_PI_2, FRAC_PI_2),
    ])
}

/// Single loop carrying a circle of radius `r`.
pub fn circle_network(r: f64, m: usize) -> Network {
    let g = graph(&[("C", "p", "p", FRAC_PI_2, 3.0 * FRAC_PI_2)]);
    let c = snapped(
        arc(Point::new(r, 0.0), FRAC_PI_2, 1.0 / r, TAU * r, m),
        Point::new(r, 0.0),
    );
    Network::new(g, vec![c]).expect("incident")
}

/// Segment `[0, len]` on the x-axis between two order-1 junctions.
pub fn segment_network(len: f64, m: usize) -> Network {
    let g = graph(&[("S", "a", "b", 0.0, PI)]);
    let c = snapped(arc(Point::zeros(), 0.0, 0.0, len, m), Point::new(len, 0.0));
    Network::new(g, vec![c]).expect("incident")
}
