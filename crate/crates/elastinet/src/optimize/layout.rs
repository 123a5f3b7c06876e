//! Starting points: spring layout of the junctions, rotations fitted to the chords, and
//! circular-arc guesses for every edge.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Point;
use crate::graph::{wrap_signed, AngledGraph, HalfEdge};

const SPRING_ROUNDS: usize = 300;

/// Fruchterman–Reingold layout, centred and scaled to unit diameter.
pub fn spring_layout(g: &AngledGraph, seed: u64) -> Vec<Point> {
    let n = g.num_vertices();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<Point> = (0..n)
        .map(|_| Point::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
        .collect();
    if n == 1 {
        return vec![Point::zeros()];
    }
    let k = (1.0 / n as f64).sqrt();
    let mut temp = 0.1;
    for _ in 0..SPRING_ROUNDS {
        let mut disp = vec![Point::zeros(); n];
        for a in 0..n {
            for b in a + 1..n {
                let d = pos[a] - pos[b];
                let dist = d.norm().max(1e-6);
                let push = d / dist * (k * k / dist);
                disp[a] += push;
                disp[b] -= push;
            }
        }
        for e in 0..g.num_edges() {
            let [a, b] = g.endpoints(e);
            if a == b {
                continue;
            }
            let d = pos[a] - pos[b];
            let dist = d.norm().max(1e-6);
            let pull = d / dist * (dist * dist / k);
            disp[a] -= pull;
            disp[b] += pull;
        }
        for (p, d) in pos.iter_mut().zip(&disp) {
            let len = d.norm();
            if len > 0.0 {
                *p += d / len * len.min(temp);
            }
        }
        temp *= 0.98;
    }
    let centre = pos.iter().sum::<Point>() / n as f64;
    let mut diameter: f64 = 0.0;
    for a in 0..n {
        for b in a + 1..n {
            diameter = diameter.max((pos[a] - pos[b]).norm());
        }
    }
    let scale = if diameter > 1e-12 {
        1.0 / diameter
    } else {
        1.0
    };
    pos.iter().map(|p| (p - centre) * scale).collect()
}

fn chord_angle(pos: &[Point], from: usize, to: usize) -> f64 {
    let d = pos[to] - pos[from];
    d.y.atan2(d.x)
}

/// Rotation per junction that best aligns outgoing directions with the chords to the neighbours.
pub fn fit_rotations(g: &AngledGraph, pos: &[Point]) -> Vec<f64> {
    (0..g.num_vertices())
        .map(|v| {
            let mut sum = Point::zeros();
            let mut first = None;
            for &h in g.incident(v) {
                if g.is_loop(h.edge) {
                    continue;
                }
                let other = g.vertex_of(h.opposite());
                let a = chord_angle(pos, v, other) - g.direction(h);
                sum += Point::new(a.cos(), a.sin());
                first.get_or_insert(a);
            }
            if sum.norm() > 1e-6 {
                sum.y.atan2(sum.x)
            } else {
                first.unwrap_or(0.0)
            }
        })
        .collect()
}

/// Total turning of each edge's initial arc, `θ_M − θ_0`.
pub fn initial_turning(g: &AngledGraph, pos: &[Point], rot: &[f64], e: usize) -> f64 {
    let [p0, p1] = g.endpoints(e);
    let a = rot[p0] + g.direction(HalfEdge::new(e, 0));
    let b = rot[p1] + g.direction(HalfEdge::new(e, 1)) - PI;
    if p0 == p1 {
        let corner = wrap_signed(a - b);
        if corner >= 0.0 {
            TAU - corner
        } else {
            -TAU - corner
        }
    } else {
        let c = chord_angle(pos, p0, p1);
        wrap_signed(c - a) + wrap_signed(b - c)
    }
}

/// Length of a circular arc with the given chord and total turning, clamped to `[c, 4c]`.
pub fn arc_length_guess(chord: f64, turning: f64) -> f64 {
    let half = 0.5 * turning.abs();
    let ratio = if half < 1e-9 {
        1.0
    } else {
        half / half.sin().max(1e-9)
    };
    chord * ratio.clamp(1.0, 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn layout_is_unit_diameter_and_deterministic() {
        let g = fixtures::strstr_graph();
        let a = spring_layout(&g, 3);
        let b = spring_layout(&g, 3);
        assert_eq!(a, b);
        let mut d: f64 = 0.0;
        for p in &a {
            for q in &a {
                d = d.max((p - q).norm());
            }
        }
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn theta_starts_symmetric() {
        let g = fixtures::theta_graph();
        let pos = spring_layout(&g, 0);
        let rot = fit_rotations(&g, &pos);
        let turns: Vec<f64> = (0..3).map(|e| initial_turning(&g, &pos, &rot, e)).collect();
        let mut sorted = turns.clone();
        sorted.sort_by(f64::total_cmp);
        assert!((sorted[0] + 4.0 * PI / 3.0).abs() < 1e-9);
        assert!(sorted[1].abs() < 1e-9);
        assert!((sorted[2] - 4.0 * PI / 3.0).abs() < 1e-9);
    }

    #[test]
    fn loop_turning_closes() {
        let g = fixtures::esempiodeg_graph();
        let pos = spring_layout(&g, 0);
        let rot = fit_rotations(&g, &pos);
        let t = initial_turning(&g, &pos, &rot, 0);
        // leaving at π/6 and arriving travelling at −π/6 leaves a π/3 corner
        assert!((t - 5.0 * PI / 3.0).abs() < 1e-9);
    }
}
