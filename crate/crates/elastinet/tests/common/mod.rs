//! Brute-force oracles and the exhaustive small-graph families they are compared on.
#![allow(dead_code)]

use std::f64::consts::PI;

use elastinet::classify::{check_angle_condition_with, stratify, ClassifyOptions, StrataVerdict};
use elastinet::graph::{AngledGraph, EdgeSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Angles are integers modulo `LATTICE` in units of `2π / LATTICE`.
pub const LATTICE: i64 = 12;

pub fn rad(k: i64) -> f64 {
    k.rem_euclid(LATTICE) as f64 * 2.0 * PI / LATTICE as f64
}

const FULL: [i64; 12] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];
/// Axis-aligned and collinear tangents make positive straight realizations common.
const AXES: [i64; 4] = [0, 3, 6, 9];
const LINE: [i64; 2] = [0, 6];

#[derive(Clone, Debug)]
pub struct LatticeGraph {
    pub num_vertices: usize,
    /// `(v0, v1, d0, d1)`
    pub edges: Vec<(usize, usize, i64, i64)>,
}

impl LatticeGraph {
    pub fn build(&self) -> AngledGraph {
        let specs: Vec<EdgeSpec> = self
            .edges
            .iter()
            .enumerate()
            .map(|(k, &(a, b, d0, d1))| {
                EdgeSpec::new(
                    format!("e{k}"),
                    format!("v{a}"),
                    format!("v{b}"),
                    rad(d0),
                    rad(d1),
                )
            })
            .collect();
        AngledGraph::build(&specs).expect("lattice graphs are valid")
    }
}

/// Every multiset of `k` endpoint pairs (loops included) on `nv` vertices, `1 ≤ k ≤ max_edges`.
pub fn topologies(nv: usize, max_edges: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..nv).flat_map(|a| (a..nv).map(move |b| (a, b))).collect();
    let mut out = Vec::new();
    fn extend(
        pairs: &[(usize, usize)],
        from: usize,
        left: usize,
        cur: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if left == 0 {
            return;
        }
        for i in from..pairs.len() {
            cur.push(pairs[i]);
            extend(pairs, i, left - 1, cur, out);
            cur.pop();
        }
    }
    extend(&pairs, 0, max_edges, &mut Vec::new(), &mut out);
    out
}

/// Directions from hidden rotations and per-edge tangents drawn from `palette`, each end perturbed
/// with probability `noise`.
pub fn directions(
    topology: &[(usize, usize)],
    nv: usize,
    noise: f64,
    palette: &[i64],
    rng: &mut ChaCha8Rng,
) -> LatticeGraph {
    let rot: Vec<i64> = (0..nv).map(|_| rng.gen_range(0..LATTICE)).collect();
    let edges = topology
        .iter()
        .map(|&(a, b)| {
            let t = palette[rng.gen_range(0..palette.len())];
            let mut d0 = t - rot[a];
            let mut d1 = t + LATTICE / 2 - rot[b];
            if rng.gen_bool(noise) {
                d0 += rng.gen_range(1..LATTICE);
            }
            if rng.gen_bool(noise) {
                d1 += rng.gen_range(1..LATTICE);
            }
            (a, b, d0.rem_euclid(LATTICE), d1.rem_euclid(LATTICE))
        })
        .collect();
    LatticeGraph {
        num_vertices: nv,
        edges,
    }
}

fn all_rotations(nv: usize) -> impl Iterator<Item = Vec<i64>> {
    (0..(LATTICE as usize).pow(nv as u32)).map(move |mut code| {
        (0..nv)
            .map(|_| {
                let r = (code % LATTICE as usize) as i64;
                code /= LATTICE as usize;
                r
            })
            .collect()
    })
}

/// Rotations (indexed by vertex label) satisfying the angle condition, if any exist on the lattice.
pub fn angle_oracle(
    g: &LatticeGraph,
    singular: &[bool],
    real: &[Option<[i64; 2]>],
) -> Option<Vec<i64>> {
    all_rotations(g.num_vertices).find(|r| {
        g.edges.iter().enumerate().all(|(e, &(a, b, d0, d1))| {
            if singular[e] {
                (r[b] + d1 - r[a] - d0 - LATTICE / 2).rem_euclid(LATTICE) == 0
            } else {
                let [t0, t1] = real[e].expect("regular edges carry tangents");
                (r[a] + d0 - t0).rem_euclid(LATTICE) == 0
                    && (r[b] + d1 - t1).rem_euclid(LATTICE) == 0
            }
        })
    })
}

/// Null-space basis of a dense `rows × cols` matrix by row reduction with partial pivoting.
pub fn null_space(mut a: Vec<Vec<f64>>, cols: usize) -> Vec<Vec<f64>> {
    const TOL: f64 = 1e-9;
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(best) =
            (row..a.len()).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
        else {
            break;
        };
        if a[best][col].abs() < TOL {
            continue;
        }
        a.swap(row, best);
        let p = a[row][col];
        a[row].iter_mut().for_each(|x| *x /= p);
        for i in 0..a.len() {
            if i != row && a[i][col] != 0.0 {
                let f = a[i][col];
                let pivot_row = a[row].clone();
                a[i].iter_mut()
                    .zip(&pivot_row)
                    .for_each(|(x, y)| *x -= f * y);
            }
        }
        pivots.push(col);
        row += 1;
    }
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![0.0; cols];
            v[free] = 1.0;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[r][free];
            }
            v
        })
        .collect()
}

/// Largest support of a nonnegative straight realization of `edges` with tangent angles `tau`:
/// the union of the one-signed circuits of `[C·diag(cos τ); C·diag(sin τ)]`, `C` a cycle-space basis.
/// Zero-length edges still glue their endpoints, which the full cycle space accounts for.
pub fn support_oracle(g: &LatticeGraph, edges: &[usize], tau: &[i64]) -> Vec<usize> {
    let m = edges.len();
    let incidence: Vec<Vec<f64>> = (0..g.num_vertices)
        .map(|v| {
            edges
                .iter()
                .map(|&e| {
                    let (a, b, _, _) = g.edges[e];
                    (b == v) as i32 as f64 - (a == v) as i32 as f64
                })
                .collect()
        })
        .collect();
    let cycles = null_space(incidence, m);
    let mut support = vec![false; m];
    for mask in 1u32..(1 << m) {
        let cols: Vec<usize> = (0..m).filter(|c| mask & (1 << c) != 0).collect();
        let rows: Vec<Vec<f64>> = cycles
            .iter()
            .flat_map(|z| {
                let cos = cols
                    .iter()
                    .map(|&c| z[c] * rad(tau[edges[c]]).cos())
                    .collect();
                let sin = cols
                    .iter()
                    .map(|&c| z[c] * rad(tau[edges[c]]).sin())
                    .collect();
                [cos, sin]
            })
            .collect();
        let null = null_space(rows, cols.len());
        if null.len() != 1 {
            continue;
        }
        let v = &null[0];
        if v.iter().all(|x| *x > 1e-9) || v.iter().all(|x| *x < -1e-9) {
            for &c in &cols {
                support[c] = true;
            }
        }
    }
    (0..m).filter(|&c| support[c]).map(|c| edges[c]).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum OracleStrata {
    /// Nonempty levels `H₀ ⊋ H₁ ⊋ …`.
    Stratified(Vec<Vec<usize>>),
    NotStratified,
}

/// Greedy chain on the whole graph with virtual tangents from a brute-force rotation search.
pub fn strata_oracle(g: &LatticeGraph) -> OracleStrata {
    let all = vec![true; g.edges.len()];
    let none = vec![None; g.edges.len()];
    let Some(rot) = angle_oracle(g, &all, &none) else {
        return OracleStrata::NotStratified;
    };
    let tau: Vec<i64> = g.edges.iter().map(|&(a, _, d0, _)| rot[a] + d0).collect();
    let mut level: Vec<usize> = (0..g.edges.len()).collect();
    let mut levels = Vec::new();
    while !level.is_empty() {
        let support = support_oracle(g, &level, &tau);
        if support.is_empty() {
            return OracleStrata::NotStratified;
        }
        levels.push(level.clone());
        level.retain(|e| !support.contains(e));
    }
    OracleStrata::Stratified(levels)
}

pub fn library_strata(g: &AngledGraph) -> OracleStrata {
    let r = stratify(g, &g.all_edges());
    match r.verdict {
        StrataVerdict::NotStratified => OracleStrata::NotStratified,
        _ => OracleStrata::Stratified(r.strata),
    }
}

pub fn library_angle(g: &AngledGraph, singular: &[bool], real: &[Option<[i64; 2]>]) -> bool {
    let real: Vec<Option<[f64; 2]>> = real
        .iter()
        .map(|t| t.map(|[a, b]| [rad(a), rad(b)]))
        .collect();
    check_angle_condition_with(g, singular, &real, &ClassifyOptions::default()).pass
}

#[derive(Debug, Default)]
pub struct OracleStats {
    pub instances: usize,
    pub mismatches: Vec<String>,
    pub positives: usize,
    pub multi_level: usize,
}

/// Angle condition over all topologies on 3 vertex labels with ≤ `max_edges` edges, two direction
/// draws each, every singular subset, tangents mostly consistent with hidden rotations.
pub fn angle_family(max_edges: usize, seed: u64) -> OracleStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = OracleStats::default();
    let nv = 3;
    for topo in topologies(nv, max_edges) {
        for _ in 0..2 {
            let lg = directions(&topo, nv, 0.25, &FULL, &mut rng);
            let g = lg.build();
            let rot: Vec<i64> = (0..nv).map(|_| rng.gen_range(0..LATTICE)).collect();
            let ne = lg.edges.len();
            for mask in 0u32..(1 << ne) {
                let singular: Vec<bool> = (0..ne).map(|e| mask & (1 << e) != 0).collect();
                let real: Vec<Option<[i64; 2]>> = lg
                    .edges
                    .iter()
                    .enumerate()
                    .map(|(e, &(a, b, d0, d1))| {
                        (!singular[e]).then(|| {
                            let mut t = [
                                (rot[a] + d0).rem_euclid(LATTICE),
                                (rot[b] + d1).rem_euclid(LATTICE),
                            ];
                            if rng.gen_bool(0.15) {
                                t[rng.gen_range(0..2)] += rng.gen_range(1..LATTICE);
                            }
                            t
                        })
                    })
                    .collect();
                let expected = angle_oracle(&lg, &singular, &real).is_some();
                let got = library_angle(&g, &singular, &real);
                stats.instances += 1;
                stats.positives += expected as usize;
                if expected != got {
                    stats.mismatches.push(format!("{lg:?} singular={singular:?} real={real:?}: oracle {expected}, library {got}"));
                }
            }
        }
    }
    stats
}

/// Stratification of the whole graph over all topologies on 4 vertex labels with ≤ `max_edges` edges,
/// one direction draw per tangent palette.
pub fn strata_family(max_edges: usize, seed: u64) -> OracleStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = OracleStats::default();
    for topo in topologies(4, max_edges) {
        for (palette, noise) in [(&FULL[..], 0.1), (&AXES, 0.0), (&LINE, 0.0)] {
            let lg = directions(&topo, 4, noise, palette, &mut rng);
            let g = lg.build();
            let expected = strata_oracle(&lg);
            let got = library_strata(&g);
            stats.instances += 1;
            if let OracleStrata::Stratified(levels) = &expected {
                stats.positives += 1;
                stats.multi_level += (levels.len() > 1) as usize;
            }
            if expected != got {
                stats
                    .mismatches
                    .push(format!("{lg:?}: oracle {expected:?}, library {got:?}"));
            }
        }
    }
    stats
}
