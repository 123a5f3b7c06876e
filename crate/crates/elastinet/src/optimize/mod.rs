//! Minimization of the relaxed elastic energy (and of the bending energy at fixed lengths)
//! over networks with a prescribed angled graph.

mod layout;
mod lbfgs;
mod problem;

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{classify_with_tangents, ClassifyOptions, VerdictKind};
use crate::geometry::{bending, elastic_energy, Network, Point};
use crate::graph::{AngledGraph, HalfEdge};

pub use layout::{arc_length_guess, fit_rotations, initial_turning, spring_layout};
pub use lbfgs::{minimize as lbfgs_minimize, LbfgsOutcome, ARMIJO_C, MEMORY};
pub use problem::{EdgeMode, ExtractError, Problem};

/// Edges shorter than this fraction of the total length (or of one unit) collapse.
pub const DEGENERATE_FRACTION: f64 = 1e-3;
pub const MAX_PENALTY: f64 = 1e8;
pub const PERTURBATION: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    /// Chords per edge.
    pub samples: usize,
    /// Iteration cap of each inner quasi-Newton solve.
    pub max_iter: usize,
    pub max_outer: usize,
    pub tol_c: f64,
    pub tol_g: f64,
    pub seed: u64,
    pub restarts: usize,
    /// Rigid motion applied to the starting layout.
    pub init_rotation: f64,
    pub init_offset: [f64; 2],
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            samples: 64,
            max_iter: 5000,
            max_outer: 40,
            tol_c: 1e-7,
            tol_g: 1e-6,
            seed: 0,
            restarts: 4,
            init_rotation: 0.0,
            init_offset: [0.0, 0.0],
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MinimizeError {
    #[error("expected {expected} lengths, found {found}")]
    LengthCount { expected: usize, found: usize },
    #[error("prescribed lengths must be positive and finite")]
    NonPositiveLength,
    #[error("weights must be positive and finite")]
    BadWeights,
    #[error("at least two samples per edge and one restart are required")]
    BadOptions,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub iteration: usize,
    pub outer: usize,
    pub objective: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub seed: u64,
    pub energy: f64,
    pub converged: bool,
    pub degenerate_edges: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct MinimizeResult {
    pub network: Network,
    pub energy: f64,
    pub lengths: Vec<f64>,
    /// Largest closure defect over all edges.
    pub closure_residual: f64,
    pub degenerate_edges: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
    pub grad_norm: f64,
    pub verdict: VerdictKind,
    /// Collapsed edges whose limit is not classified degenerate.
    pub suspicious: bool,
    pub seed: u64,
    pub log: Vec<LogRow>,
    pub restarts: Vec<RestartSummary>,
    /// Exact end tangents `[θ_0, θ_M + π]` of the regular edges.
    pub end_tangents: Vec<Option<[f64; 2]>>,
}

fn check_common(g: &AngledGraph, opts: &MinimizeOptions) -> Result<(), MinimizeError> {
    if opts.samples < 2 || opts.restarts == 0 {
        return Err(MinimizeError::BadOptions);
    }
    let _ = g;
    Ok(())
}

pub fn minimize_relaxed(
    g: &AngledGraph,
    alpha: f64,
    beta: f64,
    opts: &MinimizeOptions,
) -> Result<MinimizeResult, MinimizeError> {
    if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(MinimizeError::BadWeights);
    }
    check_common(g, opts)?;
    Ok(run_restarts(g, alpha, beta, None, opts))
}

pub fn minimize_fixed_length(
    g: &AngledGraph,
    lengths: &[f64],
    alpha: f64,
    opts: &MinimizeOptions,
) -> Result<MinimizeResult, MinimizeError> {
    if lengths.len() != g.num_edges() {
        return Err(MinimizeError::LengthCount {
            expected: g.num_edges(),
            found: lengths.len(),
        });
    }
    if lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(MinimizeError::NonPositiveLength);
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(MinimizeError::BadWeights);
    }
    check_common(g, opts)?;
    Ok(run_restarts(g, alpha, 0.0, Some(lengths.to_vec()), opts))
}

fn run_restarts(
    g: &AngledGraph,
    alpha: f64,
    beta: f64,
    fixed: Option<Vec<f64>>,
    opts: &MinimizeOptions,
) -> MinimizeResult {
    let mut runs: Vec<MinimizeResult> = (0..opts.restarts as u64)
        .into_par_iter()
        .map(|r| {
            solve_once(
                g,
                alpha,
                beta,
                fixed.clone(),
                opts,
                opts.seed.wrapping_add(r),
                r > 0,
            )
        })
        .collect();
    let summaries: Vec<RestartSummary> = runs
        .iter()
        .map(|r| RestartSummary {
            seed: r.seed,
            energy: r.energy,
            converged: r.converged,
            degenerate_edges: r.degenerate_edges.clone(),
        })
        .collect();
    runs.sort_by(|a, b| {
        (!a.converged, a.energy, a.seed)
            .partial_cmp(&(!b.converged, b.energy, b.seed))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut best = runs.swap_remove(0);
    best.restarts = summaries;
    best
}

fn rotate(p: Point, angle: f64) -> Point {
    let (s, c) = angle.sin_cos();
    Point::new(c * p.x - s * p.y, s * p.x + c * p.y)
}

/// Starting point and winding lifts for one restart.
fn initial_point(
    g: &AngledGraph,
    fixed: Option<&[f64]>,
    opts: &MinimizeOptions,
) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
    let m = opts.samples;
    let base = spring_layout(g, opts.seed);
    let rot0 = fit_rotations(g, &base);
    let offset = Point::new(opts.init_offset[0], opts.init_offset[1]);
    let pos: Vec<Point> = base
        .iter()
        .map(|p| rotate(*p, opts.init_rotation) + offset)
        .collect();
    let rot: Vec<f64> = rot0.iter().map(|r| r + opts.init_rotation).collect();
    let mut lifts = Vec::with_capacity(g.num_edges());
    let mut blocks = Vec::with_capacity(g.num_edges());
    for e in 0..g.num_edges() {
        let [p0, p1] = g.endpoints(e);
        let turning = initial_turning(g, &base, &rot0, e);
        let first = rot[p0] + g.direction(HalfEdge::new(e, 0));
        let last = first + turning;
        let raw = last - (rot[p1] + g.direction(HalfEdge::new(e, 1)) - PI);
        lifts.push(TAU * (raw / TAU).round());
        let len = match fixed {
            Some(l) => l[e],
            None if p0 == p1 => 1.0,
            None => arc_length_guess((pos[p1] - pos[p0]).norm(), turning),
        };
        let mut block = Vec::with_capacity(m);
        if fixed.is_none() {
            block.push(len.ln());
        }
        block.extend((1..m).map(|j| first + turning * j as f64 / m as f64));
        blocks.push(block);
    }
    let mut x0 = Vec::with_capacity(3 * g.num_vertices());
    for v in 0..g.num_vertices() {
        x0.extend([pos[v].x, pos[v].y, rot[v]]);
    }
    (x0, blocks, lifts)
}

/// Rotations made exactly consistent along collapsed edges.
fn snap_rotations(p: &Problem, x: &mut [f64]) {
    let g = p.graph();
    let mut done = vec![false; g.num_vertices()];
    for start in 0..g.num_vertices() {
        if done[start] {
            continue;
        }
        done[start] = true;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &h in g.incident(v) {
                let EdgeMode::Pinned { kappa } = p.modes()[h.edge] else {
                    continue;
                };
                let w = g.vertex_of(h.opposite());
                if done[w] {
                    continue;
                }
                let phi_v = x[3 * v + 2];
                x[3 * w + 2] = if h.end == 0 {
                    phi_v + kappa
                } else {
                    phi_v - kappa
                };
                done[w] = true;
                stack.push(w);
            }
        }
    }
}

fn solve_once(
    g: &AngledGraph,
    alpha: f64,
    beta: f64,
    fixed: Option<Vec<f64>>,
    opts: &MinimizeOptions,
    seed: u64,
    perturb: bool,
) -> MinimizeResult {
    let (head, blocks, lifts) = initial_point(g, fixed.as_deref(), opts);
    let n = g.num_edges();
    let mut problem = Problem::new(
        g.clone(),
        alpha,
        beta,
        opts.samples,
        fixed.clone(),
        lifts,
        &vec![false; n],
    );
    let mut x = head;
    for b in &blocks {
        x.extend_from_slice(b);
    }
    debug_assert_eq!(x.len(), problem.num_vars());
    if perturb {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        x.iter_mut()
            .for_each(|v| *v += rng.gen_range(-PERTURBATION..PERTURBATION));
    }

    let mut mu = vec![0.0; problem.num_constraints()];
    let mut rho = 10.0;
    let mut log = Vec::new();
    let mut iterations = 0;
    let mut prev_residual = f64::INFINITY;
    let mut converged = false;
    let mut grad_norm = f64::INFINITY;
    for outer in 0..opts.max_outer {
        let start_iter = iterations;
        let outcome = {
            let p = &problem;
            let mu_ref = &mu;
            let mut step_values = Vec::new();
            let out = lbfgs_minimize(
                &mut x,
                |y, grad| p.augmented(y, mu_ref, rho, grad),
                opts.tol_g,
                opts.max_iter,
                |v| step_values.push(v),
            );
            for (k, v) in step_values.into_iter().enumerate() {
                log.push(LogRow {
                    iteration: start_iter + k + 1,
                    outer,
                    objective: v,
                    residual: f64::NAN,
                });
            }
            out
        };
        iterations += outcome.iterations;
        grad_norm = outcome.grad_norm;
        let c = problem.constraints(&x);
        let residual = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for row in log.iter_mut().skip_while(|r| r.outer != outer) {
            row.residual = residual;
        }
        if log.last().is_none_or(|r| r.outer != outer) {
            log.push(LogRow {
                iteration: iterations,
                outer,
                objective: outcome.value,
                residual,
            });
        }

        if fixed.is_none() {
            let lengths: Vec<f64> = (0..n).map(|e| problem.length(&x, e)).collect();
            let total: f64 = lengths.iter().sum();
            let threshold = DEGENERATE_FRACTION * total.max(1.0);
            let collapse: Vec<usize> = (0..n)
                .filter(|&e| {
                    matches!(problem.modes()[e], EdgeMode::Free { .. }) && lengths[e] < threshold
                })
                .collect();
            if !collapse.is_empty() {
                let old_rows = row_ranges(&problem);
                let (next, y) = problem.pin(&x, &collapse);
                let new_rows = row_ranges(&next);
                let mut next_mu = vec![0.0; next.num_constraints()];
                for e in 0..n {
                    if !collapse.contains(&e) {
                        let (a, b) = (old_rows[e], new_rows[e]);
                        next_mu[b.0..b.0 + b.1].copy_from_slice(&mu[a.0..a.0 + a.1]);
                    }
                }
                problem = next;
                x = y;
                mu = next_mu;
                prev_residual = f64::INFINITY;
                continue;
            }
        }

        if residual <= opts.tol_c && outcome.converged {
            converged = true;
            break;
        }
        for (m, ci) in mu.iter_mut().zip(&c) {
            *m -= rho * ci;
        }
        if residual > 0.25 * prev_residual {
            rho = (rho * 10.0).min(MAX_PENALTY);
        }
        prev_residual = residual;
    }

    snap_rotations(&problem, &mut x);
    let network = problem.reconstruct(&x);
    let energy = if fixed.is_some() {
        alpha
            * network
                .curves()
                .iter()
                .filter(|c| !c.is_singular())
                .map(bending)
                .sum::<f64>()
    } else {
        elastic_energy(&network, alpha, beta).total
    };
    let pinned = problem.pinned();
    let end_tangents = problem.end_tangents(&x);
    let verdict =
        classify_with_tangents(g, &pinned, &end_tangents, &ClassifyOptions::default()).kind;
    let degenerate_edges: Vec<usize> = (0..n).filter(|&e| pinned[e]).collect();
    let suspicious = verdict == VerdictKind::Inadmissible
        || (!degenerate_edges.is_empty() && verdict != VerdictKind::Degenerate);
    let closure = problem.closure_residuals(&x);
    MinimizeResult {
        lengths: (0..n).map(|e| problem.length(&x, e)).collect(),
        closure_residual: closure.iter().fold(0.0, |m: f64, v| m.max(*v)),
        network,
        energy,
        degenerate_edges,
        iterations,
        converged,
        grad_norm,
        verdict,
        suspicious,
        seed,
        log,
        restarts: Vec::new(),
        end_tangents,
    }
}

/// `(first row, row count)` per edge.
fn row_ranges(p: &Problem) -> Vec<(usize, usize)> {
    let mut row = 0;
    p.modes()
        .iter()
        .map(|m| {
            let k = if matches!(m, EdgeMode::Free { .. }) {
                2
            } else {
                3
            };
            row += k;
            (row - k, k)
        })
        .collect()
}
