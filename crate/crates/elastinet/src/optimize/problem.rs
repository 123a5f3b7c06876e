//! Discrete minimization problem in tangent-angle form.
//!
//! Variables: per vertex `(x, y, φ)`; per free edge `λ = ln ℓ` (relaxed mode only) and the
//! interior node angles `θ_1..θ_{M-1}`. End angles are `θ_0 = φ_{p0} + d0` and
//! `θ_M = φ_{p1} + d1 − π + lift`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::geometry::{DiscreteCurve, Network, Point};
use crate::graph::{AngledGraph, HalfEdge};

#[derive(Clone, Debug, PartialEq)]
pub enum EdgeMode {
    /// Regular edge; its variables start at `block`.
    Free { block: usize },
    /// Collapsed edge: endpoints coincide and `φ_{p1} − φ_{p0} = kappa`.
    Pinned { kappa: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtractError {
    #[error("edge {edge} has {found} segments, expected {expected}")]
    SampleMismatch {
        edge: usize,
        found: usize,
        expected: usize,
    },
    #[error("network has no regular edge")]
    NoRegularEdge,
}

#[derive(Clone, Debug)]
pub struct Problem {
    graph: AngledGraph,
    alpha: f64,
    beta: f64,
    m: usize,
    fixed: Option<Vec<f64>>,
    modes: Vec<EdgeMode>,
    lift: Vec<f64>,
    num_vars: usize,
    num_rows: usize,
}

fn u(a: f64) -> Point {
    Point::new(a.cos(), a.sin())
}

fn du(a: f64) -> Point {
    Point::new(-a.sin(), a.cos())
}

impl Problem {
    /// `fixed` holds prescribed lengths (fixed-length mode) or `None` for the relaxed problem.
    pub fn new(
        graph: AngledGraph,
        alpha: f64,
        beta: f64,
        m: usize,
        fixed: Option<Vec<f64>>,
        lift: Vec<f64>,
        pinned: &[bool],
    ) -> Self {
        assert!(m >= 2);
        assert_eq!(lift.len(), graph.num_edges());
        let mut next = 3 * graph.num_vertices();
        let mut rows = 0;
        let per_edge = if fixed.is_some() { m - 1 } else { m };
        let modes = (0..graph.num_edges())
            .map(|e| {
                if pinned[e] {
                    rows += 3;
                    let [a, b] = [HalfEdge::new(e, 0), HalfEdge::new(e, 1)];
                    EdgeMode::Pinned {
                        kappa: graph.direction(a) + PI - graph.direction(b),
                    }
                } else {
                    rows += 2;
                    let block = next;
                    next += per_edge;
                    EdgeMode::Free { block }
                }
            })
            .collect();
        Self {
            graph,
            alpha,
            beta,
            m,
            fixed,
            modes,
            lift,
            num_vars: next,
            num_rows: rows,
        }
    }

    pub fn relaxed(graph: AngledGraph, alpha: f64, beta: f64, m: usize) -> Self {
        let n = graph.num_edges();
        Self::new(graph, alpha, beta, m, None, vec![0.0; n], &vec![false; n])
    }

    pub fn fixed_length(graph: AngledGraph, lengths: Vec<f64>, alpha: f64, m: usize) -> Self {
        let n = graph.num_edges();
        Self::new(
            graph,
            alpha,
            0.0,
            m,
            Some(lengths),
            vec![0.0; n],
            &vec![false; n],
        )
    }

    pub fn graph(&self) -> &AngledGraph {
        &self.graph
    }

    pub fn samples(&self) -> usize {
        self.m
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_constraints(&self) -> usize {
        self.num_rows
    }

    pub fn modes(&self) -> &[EdgeMode] {
        &self.modes
    }

    pub fn lift(&self, e: usize) -> f64 {
        self.lift[e]
    }

    pub fn is_fixed_length(&self) -> bool {
        self.fixed.is_some()
    }

    pub fn vertex_index(v: usize) -> usize {
        3 * v
    }

    pub fn position(&self, x: &[f64], v: usize) -> Point {
        Point::new(x[3 * v], x[3 * v + 1])
    }

    pub fn rotation(&self, x: &[f64], v: usize) -> f64 {
        x[3 * v + 2]
    }

    /// Index of the first interior angle of a free edge.
    fn theta_start(&self, block: usize) -> usize {
        if self.fixed.is_some() {
            block
        } else {
            block + 1
        }
    }

    pub fn length(&self, x: &[f64], e: usize) -> f64 {
        match (&self.modes[e], &self.fixed) {
            (EdgeMode::Pinned { .. }, _) => 0.0,
            (EdgeMode::Free { .. }, Some(l)) => l[e],
            (EdgeMode::Free { block }, None) => x[*block].exp(),
        }
    }

    /// `θ_0..θ_M` of a free edge.
    pub fn node_angles(&self, x: &[f64], e: usize) -> Vec<f64> {
        let EdgeMode::Free { block } = self.modes[e] else {
            panic!("edge {e} is pinned")
        };
        let [p0, p1] = self.graph.endpoints(e);
        let first = self.rotation(x, p0) + self.graph.direction(HalfEdge::new(e, 0));
        let last =
            self.rotation(x, p1) + self.graph.direction(HalfEdge::new(e, 1)) - PI + self.lift[e];
        let t0 = self.theta_start(block);
        let mut th = Vec::with_capacity(self.m + 1);
        th.push(first);
        th.extend_from_slice(&x[t0..t0 + self.m - 1]);
        th.push(last);
        th
    }

    /// Variable index of node angle `j`, with end angles mapped to junction rotations.
    fn angle_var(&self, e: usize, block: usize, j: usize) -> usize {
        let [p0, p1] = self.graph.endpoints(e);
        if j == 0 {
            3 * p0 + 2
        } else if j == self.m {
            3 * p1 + 2
        } else {
            self.theta_start(block) + j - 1
        }
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let mut f = 0.0;
        for e in 0..self.modes.len() {
            if let EdgeMode::Free { .. } = self.modes[e] {
                let th = self.node_angles(x, e);
                let l = self.length(x, e);
                let s: f64 = th.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
                f += self.alpha * self.m as f64 / l * s + self.beta * l;
            }
        }
        f
    }

    pub fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        grad.iter_mut().for_each(|g| *g = 0.0);
        for e in 0..self.modes.len() {
            let EdgeMode::Free { block } = self.modes[e] else {
                continue;
            };
            let th = self.node_angles(x, e);
            let l = self.length(x, e);
            let c = self.alpha * self.m as f64 / l;
            if self.fixed.is_none() {
                let s: f64 = th.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
                grad[block] += -c * s + self.beta * l;
            }
            for j in 0..=self.m {
                let mut d = 0.0;
                if j > 0 {
                    d += th[j] - th[j - 1];
                }
                if j < self.m {
                    d -= th[j + 1] - th[j];
                }
                grad[self.angle_var(e, block, j)] += 2.0 * c * d;
            }
        }
    }

    pub fn constraints(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_rows);
        for e in 0..self.modes.len() {
            let [p0, p1] = self.graph.endpoints(e);
            let gap = self.position(x, p1) - self.position(x, p0);
            match self.modes[e] {
                EdgeMode::Free { .. } => {
                    let r = gap - self.chord_sum(x, e);
                    out.extend([r.x, r.y]);
                }
                EdgeMode::Pinned { kappa } => {
                    out.extend([
                        gap.x,
                        gap.y,
                        self.rotation(x, p1) - self.rotation(x, p0) - kappa,
                    ]);
                }
            }
        }
        out
    }

    /// `(ℓ/M) Σ u(μ_j)` with `μ_j` the chord mid-angles.
    fn chord_sum(&self, x: &[f64], e: usize) -> Point {
        let th = self.node_angles(x, e);
        let h = self.length(x, e) / self.m as f64;
        th.windows(2).map(|w| u(0.5 * (w[0] + w[1]))).sum::<Point>() * h
    }

    /// Adds `Σ_i w_i ∇c_i` to `grad`.
    pub fn add_jacobian_transpose(&self, x: &[f64], w: &[f64], grad: &mut [f64]) {
        let mut row = 0;
        for e in 0..self.modes.len() {
            let [p0, p1] = self.graph.endpoints(e);
            let (wx, wy) = (w[row], w[row + 1]);
            grad[3 * p1] += wx;
            grad[3 * p1 + 1] += wy;
            grad[3 * p0] -= wx;
            grad[3 * p0 + 1] -= wy;
            match self.modes[e] {
                EdgeMode::Free { block } => {
                    let wv = Point::new(wx, wy);
                    let th = self.node_angles(x, e);
                    let h = self.length(x, e) / self.m as f64;
                    let mids: Vec<f64> = th.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
                    if self.fixed.is_none() {
                        grad[block] -= h * mids.iter().map(|&a| u(a)).sum::<Point>().dot(&wv);
                    }
                    for j in 0..=self.m {
                        let mut d = Point::zeros();
                        if j > 0 {
                            d += du(mids[j - 1]);
                        }
                        if j < self.m {
                            d += du(mids[j]);
                        }
                        grad[self.angle_var(e, block, j)] -= 0.5 * h * d.dot(&wv);
                    }
                    row += 2;
                }
                EdgeMode::Pinned { .. } => {
                    grad[3 * p1 + 2] += w[row + 2];
                    grad[3 * p0 + 2] -= w[row + 2];
                    row += 3;
                }
            }
        }
    }

    /// Dense constraint Jacobian, one row per constraint.
    pub fn jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        (0..self.num_rows)
            .map(|i| {
                let mut w = vec![0.0; self.num_rows];
                w[i] = 1.0;
                let mut row = vec![0.0; self.num_vars];
                self.add_jacobian_transpose(x, &w, &mut row);
                row
            })
            .collect()
    }

    /// `f − μ·c + (ρ/2)|c|²` and its gradient.
    pub fn augmented(&self, x: &[f64], mu: &[f64], rho: f64, grad: &mut [f64]) -> f64 {
        let c = self.constraints(x);
        self.gradient(x, grad);
        let w: Vec<f64> = c.iter().zip(mu).map(|(ci, mi)| rho * ci - mi).collect();
        self.add_jacobian_transpose(x, &w, grad);
        self.objective(x)
            + c.iter()
                .zip(mu)
                .map(|(ci, mi)| -mi * ci + 0.5 * rho * ci * ci)
                .sum::<f64>()
    }

    /// Per-edge closure defect `|x_{p1} − x_{p0} − ∫ℓ u(θ)|`.
    pub fn closure_residuals(&self, x: &[f64]) -> Vec<f64> {
        let c = self.constraints(x);
        let mut row = 0;
        self.modes
            .iter()
            .map(|m| {
                let r = Point::new(c[row], c[row + 1]).norm();
                row += if matches!(m, EdgeMode::Free { .. }) {
                    2
                } else {
                    3
                };
                r
            })
            .collect()
    }

    /// Real tangents `[θ_0, θ_M + π]` of free edges, as used by classification.
    pub fn end_tangents(&self, x: &[f64]) -> Vec<Option<[f64; 2]>> {
        (0..self.modes.len())
            .map(|e| match self.modes[e] {
                EdgeMode::Free { .. } => {
                    let th = self.node_angles(x, e);
                    Some([th[0], th[self.m] + PI])
                }
                EdgeMode::Pinned { .. } => None,
            })
            .collect()
    }

    pub fn pinned(&self) -> Vec<bool> {
        self.modes
            .iter()
            .map(|m| matches!(m, EdgeMode::Pinned { .. }))
            .collect()
    }

    /// Same problem with more edges pinned; `kappa` follows the current rotations.
    pub fn pin(&self, x: &[f64], edges: &[usize]) -> (Problem, Vec<f64>) {
        let mut pinned = self.pinned();
        for &e in edges {
            pinned[e] = true;
        }
        let mut next = Problem::new(
            self.graph.clone(),
            self.alpha,
            self.beta,
            self.m,
            self.fixed.clone(),
            self.lift.clone(),
            &pinned,
        );
        for &e in edges {
            let [p0, p1] = self.graph.endpoints(e);
            let EdgeMode::Pinned { kappa } = next.modes[e] else {
                unreachable!()
            };
            let current = self.rotation(x, p1) - self.rotation(x, p0);
            let k = kappa + 2.0 * PI * ((current - kappa) / (2.0 * PI)).round();
            next.modes[e] = EdgeMode::Pinned { kappa: k };
        }
        let mut y = vec![0.0; next.num_vars];
        y[..3 * self.graph.num_vertices()].copy_from_slice(&x[..3 * self.graph.num_vertices()]);
        for e in 0..self.modes.len() {
            if let (EdgeMode::Free { block: a }, EdgeMode::Free { block: b }) =
                (&self.modes[e], &next.modes[e])
            {
                let len = if self.fixed.is_some() {
                    self.m - 1
                } else {
                    self.m
                };
                y[*b..*b + len].copy_from_slice(&x[*a..*a + len]);
            }
        }
        (next, y)
    }

    /// Junction positions with vertices glued by pinned edges moved to their common mean.
    pub fn junction_positions(&self, x: &[f64]) -> Vec<Point> {
        let nv = self.graph.num_vertices();
        let mut parent: Vec<usize> = (0..nv).collect();
        fn find(p: &mut [usize], v: usize) -> usize {
            let mut r = v;
            while p[r] != r {
                r = p[r];
            }
            p[v] = r;
            r
        }
        for (e, m) in self.modes.iter().enumerate() {
            if let EdgeMode::Pinned { .. } = m {
                let [a, b] = self.graph.endpoints(e);
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..nv {
            let r = find(&mut parent, v);
            groups.entry(r).or_default().push(v);
        }
        let mut pos = vec![Point::zeros(); nv];
        for members in groups.values() {
            let mean =
                members.iter().map(|&v| self.position(x, v)).sum::<Point>() / members.len() as f64;
            for &v in members {
                pos[v] = mean;
            }
        }
        pos
    }

    /// Relaxed-mode variables reproducing a network: rotations and interior angles are the
    /// least-squares fit of the midpoint chord angles, so `reconstruct` inverts this exactly on
    /// constant-speed networks whose chords come from consistent node angles.
    pub fn extract(
        n: &Network,
        alpha: f64,
        beta: f64,
    ) -> Result<(Problem, Vec<f64>), ExtractError> {
        let g = n.graph();
        let regular: Vec<usize> = n.regular_edges();
        let m = regular
            .first()
            .map(|&e| n.curve(e).segments())
            .ok_or(ExtractError::NoRegularEdge)?;
        for &e in &regular {
            let found = n.curve(e).segments();
            if found != m {
                return Err(ExtractError::SampleMismatch {
                    edge: e,
                    found,
                    expected: m,
                });
            }
        }
        let nv = g.num_vertices();
        let dir = |e: usize, z: u8| g.direction(HalfEdge::new(e, z));

        // rough rotations from end chords, spread over collapsed edges
        let mut phi: Vec<Option<f64>> = vec![None; nv];
        for &e in &regular {
            let c = n.curve(e).chord_angles();
            let [p0, p1] = g.endpoints(e);
            phi[p0].get_or_insert(c[0] - dir(e, 0));
            phi[p1].get_or_insert(c[m - 1] + PI - dir(e, 1));
        }
        loop {
            let mut changed = false;
            for e in n.singular_edges() {
                let [p0, p1] = g.endpoints(e);
                let base = dir(e, 0) + PI - dir(e, 1);
                match (phi[p0], phi[p1]) {
                    (Some(a), None) => phi[p1] = Some(a + base),
                    (None, Some(b)) => phi[p0] = Some(b - base),
                    _ => continue,
                }
                changed = true;
            }
            if !changed {
                break;
            }
        }
        let phi0: Vec<f64> = phi.iter().map(|p| p.unwrap_or(0.0)).collect();

        let pinned: Vec<bool> = n.curves().iter().map(DiscreteCurve::is_singular).collect();
        let mut lift = vec![0.0; g.num_edges()];
        let mut chords = vec![Vec::new(); g.num_edges()];
        for &e in &regular {
            let [p0, p1] = g.endpoints(e);
            let raw = n.curve(e).chord_angles();
            let mut prev = phi0[p0] + dir(e, 0);
            let unwrapped: Vec<f64> = raw
                .iter()
                .map(|&c| {
                    prev = c + TAU * ((prev - c) / TAU).round();
                    prev
                })
                .collect();
            let last = phi0[p1] + dir(e, 1) - PI;
            lift[e] = TAU * ((unwrapped[m - 1] - last) / TAU).round();
            chords[e] = unwrapped;
        }
        let mut problem = Problem::new(g.clone(), alpha, beta, m, None, lift, &pinned);
        for e in n.singular_edges() {
            let [p0, p1] = g.endpoints(e);
            let EdgeMode::Pinned { kappa } = problem.modes[e] else {
                unreachable!()
            };
            let current = phi0[p1] - phi0[p0];
            problem.modes[e] = EdgeMode::Pinned {
                kappa: kappa + TAU * ((current - kappa) / TAU).round(),
            };
        }

        // normal equations over (φ per vertex, θ_1..θ_{M-1} per regular edge); rows have two entries
        let size = nv + regular.len() * (m - 1);
        let mut ata = DMatrix::<f64>::zeros(size, size);
        let mut atb = DVector::<f64>::zeros(size);
        const GAUGE: f64 = 1e-10;
        for v in 0..nv {
            ata[(v, v)] += GAUGE;
            atb[v] += GAUGE * phi0[v];
        }
        let mut add_row = |terms: [(usize, f64); 2], rhs: f64| {
            for &(i, a) in &terms {
                atb[i] += a * rhs;
                for &(k, b) in &terms {
                    ata[(i, k)] += a * b;
                }
            }
        };
        for (slot, &e) in regular.iter().enumerate() {
            let [p0, p1] = g.endpoints(e);
            let base = nv + slot * (m - 1);
            // θ_j as (column, constant offset)
            let node = |j: usize| -> (usize, f64) {
                if j == 0 {
                    (p0, dir(e, 0))
                } else if j == m {
                    (p1, dir(e, 1) - PI + problem.lift[e])
                } else {
                    (base + j - 1, 0.0)
                }
            };
            for (j, &c) in chords[e].iter().enumerate() {
                let ((a, oa), (b, ob)) = (node(j), node(j + 1));
                add_row([(a, 0.5), (b, 0.5)], c - 0.5 * (oa + ob));
            }
        }
        for e in n.singular_edges() {
            let [p0, p1] = g.endpoints(e);
            let EdgeMode::Pinned { kappa } = problem.modes[e] else {
                unreachable!()
            };
            add_row([(p1, 1.0), (p0, -1.0)], kappa);
        }
        let sol = ata
            .cholesky()
            .expect("regularized normal equations are positive definite")
            .solve(&atb);

        let mut x = vec![0.0; problem.num_vars];
        for v in 0..nv {
            let p = n.junction(v);
            x[3 * v] = p.x;
            x[3 * v + 1] = p.y;
            x[3 * v + 2] = sol[v];
        }
        for (slot, &e) in regular.iter().enumerate() {
            let EdgeMode::Free { block } = problem.modes[e] else {
                unreachable!()
            };
            x[block] = n.curve(e).length().ln();
            let base = nv + slot * (m - 1);
            x[block + 1..block + m].copy_from_slice(sol.as_slice()[base..base + m - 1].as_ref());
        }
        Ok((problem, x))
    }

    /// Polylines from cumulative chord sums, with a linear correction so both ends hit their junctions.
    pub fn reconstruct(&self, x: &[f64]) -> Network {
        let pos = self.junction_positions(x);
        let curves = (0..self.modes.len())
            .map(|e| {
                let [p0, p1] = self.graph.endpoints(e);
                match self.modes[e] {
                    EdgeMode::Pinned { .. } => DiscreteCurve::singular(pos[p0]),
                    EdgeMode::Free { .. } => {
                        let th = self.node_angles(x, e);
                        let h = self.length(x, e) / self.m as f64;
                        let mut pts = vec![pos[p0]];
                        for w in th.windows(2) {
                            let p = *pts.last().unwrap() + u(0.5 * (w[0] + w[1])) * h;
                            pts.push(p);
                        }
                        let miss = pos[p1] - pts[self.m];
                        for (j, p) in pts.iter_mut().enumerate() {
                            *p += miss * (j as f64 / self.m as f64);
                        }
                        pts[self.m] = pos[p1];
                        DiscreteCurve::new(pts).expect("positive chords")
                    }
                }
            })
            .collect();
        Network::new(self.graph.clone(), curves).expect("junctions are shared")
    }
}
