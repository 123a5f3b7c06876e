//! Limited-memory BFGS with Armijo backtracking.

use std::collections::VecDeque;

pub const MEMORY: usize = 10;
pub const ARMIJO_C: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct LbfgsOutcome {
    pub iterations: usize,
    pub value: f64,
    pub grad_norm: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Minimizes `f` from `x` in place. `f(x, grad)` returns the value and fills the gradient;
/// `on_step(value)` is called after every accepted step.
pub fn minimize<F, L>(
    x: &mut [f64],
    mut f: F,
    tol_g: f64,
    max_iter: usize,
    mut on_step: L,
) -> LbfgsOutcome
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
    L: FnMut(f64),
{
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut value = f(x, &mut g);
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(MEMORY);
    let mut trial = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut iterations = 0;
    while iterations < max_iter {
        if inf_norm(&g) <= tol_g {
            return LbfgsOutcome {
                iterations,
                value,
                grad_norm: inf_norm(&g),
                converged: true,
            };
        }
        // two-loop recursion
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &d);
            for (di, yi) in d.iter_mut().zip(y) {
                *di -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = hist.back() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            for (di, si) in d.iter_mut().zip(s) {
                *di += (a - b) * si;
            }
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            hist.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let mut step = if hist.is_empty() {
            (1.0 / inf_norm(&g)).min(1.0)
        } else {
            1.0
        };
        let accepted = loop {
            for i in 0..n {
                trial[i] = x[i] + step * d[i];
            }
            let v = f(&trial, &mut g_new);
            if v.is_finite() && v <= value + ARMIJO_C * step * slope {
                break Some(v);
            }
            step *= 0.5;
            if step < 1e-20 {
                break None;
            }
        };
        let Some(v) = accepted else {
            return LbfgsOutcome {
                iterations,
                value,
                grad_norm: inf_norm(&g),
                converged: false,
            };
        };
        iterations += 1;
        let s: Vec<f64> = (0..n).map(|i| trial[i] - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| g_new[i] - g[i]).collect();
        let sy = dot(&s, &y);
        x.copy_from_slice(&trial);
        std::mem::swap(&mut g, &mut g_new);
        value = v;
        on_step(value);
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            if hist.len() == MEMORY {
                hist.pop_front();
            }
            hist.push_back((s, y, 1.0 / sy));
        }
    }
    let grad_norm = inf_norm(&g);
    LbfgsOutcome {
        iterations,
        value,
        grad_norm,
        converged: grad_norm <= tol_g,
    }
}
