//! Dense bounded-variable primal simplex for homogeneous systems
//! `max c·x  s.t.  A x = 0,  0 ≤ x ≤ upper`.
//!
//! Artificial columns with bounds `[0, 0]` form the starting basis, so no
//! phase one is needed: the origin is always feasible. Bland's rule keeps the
//! (highly degenerate) iteration finite.

pub const PIVOT_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

pub fn maximize_homogeneous(a: &[Vec<f64>], c: &[f64], upper: &[f64]) -> LpSolution {
    let n = c.len();
    let m = a.len();
    assert_eq!(upper.len(), n);
    let total = n + m;
    let hi: Vec<f64> = upper
        .iter()
        .copied()
        .chain(std::iter::repeat_n(0.0, m))
        .collect();
    let cost: Vec<f64> = c
        .iter()
        .copied()
        .chain(std::iter::repeat_n(0.0, m))
        .collect();

    let mut tab: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(r, row)| {
            assert_eq!(row.len(), n);
            let mut full = row.clone();
            full.extend((0..m).map(|k| if k == r { 1.0 } else { 0.0 }));
            full
        })
        .collect();
    let mut basis: Vec<usize> = (n..total).collect();
    let mut is_basic = vec![false; total];
    for &b in &basis {
        is_basic[b] = true;
    }
    let mut x = vec![0.0f64; total];
    let mut at_upper = vec![false; total];

    let max_iter = 50 * (total + 1) * (total + 1);
    for _ in 0..max_iter {
        // Bland: first improving column by index.
        let mut entering = None;
        for j in 0..total {
            if is_basic[j] || hi[j] <= 0.0 {
                continue;
            }
            let d = cost[j] - (0..m).map(|r| cost[basis[r]] * tab[r][j]).sum::<f64>();
            if !at_upper[j] && d > PIVOT_TOL {
                entering = Some((j, 1.0));
                break;
            }
            if at_upper[j] && d < -PIVOT_TOL {
                entering = Some((j, -1.0));
                break;
            }
        }
        let Some((j, dir)) = entering else { break };

        let mut step = hi[j];
        let mut leave: Option<(usize, bool)> = None;
        for r in 0..m {
            let rate = dir * tab[r][j];
            if rate.abs() <= PIVOT_TOL {
                continue;
            }
            let k = basis[r];
            let (limit, to_upper) = if rate > 0.0 {
                ((x[k]).max(0.0) / rate, false)
            } else {
                ((hi[k] - x[k]).max(0.0) / -rate, true)
            };
            let better = match leave {
                None => limit < step,
                Some((r0, _)) => limit < step || (limit == step && k < basis[r0]),
            };
            if better {
                step = limit;
                leave = Some((r, to_upper));
            }
        }

        x[j] += dir * step;
        for r in 0..m {
            x[basis[r]] -= dir * step * tab[r][j];
        }
        match leave {
            None => {
                at_upper[j] = !at_upper[j];
                x[j] = if at_upper[j] { hi[j] } else { 0.0 };
            }
            Some((r, to_upper)) => {
                let k = basis[r];
                is_basic[k] = false;
                at_upper[k] = to_upper;
                x[k] = if to_upper { hi[k] } else { 0.0 };
                let pivot = tab[r][j];
                for v in tab[r].iter_mut() {
                    *v /= pivot;
                }
                let prow = tab[r].clone();
                for (rr, row) in tab.iter_mut().enumerate() {
                    if rr == r {
                        continue;
                    }
                    let f = row[j];
                    if f != 0.0 {
                        for (v, p) in row.iter_mut().zip(&prow) {
                            *v -= f * p;
                        }
                    }
                }
                basis[r] = j;
                is_basic[j] = true;
                at_upper[j] = false;
            }
        }
    }

    x.truncate(n);
    for (v, &u) in x.iter_mut().zip(upper) {
        *v = v.clamp(0.0, u);
    }
    let objective = x.iter().zip(c).map(|(a, b)| a * b).sum();
    LpSolution { x, objective }
}
