//! Dense primal simplex for `max cᵀx` subject to `Ax ≤ b`, `x ≥ 0`, `b ≥ 0`.
//!
//! The slack basis is feasible, so no phase one is needed. Pivoting uses the
//! most negative reduced cost and switches to Bland's rule after a run of
//! degenerate pivots, which rules out cycling.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// Optimal multipliers of the `≤` rows: `y ≥ 0`, `Aᵀy ≥ c`, `bᵀy = cᵀx`.
    pub dual: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

const EPS: f64 = 1e-12;

/// `a` is row-major with `b.len()` rows and `c.len()` columns.
pub fn simplex_max(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let m = b.len();
    let n = c.len();
    if a.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::Dimension("constraint matrix does not match c and b".into()));
    }
    if b.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidInput("right-hand side must be finite and nonnegative".into()));
    }
    let width = n + m + 1;
    // Rows 0..m are constraints, row m is the objective row (reduced costs).
    let mut t = vec![0.0; (m + 1) * width];
    let idx = |r: usize, col: usize| r * width + col;
    for r in 0..m {
        for j in 0..n {
            t[idx(r, j)] = a[r][j];
        }
        t[idx(r, n + r)] = 1.0;
        t[idx(r, width - 1)] = b[r];
    }
    for j in 0..n {
        t[idx(m, j)] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut pivots = 0;
    let mut degenerate_run = 0;
    let mut bland = false;
    let max_pivots = 50 * (n + m) + 1000;

    loop {
        // Entering column.
        let mut enter = None;
        let mut best = -EPS;
        for j in 0..n + m {
            let rc = t[idx(m, j)];
            if bland {
                if rc < -EPS {
                    enter = Some(j);
                    break;
                }
            } else if rc < best {
                best = rc;
                enter = Some(j);
            }
        }
        let Some(e) = enter else { break };
        // Ratio test, ties broken by smallest basic index.
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for r in 0..m {
            let p = t[idx(r, e)];
            if p > EPS {
                let ratio = t[idx(r, width - 1)] / p;
                let better = match leave {
                    None => true,
                    Some(l) => ratio < best_ratio - EPS || (ratio <= best_ratio + EPS && basis[r] < basis[l]),
                };
                if better {
                    best_ratio = ratio;
                    leave = Some(r);
                }
            }
        }
        let Some(lr) = leave else {
            return Err(Error::Solver("linear program is unbounded".into()));
        };
        if best_ratio <= EPS {
            degenerate_run += 1;
            if degenerate_run > 20 {
                bland = true;
            }
        } else {
            degenerate_run = 0;
        }
        // Pivot.
        let p = t[idx(lr, e)];
        for col in 0..width {
            t[idx(lr, col)] /= p;
        }
        for r in 0..=m {
            if r == lr {
                continue;
            }
            let f = t[idx(r, e)];
            if f != 0.0 {
                for col in 0..width {
                    let v = t[idx(lr, col)];
                    if v != 0.0 {
                        t[idx(r, col)] -= f * v;
                    }
                }
            }
        }
        basis[lr] = e;
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Solver(format!("simplex exceeded {max_pivots} pivots")));
        }
    }

    let mut x = vec![0.0; n];
    for (r, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = t[idx(r, width - 1)];
        }
    }
    let dual: Vec<f64> = (0..m).map(|r| t[idx(m, n + r)].max(0.0)).collect();
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpSolution { x, dual, objective, pivots })
}
