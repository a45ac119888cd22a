//! Small dense solver for linear objectives under Hermitian linear matrix
//! inequalities:
//!
//! ```text
//! minimize   cᵀx
//! subject to G_b(x) = C_b + Σ_k x_k G_{b,k} ⪰ 0   for every block b
//! ```
//!
//! Path-following log-barrier method with damped Newton centering. The caller
//! supplies a strictly feasible starting point; every problem in this crate
//! has an obvious one. After centering at barrier parameter `t` the objective
//! is within `m/t` of the optimum, `m` the total block size.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::linalg::{c, real, ComplexMatrix, C64, I, ONE, ZERO};

/// One Hermitian LMI block `C + Σ x_k G_k ⪰ 0`.
#[derive(Debug, Clone)]
pub struct LmiBlock {
    pub constant: ComplexMatrix,
    pub terms: Vec<(usize, ComplexMatrix)>,
}

impl LmiBlock {
    pub fn new(constant: ComplexMatrix) -> Self {
        LmiBlock { constant, terms: Vec::new() }
    }

    pub fn size(&self) -> usize {
        self.constant.nrows()
    }

    pub fn term(mut self, var: usize, coeff: ComplexMatrix) -> Self {
        self.push(var, coeff);
        self
    }

    pub fn push(&mut self, var: usize, coeff: ComplexMatrix) {
        debug_assert_eq!(coeff.shape(), self.constant.shape());
        if coeff.iter().any(|z| *z != ZERO) {
            self.terms.push((var, coeff));
        }
    }

    /// Scalar constraint `constant + Σ coeffs_k x_k ≥ 0`.
    pub fn scalar(constant: f64, coeffs: &[(usize, f64)]) -> Self {
        let mut b = LmiBlock::new(ComplexMatrix::from_element(1, 1, real(constant)));
        for &(k, a) in coeffs {
            b.push(k, ComplexMatrix::from_element(1, 1, real(a)));
        }
        b
    }

    pub fn evaluate(&self, x: &[f64]) -> ComplexMatrix {
        let mut g = self.constant.clone();
        for (k, gk) in &self.terms {
            if x[*k] != 0.0 {
                g += gk * real(x[*k]);
            }
        }
        g
    }
}

#[derive(Debug, Clone)]
pub struct LmiProgram {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub blocks: Vec<LmiBlock>,
}

#[derive(Debug, Clone, Copy)]
pub struct BarrierOptions {
    /// Initial barrier parameter.
    pub t0: f64,
    /// Barrier parameter growth factor.
    pub mu: f64,
    /// Stop when the gap bound `m/t` is below `gap_abs + gap_rel·|cᵀx|`.
    pub gap_abs: f64,
    pub gap_rel: f64,
    pub max_outer: usize,
    pub max_newton: usize,
    /// Stop after the first centering whose objective is at or below this value.
    pub stop_below: Option<f64>,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        BarrierOptions {
            t0: 1.0,
            mu: 8.0,
            gap_abs: 1e-11,
            gap_rel: 1e-9,
            max_outer: 200,
            max_newton: 200,
            stop_below: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BarrierSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Upper bound on `objective − optimum` (exact on the central path).
    pub gap_bound: f64,
    pub converged: bool,
    pub stopped_below: bool,
    pub outer_iterations: usize,
    pub newton_iterations: usize,
}

impl BarrierSolution {
    pub fn lower_bound(&self) -> f64 {
        self.objective - self.gap_bound
    }
}

struct Factored {
    l: ComplexMatrix,
    logdet: f64,
}

fn factor(g: &ComplexMatrix) -> Option<Factored> {
    let n = g.nrows();
    if n == 0 {
        return Some(Factored { l: ComplexMatrix::zeros(0, 0), logdet: 0.0 });
    }
    if n == 1 {
        let v = g[(0, 0)].re;
        if v > 0.0 && v.is_finite() {
            return Some(Factored { l: ComplexMatrix::from_element(1, 1, real(v.sqrt())), logdet: v.ln() });
        }
        return None;
    }
    // Hermitian part only; the imaginary diagonal is rounding noise.
    let h = (g + g.adjoint()) * real(0.5);
    let ch = Cholesky::<C64, Dyn>::new(h)?;
    let l = ch.l();
    let mut logdet = 0.0;
    for i in 0..n {
        let d = l[(i, i)].re;
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        logdet += 2.0 * d.ln();
    }
    Some(Factored { l, logdet })
}

impl LmiProgram {
    pub fn new(n_vars: usize) -> Self {
        LmiProgram { n_vars, objective: vec![0.0; n_vars], blocks: Vec::new() }
    }

    pub fn add_block(&mut self, b: LmiBlock) {
        if let Some((k, _)) = b.terms.iter().find(|(k, _)| *k >= self.n_vars) {
            panic!("LMI term references variable {k} of {}", self.n_vars);
        }
        self.blocks.push(b);
    }

    pub fn barrier_size(&self) -> usize {
        self.blocks.iter().map(|b| b.size()).sum()
    }

    fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Barrier value `−Σ log det G_b(x)`, or `None` outside the interior.
    fn barrier(&self, x: &[f64]) -> Option<f64> {
        let mut total = 0.0;
        for b in &self.blocks {
            let f = factor(&b.evaluate(x))?;
            total -= f.logdet;
        }
        Some(total)
    }

    pub fn is_strictly_feasible(&self, x: &[f64]) -> bool {
        self.barrier(x).is_some()
    }

    /// Smallest eigenvalue over all blocks at `x`.
    pub fn min_slack(&self, x: &[f64]) -> f64 {
        self.blocks
            .iter()
            .map(|b| crate::linalg::HermitianMatrix::symmetrize(b.evaluate(x)).min_eigenvalue())
            .fold(f64::INFINITY, f64::min)
    }

    fn grad_hess(&self, x: &[f64]) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let n = self.n_vars;
        let mut grad = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);
        for b in &self.blocks {
            let g = b.evaluate(x);
            let f = factor(&g)?;
            let size = b.size();
            // W_k = L⁻¹ G_k L⁻*, stored flattened as columns of one matrix.
            let mut ws = ComplexMatrix::zeros(size * size, b.terms.len());
            for (col, (k, gk)) in b.terms.iter().enumerate() {
                let z = f.l.solve_lower_triangular(gk)?;
                let w = f.l.solve_lower_triangular(&z.adjoint())?;
                let mut tr = 0.0;
                for i in 0..size {
                    tr += w[(i, i)].re;
                }
                grad[*k] -= tr;
                for (idx, v) in w.iter().enumerate() {
                    ws[(idx, col)] = *v;
                }
            }
            let gram = ws.adjoint() * &ws;
            for (a, (ka, _)) in b.terms.iter().enumerate() {
                for (bb, (kb, _)) in b.terms.iter().enumerate() {
                    hess[(*ka, *kb)] += gram[(a, bb)].re;
                }
            }
        }
        Some((grad, hess))
    }

    /// Runs the barrier method from the strictly feasible point `x0`.
    pub fn solve(&self, x0: &[f64], opts: &BarrierOptions) -> Result<BarrierSolution> {
        if x0.len() != self.n_vars {
            return Err(Error::Dimension(format!("start point has {} coordinates, expected {}", x0.len(), self.n_vars)));
        }
        if !self.is_strictly_feasible(x0) {
            return Err(Error::Solver("starting point is not strictly feasible".into()));
        }
        let m = self.barrier_size() as f64;
        let c_vec = DVector::from_column_slice(&self.objective);
        let mut x = DVector::from_column_slice(x0);
        let mut t = opts.t0;
        let mut newton_total = 0;
        let mut outer = 0;
        let mut converged = false;
        let mut stopped_below = false;

        while outer < opts.max_outer {
            outer += 1;
            // Centering.
            for _ in 0..opts.max_newton {
                let (gb, hb) = match self.grad_hess(x.as_slice()) {
                    Some(v) => v,
                    None => return Err(Error::Solver("lost strict feasibility during centering".into())),
                };
                let grad = &c_vec * t + gb;
                let dx = match solve_spd(&hb, &(-&grad)) {
                    Some(d) => d,
                    None => return Err(Error::Solver("singular Newton system".into())),
                };
                let decrement = -grad.dot(&dx);
                newton_total += 1;
                if decrement / 2.0 <= 1e-10 {
                    break;
                }
                let f0 = t * c_vec.dot(&x) + self.barrier(x.as_slice()).unwrap();
                let mut s = 1.0;
                let mut accepted = false;
                for _ in 0..60 {
                    let cand = &x + &dx * s;
                    if let Some(bv) = self.barrier(cand.as_slice()) {
                        let f1 = t * c_vec.dot(&cand) + bv;
                        if f1 <= f0 - 0.25 * s * decrement {
                            x = cand;
                            accepted = true;
                            break;
                        }
                    }
                    s *= 0.5;
                }
                if !accepted {
                    // Numerical floor: the decrement is rounding noise.
                    break;
                }
            }
            let obj = self.objective_value(x.as_slice());
            let gap = m / t;
            if let Some(thr) = opts.stop_below {
                if obj <= thr {
                    stopped_below = true;
                    break;
                }
            }
            if gap <= opts.gap_abs + opts.gap_rel * obj.abs() {
                converged = true;
                break;
            }
            t *= opts.mu;
        }

        let objective = self.objective_value(x.as_slice());
        Ok(BarrierSolution {
            x: x.as_slice().to_vec(),
            objective,
            gap_bound: m / t,
            converged,
            stopped_below,
            outer_iterations: outer,
            newton_iterations: newton_total,
        })
    }
}

/// Solves `H d = r` for symmetric positive (semi)definite `H`, adding a small
/// diagonal shift when the factorization fails.
pub(crate) fn solve_spd(h: &DMatrix<f64>, r: &DVector<f64>) -> Option<DVector<f64>> {
    let n = h.nrows();
    let scale = (0..n).map(|i| h[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut shift = 0.0;
    for _ in 0..12 {
        let mut hh = h.clone();
        for i in 0..n {
            hh[(i, i)] += shift;
        }
        if let Some(ch) = Cholesky::new(hh) {
            let d = ch.solve(r);
            if d.iter().all(|v| v.is_finite()) {
                return Some(d);
            }
        }
        shift = if shift == 0.0 { 1e-14 * scale } else { shift * 100.0 };
    }
    None
}

/// Real coordinates for `n × n` Hermitian matrices: the diagonal entries,
/// then the real and imaginary parts of the strict upper triangle.
#[derive(Debug, Clone)]
pub struct HermitianCoords {
    pub n: usize,
}

impl HermitianCoords {
    pub fn new(n: usize) -> Self {
        HermitianCoords { n }
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Basis matrices in coordinate order.
    pub fn basis(&self) -> Vec<ComplexMatrix> {
        let n = self.n;
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            let mut m = ComplexMatrix::zeros(n, n);
            m[(i, i)] = ONE;
            out.push(m);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let mut re = ComplexMatrix::zeros(n, n);
                re[(i, j)] = ONE;
                re[(j, i)] = ONE;
                out.push(re);
                let mut im = ComplexMatrix::zeros(n, n);
                im[(i, j)] = I;
                im[(j, i)] = -I;
                out.push(im);
            }
        }
        out
    }

    pub fn compose(&self, coords: &[f64]) -> ComplexMatrix {
        let n = self.n;
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = real(coords[i]);
        }
        let mut k = n;
        for i in 0..n {
            for j in (i + 1)..n {
                let z = c(coords[k], coords[k + 1]);
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
                k += 2;
            }
        }
        m
    }

    pub fn decompose(&self, h: &ComplexMatrix) -> Vec<f64> {
        let n = self.n;
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            out.push(h[(i, i)].re);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                out.push(h[(i, j)].re);
                out.push(h[(i, j)].im);
            }
        }
        out
    }

    /// Indices of the diagonal coordinates (the trace is their sum).
    pub fn diagonal(&self) -> std::ops::Range<usize> {
        0..self.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag_real, HermitianMatrix};

    #[test]
    fn hermitian_coords_round_trip() {
        let hc = HermitianCoords::new(3);
        let x: Vec<f64> = (0..9).map(|k| k as f64 * 0.37 - 1.0).collect();
        let h = hc.compose(&x);
        assert!(HermitianMatrix::new(h.clone()).is_ok());
        assert_eq!(hc.decompose(&h), x);
        let via_basis: ComplexMatrix = hc.basis().iter().zip(&x).fold(ComplexMatrix::zeros(3, 3), |acc, (b, v)| acc + b * real(*v));
        assert!((via_basis - h).norm() < 1e-14);
    }

    #[test]
    fn minimizes_largest_eigenvalue() {
        // minimize s subject to s·I − A ⪰ 0, optimum λ_max(A).
        let a = ComplexMatrix::from_fn(3, 3, |i, j| c((i + j) as f64, if i < j { 0.5 } else if i > j { -0.5 } else { 0.0 }));
        let lmax = HermitianMatrix::new(a.clone()).unwrap().max_eigenvalue();
        let mut p = LmiProgram::new(1);
        p.objective[0] = 1.0;
        p.add_block(LmiBlock::new(-a).term(0, crate::linalg::identity(3)));
        let sol = p.solve(&[20.0], &BarrierOptions::default()).unwrap();
        assert!(sol.converged);
        assert!((sol.objective - lmax).abs() < 1e-8, "{} vs {}", sol.objective, lmax);
    }

    #[test]
    fn two_by_two_schur_complement() {
        // minimize y subject to [[y, 1], [1, x]] ⪰ 0 and x ≤ 4: optimum 1/4.
        let mut p = LmiProgram::new(2);
        p.objective[1] = 1.0;
        let mut b = LmiBlock::new(ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]));
        b.push(0, diag_real(&[0.0, 1.0]));
        b.push(1, diag_real(&[1.0, 0.0]));
        p.add_block(b);
        p.add_block(LmiBlock::scalar(4.0, &[(0, -1.0)]));
        let sol = p.solve(&[2.0, 5.0], &BarrierOptions::default()).unwrap();
        assert!(sol.converged);
        assert!((sol.objective - 0.25).abs() < 1e-8);
        assert!(sol.lower_bound() <= 0.25 + 1e-12);
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let mut p = LmiProgram::new(1);
        p.add_block(LmiBlock::scalar(-1.0, &[(0, 1.0)]));
        assert!(p.solve(&[0.5], &BarrierOptions::default()).is_err());
    }
}
