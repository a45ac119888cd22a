//! Haagerup tensor norm `‖w‖_h` on `E ⊗ F` and the balancing of optimal
//! representations for `w` and its transpose.
//!
//! For a representation with linearly independent stacks `(a_j)`, `(b_j)` of
//! length `r` (the rank of `w`), every other representation of that length is
//! `a'_k = Σ_j γ_{kj} a_j`, `b'_k = Σ_l (γ⁻¹)_{lk} b_l` for invertible `γ`.
//! With `X = γ*γ`,
//!
//! ```text
//! Σ a'_k a'_k* = Φ_A(X) = Σ_{j,l} X_{lj} a_j a_l*
//! Σ b'_k* b'_k = Φ_B(X⁻¹),  Φ_B(Y) = Σ_{j,l} Y_{lj} b_j* b_l
//! ```
//!
//! so `‖w‖_h² = min s` subject to `Φ_A(X) ⪯ I`, `Φ_B(Y) ⪯ s·I` and
//! `[[Y, I], [I, X]] ⪰ 0` (that is `Y ⪰ X⁻¹`). Both maps are monotone, so the
//! program is a linear SDP solved here by the barrier method in [`crate::lmi`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    identity, lstsq, op_norm_unchecked, real, unvec_row_major, vec_row_major, ComplexMatrix, HermitianMatrix, ONE, ZERO,
};
use crate::lmi::{BarrierOptions, HermitianCoords, LmiBlock, LmiProgram};
use crate::opspace::{col_quantity, mix, row_quantity, weighted_quantity, Side, TensorRep};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HNormResult {
    /// Achieved value `row_quantity(left)·col_quantity(right)` of the returned representation.
    pub value: f64,
    /// Certified lower bound from the barrier duality gap.
    pub lower_bound: f64,
    pub representation: TensorRep,
    /// Optimal `X = γ*γ` relative to the reduced representation.
    #[serde(with = "crate::linalg::matrix_serde")]
    pub certificate: ComplexMatrix,
    pub rank: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct HaagerupOptions {
    pub gap_rel: f64,
    pub max_outer: usize,
}

impl Default for HaagerupOptions {
    fn default() -> Self {
        HaagerupOptions { gap_rel: 1e-10, max_outer: 200 }
    }
}

/// Reduces `w` to a representation of minimal length through the SVD of its
/// coefficient matrix. Returns `None` for the zero tensor.
pub fn reduce(w: &TensorRep) -> Result<Option<TensorRep>> {
    w.validate()?;
    let (ra, ca) = w.left[0].shape();
    let (rb, cb) = w.right[0].shape();
    let coeff = w.coefficient_matrix();
    let svd = crate::linalg::svd(&coeff);
    let (u, v_t) = (&svd.u, &svd.v_t);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Ok(None);
    }
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).filter(|&k| svd.singular_values[k] > 1e-10 * smax).collect();
    idx.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let mut left = Vec::with_capacity(idx.len());
    let mut right = Vec::with_capacity(idx.len());
    for &k in &idx {
        let s = svd.singular_values[k].sqrt();
        let uk: Vec<_> = u.column(k).iter().map(|z| z * s).collect();
        // W = Σ σ u v*, and vec(b)ᵀ = v* means vec(b) = conj(v).
        let vk: Vec<_> = v_t.row(k).iter().map(|z| z * s).collect();
        left.push(unvec_row_major(&uk, ra, ca));
        right.push(unvec_row_major(&vk, rb, cb));
    }
    Ok(Some(TensorRep::new(left, right)?))
}

fn zero_result(w: &TensorRep) -> HNormResult {
    let a = ComplexMatrix::zeros(w.left[0].nrows(), w.left[0].ncols());
    let b = ComplexMatrix::zeros(w.right[0].nrows(), w.right[0].ncols());
    HNormResult {
        value: 0.0,
        lower_bound: 0.0,
        representation: TensorRep { left: vec![a], right: vec![b], weights: None },
        certificate: ComplexMatrix::zeros(0, 0),
        rank: 0,
        converged: true,
    }
}

/// `Σ_{j,l} X_{lj} a_j a_l*`.
pub fn phi_a(a: &[ComplexMatrix], x: &ComplexMatrix) -> ComplexMatrix {
    let n = a[0].nrows();
    let mut acc = ComplexMatrix::zeros(n, n);
    for (j, aj) in a.iter().enumerate() {
        for (l, al) in a.iter().enumerate() {
            let c = x[(l, j)];
            if c != ZERO {
                acc += aj * al.adjoint() * c;
            }
        }
    }
    acc
}

/// `Σ_{j,l} Y_{lj} b_j* b_l`.
pub fn phi_b(b: &[ComplexMatrix], y: &ComplexMatrix) -> ComplexMatrix {
    let n = b[0].ncols();
    let mut acc = ComplexMatrix::zeros(n, n);
    for (j, bj) in b.iter().enumerate() {
        for (l, bl) in b.iter().enumerate() {
            let c = y[(l, j)];
            if c != ZERO {
                acc += bj.adjoint() * bl * c;
            }
        }
    }
    acc
}

/// Representation of `w` attached to a positive definite `X`, scaled so the
/// row and column quantities agree.
pub fn representation_for(a: &[ComplexMatrix], b: &[ComplexMatrix], x: &ComplexMatrix) -> Result<(TensorRep, f64)> {
    let h = HermitianMatrix::symmetrize(x.clone());
    if h.min_eigenvalue() <= 0.0 {
        return Err(Error::Solver("certificate is not positive definite".into()));
    }
    let gamma = h.map_spectrum(f64::sqrt);
    let gamma_inv = h.map_spectrum(|v| 1.0 / v.sqrt());
    let left = mix(&gamma, a);
    let right = mix(&gamma_inv.transpose(), b);
    let rq = row_quantity(&left)?;
    let cq = col_quantity(&right)?;
    let (sl, sr) = if rq > 0.0 && cq > 0.0 { ((cq / rq).sqrt(), (rq / cq).sqrt()) } else { (1.0, 1.0) };
    let left: Vec<_> = left.into_iter().map(|m| m * real(sl)).collect();
    let right: Vec<_> = right.into_iter().map(|m| m * real(sr)).collect();
    let value = row_quantity(&left)? * col_quantity(&right)?;
    Ok((TensorRep::new(left, right)?, value))
}

/// `‖w‖_h` with an optimal representation and its certificate.
pub fn haagerup_norm(w: &TensorRep, opts: &HaagerupOptions) -> Result<HNormResult> {
    let reduced = match reduce(w)? {
        Some(r) => r,
        None => return Ok(zero_result(w)),
    };
    let r = reduced.len();
    if r == 1 {
        let a = &reduced.left[0];
        let b = &reduced.right[0];
        let value = op_norm_unchecked(a) * op_norm_unchecked(b);
        let (rep, _) = representation_for(&reduced.left, &reduced.right, &identity(1))?;
        return Ok(HNormResult {
            value,
            lower_bound: value,
            representation: rep,
            certificate: identity(1),
            rank: 1,
            converged: true,
        });
    }

    // Normalize so that X = I gives Φ_A, Φ_B of norm one.
    let ca = 1.0 / row_quantity(&reduced.left)?;
    let cb = 1.0 / col_quantity(&reduced.right)?;
    let a: Vec<_> = reduced.left.iter().map(|m| m * real(ca)).collect();
    let b: Vec<_> = reduced.right.iter().map(|m| m * real(cb)).collect();

    let hc = HermitianCoords::new(r);
    let basis = hc.basis();
    let nh = hc.len();
    let (xs, ys, s_var) = (0, nh, 2 * nh);
    let mut prog = LmiProgram::new(2 * nh + 1);
    prog.objective[s_var] = 1.0;

    let na = a[0].nrows();
    let nb = b[0].ncols();
    let mut b1 = LmiBlock::new(identity(na));
    let mut b2 = LmiBlock::new(ComplexMatrix::zeros(nb, nb)).term(s_var, identity(nb));
    let mut off = ComplexMatrix::zeros(2 * r, 2 * r);
    for i in 0..r {
        off[(i, r + i)] = ONE;
        off[(r + i, i)] = ONE;
    }
    let mut b3 = LmiBlock::new(off);
    for (c, e) in basis.iter().enumerate() {
        b1.push(xs + c, -phi_a(&a, e));
        b2.push(ys + c, -phi_b(&b, e));
        let mut ey = ComplexMatrix::zeros(2 * r, 2 * r);
        ey.view_mut((0, 0), (r, r)).copy_from(e);
        b3.push(ys + c, ey);
        let mut ex = ComplexMatrix::zeros(2 * r, 2 * r);
        ex.view_mut((r, r), (r, r)).copy_from(e);
        b3.push(xs + c, ex);
    }
    prog.add_block(b1);
    prog.add_block(b2);
    prog.add_block(b3);
    // Safeguard against unbounded directions when Φ_A or Φ_B has a kernel.
    let bound = 1e8 * r as f64;
    let tr_x: Vec<_> = hc.diagonal().map(|k| (xs + k, -1.0)).collect();
    let tr_y: Vec<_> = hc.diagonal().map(|k| (ys + k, -1.0)).collect();
    prog.add_block(LmiBlock::scalar(bound, &tr_x));
    prog.add_block(LmiBlock::scalar(bound, &tr_y));

    let mut x0 = vec![0.0; 2 * nh + 1];
    for k in hc.diagonal() {
        x0[xs + k] = 0.5;
        x0[ys + k] = 4.0;
    }
    let phi_b0 = op_norm_unchecked(&phi_b(&b, &(identity(r) * real(4.0))));
    x0[s_var] = 2.0 * phi_b0 + 1.0;

    let bopts = BarrierOptions { gap_rel: opts.gap_rel, gap_abs: 1e-13, max_outer: opts.max_outer, ..Default::default() };
    let sol = prog.solve(&x0, &bopts)?;
    let x = hc.compose(&sol.x[xs..xs + nh]);
    let (rep_n, value_n) = representation_for(&a, &b, &x)?;
    let scale = 1.0 / (ca * cb);
    let rep = TensorRep::new(
        rep_n.left.iter().map(|m| m * real(1.0 / ca)).collect(),
        rep_n.right.iter().map(|m| m * real(1.0 / cb)).collect(),
    )?;
    let (rep, value) = rebalance(rep, value_n * scale)?;
    let lower = sol.lower_bound().max(0.0).sqrt() * scale;
    Ok(HNormResult { value, lower_bound: lower.min(value), representation: rep, certificate: x, rank: r, converged: sol.converged })
}

fn rebalance(rep: TensorRep, fallback: f64) -> Result<(TensorRep, f64)> {
    let rq = row_quantity(&rep.left)?;
    let cq = col_quantity(&rep.right)?;
    if rq == 0.0 || cq == 0.0 {
        return Ok((rep, fallback));
    }
    let (sl, sr) = ((cq / rq).sqrt(), (rq / cq).sqrt());
    let left: Vec<_> = rep.left.iter().map(|m| m * real(sl)).collect();
    let right: Vec<_> = rep.right.iter().map(|m| m * real(sr)).collect();
    let value = row_quantity(&left)? * col_quantity(&right)?;
    Ok((TensorRep::new(left, right)?, value))
}

/// `‖ᵗw‖_h`, the Haagerup norm of `Σ b_i ⊗ a_i` in `F ⊗ E`.
pub fn transposed_haagerup_norm(w: &TensorRep, opts: &HaagerupOptions) -> Result<HNormResult> {
    haagerup_norm(&w.flipped(), opts)
}

struct DescentCost<'a> {
    a: &'a [ComplexMatrix],
    b: &'a [ComplexMatrix],
}

impl DescentCost<'_> {
    /// `γ` upper triangular with diagonal `exp(p_i)` and the remaining
    /// parameters as real and imaginary parts of the strict upper part.
    fn gamma(&self, p: &[f64]) -> ComplexMatrix {
        let r = self.a.len();
        let mut g = ComplexMatrix::zeros(r, r);
        let mut k = r;
        for i in 0..r {
            g[(i, i)] = real(p[i].exp());
            for j in i + 1..r {
                g[(i, j)] = crate::linalg::c(p[k], p[k + 1]);
                k += 2;
            }
        }
        g
    }
}

impl argmin::core::CostFunction for DescentCost<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        let g = self.gamma(p);
        let Some(gi) = g.clone().try_inverse() else {
            return Ok(f64::INFINITY);
        };
        let git = gi.transpose();
        let a2 = mix(&g, self.a);
        let b2 = mix(&git, self.b);
        let v = row_quantity(&a2)? * col_quantity(&b2)?;
        Ok(if v > 0.0 { v.ln() } else { f64::INFINITY })
    }
}

/// Cross-check for `‖w‖_h` by derivative-free descent over representations of
/// minimal length, `a' = γa`, `b' = γ⁻ᵀb` with `γ` upper triangular. Nonconvex
/// in `γ`; `restarts` random starting points are tried. Returns an upper bound.
pub fn haagerup_norm_by_descent(w: &TensorRep, restarts: usize, seed: u64) -> Result<f64> {
    use argmin::core::Executor;
    use argmin::solver::neldermead::NelderMead;

    let Some(red) = reduce(w)? else {
        return Ok(0.0);
    };
    let r = red.len();
    let cost = DescentCost { a: &red.left, b: &red.right };
    let n = r * r;
    let base = row_quantity(&red.left)? * col_quantity(&red.right)?;
    if r == 1 {
        return Ok(base);
    }
    let mut rng = crate::random::rng(seed);
    let mut best = base;
    for attempt in 0..restarts.max(1) {
        let start: Vec<f64> =
            (0..n).map(|_| if attempt == 0 { 0.0 } else { crate::random::normal(&mut rng) }).collect();
        let mut simplex = vec![start.clone()];
        for k in 0..n {
            let mut v = start.clone();
            v[k] += 0.5;
            simplex.push(v);
        }
        let solver = NelderMead::new(simplex).with_sd_tolerance(1e-13).map_err(|e| Error::Solver(e.to_string()))?;
        let res = Executor::new(DescentCost { a: cost.a, b: cost.b }, solver)
            .configure(|st| st.max_iters(4000))
            .run()
            .map_err(|e| Error::Solver(e.to_string()))?;
        let v = res.state().get_best_cost().exp();
        if v.is_finite() {
            best = best.min(v);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BalancedRep {
    /// Representation `(â_i, b̂_i)` carrying the weights `λ_i`.
    pub representation: TensorRep,
    /// `‖δγ − I‖` for the change of basis between the two optimal representations.
    pub gamma_delta_residual: f64,
    /// `‖Σ â â*‖^{1/2} ‖Σ b̂* b̂‖^{1/2}`.
    pub h_value: f64,
    /// `‖Σ λ â* â‖^{1/2} ‖Σ λ⁻¹ b̂ b̂*‖^{1/2}`.
    pub t_value: f64,
}

fn stack(ms: &[ComplexMatrix]) -> ComplexMatrix {
    let vs: Vec<_> = ms.iter().map(vec_row_major).collect();
    ComplexMatrix::from_fn(vs[0].len(), vs.len(), |i, k| vs[k][i])
}

/// Builds one representation that is optimal for `‖w‖_h` and, with weights
/// `λ_i`, reproduces `‖ᵗw‖_h` through `‖Σ λ_i â_i* â_i‖^{1/2}‖Σ λ_i⁻¹ b̂_i b̂_i*‖^{1/2}`.
pub fn balance_representation(w: &TensorRep, h_opt: &HNormResult, t_opt: &HNormResult) -> Result<BalancedRep> {
    w.validate()?;
    let r = h_opt.representation.len();
    if h_opt.rank == 0 || t_opt.rank == 0 {
        let rep = TensorRep::with_weights(h_opt.representation.left.clone(), h_opt.representation.right.clone(), vec![1.0])?;
        return Ok(BalancedRep { representation: rep, gamma_delta_residual: 0.0, h_value: 0.0, t_value: 0.0 });
    }
    if t_opt.representation.len() != r {
        return Err(Error::Inconsistent(format!("representations have lengths {r} and {}", t_opt.representation.len())));
    }
    // h_opt: w = Σ α_j ⊗ β_j. t_opt represents ᵗw, so its right factors lie in E.
    let alpha = &h_opt.representation.left;
    let beta = &h_opt.representation.right;
    let alpha1 = &t_opt.representation.right;
    let beta1 = &t_opt.representation.left;
    let sa = stack(alpha);
    let sa1 = stack(alpha1);
    let sb = stack(beta);
    let sb1 = stack(beta1);
    // α₁ = γα: vec(α₁_k) = Σ_j γ_{kj} vec(α_j), i.e. S_{α₁} = S_α γᵀ.
    let gamma_t = lstsq(&sa, &sa1, 1e-12);
    let gamma = gamma_t.transpose();
    // β₁_k = Σ_l δ_{lk} β_l, i.e. S_{β₁} = S_β δ.
    let delta = lstsq(&sb, &sb1, 1e-12);
    let fit_a = (&sa * &gamma_t - &sa1).norm() / sa1.norm().max(f64::MIN_POSITIVE);
    let fit_b = (&sb * &delta - &sb1).norm() / sb1.norm().max(f64::MIN_POSITIVE);
    if fit_a > 1e-8 || fit_b > 1e-8 {
        return Err(Error::Inconsistent(format!("change of basis does not fit (residuals {fit_a:.2e}, {fit_b:.2e})")));
    }
    let resid = (&delta * &gamma - identity(r)).norm().max((&gamma * &delta - identity(r)).norm());
    if resid > 1e-8 {
        return Err(Error::Inconsistent(format!("δγ differs from the identity by {resid:.3e}")));
    }
    let svd = crate::linalg::svd(&gamma);
    let v_t = svd.v_t.clone();
    let d: Vec<f64> = svd.singular_values.iter().copied().collect();
    // γ = γ₁ D γ₂ with γ₂ = V*.
    let gamma2 = v_t;
    let a_hat = mix(&gamma2, alpha);
    let b_hat = mix(&gamma2.map(|z| z.conj()), beta);
    let mut lambda: Vec<f64> = d.iter().map(|x| x * x).collect();
    let log_mean = lambda.iter().map(|x| x.ln()).sum::<f64>() / lambda.len() as f64;
    for l in lambda.iter_mut() {
        *l /= log_mean.exp();
    }
    let inv: Vec<f64> = lambda.iter().map(|x| 1.0 / x).collect();
    let h_value = row_quantity(&a_hat)? * col_quantity(&b_hat)?;
    let t_value = weighted_quantity(&a_hat, &lambda, Side::Col)? * weighted_quantity(&b_hat, &inv, Side::Row)?;
    let representation = TensorRep::with_weights(a_hat, b_hat, lambda)?;
    Ok(BalancedRep { representation, gamma_delta_residual: resid, h_value, t_value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix_unit;
    use crate::opspace::min_norm;
    use crate::random::{gaussian_matrix, rng};

    fn e(i: usize, j: usize) -> ComplexMatrix {
        matrix_unit(2, 2, i, j)
    }

    #[test]
    fn rank_one_is_product_of_norms() {
        let mut r = rng(11);
        let a = gaussian_matrix(&mut r, 2, 2);
        let b = gaussian_matrix(&mut r, 2, 2);
        let w = TensorRep::new(vec![a.clone()], vec![b.clone()]).unwrap();
        let h = haagerup_norm(&w, &HaagerupOptions::default()).unwrap();
        let expect = op_norm_unchecked(&a) * op_norm_unchecked(&b);
        assert!((h.value - expect).abs() < 1e-10 * expect);
        let t = transposed_haagerup_norm(&w, &HaagerupOptions::default()).unwrap();
        assert!((t.value - expect).abs() < 1e-10 * expect);
    }

    #[test]
    fn column_row_pair_examples() {
        let w = TensorRep::new(vec![e(0, 0), e(1, 0)], vec![e(0, 0), e(0, 1)]).unwrap();
        let h = haagerup_norm(&w, &HaagerupOptions::default()).unwrap();
        assert!((h.value - 1.0).abs() < 1e-7, "{}", h.value);
        let t = transposed_haagerup_norm(&w, &HaagerupOptions::default()).unwrap();
        assert!((t.value - 2.0).abs() < 1e-7, "{}", t.value);
        let wt = TensorRep::new(vec![e(0, 0), e(0, 1)], vec![e(0, 0), e(1, 0)]).unwrap();
        let h2 = haagerup_norm(&wt, &HaagerupOptions::default()).unwrap();
        assert!((h2.value - 2.0).abs() < 1e-7);
    }

    #[test]
    fn symmetric_diagonal_tensor() {
        let w = TensorRep::new(vec![e(0, 0), e(1, 1)], vec![e(0, 0), e(1, 1)]).unwrap();
        let h = haagerup_norm(&w, &HaagerupOptions::default()).unwrap();
        let t = transposed_haagerup_norm(&w, &HaagerupOptions::default()).unwrap();
        assert!((h.value - t.value).abs() < 1e-7);
    }

    #[test]
    fn zero_tensor() {
        let w = TensorRep::new(vec![ComplexMatrix::zeros(2, 2)], vec![e(0, 0)]).unwrap();
        let h = haagerup_norm(&w, &HaagerupOptions::default()).unwrap();
        assert_eq!(h.value, 0.0);
        assert_eq!(h.rank, 0);
    }

    #[test]
    fn representation_resums_and_dominates_min() {
        let mut r = rng(12);
        for _ in 0..5 {
            let left: Vec<_> = (0..3).map(|_| gaussian_matrix(&mut r, 2, 2)).collect();
            let right: Vec<_> = (0..3).map(|_| gaussian_matrix(&mut r, 2, 2)).collect();
            let w = TensorRep::new(left, right).unwrap();
            let h = haagerup_norm(&w, &HaagerupOptions::default()).unwrap();
            let diff = (h.representation.coefficient_matrix() - w.coefficient_matrix()).norm();
            assert!(diff < 1e-8 * w.coefficient_matrix().norm());
            assert!(min_norm(&w).unwrap() <= h.value * (1.0 + 1e-9));
            assert!(h.lower_bound <= h.value && h.value - h.lower_bound < 1e-6 * h.value);
        }
    }

    #[test]
    fn descent_matches_program() {
        let mut r = rng(13);
        for _ in 0..3 {
            let left: Vec<_> = (0..2).map(|_| gaussian_matrix(&mut r, 2, 2)).collect();
            let right: Vec<_> = (0..2).map(|_| gaussian_matrix(&mut r, 2, 2)).collect();
            let w = TensorRep::new(left, right).unwrap();
            let h = haagerup_norm(&w, &HaagerupOptions::default()).unwrap().value;
            let d = haagerup_norm_by_descent(&w, 4, 1).unwrap();
            assert!((h - d).abs() < 1e-6 * h, "{h} vs {d}");
        }
    }

    #[test]
    fn balancing_reproduces_both_norms() {
        let w = TensorRep::new(vec![e(0, 0), e(1, 0)], vec![e(0, 0), e(0, 1)]).unwrap();
        let opts = HaagerupOptions::default();
        let h = haagerup_norm(&w, &opts).unwrap();
        let t = transposed_haagerup_norm(&w, &opts).unwrap();
        let bal = balance_representation(&w, &h, &t).unwrap();
        assert!(bal.gamma_delta_residual < 1e-8);
        assert!((bal.h_value - h.value).abs() < 1e-5 * h.value);
        assert!((bal.t_value - t.value).abs() < 1e-5 * t.value);
        let diff = (bal.representation.coefficient_matrix() - w.coefficient_matrix()).norm();
        assert!(diff < 1e-8);
    }
}
