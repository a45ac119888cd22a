//! Splitting `U = u + v` with `u` completely bounded on `E × F` and `ᵗv`
//! completely bounded on `F × E`, minimizing the larger of the two norms.
//!
//! Single joint program over `u` and four positive matrices:
//!
//! ```text
//! min τ  s.t.  [[R(F₁), u], [u*, T(G₁)]] ⪰ 0,  [[S(F₂), U − u], [(U − u)*, V(G₂)]] ⪰ 0,
//!              F_i, G_i ⪰ 0,  tr F_i, tr G_i ≤ τ.
//! ```
//!
//! The two blocks certify `|u(a,b)| ≤ f₁(aa*)^{1/2} g₁(b*b)^{1/2}·(tr F₁ tr G₁)^{1/2}`
//! and the analogous bound for `v` with `f₂(a*a)`, `g₂(bb*)`.

use serde::{Deserialize, Serialize};

use super::cbnorm::{start_multiple, two_by_two, HermVar};
use super::{gram_a_star_a, gram_aa, gram_b_star_b, gram_bb, maximally_mixed, BilinearForm};
use crate::error::{Error, Result};
use crate::linalg::{identity, matrix_unit, op_norm_unchecked, real, ComplexMatrix, I};
use crate::lmi::{BarrierOptions, LmiProgram};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Decomposition {
    pub u: BilinearForm,
    pub v: BilinearForm,
    /// `max(bound_u, bound_v)`.
    pub bound: f64,
    /// Certified upper bound on the cb norm of `u`.
    pub bound_u: f64,
    /// Certified upper bound on the cb norm of `ᵗv`.
    pub bound_v: f64,
    /// No split achieves a maximum below this value.
    pub lower_bound: f64,
    /// Requested constant and whether `bound ≤ K·(1 + 1e−4)`.
    pub target: f64,
    pub meets_target: bool,
    #[serde(with = "crate::linalg::matrix_serde")]
    pub f1: ComplexMatrix,
    #[serde(with = "crate::linalg::matrix_serde")]
    pub g1: ComplexMatrix,
    #[serde(with = "crate::linalg::matrix_serde")]
    pub f2: ComplexMatrix,
    #[serde(with = "crate::linalg::matrix_serde")]
    pub g2: ComplexMatrix,
    pub converged: bool,
}

fn state(m: ComplexMatrix) -> (ComplexMatrix, f64) {
    let t = m.trace().re;
    if t > 0.0 {
        (m * real(1.0 / t), t)
    } else {
        (maximally_mixed(m.nrows()), 0.0)
    }
}

pub fn decompose_form(u: &BilinearForm, k: f64) -> Result<Decomposition> {
    u.validate()?;
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidInput(format!("K must be positive and finite, got {k}")));
    }
    let (e, f) = (&u.domain_left, &u.domain_right);
    let (na, nb) = (e.ambient_dim(), f.ambient_dim());
    let (d1, d2) = (e.dim(), f.dim());
    if u.is_zero() {
        let (ma, mb) = (maximally_mixed(na), maximally_mixed(nb));
        return Ok(Decomposition {
            u: u.clone(),
            v: u.clone(),
            bound: 0.0,
            bound_u: 0.0,
            bound_v: 0.0,
            lower_bound: 0.0,
            target: k,
            meets_target: true,
            f1: ma.clone(),
            g1: mb.clone(),
            f2: ma,
            g2: mb,
            converged: true,
        });
    }
    let scale = op_norm_unchecked(&u.coeffs);
    let un = &u.coeffs * real(1.0 / scale);

    let piece = d1 * d2;
    let f1 = HermVar::new(2 * piece, na);
    let g1 = HermVar::new(f1.end(), nb);
    let f2 = HermVar::new(g1.end(), na);
    let g2 = HermVar::new(f2.end(), nb);
    let tau = g2.end();
    let mut prog = LmiProgram::new(tau + 1);
    prog.objective[tau] = 1.0;

    // u_{kl} = x[2(k·d2 + l)] + i·x[2(k·d2 + l) + 1]
    let mut plus = Vec::with_capacity(2 * piece);
    let mut minus = Vec::with_capacity(2 * piece);
    for kk in 0..d1 {
        for l in 0..d2 {
            let idx = 2 * (kk * d2 + l);
            let unit = matrix_unit(d1, d2, kk, l);
            plus.push((idx, unit.clone()));
            plus.push((idx + 1, &unit * I));
            minus.push((idx, -&unit));
            minus.push((idx + 1, -(&unit * I)));
        }
    }
    let zero = ComplexMatrix::zeros(d1, d2);
    prog.add_block(two_by_two(d1, d2, &f1.images(|m| gram_aa(e, m)), &g1.images(|m| gram_b_star_b(f, m)), &zero, &plus));
    prog.add_block(two_by_two(d1, d2, &f2.images(|m| gram_a_star_a(e, m)), &g2.images(|m| gram_bb(f, m)), &un, &minus));
    for v in [&f1, &g1, &f2, &g2] {
        prog.add_block(v.psd_block());
        prog.add_block(v.trace_bound_block(tau));
    }

    let (ia, ib) = (identity(na), identity(nb));
    let half = &un * real(0.5);
    let c0 = start_multiple(&gram_aa(e, &ia), &half, &gram_b_star_b(f, &ib))
        .max(start_multiple(&gram_a_star_a(e, &ia), &half, &gram_bb(f, &ib)));
    let mut x0 = vec![0.0; tau + 1];
    for kk in 0..d1 {
        for l in 0..d2 {
            let idx = 2 * (kk * d2 + l);
            x0[idx] = half[(kk, l)].re;
            x0[idx + 1] = half[(kk, l)].im;
        }
    }
    f1.set(&mut x0, &(&ia * real(c0)));
    f2.set(&mut x0, &(&ia * real(c0)));
    g1.set(&mut x0, &(&ib * real(c0)));
    g2.set(&mut x0, &(&ib * real(c0)));
    x0[tau] = 2.0 * c0 * na.max(nb) as f64 + 1.0;

    let sol = prog.solve(&x0, &BarrierOptions { gap_rel: 1e-8, ..Default::default() })?;
    let mut uc = ComplexMatrix::zeros(d1, d2);
    for kk in 0..d1 {
        for l in 0..d2 {
            let idx = 2 * (kk * d2 + l);
            uc[(kk, l)] = crate::linalg::c(sol.x[idx], sol.x[idx + 1]) * scale;
        }
    }
    let vc = &u.coeffs - &uc;
    let (s_f1, t_f1) = state(f1.get(&sol.x));
    let (s_g1, t_g1) = state(g1.get(&sol.x));
    let (s_f2, t_f2) = state(f2.get(&sol.x));
    let (s_g2, t_g2) = state(g2.get(&sol.x));
    let bound_u = (t_f1 * t_g1).sqrt() * scale;
    let bound_v = (t_f2 * t_g2).sqrt() * scale;
    let bound = bound_u.max(bound_v);
    Ok(Decomposition {
        u: u.with_coeffs(uc),
        v: u.with_coeffs(vc),
        bound,
        bound_u,
        bound_v,
        lower_bound: sol.lower_bound().max(0.0) * scale,
        target: k,
        meets_target: bound <= k * (1.0 + 1e-4),
        f1: s_f1,
        g1: s_g1,
        f2: s_f2,
        g2: s_g2,
        converged: sol.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gtforms::{cb_form_norm, sandwich_constant};
    use crate::random::rng;

    #[test]
    fn pieces_resum_and_are_certified() {
        let mut r = rng(21);
        let u = BilinearForm::random_full(&mut r, 2);
        let d = decompose_form(&u, 10.0).unwrap();
        assert!((&d.u.coeffs + &d.v.coeffs - &u.coeffs).norm() <= 1e-12 * u.coeffs.norm());
        let cu = cb_form_norm(&d.u).unwrap().value;
        let cv = cb_form_norm(&d.v.transpose()).unwrap().value;
        assert!(cu <= d.bound * (1.0 + 1e-5), "{cu} vs {}", d.bound);
        assert!(cv <= d.bound * (1.0 + 1e-5), "{cv} vs {}", d.bound);
        let k1 = sandwich_constant(&gram_aa(&u.domain_left, &d.f1), &d.u.coeffs, &gram_b_star_b(&u.domain_right, &d.g1));
        assert!(k1 <= d.bound_u * (1.0 + 1e-9));
        assert!(d.bound - d.lower_bound <= 1e-6 * d.bound);
    }

    #[test]
    fn cb_form_needs_no_larger_bound() {
        let mut r = rng(22);
        let u = BilinearForm::random_full(&mut r, 2);
        let cb = cb_form_norm(&u).unwrap().value;
        let d = decompose_form(&u, cb).unwrap();
        assert!(d.bound <= cb * (1.0 + 1e-6));
        assert!(d.meets_target);
    }

    #[test]
    fn sum_of_known_pieces() {
        let mut r = rng(23);
        let u0 = BilinearForm::random_full(&mut r, 2);
        let v0 = BilinearForm::random_full(&mut r, 2);
        let total = u0.with_coeffs(&u0.coeffs + &v0.coeffs);
        let feasible = cb_form_norm(&u0).unwrap().value + cb_form_norm(&v0.transpose()).unwrap().value;
        let d = decompose_form(&total, feasible).unwrap();
        assert!(d.bound <= feasible * (1.0 + 1e-6));
    }
}
