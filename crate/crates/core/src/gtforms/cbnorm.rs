//! Completely bounded norm of a bilinear form (the dual of the Haagerup norm)
//! through its state characterization
//!
//! ```text
//! ‖u‖_cb = min τ  s.t.  [[R(F), U], [U*, T(G)]] ⪰ 0,  F, G ⪰ 0,  tr F, tr G ≤ τ
//! ```
//!
//! which certifies `|u(a, b)| ≤ ‖u‖_cb · f(aa*)^{1/2} g(b*b)^{1/2}` for the
//! states `f = F/tr F`, `g = G/tr G`.

use serde::{Deserialize, Serialize};

use super::{gram_aa, gram_b_star_b, maximally_mixed, BilinearForm};
use crate::error::Result;
use crate::linalg::{identity, op_norm_unchecked, real, ComplexMatrix, HermitianMatrix};
use crate::lmi::{BarrierOptions, HermitianCoords, LmiBlock, LmiProgram};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CbNormResult {
    /// Certified upper bound `(tr F · tr G)^{1/2}`.
    pub value: f64,
    pub lower_bound: f64,
    #[serde(with = "crate::linalg::matrix_serde")]
    pub f: ComplexMatrix,
    #[serde(with = "crate::linalg::matrix_serde")]
    pub g: ComplexMatrix,
    pub converged: bool,
}

/// A Hermitian matrix variable occupying a contiguous range of LMI variables.
#[derive(Debug, Clone)]
pub(crate) struct HermVar {
    pub offset: usize,
    pub coords: HermitianCoords,
    pub basis: Vec<ComplexMatrix>,
}

impl HermVar {
    pub fn new(offset: usize, n: usize) -> Self {
        let coords = HermitianCoords::new(n);
        let basis = coords.basis();
        HermVar { offset, coords, basis }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn end(&self) -> usize {
        self.offset + self.len()
    }

    /// Images of the coordinate basis under a linear map.
    pub fn images(&self, map: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Vec<(usize, ComplexMatrix)> {
        self.basis.iter().enumerate().map(|(c, e)| (self.offset + c, map(e))).collect()
    }

    pub fn psd_block(&self) -> LmiBlock {
        let n = self.coords.n;
        let mut b = LmiBlock::new(ComplexMatrix::zeros(n, n));
        for (var, m) in self.images(|e| e.clone()) {
            b.push(var, m);
        }
        b
    }

    /// `τ − tr X ≥ 0`.
    pub fn trace_bound_block(&self, tau: usize) -> LmiBlock {
        let mut coeffs: Vec<(usize, f64)> = self.coords.diagonal().map(|k| (self.offset + k, -1.0)).collect();
        coeffs.push((tau, 1.0));
        LmiBlock::scalar(0.0, &coeffs)
    }

    pub fn set(&self, x: &mut [f64], value: &ComplexMatrix) {
        let v = self.coords.decompose(value);
        x[self.offset..self.end()].copy_from_slice(&v);
    }

    pub fn get(&self, x: &[f64]) -> ComplexMatrix {
        self.coords.compose(&x[self.offset..self.end()])
    }
}

/// Block `[[Σ top, C + Σ off], [(C + Σ off)*, Σ bottom]]`.
pub(crate) fn two_by_two(
    d1: usize,
    d2: usize,
    top: &[(usize, ComplexMatrix)],
    bottom: &[(usize, ComplexMatrix)],
    off_const: &ComplexMatrix,
    off_terms: &[(usize, ComplexMatrix)],
) -> LmiBlock {
    let n = d1 + d2;
    let mut c = ComplexMatrix::zeros(n, n);
    c.view_mut((0, d1), (d1, d2)).copy_from(off_const);
    c.view_mut((d1, 0), (d2, d1)).copy_from(&off_const.adjoint());
    let mut b = LmiBlock::new(c);
    for (var, m) in top {
        let mut g = ComplexMatrix::zeros(n, n);
        g.view_mut((0, 0), (d1, d1)).copy_from(m);
        b.push(*var, g);
    }
    for (var, m) in bottom {
        let mut g = ComplexMatrix::zeros(n, n);
        g.view_mut((d1, d1), (d2, d2)).copy_from(m);
        b.push(*var, g);
    }
    for (var, m) in off_terms {
        let mut g = ComplexMatrix::zeros(n, n);
        g.view_mut((0, d1), (d1, d2)).copy_from(m);
        g.view_mut((d1, 0), (d2, d1)).copy_from(&m.adjoint());
        b.push(*var, g);
    }
    b
}

/// Multiple `c` of the identity state making `[[c·P, U], [U*, c·Q]]` comfortably positive.
pub(crate) fn start_multiple(p: &ComplexMatrix, u: &ComplexMatrix, q: &ComplexMatrix) -> f64 {
    let lp = HermitianMatrix::symmetrize(p.clone()).min_eigenvalue().max(1e-300);
    let lq = HermitianMatrix::symmetrize(q.clone()).min_eigenvalue().max(1e-300);
    2.0 * op_norm_unchecked(u) / (lp * lq).sqrt() + 1e-3
}

pub fn cb_form_norm(u: &BilinearForm) -> Result<CbNormResult> {
    u.validate()?;
    let e = &u.domain_left;
    let f_space = &u.domain_right;
    let (na, nb) = (e.ambient_dim(), f_space.ambient_dim());
    if u.is_zero() {
        return Ok(CbNormResult { value: 0.0, lower_bound: 0.0, f: maximally_mixed(na), g: maximally_mixed(nb), converged: true });
    }
    let scale = op_norm_unchecked(&u.coeffs);
    let un = &u.coeffs * real(1.0 / scale);
    let (d1, d2) = (e.dim(), f_space.dim());

    let fv = HermVar::new(0, na);
    let gv = HermVar::new(fv.end(), nb);
    let tau = gv.end();
    let mut prog = LmiProgram::new(tau + 1);
    prog.objective[tau] = 1.0;
    prog.add_block(two_by_two(d1, d2, &fv.images(|m| gram_aa(e, m)), &gv.images(|m| gram_b_star_b(f_space, m)), &un, &[]));
    prog.add_block(fv.psd_block());
    prog.add_block(gv.psd_block());
    prog.add_block(fv.trace_bound_block(tau));
    prog.add_block(gv.trace_bound_block(tau));

    let c = start_multiple(&gram_aa(e, &identity(na)), &un, &gram_b_star_b(f_space, &identity(nb)));
    let mut x0 = vec![0.0; tau + 1];
    fv.set(&mut x0, &(identity(na) * real(c)));
    gv.set(&mut x0, &(identity(nb) * real(c)));
    x0[tau] = 2.0 * c * na.max(nb) as f64 + 1.0;

    let sol = prog.solve(&x0, &BarrierOptions::default())?;
    let fm = fv.get(&sol.x);
    let gm = gv.get(&sol.x);
    let (tf, tg) = (fm.trace().re, gm.trace().re);
    Ok(CbNormResult {
        value: (tf * tg).sqrt() * scale,
        lower_bound: sol.lower_bound().max(0.0) * scale,
        f: fm * real(1.0 / tf),
        g: gm * real(1.0 / tg),
        converged: sol.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gtforms::{gram_a_star_a, gram_bb, sandwich_constant};
    use crate::linalg::c;
    use crate::opspace::OperatorSpace;
    use crate::random::rng;

    #[test]
    fn rank_one_corner_form() {
        let s = OperatorSpace::full(2);
        let mut coeffs = ComplexMatrix::zeros(4, 4);
        coeffs[(0, 0)] = c(1.0, 0.0);
        let u = BilinearForm::new(s.clone(), s, coeffs).unwrap();
        let r = cb_form_norm(&u).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6, "{}", r.value);
        assert!(r.lower_bound <= r.value);
        assert!((r.f[(0, 0)].re - 1.0).abs() < 1e-3);
        assert!((r.g[(0, 0)].re - 1.0).abs() < 1e-3);
    }

    #[test]
    fn zero_and_scaling() {
        let mut r = rng(5);
        let u = BilinearForm::random_full(&mut r, 2);
        assert_eq!(cb_form_norm(&u.zero_like()).unwrap().value, 0.0);
        let a = cb_form_norm(&u).unwrap().value;
        let b = cb_form_norm(&u.scaled(c(0.0, -3.0))).unwrap().value;
        assert!((b - 3.0 * a).abs() < 1e-6 * b);
    }

    #[test]
    fn states_certify_the_value() {
        let mut r = rng(6);
        let u = BilinearForm::random_full(&mut r, 2);
        let res = cb_form_norm(&u).unwrap();
        let p = gram_aa(&u.domain_left, &res.f);
        let q = gram_b_star_b(&u.domain_right, &res.g);
        let k = sandwich_constant(&p, &u.coeffs, &q);
        assert!(k <= res.value * (1.0 + 1e-9), "{k} vs {}", res.value);
        assert!(res.value - res.lower_bound < 1e-6 * res.value);
    }

    #[test]
    fn transposed_norm_uses_swapped_grams() {
        // cb(ᵗv) through the transposed form equals the (a*a, bb*) formulation.
        let mut r = rng(7);
        let v = BilinearForm::random_full(&mut r, 2);
        let t = cb_form_norm(&v.transpose()).unwrap();
        let p = gram_a_star_a(&v.domain_left, &t.g);
        let q = gram_bb(&v.domain_right, &t.f);
        let k = sandwich_constant(&p, &v.coeffs, &q);
        assert!(k <= t.value * (1.0 + 1e-9));
    }
}
