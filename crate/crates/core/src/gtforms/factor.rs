//! Factorization of `ũ: E → F*`, `ũ(a)(b) = U(a, b)`, through `H_r ⊕ H_c`.
//!
//! For the piece `u` with certificate states `f₁, g₁`, `f₁(aa*) = α* P α` with
//! `P = conj R(f₁)`. Writing `P = W Λ W*` and `M = Λ^{1/2} W*` (null directions
//! dropped), `a ↦ Mα` maps `E` into a row Hilbert space of dimension `rank P`,
//! and `u = Mᵀ Z` for a unique `Z` on that range. The column part comes from
//! `v` and `f₂(a*a)` in the same way. Both `Z` are compressed to their rank.

use serde::{Deserialize, Serialize};

use super::{gram_a_star_a, gram_aa, gram_b_star_b, gram_bb, sandwich_constant, BilinearForm, Decomposition};
use crate::error::{Error, Result};
use crate::linalg::{identity, lstsq, real, svd, ComplexMatrix, HermitianMatrix};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RCFactorization {
    pub dim_r: usize,
    pub dim_c: usize,
    /// `(dim_r + dim_c) × dim E`: coordinates `α` of `a` to `v(a) ∈ H_r ⊕ H_c`.
    #[serde(with = "crate::linalg::matrix_serde")]
    pub v_map: ComplexMatrix,
    /// `(dim_r + dim_c) × dim F`: `ũ = v_mapᵀ · w_map` in basis coefficients.
    #[serde(with = "crate::linalg::matrix_serde")]
    pub w_map: ComplexMatrix,
    /// Norm bounds of the balanced row and column parts (equal for `v` and `w`).
    pub norm_r: f64,
    pub norm_c: f64,
    /// `max(norm_r², norm_c²)`.
    pub bound: f64,
    /// `‖v_mapᵀ w_map − U‖ / ‖U‖` (absolute when `U = 0`).
    pub residual: f64,
}

struct Part {
    m: ComplexMatrix,
    z: ComplexMatrix,
    constant: f64,
}

/// `coeffs = Mᵀ Z` with `α* conj(gram) α = ‖Mα‖²`; `q` is the gram of the right-hand state.
fn part(gram: &ComplexMatrix, coeffs: &ComplexMatrix, q: &ComplexMatrix) -> Result<Part> {
    let d1 = coeffs.nrows();
    let d2 = coeffs.ncols();
    let scale = coeffs.norm();
    if scale == 0.0 {
        return Ok(Part { m: ComplexMatrix::zeros(0, d1), z: ComplexMatrix::zeros(0, d2), constant: 0.0 });
    }
    let p = HermitianMatrix::symmetrize(gram.map(|z| z.conj()));
    let (vals, vecs) = p.eigh();
    let top = vals.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 1e-12 * top).collect();
    let m = ComplexMatrix::from_fn(keep.len(), d1, |r, c| vecs[(c, keep[r])].conj() * vals[keep[r]].sqrt());
    let z = lstsq(&m.transpose(), coeffs, 1e-14);
    // Compress to the rank of Z: Z = Q S with orthonormal Q.
    let svd = svd(&z);
    let (uq, vt) = (svd.u, svd.v_t);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let rank = svd.singular_values.iter().filter(|s| **s > 1e-12 * smax).count();
    let q_basis = uq.columns(0, rank).into_owned();
    let s = ComplexMatrix::from_fn(rank, d2, |i, j| vt[(i, j)] * svd.singular_values[i]);
    let m = q_basis.transpose() * m;
    let constant = sandwich_constant(&identity(rank), &s, q);
    if !constant.is_finite() {
        return Err(Error::Precondition("certificate states do not dominate the piece".into()));
    }
    Ok(Part { m, z: s, constant })
}

fn balance(p: Part) -> (ComplexMatrix, ComplexMatrix, f64) {
    if p.constant == 0.0 {
        return (p.m, p.z, 0.0);
    }
    let r = p.constant.sqrt();
    (p.m * real(r), p.z * real(1.0 / r), r)
}

pub fn factor_through_rc(u: &BilinearForm, dec: &Decomposition) -> Result<RCFactorization> {
    u.validate()?;
    let (e, f) = (&u.domain_left, &u.domain_right);
    let resum = (&dec.u.coeffs + &dec.v.coeffs - &u.coeffs).norm();
    if resum > 1e-9 * u.coeffs.norm().max(1.0) {
        return Err(Error::Precondition("decomposition does not sum to the form".into()));
    }
    // g(b*b) = β* T(g) β and g(bb*) = β* V(g) β in the coordinates of b.
    let row = part(&gram_aa(e, &dec.f1), &dec.u.coeffs, &gram_b_star_b(f, &dec.g1))?;
    let col = part(&gram_a_star_a(e, &dec.f2), &dec.v.coeffs, &gram_bb(f, &dec.g2))?;
    let (mr, zr, nr) = balance(row);
    let (mc, zc, nc) = balance(col);
    let (dim_r, dim_c) = (mr.nrows(), mc.nrows());
    let mut v_map = ComplexMatrix::zeros(dim_r + dim_c, e.dim());
    v_map.rows_mut(0, dim_r).copy_from(&mr);
    v_map.rows_mut(dim_r, dim_c).copy_from(&mc);
    let mut w_map = ComplexMatrix::zeros(dim_r + dim_c, f.dim());
    w_map.rows_mut(0, dim_r).copy_from(&zr);
    w_map.rows_mut(dim_r, dim_c).copy_from(&zc);
    let diff = (v_map.transpose() * &w_map - &u.coeffs).norm();
    let un = u.coeffs.norm();
    Ok(RCFactorization {
        dim_r,
        dim_c,
        v_map,
        w_map,
        norm_r: nr,
        norm_c: nc,
        bound: (nr * nr).max(nc * nc),
        residual: if un > 0.0 { diff / un } else { diff },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gtforms::decompose_form;
    use crate::random::rng;

    #[test]
    fn trace_form_factorization() {
        let u = BilinearForm::trace_form(2);
        let d = decompose_form(&u, 4.0).unwrap();
        let fac = factor_through_rc(&u, &d).unwrap();
        assert!(fac.residual <= 1e-6, "{}", fac.residual);
        assert!(fac.dim_r + fac.dim_c <= 8);
        assert!(fac.bound <= d.bound * (1.0 + 1e-6));
    }

    #[test]
    fn zero_form_gives_zero_maps() {
        let u = BilinearForm::trace_form(2).zero_like();
        let d = decompose_form(&u, 1.0).unwrap();
        let fac = factor_through_rc(&u, &d).unwrap();
        assert_eq!((fac.dim_r, fac.dim_c), (0, 0));
        assert_eq!(fac.residual, 0.0);
    }

    #[test]
    fn random_form_reconstructs() {
        let mut r = rng(31);
        let u = BilinearForm::random_full(&mut r, 2);
        let d = decompose_form(&u, 10.0).unwrap();
        let fac = factor_through_rc(&u, &d).unwrap();
        assert!(fac.residual <= 1e-6, "{}", fac.residual);
    }
}
