//! Bilinear forms `U: E × F → ℂ` on based subspaces of matrix algebras.
//!
//! Coordinates: for `a = Σ α_k a_k` and `b = Σ β_l b_l`, `U(a, b) = αᵀ U β`.
//! State conditions are written in the variables `x = conj(α)`, `y = β`, for
//! which `U(a, b) = x* U y` and, for a density matrix `f` on the ambient
//! algebra of `E` (and `g` on that of `F`),
//!
//! ```text
//! f(aa*) = x* R(f) x,  R(f)_{kl} = tr(f a_k a_l*)
//! f(a*a) = x* S(f) x,  S(f)_{kl} = tr(f a_l* a_k)
//! g(b*b) = y* T(g) y,  T(g)_{kl} = tr(g b_k* b_l)
//! g(bb*) = y* V(g) y,  V(g)_{kl} = tr(g b_l b_k*)
//! ```

mod cbnorm;
mod decompose;
mod factor;
mod jcb;
mod states;
mod verify;

pub use cbnorm::{cb_form_norm, CbNormResult};
pub use decompose::{decompose_form, Decomposition};
pub use factor::{factor_through_rc, RCFactorization};
pub use jcb::{jcb_norm_estimate, jcb_profile, witness_ratio, JcbEstimate, JcbOptions};
pub use states::{find_states, separation_ratio, state_violation, StateQuadruple, StatesOptions, StatesOutcome};
pub use verify::{verify_gt_inequalities, GtReport};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{real, trace_product, ComplexMatrix, C64, ONE, ZERO};
use crate::opspace::{OperatorSpace, TensorRep};
use crate::random::{gaussian_matrix, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilinearForm {
    pub domain_left: OperatorSpace,
    pub domain_right: OperatorSpace,
    #[serde(with = "crate::linalg::matrix_serde")]
    pub coeffs: ComplexMatrix,
}

impl BilinearForm {
    pub fn new(domain_left: OperatorSpace, domain_right: OperatorSpace, coeffs: ComplexMatrix) -> Result<Self> {
        let f = BilinearForm { domain_left, domain_right, coeffs };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.coeffs.nrows() != self.domain_left.dim() || self.coeffs.ncols() != self.domain_right.dim() {
            return Err(Error::Dimension(format!(
                "coefficients are {}x{}, bases have sizes {} and {}",
                self.coeffs.nrows(),
                self.coeffs.ncols(),
                self.domain_left.dim(),
                self.domain_right.dim()
            )));
        }
        if self.coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("coefficients must be finite".into()));
        }
        Ok(())
    }

    /// `U(a, b) = tr(ab)` on `M_n × M_n`.
    pub fn trace_form(n: usize) -> Self {
        let space = OperatorSpace::full(n);
        let d = n * n;
        let coeffs = ComplexMatrix::from_fn(d, d, |r, c| {
            let (i, j) = (r / n, r % n);
            let (k, l) = (c / n, c % n);
            if j == k && i == l {
                ONE
            } else {
                ZERO
            }
        });
        BilinearForm { domain_left: space.clone(), domain_right: space, coeffs }
    }

    /// Form with i.i.d. complex Gaussian coefficients on `M_n × M_n`.
    pub fn random_full(rng: &mut Rng, n: usize) -> Self {
        let space = OperatorSpace::full(n);
        let coeffs = gaussian_matrix(rng, n * n, n * n);
        BilinearForm { domain_left: space.clone(), domain_right: space, coeffs }
    }

    pub fn zero_like(&self) -> Self {
        BilinearForm { coeffs: ComplexMatrix::zeros(self.coeffs.nrows(), self.coeffs.ncols()), ..self.clone() }
    }

    pub fn with_coeffs(&self, coeffs: ComplexMatrix) -> Self {
        BilinearForm { coeffs, ..self.clone() }
    }

    pub fn scaled(&self, c: C64) -> Self {
        self.with_coeffs(&self.coeffs * c)
    }

    /// `ᵗU(b, a) = U(a, b)` on `F × E`.
    pub fn transpose(&self) -> Self {
        BilinearForm {
            domain_left: self.domain_right.clone(),
            domain_right: self.domain_left.clone(),
            coeffs: self.coeffs.transpose(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|z| *z == ZERO)
    }

    pub fn evaluate(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
        let alpha = self.domain_left.coordinates(a)?;
        let beta = self.domain_right.coordinates(b)?;
        Ok(self.evaluate_coords(&alpha, &beta))
    }

    pub fn evaluate_coords(&self, alpha: &DVector<C64>, beta: &DVector<C64>) -> C64 {
        (alpha.transpose() * &self.coeffs * beta)[(0, 0)]
    }

    /// `⟨U, w⟩ = Σ U(a_i, b_i)`.
    pub fn pair(&self, w: &TensorRep) -> Result<C64> {
        let mut s = ZERO;
        for (a, b) in w.left.iter().zip(&w.right) {
            s += self.evaluate(a, b)?;
        }
        Ok(s)
    }
}

/// `R(f)_{kl} = tr(f a_k a_l*)`.
pub fn gram_aa(space: &OperatorSpace, f: &ComplexMatrix) -> ComplexMatrix {
    let b = space.basis();
    let fa: Vec<_> = b.iter().map(|a| f * a).collect();
    ComplexMatrix::from_fn(b.len(), b.len(), |k, l| trace_product(&fa[k], &b[l].adjoint()))
}

/// `S(f)_{kl} = tr(f a_l* a_k)`.
pub fn gram_a_star_a(space: &OperatorSpace, f: &ComplexMatrix) -> ComplexMatrix {
    let b = space.basis();
    let fa: Vec<_> = b.iter().map(|a| f * a.adjoint()).collect();
    ComplexMatrix::from_fn(b.len(), b.len(), |k, l| trace_product(&fa[l], &b[k]))
}

/// `T(g)_{kl} = tr(g b_k* b_l)`.
pub fn gram_b_star_b(space: &OperatorSpace, g: &ComplexMatrix) -> ComplexMatrix {
    let b = space.basis();
    let gb: Vec<_> = b.iter().map(|x| g * x.adjoint()).collect();
    ComplexMatrix::from_fn(b.len(), b.len(), |k, l| trace_product(&gb[k], &b[l]))
}

/// `V(g)_{kl} = tr(g b_l b_k*)`.
pub fn gram_bb(space: &OperatorSpace, g: &ComplexMatrix) -> ComplexMatrix {
    let b = space.basis();
    let gb: Vec<_> = b.iter().map(|x| g * x).collect();
    ComplexMatrix::from_fn(b.len(), b.len(), |k, l| trace_product(&gb[l], &b[k].adjoint()))
}

/// Maximally mixed state on `M_n`.
pub fn maximally_mixed(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n) * real(1.0 / n as f64)
}

/// `(F + (target − tr F)·I/N) / target`: a state dominating `F/target`.
pub(crate) fn pad_state(f: &ComplexMatrix, target: f64) -> ComplexMatrix {
    let n = f.nrows();
    let h = (f + f.adjoint()) * real(0.5);
    let tr = h.trace().re;
    let extra = ((target - tr) / n as f64).max(0.0);
    (h + ComplexMatrix::identity(n, n) * real(extra)) * real(1.0 / target)
}

/// `|x* U y|² ≤ (x* P x)(y* Q y)` for all `x, y` holds iff `‖P^{+1/2} U Q^{+1/2}‖ ≤ 1`
/// and the ranges of `U`, `U*` lie in those of `P`, `Q`. Returns the smallest
/// constant `c` with `|x* U y| ≤ c·(x* P x)^{1/2}(y* Q y)^{1/2}` (infinite when
/// the range condition fails).
pub fn sandwich_constant(p: &ComplexMatrix, u: &ComplexMatrix, q: &ComplexMatrix) -> f64 {
    use crate::linalg::{op_norm_unchecked, HermitianMatrix};
    let scale = op_norm_unchecked(p).max(op_norm_unchecked(q)).max(f64::MIN_POSITIVE);
    let cut = 1e-13 * scale;
    let hp = HermitianMatrix::symmetrize(p.clone());
    let hq = HermitianMatrix::symmetrize(q.clone());
    let p_inv = hp.map_spectrum(|v| if v > cut { 1.0 / v.sqrt() } else { 0.0 });
    let q_inv = hq.map_spectrum(|v| if v > cut { 1.0 / v.sqrt() } else { 0.0 });
    let p_proj = hp.map_spectrum(|v| if v > cut { 1.0 } else { 0.0 });
    let q_proj = hq.map_spectrum(|v| if v > cut { 1.0 } else { 0.0 });
    let un = op_norm_unchecked(u);
    if un == 0.0 {
        return 0.0;
    }
    let leak = (u - &p_proj * u * &q_proj).norm();
    if leak > 1e-9 * un {
        return f64::INFINITY;
    }
    op_norm_unchecked(&(p_inv * u * q_inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, matrix_unit};
    use crate::random::{density_matrix, gaussian_vector, rng};

    #[test]
    fn evaluation_examples() {
        let one = OperatorSpace::full(1);
        let u = BilinearForm::new(one.clone(), one, ComplexMatrix::from_element(1, 1, ONE)).unwrap();
        let id = ComplexMatrix::from_element(1, 1, ONE);
        assert_eq!(u.evaluate(&id, &id).unwrap(), ONE);

        let t = BilinearForm::trace_form(2);
        let a = matrix_unit(2, 2, 0, 1);
        let b = matrix_unit(2, 2, 1, 0);
        assert!((t.evaluate(&a, &b).unwrap() - ONE).norm() < 1e-14);
        let v1 = t.evaluate(&(&a * c(2.0, 0.0)), &(&b * c(3.0, 0.0))).unwrap();
        assert!((v1 - c(6.0, 0.0)).norm() < 1e-13);
        let mut r = rng(1);
        let x = gaussian_matrix(&mut r, 2, 2);
        let y = gaussian_matrix(&mut r, 2, 2);
        assert!((t.evaluate(&x, &y).unwrap() - (&x * &y).trace()).norm() < 1e-12);
    }

    #[test]
    fn gram_conventions_match_states() {
        let mut r = rng(2);
        let e = OperatorSpace::new(vec![gaussian_matrix(&mut r, 3, 3), gaussian_matrix(&mut r, 3, 3)]).unwrap();
        let f = density_matrix(&mut r, 3);
        let alpha = gaussian_vector(&mut r, 2);
        let a = e.element(alpha.as_slice());
        let x = alpha.map(|z| z.conj());
        let quad = |m: &ComplexMatrix| (x.adjoint() * m * &x)[(0, 0)];
        let faa = (&f * &a * a.adjoint()).trace();
        let fasa = (&f * a.adjoint() * &a).trace();
        assert!((quad(&gram_aa(&e, &f)) - faa).norm() < 1e-12);
        assert!((quad(&gram_a_star_a(&e, &f)) - fasa).norm() < 1e-12);
        let y = alpha.clone();
        let quad_y = |m: &ComplexMatrix| (y.adjoint() * m * &y)[(0, 0)];
        assert!((quad_y(&gram_b_star_b(&e, &f)) - fasa).norm() < 1e-12);
        assert!((quad_y(&gram_bb(&e, &f)) - faa).norm() < 1e-12);
    }

    #[test]
    fn transpose_and_pairing() {
        let mut r = rng(3);
        let u = BilinearForm::random_full(&mut r, 2);
        let a = gaussian_matrix(&mut r, 2, 2);
        let b = gaussian_matrix(&mut r, 2, 2);
        let ut = u.transpose();
        assert!((u.evaluate(&a, &b).unwrap() - ut.evaluate(&b, &a).unwrap()).norm() < 1e-12);
        let w = TensorRep::new(vec![a.clone(), b.clone()], vec![b.clone(), a.clone()]).unwrap();
        let p = u.pair(&w).unwrap();
        assert!((p - u.evaluate(&a, &b).unwrap() - u.evaluate(&b, &a).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn sandwich_constant_cases() {
        let p = ComplexMatrix::identity(2, 2);
        let u = matrix_unit(2, 2, 0, 1) * c(3.0, 0.0);
        assert!((sandwich_constant(&p, &u, &p) - 3.0).abs() < 1e-12);
        let p1 = matrix_unit(2, 2, 0, 0);
        assert!(sandwich_constant(&p1, &matrix_unit(2, 2, 1, 1), &p).is_infinite());
        assert_eq!(sandwich_constant(&p, &ComplexMatrix::zeros(2, 2), &p), 0.0);
    }
}
