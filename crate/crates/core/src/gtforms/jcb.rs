//! Lower estimates of the jointly completely bounded norm
//!
//! ```text
//! ‖U‖_jcb = sup_n sup ‖Σ_{k,l} U_{kl} x_k ⊗ y_l‖ / (‖Σ a_k ⊗ x_k‖ ‖Σ b_l ⊗ y_l‖),
//! ```
//!
//! the supremum running over `x_k, y_l ∈ M_n`. Every evaluated ratio is a valid
//! lower bound, so the estimate is certified from below by its witness.
//!
//! Ascent: with `y` fixed, the top singular pair `(p, q)` of `T = Σ x_k ⊗ Y_k`
//! turns `x ↦ Re p*T(x)q` into a linear functional. It is lifted to `M_{Nn}`
//! through the dual basis of `E`, maximized over the unit ball by the polar
//! factor, and projected back onto `E ⊗ M_n`. Steps that do not increase the
//! ratio are rejected, which matters only when `E ≠ M_N`.

use serde::{Deserialize, Serialize};

use super::BilinearForm;
use crate::linalg::{dual_polar, kron, op_norm_unchecked, real, top_singular_pair, ComplexMatrix, ZERO};
use crate::opspace::OperatorSpace;
use crate::random::{derive_seed, gaussian_matrix, rng, Rng};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct JcbOptions {
    /// Largest amplification level; `None` means `N_E · N_F`.
    pub amp: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
}

impl Default for JcbOptions {
    fn default() -> Self {
        JcbOptions { amp: None, restarts: 32, seed: 0, max_iters: 200 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JcbEstimate {
    pub value: f64,
    pub amp: usize,
    /// Best value found at each level `1..=amp` (nondecreasing).
    pub profile: Vec<f64>,
    #[serde(with = "crate::linalg::matrix_vec_serde")]
    pub witness_x: Vec<ComplexMatrix>,
    #[serde(with = "crate::linalg::matrix_vec_serde")]
    pub witness_y: Vec<ComplexMatrix>,
}

/// Dual-basis data for lifting functionals on `E ⊗ M_n` to `M_{Nn}`.
struct Lift<'a> {
    space: &'a OperatorSpace,
    dual: Vec<ComplexMatrix>,
}

impl<'a> Lift<'a> {
    fn new(space: &'a OperatorSpace) -> Self {
        Lift { space, dual: space.dual_basis() }
    }

    fn big(&self, xs: &[ComplexMatrix]) -> ComplexMatrix {
        let mut acc = kron(&self.space.basis()[0], &xs[0]);
        for (a, x) in self.space.basis().iter().zip(xs).skip(1) {
            acc += kron(a, x);
        }
        acc
    }

    /// Maximizer over the unit ball of `M_{Nn}` of `Σ_k Re tr(x_k M_k)`, projected onto `E ⊗ M_n`.
    fn polar_step(&self, ms: &[ComplexMatrix], n: usize) -> Vec<ComplexMatrix> {
        let mut z = kron(&self.dual[0], &ms[0]);
        for (d, m) in self.dual.iter().zip(ms).skip(1) {
            z += kron(d, m);
        }
        self.space.amplified_coordinates(&dual_polar(&z), n)
    }
}

struct Problem<'a> {
    u: &'a ComplexMatrix,
    left: Lift<'a>,
    right: Lift<'a>,
}

impl<'a> Problem<'a> {
    fn t_matrix(&self, xs: &[ComplexMatrix], ys: &[ComplexMatrix]) -> ComplexMatrix {
        let n = xs[0].nrows();
        let mut t = ComplexMatrix::zeros(n * n, n * n);
        for (k, x) in xs.iter().enumerate() {
            let mut yk = ComplexMatrix::zeros(n, n);
            for (l, y) in ys.iter().enumerate() {
                let c = self.u[(k, l)];
                if c != ZERO {
                    yk += y * c;
                }
            }
            t += kron(x, &yk);
        }
        t
    }

    fn ratio(&self, xs: &[ComplexMatrix], ys: &[ComplexMatrix]) -> f64 {
        let nx = op_norm_unchecked(&self.left.big(xs));
        let ny = op_norm_unchecked(&self.right.big(ys));
        if nx == 0.0 || ny == 0.0 {
            return 0.0;
        }
        op_norm_unchecked(&self.t_matrix(xs, ys)) / (nx * ny)
    }

    fn normalize(&self, xs: Vec<ComplexMatrix>, lift: &Lift) -> Vec<ComplexMatrix> {
        let nrm = op_norm_unchecked(&lift.big(&xs));
        if nrm == 0.0 {
            return xs;
        }
        xs.into_iter().map(|x| x * real(1.0 / nrm)).collect()
    }

    fn step_x(&self, xs: &[ComplexMatrix], ys: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
        let n = xs[0].nrows();
        let (_, p, q) = top_singular_pair(&self.t_matrix(xs, ys));
        let pm = ComplexMatrix::from_fn(n, n, |i, j| p[i * n + j]);
        let qm = ComplexMatrix::from_fn(n, n, |i, j| q[i * n + j]);
        let ms: Vec<_> = (0..xs.len())
            .map(|k| {
                let mut yk = ComplexMatrix::zeros(n, n);
                for (l, y) in ys.iter().enumerate() {
                    yk += y * self.u[(k, l)];
                }
                &qm * yk.transpose() * pm.adjoint()
            })
            .collect();
        self.normalize(self.left.polar_step(&ms, n), &self.left)
    }

    fn step_y(&self, xs: &[ComplexMatrix], ys: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
        let n = xs[0].nrows();
        let (_, p, q) = top_singular_pair(&self.t_matrix(xs, ys));
        let pm = ComplexMatrix::from_fn(n, n, |i, j| p[i * n + j]);
        let qm = ComplexMatrix::from_fn(n, n, |i, j| q[i * n + j]);
        let ms: Vec<_> = (0..ys.len())
            .map(|l| {
                let mut xl = ComplexMatrix::zeros(n, n);
                for (k, x) in xs.iter().enumerate() {
                    xl += x * self.u[(k, l)];
                }
                qm.transpose() * xl.transpose() * pm.map(|z| z.conj())
            })
            .collect();
        self.normalize(self.right.polar_step(&ms, n), &self.right)
    }

    fn ascend(&self, mut xs: Vec<ComplexMatrix>, mut ys: Vec<ComplexMatrix>, max_iters: usize) -> (f64, Vec<ComplexMatrix>, Vec<ComplexMatrix>) {
        xs = self.normalize(xs, &self.left);
        ys = self.normalize(ys, &self.right);
        let mut best = self.ratio(&xs, &ys);
        for _ in 0..max_iters {
            let start = best;
            let nx = self.step_x(&xs, &ys);
            let rx = self.ratio(&nx, &ys);
            if rx > best {
                best = rx;
                xs = nx;
            }
            let ny = self.step_y(&xs, &ys);
            let ry = self.ratio(&xs, &ny);
            if ry > best {
                best = ry;
                ys = ny;
            }
            if best <= start * (1.0 + 1e-12) {
                break;
            }
        }
        (best, xs, ys)
    }
}

fn random_family(r: &mut Rng, count: usize, n: usize) -> Vec<ComplexMatrix> {
    (0..count).map(|_| gaussian_matrix(r, n, n)).collect()
}

fn pad(xs: &[ComplexMatrix], n: usize) -> Vec<ComplexMatrix> {
    xs.iter()
        .map(|x| {
            let mut m = ComplexMatrix::zeros(n, n);
            m.view_mut((0, 0), (x.nrows(), x.ncols())).copy_from(x);
            m
        })
        .collect()
}

/// Best lower bound found over amplification levels `1..=amp`.
pub fn jcb_norm_estimate(u: &BilinearForm, opts: &JcbOptions) -> JcbEstimate {
    let amp = opts
        .amp
        .unwrap_or(u.domain_left.ambient_dim() * u.domain_right.ambient_dim())
        .max(1);
    let (dl, dr) = (u.domain_left.dim(), u.domain_right.dim());
    if u.is_zero() {
        return JcbEstimate {
            value: 0.0,
            amp,
            profile: vec![0.0; amp],
            witness_x: vec![ComplexMatrix::zeros(1, 1); dl],
            witness_y: vec![ComplexMatrix::zeros(1, 1); dr],
        };
    }
    let prob = Problem { u: &u.coeffs, left: Lift::new(&u.domain_left), right: Lift::new(&u.domain_right) };
    let mut best = 0.0;
    let mut best_x: Vec<ComplexMatrix> = Vec::new();
    let mut best_y: Vec<ComplexMatrix> = Vec::new();
    let mut profile = Vec::with_capacity(amp);
    for n in 1..=amp {
        let mut r = rng(derive_seed(opts.seed, n as u64));
        if !best_x.is_empty() {
            // Warm start from the previous level keeps the profile monotone.
            let (v, x, y) = prob.ascend(pad(&best_x, n), pad(&best_y, n), opts.max_iters);
            if v > best {
                best = v;
                best_x = x;
                best_y = y;
            } else {
                best_x = pad(&best_x, n);
                best_y = pad(&best_y, n);
            }
        }
        for _ in 0..opts.restarts.max(1) {
            let xs = random_family(&mut r, dl, n);
            let ys = random_family(&mut r, dr, n);
            let (v, x, y) = prob.ascend(xs, ys, opts.max_iters);
            if v > best {
                best = v;
                best_x = x;
                best_y = y;
            }
        }
        profile.push(best);
    }
    JcbEstimate { value: best, amp, profile, witness_x: best_x, witness_y: best_y }
}

/// Profile of the estimate over amplification levels `1..=max_amp`.
pub fn jcb_profile(u: &BilinearForm, max_amp: usize, restarts: usize, seed: u64) -> Vec<f64> {
    jcb_norm_estimate(u, &JcbOptions { amp: Some(max_amp), restarts, seed, ..Default::default() }).profile
}

/// Recomputes the ratio attained by a witness.
pub fn witness_ratio(u: &BilinearForm, xs: &[ComplexMatrix], ys: &[ComplexMatrix]) -> f64 {
    let prob = Problem { u: &u.coeffs, left: Lift::new(&u.domain_left), right: Lift::new(&u.domain_right) };
    prob.ratio(xs, ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn corner_functional_has_norm_one() {
        let s = OperatorSpace::full(2);
        let mut coeffs = ComplexMatrix::zeros(4, 4);
        coeffs[(0, 0)] = c(1.0, 0.0);
        let u = BilinearForm::new(s.clone(), s, coeffs).unwrap();
        let est = jcb_norm_estimate(&u, &JcbOptions { amp: Some(2), restarts: 4, seed: 1, ..Default::default() });
        assert!((est.value - 1.0).abs() < 1e-9, "{}", est.value);
    }

    #[test]
    fn trace_form_has_norm_two() {
        let u = BilinearForm::trace_form(2);
        let est = jcb_norm_estimate(&u, &JcbOptions { amp: Some(4), restarts: 16, seed: 2, ..Default::default() });
        assert!((est.value - 2.0).abs() < 1e-6, "{}", est.value);
        assert!(est.profile.windows(2).all(|w| w[0] <= w[1]));
        let again = witness_ratio(&u, &est.witness_x, &est.witness_y);
        assert!((again - est.value).abs() < 1e-12 * est.value);
    }

    #[test]
    fn amplification_is_monotone() {
        let mut r = rng(9);
        let u = BilinearForm::random_full(&mut r, 2);
        let p = jcb_profile(&u, 3, 4, 3);
        assert!(p[0] <= p[1] && p[1] <= p[2]);
    }
}
