//! Linear maps `u: E → OH(I)`, `E ⊆ M_N`, given by an action matrix on the
//! coordinates of `E`, and states `f` with
//!
//! ```text
//! ‖u(x)‖² ≤ K² (f(xx*) f(x*x))^{1/2}    for all x ∈ E.
//! ```
//!
//! With `G = Act* Act`, `f(xx*) = α* P(f) α`, `f(x*x) = α* Q(f) α` in the
//! coordinates `α` of `x`, and `(AB)^{1/2} = inf_μ ½(μA + B/μ)`, the condition
//! is the LMI family `½ K² (μ P(f) + Q(f)/μ) ⪰ G` over `μ > 0`, handled by
//! cutting planes as for the bilinear state problems.
//!
//! The target inner product is conjugate-linear in its second slot.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gtforms::{
    decompose_form, jcb_norm_estimate, maximally_mixed, pad_state, sandwich_constant, BilinearForm, JcbOptions,
};
use crate::linalg::{identity, kron, op_norm_unchecked, real, trace_product, ComplexMatrix, HermitianMatrix, C64};
use crate::lmi::{BarrierOptions, HermitianCoords, LmiBlock, LmiProgram};
use crate::opspace::OperatorSpace;
use crate::random::{gaussian_vector, rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OHMap {
    pub domain: OperatorSpace,
    /// `target_dim × dim E`: `u(Σ α_k a_k) = action · α`.
    #[serde(with = "crate::linalg::matrix_serde")]
    pub action: ComplexMatrix,
}

impl OHMap {
    pub fn new(domain: OperatorSpace, action: ComplexMatrix) -> Result<Self> {
        if action.ncols() != domain.dim() {
            return Err(Error::Dimension(format!("action has {} columns, domain has dimension {}", action.ncols(), domain.dim())));
        }
        if action.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("action must be finite".into()));
        }
        Ok(OHMap { domain, action })
    }

    /// `x ↦ f^{1/4} x f^{1/4}` on `M_N` with Hilbert–Schmidt target; satisfies the
    /// state inequality at `f` with `K = 1`.
    pub fn hilbert_schmidt_embedding(f: &ComplexMatrix) -> Result<Self> {
        let n = f.nrows();
        let q = HermitianMatrix::new(f.clone())?.map_spectrum(|v| v.max(0.0).powf(0.25));
        let space = OperatorSpace::full(n);
        let action = ComplexMatrix::from_fn(n * n, n * n, |r, c| {
            // Column c is e_{ij}; row r = (p, s) picks entry (p, s) of q e_{ij} q = q_{pi} q_{js}.
            let (i, j) = (c / n, c % n);
            let (p, s) = (r / n, r % n);
            q[(p, i)] * q[(j, s)]
        });
        OHMap::new(space, action)
    }

    pub fn target_dim(&self) -> usize {
        self.action.nrows()
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<DVector<C64>> {
        Ok(&self.action * self.domain.coordinates(x)?)
    }

    pub fn scaled(&self, c: C64) -> Self {
        OHMap { domain: self.domain.clone(), action: &self.action * c }
    }

    /// `G = Act* Act`, so that `‖u(x)‖² = α* G α`.
    pub fn gram(&self) -> ComplexMatrix {
        self.action.adjoint() * &self.action
    }

    /// The form `(x̄, y) ↦ ⟨u(y), u(x)⟩` on `conj(E) × E`, with coefficients `G`.
    pub fn associated_form(&self) -> BilinearForm {
        BilinearForm::new(self.domain.conjugate(), self.domain.clone(), self.gram()).expect("dimensions agree")
    }
}

/// `P(f)_{kl} = tr(f a_l a_k*)`, so `f(xx*) = α* P α`.
fn gram_p(space: &OperatorSpace, f: &ComplexMatrix) -> ComplexMatrix {
    let b = space.basis();
    ComplexMatrix::from_fn(b.len(), b.len(), |k, l| trace_product(&(f * &b[l]), &b[k].adjoint()))
}

/// `Q(f)_{kl} = tr(f a_k* a_l)`, so `f(x*x) = α* Q α`.
fn gram_q(space: &OperatorSpace, f: &ComplexMatrix) -> ComplexMatrix {
    let b = space.basis();
    ComplexMatrix::from_fn(b.len(), b.len(), |k, l| trace_product(&(f * b[k].adjoint()), &b[l]))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OHCertificate {
    #[serde(with = "crate::linalg::matrix_serde")]
    pub f: ComplexMatrix,
    pub k: f64,
    pub cuts: Vec<f64>,
    /// `sup_μ λ_max` of `G` against `½K²(μP + Q/μ)`; at most 1 for an exact certificate.
    pub separation: f64,
    pub validation_points: usize,
    pub max_violation: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OHOutcome {
    Feasible(OHCertificate),
    /// Already at the imposed weights the smallest admissible constant exceeds `K`.
    Infeasible { cuts: Vec<f64>, lower_bound: f64 },
    Inconclusive { best: Option<OHCertificate>, cuts: Vec<f64> },
}

impl OHOutcome {
    pub fn certificate(&self) -> Option<&OHCertificate> {
        match self {
            OHOutcome::Feasible(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OHOptions {
    pub initial_cuts: Vec<f64>,
    pub max_cuts: usize,
    pub seed: u64,
    pub validation_points: usize,
}

impl Default for OHOptions {
    fn default() -> Self {
        OHOptions { initial_cuts: vec![1.0], max_cuts: 50, seed: 0, validation_points: 10_000 }
    }
}

/// `(sup_μ ‖M_μ^{+1/2} G^{1/2}‖², argmax μ)` with `M_μ = ½K²(μP(f) + Q(f)/μ)`.
pub fn oh_separation(u: &OHMap, f: &ComplexMatrix, k: f64) -> (f64, f64) {
    let p = gram_p(&u.domain, f);
    let q = gram_q(&u.domain, f);
    let root = HermitianMatrix::symmetrize(u.gram()).map_spectrum(|v| v.max(0.0).sqrt());
    let h = |log_mu: f64| {
        let mu = log_mu.exp2();
        let m = (&p * real(mu) + &q * real(1.0 / mu)) * real(0.5 * k * k);
        sandwich_constant(&m, &root, &identity(root.nrows())).powi(2)
    };
    let mut best = (f64::NEG_INFINITY, 0.0);
    let mut s = -30.0;
    while s <= 30.0 {
        let v = h(s);
        if v > best.0 {
            best = (v, s);
        }
        s += 0.5;
    }
    if best.0.is_finite() {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut lo, mut hi) = (best.1 - 0.5, best.1 + 0.5);
        let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        let (mut h1, mut h2) = (h(x1), h(x2));
        for _ in 0..40 {
            if h1 > h2 {
                hi = x2;
                x2 = x1;
                h2 = h1;
                x1 = hi - g * (hi - lo);
                h1 = h(x1);
            } else {
                lo = x1;
                x1 = x2;
                h1 = h2;
                x2 = lo + g * (hi - lo);
                h2 = h(x2);
            }
        }
        for (v, x) in [(h1, x1), (h2, x2)] {
            if v > best.0 {
                best = (v, x);
            }
        }
    }
    (best.0, best.1.exp2())
}

/// Largest `‖u(x)‖² − K²(f(xx*) f(x*x))^{1/2}` over random `x` of unit norm in `E`.
pub fn oh_violation(u: &OHMap, f: &ComplexMatrix, k: f64, points: usize, seed: u64) -> f64 {
    let (p, q, g) = (gram_p(&u.domain, f), gram_q(&u.domain, f), u.gram());
    let quad = |m: &ComplexMatrix, a: &DVector<C64>| (a.adjoint() * m * a)[(0, 0)].re.max(0.0);
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..points {
        let a = gaussian_vector(&mut r, u.domain.dim());
        let a = &a / real(op_norm_unchecked(&u.domain.element(a.as_slice())));
        worst = worst.max(quad(&g, &a) - k * k * (quad(&p, &a) * quad(&q, &a)).sqrt());
    }
    worst
}

/// Cutting-plane search for a state certifying the inequality at constant `k`.
pub fn find_oh_state(u: &OHMap, k: f64, opts: &OHOptions) -> Result<OHOutcome> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidInput(format!("K must be positive and finite, got {k}")));
    }
    if opts.initial_cuts.is_empty() || opts.initial_cuts.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidInput("initial cut weights must be a nonempty list of positive numbers".into()));
    }
    let n = u.domain.ambient_dim();
    let finish = |f: ComplexMatrix, cuts: Vec<f64>, separation: f64| {
        let max_violation = oh_violation(u, &f, k, opts.validation_points, opts.seed).max(0.0);
        OHCertificate { f, k, cuts, separation, validation_points: opts.validation_points, max_violation }
    };
    let g = u.gram();
    let scale = op_norm_unchecked(&g);
    if scale == 0.0 {
        return Ok(OHOutcome::Feasible(finish(maximally_mixed(n), Vec::new(), 0.0)));
    }
    let gn = &g * real(1.0 / scale);
    // Trace of F = K² f in normalized units.
    let k2 = k * k / scale;
    let coords = HermitianCoords::new(n);
    let basis = coords.basis();
    let p_img: Vec<ComplexMatrix> = basis.iter().map(|e| gram_p(&u.domain, e)).collect();
    let q_img: Vec<ComplexMatrix> = basis.iter().map(|e| gram_q(&u.domain, e)).collect();
    let (p_id, q_id) = (gram_p(&u.domain, &identity(n)), gram_q(&u.domain, &identity(n)));

    let mut cuts = opts.initial_cuts.clone();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut best = None;
    loop {
        let mut prog = LmiProgram::new(coords.len());
        for kk in coords.diagonal() {
            prog.objective[kk] = 1.0;
        }
        let mut c0: f64 = 0.0;
        for &mu in &cuts {
            let mut blk = LmiBlock::new(-&gn);
            for (var, (pm, qm)) in p_img.iter().zip(&q_img).enumerate() {
                blk.push(var, (pm * real(mu) + qm * real(1.0 / mu)) * real(0.5));
            }
            prog.add_block(blk);
            let m = (&p_id * real(mu) + &q_id * real(1.0 / mu)) * real(0.5);
            let lmin = HermitianMatrix::symmetrize(m).min_eigenvalue().max(1e-300);
            c0 = c0.max(2.0 / lmin);
        }
        let mut psd = LmiBlock::new(ComplexMatrix::zeros(n, n));
        for (var, e) in basis.iter().enumerate() {
            psd.push(var, e.clone());
        }
        prog.add_block(psd);
        let x0 = coords.decompose(&(identity(n) * real(c0)));
        let opts_b = BarrierOptions { stop_below: Some(0.64 * k2), gap_rel: 1e-8, ..Default::default() };
        let sol = prog.solve(&x0, &opts_b)?;
        if !sol.stopped_below && sol.lower_bound() > k2 {
            return Ok(OHOutcome::Infeasible { cuts, lower_bound: (sol.lower_bound() * scale).sqrt() });
        }
        // Boundary cases (K equal to the optimum) are accepted to relative accuracy 1e−6.
        if sol.objective > k2 * (1.0 + 1e-6) {
            return Ok(OHOutcome::Inconclusive { best, cuts });
        }
        let f = pad_state(&coords.compose(&sol.x), sol.objective.max(k2));
        let (sep, mu) = oh_separation(u, &f, k);
        if sep <= 1.0 + 1e-6 {
            return Ok(OHOutcome::Feasible(finish(f, cuts, sep)));
        }
        best = Some(OHCertificate { f, k, cuts: cuts.clone(), separation: sep, validation_points: 0, max_violation: f64::NAN });
        let duplicate = cuts.iter().any(|c| (c / mu).ln().abs() < 1e-9);
        if cuts.len() >= opts.max_cuts || duplicate {
            return Ok(OHOutcome::Inconclusive { best, cuts });
        }
        cuts.push(mu);
    }
}

/// Certified upper bound on the cb norm of `u`: `(2·bound)^{1/2}` where `bound`
/// is the decomposition bound of the associated form.
pub fn oh_cb_upper_bound(u: &OHMap) -> Result<f64> {
    let v = u.associated_form();
    if v.is_zero() {
        return Ok(0.0);
    }
    let scale = op_norm_unchecked(&v.coeffs);
    let dec = decompose_form(&v, 4.0 * scale + 1.0)?;
    Ok((2.0 * dec.bound).sqrt())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConverseReport {
    /// Certified bound on the cb norm of `u`.
    pub bound: f64,
    /// Square root of the jcb lower estimate for the associated form.
    pub jcb_root: f64,
    pub consistent: bool,
    pub revalidated_violation: f64,
}

/// Re-validates `cert` and cross-checks its constant against a jcb estimate.
pub fn oh_converse_bound(u: &OHMap, cert: &OHCertificate, jcb: &JcbOptions) -> Result<ConverseReport> {
    let viol = oh_violation(u, &cert.f, cert.k, 10_000, jcb.seed ^ 0x5eed).max(0.0);
    if viol > 1e-5 {
        return Err(Error::Precondition(format!("certificate fails on re-test by {viol:.3e}")));
    }
    let v = u.associated_form();
    let est = jcb_norm_estimate(&v, jcb);
    let jcb_root = est.value.sqrt();
    Ok(ConverseReport { bound: cert.k, jcb_root, consistent: jcb_root <= cert.k + 1e-5, revalidated_violation: viol })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpSplit {
    /// `t^{−2} ≤ λ_i/λ_j ≤ t²`
    pub s1: Vec<(usize, usize)>,
    /// `λ_i/λ_j > t²`
    pub s2: Vec<(usize, usize)>,
    /// `λ_i/λ_j < t^{−2}`
    pub s3: Vec<(usize, usize)>,
}

pub fn interp_split(lambda: &[f64], t: f64) -> Result<InterpSplit> {
    if !(t >= 2.0) {
        return Err(Error::InvalidInput(format!("t must be at least 2, got {t}")));
    }
    if lambda.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidInput("eigenvalues must be positive".into()));
    }
    let mut out = InterpSplit { s1: Vec::new(), s2: Vec::new(), s3: Vec::new() };
    let t2 = t * t;
    for (i, li) in lambda.iter().enumerate() {
        for (j, lj) in lambda.iter().enumerate() {
            let r = li / lj;
            if r > t2 {
                out.s2.push((i, j));
            } else if r < 1.0 / t2 {
                out.s3.push((i, j));
            } else {
                out.s1.push((i, j));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterpReport {
    pub t: f64,
    pub sizes: [usize; 3],
    /// `‖u₂(x)‖²` and its bound `K² t^{−1} f(xx*)`.
    pub u2_sq: f64,
    pub tail2_bound: f64,
    /// `‖u₃(x)‖²` and its bound `K² t^{−1} f(x*x)`.
    pub u3_sq: f64,
    pub tail3_bound: f64,
    pub tails_hold: bool,
    pub u1_sq: f64,
    /// `tr(f^{1/2} x f^{1/2} x*)`.
    pub head: f64,
    /// `‖u₁(x)‖² / (K² log t · head)`.
    pub head_ratio: f64,
}

/// Splits `x` along the eigenbasis of `f` and evaluates the tail and head quantities.
pub fn interp_bound_report(u: &OHMap, f: &ComplexMatrix, k: f64, x: &ComplexMatrix, t: f64) -> Result<InterpReport> {
    if !u.domain.is_full() {
        return Err(Error::Precondition("splitting along matrix units needs the full matrix algebra as domain".into()));
    }
    let n = u.domain.ambient_dim();
    let (lam, w) = HermitianMatrix::new(f.clone())?.eigh();
    let split = interp_split(&lam, t)?;
    let xp = w.adjoint() * x * &w;
    let piece = |set: &[(usize, usize)]| {
        let mut m = ComplexMatrix::zeros(n, n);
        for &(i, j) in set {
            m[(i, j)] = xp[(i, j)];
        }
        &w * m * w.adjoint()
    };
    let norm_sq = |m: &ComplexMatrix| u.apply(m).map(|v| v.norm_squared());
    let (u1, u2, u3) = (norm_sq(&piece(&split.s1))?, norm_sq(&piece(&split.s2))?, norm_sq(&piece(&split.s3))?);
    let fxx = (f * x * x.adjoint()).trace().re;
    let fxsx = (f * x.adjoint() * x).trace().re;
    let k2 = k * k;
    let tail2_bound = k2 / t * fxx;
    let tail3_bound = k2 / t * fxsx;
    let mut head = 0.0;
    for i in 0..n {
        for j in 0..n {
            head += (lam[i].max(0.0) * lam[j].max(0.0)).sqrt() * xp[(i, j)].norm_sqr();
        }
    }
    let tol = |b: f64| b * (1.0 + 1e-10) + 1e-300;
    Ok(InterpReport {
        t,
        sizes: [split.s1.len(), split.s2.len(), split.s3.len()],
        u2_sq: u2,
        tail2_bound,
        u3_sq: u3,
        tail3_bound,
        tails_hold: u2 <= tol(tail2_bound) && u3 <= tol(tail3_bound),
        u1_sq: u1,
        head,
        head_ratio: if u1 == 0.0 { 0.0 } else { u1 / (k2 * t.ln() * head) },
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogBoundReport {
    pub n: usize,
    /// `Σ ‖u(x_i)‖²`.
    pub lhs: f64,
    /// `‖Σ x_i ⊗ x̄_i‖`.
    pub min_norm: f64,
    /// `lhs / (K² (log n + 1) min_norm)`.
    pub ratio: f64,
    /// `‖x_i‖² ≤ min_norm` for every `i`, `‖Σ x_i x_i*‖`, `‖Σ x_i* x_i‖ ≤ n · min_norm`.
    pub elementary_steps_hold: bool,
    pub row_sum: f64,
    pub col_sum: f64,
}

pub fn log_bound_experiment(u: &OHMap, xs: &[ComplexMatrix], k: f64) -> Result<LogBoundReport> {
    if xs.is_empty() {
        return Err(Error::InvalidInput("need at least one element".into()));
    }
    let n = xs.len();
    let dim = xs[0].nrows();
    let mut lhs = 0.0;
    let mut t = ComplexMatrix::zeros(dim * dim, dim * dim);
    let mut rows = ComplexMatrix::zeros(dim, dim);
    let mut cols = ComplexMatrix::zeros(dim, dim);
    for x in xs {
        lhs += u.apply(x)?.norm_squared();
        t += kron(x, &x.map(|z| z.conj()));
        rows += x * x.adjoint();
        cols += x.adjoint() * x;
    }
    let min_norm = op_norm_unchecked(&t);
    let (row_sum, col_sum) = (op_norm_unchecked(&rows), op_norm_unchecked(&cols));
    let slack = |v: f64| v * (1.0 + 1e-12);
    let singles = xs.iter().all(|x| op_norm_unchecked(x).powi(2) <= slack(min_norm));
    let nf = n as f64;
    let steps = singles && row_sum <= slack(nf * min_norm) && col_sum <= slack(nf * min_norm);
    let denom = k * k * ((nf).ln() + 1.0) * min_norm;
    Ok(LogBoundReport {
        n,
        lhs,
        min_norm,
        ratio: if lhs == 0.0 { 0.0 } else { lhs / denom },
        elementary_steps_hold: steps,
        row_sum,
        col_sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, matrix_unit};
    use crate::random::{contraction, density_matrix, gaussian_matrix};

    fn corner_functional() -> OHMap {
        let mut act = ComplexMatrix::zeros(1, 4);
        act[(0, 0)] = c(1.0, 0.0);
        OHMap::new(OperatorSpace::full(2), act).unwrap()
    }

    #[test]
    fn corner_functional_at_constant_one() {
        let u = corner_functional();
        let out = find_oh_state(&u, 1.0, &OHOptions { validation_points: 2000, ..Default::default() }).unwrap();
        let cert = out.certificate().expect("feasible");
        assert!(cert.max_violation <= 1e-6, "{}", cert.max_violation);
        let conv = oh_converse_bound(&u, cert, &JcbOptions { amp: Some(2), restarts: 4, seed: 1, ..Default::default() }).unwrap();
        assert!(conv.consistent, "{}", conv.jcb_root);
    }

    #[test]
    fn zero_map_and_scaling() {
        let z = OHMap::new(OperatorSpace::full(2), ComplexMatrix::zeros(2, 4)).unwrap();
        let out = find_oh_state(&z, 1e-3, &OHOptions { validation_points: 10, ..Default::default() }).unwrap();
        assert_eq!(out.certificate().unwrap().f, maximally_mixed(2));
        assert_eq!(oh_cb_upper_bound(&z).unwrap(), 0.0);
        let u = corner_functional();
        let a = oh_cb_upper_bound(&u).unwrap();
        let b = oh_cb_upper_bound(&u.scaled(c(0.0, 3.0))).unwrap();
        assert!((b - 3.0 * a).abs() < 1e-5 * b);
    }

    #[test]
    fn small_constant_is_infeasible() {
        let u = corner_functional();
        let out = find_oh_state(&u, 0.3, &OHOptions { validation_points: 10, ..Default::default() }).unwrap();
        assert!(matches!(out, OHOutcome::Infeasible { .. }));
    }

    #[test]
    fn random_map_at_oh_constant() {
        let mut r = rng(12);
        let u = OHMap::new(OperatorSpace::full(2), gaussian_matrix(&mut r, 3, 4)).unwrap();
        let k = 2f64.powf(2.25) * oh_cb_upper_bound(&u).unwrap();
        let out = find_oh_state(&u, k, &OHOptions { validation_points: 2000, ..Default::default() }).unwrap();
        assert!(out.certificate().expect("feasible").max_violation <= 1e-9);
    }

    #[test]
    fn split_examples() {
        let s = interp_split(&[0.5, 0.5], 3.0).unwrap();
        assert_eq!(s.s1.len(), 4);
        let eps = 0.01;
        let s = interp_split(&[1.0 - eps, eps], 2.0).unwrap();
        assert_eq!(s.s2, vec![(0, 1)]);
        assert_eq!(s.s3, vec![(1, 0)]);
        assert_eq!(interp_split(&[1.0 - eps, eps], 1e6).unwrap().s1.len(), 4);
        assert!(interp_split(&[1.0], 1.5).is_err());
    }

    #[test]
    fn tails_on_embedding() {
        let mut r = rng(13);
        for _ in 0..10 {
            let f = density_matrix(&mut r, 3);
            let base = OHMap::hilbert_schmidt_embedding(&f).unwrap();
            let u = OHMap::new(base.domain.clone(), contraction(&mut r, 9) * &base.action).unwrap();
            let x = gaussian_matrix(&mut r, 3, 3);
            let rep = interp_bound_report(&u, &f, 1.0, &x, 2.0).unwrap();
            assert!(rep.tails_hold);
            assert_eq!(rep.sizes.iter().sum::<usize>(), 9);
        }
        let f = maximally_mixed(2);
        let u = OHMap::hilbert_schmidt_embedding(&f).unwrap();
        let x = gaussian_matrix(&mut r, 2, 2);
        let rep = interp_bound_report(&u, &f, 1.0, &x, 4.0).unwrap();
        assert!((rep.head - x.norm_squared() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn log_bound_examples() {
        let mut r = rng(14);
        let u = OHMap::new(OperatorSpace::full(2), gaussian_matrix(&mut r, 2, 4)).unwrap();
        let x = gaussian_matrix(&mut r, 2, 2);
        let one = log_bound_experiment(&u, &[x.clone()], 1.0).unwrap();
        assert!((one.min_norm - op_norm_unchecked(&x).powi(2)).abs() < 1e-10);
        let diag: Vec<_> = (0..2).map(|i| matrix_unit(2, 2, i, i)).collect();
        let rep = log_bound_experiment(&u, &diag, 1.0).unwrap();
        assert!((rep.min_norm - 1.0).abs() < 1e-12);
        let xs: Vec<_> = (0..4).map(|_| gaussian_matrix(&mut r, 2, 2)).collect();
        assert!(log_bound_experiment(&u, &xs, 1.0).unwrap().elementary_steps_hold);
    }
}
