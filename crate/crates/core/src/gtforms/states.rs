//! States `f₁, f₂` (on the ambient algebra of `E`) and `g₁, g₂` (on that of `F`) with
//!
//! ```text
//! |U(a, b)| ≤ K [ (f₁(aa*) g₁(b*b))^{1/2} + (f₂(a*a) g₂(bb*))^{1/2} ].
//! ```
//!
//! Since `inf_ρ (A + ρB)(C + D/ρ) = ((AC)^{1/2} + (BD)^{1/2})²`, the condition is
//! equivalent to the family of LMIs, one per `ρ > 0`,
//!
//! ```text
//! [[R(F₁) + ρ S(F₂), U], [U*, T(G₁) + V(G₂)/ρ]] ⪰ 0
//! ```
//!
//! with `F_i = K f_i`, `G_i = K g_i`. The cutting-plane loop imposes the LMI at a
//! finite set of weights, minimizes the largest trace, and adds the weight
//! where the candidate states are violated most.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::cbnorm::{start_multiple, two_by_two, HermVar};
use super::{gram_a_star_a, gram_aa, gram_b_star_b, gram_bb, maximally_mixed, pad_state, sandwich_constant, BilinearForm};
use crate::error::{Error, Result};
use crate::linalg::{identity, op_norm_unchecked, real, ComplexMatrix, C64};
use crate::lmi::{BarrierOptions, LmiProgram};
use crate::random::{gaussian_vector, rng};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatesOptions {
    /// Weights `ρ` imposed before the first separation round.
    pub initial_cuts: Vec<f64>,
    /// Largest number of weights in the cut set.
    pub max_cuts: usize,
    pub seed: u64,
    /// Random unit pairs used to re-validate the returned states.
    pub validation_pairs: usize,
}

impl Default for StatesOptions {
    fn default() -> Self {
        StatesOptions { initial_cuts: vec![1.0], max_cuts: 50, seed: 0, validation_pairs: 10_000 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateQuadruple {
    #[serde(with = "crate::linalg::matrix_serde")]
    pub f1: ComplexMatrix,
    #[serde(with = "crate::linalg::matrix_serde")]
    pub f2: ComplexMatrix,
    #[serde(with = "crate::linalg::matrix_serde")]
    pub g1: ComplexMatrix,
    #[serde(with = "crate::linalg::matrix_serde")]
    pub g2: ComplexMatrix,
    pub k: f64,
    /// Weights imposed in the final inner problem.
    pub cuts: Vec<f64>,
    /// `sup_ρ` of the normalized LMI violation; at most 1 when the states are exact.
    pub separation: f64,
    pub validation_pairs: usize,
    /// Largest positive excess `|U(a,b)| − K[…]` over the validation pairs.
    pub max_violation: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StatesOutcome {
    Feasible(StateQuadruple),
    /// The inner problem at `cuts` already needs a constant above `K`.
    Infeasible { cuts: Vec<f64>, lower_bound: f64 },
    /// Cut budget exhausted; the best candidate is returned unvalidated.
    Inconclusive { best: Option<StateQuadruple>, cuts: Vec<f64> },
}

impl StatesOutcome {
    pub fn states(&self) -> Option<&StateQuadruple> {
        match self {
            StatesOutcome::Feasible(q) => Some(q),
            _ => None,
        }
    }
}

struct Grams<'a> {
    u: &'a BilinearForm,
}

impl Grams<'_> {
    fn p(&self, f1: &ComplexMatrix, f2: &ComplexMatrix, rho: f64) -> ComplexMatrix {
        gram_aa(&self.u.domain_left, f1) + gram_a_star_a(&self.u.domain_left, f2) * real(rho)
    }

    fn q(&self, g1: &ComplexMatrix, g2: &ComplexMatrix, rho: f64) -> ComplexMatrix {
        gram_b_star_b(&self.u.domain_right, g1) + gram_bb(&self.u.domain_right, g2) * real(1.0 / rho)
    }
}

/// `sup_ρ ‖P_ρ^{+1/2} U Q_ρ^{+1/2}‖` for the LMI family at `K·states`, with the maximizing `ρ`.
/// Values at most 1 mean the states satisfy the inequality exactly.
pub fn separation_ratio(u: &BilinearForm, f1: &ComplexMatrix, f2: &ComplexMatrix, g1: &ComplexMatrix, g2: &ComplexMatrix, k: f64) -> (f64, f64) {
    let gr = Grams { u };
    let h = |log_rho: f64| {
        let rho = log_rho.exp2();
        sandwich_constant(&(gr.p(f1, f2, rho) * real(k)), &u.coeffs, &(gr.q(g1, g2, rho) * real(k)))
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
        // Golden-section refinement around the best grid point.
        let (mut lo, mut hi) = (best.1 - 0.5, best.1 + 0.5);
        let g = 0.5 * (5f64.sqrt() - 1.0);
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

fn quad(m: &ComplexMatrix, x: &DVector<C64>) -> f64 {
    (x.adjoint() * m * x)[(0, 0)].re.max(0.0)
}

/// Largest excess of `|U(a,b)|` over `K[…]` on `pairs` random pairs from the unit balls.
pub fn state_violation(u: &BilinearForm, q: &StateQuadruple, pairs: usize, seed: u64) -> f64 {
    let (e, f) = (&u.domain_left, &u.domain_right);
    let (r1, s2) = (gram_aa(e, &q.f1), gram_a_star_a(e, &q.f2));
    let (t1, v2) = (gram_b_star_b(f, &q.g1), gram_bb(f, &q.g2));
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let alpha = gaussian_vector(&mut r, e.dim());
        let beta = gaussian_vector(&mut r, f.dim());
        let na = op_norm_unchecked(&e.element(alpha.as_slice()));
        let nb = op_norm_unchecked(&f.element(beta.as_slice()));
        let alpha = alpha / real(na);
        let beta = beta / real(nb);
        let lhs = u.evaluate_coords(&alpha, &beta).norm();
        let x = alpha.map(|z| z.conj());
        let rhs = q.k * ((quad(&r1, &x) * quad(&t1, &beta)).sqrt() + (quad(&s2, &x) * quad(&v2, &beta)).sqrt());
        worst = worst.max(lhs - rhs);
    }
    worst
}

struct Solved {
    f1: ComplexMatrix,
    f2: ComplexMatrix,
    g1: ComplexMatrix,
    g2: ComplexMatrix,
    objective: f64,
    lower_bound: f64,
}

/// Minimizes the largest trace subject to the LMIs at `cuts` (for the normalized form `un`).
fn inner(u: &BilinearForm, un: &ComplexMatrix, cuts: &[f64], stop_below: f64) -> Result<Solved> {
    let (e, f) = (&u.domain_left, &u.domain_right);
    let (na, nb) = (e.ambient_dim(), f.ambient_dim());
    let (d1, d2) = (e.dim(), f.dim());
    let f1 = HermVar::new(0, na);
    let f2 = HermVar::new(f1.end(), na);
    let g1 = HermVar::new(f2.end(), nb);
    let g2 = HermVar::new(g1.end(), nb);
    let tau = g2.end();
    let mut prog = LmiProgram::new(tau + 1);
    prog.objective[tau] = 1.0;

    let r_img = f1.images(|m| gram_aa(e, m));
    let s_img = f2.images(|m| gram_a_star_a(e, m));
    let t_img = g1.images(|m| gram_b_star_b(f, m));
    let v_img = g2.images(|m| gram_bb(f, m));
    let gr = Grams { u };
    let (ia, ib) = (identity(na), identity(nb));
    let mut c0: f64 = 0.0;
    for &rho in cuts {
        let top: Vec<_> = r_img.iter().cloned().chain(s_img.iter().map(|(k, m)| (*k, m * real(rho)))).collect();
        let bottom: Vec<_> = t_img.iter().cloned().chain(v_img.iter().map(|(k, m)| (*k, m * real(1.0 / rho)))).collect();
        prog.add_block(two_by_two(d1, d2, &top, &bottom, un, &[]));
        c0 = c0.max(start_multiple(&gr.p(&ia, &ia, rho), un, &gr.q(&ib, &ib, rho)));
    }
    for v in [&f1, &f2, &g1, &g2] {
        prog.add_block(v.psd_block());
        prog.add_block(v.trace_bound_block(tau));
    }
    let mut x0 = vec![0.0; tau + 1];
    f1.set(&mut x0, &(&ia * real(c0)));
    f2.set(&mut x0, &(&ia * real(c0)));
    g1.set(&mut x0, &(&ib * real(c0)));
    g2.set(&mut x0, &(&ib * real(c0)));
    x0[tau] = 2.0 * c0 * na.max(nb) as f64 + 1.0;

    let opts = BarrierOptions { stop_below: Some(stop_below), gap_rel: 1e-8, ..Default::default() };
    let sol = prog.solve(&x0, &opts)?;
    Ok(Solved {
        f1: f1.get(&sol.x),
        f2: f2.get(&sol.x),
        g1: g1.get(&sol.x),
        g2: g2.get(&sol.x),
        objective: sol.objective,
        lower_bound: if sol.stopped_below { f64::NEG_INFINITY } else { sol.lower_bound() },
    })
}

/// Cutting-plane search for states certifying the inequality at constant `k`.
pub fn find_states(u: &BilinearForm, k: f64, opts: &StatesOptions) -> Result<StatesOutcome> {
    u.validate()?;
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidInput(format!("K must be positive and finite, got {k}")));
    }
    if opts.initial_cuts.is_empty() || opts.initial_cuts.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidInput("initial cut weights must be a nonempty list of positive numbers".into()));
    }
    let (na, nb) = (u.domain_left.ambient_dim(), u.domain_right.ambient_dim());
    let finish = |f1, f2, g1, g2, cuts: Vec<f64>, separation| {
        let mut q = StateQuadruple { f1, f2, g1, g2, k, cuts, separation, validation_pairs: opts.validation_pairs, max_violation: 0.0 };
        q.max_violation = state_violation(u, &q, opts.validation_pairs, opts.seed).max(0.0);
        q
    };
    if u.is_zero() {
        let q = finish(maximally_mixed(na), maximally_mixed(na), maximally_mixed(nb), maximally_mixed(nb), Vec::new(), 0.0);
        return Ok(StatesOutcome::Feasible(q));
    }

    let scale = op_norm_unchecked(&u.coeffs);
    let un = &u.coeffs * real(1.0 / scale);
    let kn = k / scale;
    let mut cuts: Vec<f64> = opts.initial_cuts.clone();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut best = None;
    loop {
        let s = inner(u, &un, &cuts, 0.8 * kn)?;
        if s.lower_bound > kn {
            return Ok(StatesOutcome::Infeasible { cuts, lower_bound: s.lower_bound * scale });
        }
        if s.objective > kn {
            // Optimum within the duality gap of K: no states at this constant with a margin.
            return Ok(StatesOutcome::Inconclusive { best, cuts });
        }
        let (f1, f2) = (pad_state(&s.f1, kn), pad_state(&s.f2, kn));
        let (g1, g2) = (pad_state(&s.g1, kn), pad_state(&s.g2, kn));
        let (sep, rho) = separation_ratio(u, &f1, &f2, &g1, &g2, k);
        if sep <= 1.0 + 1e-9 {
            return Ok(StatesOutcome::Feasible(finish(f1, f2, g1, g2, cuts, sep)));
        }
        let q = StateQuadruple {
            f1,
            f2,
            g1,
            g2,
            k,
            cuts: cuts.clone(),
            separation: sep,
            validation_pairs: 0,
            max_violation: f64::NAN,
        };
        best = Some(q);
        let duplicate = cuts.iter().any(|c| (c / rho).ln().abs() < 1e-9);
        if cuts.len() >= opts.max_cuts || duplicate {
            return Ok(StatesOutcome::Inconclusive { best, cuts });
        }
        cuts.push(rho);
    }
}
