//! Randomized checks of the Grothendieck-type inequalities for a form `U`
//! against a jcb estimate. Each inequality is reported through its worst
//! ratio `|Σ U(a_i, b_i)| / right-hand side` over the sampled sequences.

use serde::{Deserialize, Serialize};

use super::BilinearForm;
use crate::error::Result;
use crate::linalg::ComplexMatrix;
use crate::opspace::{col_quantity, row_quantity, weighted_quantity, Side};
use crate::random::{gaussian_vector, log_uniform, rng, usize_in};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GtReport {
    pub trials: usize,
    pub jcb_estimate: f64,
    /// Product of the exactness bounds of the two domains.
    pub c: f64,
    pub worst_ratio_weighted: f64,
    pub worst_ratio_unweighted: f64,
    pub worst_ratio_mixed: f64,
    /// Largest gap between the weighted bound at the constant weight
    /// `λ = ‖Σ b b*‖^{1/2} / ‖Σ b* b‖^{1/2}` and the unweighted bound.
    pub constant_weight_gap: f64,
    /// Ratios above `1 + 1e-6`.
    pub counterexamples: usize,
}

/// Right-hand sides for one sequence.
pub struct Bounds {
    pub lhs: f64,
    pub weighted: f64,
    pub unweighted: f64,
    pub mixed: f64,
}

/// Evaluates both sides of the three inequalities for one sequence. `c_jcb`
/// is `C·‖U‖_jcb`.
pub fn bounds(u: &BilinearForm, a: &[ComplexMatrix], b: &[ComplexMatrix], lambda: &[f64], c_jcb: f64) -> Result<Bounds> {
    let mut s = crate::linalg::ZERO;
    for (ai, bi) in a.iter().zip(b) {
        s += u.evaluate(ai, bi)?;
    }
    let inv: Vec<f64> = lambda.iter().map(|l| 1.0 / l).collect();
    let a_bracket = weighted_quantity(a, lambda, Side::Col)? + weighted_quantity(a, &inv, Side::Row)?;
    let b_bracket = weighted_quantity(b, lambda, Side::Col)? + weighted_quantity(b, &inv, Side::Row)?;
    let (ra, ca) = (row_quantity(a)?, col_quantity(a)?);
    let (rb, cb) = (row_quantity(b)?, col_quantity(b)?);
    let k = 2f64.powf(1.5) * c_jcb;
    Ok(Bounds {
        lhs: s.norm(),
        weighted: c_jcb * a_bracket * b_bracket,
        unweighted: 2.0 * c_jcb * (ra * cb + ca * rb),
        mixed: k * (ra * cb + weighted_quantity(a, lambda, Side::Col)? * weighted_quantity(b, &inv, Side::Row)?),
    })
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

pub fn verify_gt_inequalities(u: &BilinearForm, jcb_est: f64, trials: usize, seed: u64) -> Result<GtReport> {
    let c = u.domain_left.exactness_bound() * u.domain_right.exactness_bound();
    let c_jcb = c * jcb_est;
    let mut r = rng(seed);
    let (mut w1, mut w2, mut w3, mut gap) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut bad = 0;
    for _ in 0..trials {
        let len = usize_in(&mut r, 1, 4);
        let a: Vec<_> = (0..len).map(|_| u.domain_left.element(gaussian_vector(&mut r, u.domain_left.dim()).as_slice())).collect();
        let b: Vec<_> = (0..len).map(|_| u.domain_right.element(gaussian_vector(&mut r, u.domain_right.dim()).as_slice())).collect();
        let lambda: Vec<f64> = (0..len).map(|_| log_uniform(&mut r, 0.125, 8.0)).collect();
        let bd = bounds(u, &a, &b, &lambda, c_jcb)?;
        let (r1, r2, r3) = (ratio(bd.lhs, bd.weighted), ratio(bd.lhs, bd.unweighted), ratio(bd.lhs, bd.mixed));
        for v in [r1, r2, r3] {
            if v > 1.0 + 1e-6 {
                bad += 1;
            }
        }
        w1 = w1.max(r1);
        w2 = w2.max(r2);
        w3 = w3.max(r3);

        let (rb, cb) = (row_quantity(&b)?, col_quantity(&b)?);
        if rb > 0.0 && cb > 0.0 {
            let lam = vec![rb / cb; len];
            let at_const = bounds(u, &a, &b, &lam, c_jcb)?;
            let scale = bd.unweighted.max(f64::MIN_POSITIVE);
            gap = gap.max((at_const.weighted - bd.unweighted).abs() / scale);
        }
    }
    Ok(GtReport {
        trials,
        jcb_estimate: jcb_est,
        c,
        worst_ratio_weighted: w1,
        worst_ratio_unweighted: w2,
        worst_ratio_mixed: w3,
        constant_weight_gap: gap,
        counterexamples: bad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gtforms::{jcb_norm_estimate, JcbOptions};
    use crate::random::gaussian_matrix;

    #[test]
    fn single_pair_trace_form() {
        let u = BilinearForm::trace_form(2);
        let mut r = rng(4);
        let a = gaussian_matrix(&mut r, 2, 2);
        let b = gaussian_matrix(&mut r, 2, 2);
        let bd = bounds(&u, &[a], &[b], &[1.0], 2.0).unwrap();
        assert!(bd.lhs <= bd.unweighted);
    }

    #[test]
    fn zero_form_has_zero_ratios() {
        let u = BilinearForm::trace_form(2).zero_like();
        let rep = verify_gt_inequalities(&u, 1.0, 20, 1).unwrap();
        assert_eq!(rep.worst_ratio_weighted, 0.0);
        assert_eq!(rep.worst_ratio_unweighted, 0.0);
        assert_eq!(rep.worst_ratio_mixed, 0.0);
    }

    #[test]
    fn constant_weight_recovers_unweighted_bound() {
        let mut r = rng(8);
        let u = BilinearForm::random_full(&mut r, 2);
        let est = jcb_norm_estimate(&u, &JcbOptions { restarts: 8, seed: 1, ..Default::default() });
        let rep = verify_gt_inequalities(&u, est.value, 50, 2).unwrap();
        assert!(rep.constant_weight_gap < 1e-9, "{}", rep.constant_weight_gap);
        assert_eq!(rep.counterexamples, 0);
    }
}
