//! Independent oracles shared by the integration tests. Nothing here calls the
//! solvers under test.
#![allow(dead_code)]

use osgt::opspace::TensorRep;
use osgt::{ComplexMatrix, C64};

/// Largest eigenvalue of a 2×2 Hermitian matrix, in closed form.
fn lambda_max_2x2(h: &ComplexMatrix) -> f64 {
    let (p, q, r) = (h[(0, 0)].re, h[(1, 1)].re, h[(0, 1)]);
    0.5 * (p + q) + (0.25 * (p - q) * (p - q) + r.norm_sqr()).sqrt()
}

fn gram(ms: &[ComplexMatrix], rows: bool) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(2, 2);
    for m in ms {
        acc += if rows { m * m.adjoint() } else { m.adjoint() * m };
    }
    acc
}

/// `‖Σ a_i a_i*‖^{1/2}·‖Σ b_i* b_i‖^{1/2}` after the change of representation
/// `a ↦ γa`, `b ↦ γ^{-T}b` with `γ = [[1, z], [0, s]]`.
fn cost(w: &TensorRep, z: C64, s: f64) -> f64 {
    let (a, b) = (&w.left, &w.right);
    let a2 = [&a[0] + &a[1] * z, &a[1] * C64::new(s, 0.0)];
    let b2 = [b[0].clone(), (&b[1] - &b[0] * z) * C64::new(1.0 / s, 0.0)];
    (lambda_max_2x2(&gram(&a2, true)) * lambda_max_2x2(&gram(&b2, false))).max(0.0).sqrt()
}

fn op_norm_2x2(m: &ComplexMatrix) -> f64 {
    lambda_max_2x2(&(m * m.adjoint())).max(0.0).sqrt()
}

/// `Some(c)` when `y = c·x` up to rounding.
fn proportional(x: &ComplexMatrix, y: &ComplexMatrix) -> Option<C64> {
    let xx = x.norm_squared();
    if xx == 0.0 {
        return None;
    }
    let c = x.iter().zip(y.iter()).map(|(p, q)| p.conj() * q).sum::<C64>() / xx;
    ((y - x * c).norm() <= 1e-12 * y.norm().max(x.norm())).then_some(c)
}

/// Haagerup norm of a two-term tensor of 2×2 matrices by grid search over
/// upper-triangular changes of representation followed by compass search.
/// Left unitaries and scalars leave the cost unchanged, so this family covers
/// every representation of length two.
pub fn haagerup_grid_oracle(w: &TensorRep) -> f64 {
    assert_eq!(w.len(), 2, "oracle handles two-term tensors");
    assert!(w.left.iter().chain(&w.right).all(|m| m.shape() == (2, 2)));
    // A dependent side makes the tensor elementary, where the norm is the
    // product of operator norms; the infimum over representations is then not attained.
    let (a, b) = (&w.left, &w.right);
    if let Some(c) = proportional(&a[0], &a[1]) {
        return op_norm_2x2(&a[0]) * op_norm_2x2(&(&b[0] + &b[1] * c));
    }
    if let Some(c) = proportional(&b[0], &b[1]) {
        return op_norm_2x2(&(&a[0] + &a[1] * c)) * op_norm_2x2(&b[0]);
    }
    let eval = |p: &[f64; 3]| cost(w, C64::new(p[0], p[1]), p[2].exp());
    let mut starts: Vec<(f64, [f64; 3])> = Vec::new();
    for i in -8..=8 {
        for j in -8..=8 {
            for k in -8..=8 {
                let p = [0.5 * i as f64, 0.5 * j as f64, 0.5 * k as f64];
                starts.push((eval(&p), p));
            }
        }
    }
    starts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut best = f64::INFINITY;
    for &(mut v, mut p) in starts.iter().take(6) {
        let mut step = 0.25;
        let mut moves = 0;
        while step > 1e-12 && moves < 20_000 {
            let mut moved = false;
            for d in 0..3 {
                for sign in [1.0, -1.0] {
                    let mut q = p;
                    q[d] += sign * step;
                    if q.iter().any(|x| x.abs() > 40.0) {
                        continue;
                    }
                    let vq = eval(&q);
                    moves += 1;
                    if vq < v * (1.0 - 1e-15) {
                        (v, p, moved) = (vq, q, true);
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        best = best.min(v);
    }
    best
}

/// `max Σ |φ_{iσ(i)}|` over injective assignments of the shorter side, by enumeration.
pub fn assignment_oracle(modulus: &[Vec<f64>]) -> f64 {
    let (r, c) = (modulus.len(), modulus[0].len());
    if r > c {
        let t: Vec<Vec<f64>> = (0..c).map(|j| (0..r).map(|i| modulus[i][j]).collect()).collect();
        return assignment_oracle(&t);
    }
    fn go(m: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
        if row == m.len() {
            return 0.0;
        }
        let mut best = f64::NEG_INFINITY;
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                best = best.max(m[row][j] + go(m, row + 1, used));
                used[j] = false;
            }
        }
        best
    }
    go(modulus, 0, &mut vec![false; c])
}
