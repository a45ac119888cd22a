mod common;

use osgt::haagerup::{haagerup_norm, haagerup_norm_by_descent, HaagerupOptions};
use osgt::opspace::TensorRep;
use osgt::random::{complex_normal, gaussian_matrix, rng};
use osgt::schur::{bounded_split_optimal, rank_one_dominator, SchurMatrix};

#[test]
fn split_lp_matches_brute_force_assignment() {
    let mut r = rng(11);
    for (rows, cols) in [(1, 1), (2, 2), (3, 3), (4, 4), (5, 5), (2, 5), (5, 3), (6, 6)] {
        for _ in 0..5 {
            let phi = SchurMatrix::new(gaussian_matrix(&mut r, rows, cols)).unwrap();
            let m: Vec<Vec<f64>> = (0..rows).map(|i| (0..cols).map(|j| phi.entries[(i, j)].norm()).collect()).collect();
            let want = common::assignment_oracle(&m);
            let got = bounded_split_optimal(&phi).unwrap().cost;
            assert!((got - want).abs() <= 1e-9 * want, "{rows}x{cols}: {got} vs {want}");
        }
    }
}

#[test]
fn identity_multiplier_constants() {
    for k in 1..=6 {
        let phi = SchurMatrix::from_real(k, k, |i, j| if i == j { 1.0 } else { 0.0 });
        assert!((bounded_split_optimal(&phi).unwrap().cost - k as f64).abs() < 1e-12);
        assert!((rank_one_dominator(&phi, 2000, 1e-11).unwrap().c - k as f64).abs() < 1e-8);
    }
}

#[test]
fn haagerup_matches_grid_oracle() {
    let mut r = rng(3);
    let opts = HaagerupOptions::default();
    for k in 0..12 {
        let mut left: Vec<_> = (0..2).map(|_| gaussian_matrix(&mut r, 2, 2)).collect();
        let right: Vec<_> = (0..2).map(|_| gaussian_matrix(&mut r, 2, 2)).collect();
        if k % 3 == 0 {
            left[1] = &left[0] * complex_normal(&mut r);
        }
        let w = TensorRep::new(left, right).unwrap();
        let want = common::haagerup_grid_oracle(&w);
        let got = haagerup_norm(&w, &opts).unwrap().value;
        let descent = haagerup_norm_by_descent(&w, 6, 0).unwrap();
        assert!((got - want).abs() <= 1e-5 * want, "program {got} vs grid {want}");
        assert!((descent - want).abs() <= 1e-5 * want, "descent {descent} vs grid {want}");
    }
}
