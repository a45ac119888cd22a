//! Truncated full Fock space over `ℓ₂` with orthonormal basis `e_1..e_m, e'_1..e'_m`,
//! creation operators and generalized circular elements
//!
//! ```text
//! c_i(λ) = λ^{1/2} ℓ_i + λ^{−1/2} ℓ'_i*,    d_i(λ) = λ^{1/2} r'_i + λ^{−1/2} r_i*.
//! ```
//!
//! Words of length at most `D` index the basis in length-lexicographic order,
//! so the words of degree `≤ k` form a prefix of the coordinates. Creation on
//! a word of degree `D` gives 0; every truncated operator is the compression
//! `P X P` of its infinite-dimensional counterpart.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gtforms::BilinearForm;
use crate::linalg::{op_norm_unchecked, real, ComplexMatrix, C64, ONE, ZERO};
use crate::opspace::{weighted_quantity, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Letter {
    /// `e_i`
    E(usize),
    /// `e'_i`
    EPrime(usize),
}

#[derive(Debug, Clone)]
pub struct FockSpace {
    m: usize,
    cutoff: usize,
    words: Vec<Vec<u16>>,
    index: HashMap<Vec<u16>, usize>,
    /// `degree_end[k]`: number of words of length `≤ k`.
    degree_end: Vec<usize>,
}

impl FockSpace {
    pub fn new(m: usize, cutoff: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("need at least one letter".into()));
        }
        let dim: f64 = (0..=cutoff).map(|k| ((2 * m) as f64).powi(k as i32)).sum();
        if dim > 2e6 {
            return Err(Error::InvalidInput(format!("Fock space of dimension {dim} is too large")));
        }
        let mut words: Vec<Vec<u16>> = vec![Vec::new()];
        let mut degree_end = vec![1];
        let mut start = 0;
        for _ in 0..cutoff {
            let end = words.len();
            for w in start..end {
                for l in 0..2 * m as u16 {
                    let mut nw = words[w].clone();
                    nw.push(l);
                    words.push(nw);
                }
            }
            start = end;
            degree_end.push(words.len());
        }
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Ok(FockSpace { m, cutoff, words, index, degree_end })
    }

    pub fn letters(&self) -> usize {
        self.m
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.words.len()
    }

    /// Coordinate of `Ω`.
    pub fn vacuum(&self) -> usize {
        0
    }

    /// Number of basis words of degree at most `k`.
    pub fn degree_prefix(&self, k: usize) -> usize {
        self.degree_end[k.min(self.cutoff)]
    }

    fn code(&self, l: Letter) -> Result<u16> {
        match l {
            Letter::E(i) if i < self.m => Ok(i as u16),
            Letter::EPrime(i) if i < self.m => Ok((self.m + i) as u16),
            _ => Err(Error::InvalidInput(format!("letter {l:?} outside an alphabet with m = {}", self.m))),
        }
    }

    pub fn word_index(&self, word: &[Letter]) -> Result<usize> {
        let codes = word.iter().map(|l| self.code(*l)).collect::<Result<Vec<_>>>()?;
        self.index
            .get(&codes)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("word of length {} exceeds the cutoff {}", word.len(), self.cutoff)))
    }

    pub fn basis_vector(&self, word: &[Letter]) -> Result<DVector<C64>> {
        let mut v = DVector::zeros(self.dim());
        v[self.word_index(word)?] = ONE;
        Ok(v)
    }

    fn creation(&self, letter: Letter, left: bool) -> Result<FockOperator> {
        let code = self.code(letter)?;
        let mut cols = vec![Vec::new(); self.dim()];
        for (j, w) in self.words.iter().enumerate() {
            if w.len() < self.cutoff {
                let mut nw = Vec::with_capacity(w.len() + 1);
                if left {
                    nw.push(code);
                    nw.extend_from_slice(w);
                } else {
                    nw.extend_from_slice(w);
                    nw.push(code);
                }
                cols[j].push((self.index[&nw], ONE));
            }
        }
        let tag = if left { OpTag::LeftCreation(letter) } else { OpTag::RightCreation(letter) };
        Ok(FockOperator { tag, op: SparseOp { dim: self.dim(), cols } })
    }

    /// `ℓ(h)`: `w ↦ h ⊗ w`.
    pub fn left_creation(&self, letter: Letter) -> Result<FockOperator> {
        self.creation(letter, true)
    }

    /// `r(h)`: `w ↦ w ⊗ h`.
    pub fn right_creation(&self, letter: Letter) -> Result<FockOperator> {
        self.creation(letter, false)
    }

    fn check_lambda(lambda: f64) -> Result<()> {
        if lambda > 0.0 && lambda.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("λ must be positive, got {lambda}")))
        }
    }

    /// `c_i(λ)`.
    pub fn circular(&self, i: usize, lambda: f64) -> Result<FockOperator> {
        Self::check_lambda(lambda)?;
        let l = self.left_creation(Letter::E(i))?.op;
        let lp = self.left_creation(Letter::EPrime(i))?.op;
        let op = l.scaled(real(lambda.sqrt())).add(&lp.adjoint().scaled(real(1.0 / lambda.sqrt())));
        Ok(FockOperator { tag: OpTag::Circular { i, lambda }, op })
    }

    /// `d_i(λ)`.
    pub fn dual_circular(&self, i: usize, lambda: f64) -> Result<FockOperator> {
        Self::check_lambda(lambda)?;
        let rp = self.right_creation(Letter::EPrime(i))?.op;
        let r = self.right_creation(Letter::E(i))?.op;
        let op = rp.scaled(real(lambda.sqrt())).add(&r.adjoint().scaled(real(1.0 / lambda.sqrt())));
        Ok(FockOperator { tag: OpTag::DualCircular { i, lambda }, op })
    }

    fn families(&self, lambdas: &[f64]) -> Result<(Vec<SparseOp>, Vec<SparseOp>)> {
        if lambdas.len() > self.m {
            return Err(Error::InvalidInput(format!("{} weights for {} letters", lambdas.len(), self.m)));
        }
        let xs = lambdas.iter().enumerate().map(|(i, &l)| self.circular(i, l).map(|o| o.op)).collect::<Result<Vec<_>>>()?;
        let ys = lambdas.iter().enumerate().map(|(i, &l)| self.dual_circular(i, l).map(|o| o.op)).collect::<Result<Vec<_>>>()?;
        Ok((xs, ys))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpTag {
    LeftCreation(Letter),
    RightCreation(Letter),
    Circular { i: usize, lambda: f64 },
    DualCircular { i: usize, lambda: f64 },
    Derived,
}

/// Square sparse matrix stored by columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    dim: usize,
    cols: Vec<Vec<(usize, C64)>>,
}

impl SparseOp {
    fn from_maps(dim: usize, maps: Vec<BTreeMap<usize, C64>>) -> Self {
        let cols = maps.into_iter().map(|m| m.into_iter().filter(|(_, v)| *v != ZERO).collect()).collect();
        SparseOp { dim, cols }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn scaled(&self, c: C64) -> Self {
        let cols = self.cols.iter().map(|col| col.iter().map(|(r, v)| (*r, v * c)).collect()).collect();
        SparseOp { dim: self.dim, cols }
    }

    pub fn add(&self, other: &SparseOp) -> Self {
        let maps = (0..self.dim)
            .map(|j| {
                let mut m = BTreeMap::new();
                for (r, v) in self.cols[j].iter().chain(&other.cols[j]) {
                    *m.entry(*r).or_insert(ZERO) += v;
                }
                m
            })
            .collect();
        Self::from_maps(self.dim, maps)
    }

    pub fn sub(&self, other: &SparseOp) -> Self {
        self.add(&other.scaled(-ONE))
    }

    pub fn adjoint(&self) -> Self {
        let mut maps = vec![BTreeMap::new(); self.dim];
        for (j, col) in self.cols.iter().enumerate() {
            for (r, v) in col {
                maps[*r].insert(j, v.conj());
            }
        }
        Self::from_maps(self.dim, maps)
    }

    /// `self · other`.
    pub fn mul(&self, other: &SparseOp) -> Self {
        let maps = other
            .cols
            .iter()
            .map(|col| {
                let mut m = BTreeMap::new();
                for (k, b) in col {
                    for (i, a) in &self.cols[*k] {
                        *m.entry(*i).or_insert(ZERO) += a * b;
                    }
                }
                m
            })
            .collect();
        Self::from_maps(self.dim, maps)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.dim];
        for (j, col) in self.cols.iter().enumerate() {
            if v[j] != ZERO {
                for (i, a) in col {
                    out[*i] += a * v[j];
                }
            }
        }
        out
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.cols[j].iter().find(|(r, _)| *r == i).map_or(ZERO, |(_, v)| *v)
    }

    /// Dense copy of the first `ncols` columns.
    pub fn dense_columns(&self, ncols: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim, ncols);
        for (j, col) in self.cols.iter().take(ncols).enumerate() {
            for (i, v) in col {
                m[(*i, j)] = *v;
            }
        }
        m
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        self.dense_columns(self.dim)
    }
}

#[derive(Debug, Clone)]
pub struct FockOperator {
    pub tag: OpTag,
    pub op: SparseOp,
}

/// Largest of `‖[x_i, y_j] P‖` and `‖[x_i*, y_j] P‖` with `P` the projection onto
/// words of degree `≤ D − 2` (or the identity, estimated from below, when
/// `restricted` is false).
fn commutation_residual(fs: &FockSpace, lambdas: &[f64], restricted: bool) -> Result<f64> {
    if fs.cutoff < 2 {
        return Err(Error::Precondition("double commutation needs cutoff D ≥ 2".into()));
    }
    let (xs, ys) = fs.families(lambdas)?;
    let ncols = fs.degree_prefix(fs.cutoff - 2);
    let mut worst = 0.0f64;
    for x in &xs {
        let xa = x.adjoint();
        for y in &ys {
            for a in [x, &xa] {
                let comm = a.mul(y).sub(&y.mul(a));
                if restricted {
                    let m = comm.dense_columns(ncols);
                    if m.iter().any(|z| *z != ZERO) {
                        worst = worst.max(op_norm_unchecked(&m));
                    }
                } else if comm.nnz() > 0 {
                    let ca = comm.adjoint();
                    worst = worst.max(power_norm(|v| comm.apply(v), |v| ca.apply(v), generic_start(fs.dim()), 100));
                }
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CommutationReport {
    /// Restricted to degree `≤ D − 2`.
    pub residual: f64,
    /// On the whole truncated space: the boundary defect.
    pub unrestricted: f64,
}

pub fn check_double_commutation(fs: &FockSpace, lambdas: &[f64]) -> Result<CommutationReport> {
    Ok(CommutationReport {
        residual: commutation_residual(fs, lambdas, true)?,
        unrestricted: commutation_residual(fs, lambdas, false)?,
    })
}

/// `⟨x_i y_j Ω, Ω⟩`.
pub fn vacuum_pairing(fs: &FockSpace, i: usize, j: usize, lambdas: &[f64]) -> Result<C64> {
    if fs.cutoff < 2 {
        return Err(Error::Precondition("vacuum pairing needs cutoff D ≥ 2".into()));
    }
    let lam = |k: usize| {
        lambdas.get(k).copied().ok_or_else(|| Error::InvalidInput(format!("no weight for index {k}")))
    };
    let x = fs.circular(i, lam(i)?)?;
    let y = fs.dual_circular(j, lam(j)?)?;
    let mut omega = vec![ZERO; fs.dim()];
    omega[fs.vacuum()] = ONE;
    Ok(x.op.apply(&y.op.apply(&omega))[fs.vacuum()])
}

/// `Σ a_i ⊗ x_i` acting on `ℂ^n ⊗ 𝓕`.
struct KronSum<'a> {
    a: &'a [ComplexMatrix],
    x: &'a [SparseOp],
}

impl KronSum<'_> {
    fn apply(&self, v: &[C64], adjoint: bool) -> Vec<C64> {
        let n = self.a[0].nrows();
        let dim = self.x[0].dim();
        let mut out = vec![ZERO; n * dim];
        for (a, x) in self.a.iter().zip(self.x) {
            let (am, xm) = if adjoint { (a.adjoint(), x.adjoint()) } else { (a.clone(), x.clone()) };
            for q in 0..n {
                let xv = xm.apply(&v[q * dim..(q + 1) * dim]);
                for p in 0..n {
                    let c = am[(p, q)];
                    if c != ZERO {
                        for (o, val) in out[p * dim..(p + 1) * dim].iter_mut().zip(&xv) {
                            *o += c * val;
                        }
                    }
                }
            }
        }
        out
    }
}

fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Power-iteration estimate of `‖T‖` from below; `start` must be nonzero.
fn power_norm(apply: impl Fn(&[C64]) -> Vec<C64>, apply_adj: impl Fn(&[C64]) -> Vec<C64>, start: Vec<C64>, iters: usize) -> f64 {
    let mut v = start;
    let mut best = 0.0f64;
    for _ in 0..iters {
        let nv = norm2(&v);
        if nv == 0.0 {
            break;
        }
        v.iter_mut().for_each(|z| *z /= nv);
        let w = apply(&v);
        let est = norm2(&w);
        let done = est <= best * (1.0 + 1e-13);
        best = best.max(est);
        if done {
            break;
        }
        v = apply_adj(&w);
    }
    best
}

fn generic_start(len: usize) -> Vec<C64> {
    (0..len).map(|i| C64::new(1.0 + 0.5 * (i as f64 * 0.7).sin(), 0.25 * (i as f64 * 1.3).cos())).collect()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SumBound {
    /// Power-iteration lower estimate of `‖Σ a_i ⊗ x_i‖` on the truncated space.
    pub lhs: f64,
    /// `‖Σ λ_i a_i* a_i‖^{1/2} + ‖Σ λ_i^{−1} a_i a_i*‖^{1/2}`.
    pub rhs: f64,
}

impl SumBound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + 1e-9
    }
}

/// Both sides of the norm bound for `Σ a_i ⊗ c_i(λ_i)` (`Side::Row` selects
/// `x_i = c_i`) or `Σ a_i ⊗ d_i(λ_i)` (`Side::Col` selects `y_i = d_i`).
pub fn circular_sum_bound(fs: &FockSpace, a: &[ComplexMatrix], lambdas: &[f64], side: Side) -> Result<SumBound> {
    if a.is_empty() || a.len() != lambdas.len() {
        return Err(Error::Dimension(format!("{} matrices with {} weights", a.len(), lambdas.len())));
    }
    let (xs, ys) = fs.families(lambdas)?;
    let ops = if side == Side::Row { xs } else { ys };
    let inv: Vec<f64> = lambdas.iter().map(|l| 1.0 / l).collect();
    let rhs = weighted_quantity(a, lambdas, Side::Col)? + weighted_quantity(a, &inv, Side::Row)?;
    let k = KronSum { a, x: &ops };
    let len = a[0].nrows() * fs.dim();
    let lhs = power_norm(|v| k.apply(v, false), |v| k.apply(v, true), generic_start(len), 300);
    Ok(SumBound { lhs, rhs })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainReport {
    /// `Σ U(a_i, b_i)`.
    pub direct: C64,
    /// `Σ_{ij} U(a_i, b_j) ⟨x_i y_j Ω, Ω⟩`.
    pub vacuum: C64,
    pub pairing_residual: f64,
    /// Lower estimate of `‖Σ_{ij} U(a_i, b_j) x_i y_j‖`.
    pub middle_norm: f64,
    /// `|vacuum| / middle_norm` (at most 1).
    pub ratio_middle: f64,
    pub left_norm: f64,
    pub left_bound: f64,
    pub right_norm: f64,
    pub right_bound: f64,
    /// `C·jcb·left_bound·right_bound`.
    pub final_bound: f64,
    /// `|direct| / final_bound` (at most 1).
    pub ratio_final: f64,
}

/// Evaluates each link of the chain from `|Σ U(a_i, b_i)|` to the weighted bound.
pub fn verify_circular_chain(u: &BilinearForm, a: &[ComplexMatrix], b: &[ComplexMatrix], lambdas: &[f64], fs: &FockSpace, jcb_est: f64) -> Result<ChainReport> {
    let n = a.len();
    if n == 0 || b.len() != n || lambdas.len() != n {
        return Err(Error::Dimension(format!("{} left, {} right, {} weights", n, b.len(), lambdas.len())));
    }
    if fs.cutoff < 2 {
        return Err(Error::Precondition("chain needs cutoff D ≥ 2".into()));
    }
    let (xs, ys) = fs.families(lambdas)?;
    let mut direct = ZERO;
    let mut vacuum = ZERO;
    let mut middle: Option<SparseOp> = None;
    for i in 0..n {
        for j in 0..n {
            let uij = u.evaluate(&a[i], &b[j])?;
            if i == j {
                direct += uij;
            }
            vacuum += uij * vacuum_pairing(fs, i, j, lambdas)?;
            let term = xs[i].mul(&ys[j]).scaled(uij);
            middle = Some(match middle {
                Some(m) => m.add(&term),
                None => term,
            });
        }
    }
    let middle = middle.expect("nonempty family");
    let mut omega = vec![ZERO; fs.dim()];
    omega[fs.vacuum()] = ONE;
    let madj = middle.adjoint();
    // Starting at Ω guarantees the estimate dominates |⟨TΩ, Ω⟩|.
    let middle_norm = power_norm(|v| middle.apply(v), |v| madj.apply(v), omega, 300);
    let left = circular_sum_bound(fs, a, lambdas, Side::Row)?;
    let right = circular_sum_bound(fs, b, lambdas, Side::Col)?;
    let c = u.domain_left.exactness_bound() * u.domain_right.exactness_bound();
    let final_bound = c * jcb_est * left.rhs * right.rhs;
    let ratio = |x: f64, y: f64| if x == 0.0 { 0.0 } else { x / y };
    Ok(ChainReport {
        direct,
        vacuum,
        pairing_residual: (direct - vacuum).norm(),
        middle_norm,
        ratio_middle: ratio(vacuum.norm(), middle_norm),
        left_norm: left.lhs,
        left_bound: left.rhs,
        right_norm: right.lhs,
        right_bound: right.rhs,
        final_bound,
        ratio_final: ratio(direct.norm(), final_bound),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{matrix_unit, HermitianMatrix};
    use crate::random::{gaussian_matrix, rng};

    #[test]
    fn dimensions_and_vacuum() {
        let fs = FockSpace::new(3, 4).unwrap();
        assert_eq!(fs.dim(), 1 + 6 + 36 + 216 + 1296);
        assert_eq!(fs.word_index(&[]).unwrap(), fs.vacuum());
        assert_eq!(fs.degree_prefix(1), 7);
    }

    #[test]
    fn creation_examples() {
        let fs = FockSpace::new(2, 3).unwrap();
        let l1 = fs.left_creation(Letter::E(0)).unwrap();
        let omega = fs.basis_vector(&[]).unwrap();
        let out = DVector::from_vec(l1.op.apply(omega.as_slice()));
        assert_eq!(out, fs.basis_vector(&[Letter::E(0)]).unwrap());
        let r = fs.right_creation(Letter::EPrime(1)).unwrap();
        let w = fs.basis_vector(&[Letter::E(0)]).unwrap();
        let out = DVector::from_vec(r.op.apply(w.as_slice()));
        assert_eq!(out, fs.basis_vector(&[Letter::E(0), Letter::EPrime(1)]).unwrap());
        let top = fs.basis_vector(&[Letter::E(0); 3]).unwrap();
        assert!(l1.op.apply(top.as_slice()).iter().all(|z| *z == ZERO));
        assert!(fs.left_creation(Letter::E(2)).is_err());
    }

    #[test]
    fn creation_is_isometric_below_cutoff() {
        let fs = FockSpace::new(2, 3).unwrap();
        let l = fs.left_creation(Letter::EPrime(0)).unwrap().op;
        let p = l.adjoint().mul(&l).dense_columns(fs.degree_prefix(2));
        for j in 0..p.ncols() {
            for i in 0..p.nrows() {
                let want = if i == j { ONE } else { ZERO };
                assert_eq!(p[(i, j)], want);
            }
        }
        let mut sum = ComplexMatrix::zeros(fs.dim(), fs.dim());
        for i in 0..2 {
            let li = fs.left_creation(Letter::E(i)).unwrap().op;
            sum += li.mul(&li.adjoint()).to_dense();
        }
        let h = HermitianMatrix::symmetrize(ComplexMatrix::identity(fs.dim(), fs.dim()) - sum);
        assert!(h.min_eigenvalue() >= -1e-12);
    }

    #[test]
    fn dual_circular_on_vacuum() {
        let fs = FockSpace::new(2, 2).unwrap();
        let d = fs.dual_circular(1, 4.0).unwrap();
        let out = DVector::from_vec(d.op.apply(fs.basis_vector(&[]).unwrap().as_slice()));
        let want = fs.basis_vector(&[Letter::EPrime(1)]).unwrap() * real(2.0);
        assert_eq!(out, want);
        assert!(fs.circular(0, 0.0).is_err());
        let c = fs.circular(0, 4.0).unwrap();
        assert!(op_norm_unchecked(&c.op.to_dense()) <= 2.0 + 0.5 + 1e-12);
    }

    #[test]
    fn double_commutation() {
        let fs = FockSpace::new(1, 3).unwrap();
        let r = check_double_commutation(&fs, &[1.0]).unwrap();
        assert!(r.residual <= 1e-12);
        assert!(r.unrestricted > 0.1);
        let fs = FockSpace::new(2, 3).unwrap();
        assert!(check_double_commutation(&fs, &[0.5, 3.0]).unwrap().residual <= 1e-12);
        assert!(check_double_commutation(&FockSpace::new(1, 1).unwrap(), &[1.0]).is_err());
    }

    #[test]
    fn vacuum_pairing_is_kronecker_delta() {
        let fs = FockSpace::new(2, 2).unwrap();
        for lam in [0.25, 1.0, 4.0] {
            let l = [lam, 1.0 / lam];
            assert!((vacuum_pairing(&fs, 0, 0, &l).unwrap() - ONE).norm() <= 1e-14);
            assert!((vacuum_pairing(&fs, 1, 1, &l).unwrap() - ONE).norm() <= 1e-14);
            assert_eq!(vacuum_pairing(&fs, 0, 1, &l).unwrap(), ZERO);
        }
    }

    #[test]
    fn sum_bound_examples() {
        let fs = FockSpace::new(2, 4).unwrap();
        let mut r = rng(1);
        let a = gaussian_matrix(&mut r, 2, 2);
        let one = circular_sum_bound(&fs, &[a.clone()], &[1.0], Side::Row).unwrap();
        assert!((one.rhs - 2.0 * op_norm_unchecked(&a)).abs() < 1e-12);
        assert!(one.holds());
        let units = [matrix_unit(2, 2, 0, 0), matrix_unit(2, 2, 1, 0)];
        let b = circular_sum_bound(&fs, &units, &[1.0, 1.0], Side::Col).unwrap();
        assert!((b.rhs - (1.0 + 2f64.sqrt())).abs() < 1e-12);
        assert!(b.holds());
    }

    #[test]
    fn chain_on_trace_form() {
        let u = BilinearForm::trace_form(2);
        let mut r = rng(2);
        let a: Vec<_> = (0..2).map(|_| gaussian_matrix(&mut r, 2, 2)).collect();
        let b: Vec<_> = (0..2).map(|_| gaussian_matrix(&mut r, 2, 2)).collect();
        let fs = FockSpace::new(2, 3).unwrap();
        let rep = verify_circular_chain(&u, &a, &b, &[1.0, 1.0], &fs, 2.0).unwrap();
        assert!(rep.pairing_residual <= 1e-10);
        assert!(rep.ratio_middle <= 1.0 + 1e-12);
        assert!(rep.ratio_final <= 1.0);
        let z = verify_circular_chain(&u.zero_like(), &a, &b, &[1.0, 1.0], &fs, 2.0).unwrap();
        assert_eq!(z.direct, ZERO);
        assert_eq!(z.ratio_final, 0.0);
    }
}
