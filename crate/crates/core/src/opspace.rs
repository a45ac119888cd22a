//! Operator spaces as based subspaces of `M_N`, minimal tensor norms and the
//! row/column quantities `‖Σ m_i m_i*‖^{1/2}`, `‖Σ m_i* m_i‖^{1/2}`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    kron, matrix_unit, op_norm_unchecked, real, tol, vec_row_major, ComplexMatrix, HermitianMatrix, MatrixJson, C64,
    ZERO,
};

/// A subspace `E ⊆ M_N` with a fixed linearly independent basis.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "OperatorSpaceJson", into = "OperatorSpaceJson")]
pub struct OperatorSpace {
    ambient_dim: usize,
    basis: Vec<ComplexMatrix>,
    exactness_bound: f64,
    /// Pseudo-inverse of the matrix whose columns are the vectorized basis.
    coord_map: ComplexMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorSpaceJson {
    pub ambient_dim: usize,
    pub basis: Vec<MatrixJson>,
    #[serde(default = "one")]
    pub exactness_bound: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<OperatorSpaceJson> for OperatorSpace {
    type Error = Error;
    fn try_from(j: OperatorSpaceJson) -> Result<Self> {
        let basis = j.basis.into_iter().map(ComplexMatrix::try_from).collect::<Result<Vec<_>>>()?;
        let space = OperatorSpace::with_exactness(basis, j.exactness_bound)?;
        if space.ambient_dim != j.ambient_dim {
            return Err(Error::Dimension(format!(
                "ambient_dim {} does not match basis matrices of size {}",
                j.ambient_dim, space.ambient_dim
            )));
        }
        Ok(space)
    }
}

impl From<OperatorSpace> for OperatorSpaceJson {
    fn from(s: OperatorSpace) -> Self {
        OperatorSpaceJson {
            ambient_dim: s.ambient_dim,
            basis: s.basis.iter().map(MatrixJson::from).collect(),
            exactness_bound: s.exactness_bound,
        }
    }
}

impl PartialEq for OperatorSpace {
    fn eq(&self, other: &Self) -> bool {
        self.ambient_dim == other.ambient_dim && self.basis == other.basis && self.exactness_bound == other.exactness_bound
    }
}

impl OperatorSpace {
    pub fn new(basis: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_exactness(basis, 1.0)
    }

    pub fn with_exactness(basis: Vec<ComplexMatrix>, exactness_bound: f64) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::InvalidInput("operator space needs at least one basis element".into()));
        }
        if !(exactness_bound >= 1.0) || !exactness_bound.is_finite() {
            return Err(Error::InvalidInput(format!("exactness bound must be a finite number ≥ 1, got {exactness_bound}")));
        }
        let n = basis[0].nrows();
        for (k, b) in basis.iter().enumerate() {
            if b.nrows() != n || b.ncols() != n || n == 0 {
                return Err(Error::Dimension(format!(
                    "basis element {k} is {}x{}, expected {n}x{n}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        let d = basis.len();
        let stack = ComplexMatrix::from_fn(n * n, d, |r, k| basis[k][(r / n, r % n)]);
        // Normalized Gram matrix D^{-1/2} G D^{-1/2}.
        let gram = stack.adjoint() * &stack;
        let scale: Vec<f64> = (0..d).map(|k| gram[(k, k)].re.sqrt()).collect();
        if scale.iter().any(|&s| s == 0.0) {
            return Err(Error::DependentBasis(0.0));
        }
        let normalized = ComplexMatrix::from_fn(d, d, |i, j| gram[(i, j)] / real(scale[i] * scale[j]));
        let min_eig = HermitianMatrix::symmetrize(normalized).min_eigenvalue();
        if min_eig < tol::BASIS {
            return Err(Error::DependentBasis(min_eig));
        }
        let coord_map = stack.pseudo_inverse(0.0).map_err(|e| Error::Solver(e.to_string()))?;
        Ok(OperatorSpace { ambient_dim: n, basis, exactness_bound, coord_map })
    }

    /// `M_n` with the matrix units in row-major order: basis index `i·n + j` is `e_{ij}`.
    pub fn full(n: usize) -> Self {
        let basis = (0..n * n).map(|k| matrix_unit(n, n, k / n, k % n)).collect();
        Self::new(basis).expect("matrix units are independent")
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn exactness_bound(&self) -> f64 {
        self.exactness_bound
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim * self.ambient_dim
    }

    /// Basis of entrywise conjugates: a realization of the conjugate space.
    pub fn conjugate(&self) -> Self {
        let basis = self.basis.iter().map(|b| b.map(|z| z.conj())).collect();
        Self::with_exactness(basis, self.exactness_bound).expect("conjugation preserves independence")
    }

    /// `Σ c_k a_k`.
    pub fn element(&self, coeffs: &[C64]) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.ambient_dim, self.ambient_dim);
        for (b, c) in self.basis.iter().zip(coeffs) {
            if *c != ZERO {
                m += b * *c;
            }
        }
        m
    }

    /// Coordinates of `x` in the basis; errors if `x` is not in the span.
    pub fn coordinates(&self, x: &ComplexMatrix) -> Result<DVector<C64>> {
        if x.nrows() != self.ambient_dim || x.ncols() != self.ambient_dim {
            return Err(Error::Dimension(format!(
                "element is {}x{}, ambient is {}",
                x.nrows(),
                x.ncols(),
                self.ambient_dim
            )));
        }
        let v = vec_row_major(x);
        let alpha = &self.coord_map * &v;
        let back = vec_row_major(&self.element(alpha.as_slice()));
        let resid = (back - &v).norm();
        let scale = v.norm().max(f64::MIN_POSITIVE);
        if resid > tol::BASIS * scale && resid > 1e-14 {
            return Err(Error::OutsideSpan(resid / scale));
        }
        Ok(alpha)
    }

    /// Matrices `D_k` with `tr(x D_k)` the `k`-th coordinate of `x ∈ E`
    /// (extended to `M_N` through the orthogonal projection).
    pub fn dual_basis(&self) -> Vec<ComplexMatrix> {
        let n = self.ambient_dim;
        (0..self.dim())
            .map(|k| ComplexMatrix::from_fn(n, n, |q, p| self.coord_map[(k, p * n + q)]))
            .collect()
    }

    /// Coordinates of `Σ a_k ⊗ x_k ∈ E ⊗ M_n` given as an `Nn × Nn` matrix;
    /// returns the orthogonal projection's coefficients `x_k`.
    pub fn amplified_coordinates(&self, big: &ComplexMatrix, n: usize) -> Vec<ComplexMatrix> {
        let nn = self.ambient_dim;
        let d = self.dim();
        let mut out = vec![ComplexMatrix::zeros(n, n); d];
        for p in 0..nn {
            for q in 0..nn {
                let block = big.view((p * n, q * n), (n, n));
                let r = p * nn + q;
                for (k, xk) in out.iter_mut().enumerate() {
                    let w = self.coord_map[(k, r)];
                    if w != ZERO {
                        *xk += block * w;
                    }
                }
            }
        }
        out
    }
}

/// An element `Σ a_i ⊗ b_i` of a tensor product, with optional positive weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorRep {
    #[serde(with = "crate::linalg::matrix_vec_serde")]
    pub left: Vec<ComplexMatrix>,
    #[serde(with = "crate::linalg::matrix_vec_serde")]
    pub right: Vec<ComplexMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl TensorRep {
    pub fn new(left: Vec<ComplexMatrix>, right: Vec<ComplexMatrix>) -> Result<Self> {
        let t = TensorRep { left, right, weights: None };
        t.validate()?;
        Ok(t)
    }

    pub fn with_weights(left: Vec<ComplexMatrix>, right: Vec<ComplexMatrix>, weights: Vec<f64>) -> Result<Self> {
        let t = TensorRep { left, right, weights: Some(weights) };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.left.is_empty() {
            return Err(Error::InvalidInput("tensor needs at least one pair".into()));
        }
        if self.left.len() != self.right.len() {
            return Err(Error::Dimension(format!(
                "{} left factors but {} right factors",
                self.left.len(),
                self.right.len()
            )));
        }
        same_shape(&self.left)?;
        same_shape(&self.right)?;
        if let Some(w) = &self.weights {
            if w.len() != self.left.len() {
                return Err(Error::Dimension(format!("{} weights for {} pairs", w.len(), self.left.len())));
            }
            if let Some(bad) = w.iter().find(|&&x| !(x > 0.0) || !x.is_finite()) {
                return Err(Error::InvalidInput(format!("weights must be positive, got {bad}")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    /// `ᵗw = Σ b_i ⊗ a_i`.
    pub fn flipped(&self) -> Self {
        TensorRep { left: self.right.clone(), right: self.left.clone(), weights: self.weights.clone() }
    }

    pub fn scaled(&self, c: C64) -> Self {
        TensorRep { left: self.left.iter().map(|a| a * c).collect(), right: self.right.clone(), weights: self.weights.clone() }
    }

    /// `Σ a_i ⊗ b_i` as a Kronecker sum.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let mut acc = kron(&self.left[0], &self.right[0]);
        for (a, b) in self.left.iter().zip(&self.right).skip(1) {
            acc += kron(a, b);
        }
        acc
    }

    /// Coefficient matrix `Σ vec(a_i) vec(b_i)ᵀ` against matrix units (row-major).
    pub fn coefficient_matrix(&self) -> ComplexMatrix {
        let va: Vec<_> = self.left.iter().map(vec_row_major).collect();
        let vb: Vec<_> = self.right.iter().map(vec_row_major).collect();
        let mut w = ComplexMatrix::zeros(va[0].len(), vb[0].len());
        for (a, b) in va.iter().zip(&vb) {
            w += a * b.transpose();
        }
        w
    }
}

fn same_shape(ms: &[ComplexMatrix]) -> Result<()> {
    if let Some(first) = ms.first() {
        for (k, m) in ms.iter().enumerate() {
            if m.shape() != first.shape() {
                return Err(Error::Dimension(format!(
                    "matrix {k} is {}x{}, expected {}x{}",
                    m.nrows(),
                    m.ncols(),
                    first.nrows(),
                    first.ncols()
                )));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Row,
    Col,
}

pub fn min_norm(t: &TensorRep) -> Result<f64> {
    t.validate()?;
    Ok(op_norm_unchecked(&t.to_matrix()))
}

fn gram_sum(ms: &[ComplexMatrix], weights: Option<&[f64]>, side: Side) -> Result<ComplexMatrix> {
    if ms.is_empty() {
        return Err(Error::InvalidInput("empty family".into()));
    }
    same_shape(ms)?;
    let dim = match side {
        Side::Row => ms[0].nrows(),
        Side::Col => ms[0].ncols(),
    };
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for (i, m) in ms.iter().enumerate() {
        let w = weights.map_or(1.0, |w| w[i]);
        let g = match side {
            Side::Row => m * m.adjoint(),
            Side::Col => m.adjoint() * m,
        };
        acc += g * real(w);
    }
    Ok(acc)
}

/// `‖Σ m_i m_i*‖^{1/2}`.
pub fn row_quantity(ms: &[ComplexMatrix]) -> Result<f64> {
    Ok(op_norm_unchecked(&gram_sum(ms, None, Side::Row)?).sqrt())
}

/// `‖Σ m_i* m_i‖^{1/2}`.
pub fn col_quantity(ms: &[ComplexMatrix]) -> Result<f64> {
    Ok(op_norm_unchecked(&gram_sum(ms, None, Side::Col)?).sqrt())
}

/// `‖Σ λ_i m_i m_i*‖^{1/2}` (row) or `‖Σ λ_i m_i* m_i‖^{1/2}` (col).
pub fn weighted_quantity(ms: &[ComplexMatrix], weights: &[f64], side: Side) -> Result<f64> {
    if weights.len() != ms.len() {
        return Err(Error::Dimension(format!("{} weights for {} matrices", weights.len(), ms.len())));
    }
    if let Some(bad) = weights.iter().find(|&&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidInput(format!("weights must be positive, got {bad}")));
    }
    Ok(op_norm_unchecked(&gram_sum(ms, Some(weights), side)?).sqrt())
}

/// Applies `a'_k = Σ_j γ_{kj} a_j`.
pub fn mix(gamma: &ComplexMatrix, ms: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    (0..gamma.nrows())
        .map(|k| {
            let mut acc = ComplexMatrix::zeros(ms[0].nrows(), ms[0].ncols());
            for (j, m) in ms.iter().enumerate() {
                let g = gamma[(k, j)];
                if g != ZERO {
                    acc += m * g;
                }
            }
            acc
        })
        .collect()
}
