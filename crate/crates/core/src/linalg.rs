//! Dense complex linear algebra on top of `nalgebra`.
//!
//! Every norm in the toolkit is an operator norm on some matrix algebra, so
//! everything here is computed from full SVDs or Hermitian eigendecompositions.
//! Sizes stay in the low thousands at most.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense complex matrix; the carrier for operators, states and coefficients.
pub type ComplexMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Default tolerances.
pub mod tol {
    /// Structural checks (Hermitian symmetry, reconstructions).
    pub const STRUCTURAL: f64 = 1e-10;
    /// Iterative optimization.
    pub const OPTIMIZATION: f64 = 1e-6;
    /// Conditioning threshold for basis independence.
    pub const BASIS: f64 = 1e-8;
    /// Hermitian construction check, relative to the operator norm.
    pub const HERMITIAN: f64 = 1e-12;
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// The matrix unit `e_{ij}` (zero-based) in `M_{rows × cols}`.
pub fn matrix_unit(rows: usize, cols: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    m[(i, j)] = ONE;
    m
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn diag_real(d: &[f64]) -> ComplexMatrix {
    let n = d.len();
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { real(d[i]) } else { ZERO })
}

/// A matrix checked to be Hermitian at construction (and symmetrized exactly).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let asym = (&m - m.adjoint()).norm();
        let scale = m.norm();
        if asym > tol::HERMITIAN * scale.max(f64::MIN_POSITIVE) && asym > 0.0 {
            return Err(Error::NotHermitian(asym / scale.max(f64::MIN_POSITIVE)));
        }
        Ok(Self::symmetrize(m))
    }

    /// Takes the Hermitian part `(X + X*)/2` without checking.
    pub fn symmetrize(m: ComplexMatrix) -> Self {
        let h = (&m + m.adjoint()) * real(0.5);
        HermitianMatrix(h)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// Eigenvalues in ascending order with matching eigenvector columns.
    pub fn eigh(&self) -> (Vec<f64>, ComplexMatrix) {
        let n = self.dim();
        if n == 0 {
            return (Vec::new(), ComplexMatrix::zeros(0, 0));
        }
        let eig = SymmetricEigen::new(self.0.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        (values, vectors)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigh().0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    /// Applies a real function to the spectrum.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let (vals, vecs) = self.eigh();
        let n = vals.len();
        let mut scaled = vecs.clone();
        for j in 0..n {
            let s = real(f(vals[j]));
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        scaled * vecs.adjoint()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }
}

fn ensure_nonempty(x: &ComplexMatrix) -> Result<()> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    Ok(())
}

/// Thin SVD `X = U diag(σ) V_t` with `σ` descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: DVector<f64>,
    pub v_t: ComplexMatrix,
}

/// One-sided Jacobi SVD. nalgebra's complex bidiagonal SVD returns wrong
/// factorizations on some matrices with clustered singular values, so the
/// whole crate goes through this routine instead.
pub fn svd(x: &ComplexMatrix) -> Svd {
    let (m, n) = x.shape();
    if m < n {
        let t = svd(&x.adjoint());
        return Svd { u: t.v_t.adjoint(), singular_values: t.singular_values, v_t: t.u.adjoint() };
    }
    let mut a = x.clone();
    let mut v = ComplexMatrix::identity(n, n);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let ph = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for mat in [&mut a, &mut v] {
                    for r in 0..mat.nrows() {
                        let xp = mat[(r, p)];
                        let xq = mat[(r, q)] * ph.conj();
                        mat[(r, p)] = xp * cs - xq * sn;
                        mat[(r, q)] = xp * sn + xq * cs;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sv = DVector::from_fn(n, |k, _| a.column(k).norm());
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let mut u = ComplexMatrix::zeros(m, n);
    let mut missing = Vec::new();
    for k in 0..n {
        if sv[k] > 1e-300 && sv[k] > 1e-15 * smax {
            u.set_column(k, &(a.column(k) / real(sv[k])));
        } else {
            missing.push(k);
        }
    }
    // Complete U by Gram–Schmidt on standard basis vectors.
    let mut e = 0;
    for k in missing {
        while e < m {
            let mut cand = DVector::<C64>::zeros(m);
            cand[e] = ONE;
            e += 1;
            for _ in 0..2 {
                for j in 0..n {
                    let uj = u.column(j).into_owned();
                    let proj = uj.dotc(&cand);
                    cand -= uj * proj;
                }
            }
            let nc = cand.norm();
            if nc > 1e-8 {
                u.set_column(k, &(cand / real(nc)));
                break;
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let u = ComplexMatrix::from_fn(m, n, |r, k| u[(r, order[k])]);
    let v = ComplexMatrix::from_fn(n, n, |r, k| v[(r, order[k])]);
    let singular_values = DVector::from_fn(n, |k, _| sv[order[k]]);
    Svd { u, singular_values, v_t: v.adjoint() }
}

/// Singular values in descending order.
pub fn singular_values(x: &ComplexMatrix) -> Vec<f64> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Vec::new();
    }
    svd(x).singular_values.iter().copied().collect()
}

/// Operator norm (largest singular value).
pub fn op_norm(x: &ComplexMatrix) -> Result<f64> {
    ensure_nonempty(x)?;
    Ok(op_norm_unchecked(x))
}

/// Operator norm; empty matrices have norm 0.
pub fn op_norm_unchecked(x: &ComplexMatrix) -> f64 {
    if x.iter().all(|z| *z == ZERO) {
        return 0.0;
    }
    singular_values(x).first().copied().unwrap_or(0.0)
}

/// Operator norm by power iteration on `X*X`; used as a cross-check and for
/// matrices too large for a dense SVD.
pub fn op_norm_power(x: &ComplexMatrix, iters: usize) -> f64 {
    if x.ncols() == 0 || x.nrows() == 0 {
        return 0.0;
    }
    let n = x.ncols();
    // Deterministic, generic start vector.
    let mut v = DVector::from_fn(n, |i, _| c(1.0 + (i as f64 * 0.7).sin() * 0.5, (i as f64 * 1.3).cos() * 0.25));
    let mut est = 0.0;
    for _ in 0..iters {
        let nv = v.norm();
        if nv == 0.0 {
            return 0.0;
        }
        v /= real(nv);
        let w = x * &v;
        let z = x.adjoint() * &w;
        let new_est = w.norm();
        v = z;
        if (new_est - est).abs() <= 1e-15 * new_est {
            est = new_est;
            break;
        }
        est = new_est;
    }
    est
}

pub fn kron(x: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
    x.kronecker(y)
}

pub fn psd_check(x: &HermitianMatrix, tol: f64) -> bool {
    x.min_eigenvalue() >= -tol
}

/// Trace norm (sum of singular values).
pub fn trace_norm(x: &ComplexMatrix) -> f64 {
    singular_values(x).iter().sum()
}

/// Partial isometry `V W*` from the SVD `X = W Σ V*`, so that
/// `tr(X · (V W*)) = ‖X‖_1`; the maximizer of `|tr(XY)|` over the unit ball.
pub fn dual_polar(x: &ComplexMatrix) -> ComplexMatrix {
    let Svd { u, v_t, .. } = svd(x);
    v_t.adjoint() * u.adjoint()
}

/// Top singular triple `(σ, u, v)` with `X v = σ u`.
pub fn top_singular_pair(x: &ComplexMatrix) -> (f64, DVector<C64>, DVector<C64>) {
    let Svd { u, singular_values, v_t } = svd(x);
    let (k, s) = singular_values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc });
    let uu = u.column(k).into_owned();
    let vv = v_t.row(k).adjoint();
    (s.max(0.0), uu, vv)
}

/// Least-squares solution of `A X = B` through the SVD pseudo-inverse with a
/// relative singular-value cutoff.
pub fn lstsq(a: &ComplexMatrix, b: &ComplexMatrix, rcond: f64) -> ComplexMatrix {
    let svd = svd(a);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = rcond * smax;
    let (u, v_t) = (svd.u, svd.v_t);
    let k = svd.singular_values.len();
    let mut inv = ComplexMatrix::zeros(k, k);
    for i in 0..k {
        let s = svd.singular_values[i];
        if s > cutoff && s > 0.0 {
            inv[(i, i)] = real(1.0 / s);
        }
    }
    v_t.adjoint() * inv * u.adjoint() * b
}

/// Row-major vectorization.
pub fn vec_row_major(x: &ComplexMatrix) -> DVector<C64> {
    let (r, cc) = x.shape();
    DVector::from_fn(r * cc, |k, _| x[(k / cc, k % cc)])
}

pub fn unvec_row_major(v: &[C64], rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |i, j| v[i * cols + j])
}

/// Frobenius inner product `tr(X* Y)`.
pub fn frobenius_inner(x: &ComplexMatrix, y: &ComplexMatrix) -> C64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// `tr(X Y)` without forming the product.
pub fn trace_product(x: &ComplexMatrix, y: &ComplexMatrix) -> C64 {
    let mut s = ZERO;
    for i in 0..x.nrows() {
        for k in 0..x.ncols() {
            s += x[(i, k)] * y[(k, i)];
        }
    }
    s
}

pub fn is_zero(x: &ComplexMatrix) -> bool {
    x.iter().all(|z| *z == ZERO)
}

/// Maximum entrywise modulus.
pub fn max_abs(x: &ComplexMatrix) -> f64 {
    x.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// JSON wire format for matrices: `{"rows":r,"cols":c,"re":[...],"im":[...]}`,
/// row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let (rows, cols) = m.shape();
        let mut re = Vec::with_capacity(rows * cols);
        let mut im = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        MatrixJson { rows, cols, re, im }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        let n = j.rows * j.cols;
        if j.re.len() != n || j.im.len() != n {
            return Err(Error::Parse(format!(
                "matrix {}x{} needs {} entries, got re={} im={}",
                j.rows,
                j.cols,
                n,
                j.re.len(),
                j.im.len()
            )));
        }
        Ok(ComplexMatrix::from_fn(j.rows, j.cols, |r, cc| {
            let k = r * j.cols + cc;
            c(j.re[k], j.im[k])
        }))
    }
}

/// `#[serde(with = "matrix_serde")]` adaptor for [`ComplexMatrix`] fields.
pub mod matrix_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ComplexMatrix, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        ComplexMatrix::try_from(j).map_err(serde::de::Error::custom)
    }
}

/// Same as [`matrix_serde`] for `Vec<ComplexMatrix>`.
pub mod matrix_vec_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(ms: &[ComplexMatrix], s: S) -> std::result::Result<S::Ok, S::Error> {
        let js: Vec<MatrixJson> = ms.iter().map(MatrixJson::from).collect();
        js.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<ComplexMatrix>, D::Error> {
        let js = Vec::<MatrixJson>::deserialize(d)?;
        js.into_iter()
            .map(|j| ComplexMatrix::try_from(j).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_svd(x: &ComplexMatrix) {
        let d = svd(x);
        let s = DMatrix::from_diagonal(&d.singular_values.map(real));
        assert!((&d.u * s * &d.v_t - x).norm() <= 1e-12 * x.norm().max(1.0));
        let k = d.singular_values.len();
        assert!((d.u.adjoint() * &d.u - identity(k)).norm() < 1e-12);
        assert!((&d.v_t * d.v_t.adjoint() - identity(k)).norm() < 1e-12);
    }

    #[test]
    fn svd_on_clustered_spectrum() {
        // Paired singular values; the bidiagonal routine in nalgebra fails here.
        let raw = [
            (-0.36160190620770477, 0.0),
            (-0.23876273176997032, 0.021551142901568444),
            (-0.26541187885394485, 0.1040533776001464),
            (-0.16904777043460828, 0.08452388521730413),
            (0.23973338074332248, 0.0),
            (-0.36013782758029683, 0.032506671911933446),
            (0.17596170239917147, -0.06898489073648875),
            (-0.25498324780546666, 0.1274916239027333),
            (0.3208827144122651, 0.0),
            (-0.4025245832506534, 0.0363325748148446),
            (-0.3789344414608811, 0.14855932105709366),
            (0.4585254327304657, -0.2292627163652328),
            (0.40416097797014977, 0.0),
            (0.3195835024446012, -0.02884616740272021),
            (-0.4772787924332896, 0.18711472381736183),
            (-0.3640452530092531, 0.18202262650462653),
        ];
        let x = ComplexMatrix::from_iterator(4, 4, raw.iter().map(|(a, b)| c(*a, *b)));
        check_svd(&x);
        let sv = singular_values(&x);
        assert!((sv[0] - sv[1]).abs() < 1e-12 && (sv[2] - sv[3]).abs() < 1e-12);
    }

    #[test]
    fn svd_shapes_and_rank_deficiency() {
        let mut r = crate::random::rng(5);
        for (m, n) in [(3, 3), (5, 2), (2, 6), (8, 8)] {
            check_svd(&crate::random::gaussian_matrix(&mut r, m, n));
        }
        let g = crate::random::gaussian_matrix(&mut r, 5, 1);
        check_svd(&(&g * g.adjoint()));
        check_svd(&ComplexMatrix::zeros(3, 2));
    }

    #[test]
    fn op_norm_basic_cases() {
        assert!((op_norm(&identity(3)).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(op_norm(&ComplexMatrix::zeros(3, 2)).unwrap(), 0.0);
        assert!((op_norm(&diag_real(&[3.0, -4.0])).unwrap() - 4.0).abs() < 1e-13);
        assert!(matches!(op_norm(&ComplexMatrix::zeros(0, 0)), Err(Error::Dimension(_))));
    }

    #[test]
    fn kron_cases() {
        assert_eq!(kron(&identity(2), &identity(2)), identity(4));
        // e_{12} ⊗ e_{21}: one-based row (1-1)*2+2 = 2, col (2-1)*2+1 = 3.
        let k = kron(&matrix_unit(2, 2, 0, 1), &matrix_unit(2, 2, 1, 0));
        assert_eq!(k, matrix_unit(4, 4, 1, 2));
        let n = op_norm(&kron(&diag_real(&[2.0, 1.0]), &diag_real(&[3.0, 1.0]))).unwrap();
        assert!((n - 6.0).abs() < 1e-13);
    }

    #[test]
    fn psd_check_cases() {
        let i2 = HermitianMatrix::new(identity(2)).unwrap();
        assert!(psd_check(&i2, 0.0));
        let d = HermitianMatrix::new(diag_real(&[1.0, -1.0])).unwrap();
        assert!(!psd_check(&d, 1e-9));
        let a = ComplexMatrix::from_fn(3, 2, |i, j| c(i as f64 - 0.3 * j as f64, (i * j) as f64 + 0.5));
        let g = HermitianMatrix::new(&a * a.adjoint()).unwrap();
        assert!(psd_check(&g, 1e-10));
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = matrix_unit(2, 2, 0, 1);
        assert!(matches!(HermitianMatrix::new(m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn json_round_trip_and_field_names() {
        let m = ComplexMatrix::from_fn(2, 3, |i, j| c(i as f64, j as f64 - 1.0));
        let s = serde_json::to_string(&MatrixJson::from(&m)).unwrap();
        assert!(s.starts_with("{\"rows\":2,\"cols\":3,\"re\":["));
        let back: MatrixJson = serde_json::from_str(&s).unwrap();
        assert_eq!(ComplexMatrix::try_from(back).unwrap(), m);
        let bad = MatrixJson { rows: 2, cols: 2, re: vec![0.0; 3], im: vec![0.0; 4] };
        assert!(ComplexMatrix::try_from(bad).is_err());
    }

    #[test]
    fn dual_polar_attains_trace_norm() {
        let x = ComplexMatrix::from_fn(3, 3, |i, j| c((i + 2 * j) as f64 - 2.0, (i * j) as f64 * 0.3));
        let p = dual_polar(&x);
        let t = trace_product(&x, &p);
        assert!((t.re - trace_norm(&x)).abs() < 1e-10);
        assert!(t.im.abs() < 1e-10);
        assert!((op_norm(&p).unwrap() - 1.0).abs() < 1e-10);
    }
}
