//! Schur multipliers `M_φ: (x_{ij}) ↦ (φ_{ij} x_{ij})` from compact operators to
//! the trace class, at finite truncation.
//!
//! Bounded multipliers are those splitting as `φ = a + b` with finite
//! `Σ_i sup_j |a_{ij}| + Σ_j sup_i |b_{ij}|`; completely bounded ones are those
//! dominated by a rank-one matrix, `|φ_{ij}| ≤ C x_i y_j` with unit `x, y`.
//! Both quantities depend on `|φ|` only, so the solvers work with moduli and
//! reattach phases to the output.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gtforms::BilinearForm;
use crate::linalg::{dual_polar, matrix_unit, real, trace_norm, ComplexMatrix, C64, ZERO};
use crate::lmi::solve_spd;
use crate::lp::simplex_max;
use crate::random::{gaussian_matrix, rng, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchurMatrix {
    #[serde(with = "crate::linalg::matrix_serde")]
    pub entries: ComplexMatrix,
}

impl SchurMatrix {
    pub fn new(entries: ComplexMatrix) -> Result<Self> {
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("multiplier entries must be finite".into()));
        }
        Ok(SchurMatrix { entries })
    }

    pub fn from_real(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        SchurMatrix { entries: ComplexMatrix::from_fn(rows, cols, |i, j| real(f(i, j))) }
    }

    pub fn identity(k: usize) -> Self {
        Self::from_real(k, k, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// `φ_{ij} = 1/i²` (1-based `i`), constant along rows.
    pub fn inverse_square_rows(k: usize) -> Self {
        Self::from_real(k, k, |i, _| 1.0 / ((i + 1) * (i + 1)) as f64)
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    fn modulus(&self) -> DMatrix<f64> {
        self.entries.map(|z| z.norm())
    }

    /// `M_φ(x)`.
    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.entries.component_mul(x)
    }

    /// `Σ φ_{ij} a_{ij} b_{ij}`.
    pub fn pairing(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
        self.entries.iter().zip(a.iter()).zip(b.iter()).map(|((p, x), y)| p * x * y).sum()
    }
}

/// `Σ_i sup_j |a_{ij}| + Σ_j sup_i |b_{ij}|`.
pub fn split_cost(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let rows: f64 = (0..a.nrows()).map(|i| a.row(i).iter().map(|z| z.norm()).fold(0.0, f64::max)).sum();
    let cols: f64 = (0..b.ncols()).map(|j| b.column(j).iter().map(|z| z.norm()).fold(0.0, f64::max)).sum();
    rows + cols
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundedSplit {
    #[serde(with = "crate::linalg::matrix_serde")]
    pub a: ComplexMatrix,
    #[serde(with = "crate::linalg::matrix_serde")]
    pub b: ComplexMatrix,
    pub cost: f64,
    /// Value of a certifying lower bound (the LP dual), when available.
    pub lower_bound: Option<f64>,
}

fn phase(z: C64) -> C64 {
    let n = z.norm();
    if n == 0.0 {
        ZERO
    } else {
        z / n
    }
}

/// Optimal split. Its LP is `min Σ s_i + Σ t_j` over `s_i + t_j ≥ |φ_{ij}|`,
/// `s, t ≥ 0`, whose dual is the assignment problem
/// `max Σ |φ_{ij}| w_{ij}` with row and column sums of `w` at most 1.
/// The simplex method on the dual returns `(s, t)` as multipliers.
pub fn bounded_split_optimal(phi: &SchurMatrix) -> Result<BoundedSplit> {
    let (k1, k2) = (phi.rows(), phi.cols());
    let m = phi.modulus();
    if m.iter().all(|v| *v == 0.0) {
        let z = ComplexMatrix::zeros(k1, k2);
        return Ok(BoundedSplit { a: z.clone(), b: z, cost: 0.0, lower_bound: Some(0.0) });
    }
    let n = k1 * k2;
    let mut cons = vec![vec![0.0; n]; k1 + k2];
    let mut obj = vec![0.0; n];
    for i in 0..k1 {
        for j in 0..k2 {
            let v = i * k2 + j;
            obj[v] = m[(i, j)];
            cons[i][v] = 1.0;
            cons[k1 + j][v] = 1.0;
        }
    }
    let sol = simplex_max(&obj, &cons, &vec![1.0; k1 + k2])?;
    let s = &sol.dual[..k1];
    let a = ComplexMatrix::from_fn(k1, k2, |i, j| phase(phi.entries[(i, j)]) * m[(i, j)].min(s[i]));
    let b = &phi.entries - &a;
    let cost = split_cost(&a, &b);
    Ok(BoundedSplit { a, b, cost, lower_bound: Some(sol.objective) })
}

/// Split from weights `x, y` (nonnegative, summing to 1) with
/// `|φ_{ij}| ≤ K (x_i y_j)^{1/2}`: after sorting both weight vectors increasingly,
/// entries with `i ≤ j` go to `b` and those with `i > j` to `a`, so each half
/// of the cost is at most `K Σ (x_i y_i)^{1/2} ≤ K`. Rectangular `φ` is padded
/// with zero weights to a square.
pub fn constructive_split(phi: &SchurMatrix, x: &[f64], y: &[f64], k: f64) -> Result<BoundedSplit> {
    let (k1, k2) = (phi.rows(), phi.cols());
    if x.len() != k1 || y.len() != k2 {
        return Err(Error::Dimension(format!("weights of lengths {}, {} for a {}x{} multiplier", x.len(), y.len(), k1, k2)));
    }
    if x.iter().chain(y).any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput("weights must be nonnegative".into()));
    }
    for (name, w) in [("x", x), ("y", y)] {
        let s: f64 = w.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("{name} sums to {s}, expected 1")));
        }
    }
    let mut worst = (0.0f64, 0, 0);
    for i in 0..k1 {
        for j in 0..k2 {
            let excess = phi.entries[(i, j)].norm() - k * (x[i] * y[j]).sqrt();
            if excess > worst.0 {
                worst = (excess, i, j);
            }
        }
    }
    if worst.0 > 1e-12 * k.max(1.0) {
        return Err(Error::Precondition(format!(
            "|φ| exceeds K(x_i y_j)^(1/2) by {:.3e} at ({}, {})",
            worst.0, worst.1, worst.2
        )));
    }
    let n = k1.max(k2);
    let mut xs: Vec<usize> = (0..n).collect();
    let mut ys: Vec<usize> = (0..n).collect();
    let wx = |i: usize| if i < k1 { x[i] } else { 0.0 };
    let wy = |j: usize| if j < k2 { y[j] } else { 0.0 };
    xs.sort_by(|p, q| wx(*p).total_cmp(&wx(*q)).then(p.cmp(q)));
    ys.sort_by(|p, q| wy(*p).total_cmp(&wy(*q)).then(p.cmp(q)));
    // rank[i] = sorted position of row i.
    let mut row_rank = vec![0; n];
    let mut col_rank = vec![0; n];
    for (pos, &i) in xs.iter().enumerate() {
        row_rank[i] = pos;
    }
    for (pos, &j) in ys.iter().enumerate() {
        col_rank[j] = pos;
    }
    let mut a = ComplexMatrix::zeros(k1, k2);
    let mut b = ComplexMatrix::zeros(k1, k2);
    for i in 0..k1 {
        for j in 0..k2 {
            if row_rank[i] <= col_rank[j] {
                b[(i, j)] = phi.entries[(i, j)];
            } else {
                a[(i, j)] = phi.entries[(i, j)];
            }
        }
    }
    let cost = split_cost(&a, &b);
    Ok(BoundedSplit { a, b, cost, lower_bound: None })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankOneDominator {
    /// Unit vectors (zero on zero rows and columns of `φ`).
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `|φ_{ij}| ≤ c x_i y_j`.
    pub c: f64,
    /// No dominator has a constant below this.
    pub lower_bound: f64,
    pub newton_steps: usize,
}

/// Barrier objective in `z = (u, v)`, `x = e^u`, `y = e^v`:
/// `t(½ LSE(2u) + ½ LSE(2v)) − Σ log(u_i + v_j − log|φ_{ij}|)`, plus a quadratic
/// pinning `mean(u) = mean(v)` along the invariant direction.
struct LogProblem {
    n1: usize,
    n2: usize,
    cons: Vec<(usize, usize, f64)>,
}

fn lse2(z: &[f64]) -> (f64, Vec<f64>) {
    let mx = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = z.iter().map(|v| (2.0 * (v - mx)).exp()).collect();
    let s: f64 = w.iter().sum();
    (0.5 * s.ln() + mx, w.iter().map(|v| v / s).collect())
}

impl LogProblem {
    fn objective(&self, z: &[f64]) -> f64 {
        lse2(&z[..self.n1]).0 + lse2(&z[self.n1..]).0
    }

    fn pin(&self, z: &[f64]) -> f64 {
        let mu: f64 = z[..self.n1].iter().sum::<f64>() / self.n1 as f64;
        let mv: f64 = z[self.n1..].iter().sum::<f64>() / self.n2 as f64;
        mu - mv
    }

    fn value(&self, z: &[f64], t: f64) -> Option<f64> {
        let mut b = 0.0;
        for &(i, j, l) in &self.cons {
            let s = z[i] + z[self.n1 + j] - l;
            if s <= 0.0 {
                return None;
            }
            b -= s.ln();
        }
        Some(t * self.objective(z) + b + 0.5 * self.pin(z).powi(2))
    }

    fn grad_hess(&self, z: &[f64], t: f64) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.n1 + self.n2;
        let mut g = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        for (off, len) in [(0, self.n1), (self.n1, self.n2)] {
            let (_, p) = lse2(&z[off..off + len]);
            for a in 0..len {
                g[off + a] += t * p[a];
                h[(off + a, off + a)] += 2.0 * t * p[a];
                for b in 0..len {
                    h[(off + a, off + b)] -= 2.0 * t * p[a] * p[b];
                }
            }
        }
        for &(i, j, l) in &self.cons {
            let jj = self.n1 + j;
            let s = z[i] + z[jj] - l;
            g[i] -= 1.0 / s;
            g[jj] -= 1.0 / s;
            let w = 1.0 / (s * s);
            h[(i, i)] += w;
            h[(jj, jj)] += w;
            h[(i, jj)] += w;
            h[(jj, i)] += w;
        }
        let d = self.pin(z);
        let dir: Vec<f64> = (0..n).map(|k| if k < self.n1 { 1.0 / self.n1 as f64 } else { -1.0 / self.n2 as f64 }).collect();
        for a in 0..n {
            g[a] += d * dir[a];
            for b in 0..n {
                h[(a, b)] += dir[a] * dir[b];
            }
        }
        (g, h)
    }
}

/// Smallest `C` with `|φ_{ij}| ≤ C x_i y_j` over unit `x, y ≥ 0`, by a barrier
/// method in logarithmic variables; `tol` bounds the relative gap in `C`.
pub fn rank_one_dominator(phi: &SchurMatrix, max_newton: usize, tol: f64) -> Result<RankOneDominator> {
    let m = phi.modulus();
    let (k1, k2) = (m.nrows(), m.ncols());
    let rows: Vec<usize> = (0..k1).filter(|&i| m.row(i).iter().any(|v| *v > 0.0)).collect();
    let cols: Vec<usize> = (0..k2).filter(|&j| m.column(j).iter().any(|v| *v > 0.0)).collect();
    if rows.is_empty() {
        let unit = |n: usize| vec![1.0 / (n.max(1) as f64).sqrt(); n];
        return Ok(RankOneDominator { x: unit(k1), y: unit(k2), c: 0.0, lower_bound: 0.0, newton_steps: 0 });
    }
    let (n1, n2) = (rows.len(), cols.len());
    let mut cons = Vec::new();
    for (a, &i) in rows.iter().enumerate() {
        for (b, &j) in cols.iter().enumerate() {
            if m[(i, j)] > 0.0 {
                cons.push((a, b, m[(i, j)].ln()));
            }
        }
    }
    let prob = LogProblem { n1, n2, cons };
    // Strictly feasible start: u_i = max_j log|φ_ij| + 1, v = 0.
    let mut z = vec![0.0; n1 + n2];
    z[..n1].fill(f64::NEG_INFINITY);
    for &(a, _, l) in &prob.cons {
        z[a] = z[a].max(l + 1.0);
    }
    let mcount = prob.cons.len() as f64;
    let mut t = 1.0;
    let mut steps = 0;
    loop {
        for _ in 0..200 {
            let (g, h) = prob.grad_hess(&z, t);
            let dz = match solve_spd(&h, &(-&g)) {
                Some(d) => d,
                None => return Err(Error::Solver("singular Newton system in dominator barrier".into())),
            };
            let dec = -g.dot(&dz);
            steps += 1;
            if dec / 2.0 <= 1e-12 || steps >= max_newton {
                break;
            }
            let f0 = prob.value(&z, t).expect("iterate is interior");
            let mut s = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let cand: Vec<f64> = z.iter().zip(dz.iter()).map(|(a, d)| a + s * d).collect();
                if let Some(f1) = prob.value(&cand, t) {
                    if f1 <= f0 - 0.25 * s * dec {
                        z = cand;
                        moved = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if !moved {
                break;
            }
        }
        // Gap in log C is at most m/t.
        if mcount / t <= tol || steps >= max_newton {
            break;
        }
        t *= 10.0;
    }
    let log_c = prob.objective(&z);
    let xu: Vec<f64> = z[..n1].iter().map(|v| v.exp()).collect();
    let yv: Vec<f64> = z[n1..].iter().map(|v| v.exp()).collect();
    let nx = xu.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ny = yv.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; k1];
    let mut y = vec![0.0; k2];
    for (a, &i) in rows.iter().enumerate() {
        x[i] = xu[a] / nx;
    }
    for (b, &j) in cols.iter().enumerate() {
        y[j] = yv[b] / ny;
    }
    // The reported constant is the smallest valid one for the returned vectors.
    let mut c: f64 = 0.0;
    for i in 0..k1 {
        for j in 0..k2 {
            if m[(i, j)] > 0.0 {
                c = c.max(m[(i, j)] / (x[i] * y[j]));
            }
        }
    }
    let lower_bound = (log_c - mcount / t).exp().min(c);
    Ok(RankOneDominator { x, y, c, lower_bound, newton_steps: steps })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceClassVectors {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `max_{ij} (|T_{ij}| − X_i Y_j)`, at most rounding.
    pub domination_excess: f64,
    /// `‖X‖₂ ‖Y‖₂`, equal to the trace norm of `T`.
    pub product_norm: f64,
    pub trace_norm: f64,
}

/// `X_i = (Σ_k σ_k |u_i^k|²)^{1/2}`, `Y_j = (Σ_k σ_k |v_j^k|²)^{1/2}` from `T = Σ σ_k u^k (v^k)*`.
pub fn trace_class_dominator_to_vectors(t: &ComplexMatrix) -> TraceClassVectors {
    let svd = crate::linalg::svd(t);
    let (u, vt) = (&svd.u, &svd.v_t);
    let s = &svd.singular_values;
    let x: Vec<f64> = (0..t.nrows()).map(|i| (0..s.len()).map(|k| s[k] * u[(i, k)].norm_sqr()).sum::<f64>().sqrt()).collect();
    let y: Vec<f64> = (0..t.ncols()).map(|j| (0..s.len()).map(|k| s[k] * vt[(k, j)].norm_sqr()).sum::<f64>().sqrt()).collect();
    let mut excess = f64::NEG_INFINITY;
    for i in 0..t.nrows() {
        for j in 0..t.ncols() {
            excess = excess.max(t[(i, j)].norm() - x[i] * y[j]);
        }
    }
    let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    TraceClassVectors { x, y, domination_excess: excess.max(0.0), product_norm: nx * ny, trace_norm: trace_norm(t) }
}

/// `φ_{ij} = (a_{ij} b_{ij})^{1/2}`.
pub fn geometric_mean_form(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<SchurMatrix> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension("factors must have equal shapes".into()));
    }
    if a.iter().chain(b.iter()).any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput("factors must be entrywise nonnegative".into()));
    }
    Ok(SchurMatrix::from_real(a.nrows(), a.ncols(), |i, j| (a[(i, j)] * b[(i, j)]).sqrt()))
}

/// `ψ_{ij} = v(e_{ij}, e_{ij})`: the average of `v` over conjugation by diagonal unitaries.
pub fn averaging_projection(v: &BilinearForm) -> Result<SchurMatrix> {
    v.validate()?;
    let k = v.domain_left.ambient_dim();
    if !v.domain_left.is_full() || !v.domain_right.is_full() || v.domain_right.ambient_dim() != k {
        return Err(Error::Precondition("averaging needs both domains equal to the full matrix algebra".into()));
    }
    let mut psi = ComplexMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            let e = matrix_unit(k, k, i, j);
            psi[(i, j)] = v.evaluate(&e, &e)?;
        }
    }
    SchurMatrix::new(psi)
}

/// The form `(a, b) ↦ Σ φ_{ij} a_{ij} b_{ij}` on `M_k × M_k`.
pub fn multiplier_form(phi: &SchurMatrix) -> Result<BilinearForm> {
    let k = phi.rows();
    if phi.cols() != k {
        return Err(Error::Dimension("multiplier form needs a square multiplier".into()));
    }
    let space = crate::opspace::OperatorSpace::full(k);
    let d = k * k;
    let coeffs = ComplexMatrix::from_fn(d, d, |r, c| if r == c { phi.entries[(r / k, r % k)] } else { ZERO });
    BilinearForm::new(space.clone(), space, coeffs)
}

/// Lower estimate of `sup{|Σ φ_{ij} a_{ij} b_{ij}| : ‖a‖, ‖b‖ ≤ 1}` by alternating
/// maximization: for fixed `b` the best `a` is the polar of `(φ ∘ b)ᵀ`.
pub fn multiplier_norm_ascent(phi: &SchurMatrix, restarts: usize, seed: u64) -> f64 {
    let (k1, k2) = (phi.rows(), phi.cols());
    let mut r: Rng = rng(seed);
    let mut best = 0.0f64;
    for _ in 0..restarts.max(1) {
        let mut b = gaussian_matrix(&mut r, k1, k2);
        let nb = crate::linalg::op_norm_unchecked(&b);
        b /= real(nb.max(f64::MIN_POSITIVE));
        let mut last = 0.0;
        for _ in 0..100 {
            let a = dual_polar(&phi.apply(&b).transpose());
            b = dual_polar(&phi.apply(&a).transpose());
            let val = phi.pairing(&a, &b).norm();
            best = best.max(val);
            if val <= last * (1.0 + 1e-12) {
                break;
            }
            last = val;
        }
    }
    best
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapRow {
    pub k: usize,
    pub lp_cost: f64,
    pub dominator: f64,
    pub ratio: f64,
}

/// Bounded cost against the rank-one constant for `φ_{ij} = 1/i²` at sizes `2..=kmax`.
pub fn gap_profile(kmax: usize) -> Result<Vec<GapRow>> {
    (2..=kmax)
        .map(|k| {
            let phi = SchurMatrix::inverse_square_rows(k);
            let lp_cost = bounded_split_optimal(&phi)?.cost;
            let dominator = rank_one_dominator(&phi, 2000, 1e-11)?.c;
            Ok(GapRow { k, lp_cost, dominator, ratio: dominator / lp_cost })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{gaussian_matrix, uniform};

    #[test]
    fn identity_costs() {
        for k in 2..=6 {
            let s = bounded_split_optimal(&SchurMatrix::identity(k)).unwrap();
            assert_eq!(s.cost, k as f64);
            let d = rank_one_dominator(&SchurMatrix::identity(k), 1000, 1e-12).unwrap();
            assert!((d.c - k as f64).abs() < 1e-8 * k as f64, "{}", d.c);
        }
    }

    #[test]
    fn constant_rows_and_zero() {
        let phi = SchurMatrix::from_real(3, 4, |i, _| (i + 1) as f64);
        let s = bounded_split_optimal(&phi).unwrap();
        assert!((s.cost - 6.0).abs() < 1e-12);
        let z = bounded_split_optimal(&SchurMatrix::from_real(2, 2, |_, _| 0.0)).unwrap();
        assert_eq!(z.cost, 0.0);
    }

    #[test]
    fn complex_split_resums() {
        let mut r = rng(3);
        let phi = SchurMatrix::new(gaussian_matrix(&mut r, 4, 3)).unwrap();
        let s = bounded_split_optimal(&phi).unwrap();
        assert!((&s.a + &s.b - &phi.entries).norm() < 1e-12);
        assert!((s.cost - s.lower_bound.unwrap()).abs() < 1e-8 * s.cost);
    }

    #[test]
    fn constructive_split_uniform() {
        let k = 4;
        let w = vec![0.25; k];
        let phi = SchurMatrix::from_real(k, k, |_, _| 0.25);
        let s = constructive_split(&phi, &w, &w, 1.0).unwrap();
        assert!((&s.a + &s.b - &phi.entries).norm() < 1e-15);
        assert!(split_cost(&ComplexMatrix::zeros(k, k), &s.b) <= 1.0 + 1e-12);
        assert!(split_cost(&s.a, &ComplexMatrix::zeros(k, k)) <= 1.0 + 1e-12);
        let one = constructive_split(&SchurMatrix::identity(1), &[1.0], &[1.0], 1.0).unwrap();
        assert_eq!(one.b[(0, 0)].re, 1.0);
        assert!(constructive_split(&phi, &w, &w, 0.5).is_err());
    }

    #[test]
    fn constructive_cost_dominates_lp() {
        let mut r = rng(5);
        for _ in 0..10 {
            let k = 4;
            let x: Vec<f64> = (0..k).map(|_| uniform(&mut r) + 0.05).collect();
            let y: Vec<f64> = (0..k).map(|_| uniform(&mut r) + 0.05).collect();
            let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
            let x: Vec<f64> = x.iter().map(|v| v / sx).collect();
            let y: Vec<f64> = y.iter().map(|v| v / sy).collect();
            let u = DMatrix::from_fn(k, k, |_, _| uniform(&mut r));
            let phi = SchurMatrix::from_real(k, k, |i, j| u[(i, j)] * (x[i] * y[j]).sqrt());
            let c = constructive_split(&phi, &x, &y, 1.0).unwrap();
            let o = bounded_split_optimal(&phi).unwrap();
            assert!(c.cost >= o.cost - 1e-12);
            assert!(c.cost <= 2.0 + 1e-12);
        }
    }

    #[test]
    fn rank_one_generator() {
        let x0 = [1.0, 2.0, 0.5];
        let y0 = [3.0, 1.0];
        let phi = SchurMatrix::from_real(3, 2, |i, j| x0[i] * y0[j]);
        let d = rank_one_dominator(&phi, 1000, 1e-12).unwrap();
        let want = (1.0f64 + 4.0 + 0.25).sqrt() * 10f64.sqrt();
        assert!((d.c - want).abs() < 1e-8 * want);
        for i in 0..3 {
            for j in 0..2 {
                assert!(phi.entries[(i, j)].re <= d.c * d.x[i] * d.y[j] * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn trace_class_vectors() {
        let t = ComplexMatrix::identity(2, 2);
        let v = trace_class_dominator_to_vectors(&t);
        assert!(v.x.iter().chain(&v.y).all(|z| (z - 1.0).abs() < 1e-12));
        let mut r = rng(7);
        let g = gaussian_matrix(&mut r, 3, 4);
        let v = trace_class_dominator_to_vectors(&g);
        assert!(v.domination_excess <= 1e-12);
        assert!((v.product_norm - v.trace_norm).abs() < 1e-10 * v.trace_norm);
        let z = trace_class_dominator_to_vectors(&ComplexMatrix::zeros(2, 2));
        assert!(z.x.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn geometric_mean_companion() {
        let mut r = rng(9);
        let a = DMatrix::from_fn(3, 3, |_, _| uniform(&mut r));
        let b = DMatrix::from_fn(3, 3, |_, _| uniform(&mut r));
        let phi = geometric_mean_form(&a, &b).unwrap();
        let m: f64 = (0..3).map(|i| a.row(i).max()).sum::<f64>() + (0..3).map(|j| b.column(j).max()).sum::<f64>();
        assert!(rank_one_dominator(&phi, 1000, 1e-10).unwrap().c <= m);
        assert_eq!(geometric_mean_form(&a, &a).unwrap().entries, a.map(real));
    }

    #[test]
    fn averaging_examples() {
        // v(a, b) = tr(a) tr(b).
        let k = 2;
        let space = crate::opspace::OperatorSpace::full(k);
        let tr = |r: usize| if r / k == r % k { 1.0 } else { 0.0 };
        let coeffs = ComplexMatrix::from_fn(4, 4, |r, c| real(tr(r) * tr(c)));
        let v = BilinearForm::new(space.clone(), space, coeffs).unwrap();
        let psi = averaging_projection(&v).unwrap();
        assert_eq!(psi, SchurMatrix::identity(2));
        let phi = SchurMatrix::new(gaussian_matrix(&mut rng(2), 2, 2)).unwrap();
        assert_eq!(averaging_projection(&multiplier_form(&phi).unwrap()).unwrap(), phi);
    }

    #[test]
    fn easy_direction() {
        let mut r = rng(4);
        let phi = SchurMatrix::new(gaussian_matrix(&mut r, 3, 3)).unwrap();
        let cost = bounded_split_optimal(&phi).unwrap().cost;
        assert!(multiplier_norm_ascent(&phi, 8, 1) <= cost * (1.0 + 1e-12));
    }

    #[test]
    fn gap_grows() {
        let p = gap_profile(8).unwrap();
        assert!(p.windows(2).all(|w| w[1].dominator > w[0].dominator));
        assert!(p.iter().all(|row| row.lp_cost <= 1.65));
    }
}
