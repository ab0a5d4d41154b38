//! Conditional mutual information between blocks of a jointly Gaussian vector,
//! and the joint covariance of inputs, base-station observations and their
//! quantized descriptions.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::network::NetworkInstance;

const RANK_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-9;

fn submatrix(k: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| k[(rows[r], cols[c])])
}

/// Pseudo-inverse of a symmetric PSD matrix: Cholesky when it succeeds, otherwise
/// an eigen-decomposition dropping eigenvalues below `1e-12 * trace`.
fn psd_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(ch) = m.clone().cholesky() {
        return ch.inverse();
    }
    let eig = SymmetricEigen::new(m.clone());
    let cutoff = RANK_TOL * m.trace().max(0.0);
    let n = m.nrows();
    let mut inv = DMatrix::zeros(n, n);
    for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > cutoff && lambda > 0.0 {
            let v = eig.eigenvectors.column(idx);
            inv += (v * v.transpose()) / lambda;
        }
    }
    inv
}

/// Covariance of `x` given `cond` (Schur complement).
fn conditional_covariance(k: &DMatrix<f64>, x: &[usize], cond: &[usize]) -> DMatrix<f64> {
    let kxx = submatrix(k, x, x);
    if cond.is_empty() {
        return kxx;
    }
    let kxc = submatrix(k, x, cond);
    let kcc = submatrix(k, cond, cond);
    let s = &kxx - &kxc * psd_inverse(&kcc) * kxc.transpose();
    // restore exact symmetry lost to rounding
    (&s + s.transpose()) * 0.5
}

/// Rank and base-2 log of the pseudo-determinant, keeping eigenvalues above `cutoff`.
fn log2_pseudo_det(m: &DMatrix<f64>, cutoff: f64) -> (usize, f64) {
    if m.nrows() == 0 {
        return (0, 0.0);
    }
    let eig = SymmetricEigen::new(m.clone());
    eig.eigenvalues
        .iter()
        .filter(|&&l| l > cutoff && l > 0.0)
        .fold((0, 0.0), |(r, s), &l| (r + 1, s + l.log2()))
}

fn check_covariance(cov: &DMatrix<f64>) -> Result<()> {
    if !cov.is_square() {
        return Err(Error::InvalidCovariance(format!(
            "matrix must be square, got {}x{}",
            cov.nrows(),
            cov.ncols()
        )));
    }
    if cov.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidCovariance("entries must be finite".into()));
    }
    let scale = cov.amax().max(1.0);
    let n = cov.nrows();
    for i in 0..n {
        for j in i + 1..n {
            if (cov[(i, j)] - cov[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::InvalidCovariance(format!("not symmetric at ({i}, {j})")));
            }
        }
    }
    if n > 0 {
        let min = SymmetricEigen::new(cov.clone()).eigenvalues.min();
        if min < -SYMMETRY_TOL * cov.trace().abs().max(1.0) {
            return Err(Error::InvalidCovariance(format!(
                "not positive semidefinite (eigenvalue {min:e})"
            )));
        }
    }
    Ok(())
}

/// `I(A; B | Cond)` in bits for a zero-mean Gaussian vector with covariance `cov`.
///
/// Computed as `½ log2(det K_{A|Cond} / det K_{A|B,Cond})`, which equals the
/// symmetric three-determinant form. Rank-deficient blocks use the
/// pseudo-determinant; if `A` loses rank when `B` is revealed the result is `+inf`.
pub fn gaussian_conditional_mi(
    cov: &DMatrix<f64>,
    a: &[usize],
    b: &[usize],
    cond: &[usize],
) -> Result<f64> {
    check_covariance(cov)?;
    let n = cov.nrows();
    if let Some(&bad) = a.iter().chain(b).chain(cond).find(|&&i| i >= n) {
        return Err(Error::InvalidArgument(format!("index {bad} out of range for {n} variables")));
    }
    Ok(conditional_mi_unchecked(cov, a, b, cond))
}

pub(crate) fn conditional_mi_unchecked(
    cov: &DMatrix<f64>,
    a: &[usize],
    b: &[usize],
    cond: &[usize],
) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let outer = conditional_covariance(cov, a, cond);
    let cutoff = RANK_TOL * outer.trace().max(0.0);
    let mut both: Vec<usize> = b.to_vec();
    both.extend_from_slice(cond);
    let inner = conditional_covariance(cov, a, &both);
    let (r_outer, ld_outer) = log2_pseudo_det(&outer, cutoff);
    let (r_inner, ld_inner) = log2_pseudo_det(&inner, cutoff);
    if r_outer > r_inner {
        return f64::INFINITY;
    }
    (0.5 * (ld_outer - ld_inner)).max(0.0)
}

/// Jointly Gaussian model of `(X_1..X_L, Y_1..Y_L, Ŷ_1..Ŷ_L)` with
/// `Y_j = Σ_i h_ij X_i + Z_j` and `Ŷ_j = Y_j + e_j`, `e_j ~ N(0, q_j)`.
///
/// Descriptions with `q_j = +inf` carry no information and are silently dropped
/// from every observation set.
#[derive(Debug, Clone)]
pub struct GaussianModel {
    users: usize,
    q: Vec<f64>,
    cov: DMatrix<f64>,
}

impl GaussianModel {
    pub fn new(net: &NetworkInstance, q: &[f64]) -> Self {
        let l = net.users();
        assert_eq!(q.len(), l, "one quantization level per base-station");
        let n = 3 * l;
        let mut cov = DMatrix::zeros(n, n);
        let p = net.powers();
        for i in 0..l {
            cov[(i, i)] = p[i];
            for j in 0..l {
                let c = net.gain(i, j) * p[i];
                for off in [l, 2 * l] {
                    cov[(i, off + j)] = c;
                    cov[(off + j, i)] = c;
                }
            }
        }
        for j in 0..l {
            for k in 0..l {
                let mut v: f64 = (0..l).map(|i| net.gain(i, j) * net.gain(i, k) * p[i]).sum();
                if j == k {
                    v += net.noise();
                }
                cov[(l + j, l + k)] = v;
                cov[(l + j, 2 * l + k)] = v;
                cov[(2 * l + k, l + j)] = v;
                let quant = if j == k && q[j].is_finite() { q[j] } else { 0.0 };
                cov[(2 * l + j, 2 * l + k)] = v + quant;
            }
        }
        Self { users: l, q: q.to_vec(), cov }
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn x(&self, i: usize) -> usize {
        i
    }

    pub fn y(&self, j: usize) -> usize {
        self.users + j
    }

    /// Index of `Ŷ_j`, or `None` when `q_j` is infinite.
    pub fn yhat(&self, j: usize) -> Option<usize> {
        self.q[j].is_finite().then_some(2 * self.users + j)
    }

    pub fn xs(&self, users: &[usize]) -> Vec<usize> {
        users.iter().map(|&i| self.x(i)).collect()
    }

    pub fn yhats(&self, stations: &[usize]) -> Vec<usize> {
        stations.iter().filter_map(|&j| self.yhat(j)).collect()
    }

    pub fn mi(&self, a: &[usize], b: &[usize], cond: &[usize]) -> f64 {
        conditional_mi_unchecked(&self.cov, a, b, cond)
    }

    /// Variance of a single variable given `cond`.
    pub fn conditional_variance(&self, var: usize, cond: &[usize]) -> f64 {
        conditional_covariance(&self.cov, &[var], cond)[(0, 0)].max(0.0)
    }
}
