//! Dense symmetric linear algebra.
//!
//! Everything here works on small dense matrices stored row-major. The
//! eigensolver is cyclic Jacobi, which keeps results deterministic and
//! exactly symmetric; that matters more here than raw speed.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{check_dim, Error, Result};

/// Default tolerance for PSD tests, relative to `1 + max|entry|`.
pub const DEFAULT_PSD_TOL: f64 = 1e-9;

const JACOBI_REL_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;
const RANGE_REL_TOL: f64 = 1e-8;

/// A dense real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
    asymmetry: f64,
}

impl SymmetricMatrix {
    /// Builds a matrix from rows, symmetrizing with `(M + Mᵀ)/2`.
    ///
    /// The largest `|M[i][j] - M[j][i]|` seen is kept and available from
    /// [`SymmetricMatrix::input_asymmetry`].
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("matrix must have at least one row"));
        }
        for row in rows {
            check_dim(n, row.len())?;
        }
        let mut data = vec![0.0; n * n];
        let mut asymmetry: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (rows[i][j], rows[j][i]);
                if !a.is_finite() {
                    return Err(Error::invalid(format!("non-finite entry at ({i}, {j})")));
                }
                asymmetry = asymmetry.max((a - b).abs());
                data[i * n + j] = if i == j { a } else { 0.5 * (a + b) };
            }
        }
        Ok(Self { n, data, asymmetry })
    }

    /// Builds from a row-major buffer of length `n*n`.
    pub fn from_row_major(n: usize, entries: &[f64]) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        check_dim(n * n, entries.len())?;
        let rows: Vec<Vec<f64>> = entries.chunks(n).map(|c| c.to_vec()).collect();
        Self::from_rows(&rows)
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "dimension must be positive");
        Self { n, data: vec![0.0; n * n], asymmetry: 0.0 }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = s;
        }
        m
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::invalid("diagonal must be non-empty"));
        }
        if d.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite diagonal entry"));
        }
        let n = d.len();
        let mut m = Self::zeros(n);
        for (i, &v) in d.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        Ok(m)
    }

    /// The rank-one matrix `u vᵀ + v uᵀ` scaled by `s/2`, i.e. the symmetric part of `s·u vᵀ`.
    pub fn sym_outer(u: &[f64], v: &[f64], s: f64) -> Result<Self> {
        check_dim(u.len(), v.len())?;
        let n = u.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = 0.5 * s * (u[i] * v[j] + v[i] * u[j]);
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    /// Largest asymmetry in the rows this matrix was built from.
    pub fn input_asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(|c| c.to_vec()).collect()
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.data
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius inner product `trace(Aᵀ B)`.
    pub fn frobenius_dot(&self, other: &Self) -> Result<f64> {
        check_dim(self.n, other.n)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
            asymmetry: 0.0,
        }
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, other: &Self, s: f64) -> Result<Self> {
        check_dim(self.n, other.n)?;
        Ok(Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + s * b).collect(),
            asymmetry: 0.0,
        })
    }

    /// `Σ cᵢ·Mᵢ`.
    pub fn linear_combination(matrices: &[SymmetricMatrix], coeffs: &[f64]) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::invalid("empty matrix list"))?;
        check_dim(matrices.len(), coeffs.len())?;
        let mut acc = Self::zeros(first.n);
        for (m, &c) in matrices.iter().zip(coeffs) {
            acc = acc.add_scaled(m, c)?;
        }
        Ok(acc)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, x.len())?;
        Ok(self
            .data
            .chunks(self.n)
            .map(|row| dot(row, x))
            .collect())
    }

    /// `xᵀ M x`.
    pub fn quad_form(&self, x: &[f64]) -> Result<f64> {
        Ok(dot(x, &self.mul_vec(x)?))
    }

    /// Leading `k×k` principal block.
    pub fn leading_block(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.n {
            return Err(Error::invalid(format!("block size {k} out of range 1..={}", self.n)));
        }
        let mut m = Self::zeros(k);
        for i in 0..k {
            for j in 0..k {
                m.data[i * k + j] = self.get(i, j);
            }
        }
        Ok(m)
    }

    /// `max_ij |self - other|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_dim(self.n, other.n)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}

impl Add for &SymmetricMatrix {
    type Output = SymmetricMatrix;
    fn add(self, rhs: Self) -> SymmetricMatrix {
        self.add_scaled(rhs, 1.0).expect("dimension mismatch in matrix add")
    }
}

impl Sub for &SymmetricMatrix {
    type Output = SymmetricMatrix;
    fn sub(self, rhs: Self) -> SymmetricMatrix {
        self.add_scaled(rhs, -1.0).expect("dimension mismatch in matrix sub")
    }
}

impl Mul<f64> for &SymmetricMatrix {
    type Output = SymmetricMatrix;
    fn mul(self, rhs: f64) -> SymmetricMatrix {
        self.scale(rhs)
    }
}

impl Neg for &SymmetricMatrix {
    type Output = SymmetricMatrix;
    fn neg(self) -> SymmetricMatrix {
        self.scale(-1.0)
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

impl SymEigen {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Rebuilds `V diag(λ) Vᵀ`.
    pub fn reconstruct(&self) -> SymmetricMatrix {
        let n = self.values.len();
        let mut m = SymmetricMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v: f64 = (0..n)
                    .map(|k| self.values[k] * self.vectors[k][i] * self.vectors[k][j])
                    .sum();
                m.set(i, j, v);
            }
        }
        m
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Stops when the off-diagonal Frobenius mass drops below `1e-14·‖M‖_F` or
/// after 100 sweeps. Equal eigenvalues keep their diagonal order.
pub fn sym_eigen(m: &SymmetricMatrix) -> Result<SymEigen> {
    if m.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite matrix entry"));
    }
    let n = m.n;
    let mut a = m.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let norm = m.frobenius_norm();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_REL_TOL * norm {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties keep original index order
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&k| (0..n).map(|i| v[i * n + k]).collect())
        .collect();
    Ok(SymEigen { values, vectors })
}

/// Smallest eigenvalue.
pub fn min_eigenvalue(m: &SymmetricMatrix) -> Result<f64> {
    Ok(sym_eigen(m)?.min())
}

/// Scale used by all relative tolerances on a matrix: `1 + max|entry|`.
pub fn psd_scale(m: &SymmetricMatrix) -> f64 {
    1.0 + m.max_abs()
}

/// `true` iff `λ_min(M) ≥ -tol·(1 + max|entry|)`.
pub fn is_psd(m: &SymmetricMatrix, tol: f64) -> Result<bool> {
    if !(tol >= 0.0) {
        return Err(Error::invalid("tolerance must be nonnegative"));
    }
    Ok(min_eigenvalue(m)? >= -tol * psd_scale(m))
}

/// Minimal-norm least squares: `argmin ‖Σ cᵢ colᵢ − rhs‖₂` with smallest `‖c‖`.
///
/// Returns the coefficients and the residual norm.
pub fn least_squares_solve(columns: &[Vec<f64>], rhs: &[f64]) -> Result<(Vec<f64>, f64)> {
    if columns.is_empty() {
        return Err(Error::invalid("least squares needs at least one column"));
    }
    let m = rhs.len();
    for col in columns {
        check_dim(m, col.len())?;
    }
    if rhs.iter().chain(columns.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite least squares data"));
    }
    let k = columns.len();
    let mut gram = SymmetricMatrix::zeros(k);
    for i in 0..k {
        for j in i..k {
            gram.set(i, j, dot(&columns[i], &columns[j]));
        }
    }
    let atb: Vec<f64> = columns.iter().map(|c| dot(c, rhs)).collect();
    let eig = sym_eigen(&gram)?;
    let cutoff = 1e-12 * eig.max().abs().max(f64::MIN_POSITIVE);
    let mut coeffs = vec![0.0; k];
    for (lam, vec) in eig.values.iter().zip(&eig.vectors) {
        if *lam > cutoff {
            let w = dot(vec, &atb) / lam;
            for (c, vi) in coeffs.iter_mut().zip(vec) {
                *c += w * vi;
            }
        }
    }
    let mut resid = rhs.iter().map(|v| -v).collect::<Vec<_>>();
    for (col, c) in columns.iter().zip(&coeffs) {
        axpy(*c, col, &mut resid);
    }
    Ok((coeffs, norm2(&resid)))
}

/// Infimum over `x` of `½xᵀQx + cᵀx + r`, or `-∞` when unbounded below.
///
/// Eigenvalues below the PSD tolerance count as zero; `c` must lie in the
/// range of `Q` up to `1e-8·(1 + ‖c‖)`.
pub fn convex_quadratic_infimum(q: &SymmetricMatrix, c: &[f64], r: f64, tol: f64) -> Result<f64> {
    check_dim(q.dim(), c.len())?;
    if !r.is_finite() || c.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite quadratic data"));
    }
    let eig = sym_eigen(q)?;
    let thr = tol * psd_scale(q);
    if eig.min() < -thr {
        return Ok(f64::NEG_INFINITY);
    }
    let mut null_proj = 0.0;
    let mut value = r;
    for (lam, v) in eig.values.iter().zip(&eig.vectors) {
        let p = dot(v, c);
        if *lam <= thr {
            null_proj += p * p;
        } else {
            value -= 0.5 * p * p / lam;
        }
    }
    if null_proj.sqrt() > RANGE_REL_TOL * (1.0 + norm2(c)) {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(value)
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += s·x`.
#[inline]
pub fn axpy(s: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}
