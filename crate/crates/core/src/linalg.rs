//! Dense vector and matrix primitives.
//!
//! Vectors are plain `[f64]` slices; [`Matrix`] is a square row-major matrix.
//! Everything here is sized for desk-scale dimensions (a few thousand at most).

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Relative tolerance used for the symmetry contract.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Sherman-Morrison denominators at or below this value are rejected.
pub const SM_DENOM_MIN: f64 = 1e-12;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Euclidean distance `||a - b||_2`.
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// Square dense matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            check_dim(dim, r.len())?;
            data.extend_from_slice(r);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.data)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.mul_vec_into(x, &mut out);
        out
    }

    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x);
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        let d = self.dim;
        let mut out = Matrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = &other.data[k * d..(k + 1) * d];
                let dst = &mut out.data[i * d..(i + 1) * d];
                for (o, b) in dst.iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `x' M x`
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        (0..self.dim).map(|i| x[i] * dot(self.row(i), x)).sum()
    }

    /// `M += scale * x x'`
    pub fn add_outer(&mut self, x: &[f64], scale: f64) {
        let d = self.dim;
        for (i, xi) in x.iter().enumerate() {
            let s = scale * xi;
            if s == 0.0 {
                continue;
            }
            axpy(s, x, &mut self.data[i * d..(i + 1) * d]);
        }
    }

    pub fn add_diag(&mut self, v: f64) {
        for i in 0..self.dim {
            self[(i, i)] += v;
        }
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn frobenius(&self) -> f64 {
        norm2(&self.data)
    }

    /// Frobenius norm of `self - other`.
    pub fn frobenius_dist(&self, other: &Matrix) -> f64 {
        dist(&self.data, &other.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn is_symmetric(&self) -> bool {
        self.max_asymmetry() <= SYMMETRY_TOL * self.max_abs().max(1.0)
    }

    fn symmetrize(&mut self) {
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let m = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = m;
                self[(j, i)] = m;
            }
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Lower Cholesky factor `A = L L'`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    pub fn factor(a: &Matrix) -> Result<Self> {
        let d = a.dim();
        let mut l = Matrix::zeros(d);
        for j in 0..d {
            let lj = &l.data[j * d..j * d + j];
            let pivot = a[(j, j)] - dot(lj, lj);
            if !(pivot > 0.0) || !pivot.is_finite() {
                return Err(Error::NotSpd);
            }
            let ljj = pivot.sqrt();
            l[(j, j)] = ljj;
            for i in (j + 1)..d {
                let s = a[(i, j)] - dot(&l.data[i * d..i * d + j], &l.data[j * d..j * d + j]);
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Self { l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let d = self.l.dim();
        // forward: L z = b
        for i in 0..d {
            let s = dot(&self.l.data[i * d..i * d + i], &x[..i]);
            x[i] = (x[i] - s) / self.l[(i, i)];
        }
        // backward: L' x = z
        for i in (0..d).rev() {
            let mut s = x[i];
            for k in (i + 1)..d {
                s -= self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
    }

    pub fn inverse(&self) -> Matrix {
        let d = self.l.dim();
        let mut inv = Matrix::zeros(d);
        let mut col = vec![0.0; d];
        for j in 0..d {
            col.iter_mut().for_each(|v| *v = 0.0);
            col[j] = 1.0;
            self.solve_in_place(&mut col);
            for i in 0..d {
                inv[(i, j)] = col[i];
            }
        }
        inv.symmetrize();
        inv
    }
}

/// Solve `A theta = b` for symmetric positive definite `A`.
pub fn solve_spd(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    check_dim(a.dim(), b.len())?;
    Ok(Cholesky::factor(a)?.solve(b))
}

pub fn inverse_spd(a: &Matrix) -> Result<Matrix> {
    Ok(Cholesky::factor(a)?.inverse())
}

/// Returns `(A + x x')^{-1}` given `inv = A^{-1}`.
pub fn sm_update(inv: &Matrix, x: &[f64]) -> Result<Matrix> {
    let mut out = inv.clone();
    let mut scratch = vec![0.0; inv.dim()];
    sm_update_in_place(&mut out, x, &mut scratch)?;
    Ok(out)
}

/// In-place Sherman-Morrison rank-1 update; `scratch` must have length `d`.
/// On error `inv` is left untouched.
pub fn sm_update_in_place(inv: &mut Matrix, x: &[f64], scratch: &mut [f64]) -> Result<()> {
    check_dim(inv.dim(), x.len())?;
    inv.mul_vec_into(x, scratch);
    let denom = 1.0 + dot(x, scratch);
    if !(denom > SM_DENOM_MIN) {
        return Err(Error::Degenerate { denom });
    }
    let d = inv.dim;
    for i in 0..d {
        let s = -scratch[i] / denom;
        if s != 0.0 {
            axpy(s, scratch, &mut inv.data[i * d..(i + 1) * d]);
        }
    }
    Ok(())
}

/// Householder reduction of a symmetric matrix to tridiagonal form.
/// Returns `(diagonal, off_diagonal)`.
fn tridiagonalize(a: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.dim();
    let mut m = a.clone();
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let col_norm = ((k + 1)..n).map(|i| m[(i, k)] * m[(i, k)]).sum::<f64>().sqrt();
        if col_norm == 0.0 {
            continue;
        }
        let alpha = if m[(k + 1, k)] > 0.0 { -col_norm } else { col_norm };
        v.iter_mut().for_each(|x| *x = 0.0);
        for i in (k + 1)..n {
            v[i] = m[(i, k)];
        }
        v[k + 1] -= alpha;
        let vn = norm2(&v);
        if vn == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= vn);
        m.mul_vec_into(&v, &mut p);
        let vp = dot(&v, &p);
        // w = p - (v'p) v; M <- M - 2 v w' - 2 w v'
        axpy(-vp, &v, &mut p);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] -= 2.0 * (v[i] * p[j] + p[i] * v[j]);
            }
        }
    }
    let diag = (0..n).map(|i| m[(i, i)]).collect();
    let off = (0..n.saturating_sub(1)).map(|i| m[(i + 1, i)]).collect();
    (diag, off)
}

/// Number of eigenvalues of the tridiagonal matrix strictly below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let e2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { e2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue of a symmetric matrix via tridiagonalization and
/// Sturm-sequence bisection.
pub fn min_eigenvalue(a: &Matrix) -> Result<f64> {
    let scale = a.max_abs().max(1.0);
    let asym = a.max_asymmetry();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric { asym });
    }
    if !a.is_finite() {
        return Err(Error::Contract("matrix has non-finite entries".into()));
    }
    let n = a.dim();
    if n == 0 {
        return Err(Error::Contract("empty matrix".into()));
    }
    let (diag, off) = tridiagonalize(a);
    let radius = |i: usize| {
        let l = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let r = if i + 1 < n { off[i].abs() } else { 0.0 };
        l + r
    };
    let mut lo = (0..n).map(|i| diag[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..n).map(|i| diag[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    let pad = f64::EPSILON * scale * 4.0;
    lo -= pad;
    hi += pad;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(&diag, &off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A symmetric matrix paired with its certified smallest eigenvalue.
#[derive(Debug, Clone)]
pub struct SpdCert {
    pub matrix: Matrix,
    pub min_eig: f64,
}

impl SpdCert {
    pub fn new(matrix: Matrix) -> Result<Self> {
        let min_eig = min_eigenvalue(&matrix)?;
        if min_eig < 0.0 {
            return Err(Error::NotSpd);
        }
        Ok(Self { matrix, min_eig })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn sm_update_identity_unit_vector() {
        let out = sm_update(&Matrix::identity(2), &[1.0, 0.0]).unwrap();
        assert!(close(out[(0, 0)], 0.5, 1e-15));
        assert!(close(out[(1, 1)], 1.0, 1e-15));
        assert_eq!(out[(0, 1)], 0.0);
    }

    #[test]
    fn sm_update_scalar() {
        let out = sm_update(&Matrix::diag(&[0.5]), &[1.0]).unwrap();
        assert!(close(out[(0, 0)], 1.0 / 3.0, 1e-15));
    }

    #[test]
    fn sm_update_rejects_degenerate_denominator() {
        // inv of a negative-definite matrix drives 1 + x'inv x to zero
        let inv = Matrix::diag(&[-1.0]);
        assert!(matches!(sm_update(&inv, &[1.0]), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn solve_spd_small_cases() {
        assert_eq!(solve_spd(&Matrix::identity(2), &[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);
        let x = solve_spd(&Matrix::diag(&[2.0, 4.0]), &[2.0, 4.0]).unwrap();
        assert!(close(x[0], 1.0, 1e-15) && close(x[1], 1.0, 1e-15));
    }

    #[test]
    fn solve_spd_rejects_indefinite() {
        let a = Matrix::diag(&[1.0, -1.0]);
        assert!(matches!(solve_spd(&a, &[1.0, 1.0]), Err(Error::NotSpd)));
    }

    #[test]
    fn min_eigenvalue_diagonal() {
        assert!(close(min_eigenvalue(&Matrix::identity(3)).unwrap(), 1.0, 1e-12));
        assert!(close(min_eigenvalue(&Matrix::diag(&[0.2, 5.0])).unwrap(), 0.2, 1e-12));
    }

    #[test]
    fn min_eigenvalue_rejects_asymmetric() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(min_eigenvalue(&a), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn min_eigenvalue_negative_and_one_by_one() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(close(min_eigenvalue(&a).unwrap(), -1.0, 1e-12));
        assert!(close(min_eigenvalue(&Matrix::diag(&[7.0])).unwrap(), 7.0, 1e-12));
    }

    #[test]
    fn spd_cert_rejects_indefinite() {
        assert!(SpdCert::new(Matrix::diag(&[1.0, -0.5])).is_err());
        let c = SpdCert::new(Matrix::diag(&[3.0, 0.5])).unwrap();
        assert!(close(c.min_eig, 0.5, 1e-12));
    }
}
