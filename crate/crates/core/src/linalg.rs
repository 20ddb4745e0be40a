//! Small dense linear algebra: row-major matrices, symmetric matrices and a
//! cyclic Jacobi eigensolver.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Off-diagonal mass (relative to the Frobenius norm) at which Jacobi stops.
pub const JACOBI_TOLERANCE: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense row-major `rows × cols` matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return invalid("rows have different lengths");
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    /// Builds a matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return invalid("columns have different lengths");
        }
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            for (i, &x) in c.iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    /// Induced ∞-norm: largest absolute row sum.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        if self.shape() != other.shape() {
            return invalid("shape mismatch in subtraction");
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Determinant by LU decomposition with partial pivoting.
    pub fn determinant(&self) -> Result<f64> {
        if self.rows != self.cols {
            return invalid("determinant of a non-square matrix");
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = 1.0;
        for k in 0..n {
            let pivot = (k..n)
                .max_by(|&x, &y| a[(x, k)].abs().total_cmp(&a[(y, k)].abs()))
                .unwrap_or(k);
            if a[(pivot, k)] == 0.0 {
                return Ok(0.0);
            }
            if pivot != k {
                for j in 0..n {
                    a.data.swap(k * n + j, pivot * n + j);
                }
                det = -det;
            }
            let akk = a[(k, k)];
            det *= akk;
            for i in k + 1..n {
                let factor = a[(i, k)] / akk;
                for j in k..n {
                    let akj = a[(k, j)];
                    a[(i, j)] -= factor * akj;
                }
            }
        }
        Ok(det)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Real symmetric `n × n` matrix. Symmetry holds exactly by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    /// Symmetrizes `m` as `(m + mᵀ) / 2`.
    pub fn new(m: Matrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return invalid(format!("matrix {}x{} is not square", m.rows(), m.cols()));
        }
        if m.as_slice().iter().any(|x| !x.is_finite()) {
            return invalid("matrix has non-finite entries");
        }
        let n = m.rows();
        let mut s = m;
        for i in 0..n {
            for j in i + 1..n {
                let avg = 0.5 * (s[(i, j)] + s[(j, i)]);
                s[(i, j)] = avg;
                s[(j, i)] = avg;
            }
        }
        Ok(Self(s))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

/// Eigenvalues sorted non-increasing with an orthonormal eigenvector basis.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceSpectrum {
    eigenvalues: Vec<f64>,
    /// Column `j` is the eigenvector for `eigenvalues[j]`.
    basis: Matrix,
}

impl CovarianceSpectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, j: usize) -> Vec<f64> {
        self.basis.column(j)
    }

    /// `min_j (λ_j − λ_{j+1})` with `λ_{n+1} = 0`.
    pub fn gap(&self) -> f64 {
        let n = self.eigenvalues.len();
        (0..n)
            .map(|j| self.eigenvalues[j] - self.eigenvalues.get(j + 1).copied().unwrap_or(0.0))
            .fold(f64::INFINITY, f64::min)
    }

    /// `V · diag(λ) · Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.dim();
        let mut out = Matrix::zeros(n, n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += lambda * self.basis[(i, k)] * self.basis[(j, k)];
                }
            }
        }
        out
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Eigenvalues come back sorted non-increasing; eigenvalues within
/// `1e-12 · max(|λ|max, 1)` below zero are clamped to zero. Each eigenvector
/// is oriented so that its largest-magnitude coordinate (lowest index on
/// ties) is positive, which makes the output a deterministic function of the
/// input.
pub fn eigen_sym(m: &SymMatrix) -> Result<CovarianceSpectrum> {
    let n = m.dim();
    let mut a = m.matrix().clone();
    let mut v = Matrix::identity(n);

    let scale = a.frobenius();
    let mut converged = scale == 0.0;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        let off = off_diagonal_norm(&a);
        if off <= JACOBI_TOLERANCE * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > JACOBI_TOLERANCE * scale {
        return Err(Error::NumericalFailure(format!(
            "Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));

    let max_abs = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
    let clamp = 1e-12 * max_abs.max(1.0);
    let mut eigenvalues = Vec::with_capacity(n);
    let mut basis = Matrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut lambda = a[(src, src)];
        if lambda < 0.0 && lambda >= -clamp {
            lambda = 0.0;
        }
        eigenvalues.push(lambda);
        let mut vec = v.column(src);
        orient(&mut vec);
        for (i, x) in vec.into_iter().enumerate() {
            basis[(i, col)] = x;
        }
    }
    Ok(CovarianceSpectrum { eigenvalues, basis })
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Flips `v` so its largest-magnitude coordinate is positive.
fn orient(v: &mut [f64]) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sym(rows: &[Vec<f64>]) -> SymMatrix {
        SymMatrix::new(Matrix::from_rows(rows).unwrap()).unwrap()
    }

    fn check_invariants(m: &SymMatrix, s: &CovarianceSpectrum) {
        let n = m.dim();
        let scale = s.eigenvalues()[0].abs().max(1.0);
        let vt = s.basis().transpose();
        let gram = vt.mul(s.basis()).unwrap();
        assert!(gram.sub(&Matrix::identity(n)).unwrap().max_abs() <= 1e-9);
        for j in 0..n {
            let v = s.eigenvector(j);
            let mv = m.matrix().mul_vec(&v);
            let resid: f64 = mv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - s.eigenvalues()[j] * b).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(resid <= 1e-9 * scale, "residual {resid}");
        }
        assert!(s.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
        let err = s.reconstruct().sub(m.matrix()).unwrap().max_abs();
        assert!(err <= 1e-9 * scale, "reconstruction error {err}");
    }

    #[test]
    fn diagonal_ten_one() {
        let m = sym(&[vec![10.0, 0.0], vec![0.0, 1.0]]);
        let s = eigen_sym(&m).unwrap();
        assert_eq!(s.eigenvalues(), &[10.0, 1.0]);
        assert_eq!(s.eigenvector(0), vec![1.0, 0.0]);
        assert_eq!(s.eigenvector(1), vec![0.0, 1.0]);
        assert_eq!(s.gap(), 1.0);
    }

    #[test]
    fn identity_has_zero_leading_gap() {
        let m = SymMatrix::new(Matrix::identity(3)).unwrap();
        let s = eigen_sym(&m).unwrap();
        assert_eq!(s.eigenvalues(), &[1.0, 1.0, 1.0]);
        assert_eq!(s.gap(), 0.0);
        check_invariants(&m, &s);
    }

    #[test]
    fn random_symmetric_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=6 {
            for _ in 0..20 {
                let mut a = Matrix::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        a[(i, j)] = rng.random_range(-5.0..5.0);
                    }
                }
                let m = SymMatrix::new(a).unwrap();
                let s = eigen_sym(&m).unwrap();
                check_invariants(&m, &s);
            }
        }
    }

    #[test]
    fn sign_convention_is_deterministic() {
        let m = sym(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let s = eigen_sym(&m).unwrap();
        let v0 = s.eigenvector(0);
        assert!((s.eigenvalues()[0] - 3.0).abs() < 1e-12);
        assert!(v0[0] > 0.0 && (v0[0] - v0[1]).abs() < 1e-12);
        let v1 = s.eigenvector(1);
        // tie in magnitude: lowest index positive
        assert!(v1[0] > 0.0 && v1[1] < 0.0);
        assert_eq!(eigen_sym(&m).unwrap(), s);
    }

    #[test]
    fn zero_matrix() {
        let m = SymMatrix::new(Matrix::zeros(3, 3)).unwrap();
        let s = eigen_sym(&m).unwrap();
        assert_eq!(s.eigenvalues(), &[0.0, 0.0, 0.0]);
        assert_eq!(s.gap(), 0.0);
    }

    #[test]
    fn determinant_matches_hand_values() {
        let m = Matrix::from_rows(&[
            vec![2.0, 0.0, 1.0],
            vec![1.0, 3.0, 2.0],
            vec![1.0, 1.0, 2.0],
        ])
        .unwrap();
        assert!((m.determinant().unwrap() - 6.0).abs() < 1e-12);
        assert_eq!(Matrix::identity(4).determinant().unwrap(), 1.0);
        let swap = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(swap.determinant().unwrap(), -1.0);
    }

    #[test]
    fn non_square_rejected() {
        assert!(SymMatrix::new(Matrix::zeros(2, 3)).is_err());
    }
}
