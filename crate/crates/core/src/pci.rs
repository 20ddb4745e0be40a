//! Principal coordinates of principally generic clouds and the symmetrized
//! metric SM over row-sign changes.

use serde::Serialize;

use crate::bottleneck::bottleneck;
use crate::cloud::{center, covariance, CenteredCloud, PointCloud};
use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, eigen_sym, CovarianceSpectrum, Matrix, SymMatrix};

/// Default relative threshold for eigenvalue gaps, scaled by `max(λ1, 1)`.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GenericityReport {
    pub is_generic: bool,
    /// Smallest of `λ_j − λ_{j+1}` with `λ_{n+1} = 0`.
    pub gap: f64,
    /// Smallest eigenvalue `λ_n`.
    pub smallest: f64,
    pub threshold_used: f64,
}

/// Distinct positive eigenvalues, each separated by more than
/// `rel_tol · max(λ1, 1)`.
pub fn is_principally_generic(s: &CovarianceSpectrum, rel_tol: f64) -> GenericityReport {
    let values = s.eigenvalues();
    let largest = values.first().copied().unwrap_or(0.0);
    let threshold = rel_tol * largest.max(1.0);
    let gap = s.gap();
    let smallest = values.last().copied().unwrap_or(0.0);
    GenericityReport {
        is_generic: gap > threshold && smallest > threshold,
        gap,
        smallest,
        threshold_used: threshold,
    }
}

/// An element of `Z_2^n` acting on matrix rows.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignString(Vec<i8>);

impl SignString {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return invalid("sign string entries must be +1 or -1");
        }
        Ok(Self(signs))
    }

    /// The `index`-th of the `2^n` sign strings: bit `j` set means row `j` flips.
    pub fn from_bits(n: usize, index: usize) -> Self {
        Self(
            (0..n)
                .map(|j| if index >> j & 1 == 1 { -1 } else { 1 })
                .collect(),
        )
    }

    pub fn all(n: usize) -> impl Iterator<Item = SignString> {
        (0..1usize << n).map(move |i| Self::from_bits(n, i))
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn apply(&self, m: &Matrix) -> Result<Matrix> {
        if m.rows() != self.0.len() {
            return invalid("sign string length differs from row count");
        }
        let mut out = m.clone();
        for (j, &s) in self.0.iter().enumerate() {
            if s < 0 {
                out.row_mut(j).iter_mut().for_each(|x| *x = -*x);
            }
        }
        Ok(out)
    }
}

/// Principal Coordinates Matrix: entry `(j, i)` is `p_i · v_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pcm {
    matrix: Matrix,
    spectrum: CovarianceSpectrum,
}

impl Pcm {
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn spectrum(&self) -> &CovarianceSpectrum {
        &self.spectrum
    }
}

pub fn pcm(c: &CenteredCloud, s: &CovarianceSpectrum, rel_tol: f64) -> Result<Pcm> {
    if s.dim() != c.dim() {
        return invalid("spectrum dimension differs from cloud dimension");
    }
    let report = is_principally_generic(s, rel_tol);
    if !report.is_generic {
        return Err(Error::NotGeneric(report));
    }
    let n = c.dim();
    let mut matrix = Matrix::zeros(n, c.len());
    for j in 0..n {
        let v = s.eigenvector(j);
        for (i, p) in c.points().iter().enumerate() {
            matrix[(j, i)] = dot(p, &v);
        }
    }
    Ok(Pcm {
        matrix,
        spectrum: s.clone(),
    })
}

/// Centers, diagonalizes and projects `cloud` in one go.
pub fn pcm_of(cloud: &PointCloud, rel_tol: f64) -> Result<Pcm> {
    let c = center(cloud)?;
    let s = eigen_sym(&covariance(&c))?;
    pcm(&c, &s, rel_tol)
}

/// `min_σ W∞([σ(P)], [Q])` over all `2^n` row-sign changes.
pub fn sm_matrices(p: &Matrix, q: &Matrix) -> Result<f64> {
    if p.shape() != q.shape() {
        return invalid(format!(
            "SM needs equal shapes, got {}x{} and {}x{}",
            p.rows(),
            p.cols(),
            q.rows(),
            q.cols()
        ));
    }
    let mut best = f64::INFINITY;
    for sigma in SignString::all(p.rows()) {
        best = best.min(bottleneck(&sigma.apply(p)?, q)?);
        if best == 0.0 {
            break;
        }
    }
    Ok(best)
}

/// SM between two principally generic clouds of equal size and dimension.
pub fn sm_clouds(a: &PointCloud, b: &PointCloud, rel_tol: f64) -> Result<f64> {
    if a.dim() != b.dim() || a.len() != b.len() {
        return invalid(format!(
            "SM needs equal sizes, got {} points in R^{} and {} points in R^{}",
            a.len(),
            a.dim(),
            b.len(),
            b.dim()
        ));
    }
    let pa = pcm_of(a, rel_tol)?;
    let pb = pcm_of(b, rel_tol)?;
    sm_matrices(pa.matrix(), pb.matrix())
}

/// Both sides of the covariance perturbation inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CovBound {
    /// `‖cov(A) − cov(B)‖₂`
    pub lhs_2norm: f64,
    /// `‖cov(A) − cov(B)‖∞`, the largest absolute row sum.
    pub lhs_maxnorm: f64,
    /// `n · m · W∞(A, B) · (r_A + r_B)` for the centered clouds.
    pub bound: f64,
}

pub fn cov_perturbation_bound(a: &PointCloud, b: &PointCloud) -> Result<CovBound> {
    if a.dim() != b.dim() || a.len() != b.len() {
        return invalid("covariance bound needs clouds of equal size and dimension");
    }
    let ca = center(a)?;
    let cb = center(b)?;
    let diff = covariance(&ca).matrix().sub(covariance(&cb).matrix())?;
    let lhs_2norm = spectral_norm(&diff)?;
    let lhs_maxnorm = diff.max_row_sum();
    let w = bottleneck(&ca.cloud().sample_matrix(), &cb.cloud().sample_matrix())?;
    let bound = (a.dim() * a.len()) as f64 * w * (ca.radius() + cb.radius());
    Ok(CovBound {
        lhs_2norm,
        lhs_maxnorm,
        bound,
    })
}

/// 2-norm of a symmetric matrix: its largest absolute eigenvalue.
fn spectral_norm(e: &Matrix) -> Result<f64> {
    let s = eigen_sym(&SymMatrix::new(e.clone())?)?;
    Ok(s.eigenvalues().iter().fold(0.0, |acc, x| acc.max(x.abs())))
}
