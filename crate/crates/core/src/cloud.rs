//! Point clouds, centering and covariance.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{norm, Matrix, SymMatrix};

/// Relative tolerance on the residual center of mass after centering.
pub const CENTER_TOLERANCE: f64 = 1e-12;

/// A finite multiset of `m ≥ 1` points in `R^n`. Point order carries no meaning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = points.first() else {
            return invalid("cloud has no points");
        };
        let dim = first.len();
        if dim == 0 {
            return invalid("points must have at least one coordinate");
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return invalid(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                ));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return invalid(format!("point {i} has a non-finite coordinate"));
            }
        }
        Ok(Self { dim, points })
    }

    /// Reads the columns of an `n × m` matrix as points.
    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        Self::new(m.columns())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Sample matrix: column `i` holds point `i`.
    pub fn sample_matrix(&self) -> Matrix {
        Matrix::from_columns(&self.points).expect("points share one dimension")
    }

    pub fn center_of_mass(&self) -> Vec<f64> {
        mean(&self.points, self.dim)
    }

    /// Image of the cloud under `p ↦ Q·p + t`.
    pub fn transformed(&self, orthogonal: &Matrix, translation: &[f64]) -> Result<Self> {
        if orthogonal.shape() != (self.dim, self.dim) || translation.len() != self.dim {
            return invalid("transform does not match cloud dimension");
        }
        let points = self
            .points
            .iter()
            .map(|p| {
                orthogonal
                    .mul_vec(p)
                    .into_iter()
                    .zip(translation)
                    .map(|(x, t)| x + t)
                    .collect()
            })
            .collect();
        Self::new(points)
    }

    /// Mirror image in the hyperplane orthogonal to the last axis.
    pub fn reflected(&self) -> Self {
        let mut points = self.points.clone();
        for p in &mut points {
            let last = p.len() - 1;
            p[last] = -p[last];
        }
        Self {
            dim: self.dim,
            points,
        }
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.len() {
            return invalid("permutation length differs from point count");
        }
        Self::new(perm.iter().map(|&i| self.points[i].clone()).collect())
    }
}

/// A cloud translated so its center of mass is the origin, with its radius.
#[derive(Clone, Debug, PartialEq)]
pub struct CenteredCloud {
    cloud: PointCloud,
    radius: f64,
}

impl CenteredCloud {
    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    pub fn points(&self) -> &[Vec<f64>] {
        self.cloud.points()
    }

    pub fn dim(&self) -> usize {
        self.cloud.dim()
    }

    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }

    /// `max_p |p|` over the centered points.
    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Translates `cloud` so its center of mass is the origin.
///
/// A second pass removes the rounding residue of the first, so the centered
/// points sum to at most `CENTER_TOLERANCE · r_A` for clouds that are not far
/// from the origin relative to their size.
pub fn center(cloud: &PointCloud) -> Result<CenteredCloud> {
    if cloud.is_empty() {
        return invalid("cannot center an empty cloud");
    }
    let mut points = cloud.points().to_vec();
    for _ in 0..2 {
        let c = mean(&points, cloud.dim());
        for p in &mut points {
            p.iter_mut().zip(&c).for_each(|(x, y)| *x -= y);
        }
    }
    let radius = points.iter().map(|p| norm(p)).fold(0.0, f64::max);
    Ok(CenteredCloud {
        cloud: PointCloud {
            dim: cloud.dim(),
            points,
        },
        radius,
    })
}

fn mean(points: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let mut c = vec![0.0; dim];
    for p in points {
        c.iter_mut().zip(p).for_each(|(a, x)| *a += x);
    }
    let m = points.len() as f64;
    c.iter_mut().for_each(|x| *x /= m);
    c
}

/// `P·Pᵀ / (n − 1)` for the `n × m` sample matrix `P` of a centered cloud;
/// the divisor is 1 when `n = 1`.
pub fn covariance(c: &CenteredCloud) -> SymMatrix {
    let n = c.dim();
    let divisor = if n > 1 { (n - 1) as f64 } else { 1.0 };
    let mut m = Matrix::zeros(n, n);
    for p in c.points() {
        for j in 0..n {
            for k in j..n {
                m[(j, k)] += p[j] * p[k];
            }
        }
    }
    for j in 0..n {
        for k in j..n {
            let v = m[(j, k)] / divisor;
            m[(j, k)] = v;
            m[(k, j)] = v;
        }
    }
    SymMatrix::new(m).expect("covariance is square and finite")
}

/// Minkowski (L∞) distance between two vectors.
pub fn minkowski_dist(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return invalid(format!("dimension mismatch: {} vs {}", u.len(), v.len()));
    }
    Ok(linf(u, v))
}

#[inline]
pub(crate) fn linf(u: &[f64], v: &[f64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}
