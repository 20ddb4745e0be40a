//! Minimum-cost perfect assignment by shortest augmenting paths with dual
//! potentials (the Jonker–Volgenant / Hungarian family), `O(k³)`.

use crate::error::{invalid, Result};
use crate::linalg::Matrix;

/// Non-negative finite `k × l` costs.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix(Matrix);

impl CostMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.as_slice().iter().any(|&x| !x.is_finite() || x < 0.0) {
            return invalid("costs must be finite and non-negative");
        }
        Ok(Self(m))
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        Self::new(m)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn cols(&self) -> usize {
        self.0.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }
}

/// Cost of assigning row `i` to column `perm[i]`, summed in ascending order
/// of the individual terms so equal multisets give bit-equal sums.
pub fn assignment_cost(c: &CostMatrix, perm: &[usize]) -> f64 {
    let mut terms: Vec<f64> = perm.iter().enumerate().map(|(i, &j)| c.get(i, j)).collect();
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

/// Optimal permutation (`perm[i]` is the column for row `i`) and its cost.
pub fn solve_assignment(c: &CostMatrix) -> Result<(f64, Vec<usize>)> {
    let k = c.rows();
    if c.cols() != k {
        return invalid(format!(
            "assignment needs a square matrix, got {}x{}",
            k,
            c.cols()
        ));
    }
    if k == 0 {
        return Ok((0.0, vec![]));
    }
    // 1-based arrays; index 0 is the virtual column used to start each search.
    let mut u = vec![0.0; k + 1];
    let mut v = vec![0.0; k + 1];
    let mut owner = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for row in 1..=k {
        owner[0] = row;
        let mut col0 = 0;
        let mut minv = vec![f64::INFINITY; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[col0] = true;
            let i0 = owner[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0;
            for j in 1..=k {
                if used[j] {
                    continue;
                }
                let cur = c.get(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = col0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    col1 = j;
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let col1 = way[col0];
            owner[col0] = owner[col1];
            col0 = col1;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0; k];
    for j in 1..=k {
        perm[owner[j] - 1] = j - 1;
    }
    Ok((assignment_cost(c, &perm), perm))
}
