//! Weighted Matrices Invariant: one matrix of point coordinates per ordered
//! sequence of `n − 1` distinct points, expressed in the positively oriented
//! orthonormal basis that the sequence spans, with column-permutation
//! equivalent matrices collapsed into a single weighted entry.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::Serialize;

use crate::cloud::{center, CenteredCloud, PointCloud};
use crate::error::{invalid, Result};
use crate::linalg::{dot, norm, Matrix};

pub const DEFAULT_QUANTUM: f64 = 1e-9;
/// Linear dependence threshold for sequence points, relative to the radius.
pub const DEFAULT_TAU_DEP: f64 = 1e-9;

pub type Weight = Ratio<u64>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WmiParams {
    pub quantum: f64,
    pub tau_dep: f64,
}

impl Default for WmiParams {
    fn default() -> Self {
        Self {
            quantum: DEFAULT_QUANTUM,
            tau_dep: DEFAULT_TAU_DEP,
        }
    }
}

/// Quantized entries of a matrix with columns in canonical order. Two
/// matrices that agree up to column order (and quantization) share a key.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalKey {
    rows: usize,
    cols: usize,
    /// Column-major.
    cells: Vec<i64>,
}

fn quantize(x: f64, quantum: f64) -> i64 {
    // saturating cast; finite inputs only
    (x / quantum).round_ties_even() as i64
}

/// Sorts columns lexicographically by their quantized entries (ties broken by
/// the raw values) and returns the reordered matrix with its key.
pub fn canonicalize_matrix(m: &Matrix, quantum: f64) -> (Matrix, CanonicalKey) {
    let cols = m.columns();
    let keys: Vec<Vec<i64>> = cols
        .iter()
        .map(|c| c.iter().map(|&x| quantize(x, quantum)).collect())
        .collect();
    let mut order: Vec<usize> = (0..cols.len()).collect();
    order.sort_by(|&a, &b| {
        keys[a].cmp(&keys[b]).then_with(|| {
            cols[a]
                .iter()
                .zip(&cols[b])
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let sorted: Vec<Vec<f64>> = order.iter().map(|&i| cols[i].clone()).collect();
    let matrix = if sorted.is_empty() {
        Matrix::zeros(m.rows(), 0)
    } else {
        Matrix::from_columns(&sorted).expect("columns share a length")
    };
    let key = CanonicalKey {
        rows: m.rows(),
        cols: m.cols(),
        cells: order
            .iter()
            .flat_map(|&i| keys[i].iter().copied())
            .collect(),
    };
    (matrix, key)
}

/// Orthonormal, positively oriented basis spanned by a point sequence.
#[derive(Clone, Debug, PartialEq)]
pub enum SequenceBasis {
    /// Column `j` is `v_j`.
    Oriented(Matrix),
    Degenerate,
}

/// Gram–Schmidt on the sequence points, completed by the unique unit vector
/// that makes `det(v_1, …, v_n) = +1`.
pub fn basis_from_sequence(
    c: &CenteredCloud,
    seq: &[usize],
    tau_dep: f64,
) -> Result<SequenceBasis> {
    let n = c.dim();
    if seq.len() + 1 != n {
        return invalid(format!(
            "sequence of {} points does not define a basis of R^{n}",
            seq.len()
        ));
    }
    for (k, &i) in seq.iter().enumerate() {
        if i >= c.len() {
            return invalid(format!(
                "point index {i} out of range for {} points",
                c.len()
            ));
        }
        if seq[..k].contains(&i) {
            return invalid(format!("point index {i} repeated in sequence"));
        }
    }
    let threshold = tau_dep * c.radius();
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    for &i in seq {
        let mut r = c.points()[i].clone();
        for v in &vectors {
            let proj = dot(&r, v);
            r.iter_mut().zip(v).for_each(|(x, y)| *x -= proj * y);
        }
        let len = norm(&r);
        if len <= threshold || len == 0.0 {
            return Ok(SequenceBasis::Degenerate);
        }
        r.iter_mut().for_each(|x| *x /= len);
        vectors.push(r);
    }
    vectors.push(completing_vector(&vectors, n)?);
    Ok(SequenceBasis::Oriented(Matrix::from_columns(&vectors)?))
}

/// Cofactor expansion along the missing last column: the result is orthogonal
/// to every given vector and `det(v_1, …, v_{n−1}, result) = |result|² > 0`.
fn completing_vector(vectors: &[Vec<f64>], n: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; n];
    for (k, o) in out.iter_mut().enumerate() {
        let mut minor = Matrix::zeros(n - 1, n - 1);
        for (r, row) in (0..n).filter(|&r| r != k).enumerate() {
            for (col, v) in vectors.iter().enumerate() {
                minor[(r, col)] = v[row];
            }
        }
        let sign = if (k + n - 1).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        *o = sign * if n == 1 { 1.0 } else { minor.determinant()? };
    }
    let len = norm(&out);
    out.iter_mut().for_each(|x| *x /= len);
    Ok(out)
}

/// Coordinates of every cloud point in `basis`; zero for a degenerate basis.
pub fn sequence_matrix(c: &CenteredCloud, basis: &SequenceBasis) -> Matrix {
    let n = c.dim();
    let mut m = Matrix::zeros(n, c.len());
    if let SequenceBasis::Oriented(v) = basis {
        for j in 0..n {
            let vj = v.column(j);
            for (i, p) in c.points().iter().enumerate() {
                m[(j, i)] = dot(p, &vj);
            }
        }
    }
    m
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedMatrix {
    #[serde(serialize_with = "serialize_matrix")]
    matrix: Matrix,
    #[serde(skip)]
    key: CanonicalKey,
    #[serde(serialize_with = "serialize_weight")]
    weight: Weight,
}

impl WeightedMatrix {
    /// Representative with columns in canonical order.
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn key(&self) -> &CanonicalKey {
        &self.key
    }

    pub fn weight(&self) -> Weight {
        self.weight
    }
}

fn serialize_matrix<S: serde::Serializer>(
    m: &Matrix,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(m.to_rows())
}

fn serialize_weight<S: serde::Serializer>(
    w: &Weight,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", w.numer(), w.denom()))
}

/// Entries sorted by canonical key; weights sum to exactly one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WmiDistribution {
    dim: usize,
    points: usize,
    sequences: u64,
    #[serde(skip)]
    quantum: f64,
    entries: Vec<WeightedMatrix>,
}

impl WmiDistribution {
    pub fn entries(&self) -> &[WeightedMatrix] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Point count `m` of the source cloud.
    pub fn points(&self) -> usize {
        self.points
    }

    /// Number `N` of ordered sequences the distribution was built from.
    pub fn sequences(&self) -> u64 {
        self.sequences
    }

    pub fn quantum(&self) -> f64 {
        self.quantum
    }

    pub fn total_weight(&self) -> Weight {
        self.entries.iter().map(|e| e.weight).sum()
    }

    /// Multiplicity of each entry among the `N` sequence matrices.
    pub fn multiplicities(&self) -> Vec<u64> {
        self.entries
            .iter()
            .map(|e| (e.weight * Ratio::from_integer(self.sequences)).to_integer())
            .collect()
    }

    fn from_counts(
        dim: usize,
        points: usize,
        sequences: u64,
        quantum: f64,
        groups: BTreeMap<CanonicalKey, (Matrix, u64)>,
    ) -> Self {
        let entries = groups
            .into_iter()
            .map(|(key, (matrix, count))| WeightedMatrix {
                matrix,
                key,
                weight: Ratio::new(count, sequences),
            })
            .collect();
        Self {
            dim,
            points,
            sequences,
            quantum,
            entries,
        }
    }
}

/// `m (m − 1) ⋯ (m − n + 2)`: ordered selections of `n − 1` distinct points.
pub fn sequence_count(m: usize, n: usize) -> Result<u64> {
    if m + 1 < n {
        return invalid(format!(
            "{m} points cannot form sequences of length {}",
            n - 1
        ));
    }
    (0..n.saturating_sub(1)).try_fold(1u64, |acc, k| {
        acc.checked_mul((m - k) as u64)
            .ok_or_else(|| crate::Error::InvalidInput("sequence count overflows".into()))
    })
}

fn collect(
    c: &CenteredCloud,
    sequences: u64,
    quantum: f64,
    matrices: impl Iterator<Item = Result<Matrix>>,
) -> Result<WmiDistribution> {
    let mut groups: BTreeMap<CanonicalKey, (Matrix, u64)> = BTreeMap::new();
    for m in matrices {
        let (canon, key) = canonicalize_matrix(&m?, quantum);
        groups.entry(key).or_insert((canon, 0)).1 += 1;
    }
    Ok(WmiDistribution::from_counts(
        c.dim(),
        c.len(),
        sequences,
        quantum,
        groups,
    ))
}

/// WMI in the plane: one matrix per point `p_i`, in the basis with `v_1`
/// along `p_i` and `v_2` its anticlockwise quarter turn.
pub fn wmi_2d(c: &CenteredCloud, params: WmiParams) -> Result<WmiDistribution> {
    if c.dim() != 2 {
        return invalid(format!("planar WMI needs dimension 2, got {}", c.dim()));
    }
    let threshold = params.tau_dep * c.radius();
    let matrices = c.points().iter().map(|p| {
        let len = norm(p);
        let mut m = Matrix::zeros(2, c.len());
        if len > threshold && len > 0.0 {
            let (x, y) = (p[0] / len, p[1] / len);
            for (i, q) in c.points().iter().enumerate() {
                m[(0, i)] = q[0] * x + q[1] * y;
                m[(1, i)] = -q[0] * y + q[1] * x;
            }
        }
        Ok(m)
    });
    collect(c, c.len() as u64, params.quantum, matrices)
}

/// WMI in any dimension.
pub fn wmi_general(c: &CenteredCloud, params: WmiParams) -> Result<WmiDistribution> {
    let n = c.dim();
    if n == 2 {
        return wmi_2d(c, params);
    }
    let sequences = sequence_count(c.len(), n)?;
    let matrices = OrderedSequences::new(c.len(), n - 1).map(|seq| {
        let basis = basis_from_sequence(c, &seq, params.tau_dep)?;
        Ok(sequence_matrix(c, &basis))
    });
    collect(c, sequences, params.quantum, matrices)
}

/// Centers `cloud` and builds its WMI.
pub fn wmi_of(cloud: &PointCloud, params: WmiParams) -> Result<WmiDistribution> {
    wmi_general(&center(cloud)?, params)
}

/// WMI of the mirror image: every matrix has its last row negated.
pub fn mirror_wmi(w: &WmiDistribution) -> WmiDistribution {
    let mut groups: BTreeMap<CanonicalKey, (Matrix, u64)> = BTreeMap::new();
    for (e, count) in w.entries.iter().zip(w.multiplicities()) {
        let mut m = e.matrix.clone();
        if m.rows() > 0 {
            let last = m.rows() - 1;
            m.row_mut(last).iter_mut().for_each(|x| *x = -*x);
        }
        let (canon, key) = canonicalize_matrix(&m, w.quantum);
        groups.entry(key).or_insert((canon, 0)).1 += count;
    }
    WmiDistribution::from_counts(w.dim, w.points, w.sequences, w.quantum, groups)
}

/// Ordered tuples of `len` distinct indices below `m`, lexicographically.
struct OrderedSequences {
    m: usize,
    current: Option<Vec<usize>>,
}

impl OrderedSequences {
    fn new(m: usize, len: usize) -> Self {
        let current = (len <= m).then(|| (0..len).collect());
        Self { m, current }
    }

    fn advance(seq: &mut [usize], m: usize) -> bool {
        let len = seq.len();
        let mut pos = len;
        while pos > 0 {
            pos -= 1;
            let mut next = seq[pos] + 1;
            while next < m && seq[..pos].contains(&next) {
                next += 1;
            }
            if next < m {
                seq[pos] = next;
                // refill the tail with the smallest unused indices
                let mut candidate = 0;
                for k in pos + 1..len {
                    while seq[..k].contains(&candidate) {
                        candidate += 1;
                    }
                    seq[k] = candidate;
                    candidate += 1;
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for OrderedSequences {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let mut next = out.clone();
        self.current = Self::advance(&mut next, self.m).then_some(next);
        Some(out)
    }
}
