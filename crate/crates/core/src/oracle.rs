//! Brute-force references and random instance generators.
//!
//! Nothing here shares an algorithmic path with the optimized routines it
//! checks: bottleneck and assignment values come from enumerating
//! permutations, transport optima from enumerating the vertices of the
//! transport polytope, and isometry ground truth from orthogonal Procrustes
//! alignment (SVD) over all point correspondences.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::assignment::CostMatrix;
use crate::cloud::{center, covariance, linf, PointCloud};
use crate::error::{invalid, Error, Result};
use crate::linalg::{eigen_sym, norm, Matrix};
use crate::metrics::{lac, Orientation};
use crate::pci::is_principally_generic;
use crate::wmi::{mirror_wmi, wmi_of, Weight, WmiParams};

pub const MAX_BOTTLENECK_COLUMNS: usize = 8;
pub const MAX_ISOMETRY_POINTS: usize = 7;
pub const MAX_ASSIGNMENT_SIZE: usize = 8;
pub const MAX_GENERATION_ATTEMPTS: usize = 1000;
/// Relative eigen-gap demanded of generated generic clouds.
pub const GENERIC_MARGIN: f64 = 1e-2;

/// Calls `f` on every permutation of `0..k` (Heap's algorithm).
pub fn for_each_permutation(k: usize, mut f: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..k).collect();
    let mut c = vec![0usize; k];
    f(&perm);
    let mut i = 1;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            f(&perm);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Exhaustive bottleneck distance over all `k!` column bijections.
pub fn brute_bottleneck(p: &Matrix, q: &Matrix) -> Result<f64> {
    if p.shape() != q.shape() {
        return invalid("bottleneck needs equal shapes");
    }
    let k = p.cols();
    if k > MAX_BOTTLENECK_COLUMNS {
        return Err(Error::TooLarge {
            size: k,
            limit: MAX_BOTTLENECK_COLUMNS,
        });
    }
    let (pc, qc) = (p.columns(), q.columns());
    let mut best = f64::INFINITY;
    for_each_permutation(k, |perm| {
        let worst = perm
            .iter()
            .enumerate()
            .map(|(i, &j)| linf(&pc[i], &qc[j]))
            .fold(0.0, f64::max);
        best = best.min(worst);
    });
    Ok(if k == 0 { 0.0 } else { best })
}

/// Exhaustive minimum of `Σ c[i][perm[i]]` over all permutations.
pub fn brute_assignment(c: &CostMatrix) -> Result<f64> {
    let k = c.rows();
    if c.cols() != k {
        return invalid("assignment needs a square matrix");
    }
    if k > MAX_ASSIGNMENT_SIZE {
        return Err(Error::TooLarge {
            size: k,
            limit: MAX_ASSIGNMENT_SIZE,
        });
    }
    let mut best = f64::INFINITY;
    for_each_permutation(k, |perm| {
        let mut terms: Vec<f64> = perm.iter().enumerate().map(|(i, &j)| c.get(i, j)).collect();
        terms.sort_by(f64::total_cmp);
        best = best.min(terms.iter().sum());
    });
    Ok(if k == 0 { 0.0 } else { best })
}

/// Minimum transport cost over the vertices of the transport polytope.
///
/// Every vertex is a basic solution supported on `k + l − 1` cells; all such
/// supports are enumerated, the marginal equations solved on each, and the
/// non-negative solutions compared. Intended for `k, l ≤ 4`.
pub fn transport_polytope_min(wc: &[Weight], wd: &[Weight], cost: &CostMatrix) -> Result<f64> {
    let (k, l) = (wc.len(), wd.len());
    if cost.rows() != k || cost.cols() != l {
        return invalid("cost shape differs from distribution sizes");
    }
    if k * l > 16 {
        return Err(Error::TooLarge {
            size: k * l,
            limit: 16,
        });
    }
    let to_f = |w: &Weight| *w.numer() as f64 / *w.denom() as f64;
    let mut rhs: Vec<f64> = wc.iter().map(to_f).collect();
    rhs.extend(wd.iter().map(to_f));
    let basis_size = k + l - 1;
    let cells: Vec<(usize, usize)> = (0..k).flat_map(|i| (0..l).map(move |j| (i, j))).collect();

    let mut best = f64::INFINITY;
    let mut chosen: Vec<usize> = (0..basis_size).collect();
    loop {
        if let Some(x) = solve_support(&cells, &chosen, &rhs, k, l) {
            if x.iter().all(|&v| v >= -1e-12) {
                let c: f64 = chosen
                    .iter()
                    .zip(&x)
                    .map(|(&cell, &v)| v.max(0.0) * cost.get(cells[cell].0, cells[cell].1))
                    .sum();
                best = best.min(c);
            }
        }
        if !next_combination(&mut chosen, cells.len()) {
            break;
        }
    }
    Ok(best)
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let r = c.len();
    let mut i = r;
    while i > 0 {
        i -= 1;
        if c[i] < n - r + i {
            c[i] += 1;
            for j in i + 1..r {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Solves the `k + l` marginal equations restricted to `support` (one
/// equation is redundant). `None` when the support is not a basis.
fn solve_support(
    cells: &[(usize, usize)],
    support: &[usize],
    rhs: &[f64],
    k: usize,
    l: usize,
) -> Option<Vec<f64>> {
    let vars = support.len();
    let eqs = k + l;
    let mut a = vec![vec![0.0; vars + 1]; eqs];
    for (v, &cell) in support.iter().enumerate() {
        let (i, j) = cells[cell];
        a[i][v] = 1.0;
        a[k + j][v] = 1.0;
    }
    for (e, row) in a.iter_mut().enumerate() {
        row[vars] = rhs[e];
    }
    // Gauss–Jordan with partial pivoting.
    let mut row = 0;
    let mut pivots = Vec::with_capacity(vars);
    for col in 0..vars {
        let p = (row..eqs).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[p][col].abs() < 1e-12 {
            return None;
        }
        a.swap(row, p);
        let div = a[row][col];
        a[row].iter_mut().for_each(|x| *x /= div);
        let pivot_row = a[row].clone();
        for (r, eq) in a.iter_mut().enumerate() {
            if r != row && eq[col] != 0.0 {
                let f = eq[col];
                eq.iter_mut().zip(&pivot_row).for_each(|(x, p)| *x -= f * p);
            }
        }
        pivots.push(row);
        row += 1;
    }
    // Remaining equations must be consistent.
    if (row..eqs).any(|r| a[r][vars].abs() > 1e-9) {
        return None;
    }
    Some(pivots.iter().map(|&r| a[r][vars]).collect())
}

/// An isometry `p ↦ Q·p + t` together with the point correspondence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsometryWitness {
    pub orthogonal: Matrix,
    pub translation: Vec<f64>,
    /// Point `i` of `A` maps to point `permutation[i]` of `B`.
    pub permutation: Vec<usize>,
    pub residual: f64,
}

/// Searches all point correspondences for an isometry `A → B`, aligning each
/// by orthogonal Procrustes. Returns the first with max point error at most
/// `tol · max(r_A, r_B)`.
pub fn brute_isometry_check(
    a: &PointCloud,
    b: &PointCloud,
    tol: f64,
    orientation: Orientation,
) -> Result<Option<IsometryWitness>> {
    if a.dim() != b.dim() || a.len() != b.len() {
        return invalid("isometry check needs clouds of equal size and dimension");
    }
    let m = a.len();
    if m > MAX_ISOMETRY_POINTS {
        return Err(Error::TooLarge {
            size: m,
            limit: MAX_ISOMETRY_POINTS,
        });
    }
    let n = a.dim();
    let ca = center(a)?;
    let cb = center(b)?;
    let threshold = tol * ca.radius().max(cb.radius());
    let pa = DMatrix::from_fn(n, m, |r, c| ca.points()[c][r]);
    let pb_points = cb.points();

    let mut found = None;
    for_each_permutation(m, |perm| {
        if found.is_some() {
            return;
        }
        // cheap rejection: norms must match pointwise
        if (0..m).any(|i| (norm(&ca.points()[i]) - norm(&pb_points[perm[i]])).abs() > threshold) {
            return;
        }
        let pb = DMatrix::from_fn(n, m, |r, c| pb_points[perm[c]][r]);
        let h = &pb * pa.transpose();
        let svd = h.svd(true, true);
        let (Some(u), Some(vt)) = (svd.u, svd.v_t) else {
            return;
        };
        let mut q = &u * &vt;
        if orientation == Orientation::Rigid && q.determinant() < 0.0 {
            // flip the direction of the smallest singular value
            let smallest = (0..n)
                .min_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]))
                .unwrap_or(n - 1);
            let mut u2 = u.clone();
            u2.column_mut(smallest).neg_mut();
            q = &u2 * &vt;
        }
        let diff = &q * &pa - &pb;
        let residual = diff.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
        if residual <= threshold {
            let ca_mean = a.center_of_mass();
            let cb_mean = b.center_of_mass();
            let mut orthogonal = Matrix::zeros(n, n);
            for r in 0..n {
                for c in 0..n {
                    orthogonal[(r, c)] = q[(r, c)];
                }
            }
            let rotated = orthogonal.mul_vec(&ca_mean);
            let translation = cb_mean.iter().zip(&rotated).map(|(x, y)| x - y).collect();
            found = Some(IsometryWitness {
                orthogonal,
                translation,
                permutation: perm.to_vec(),
                residual,
            });
        }
    });
    Ok(found)
}

/// Sorted Euclidean distances between all unordered point pairs.
pub fn pairwise_distance_multiset(a: &PointCloud) -> Result<Vec<f64>> {
    if a.len() < 2 {
        return invalid("pairwise distances need at least two points");
    }
    let p = a.points();
    let mut d = Vec::with_capacity(p.len() * (p.len() - 1) / 2);
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            let diff: Vec<f64> = p[i].iter().zip(&p[j]).map(|(x, y)| x - y).collect();
            d.push(norm(&diff));
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CloudMode {
    /// Principally generic, with a margin on the eigenvalue gaps.
    Generic,
    /// A regular configuration (equal covariance eigenvalues where possible).
    Symmetric,
    /// Not isometric to its mirror image by any rigid motion.
    Chiral,
}

/// Random orthogonal matrix from Gram–Schmidt on a random square matrix.
/// `proper` forces determinant `+1`; otherwise the determinant is `−1`.
pub fn random_orthogonal<R: rand::Rng>(n: usize, rng: &mut R, proper: bool) -> Matrix {
    loop {
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut ok = true;
        for _ in 0..n {
            let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            for _ in 0..2 {
                for u in &cols {
                    let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
                }
            }
            let len = norm(&v);
            if len < 1e-3 {
                ok = false;
                break;
            }
            v.iter_mut().for_each(|x| *x /= len);
            cols.push(v);
        }
        if !ok {
            continue;
        }
        let mut q = Matrix::from_columns(&cols).expect("square");
        let det = q.determinant().expect("square");
        if (det > 0.0) != proper {
            for r in 0..n {
                q[(r, 0)] = -q[(r, 0)];
            }
        }
        return q;
    }
}

/// Applies a random isometry (orientation as requested), a random
/// translation and a random point permutation.
pub fn random_isometric_copy<R: rand::Rng>(
    a: &PointCloud,
    rng: &mut R,
    proper: bool,
) -> PointCloud {
    let n = a.dim();
    let q = random_orthogonal(n, rng, proper);
    let t: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
    let moved = a.transformed(&q, &t).expect("dimensions match");
    let mut perm: Vec<usize> = (0..a.len()).collect();
    for i in (1..perm.len()).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    moved.permuted(&perm).expect("valid permutation")
}

pub fn random_cloud(n: usize, m: usize, seed: u64, mode: CloudMode) -> Result<PointCloud> {
    if n == 0 || m == 0 {
        return invalid("dimension and point count must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match mode {
        CloudMode::Generic => {
            for _ in 0..MAX_GENERATION_ATTEMPTS {
                let cloud = uniform_cloud(n, m, &mut rng);
                let s = eigen_sym(&covariance(&center(&cloud)?))?;
                let report = is_principally_generic(&s, GENERIC_MARGIN);
                if report.is_generic {
                    return Ok(cloud);
                }
            }
            Err(Error::GenerationFailure(MAX_GENERATION_ATTEMPTS))
        }
        CloudMode::Symmetric => {
            let base = symmetric_cloud(n, m);
            let q = random_orthogonal(n, &mut rng, true);
            let t: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            base.transformed(&q, &t)
        }
        CloudMode::Chiral => {
            let params = WmiParams::default();
            for _ in 0..MAX_GENERATION_ATTEMPTS {
                let cloud = uniform_cloud(n, m, &mut rng);
                let w = wmi_of(&cloud, params)?;
                let r = center(&cloud)?.radius();
                if lac(&w, &mirror_wmi(&w))?.value > 1e-6 * r.max(1.0) {
                    return Ok(cloud);
                }
            }
            Err(Error::GenerationFailure(MAX_GENERATION_ATTEMPTS))
        }
    }
}

fn uniform_cloud<R: rand::Rng>(n: usize, m: usize, rng: &mut R) -> PointCloud {
    let points = (0..m)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    PointCloud::new(points).expect("finite coordinates")
}

/// Regular configurations: polygons in the first coordinate plane, regular
/// simplex / cross-polytope / cube in `R³` when `m` is 4, 6 or 8.
fn symmetric_cloud(n: usize, m: usize) -> PointCloud {
    if n == 3 {
        let s = 1.0 / 3f64.sqrt();
        let pts: Option<Vec<[f64; 3]>> = match m {
            4 => Some(vec![[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]]),
            6 => Some(vec![
                [1.0, 0.0, 0.0],
                [-1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, -1.0, 0.0],
                [0.0, 0.0, 1.0],
                [0.0, 0.0, -1.0],
            ]),
            8 => Some(
                (0..8)
                    .map(|b| {
                        let c = |bit: usize| if b >> bit & 1 == 1 { s } else { -s };
                        [c(0), c(1), c(2)]
                    })
                    .collect(),
            ),
            _ => None,
        };
        if let Some(pts) = pts {
            return PointCloud::new(pts.into_iter().map(|p| p.to_vec()).collect()).expect("finite");
        }
    }
    let points = (0..m)
        .map(|i| {
            let mut p = vec![0.0; n];
            let angle = 2.0 * PI * i as f64 / m as f64;
            if n == 1 {
                p[0] = i as f64 - (m as f64 - 1.0) / 2.0;
            } else {
                p[0] = angle.cos();
                p[1] = angle.sin();
            }
            p
        })
        .collect();
    PointCloud::new(points).expect("finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn heap_enumerates_all_permutations() {
        let mut seen = std::collections::BTreeSet::new();
        for_each_permutation(5, |p| {
            seen.insert(p.to_vec());
        });
        assert_eq!(seen.len(), 120);
        let mut count = 0;
        for_each_permutation(0, |_| count += 1);
        assert_eq!(count, 1);
    }

    #[test]
    fn brute_bottleneck_golden() {
        let t = fixtures::trapezium().sample_matrix();
        let k = fixtures::kite().sample_matrix();
        assert_eq!(brute_bottleneck(&t, &k).unwrap(), 1.5);
        assert_eq!(brute_bottleneck(&t, &t).unwrap(), 0.0);
        assert!(matches!(
            brute_bottleneck(&Matrix::zeros(1, 9), &Matrix::zeros(1, 9)),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn distance_multisets_of_trapezium_and_kite() {
        let dt = pairwise_distance_multiset(&fixtures::trapezium()).unwrap();
        let dk = pairwise_distance_multiset(&fixtures::kite()).unwrap();
        let (r2, r10) = (2f64.sqrt(), 10f64.sqrt());
        let expected = [r2, r2, 2.0, r10, r10, 4.0];
        for (a, b) in dt.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in dt.iter().zip(&dk) {
            assert!((a - b).abs() < 1e-12);
        }
        let two = PointCloud::new(vec![vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(pairwise_distance_multiset(&two).unwrap(), vec![5.0]);
    }

    #[test]
    fn isometry_check_finds_and_rejects() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_cloud(3, 5, 9, CloudMode::Generic).unwrap();
        let b = random_isometric_copy(&a, &mut rng, true);
        let w = brute_isometry_check(&a, &b, 1e-9, Orientation::Rigid)
            .unwrap()
            .unwrap();
        assert!(w.residual <= 1e-9 * center(&a).unwrap().radius());
        let image = a.transformed(&w.orthogonal, &w.translation).unwrap();
        for (i, p) in image.points().iter().enumerate() {
            let q = &b.points()[w.permutation[i]];
            assert!(p.iter().zip(q).all(|(x, y)| (x - y).abs() < 1e-8));
        }
        assert!(brute_isometry_check(
            &fixtures::trapezium(),
            &fixtures::kite(),
            1e-9,
            Orientation::Full
        )
        .unwrap()
        .is_none());
    }

    #[test]
    fn isometry_check_respects_orientation() {
        let a = fixtures::chiral_tetrahedron();
        let b = a.reflected();
        assert!(brute_isometry_check(&a, &b, 1e-9, Orientation::Rigid)
            .unwrap()
            .is_none());
        assert!(brute_isometry_check(&a, &b, 1e-9, Orientation::Full)
            .unwrap()
            .is_some());
        // planar clouds in R³ are never chiral
        let flat = PointCloud::new(vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.3, 2.0, 0.0],
            vec![-0.4, 0.7, 0.0],
        ])
        .unwrap();
        assert!(
            brute_isometry_check(&flat, &flat.reflected(), 1e-9, Orientation::Rigid)
                .unwrap()
                .is_some()
        );
    }

    #[test]
    fn random_clouds_by_mode() {
        let g = random_cloud(2, 4, 3, CloudMode::Generic).unwrap();
        let s = eigen_sym(&covariance(&center(&g).unwrap())).unwrap();
        assert!(is_principally_generic(&s, 1e-9).is_generic);
        assert_eq!(random_cloud(2, 4, 3, CloudMode::Generic).unwrap(), g);

        for m in 3..8 {
            let sym = random_cloud(2, m, 1, CloudMode::Symmetric).unwrap();
            let s = eigen_sym(&covariance(&center(&sym).unwrap())).unwrap();
            let ev = s.eigenvalues();
            assert!((ev[0] - ev[1]).abs() < 1e-9 * ev[0]);
        }

        let c = random_cloud(3, 4, 5, CloudMode::Chiral).unwrap();
        assert!(
            brute_isometry_check(&c, &c.reflected(), 1e-9, Orientation::Rigid)
                .unwrap()
                .is_none()
        );
        assert!(matches!(
            random_cloud(3, 3, 5, CloudMode::Chiral),
            Err(Error::GenerationFailure(_))
        ));
    }

    #[test]
    fn random_orthogonal_has_requested_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..5 {
            for proper in [true, false] {
                let q = random_orthogonal(n, &mut rng, proper);
                let gram = q.transpose().mul(&q).unwrap();
                assert!(gram.sub(&Matrix::identity(n)).unwrap().max_abs() < 1e-12);
                let det = q.determinant().unwrap();
                assert!((det - if proper { 1.0 } else { -1.0 }).abs() < 1e-12);
            }
        }
    }
}
