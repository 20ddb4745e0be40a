//! Exact bottleneck distance between equal-size column clouds.
//!
//! All `k²` pairwise L∞ distances are sorted and deduplicated; a binary
//! search finds the smallest threshold at which the bipartite graph of pairs
//! within the threshold has a perfect matching (Hopcroft–Karp). The result is
//! always one of the pairwise distances.

use std::collections::VecDeque;

use crate::cloud::linf;
use crate::error::{invalid, Result};
use crate::linalg::Matrix;

/// A matrix read as the unordered set of its columns.
pub type ColumnCloud = Matrix;

/// Optimal bottleneck value with a matching that realizes it.
#[derive(Clone, Debug, PartialEq)]
pub struct BottleneckMatch {
    pub value: f64,
    /// `matching[i]` is the column of `Q` paired with column `i` of `P`.
    pub matching: Vec<usize>,
}

pub fn bottleneck(p: &ColumnCloud, q: &ColumnCloud) -> Result<f64> {
    Ok(bottleneck_match(p, q)?.value)
}

pub fn bottleneck_match(p: &ColumnCloud, q: &ColumnCloud) -> Result<BottleneckMatch> {
    check_shapes(p, q)?;
    let k = p.cols();
    if k == 0 {
        return Ok(BottleneckMatch {
            value: 0.0,
            matching: vec![],
        });
    }
    let pc = p.columns();
    let qc = q.columns();
    let dist: Vec<Vec<f64>> = pc
        .iter()
        .map(|u| qc.iter().map(|v| linf(u, v)).collect())
        .collect();

    let mut candidates: Vec<f64> = dist.iter().flatten().copied().collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // Every bijection is feasible at the largest distance.
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching(&dist, candidates[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let matching =
        perfect_matching(&dist, candidates[lo]).expect("search ends at a feasible threshold");
    let value = matching
        .iter()
        .enumerate()
        .map(|(i, &j)| dist[i][j])
        .fold(0.0, f64::max);
    Ok(BottleneckMatch { value, matching })
}

fn check_shapes(p: &Matrix, q: &Matrix) -> Result<()> {
    if p.shape() != q.shape() {
        return invalid(format!(
            "bottleneck needs equal shapes, got {}x{} and {}x{}",
            p.rows(),
            p.cols(),
            q.rows(),
            q.cols()
        ));
    }
    Ok(())
}

const FREE: usize = usize::MAX;

/// Hopcroft–Karp on the graph `{(i, j) : dist[i][j] ≤ threshold}`. Returns
/// the left-to-right assignment when it is perfect.
fn perfect_matching(dist: &[Vec<f64>], threshold: f64) -> Option<Vec<usize>> {
    let k = dist.len();
    let adj: Vec<Vec<usize>> = dist
        .iter()
        .map(|row| (0..k).filter(|&j| row[j] <= threshold).collect())
        .collect();
    if adj.iter().any(Vec::is_empty) {
        return None;
    }
    let mut match_left = vec![FREE; k];
    let mut match_right = vec![FREE; k];
    let mut layer = vec![usize::MAX; k];
    let mut size = 0;

    loop {
        // BFS from free left vertices builds the layered graph.
        let mut queue = VecDeque::new();
        for u in 0..k {
            if match_left[u] == FREE {
                layer[u] = 0;
                queue.push_back(u);
            } else {
                layer[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = match_right[v];
                if w == FREE {
                    found = true;
                } else if layer[w] == usize::MAX {
                    layer[w] = layer[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }
        let mut next = vec![0usize; k];
        for u in 0..k {
            if match_left[u] == FREE
                && augment(
                    u,
                    &adj,
                    &mut layer,
                    &mut next,
                    &mut match_left,
                    &mut match_right,
                )
            {
                size += 1;
            }
        }
    }
    (size == k).then_some(match_left)
}

fn augment(
    u: usize,
    adj: &[Vec<usize>],
    layer: &mut [usize],
    next: &mut [usize],
    match_left: &mut [usize],
    match_right: &mut [usize],
) -> bool {
    while next[u] < adj[u].len() {
        let v = adj[u][next[u]];
        next[u] += 1;
        let w = match_right[v];
        let ok = w == FREE
            || (layer[w] == layer[u] + 1 && augment(w, adj, layer, next, match_left, match_right));
        if ok {
            match_left[u] = v;
            match_right[v] = u;
            return true;
        }
    }
    layer[u] = usize::MAX;
    false
}
