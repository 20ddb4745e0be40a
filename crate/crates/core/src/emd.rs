//! Earth Mover's Distance between finite weighted distributions.
//!
//! Weights are exact rationals. They are scaled to integers over their least
//! common denominator, so the transport problem becomes an integral
//! min-cost flow, solved by successive shortest paths (Dijkstra with
//! potentials). The returned flow satisfies the marginal and total-mass
//! constraints exactly.

use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use crate::assignment::CostMatrix;
use crate::error::{invalid, Result};
use crate::wmi::Weight;

/// `k × l` flow with entries `units[i][j] / denominator`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlowMatrix {
    denominator: u64,
    units: Vec<Vec<u64>>,
}

impl FlowMatrix {
    pub fn from_ratios(rows: &[Vec<Weight>]) -> Result<Self> {
        let denominator = rows
            .iter()
            .flatten()
            .fold(1u64, |acc, r| acc.lcm(r.denom()));
        let units = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|r| (*r * Ratio::from_integer(denominator)).to_integer())
                    .collect()
            })
            .collect();
        Ok(Self { denominator, units })
    }

    pub fn rows(&self) -> usize {
        self.units.len()
    }

    pub fn cols(&self) -> usize {
        self.units.first().map_or(0, Vec::len)
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn get(&self, i: usize, j: usize) -> Weight {
        Ratio::new(self.units[i][j], self.denominator)
    }

    pub fn row_sums(&self) -> Vec<Weight> {
        self.units
            .iter()
            .map(|r| Ratio::new(r.iter().sum(), self.denominator))
            .collect()
    }

    pub fn col_sums(&self) -> Vec<Weight> {
        (0..self.cols())
            .map(|j| Ratio::new(self.units.iter().map(|r| r[j]).sum(), self.denominator))
            .collect()
    }

    pub fn total(&self) -> Weight {
        Ratio::new(self.units.iter().flatten().sum(), self.denominator)
    }

    /// Row sums at most `wc`, column sums at most `wd`, total exactly one.
    pub fn is_feasible(&self, wc: &[Weight], wd: &[Weight]) -> bool {
        self.rows() == wc.len()
            && self.cols() == wd.len()
            && self.row_sums().iter().zip(wc).all(|(s, w)| s <= w)
            && self.col_sums().iter().zip(wd).all(|(s, w)| s <= w)
            && self.total() == Ratio::from_integer(1)
    }

    /// `Σ f_ij · cost_ij`.
    pub fn cost(&self, cost: &CostMatrix) -> f64 {
        let mut total = 0.0;
        for (i, row) in self.units.iter().enumerate() {
            for (j, &u) in row.iter().enumerate() {
                if u > 0 {
                    total += u as f64 * cost.get(i, j);
                }
            }
        }
        total / self.denominator as f64
    }

    pub fn transpose(&self) -> Self {
        let units = (0..self.cols())
            .map(|j| self.units.iter().map(|r| r[j]).collect())
            .collect();
        Self {
            denominator: self.denominator,
            units,
        }
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.units
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&u| u as f64 / self.denominator as f64)
                    .collect()
            })
            .collect()
    }
}

fn validate_weights(w: &[Weight], side: &str) -> Result<()> {
    if w.is_empty() {
        return invalid(format!("{side} distribution is empty"));
    }
    if w.iter().any(|x| *x.numer() == 0) {
        return invalid(format!("{side} distribution has a zero weight"));
    }
    let sum: Weight = w.iter().copied().sum();
    if sum != Ratio::from_integer(1) {
        return invalid(format!("{side} weights sum to {sum}, not 1"));
    }
    Ok(())
}

/// Optimal transport cost and flow between weights `wc` and `wd` under
/// ground costs `cost` (`wc.len() × wd.len()`).
pub fn emd(wc: &[Weight], wd: &[Weight], cost: &CostMatrix) -> Result<(f64, FlowMatrix)> {
    validate_weights(wc, "first")?;
    validate_weights(wd, "second")?;
    if cost.rows() != wc.len() || cost.cols() != wd.len() {
        return invalid(format!(
            "cost matrix is {}x{} but distributions have {} and {} objects",
            cost.rows(),
            cost.cols(),
            wc.len(),
            wd.len()
        ));
    }
    let denominator = wc
        .iter()
        .chain(wd)
        .try_fold(1u64, |acc, w| {
            let l = acc.lcm(w.denom());
            (l >= acc).then_some(l)
        })
        .ok_or_else(|| crate::Error::InvalidInput("weight denominators overflow".into()))?;
    let scale = |w: &Weight| (*w * Ratio::from_integer(denominator)).to_integer();
    let supply: Vec<u64> = wc.iter().map(scale).collect();
    let demand: Vec<u64> = wd.iter().map(scale).collect();
    let units = transport(&supply, &demand, cost);
    let flow = FlowMatrix { denominator, units };
    let value = flow.cost(cost);
    Ok((value, flow))
}

/// Successive shortest paths on the bipartite transport network
/// `source → rows → columns → sink`. Row-to-column edges are uncapacitated.
fn transport(supply: &[u64], demand: &[u64], cost: &CostMatrix) -> Vec<Vec<u64>> {
    let (k, l) = (supply.len(), demand.len());
    let nodes = k + l + 2;
    let (source, sink) = (k + l, k + l + 1);
    let mut flow = vec![vec![0u64; l]; k];
    let mut sent_from = vec![0u64; k];
    let mut sent_to = vec![0u64; l];
    let mut potential = vec![0.0f64; nodes];
    let total: u64 = supply.iter().sum();
    let mut shipped = 0u64;

    while shipped < total {
        // Dense Dijkstra over reduced costs; ties go to the lowest node index.
        let mut dist = vec![f64::INFINITY; nodes];
        let mut prev = vec![usize::MAX; nodes];
        let mut done = vec![false; nodes];
        dist[source] = 0.0;
        loop {
            let mut u = usize::MAX;
            for x in 0..nodes {
                if !done[x] && dist[x].is_finite() && (u == usize::MAX || dist[x] < dist[u]) {
                    u = x;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            let relax = |v: usize, c: f64, dist: &mut Vec<f64>, prev: &mut Vec<usize>| {
                let reduced = (c + potential[u] - potential[v]).max(0.0);
                if dist[u] + reduced < dist[v] {
                    dist[v] = dist[u] + reduced;
                    prev[v] = u;
                }
            };
            if u == source {
                for i in 0..k {
                    if sent_from[i] < supply[i] {
                        relax(i, 0.0, &mut dist, &mut prev);
                    }
                }
            } else if u < k {
                for j in 0..l {
                    relax(k + j, cost.get(u, j), &mut dist, &mut prev);
                }
            } else if u < k + l {
                let j = u - k;
                for (i, row) in flow.iter().enumerate() {
                    if row[j] > 0 {
                        relax(i, -cost.get(i, j), &mut dist, &mut prev);
                    }
                }
                if sent_to[j] < demand[j] {
                    relax(sink, 0.0, &mut dist, &mut prev);
                }
            }
        }
        debug_assert!(
            dist[sink].is_finite(),
            "balanced transport always has a path"
        );
        for x in 0..nodes {
            if dist[x].is_finite() {
                potential[x] += dist[x];
            }
        }

        // Bottleneck capacity along the path.
        let mut amount = u64::MAX;
        let mut v = sink;
        while v != source {
            let u = prev[v];
            let cap = if u == source {
                supply[v] - sent_from[v]
            } else if v == sink {
                demand[u - k] - sent_to[u - k]
            } else if u < k {
                u64::MAX
            } else {
                flow[v][u - k]
            };
            amount = amount.min(cap);
            v = u;
        }
        let mut v = sink;
        while v != source {
            let u = prev[v];
            if u == source {
                sent_from[v] += amount;
            } else if v == sink {
                sent_to[u - k] += amount;
            } else if u < k {
                flow[u][v - k] += amount;
            } else {
                flow[v][u - k] -= amount;
            }
            v = u;
        }
        shipped += amount;
    }
    flow
}
