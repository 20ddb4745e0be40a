//! Metrics on Weighted Matrices Invariants: the Linear Assignment Cost over
//! bijections of full WMIs, and the nested Earth Mover's Distance whose
//! ground distance is itself an EMD over matrix columns.
//!
//! Every metric evaluates its two arguments in a canonical order so that
//! `d(A, B)` and `d(B, A)` are bit-identical.

use std::cmp::Ordering;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assignment::{solve_assignment, CostMatrix};
use crate::bottleneck::bottleneck;
use crate::cloud::{linf, PointCloud};
use crate::emd::{emd, FlowMatrix};
use crate::error::{invalid, Result};
use crate::linalg::Matrix;
use crate::wmi::{mirror_wmi, wmi_of, Weight, WmiDistribution, WmiParams};

/// Which isometries a comparison quotients out.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Orientation-preserving isometries (rigid motions) only.
    Rigid,
    /// All isometries, reflections included.
    #[default]
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "data")]
pub enum Witness {
    /// `perm[i]` is the column assigned to row `i`.
    Assignment(Vec<usize>),
    Flow(FlowMatrix),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricReport {
    pub value: f64,
    pub witness: Witness,
}

impl MetricReport {
    fn transposed(self) -> Self {
        let witness = match self.witness {
            Witness::Assignment(perm) => {
                let mut inv = vec![0; perm.len()];
                for (i, &j) in perm.iter().enumerate() {
                    inv[j] = i;
                }
                Witness::Assignment(inv)
            }
            Witness::Flow(f) => Witness::Flow(f.transpose()),
        };
        Self {
            value: self.value,
            witness,
        }
    }
}

/// Exact minimum-cost perfect assignment on a square cost matrix.
pub fn assignment_min_cost(c: &CostMatrix) -> Result<MetricReport> {
    let (value, perm) = solve_assignment(c)?;
    Ok(MetricReport {
        value,
        witness: Witness::Assignment(perm),
    })
}

fn cmp_f64_slices(a: &[f64], b: &[f64]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

fn cmp_matrices(a: &Matrix, b: &Matrix) -> Ordering {
    a.shape()
        .cmp(&b.shape())
        .then_with(|| cmp_f64_slices(a.as_slice(), b.as_slice()))
}

fn cmp_distributions(a: &WmiDistribution, b: &WmiDistribution) -> Ordering {
    (a.dim(), a.points(), a.sequences(), a.entries().len())
        .cmp(&(b.dim(), b.points(), b.sequences(), b.entries().len()))
        .then_with(|| {
            a.entries()
                .iter()
                .zip(b.entries())
                .map(|(x, y)| {
                    x.key()
                        .cmp(y.key())
                        .then_with(|| x.weight().cmp(&y.weight()))
                        .then_with(|| cmp_matrices(x.matrix(), y.matrix()))
                })
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
}

fn check_same_dim(a: &WmiDistribution, b: &WmiDistribution) -> Result<()> {
    if a.dim() != b.dim() {
        return invalid(format!("dimension mismatch: {} vs {}", a.dim(), b.dim()));
    }
    Ok(())
}

/// Linear Assignment Cost: the minimum over bijections between the full
/// `N`-matrix WMIs of the summed bottleneck distances.
pub fn lac(wa: &WmiDistribution, wb: &WmiDistribution) -> Result<MetricReport> {
    check_same_dim(wa, wb)?;
    if wa.points() != wb.points() || wa.sequences() != wb.sequences() {
        return invalid(format!(
            "LAC needs clouds of equal size, got {} and {} points",
            wa.points(),
            wb.points()
        ));
    }
    if cmp_distributions(wa, wb) == Ordering::Greater {
        return Ok(lac_ordered(wb, wa)?.transposed());
    }
    lac_ordered(wa, wb)
}

fn lac_ordered(wa: &WmiDistribution, wb: &WmiDistribution) -> Result<MetricReport> {
    let expand = |w: &WmiDistribution| -> Vec<usize> {
        w.multiplicities()
            .iter()
            .enumerate()
            .flat_map(|(e, &k)| std::iter::repeat_n(e, k as usize))
            .collect()
    };
    let rows = expand(wa);
    let cols = expand(wb);
    let mut entry_cost = vec![vec![0.0; wb.entries().len()]; wa.entries().len()];
    for (i, ea) in wa.entries().iter().enumerate() {
        for (j, eb) in wb.entries().iter().enumerate() {
            entry_cost[i][j] = bottleneck(ea.matrix(), eb.matrix())?;
        }
    }
    let c = CostMatrix::from_fn(rows.len(), cols.len(), |i, j| entry_cost[rows[i]][cols[j]])?;
    assignment_min_cost(&c)
}

/// Recomputes the LAC value of an assignment witness.
pub fn lac_witness_cost(wa: &WmiDistribution, wb: &WmiDistribution, perm: &[usize]) -> Result<f64> {
    fn expand(w: &WmiDistribution) -> Vec<&Matrix> {
        w.entries()
            .iter()
            .zip(w.multiplicities())
            .flat_map(|(e, k)| std::iter::repeat_n(e.matrix(), k as usize))
            .collect()
    }
    let (ra, rb) = (expand(wa), expand(wb));
    if perm.len() != ra.len() || rb.len() != ra.len() {
        return invalid("witness length differs from N");
    }
    let mut terms = perm
        .iter()
        .enumerate()
        .map(|(i, &j)| bottleneck(ra[i], rb[j]))
        .collect::<Result<Vec<f64>>>()?;
    terms.sort_by(f64::total_cmp);
    Ok(terms.iter().sum())
}

/// Which input, if any, the optimal comparison reflected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mirrored {
    None,
    First,
    Second,
}

/// A metric value up to an orientation class, with the witness of the
/// comparison that attained it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrientedReport {
    pub value: f64,
    pub mirrored: Mirrored,
    pub witness: Witness,
}

/// Evaluates `metric` in canonical argument order, adding the mirrored
/// comparison for `Full`; the result is exactly symmetric in its arguments.
fn oriented(
    wa: &WmiDistribution,
    wb: &WmiDistribution,
    orientation: Orientation,
    metric: fn(&WmiDistribution, &WmiDistribution) -> Result<MetricReport>,
) -> Result<OrientedReport> {
    let swapped = cmp_distributions(wa, wb) == Ordering::Greater;
    let (x, y) = if swapped { (wb, wa) } else { (wa, wb) };
    let mut best = metric(x, y)?;
    let mut mirrored = false;
    if orientation == Orientation::Full {
        let alt = metric(&mirror_wmi(x), y)?;
        if alt.value < best.value {
            best = alt;
            mirrored = true;
        }
    }
    let (best, mirrored) = match (swapped, mirrored) {
        (false, false) => (best, Mirrored::None),
        (false, true) => (best, Mirrored::First),
        (true, false) => (best.transposed(), Mirrored::None),
        (true, true) => (best.transposed(), Mirrored::Second),
    };
    Ok(OrientedReport {
        value: best.value,
        mirrored,
        witness: best.witness,
    })
}

/// LAC up to the given orientation class: for `Full`, the smaller of the
/// direct comparison and the comparison against the mirror image.
pub fn lac_oriented(
    wa: &WmiDistribution,
    wb: &WmiDistribution,
    orientation: Orientation,
) -> Result<f64> {
    Ok(lac_oriented_report(wa, wb, orientation)?.value)
}

pub fn lac_oriented_report(
    wa: &WmiDistribution,
    wb: &WmiDistribution,
    orientation: Orientation,
) -> Result<OrientedReport> {
    oriented(wa, wb, orientation, lac)
}

/// LAC between two clouds up to all isometries.
pub fn lac_isometry(a: &PointCloud, b: &PointCloud, params: WmiParams) -> Result<f64> {
    if a.dim() != b.dim() || a.len() != b.len() {
        return invalid(format!(
            "LAC needs equal sizes, got {} points in R^{} and {} points in R^{}",
            a.len(),
            a.dim(),
            b.len(),
            b.dim()
        ));
    }
    lac_oriented(&wmi_of(a, params)?, &wmi_of(b, params)?, Orientation::Full)
}

/// EMD between the equally weighted column distributions of two matrices
/// under the L∞ ground distance. Column counts may differ.
pub fn emd_columns(p: &Matrix, q: &Matrix) -> Result<MetricReport> {
    if p.rows() != q.rows() {
        return invalid(format!("row count mismatch: {} vs {}", p.rows(), q.rows()));
    }
    if p.cols() == 0 || q.cols() == 0 {
        return invalid("matrices must have at least one column");
    }
    if cmp_matrices(p, q) == Ordering::Greater {
        return Ok(emd_columns_ordered(q, p)?.transposed());
    }
    emd_columns_ordered(p, q)
}

fn emd_columns_ordered(p: &Matrix, q: &Matrix) -> Result<MetricReport> {
    let pc = p.columns();
    let qc = q.columns();
    let wp = vec![Ratio::new(1, pc.len() as u64); pc.len()];
    let wq = vec![Ratio::new(1, qc.len() as u64); qc.len()];
    let c = CostMatrix::from_fn(pc.len(), qc.len(), |i, j| linf(&pc[i], &qc[j]))?;
    let (value, flow) = emd(&wp, &wq, &c)?;
    Ok(MetricReport {
        value,
        witness: Witness::Flow(flow),
    })
}

/// Ground-distance matrix between WMI entries: `emd_columns` on representatives.
pub fn wmi_cost_matrix(wa: &WmiDistribution, wb: &WmiDistribution) -> Result<CostMatrix> {
    let rows = wa
        .entries()
        .par_iter()
        .map(|ea| {
            wb.entries()
                .iter()
                .map(|eb| emd_columns(ea.matrix(), eb.matrix()).map(|r| r.value))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    CostMatrix::new(Matrix::from_rows(&rows)?)
}

/// Nested EMD between two WMIs; point counts may differ.
pub fn emd_wmi(wa: &WmiDistribution, wb: &WmiDistribution) -> Result<MetricReport> {
    check_same_dim(wa, wb)?;
    if cmp_distributions(wa, wb) == Ordering::Greater {
        return Ok(emd_wmi_ordered(wb, wa)?.transposed());
    }
    emd_wmi_ordered(wa, wb)
}

fn emd_wmi_ordered(wa: &WmiDistribution, wb: &WmiDistribution) -> Result<MetricReport> {
    let weights =
        |w: &WmiDistribution| -> Vec<Weight> { w.entries().iter().map(|e| e.weight()).collect() };
    let c = wmi_cost_matrix(wa, wb)?;
    let (value, flow) = emd(&weights(wa), &weights(wb), &c)?;
    Ok(MetricReport {
        value,
        witness: Witness::Flow(flow),
    })
}

/// Nested EMD up to the given orientation class.
pub fn emd_oriented(
    wa: &WmiDistribution,
    wb: &WmiDistribution,
    orientation: Orientation,
) -> Result<f64> {
    Ok(emd_oriented_report(wa, wb, orientation)?.value)
}

pub fn emd_oriented_report(
    wa: &WmiDistribution,
    wb: &WmiDistribution,
    orientation: Orientation,
) -> Result<OrientedReport> {
    oriented(wa, wb, orientation, emd_wmi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle;

    fn wmi(c: &PointCloud) -> WmiDistribution {
        wmi_of(c, WmiParams::default()).unwrap()
    }

    /// `7/24 + √3/8`: the optimum for the unit triangle vs the unit square
    /// under L∞, cross-checked against an LP solver and the transport
    /// polytope enumeration below.
    fn triangle_square_emd() -> f64 {
        7.0 / 24.0 + 3f64.sqrt() / 8.0
    }

    #[test]
    fn triangle_vs_square_columns() {
        let tri = wmi(&fixtures::regular_polygon(3, 1.0));
        let sq = wmi(&fixtures::regular_polygon(4, 1.0));
        let (p, q) = (tri.entries()[0].matrix(), sq.entries()[0].matrix());
        let r = emd_columns(p, q).unwrap();
        assert!(
            (r.value - triangle_square_emd()).abs() < 1e-12,
            "{}",
            r.value
        );
        let Witness::Flow(f) = &r.witness else {
            panic!()
        };
        let thirds = vec![Ratio::new(1, 3); 3];
        let quarters = vec![Ratio::new(1, 4); 4];
        assert!(f.is_feasible(&thirds, &quarters));

        let c = CostMatrix::from_fn(3, 4, |i, j| linf(&p.column(i), &q.column(j))).unwrap();
        let brute = oracle::transport_polytope_min(&thirds, &quarters, &c).unwrap();
        assert!((brute - r.value).abs() < 1e-12);
    }

    #[test]
    fn nested_emd_of_single_matrix_wmis() {
        let tri = wmi(&fixtures::regular_polygon(3, 1.0));
        let sq = wmi(&fixtures::regular_polygon(4, 1.0));
        let r = emd_wmi(&tri, &sq).unwrap();
        assert!((r.value - triangle_square_emd()).abs() < 1e-12);
        assert_eq!(emd_wmi(&sq, &tri).unwrap().value, r.value);
    }

    #[test]
    fn emd_columns_permutation_invariant() {
        let p = Matrix::from_rows(&[vec![1.0, 2.0, -1.0], vec![0.0, 3.0, 4.0]]).unwrap();
        let q = Matrix::from_rows(&[vec![-1.0, 1.0, 2.0], vec![4.0, 0.0, 3.0]]).unwrap();
        assert_eq!(emd_columns(&p, &q).unwrap().value, 0.0);
        assert!(emd_columns(&p, &Matrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn lac_single_entries_is_bottleneck() {
        let tri = wmi(&fixtures::regular_polygon(3, 1.0));
        let tri2 = wmi(&fixtures::regular_polygon(3, 1.5));
        let r = lac(&tri, &tri2).unwrap();
        let expected =
            bottleneck(tri.entries()[0].matrix(), tri2.entries()[0].matrix()).unwrap() * 3.0;
        // N = 3 copies of the single entry each side
        assert!((r.value - expected).abs() < 1e-12);
    }

    #[test]
    fn lac_rejects_size_mismatch() {
        let tri = wmi(&fixtures::regular_polygon(3, 1.0));
        let sq = wmi(&fixtures::regular_polygon(4, 1.0));
        assert!(lac(&tri, &sq).is_err());
        let t3 = wmi(&fixtures::regular_tetrahedron());
        assert!(lac(&sq, &t3).is_err());
        assert!(emd_wmi(&sq, &t3).is_err());
    }

    #[test]
    fn trapezium_kite_lac_positive_and_witnessed() {
        let wt = wmi(&fixtures::trapezium());
        let wk = wmi(&fixtures::kite());
        let r = lac(&wt, &wk).unwrap();
        assert!(r.value > 1e-3);
        let Witness::Assignment(perm) = &r.witness else {
            panic!()
        };
        let again = lac_witness_cost(&wt, &wk, perm).unwrap();
        assert!((again - r.value).abs() <= 1e-12);
        let swapped = lac(&wk, &wt).unwrap();
        assert_eq!(swapped.value, r.value);
        assert!(
            lac_isometry(
                &fixtures::trapezium(),
                &fixtures::kite(),
                WmiParams::default()
            )
            .unwrap()
                > 1e-3
        );
    }

    #[test]
    fn chiral_tetrahedron_needs_mirror_branch() {
        let a = fixtures::chiral_tetrahedron();
        let b = a.reflected();
        let (wa, wb) = (wmi(&a), wmi(&b));
        assert!(lac(&wa, &wb).unwrap().value > 1e-3);
        assert!(lac_oriented(&wa, &wb, Orientation::Full).unwrap() < 1e-9);
        assert!(lac_isometry(&a, &b, WmiParams::default()).unwrap() < 1e-9);
        assert!(emd_oriented(&wa, &wb, Orientation::Rigid).unwrap() > 1e-3);
        assert!(emd_oriented(&wa, &wb, Orientation::Full).unwrap() < 1e-9);
    }

    #[test]
    fn mirror_of_planar_scalene_cloud_differs() {
        let a = PointCloud::new(vec![
            vec![0.0, 0.0],
            vec![3.0, 0.0],
            vec![0.5, 1.0],
            vec![1.0, 2.5],
        ])
        .unwrap();
        let wa = wmi(&a);
        assert!(lac(&wa, &mirror_wmi(&wa)).unwrap().value > 1e-3);
        assert!(lac(&mirror_wmi(&wa), &wmi(&a.reflected())).unwrap().value < 1e-9);
    }

    #[test]
    fn polygon_with_center_distance_shrinks() {
        let mut last = f64::INFINITY;
        for m in 4..=8 {
            let d = emd_wmi(
                &wmi(&fixtures::regular_polygon(m, 1.0)),
                &wmi(&fixtures::regular_polygon_with_center(m, 1.0)),
            )
            .unwrap()
            .value;
            assert!(d > 0.0 && d < last, "m = {m}: {d} !< {last}");
            last = d;
        }
    }
}
