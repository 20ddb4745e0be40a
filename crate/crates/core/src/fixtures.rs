//! Named clouds with known invariants.

use std::f64::consts::PI;

use crate::cloud::PointCloud;

/// Vertices of the trapezium `T`, centered at the origin.
pub fn trapezium() -> PointCloud {
    PointCloud::new(vec![
        vec![2.0, -0.5],
        vec![1.0, 0.5],
        vec![-1.0, 0.5],
        vec![-2.0, -0.5],
    ])
    .unwrap()
}

/// Vertices of the kite `K`. Same six pairwise distances as [`trapezium`],
/// yet not isometric to it.
pub fn kite() -> PointCloud {
    PointCloud::new(vec![
        vec![2.5, 0.0],
        vec![-0.5, 1.0],
        vec![-0.5, -1.0],
        vec![-1.5, 0.0],
    ])
    .unwrap()
}

/// The four vertices `(±l1, ±l2)` of a rectangle.
pub fn rectangle(l1: f64, l2: f64) -> PointCloud {
    PointCloud::new(vec![
        vec![l1, l2],
        vec![l1, -l2],
        vec![-l1, l2],
        vec![-l1, -l2],
    ])
    .unwrap()
}

/// Vertices of a regular `m`-gon inscribed in the circle of radius `r`,
/// starting at `(r, 0)`.
///
/// Quarter-turn multiples are snapped to exact coordinates so that, for
/// example, the square is exactly `{(r,0), (0,r), (−r,0), (0,−r)}`.
pub fn regular_polygon(m: usize, r: f64) -> PointCloud {
    let points = (0..m)
        .map(|i| {
            let (s, c) = exact_sin_cos(i, m);
            vec![r * c, r * s]
        })
        .collect();
    PointCloud::new(points).unwrap()
}

/// A regular polygon plus its center.
pub fn regular_polygon_with_center(m: usize, r: f64) -> PointCloud {
    let mut points = regular_polygon(m, r).points().to_vec();
    points.push(vec![0.0, 0.0]);
    PointCloud::new(points).unwrap()
}

/// Regular tetrahedron on alternate vertices of the cube `[−1, 1]³`.
pub fn regular_tetrahedron() -> PointCloud {
    PointCloud::new(vec![
        vec![1.0, 1.0, 1.0],
        vec![1.0, -1.0, -1.0],
        vec![-1.0, 1.0, -1.0],
        vec![-1.0, -1.0, 1.0],
    ])
    .unwrap()
}

/// A chiral 4-point cloud in `R³`: not isometric to its mirror image
/// under any rigid motion.
pub fn chiral_tetrahedron() -> PointCloud {
    PointCloud::new(vec![
        vec![0.0, 0.0, 0.0],
        vec![1.0, 0.0, 0.0],
        vec![0.0, 2.0, 0.0],
        vec![0.3, 0.5, 3.0],
    ])
    .unwrap()
}

fn exact_sin_cos(i: usize, m: usize) -> (f64, f64) {
    let i = i % m;
    if (4 * i).is_multiple_of(m) {
        match 4 * i / m {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        }
    } else {
        (2.0 * PI * i as f64 / m as f64).sin_cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_is_exact() {
        assert_eq!(
            regular_polygon(4, 1.0).points(),
            &[
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![-1.0, 0.0],
                vec![0.0, -1.0]
            ]
        );
    }

    #[test]
    fn polygons_lie_on_circle() {
        for m in 3..10 {
            for p in regular_polygon(m, 2.0).points() {
                assert!((p[0].hypot(p[1]) - 2.0).abs() < 1e-14);
            }
        }
    }
}
