use isoclouds::assignment::CostMatrix;
use isoclouds::bottleneck::bottleneck;
use isoclouds::cloud::{center, PointCloud};
use isoclouds::linalg::Matrix;
use isoclouds::metrics::{emd_columns, emd_oriented, lac, lac_oriented, Orientation};
use isoclouds::oracle::{brute_bottleneck, random_isometric_copy, transport_polytope_min};
use isoclouds::pci::{pcm_of, sm_clouds, sm_matrices, DEFAULT_REL_TOL};
use isoclouds::wmi::{mirror_wmi, wmi_of, WmiParams};
use num_rational::Ratio;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cloud(n: usize, m: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = PointCloud> {
    prop::collection::vec(prop::collection::vec(-4.0..4.0f64, n), m)
        .prop_map(|pts| PointCloud::new(pts).unwrap())
}

fn column_pair() -> impl Strategy<Value = (Matrix, Matrix)> {
    (1usize..=3, 1usize..=6).prop_flat_map(|(rows, k)| {
        let m = move || {
            prop::collection::vec(prop::collection::vec(-3.0..3.0f64, rows), k)
                .prop_map(|cols| Matrix::from_columns(&cols).unwrap())
        };
        (m(), m())
    })
}

fn params() -> WmiParams {
    WmiParams::default()
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 48,
        rng_seed: RngSeed::Fixed(0x15_0c10),
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn bottleneck_matches_enumeration((p, q) in column_pair()) {
        prop_assert_eq!(bottleneck(&p, &q).unwrap(), brute_bottleneck(&p, &q).unwrap());
    }

    #[test]
    fn bottleneck_is_a_metric_on_column_clouds((p, q) in column_pair()) {
        let d = bottleneck(&p, &q).unwrap();
        prop_assert_eq!(d, bottleneck(&q, &p).unwrap());
        prop_assert_eq!(bottleneck(&p, &p).unwrap(), 0.0);
        prop_assert!(d >= 0.0);
    }

    #[test]
    fn sm_ignores_row_signs((p, q) in column_pair()) {
        let mut flipped = p.clone();
        for x in flipped.row_mut(0) {
            *x = -*x;
        }
        prop_assert_eq!(sm_matrices(&p, &q).unwrap(), sm_matrices(&flipped, &q).unwrap());
    }

    #[test]
    fn column_emd_matches_polytope_vertices(
        (p, q) in (1usize..=2, 1usize..=4, 1usize..=4).prop_flat_map(|(rows, k, l)| {
            (
                prop::collection::vec(prop::collection::vec(-2.0..2.0f64, rows), k),
                prop::collection::vec(prop::collection::vec(-2.0..2.0f64, rows), l),
            )
        })
    ) {
        let (pm, qm) = (Matrix::from_columns(&p).unwrap(), Matrix::from_columns(&q).unwrap());
        let fast = emd_columns(&pm, &qm).unwrap().value;
        let linf = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let c = CostMatrix::from_fn(p.len(), q.len(), |i, j| linf(&p[i], &q[j])).unwrap();
        let wp = vec![Ratio::new(1, p.len() as u64); p.len()];
        let wq = vec![Ratio::new(1, q.len() as u64); q.len()];
        let slow = transport_polytope_min(&wp, &wq, &c).unwrap();
        prop_assert!((fast - slow).abs() < 1e-12, "{} vs {}", fast, slow);
    }

    #[test]
    fn wmi_weights_sum_to_one(a in cloud(2, 1..=7)) {
        let w = wmi_of(&a, params()).unwrap();
        prop_assert_eq!(w.total_weight(), Ratio::from_integer(1));
        prop_assert_eq!(w.multiplicities().iter().sum::<u64>(), w.sequences());
    }

    #[test]
    fn wmi_weights_sum_to_one_in_space(a in cloud(3, 2..=5)) {
        let w = wmi_of(&a, params()).unwrap();
        prop_assert_eq!(w.total_weight(), Ratio::from_integer(1));
    }

    #[test]
    fn mirror_is_an_involution(a in cloud(3, 2..=5)) {
        let w = wmi_of(&a, params()).unwrap();
        prop_assert_eq!(mirror_wmi(&mirror_wmi(&w)), w);
    }

    #[test]
    fn lac_vanishes_under_rigid_motion(a in cloud(2, 3..=6), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_isometric_copy(&a, &mut rng, true);
        let tol = 1e-9 * center(&a).unwrap().radius().max(1e-300);
        let d = lac(&wmi_of(&a, params()).unwrap(), &wmi_of(&b, params()).unwrap()).unwrap().value;
        prop_assert!(d <= tol, "{} > {}", d, tol);
    }

    #[test]
    fn full_orientation_absorbs_reflections(a in cloud(3, 4..=5), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_isometric_copy(&a, &mut rng, false);
        let (wa, wb) = (wmi_of(&a, params()).unwrap(), wmi_of(&b, params()).unwrap());
        let tol = 1e-9 * center(&a).unwrap().radius();
        prop_assert!(lac_oriented(&wa, &wb, Orientation::Full).unwrap() <= tol);
        prop_assert!(emd_oriented(&wa, &wb, Orientation::Full).unwrap() <= tol);
    }

    #[test]
    fn oriented_metrics_are_exactly_symmetric(a in cloud(2, 3..=5), b in cloud(2, 3..=5)) {
        let (wa, wb) = (wmi_of(&a, params()).unwrap(), wmi_of(&b, params()).unwrap());
        for o in [Orientation::Rigid, Orientation::Full] {
            let ab = emd_oriented(&wa, &wb, o).unwrap();
            prop_assert_eq!(ab.to_bits(), emd_oriented(&wb, &wa, o).unwrap().to_bits());
            if a.len() == b.len() {
                let ab = lac_oriented(&wa, &wb, o).unwrap();
                prop_assert_eq!(ab.to_bits(), lac_oriented(&wb, &wa, o).unwrap().to_bits());
            }
        }
    }

    #[test]
    fn full_lac_never_exceeds_rigid(a in cloud(2, 3..=5), b in cloud(2, 3..=5)) {
        prop_assume!(a.len() == b.len());
        let (wa, wb) = (wmi_of(&a, params()).unwrap(), wmi_of(&b, params()).unwrap());
        prop_assert!(
            lac_oriented(&wa, &wb, Orientation::Full).unwrap()
                <= lac_oriented(&wa, &wb, Orientation::Rigid).unwrap()
        );
    }

    #[test]
    fn sm_vanishes_on_permuted_generic_clouds(a in cloud(2, 3..=6), seed in any::<u64>()) {
        prop_assume!(pcm_of(&a, 1e-2).is_ok());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_isometric_copy(&a, &mut rng, seed % 2 == 0);
        let d = sm_clouds(&a, &b, DEFAULT_REL_TOL).unwrap();
        prop_assert!(d <= 1e-9 * center(&a).unwrap().radius(), "{}", d);
    }
}
