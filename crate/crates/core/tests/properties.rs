use hypfill_core::filling::FillingGraph;
use hypfill_core::metric_space::{FiniteMetricSpace, PointMetric};
use hypfill_core::rho_metric::drho_all_pairs;
use hypfill_core::verifier::{sample_cells, CellSums};
use hypfill_core::weights::{DiscreteMeasure, WeightAssignment};
use proptest::prelude::*;

fn cloud() -> impl Strategy<Value = FiniteMetricSpace> {
    prop::collection::vec(prop::collection::vec(0.0f64..1.0, 2), 2..40).prop_filter_map("coincident points", |pts| {
        FiniteMetricSpace::from_points(&pts, PointMetric::Euclidean, "cloud", Some(0.9)).ok()
    })
}

/// Symmetric matrices with entries on a 1/64 grid so sums are exact.
fn grid_matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (3usize..7).prop_flat_map(|n| {
        prop::collection::vec(4u32..58, n * (n - 1) / 2).prop_map(move |upper| {
            let mut m = vec![vec![0.0; n]; n];
            let mut it = upper.into_iter();
            for i in 0..n {
                for j in i + 1..n {
                    let d = it.next().unwrap() as f64 / 64.0;
                    m[i][j] = d;
                    m[j][i] = d;
                }
            }
            m
        })
    })
}

fn triangle_holds(m: &[Vec<f64>]) -> bool {
    let n = m.len();
    (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| m[i][k] <= m[i][j] + m[j][k])))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn triangle_check_matches_brute_force(m in grid_matrix()) {
        prop_assert_eq!(FiniteMetricSpace::from_matrix(&m, "grid").is_ok(), triangle_holds(&m));
    }

    #[test]
    fn snowflakes_compose(space in cloud(), a in 0.2f64..1.0, b in 0.2f64..1.0) {
        let twice = space.snowflake(a).unwrap().snowflake(b).unwrap();
        let once = space.snowflake(a * b).unwrap();
        for i in 0..space.len() {
            for j in 0..space.len() {
                prop_assert!((twice.dist(i, j) - once.dist(i, j)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn normalizing_is_idempotent(space in cloud(), t in 0.1f64..0.99) {
        let once = space.normalize_diameter(t).unwrap();
        let twice = once.normalize_diameter(t).unwrap();
        prop_assert!((once.diameter() - t).abs() <= 1e-12);
        for i in 0..space.len() {
            for j in 0..space.len() {
                prop_assert!((twice.dist(i, j) - once.dist(i, j)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn fillings_are_well_formed(space in cloud(), alpha in prop::sample::select(vec![2.0, 3.0]), depth in 1usize..6) {
        let g = FillingGraph::build(&space, alpha, 2.0 * alpha * alpha + 1.0, depth).unwrap();
        prop_assert_eq!(g.rescan_mismatches(&space), 0);
        prop_assert_eq!(g.clause8_violations(), 0);
        prop_assert!(g.tree_is_total());
        prop_assert!(g.is_connected());
    }

    #[test]
    fn drho_is_a_metric(space in cloud(), c in 0.1f64..0.9, depth in 1usize..5, use_measure in any::<bool>()) {
        let g = FillingGraph::build(&space, 2.0, 9.0, depth).unwrap();
        let w = if use_measure {
            WeightAssignment::measure(&g, &DiscreteMeasure::uniform(&space), 1.0).unwrap()
        } else {
            WeightAssignment::constant(&g, c).unwrap()
        };
        let d = drho_all_pairs(&g, &w);
        let n = d.len();
        for i in 0..n {
            prop_assert_eq!(d[i][i], 0.0);
            for j in 0..n {
                prop_assert!(d[i][j] == d[j][i]);
                if i != j {
                    prop_assert!(d[i][j] > 0.0);
                }
                for k in 0..n {
                    prop_assert!(d[i][k] <= d[i][j] + d[j][k] + 1e-12);
                }
            }
        }
    }

    #[test]
    fn cell_sums_decrease_in_p(space in cloud(), c in 0.1f64..0.9, depth in 2usize..6, p in 0.1f64..3.0, dp in 0.01f64..1.0) {
        let g = FillingGraph::build(&space, 2.0, 9.0, depth).unwrap();
        let w = WeightAssignment::constant(&g, c).unwrap();
        let cells = sample_cells(&g, 200, 7);
        let sums = CellSums::new(&g, &w, &cells).unwrap();
        for i in 0..sums.len() {
            prop_assert!(sums.s(i, p + dp) <= sums.s(i, p));
        }
    }
}
