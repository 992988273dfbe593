//! k-means against exhaustive enumeration of 2-partitions.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taptest_core::kmeans::lloyd;
use taptest_core::{kmeans_fit, KMeansOptions, Matrix, RegionModel, ScoreTable};

/// Minimum within-cluster sum of squares over every split into two
/// non-empty groups, and the mask attaining it (point 0 always in group 0).
fn brute_force_two_clusters(points: &[Vec<f64>]) -> (f64, u32) {
    let m = points.len();
    let mut best = (f64::INFINITY, 0);
    // Fixing point 0 in group 0 removes the label symmetry: 2^(m-1) masks.
    for mask in 1u32..(1 << (m - 1)) {
        let mask = mask << 1;
        let mut cost = 0.0;
        for group in [false, true] {
            let members: Vec<&Vec<f64>> =
                (0..m).filter(|&i| ((mask >> i) & 1 == 1) == group).map(|i| &points[i]).collect();
            let dim = points[0].len();
            let mean: Vec<f64> =
                (0..dim).map(|d| members.iter().map(|p| p[d]).sum::<f64>() / members.len() as f64).collect();
            cost += members.iter().map(|p| p.iter().zip(&mean).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()).sum::<f64>();
        }
        if cost < best.0 {
            best = (cost, mask);
        }
    }
    best
}

fn fixture(seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(3..=10);
    let spread = rng.random_range(0.5..4.0);
    (0..m)
        .map(|i| {
            let offset = if i % 2 == 0 { 0.0 } else { spread };
            vec![offset + rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]
        })
        .collect()
}

#[test]
fn two_blobs_match_exhaustive_minimum() {
    let points = vec![
        vec![0.0, 0.0], vec![0.2, -0.1], vec![-0.1, 0.3], vec![0.1, 0.1],
        vec![10.0, 10.0], vec![9.8, 10.1], vec![10.2, 9.9], vec![10.1, 10.3],
    ];
    let (oracle, _) = brute_force_two_clusters(&points);
    let fit = kmeans_fit(&Matrix::from_rows(&points).unwrap(), 2, &KMeansOptions::default()).unwrap();
    assert!((fit.objective - oracle).abs() <= 1e-12 * oracle.max(1.0));
}

#[test]
fn random_fixtures_reach_global_optimum() {
    for seed in 0..80 {
        let points = fixture(seed);
        let (oracle, mask) = brute_force_two_clusters(&points);
        let opts = KMeansOptions { restarts: 10, seed, ..KMeansOptions::default() };
        let fit = kmeans_fit(&Matrix::from_rows(&points).unwrap(), 2, &opts).unwrap();
        assert!(
            (fit.objective - oracle).abs() <= 1e-12 * oracle.max(1.0),
            "seed {seed}: {} vs brute force {oracle}",
            fit.objective
        );
        // Same partition as the oracle, up to cluster naming.
        let ours: u32 = fit.assignments.iter().enumerate().map(|(i, &a)| ((a != fit.assignments[0]) as u32) << i).sum();
        assert_eq!(ours, mask, "seed {seed}: partition differs from brute force");
        for trace in &fit.traces {
            assert!(trace.windows(2).all(|w| w[1] <= w[0]), "seed {seed}: objective increased: {trace:?}");
        }
    }
}

#[test]
fn converged_centroids_are_cluster_means() {
    for seed in 0..30 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)]).collect();
        let points = Matrix::from_rows(&rows).unwrap();
        let init = Matrix::from_rows(&rows[..4]).unwrap();
        let run = lloyd(&points, init, 300);
        assert!(run.converged);
        for j in 0..4 {
            let members: Vec<&Vec<f64>> = rows.iter().zip(&run.assignments).filter(|(_, &a)| a == j).map(|(r, _)| r).collect();
            for d in 0..2 {
                let mean = members.iter().map(|p| p[d]).sum::<f64>() / members.len() as f64;
                assert!((run.centroids[(j, d)] - mean).abs() < 1e-10);
            }
        }
    }
}

proptest! {
    #[test]
    fn classify_is_scale_covariant(
        cents in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..5),
        pts in prop::collection::vec((-20.0f64..20.0, -20.0f64..20.0), 1..30),
        scale in 0.01f64..100.0,
    ) {
        let labels: Vec<String> = (0..cents.len()).map(|i| format!("c{i}")).collect();
        let c: Vec<[f64; 2]> = cents.iter().map(|&(x, y)| [x, y]).collect();
        let c_scaled: Vec<[f64; 2]> = c.iter().map(|p| [p[0] * scale, p[1] * scale]).collect();
        let Ok(a) = RegionModel::new(Matrix::from_rows(&c).unwrap(), labels.clone()) else { return Ok(()) };
        let b = RegionModel::new(Matrix::from_rows(&c_scaled).unwrap(), labels).unwrap();
        let p: Vec<[f64; 2]> = pts.iter().map(|&(x, y)| [x, y]).collect();
        let ps: Vec<[f64; 2]> = p.iter().map(|q| [q[0] * scale, q[1] * scale]).collect();
        let sa = ScoreTable::new(Matrix::from_rows(&p).unwrap(), None).unwrap();
        let sb = ScoreTable::new(Matrix::from_rows(&ps).unwrap(), None).unwrap();
        // Near-ties can flip under rounding; only compare clear decisions.
        for i in 0..p.len() {
            let mut d: Vec<f64> = a.normalized_distances(sa.row(i));
            d.sort_by(f64::total_cmp);
            if d[1] - d[0] > 1e-9 {
                prop_assert_eq!(a.nearest(sa.row(i)), b.nearest(sb.row(i)));
            }
        }
    }

    #[test]
    fn kmeans_is_deterministic(seed in 0u64..1000) {
        let points = fixture(seed);
        let m = Matrix::from_rows(&points).unwrap();
        let opts = KMeansOptions { seed, ..KMeansOptions::default() };
        prop_assert_eq!(kmeans_fit(&m, 2, &opts).unwrap(), kmeans_fit(&m, 2, &opts).unwrap());
    }
}
