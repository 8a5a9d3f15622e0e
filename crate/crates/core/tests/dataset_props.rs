use evoclust::dataset::{impute_local_mean, pca_fit, pca_transform, subsample_indices};
use evoclust::{Dataset, Matrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Cyclic Jacobi eigenvalue iteration for a symmetric matrix.
fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-22 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

fn covariance(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, d) = (rows.len(), rows[0].len());
    let mean: Vec<f64> = (0..d).map(|c| rows.iter().map(|r| r[c]).sum::<f64>() / n as f64).collect();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| rows.iter().map(|r| (r[i] - mean[i]) * (r[j] - mean[j])).sum::<f64>() / (n - 1) as f64)
                .collect()
        })
        .collect()
}

fn random_dataset(seed: u64, n: usize, d: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // correlated columns so the spectrum is uneven
    let base: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let data: Vec<f64> = (0..n)
        .flat_map(|i| {
            let b = base[i];
            (0..d).map(move |c| b * (c as f64 + 1.0)).collect::<Vec<_>>()
        })
        .zip((0..n * d).map(|_| rng.gen_range(-1.0..1.0)))
        .map(|(v, noise)| v + noise)
        .collect();
    Dataset::new("rand", Matrix::new(n, d, data).unwrap()).unwrap()
}

#[test]
fn reconstruction_error_matches_discarded_eigenvalues() {
    for seed in 0..10 {
        let ds = random_dataset(seed, 40, 5);
        let rows = ds.points().to_rows();
        let oracle = jacobi_eigenvalues(covariance(&rows));
        for threshold in [0.5, 0.9, 0.99] {
            let model = pca_fit(&ds, threshold, false).unwrap();
            let r = model.n_components();
            let t = pca_transform(&model, &ds).unwrap();
            let mut err = 0.0;
            for (i, x) in rows.iter().enumerate() {
                for c in 0..5 {
                    let recon = model.mean()[c]
                        + (0..r).map(|j| t.points().row(i)[j] * model.components().row(j)[c]).sum::<f64>();
                    err += (x[c] - recon).powi(2);
                }
            }
            err /= (rows.len() - 1) as f64;
            let discarded: f64 = oracle[r..].iter().sum();
            let total: f64 = oracle.iter().sum();
            let bound = (1.0 - model.cumulative_ratio()) * model.total_variance();
            assert!((err - discarded).abs() <= 1e-8 * total, "seed {seed}: {err} vs oracle {discarded}");
            assert!(err <= bound + 1e-8 * total);
            for (got, want) in model.explained_variance().iter().zip(&oracle) {
                assert!((got - want).abs() <= 1e-8 * total);
            }
        }
    }
}

proptest! {
    #[test]
    fn subsamples_partition_rows(n in 1usize..200, j_frac in 0.0f64..1.0, seed in any::<u64>()) {
        let j = 1 + ((n - 1) as f64 * j_frac) as usize;
        let blocks = subsample_indices(n, j, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(blocks.len(), j);
        let mut all: Vec<usize> = blocks.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        for b in &blocks {
            prop_assert!(b.len() == n / j || b.len() == n.div_ceil(j));
        }
        let again = subsample_indices(n, j, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(blocks, again);
    }

    #[test]
    fn imputation_is_idempotent(
        cells in proptest::collection::vec(proptest::option::weighted(0.8, -100.0f64..100.0), 12..60),
        classes in proptest::collection::vec(0u8..3, 20),
    ) {
        let d = 3;
        let n = cells.len() / d;
        let values: Vec<f64> = cells[..n * d].iter().map(|c| c.unwrap_or(0.0)).collect();
        let mask: Vec<bool> = cells[..n * d].iter().map(Option::is_none).collect();
        let labels: Vec<String> = (0..n).map(|i| classes[i % classes.len()].to_string()).collect();
        let ds = Dataset::new("p", Matrix::new(n, d, values).unwrap()).unwrap()
            .with_missing_mask(mask).unwrap()
            .with_labels(labels).unwrap();
        match impute_local_mean(&ds) {
            Ok(once) => {
                prop_assert!(!once.has_missing());
                prop_assert!(once.points().is_finite());
                let twice = impute_local_mean(&once).unwrap();
                prop_assert_eq!(once, twice);
            }
            Err(_) => {
                // only legal when some feature has no observed value at all
                prop_assert!((0..d).any(|c| (0..n).all(|r| ds.is_missing(r, c))));
            }
        }
    }

    #[test]
    fn pca_components_are_orthonormal(seed in any::<u64>(), d in 2usize..7, standardize in any::<bool>()) {
        let ds = random_dataset(seed, 30, d);
        let m = pca_fit(&ds, 1.0, standardize).unwrap();
        let c = m.components();
        for i in 0..c.rows() {
            for j in 0..c.rows() {
                let dot: f64 = c.row(i).iter().zip(c.row(j)).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() < 1e-8);
            }
        }
        let ratios = m.explained_variance_ratio();
        prop_assert!(ratios.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(ratios.iter().all(|&r| (0.0..=1.0).contains(&r)));
        prop_assert!(ratios.iter().sum::<f64>() <= 1.0 + 1e-9);
    }
}
