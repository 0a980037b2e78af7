use leakbench::features::FeatureMatrix;
use leakbench::oversample::{resample, Algorithm, SampledMatrix, SamplerConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(n_min: usize, n_maj: usize, d: usize, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_min + n_maj;
    let values = (0..n * d).map(|_| rng.random_range(-3.0..3.0)).collect();
    let labels = (0..n).map(|i| u8::from(i < n_min)).collect();
    let ids = (0..n).map(|i| format!("s{i:04}")).collect();
    FeatureMatrix::from_flat(
        values,
        (0..d).map(|j| format!("f{j}")).collect(),
        labels,
        ids,
    )
    .unwrap()
}

/// Residual of `s` against the line through `a` and `b`, and the projection
/// coefficient of `s - a` onto `b - a`.
fn segment_fit(s: &[f64], a: &[f64], b: &[f64]) -> (f64, f64) {
    let dir: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let len2: f64 = dir.iter().map(|v| v * v).sum();
    let off: Vec<f64> = s.iter().zip(a).map(|(x, y)| x - y).collect();
    if len2 == 0.0 {
        return (off.iter().map(|v| v.abs()).fold(0.0, f64::max), 0.0);
    }
    let t = off.iter().zip(&dir).map(|(o, d)| o * d).sum::<f64>() / len2;
    let resid = off
        .iter()
        .zip(&dir)
        .map(|(o, d)| (o - t * d).abs())
        .fold(0.0, f64::max);
    (resid, t)
}

fn check_segments(out: &SampledMatrix) -> Result<(), TestCaseError> {
    for i in 0..out.matrix.n_rows() {
        if !out.synthetic_mask[i] {
            continue;
        }
        let (p, q) = out.parents[i].expect("synthetic row without parents");
        let (resid, t) = segment_fit(out.matrix.row(i), out.matrix.row(p), out.matrix.row(q));
        prop_assert!(resid < 1e-9, "row {i} residual {resid}");
        prop_assert!(
            (-1e-12..=1.0 + 1e-12).contains(&t),
            "row {i} coefficient {t}"
        );
        prop_assert_eq!(out.matrix.labels()[i], 1);
    }
    Ok(())
}

fn interpolating() -> impl Strategy<Value = Algorithm> {
    prop_oneof![
        Just(Algorithm::Smote),
        Just(Algorithm::Adasyn),
        Just(Algorithm::ClusterSmote)
    ]
}

fn any_algorithm() -> impl Strategy<Value = Algorithm> {
    prop_oneof![
        Just(Algorithm::Smote),
        Just(Algorithm::Adasyn),
        Just(Algorithm::ClusterSmote),
        Just(Algorithm::RandomDup),
        Just(Algorithm::SmoteTomek),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn synthetic_rows_lie_on_parent_segments(
        alg in interpolating(),
        n_min in 4usize..20,
        extra in 1usize..60,
        d in 1usize..6,
        k in 1usize..8,
        p in 0.3f64..1.0,
        seed in any::<u64>(),
    ) {
        let m = random_matrix(n_min, n_min + extra, d, seed);
        let cfg = SamplerConfig { algorithm: alg, proportion: p, k_neighbors: k, n_clusters: 2, standardize: seed % 2 == 0, seed };
        let out = resample(&m, &cfg).unwrap();
        check_segments(&out)?;
    }

    #[test]
    fn count_contract(
        alg in prop_oneof![Just(Algorithm::Smote), Just(Algorithm::Adasyn), Just(Algorithm::ClusterSmote), Just(Algorithm::RandomDup)],
        n_min in 4usize..20,
        extra in 1usize..60,
        p in 0.1f64..1.0,
        seed in any::<u64>(),
    ) {
        let m = random_matrix(n_min, n_min + extra, 3, seed);
        let cfg = SamplerConfig { algorithm: alg, proportion: p, k_neighbors: 5, n_clusters: 2, standardize: false, seed };
        let out = resample(&m, &cfg).unwrap();
        let (maj, min) = out.matrix.class_counts();
        let ratio = min as f64 / maj as f64;
        let slack = 1.0 / maj as f64;
        if n_min as f64 / maj as f64 >= p {
            prop_assert_eq!(out.n_synthetic(), 0);
        } else {
            prop_assert!(ratio >= p - slack - 1e-12 && ratio <= p + slack + 1e-12, "ratio {ratio} target {p}");
        }
    }

    #[test]
    fn originals_preserved_and_deterministic(
        alg in any_algorithm(),
        n_min in 4usize..15,
        extra in 1usize..40,
        seed in any::<u64>(),
    ) {
        let m = random_matrix(n_min, n_min + extra, 2, seed);
        let cfg = SamplerConfig { algorithm: alg, proportion: 1.0, k_neighbors: 3, n_clusters: 2, standardize: false, seed };
        let out = resample(&m, &cfg).unwrap();
        let again = resample(&m, &cfg).unwrap();
        prop_assert_eq!(&out.matrix, &again.matrix);
        prop_assert_eq!(&out.synthetic_mask, &again.synthetic_mask);

        let kept: Vec<usize> = (0..out.matrix.n_rows()).filter(|&i| !out.synthetic_mask[i]).collect();
        let originals = out.matrix.select_rows(&kept);
        let survivors: Vec<usize> = (0..m.n_rows()).filter(|&i| !out.removed_ids.contains(&m.sample_ids()[i])).collect();
        prop_assert_eq!(originals, m.select_rows(&survivors));
        if alg != Algorithm::SmoteTomek {
            prop_assert!(out.removed_ids.is_empty());
        }
    }
}
