use leakbench::dataio::{
    generate_synthetic_cohort, load_records, save_records, trim_record, CohortSpec, Format, Label,
};
use leakbench::signal::{emd, wpd_level, wpd_reconstruct, Boundary, Wavelet};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_cohort(n: usize, frac: f64, seed: u64) -> CohortSpec {
    CohortSpec {
        n_records: n,
        preterm_fraction: frac,
        duration_seconds: 30.0,
        seed,
        ..CohortSpec::default()
    }
}

fn random_signal(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut walk = 0.0;
    (0..n)
        .map(|i| {
            walk += rng.random_range(-0.3..0.3);
            walk + (i as f64 * 0.31).sin() + rng.random_range(-1.0..1.0)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cohort_class_counts_and_label_rule(n in 2usize..40, frac in 0.05f64..0.95, seed in any::<u64>()) {
        let spec = small_cohort(n, frac, seed);
        let set = generate_synthetic_cohort(&spec).unwrap();
        prop_assert_eq!(set.count(Label::Preterm), (n as f64 * frac).round() as usize);
        for r in set.iter() {
            prop_assert_eq!(r.label(), Label::from_delivery_weeks(r.gestation_at_delivery()));
        }
    }

    #[test]
    fn trims_compose(a in 0.0f64..5.0, b in 0.0f64..5.0, seed in any::<u64>()) {
        let set = generate_synthetic_cohort(&small_cohort(2, 0.5, seed)).unwrap();
        let r = &set.records()[0];
        let (a, b) = ((a * 20.0).round() / 20.0, (b * 20.0).round() / 20.0);
        let twice = trim_record(&trim_record(r, a).unwrap(), b).unwrap();
        prop_assert_eq!(twice, trim_record(r, a + b).unwrap());
    }

    #[test]
    fn save_then_load_is_identity(n in 2usize..6, seed in any::<u64>()) {
        let set = generate_synthetic_cohort(&small_cohort(n, 0.5, seed)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_records(&set, dir.path()).unwrap();
        let back = load_records(dir.path(), Format::CsvV1).unwrap();
        prop_assert_eq!(back.records(), set.records());
    }

    #[test]
    fn emd_reconstructs_and_bounds_mode_count(n in 64usize..1500, seed in any::<u64>()) {
        let x = random_signal(n, seed);
        let set = emd(&x, 64).unwrap();
        let back = set.reconstruct();
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = x.iter().zip(&back).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!(err / scale < 1e-8);
        prop_assert!(set.imfs.len() <= (n as f64).log2().ceil() as usize + 1);
    }

    #[test]
    fn periodized_packets_conserve_energy_and_invert(log_n in 6u32..11, level in 1usize..4, order in 1usize..5, seed in any::<u64>()) {
        let n = 1usize << log_n;
        let x = random_signal(n, seed);
        let w = Wavelet::daubechies(order).unwrap();
        let leaves = wpd_level(&x, level, &w, Boundary::Periodization).unwrap();
        let energy: f64 = x.iter().map(|v| v * v).sum();
        let leaf_energy: f64 = leaves.iter().flat_map(|l| &l.coefficients).map(|v| v * v).sum();
        prop_assert!((energy - leaf_energy).abs() / energy < 1e-9);
        let back = wpd_reconstruct(&leaves).unwrap();
        let err = x.iter().zip(&back).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() / energy.sqrt();
        prop_assert!(err < 1e-9);
    }

    #[test]
    fn symmetric_packets_invert(n in 40usize..700, seed in any::<u64>()) {
        let x = random_signal(n, seed);
        let leaves = wpd_level(&x, 3, &Wavelet::default(), Boundary::Symmetric).unwrap();
        let back = wpd_reconstruct(&leaves).unwrap();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let err = x.iter().zip(&back).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() / norm;
        prop_assert!(err < 1e-6);
    }
}
