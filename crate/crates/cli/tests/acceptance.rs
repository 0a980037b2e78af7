//! Acceptance checks, one line per criterion. Runs as a plain binary so the
//! report is always printed.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeSet;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use leakbench::classify::ClassifierSpec;
use leakbench::evaluate::{
    auc, bootstrap_feature_auc, confusion_metrics, run_pipeline, PipelineSpec, Placement,
};
use leakbench::features::{
    basic_stats, fwl_peak_power, higuchi_fd, median_frequency, sample_entropy,
    teager_kaiser_energy, wavelet_log_var, yule_walker_ar, FeatureMatrix,
};
use leakbench::oversample::{resample, synthetic_count, Algorithm, SamplerConfig};
use leakbench::signal::{emd, periodogram, wpd_level, wpd_reconstruct, Boundary, Wavelet, WpdPath};
use leakbench::synthexp::{two_gaussian_task, uniform_leakage_experiment, LeakageParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_leakbench")
}

fn cli(
    args: &[&str],
    config: &Path,
    out: &Path,
    jobs: Option<usize>,
) -> Result<std::process::Output, String> {
    let mut cmd = Command::new(bin());
    cmd.args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .env("LEAKBENCH_LOG", "error");
    if let Some(j) = jobs {
        cmd.arg("--jobs").arg(j.to_string());
    }
    let output = cmd.output().map_err(|e| format!("spawn failed: {e}"))?;
    if !output.status.success() {
        return Err(format!(
            "{args:?} exited {:?}: {}",
            output.status.code(),
            String::from_utf8_lossy(&output.stderr)
        ));
    }
    Ok(output)
}

fn json(path: &Path) -> Result<serde_json::Value, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    Distribution::<f64>::sample(&StandardNormal, rng)
}

fn c1_leakage() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("leak.toml");
    fs::write(&config, "seed = 0\n").map_err(|e| e.to_string())?;
    let start = Instant::now();
    cli(&["leakage-demo"], &config, &dir.path().join("out"), None)?;
    let cli_time = start.elapsed();
    let doc = json(&dir.path().join("out/leakage.json"))?;
    let r = &doc["result"];
    let field = |k: &str| r[k].as_f64().ok_or_else(|| format!("missing {k}"));
    let mut rows = vec![(
        field("auc_none")?,
        field("auc_before")?,
        field("auc_after")?,
    )];
    ensure!(
        r["classifier"]["kind"] == "knn" && r["n"] == 10000 && r["d"] == 5,
        "unexpected defaults: {r}"
    );

    for seed in 1..10 {
        let res = uniform_leakage_experiment(&LeakageParams {
            seed,
            ..LeakageParams::default()
        })
        .map_err(|e| e.to_string())?;
        rows.push((res.auc_none, res.auc_before, res.auc_after));
    }
    for (seed, &(none, before, after)) in rows.iter().enumerate() {
        ensure!(before >= 0.90, "seed {seed}: auc_before {before:.4} < 0.90");
        ensure!(
            (0.45..=0.55).contains(&none),
            "seed {seed}: auc_none {none:.4} outside [0.45, 0.55]"
        );
        ensure!(
            (0.45..=0.55).contains(&after),
            "seed {seed}: auc_after {after:.4} outside [0.45, 0.55]"
        );
    }
    let gap = rows.iter().map(|r| r.1 - r.2).sum::<f64>() / rows.len() as f64;
    ensure!(gap > 0.35, "mean before-after gap {gap:.4} <= 0.35");
    ensure!(
        cli_time < Duration::from_secs(180),
        "leakage-demo took {cli_time:.1?}"
    );
    let (none, before, after) = rows[0];
    Ok(format!(
        "seed 0: none {none:.3} before {before:.3} after {after:.3}; mean gap over 10 seeds {gap:.3}; leakage-demo {:.1}s",
        cli_time.as_secs_f64()
    ))
}

fn c2_naive_accuracy() -> Outcome {
    let labels: Vec<u8> = (0..298).map(|i| u8::from(i >= 260)).collect();
    let c = confusion_metrics(&vec![0; 298], &labels).map_err(|e| e.to_string())?;
    ensure!(
        (c.accuracy - 0.8725).abs() <= 1e-4,
        "accuracy {}",
        c.accuracy
    );
    ensure!(
        c.sensitivity == 0.0 && c.specificity == 1.0,
        "sens {} spec {}",
        c.sensitivity,
        c.specificity
    );
    Ok(format!("accuracy {:.4}", c.accuracy))
}

fn c3_gain_and_gap() -> Outcome {
    let knn = ClassifierSpec::knn(5);
    let mut gains = Vec::new();
    let mut gaps = Vec::new();
    for seed in 0..10u64 {
        let m = two_gaussian_task(300, 5, 0.1, 0.5, seed).map_err(|e| e.to_string())?;
        let run = |placement, sampler: SamplerConfig| {
            let spec = PipelineSpec {
                sampler,
                classifier: knn.clone(),
                placement,
                n_folds: 10,
                seed,
                standardize: false,
                allow_leakage: true,
            };
            run_pipeline(&m, &spec)
                .map(|r| r.aggregate.auc.mean)
                .map_err(|e| e.to_string())
        };
        let none = run(Placement::None, SamplerConfig::default())?;
        let after = run(Placement::AfterSplit, SamplerConfig::smote(1.0, 5))?;
        let before = run(Placement::BeforeSplit, SamplerConfig::smote(1.0, 5))?;
        gains.push(after - none);
        gaps.push(before - after);
    }
    let mean_gain = gains.iter().sum::<f64>() / gains.len() as f64;
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    ensure!(
        (0.0..=0.15).contains(&mean_gain),
        "mean after-none gain {mean_gain:.4} outside [0, 0.15]"
    );
    ensure!(
        min_gap > 0.15,
        "smallest before-after gap {min_gap:.4} <= 0.15 (gaps {gaps:?})"
    );
    Ok(format!(
        "mean after-none gain {mean_gain:.4}; smallest before-after gap {min_gap:.4}"
    ))
}

fn segment_ok(s: &[f64], a: &[f64], b: &[f64]) -> bool {
    let dir: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let off: Vec<f64> = s.iter().zip(a).map(|(x, y)| x - y).collect();
    let len2: f64 = dir.iter().map(|v| v * v).sum();
    let t = if len2 > 0.0 {
        off.iter().zip(&dir).map(|(o, d)| o * d).sum::<f64>() / len2
    } else {
        0.0
    };
    let resid = off
        .iter()
        .zip(&dir)
        .map(|(o, d)| (o - t * d).abs())
        .fold(0.0, f64::max);
    resid < 1e-9 && (0.0..=1.0).contains(&t)
}

fn c4_sampler_geometry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut synthetic_rows = 0usize;
    for call in 0..10_000u64 {
        let algorithm =
            [Algorithm::Smote, Algorithm::Adasyn, Algorithm::ClusterSmote][call as usize % 3];
        let n_min = rng.random_range(4..16);
        let n_maj = n_min + rng.random_range(1..40);
        let d = rng.random_range(1..5);
        let n = n_min + n_maj;
        let values = (0..n * d).map(|_| rng.random_range(-5.0..5.0)).collect();
        let labels = (0..n)
            .map(|i| u8::from(i % 3 == 0 && i / 3 < n_min))
            .collect::<Vec<_>>();
        let n_min = labels.iter().filter(|&&l| l == 1).count();
        let n_maj = n - n_min;
        let m = FeatureMatrix::from_flat(
            values,
            (0..d).map(|j| format!("f{j}")).collect(),
            labels,
            (0..n).map(|i| format!("r{i:03}")).collect(),
        )
        .map_err(|e| e.to_string())?;
        let cfg = SamplerConfig {
            algorithm,
            proportion: rng.random_range(0.2..1.0),
            k_neighbors: rng.random_range(1..8),
            n_clusters: rng.random_range(1..4),
            standardize: rng.random_bool(0.5),
            seed: call,
        };
        if n_min < cfg.n_clusters.max(2) {
            continue;
        }
        let out = resample(&m, &cfg).map_err(|e| format!("call {call}: {e}"))?;
        let expected = synthetic_count(n_min, n_maj, cfg.proportion).max(0) as usize;
        ensure!(
            out.n_synthetic() == expected,
            "call {call}: {} synthetic rows, expected {expected}",
            out.n_synthetic()
        );
        let (_, pos) = out.matrix.class_counts();
        let ratio = pos as f64 / n_maj as f64;
        if expected > 0 {
            ensure!(
                (ratio - cfg.proportion).abs() <= 1.0 / n_maj as f64 + 1e-12,
                "call {call}: ratio {ratio} vs proportion {}",
                cfg.proportion
            );
        }
        for i in (0..out.matrix.n_rows()).filter(|&i| out.synthetic_mask[i]) {
            let (a, b) = out.parents[i].ok_or(format!("call {call}: row {i} has no parents"))?;
            ensure!(
                segment_ok(out.matrix.row(i), out.matrix.row(a), out.matrix.row(b)),
                "call {call}: row {i} off its parent segment"
            );
            synthetic_rows += 1;
        }
    }
    Ok(format!(
        "{synthetic_rows} synthetic rows checked, all on their segments, counts exact"
    ))
}

fn brute_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut num = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        for (j, &sj) in scores.iter().enumerate() {
            if labels[i] == 1 && labels[j] == 0 {
                pairs += 1.0;
                num += if si > sj {
                    1.0
                } else if si == sj {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    num / pairs
}

fn c5_auc_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < 1000 {
        let n = rng.random_range(2..=200);
        let levels = rng.random_range(1..=30);
        let scores: Vec<f64> = (0..n)
            .map(|_| f64::from(rng.random_range(0..levels)) * 0.1)
            .collect();
        let labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.35))).collect();
        if !(labels.contains(&0) && labels.contains(&1)) {
            continue;
        }
        let got = auc(&scores, &labels).map_err(|e| e.to_string())?;
        worst = worst.max((got - brute_auc(&scores, &labels)).abs());
        done += 1;
    }
    ensure!(worst <= 1e-12, "max deviation from pair counting {worst:e}");

    let mut values = Vec::with_capacity(1000);
    let mut labels = Vec::with_capacity(1000);
    for i in 0..1000 {
        let positive = i >= 500;
        values.push(gauss(&mut rng) + if positive { 1.0 } else { 0.0 });
        labels.push(u8::from(positive));
    }
    let b = bootstrap_feature_auc(&values, &labels, 10_000, 5).map_err(|e| e.to_string())?;
    let target = Normal::new(0.0, 1.0).unwrap().cdf(1.0 / 2f64.sqrt());
    ensure!(
        (b.mean_auc - target).abs() <= 0.02,
        "bootstrap mean AUC {:.4} vs {target:.4}",
        b.mean_auc
    );
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(120), "took {took:.1?}");
    Ok(format!(
        "1000 instances max deviation {worst:e}; bootstrap AUC {:.4} vs {target:.4}; {:.1}s",
        b.mean_auc,
        took.as_secs_f64()
    ))
}

fn random_signal(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let f1 = rng.random_range(0.01..0.2);
    let f2 = rng.random_range(0.2..0.45);
    let mut walk = 0.0;
    (0..n)
        .map(|i| {
            walk += 0.1 * gauss(rng);
            let t = i as f64;
            (2.0 * std::f64::consts::PI * f1 * t).sin()
                + 0.5 * (2.0 * std::f64::consts::PI * f2 * t).cos()
                + walk
                + 0.3 * gauss(rng)
        })
        .collect()
}

fn c6_decomposition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut emd_worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(200..3000);
        let x = random_signal(&mut rng, n);
        let set = emd(&x, 32).map_err(|e| e.to_string())?;
        let back = set.reconstruct();
        let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = x
            .iter()
            .zip(&back)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            / peak;
        emd_worst = emd_worst.max(err);
    }
    ensure!(emd_worst < 1e-8, "EMD reconstruction error {emd_worst:e}");

    let mut rec_worst = 0.0f64;
    let mut energy_worst = 0.0f64;
    let db4 = Wavelet::daubechies(4).map_err(|e| e.to_string())?;
    for trial in 0..50 {
        let n = if trial % 2 == 0 {
            1024
        } else {
            rng.random_range(64..2000)
        };
        let x = random_signal(&mut rng, n);
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        for boundary in [Boundary::Symmetric, Boundary::Periodization] {
            if boundary == Boundary::Periodization && n % 8 != 0 {
                continue;
            }
            let leaves = wpd_level(&x, 3, &db4, boundary).map_err(|e| e.to_string())?;
            let back = wpd_reconstruct(&leaves).map_err(|e| e.to_string())?;
            let err = (x
                .iter()
                .zip(&back)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                / norm2)
                .sqrt();
            rec_worst = rec_worst.max(err);
            if boundary == Boundary::Periodization {
                let e: f64 = leaves
                    .iter()
                    .flat_map(|l| &l.coefficients)
                    .map(|v| v * v)
                    .sum();
                energy_worst = energy_worst.max((e - norm2).abs() / norm2);
            }
        }
    }
    ensure!(rec_worst < 1e-6, "WPD reconstruction error {rec_worst:e}");
    ensure!(energy_worst < 1e-6, "WPD energy error {energy_worst:e}");
    Ok(format!("EMD max error {emd_worst:.1e}; WPD level-3 reconstruction {rec_worst:.1e}; energy {energy_worst:.1e}"))
}

fn brute_sampen(x: &[f64], m: usize, r: f64) -> f64 {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / x.len() as f64).sqrt();
    let tol = (r * sd).max(1e-12);
    let templates =
        |len: usize| -> Vec<&[f64]> { (0..x.len() - m).map(|i| &x[i..i + len]).collect() };
    let count = |len: usize| {
        let t = templates(len);
        let mut c = 0usize;
        for i in 0..t.len() {
            for j in i + 1..t.len() {
                if t[i].iter().zip(t[j]).all(|(a, b)| (a - b).abs() <= tol) {
                    c += 1;
                }
            }
        }
        c as f64
    };
    -(count(m + 1) / count(m)).ln()
}

fn c7_feature_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let err = |e: leakbench::features::FeatureError| e.to_string();
    let pi = std::f64::consts::PI;
    let mut checks = 0;
    let mut check = |ok: bool, what: String| -> Result<(), String> {
        checks += 1;
        if ok {
            Ok(())
        } else {
            Err(what)
        }
    };

    let v = sample_entropy(&[3.0; 100], 2, 0.2).map_err(err)?;
    check(v == 0.0, format!("constant SampEn {v}"))?;
    let ramp: Vec<f64> = (1..=10).map(f64::from).collect();
    let v = sample_entropy(&ramp, 2, 0.5).map_err(err)?;
    check(
        (v - brute_sampen(&ramp, 2, 0.5)).abs() < 1e-12,
        format!("ramp SampEn {v}"),
    )?;
    let noise: Vec<f64> = (0..400).map(|_| gauss(&mut rng)).collect();
    let v = sample_entropy(&noise, 2, 0.2).map_err(err)?;
    check(
        (v - brute_sampen(&noise, 2, 0.2)).abs() < 1e-12,
        format!("noise SampEn {v}"),
    )?;

    let line: Vec<f64> = (0..1000).map(f64::from).collect();
    let v = higuchi_fd(&line, 8).map_err(err)?;
    check((1.0..=1.05).contains(&v), format!("line FD {v}"))?;
    for seed in 0..20 {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..10_000).map(|_| r.random::<f64>()).collect();
        let v = higuchi_fd(&u, 8).map_err(err)?;
        check(
            (1.9..=2.0).contains(&v),
            format!("white-noise FD {v} (seed {seed})"),
        )?;
    }
    let sine: Vec<f64> = (0..10_000).map(|i| (0.05 * i as f64).sin()).collect();
    let v = higuchi_fd(&sine, 8).map_err(err)?;
    check(v < 1.3, format!("sine FD {v}"))?;

    check(
        teager_kaiser_energy(&[2.5; 50]).map_err(err)? == 0.0,
        "constant TKE".into(),
    )?;
    let x: Vec<f64> = (0..10_000).map(|i| (0.3 * i as f64).sin()).collect();
    let v = teager_kaiser_energy(&x).map_err(err)?;
    let closed = 0.3f64.sin().powi(2);
    check(
        (v - closed).abs() / closed < 0.02,
        format!("sine TKE {v} vs {closed}"),
    )?;
    let v = teager_kaiser_energy(&[0.0, 1.0, 0.0]).map_err(err)?;
    check(v == 1.0, format!("[0,1,0] TKE {v}"))?;

    let s = basic_stats(&[1.0, 2.0, 3.0, 4.0, 5.0]).map_err(err)?;
    check(
        (s.std - 2.5f64.sqrt()).abs() < 1e-12 && s.iqr == 2.0,
        format!("{s:?}"),
    )?;
    let s = basic_stats(&[7.0; 9]).map_err(err)?;
    check(s.std == 0.0 && s.iqr == 0.0, format!("{s:?}"))?;
    let s = basic_stats(&[0.0, 0.0, 0.0, 4.0]).map_err(err)?;
    check((s.std - 2.0).abs() < 1e-12, format!("{s:?}"))?;

    for seed in 0..20 {
        let mut r = ChaCha8Rng::seed_from_u64(100 + seed);
        let mut prev = 0.0;
        let ar: Vec<f64> = (0..20_000)
            .map(|_| {
                prev = 0.9 * prev + gauss(&mut r);
                prev
            })
            .collect();
        let a = yule_walker_ar(&ar, 1).map_err(err)?;
        check(
            (0.88..=0.92).contains(&a[0]),
            format!("AR(1) estimate {} (seed {seed})", a[0]),
        )?;
        let white: Vec<f64> = (0..20_000).map(|_| gauss(&mut r)).collect();
        let a = yule_walker_ar(&white, 4).map_err(err)?;
        check(
            a.iter().all(|c| c.abs() <= 0.05),
            format!("white-noise AR {a:?}"),
        )?;
    }
    check(
        yule_walker_ar(&[1.0; 100], 2).is_err_and(|e| e.name() == "SingularAutocorrelation"),
        "constant AR".into(),
    )?;

    let fs = 20.0;
    let tone = |f: f64, n: usize| -> Vec<f64> {
        (0..n)
            .map(|i| (2.0 * pi * f * i as f64 / fs).sin())
            .collect()
    };
    let v = median_frequency(&tone(1.0, 30_000), fs).map_err(err)?;
    check(
        (v - 1.0).abs() <= 0.01,
        format!("sine median frequency {v}"),
    )?;
    let two: Vec<f64> = tone(0.5, 4000)
        .iter()
        .zip(tone(2.0, 4000))
        .map(|(a, b)| a + b)
        .collect();
    let v = median_frequency(&two, fs).map_err(err)?;
    check(
        (v - 1.25).abs() <= fs / 4000.0 + 1e-12,
        format!("two-tone median frequency {v}"),
    )?;
    let mut total = 0.0;
    for seed in 0..20 {
        let mut r = ChaCha8Rng::seed_from_u64(200 + seed);
        let w: Vec<f64> = (0..4000).map(|_| gauss(&mut r)).collect();
        total += median_frequency(&w, fs).map_err(err)?;
    }
    check(
        (total / 20.0 - 5.0).abs() <= 0.3,
        format!("white-noise median frequency {}", total / 20.0),
    )?;

    let zero = vec![0.0; 256];
    let path = WpdPath::parse("AD").map_err(|e| e.to_string())?;
    check(
        wavelet_log_var(&zero, &path).is_err_and(|e| e.name() == "NonPositiveVariance"),
        "zero-signal wavelet log-variance".into(),
    )?;

    let mono = tone(0.7, 2000);
    let own = periodogram(&mono, fs)
        .power
        .iter()
        .copied()
        .fold(0.0, f64::max);
    let v = fwl_peak_power(&mono, fs, 1).map_err(err)?;
    check(
        (v - own).abs() / own < 0.01,
        format!("IMF-1 peak power {v} vs {own}"),
    )?;
    let mixed: Vec<f64> = tone(0.4, 4000)
        .iter()
        .zip(tone(3.0, 4000))
        .map(|(a, b)| a + b)
        .collect();
    let imf1 = leakbench::signal::nth_emd(&mixed, 1).map_err(|e| e.to_string())?;
    let p = periodogram(&imf1, fs);
    let peak_bin = (0..p.power.len())
        .max_by(|&a, &b| p.power[a].total_cmp(&p.power[b]))
        .unwrap();
    check(
        (p.freqs[peak_bin] - 3.0).abs() <= fs / 4000.0,
        format!("IMF-1 peak at {} Hz", p.freqs[peak_bin]),
    )?;
    let set = emd(&mixed, 64).map_err(|e| e.to_string())?;
    let beyond = fwl_peak_power(&mixed, fs, set.imfs.len() + 3).map_err(err)?;
    let residual = periodogram(&set.residual, fs)
        .power
        .iter()
        .copied()
        .fold(0.0, f64::max);
    check(
        (beyond - residual).abs() <= 1e-12 * residual.max(1.0),
        "stage past last IMF uses the residual".into(),
    )?;

    Ok(format!("{checks} feature checks"))
}

fn c8_partition_integrity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut folds = 0;
    for run in 0..100u64 {
        let n = rng.random_range(60..200);
        let d = rng.random_range(1..5);
        let rate = rng.random_range(0.1..0.4);
        let m = two_gaussian_task(n, d, rate, 1.0, run).map_err(|e| e.to_string())?;
        let algorithm = [
            Algorithm::Smote,
            Algorithm::Adasyn,
            Algorithm::ClusterSmote,
            Algorithm::SmoteTomek,
            Algorithm::RandomDup,
        ][run as usize % 5];
        let spec = PipelineSpec {
            sampler: SamplerConfig {
                algorithm,
                proportion: 1.0,
                k_neighbors: 3,
                n_clusters: 2,
                standardize: false,
                seed: run,
            },
            classifier: [
                ClassifierSpec::knn(3),
                ClassifierSpec::decision_tree(),
                ClassifierSpec::qda(),
            ][run as usize % 3]
                .clone(),
            placement: Placement::AfterSplit,
            n_folds: 5,
            seed: run,
            standardize: run % 2 == 0,
            allow_leakage: false,
        };
        let originals: BTreeSet<&str> = m.sample_ids().iter().map(String::as_str).collect();
        let report = run_pipeline(&m, &spec).map_err(|e| format!("run {run}: {e}"))?;
        for f in &report.per_fold {
            ensure!(
                f.synthetic_in_test == 0,
                "run {run} fold {}: synthetic rows in test",
                f.fold
            );
            ensure!(
                f.audit.test_synthetic.iter().all(|s| !s),
                "run {run} fold {}: synthetic flag in test",
                f.fold
            );
            let test: BTreeSet<&str> = f.audit.test_ids.iter().map(String::as_str).collect();
            ensure!(
                test.iter().all(|id| originals.contains(id)),
                "run {run}: unknown id in test"
            );
            ensure!(
                f.audit
                    .train_ids
                    .iter()
                    .all(|id| !test.contains(id.as_str())),
                "run {run} fold {}: train and test share ids",
                f.fold
            );
            folds += 1;
        }
    }
    Ok(format!(
        "100 runs, {folds} folds, no synthetic test rows, train/test disjoint"
    ))
}

const SMOKE: &str = r#"
seed = 5
features = ["median_freq_ch3", "std_emd2_aaaa_ch3", "sampen_m4_s5_ch3", "tke_emd2_aaaa_ch3"]

[input.cohort]
n_records = 40
preterm_fraction = 0.25
duration_seconds = 420.0

[preprocessing]
trim_seconds = 30.0

[pipeline]
placement = "after_split"
n_folds = 5
[pipeline.sampler]
algorithm = "adasyn"
k_neighbors = 3
[pipeline.classifier]
kind = "random_forest"
n_trees = 25

[rank]
n_boot = 500

[search]
inner_folds = 2
classifiers = [{ kind = "knn", k = 3 }, { kind = "ada_boost", n_rounds = 10 }]
[[search.grids]]
algorithm = "smote"
proportions = [0.5, 1.0]
k_neighbors = [3]
[[search.grids]]
algorithm = "cluster_smote"
proportions = [1.0]
k_neighbors = [3]

[leakage]
n = 2000
n_folds = 5
"#;

fn files_under(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).into_iter().flatten().flatten() {
            let p = entry.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn c9_determinism() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("smoke.toml");
    fs::write(&config, SMOKE).map_err(|e| e.to_string())?;
    let commands = ["synth", "extract", "rank", "run", "leakage-demo", "search"];
    for (label, jobs) in [("a", 1), ("b", 8), ("c", 1)] {
        for c in commands {
            cli(&[c], &config, &dir.path().join(label), Some(jobs))?;
        }
    }
    let a = files_under(&dir.path().join("a"));
    ensure!(a.len() > 12, "only {} files written", a.len());
    for other in ["b", "c"] {
        let b = files_under(&dir.path().join(other));
        ensure!(a == b, "file sets differ between runs a and {other}");
        for f in &a {
            let x = fs::read(dir.path().join("a").join(f)).map_err(|e| e.to_string())?;
            let y = fs::read(dir.path().join(other).join(f)).map_err(|e| e.to_string())?;
            ensure!(x == y, "{} differs between runs a and {other}", f.display());
        }
    }
    for name in [
        "metrics.json",
        "leakage.json",
        "search.json",
        "imputation.json",
    ] {
        let doc = json(&dir.path().join("a").join(name))?;
        ensure!(
            doc["leakbench_version"] == leakbench::VERSION,
            "{name} lacks the version"
        );
        ensure!(
            doc["rng"] == leakbench::rng::RNG_NAME,
            "{name} lacks the RNG name"
        );
        ensure!(
            doc["config"]["seed"] == 5,
            "{name} lacks the resolved config"
        );
    }
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(300), "took {took:.1?}");
    Ok(format!(
        "{} files identical across --jobs 1, 8, 1; {:.1}s",
        a.len(),
        took.as_secs_f64()
    ))
}

fn c10_full_scale() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("out");
    let config = dir.path().join("full.toml");
    let text = format!(
        "seed = 7\nfeatures = \"table1_presets\"\n[input]\npath = {:?}\nfeatures = {:?}\n[rank]\nn_boot = 10000\n",
        out.join("cohort"),
        out.join("features.csv")
    );
    fs::write(&config, text).map_err(|e| e.to_string())?;
    let mut times = Vec::new();
    let start = Instant::now();
    for c in ["synth", "extract", "rank"] {
        let t = Instant::now();
        cli(&[c], &config, &out, None)?;
        times.push(format!("{c} {:.0}s", t.elapsed().as_secs_f64()));
    }
    let total = start.elapsed();
    let manifest =
        fs::read_to_string(out.join("cohort/manifest.csv")).map_err(|e| e.to_string())?;
    ensure!(
        manifest.lines().count() == 299,
        "cohort has {} records",
        manifest.lines().count() - 1
    );
    let ch = fs::read_to_string(out.join("cohort/syn0000_ch1.csv")).map_err(|e| e.to_string())?;
    ensure!(
        ch.lines().count() == 36_000,
        "channel has {} samples",
        ch.lines().count()
    );
    let m = FeatureMatrix::read_csv(&out.join("features.csv")).map_err(|e| e.to_string())?;
    ensure!(
        m.n_rows() == 298 && m.n_features() == 10,
        "feature matrix {}x{}",
        m.n_rows(),
        m.n_features()
    );
    for group in ["all", "early", "late"] {
        let text = fs::read_to_string(out.join(format!("ranking_{group}.csv")))
            .map_err(|e| e.to_string())?;
        let rows = text.lines().filter(|l| !l.starts_with('#')).count() - 1;
        ensure!(rows == 10, "ranking_{group}.csv has {rows} rows");
    }
    let threads = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    ensure!(total < Duration::from_secs(30 * 60), "took {total:.1?}");
    Ok(format!(
        "{} ({:.0}s total on {threads} thread(s))",
        times.join(", "),
        total.as_secs_f64()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("leakage inflation", c1_leakage),
        ("naive-baseline accuracy", c2_naive_accuracy),
        ("after-split gain and before-split gap", c3_gain_and_gap),
        ("sampler geometry", c4_sampler_geometry),
        ("AUC oracle equivalence", c5_auc_oracle),
        ("decomposition fidelity", c6_decomposition),
        ("feature sanity suite", c7_feature_suite),
        ("partition integrity", c8_partition_integrity),
        ("determinism across --jobs", c9_determinism),
        ("end-to-end scale", c10_full_scale),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = format!("criterion {:>2}", i + 1);
        if !filter.is_empty()
            && !filter
                .iter()
                .any(|f| id.ends_with(&format!(" {f}")) || name.contains(f.as_str()))
        {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("{id} PASS  {name}: {detail} [{secs:.1}s]"),
            Err(why) => {
                failures += 1;
                println!("{id} FAIL  {name}: {why} [{secs:.1}s]");
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
