//! Scalar features of a single sequence.

use super::FeatureError;
use crate::signal::{nth_emd, periodogram, wpd_with, Boundary, Wavelet, WpdPath};

/// Sample-entropy value reported when no template of length m+1 matches.
pub const SAMPEN_CAP: f64 = 50.0;
const TOLERANCE_FLOOR: f64 = 1e-12;

fn too_short(len: usize, required: usize) -> FeatureError {
    FeatureError::SignalTooShort { len, required }
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn population_std(x: &[f64]) -> f64 {
    let mu = mean(x);
    (x.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / x.len() as f64).sqrt()
}

/// Sample variance (n-1 denominator).
pub fn variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let mu = mean(x);
    x.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (x.len() - 1) as f64
}

/// Sample entropy with tolerance `r * std(x)`.
///
/// Templates start at `0..len-m` for both lengths, so every length-m match
/// has a well-defined extension.
pub fn sample_entropy(x: &[f64], m: usize, r: f64) -> Result<f64, FeatureError> {
    if m == 0 || !(r > 0.0) {
        return Err(FeatureError::InvalidParam(format!(
            "sample entropy needs m >= 1 and r > 0 (m={m}, r={r})"
        )));
    }
    if x.len() <= m + 1 {
        return Err(too_short(x.len(), m + 2));
    }
    let tol = (r * population_std(x)).max(TOLERANCE_FLOOR);
    let n_templates = x.len() - m;
    let (mut a, mut b) = (0u64, 0u64);
    for i in 0..n_templates {
        for j in i + 1..n_templates {
            if (0..m).all(|k| (x[i + k] - x[j + k]).abs() <= tol) {
                b += 1;
                if (x[i + m] - x[j + m]).abs() <= tol {
                    a += 1;
                }
            }
        }
    }
    if a == 0 {
        return Ok(SAMPEN_CAP);
    }
    Ok(-(a as f64 / b as f64).ln())
}

/// Averages of consecutive non-overlapping windows of `scale` samples.
pub fn coarse_grain(x: &[f64], scale: usize) -> Vec<f64> {
    if scale <= 1 {
        return x.to_vec();
    }
    x.chunks_exact(scale).map(mean).collect()
}

/// Sample entropy of the series coarse-grained at `scale`.
pub fn multiscale_sample_entropy(
    x: &[f64],
    m: usize,
    r: f64,
    scale: usize,
) -> Result<f64, FeatureError> {
    if scale == 0 {
        return Err(FeatureError::InvalidParam("scale must be >= 1".into()));
    }
    let y = coarse_grain(x, scale);
    if y.len() <= m + 1 {
        return Err(too_short(x.len(), (m + 2) * scale));
    }
    sample_entropy(&y, m, r)
}

/// Higuchi fractal dimension, clamped to [1, 2].
pub fn higuchi_fd(x: &[f64], k_max: usize) -> Result<f64, FeatureError> {
    if k_max < 2 {
        return Err(FeatureError::InvalidParam(format!(
            "k_max must be >= 2, got {k_max}"
        )));
    }
    let n = x.len();
    if n < 2 * k_max {
        return Err(too_short(n, 2 * k_max));
    }
    let mut pts = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let mut total = 0.0;
        let mut used = 0usize;
        for m in 0..k {
            let steps = (n - 1 - m) / k;
            if steps == 0 {
                continue;
            }
            let len: f64 = (1..=steps)
                .map(|i| (x[m + i * k] - x[m + (i - 1) * k]).abs())
                .sum();
            total += len * (n - 1) as f64 / (steps * k) as f64 / k as f64;
            used += 1;
        }
        let lk = total / used as f64;
        if !(lk > 0.0) {
            return Err(FeatureError::DegenerateSignal(
                "curve length is zero".into(),
            ));
        }
        pts.push(((1.0 / k as f64).ln(), lk.ln()));
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok((sxy / sxx).clamp(1.0, 2.0))
}

/// Mean Teager-Kaiser energy over interior samples.
pub fn teager_kaiser_energy(x: &[f64]) -> Result<f64, FeatureError> {
    if x.len() < 3 {
        return Err(too_short(x.len(), 3));
    }
    let s: f64 = x.windows(3).map(|w| w[1] * w[1] - w[0] * w[2]).sum();
    Ok(s / (x.len() - 2) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasicStats {
    pub std: f64,
    pub iqr: f64,
    pub rms: f64,
    pub peak_amplitude: f64,
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn basic_stats(x: &[f64]) -> Result<BasicStats, FeatureError> {
    if x.len() < 2 {
        return Err(too_short(x.len(), 2));
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(BasicStats {
        std: variance(x).sqrt(),
        iqr: quantile(&sorted, 0.75) - quantile(&sorted, 0.25),
        rms: (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt(),
        peak_amplitude: x.iter().fold(0.0f64, |acc, v| acc.max(v.abs())),
    })
}

/// AR coefficients `a` with `x[n] ~ sum_k a[k] x[n-1-k]`, from the biased
/// autocorrelation of the mean-removed series (Levinson-Durbin).
pub fn yule_walker_ar(x: &[f64], order: usize) -> Result<Vec<f64>, FeatureError> {
    if order == 0 {
        return Err(FeatureError::InvalidParam("AR order must be >= 1".into()));
    }
    if x.len() <= 10 * order {
        return Err(too_short(x.len(), 10 * order + 1));
    }
    let n = x.len();
    let mu = mean(x);
    let c: Vec<f64> = x.iter().map(|v| v - mu).collect();
    let r: Vec<f64> = (0..=order)
        .map(|lag| {
            c[..n - lag]
                .iter()
                .zip(&c[lag..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n as f64
        })
        .collect();
    let scale = c.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if !(r[0] > 1e-24 * scale * scale) || r[0] == 0.0 {
        return Err(FeatureError::SingularAutocorrelation);
    }
    let mut a = vec![0.0; order];
    let mut err = r[0];
    for k in 0..order {
        let acc: f64 = r[k + 1] - (0..k).map(|j| a[j] * r[k - j]).sum::<f64>();
        let refl = acc / err;
        let prev = a.clone();
        a[k] = refl;
        for j in 0..k {
            a[j] = prev[j] - refl * prev[k - 1 - j];
        }
        err *= 1.0 - refl * refl;
        if !(err > 0.0) {
            return Err(FeatureError::SingularAutocorrelation);
        }
    }
    Ok(a)
}

/// Frequency where the cumulative periodogram reaches half the total power.
///
/// Linear interpolation inside the crossing bin. When the cumulative power
/// sits exactly at one half over a run of bins, the midpoint of that run is
/// returned.
pub fn median_frequency(x: &[f64], fs: f64) -> Result<f64, FeatureError> {
    if x.len() < 64 {
        return Err(too_short(x.len(), 64));
    }
    let p = periodogram(x, fs);
    let total: f64 = p.power.iter().sum();
    if !(total > 0.0) {
        return Err(FeatureError::DegenerateSignal("zero spectral power".into()));
    }
    let half = total / 2.0;
    let tol = 1e-9 * total;
    let mut cum = Vec::with_capacity(p.power.len());
    let mut acc = 0.0;
    for v in &p.power {
        acc += v;
        cum.push(acc);
    }
    let k = cum
        .iter()
        .position(|&c| c >= half - tol)
        .unwrap_or(cum.len() - 1);
    if cum[k] <= half + tol {
        let mut j = k;
        while j + 1 < cum.len() && cum[j + 1] <= half + tol {
            j += 1;
        }
        if j > k || j + 1 < cum.len() {
            let next = (j + 1).min(cum.len() - 1);
            return Ok((p.freqs[k] + p.freqs[next]) / 2.0);
        }
        return Ok(p.freqs[k]);
    }
    if k == 0 {
        return Ok(p.freqs[0]);
    }
    let frac = (half - cum[k - 1]) / p.power[k];
    Ok(p.freqs[k - 1] + frac * (p.freqs[k] - p.freqs[k - 1]))
}

/// Natural log of the variance of the packet coefficients at `path`.
pub fn wavelet_log_var_with(
    x: &[f64],
    path: &WpdPath,
    w: &Wavelet,
    boundary: Boundary,
) -> Result<f64, FeatureError> {
    let node = wpd_with(x, path, w, boundary)?;
    let v = variance(&node.coefficients);
    if !(v > 0.0) {
        return Err(FeatureError::NonPositiveVariance);
    }
    Ok(v.ln())
}

/// [`wavelet_log_var_with`] using db4 and symmetric extension.
pub fn wavelet_log_var(x: &[f64], path: &WpdPath) -> Result<f64, FeatureError> {
    wavelet_log_var_with(x, path, &Wavelet::default(), Boundary::default())
}

/// Log-variance at `path` minus log-variance at its sibling.
pub fn wavelet_log_var_diff(x: &[f64], path: &WpdPath) -> Result<f64, FeatureError> {
    Ok(wavelet_log_var(x, path)? - wavelet_log_var(x, &path.sibling())?)
}

/// Largest periodogram value.
pub fn peak_power(x: &[f64], fs: f64) -> Result<f64, FeatureError> {
    if x.len() < 2 {
        return Err(too_short(x.len(), 2));
    }
    Ok(periodogram(x, fs).power.iter().copied().fold(0.0, f64::max))
}

/// Peak periodogram power of the `stage`-th IMF (residual past the last IMF).
pub fn fwl_peak_power(x: &[f64], fs: f64, stage: usize) -> Result<f64, FeatureError> {
    peak_power(&nth_emd(x, stage)?, fs)
}
