use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// One-sided power spectral density estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Periodogram {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
}

/// Periodogram of the mean-removed signal with density scaling
/// (`|X_k|² / (fs·N)`, doubled for bins strictly between DC and Nyquist).
pub fn periodogram(x: &[f64], fs: f64) -> Periodogram {
    let n = x.len();
    if n == 0 {
        return Periodogram {
            freqs: Vec::new(),
            power: Vec::new(),
        };
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = x.iter().map(|v| Complex64::new(v - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let scale = 1.0 / (fs * n as f64);
    let mut freqs = Vec::with_capacity(half + 1);
    let mut power = Vec::with_capacity(half + 1);
    for (k, c) in buf.iter().enumerate().take(half + 1) {
        let mut p = c.norm_sqr() * scale;
        if k != 0 && !(n.is_multiple_of(2) && k == half) {
            p *= 2.0;
        }
        freqs.push(k as f64 * fs / n as f64);
        power.push(p);
    }
    Periodogram { freqs, power }
}
