//! Digital Butterworth band-pass design and zero-phase filtering.
//!
//! Design follows the classic analog route: an order-N low-pass prototype,
//! the low-pass to band-pass transform at pre-warped edges, then the
//! bilinear transform. The result is N second-order sections, each with
//! one zero at z = 1 and one at z = -1. Zero-phase filtering pads with an
//! odd extension and starts every pass from the steady-state of its first
//! sample, the same conventions as `scipy.signal.sosfiltfilt`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::SignalError;

/// One biquad, `[b0, b1, b2, a0, a1, a2]` with `a0 = 1`.
pub type Section = [f64; 6];

/// Designs the band-pass as second-order sections.
pub fn butterworth_bandpass_sos(
    order: usize,
    low_hz: f64,
    high_hz: f64,
    fs: f64,
) -> Result<Vec<Section>, SignalError> {
    let nyquist = fs / 2.0;
    if !(low_hz > 0.0 && low_hz < high_hz && high_hz < nyquist) || !fs.is_finite() {
        return Err(SignalError::InvalidBand {
            low: low_hz,
            high: high_hz,
            nyquist,
        });
    }
    if order == 0 {
        return Err(SignalError::InvalidArgument(
            "filter order must be at least 1".into(),
        ));
    }
    let fs2 = 2.0 * fs;
    let w1 = fs2 * (PI * low_hz / fs).tan();
    let w2 = fs2 * (PI * high_hz / fs).tan();
    let bw = w2 - w1;
    let w0_sq = w1 * w2;

    let mut poles = Vec::with_capacity(2 * order);
    for k in 0..order {
        let theta = PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
        let proto = Complex64::from_polar(1.0, theta);
        let a = proto * (bw / 2.0);
        let d = (a * a - w0_sq).sqrt();
        for s in [a + d, a - d] {
            poles.push((fs2 + s) / (fs2 - s));
        }
    }

    let mut sections = Vec::with_capacity(order);
    let mut reals = Vec::new();
    for p in &poles {
        if p.im > 1e-12 {
            sections.push([1.0, 0.0, -1.0, 1.0, -2.0 * p.re, p.norm_sqr()]);
        } else if p.im.abs() <= 1e-12 {
            reals.push(p.re);
        }
    }
    reals.sort_by(|a, b| a.total_cmp(b));
    for pair in reals.chunks(2) {
        let (r1, r2) = (pair[0], *pair.get(1).unwrap_or(&0.0));
        sections.push([1.0, 0.0, -1.0, 1.0, -(r1 + r2), r1 * r2]);
    }

    // Unit gain at the digital image of the geometric centre frequency.
    let center = 2.0 * (w0_sq.sqrt() / fs2).atan();
    let gain = response_at(&sections, center).norm();
    sections[0][0] /= gain;
    sections[0][1] /= gain;
    sections[0][2] /= gain;
    Ok(sections)
}

fn response_at(sections: &[Section], omega: f64) -> Complex64 {
    let z1 = Complex64::from_polar(1.0, -omega);
    let z2 = z1 * z1;
    sections.iter().fold(Complex64::new(1.0, 0.0), |acc, s| {
        acc * (s[0] + s[1] * z1 + s[2] * z2) / (s[3] + s[4] * z1 + s[5] * z2)
    })
}

/// Magnitude of the cascade at `freq_hz` (single pass).
pub fn frequency_response(sections: &[Section], freq_hz: f64, fs: f64) -> f64 {
    response_at(sections, 2.0 * PI * freq_hz / fs).norm()
}

/// Steady-state section states for a unit step input.
fn steady_state(sections: &[Section]) -> Vec<[f64; 2]> {
    let mut scale = 1.0;
    sections
        .iter()
        .map(|s| {
            let (b0, b1, b2, a1, a2) = (s[0], s[1], s[2], s[4], s[5]);
            let dc = (b0 + b1 + b2) / (1.0 + a1 + a2);
            let z2 = b2 - a2 * dc;
            let z1 = b1 - a1 * dc + z2;
            let zi = [scale * z1, scale * z2];
            scale *= dc;
            zi
        })
        .collect()
}

/// Runs the cascade (transposed direct form II) from the given states.
pub fn sosfilt(sections: &[Section], x: &[f64], zi: Option<&[[f64; 2]]>) -> Vec<f64> {
    let mut state: Vec<[f64; 2]> = match zi {
        Some(z) => z.to_vec(),
        None => vec![[0.0; 2]; sections.len()],
    };
    let mut y = x.to_vec();
    for (s, z) in sections.iter().zip(state.iter_mut()) {
        for v in y.iter_mut() {
            let xin = *v;
            let out = s[0] * xin + z[0];
            z[0] = s[1] * xin - s[4] * out + z[1];
            z[1] = s[2] * xin - s[5] * out;
            *v = out;
        }
    }
    y
}

/// Forward-backward filtering with odd-extension padding.
pub fn sosfiltfilt(sections: &[Section], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let pad = (3 * (2 * sections.len() + 1)).min(n - 1);
    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend((0..pad).map(|i| 2.0 * x[0] - x[pad - i]));
    ext.extend_from_slice(x);
    ext.extend((0..pad).map(|i| 2.0 * x[n - 1] - x[n - 2 - i]));

    let zi = steady_state(sections);
    let scaled = |v: f64| zi.iter().map(|z| [z[0] * v, z[1] * v]).collect::<Vec<_>>();
    let mut y = sosfilt(sections, &ext, Some(&scaled(ext[0])));
    y.reverse();
    let mut y = sosfilt(sections, &y, Some(&scaled(y[0])));
    y.reverse();
    y[pad..pad + n].to_vec()
}

/// Zero-phase Butterworth band-pass of order `order` (prototype order; the
/// resulting digital filter has `2 × order` poles).
pub fn butterworth_bandpass(
    x: &[f64],
    fs: f64,
    low_hz: f64,
    high_hz: f64,
    order: usize,
) -> Result<Vec<f64>, SignalError> {
    let sections = butterworth_bandpass_sos(order, low_hz, high_hz, fs)?;
    if x.len() <= 3 * order {
        return Err(SignalError::SignalTooShort {
            len: x.len(),
            required: 3 * order + 1,
        });
    }
    Ok(sosfiltfilt(&sections, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed-form magnitude of the bilinear Butterworth band-pass.
    fn analytic_magnitude(f: f64, fs: f64, low: f64, high: f64, order: i32) -> f64 {
        let warp = |v: f64| 2.0 * fs * (PI * v / fs).tan();
        let (w1, w2, w) = (warp(low), warp(high), warp(f));
        let omega = (w * w - w1 * w2) / (w * (w2 - w1));
        1.0 / (1.0 + omega.powi(2 * order)).sqrt()
    }

    #[test]
    fn design_matches_closed_form_response() {
        let sos = butterworth_bandpass_sos(4, 0.08, 4.0, 20.0).unwrap();
        assert_eq!(sos.len(), 4);
        for f in [0.01, 0.05, 0.08, 0.3, 1.0, 2.5, 4.0, 6.0, 9.0] {
            let got = frequency_response(&sos, f, 20.0);
            let want = analytic_magnitude(f, 20.0, 0.08, 4.0, 4);
            assert!((got - want).abs() < 1e-9, "f={f}: {got} vs {want}");
        }
    }

    #[test]
    fn matches_scipy_sosfiltfilt() {
        // scipy.signal.sosfiltfilt(butter(4, [0.08, 4.0], 'bandpass', fs=20, output='sos'), x)
        // with x[i] = sin(0.7 i) + 0.3 cos(0.05 i) + 0.01 i, i = 0..200.
        let x: Vec<f64> = (0..200)
            .map(|i| {
                let t = i as f64;
                (0.7 * t).sin() + 0.3 * (0.05 * t).cos() + 0.01 * t
            })
            .collect();
        let y = butterworth_bandpass(&x, 20.0, 0.08, 4.0, 4).unwrap();
        let expected = [
            (0, SCIPY_REF[0]),
            (17, SCIPY_REF[1]),
            (100, SCIPY_REF[2]),
            (150, SCIPY_REF[3]),
            (199, SCIPY_REF[4]),
        ];
        for (i, want) in expected {
            assert!((y[i] - want).abs() < 1e-9, "y[{i}] = {} vs {want}", y[i]);
        }
    }

    const SCIPY_REF: [f64; 5] = [
        0.019749651580491273,
        -0.5484558408580776,
        1.0756928356218582,
        -1.0315992448689992,
        -0.158531999631632,
    ];

    #[test]
    fn constant_is_removed() {
        let y = butterworth_bandpass(&vec![5.0; 2000], 20.0, 0.08, 4.0, 4).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-3));
    }

    #[test]
    fn in_band_sine_passes_with_zero_lag() {
        let n = 4000;
        let x: Vec<f64> = (0..n)
            .map(|i| (2.0 * PI * 1.0 * i as f64 / 20.0).sin())
            .collect();
        let y = butterworth_bandpass(&x, 20.0, 0.08, 4.0, 4).unwrap();
        let central = &y[n / 4..3 * n / 4];
        let peak = central.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let expected = analytic_magnitude(1.0, 20.0, 0.08, 4.0, 4).powi(2);
        assert!((0.95..=1.05).contains(&peak));
        assert!((peak - expected).abs() < 1e-3);
        let xcorr = |lag: isize| -> f64 {
            (n / 4..3 * n / 4)
                .map(|i| x[i] * y[(i as isize + lag) as usize])
                .sum()
        };
        let best = (-10..=10)
            .max_by(|a, b| xcorr(*a).total_cmp(&xcorr(*b)))
            .unwrap();
        assert_eq!(best, 0);
    }

    #[test]
    fn band_validation() {
        assert!(matches!(
            butterworth_bandpass(&[0.0; 100], 20.0, 4.0, 0.08, 4),
            Err(SignalError::InvalidBand { .. })
        ));
        assert!(matches!(
            butterworth_bandpass(&[0.0; 100], 20.0, 0.08, 10.0, 4),
            Err(SignalError::InvalidBand { .. })
        ));
        assert!(matches!(
            butterworth_bandpass(&[0.0; 12], 20.0, 0.08, 4.0, 4),
            Err(SignalError::SignalTooShort { .. })
        ));
    }
}
