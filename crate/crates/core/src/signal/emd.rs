//! Empirical mode decomposition by envelope sifting.
//!
//! Envelopes are natural cubic splines through the local extrema, with the
//! two outermost extrema at each end mirrored about the boundary sample.
//! Sifting of one mode stops when the Cauchy-type change ratio
//! `Σ(h_prev - h)² / Σ h_prev²` drops below the threshold and the number of
//! extrema and zero crossings differ by at most one, or after `max_sifts`.

use super::SignalError;

/// Intrinsic mode functions plus the final residual.
#[derive(Debug, Clone, PartialEq)]
pub struct ImfSet {
    pub imfs: Vec<Vec<f64>>,
    pub residual: Vec<f64>,
}

impl ImfSet {
    /// Elementwise sum of all modes and the residual.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = self.residual.clone();
        for imf in &self.imfs {
            for (o, v) in out.iter_mut().zip(imf) {
                *o += v;
            }
        }
        out
    }

    /// Whether mode `i` has extrema and zero-crossing counts within one.
    pub fn is_proper_imf(&self, i: usize) -> bool {
        let h = &self.imfs[i];
        let (mx, mn) = count_extrema(h);
        (mx + mn).abs_diff(count_zero_crossings(h)) <= 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Emd {
    pub max_imfs: usize,
    pub sift_sd_threshold: f64,
    pub max_sifts: usize,
}

pub const MIN_EMD_LEN: usize = 16;

impl Emd {
    pub fn new(max_imfs: usize) -> Self {
        Emd {
            max_imfs,
            sift_sd_threshold: 0.25,
            max_sifts: 100,
        }
    }

    pub fn decompose(&self, x: &[f64]) -> Result<ImfSet, SignalError> {
        let n = x.len();
        if n < MIN_EMD_LEN {
            return Err(SignalError::SignalTooShort {
                len: n,
                required: MIN_EMD_LEN,
            });
        }
        if self.max_imfs == 0 {
            return Err(SignalError::InvalidArgument(
                "max_imfs must be at least 1".into(),
            ));
        }
        let cap = self.max_imfs.min((n as f64).log2().ceil() as usize + 1);
        let mut residual = x.to_vec();
        let mut imfs = Vec::new();
        let mut scratch = Scratch::default();
        while imfs.len() < cap {
            let (mx, mn) = count_extrema(&residual);
            if mx == 0 || mn == 0 {
                break;
            }
            let imf = self.sift(&residual, &mut scratch);
            for (r, h) in residual.iter_mut().zip(&imf) {
                *r -= h;
            }
            imfs.push(imf);
        }
        Ok(ImfSet { imfs, residual })
    }

    fn sift(&self, r: &[f64], scratch: &mut Scratch) -> Vec<f64> {
        let mut h = r.to_vec();
        for _ in 0..self.max_sifts {
            let Some(mean) = envelope_mean(&h, scratch) else {
                break;
            };
            let mut num = 0.0;
            let mut den = 0.0;
            for (v, m) in h.iter_mut().zip(&mean) {
                num += m * m;
                den += *v * *v;
                *v -= m;
            }
            let sd = if den > 0.0 { num / den } else { 0.0 };
            if sd < self.sift_sd_threshold {
                let (mx, mn) = count_extrema(&h);
                if (mx + mn).abs_diff(count_zero_crossings(&h)) <= 1 {
                    break;
                }
            }
        }
        h
    }
}

/// Decomposition with the default sifting rule.
pub fn emd(x: &[f64], max_imfs: usize) -> Result<ImfSet, SignalError> {
    Emd::new(max_imfs).decompose(x)
}

/// The `n`-th mode (1-based); the residual when fewer than `n` modes exist.
pub fn nth_emd(x: &[f64], n: usize) -> Result<Vec<f64>, SignalError> {
    if n == 0 {
        return Err(SignalError::InvalidArgument("EMD stage is 1-based".into()));
    }
    let mut set = emd(x, n)?;
    Ok(if set.imfs.len() >= n {
        set.imfs.swap_remove(n - 1)
    } else {
        set.residual
    })
}

/// (maxima, minima) counts over interior samples; a plateau counts once.
pub fn count_extrema(x: &[f64]) -> (usize, usize) {
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    find_extrema(x, &mut maxima, &mut minima);
    (maxima.len(), minima.len())
}

pub fn count_zero_crossings(x: &[f64]) -> usize {
    let mut last = 0.0_f64;
    let mut count = 0;
    for &v in x {
        if v != 0.0 {
            if last != 0.0 && (v > 0.0) != (last > 0.0) {
                count += 1;
            }
            last = v;
        }
    }
    count
}

fn find_extrema(x: &[f64], maxima: &mut Vec<usize>, minima: &mut Vec<usize>) {
    maxima.clear();
    minima.clear();
    for i in 1..x.len().saturating_sub(1) {
        if x[i - 1] < x[i] && x[i] >= x[i + 1] {
            maxima.push(i);
        } else if x[i - 1] > x[i] && x[i] <= x[i + 1] {
            minima.push(i);
        }
    }
}

#[derive(Default)]
struct Scratch {
    maxima: Vec<usize>,
    minima: Vec<usize>,
    knots_t: Vec<f64>,
    knots_y: Vec<f64>,
    upper: Vec<f64>,
    lower: Vec<f64>,
    spline: Spline,
}

fn envelope_mean(h: &[f64], s: &mut Scratch) -> Option<Vec<f64>> {
    find_extrema(h, &mut s.maxima, &mut s.minima);
    if s.maxima.is_empty() || s.minima.is_empty() {
        return None;
    }
    let n = h.len();
    build_knots(h, &s.maxima, &mut s.knots_t, &mut s.knots_y);
    s.spline.fit(&s.knots_t, &s.knots_y);
    s.spline.eval_grid(n, &mut s.upper);
    build_knots(h, &s.minima, &mut s.knots_t, &mut s.knots_y);
    s.spline.fit(&s.knots_t, &s.knots_y);
    s.spline.eval_grid(n, &mut s.lower);
    Some(
        s.upper
            .iter()
            .zip(&s.lower)
            .map(|(u, l)| 0.5 * (u + l))
            .collect(),
    )
}

fn build_knots(h: &[f64], idx: &[usize], t: &mut Vec<f64>, y: &mut Vec<f64>) {
    let last = (h.len() - 1) as f64;
    t.clear();
    y.clear();
    let m = idx.len().min(2);
    for &i in idx[..m].iter().rev() {
        t.push(-(i as f64));
        y.push(h[i]);
    }
    for &i in idx {
        t.push(i as f64);
        y.push(h[i]);
    }
    for &i in idx[idx.len() - m..].iter().rev() {
        t.push(2.0 * last - i as f64);
        y.push(h[i]);
    }
}

/// Natural cubic spline with reusable buffers.
#[derive(Default)]
struct Spline {
    t: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
}

impl Spline {
    fn fit(&mut self, t: &[f64], y: &[f64]) {
        let k = t.len();
        self.t.clear();
        self.t.extend_from_slice(t);
        self.y.clear();
        self.y.extend_from_slice(y);
        self.m.clear();
        self.m.resize(k, 0.0);
        if k < 3 {
            return;
        }
        // Thomas algorithm on the interior second derivatives.
        self.c.clear();
        self.c.resize(k, 0.0);
        self.d.clear();
        self.d.resize(k, 0.0);
        for i in 1..k - 1 {
            let h0 = t[i] - t[i - 1];
            let h1 = t[i + 1] - t[i];
            let a = h0;
            let b = 2.0 * (h0 + h1);
            let cc = h1;
            let rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            let denom = b - a * self.c[i - 1];
            self.c[i] = cc / denom;
            self.d[i] = (rhs - a * self.d[i - 1]) / denom;
        }
        for i in (1..k - 1).rev() {
            self.m[i] = self.d[i] - self.c[i] * self.m[i + 1];
        }
    }

    fn eval_grid(&self, n: usize, out: &mut Vec<f64>) {
        out.clear();
        out.reserve(n);
        let t = &self.t;
        let mut seg = 0;
        for j in 0..n {
            let x = j as f64;
            while seg + 2 < t.len() && x > t[seg + 1] {
                seg += 1;
            }
            let h = t[seg + 1] - t[seg];
            let a = (t[seg + 1] - x) / h;
            let b = (x - t[seg]) / h;
            let v = a * self.y[seg]
                + b * self.y[seg + 1]
                + ((a * a * a - a) * self.m[seg] + (b * b * b - b) * self.m[seg + 1]) * h * h / 6.0;
            out.push(v);
        }
    }
}
