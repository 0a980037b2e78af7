//! Daubechies wavelet packets.
//!
//! One analysis step correlates the signal with the scaling filter `h` (A)
//! and the wavelet filter `g[n] = (-1)^n h[L-1-n]` (D) and keeps every
//! other output. Synthesis is the transpose, which is the exact inverse
//! because the filter pair is orthonormal.
//!
//! Two boundary rules are offered. [`Boundary::Symmetric`] reflects the
//! signal (half-sample symmetric) and keeps every coefficient whose
//! synthesis support touches the signal, giving
//! `floor((N-1)/2) + floor((L-1)/2) + 1` coefficients per branch; it
//! reconstructs exactly but the coefficient set is slightly redundant, so
//! energy is not preserved. [`Boundary::Periodization`] wraps the signal,
//! gives `ceil(N/2)` coefficients and is an orthogonal transform for even
//! lengths, so leaf energies sum to the signal energy.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SignalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Symmetric,
    Periodization,
}

/// Scaling (low-pass reconstruction) filters, orthonormal (sum = √2).
const DB: [&[f64]; 6] = [
    &[
        std::f64::consts::FRAC_1_SQRT_2,
        std::f64::consts::FRAC_1_SQRT_2,
    ],
    &[
        0.48296291314453416,
        0.8365163037378079,
        0.2241438680420134,
        -0.12940952255126037,
    ],
    &[
        0.33267055295008263,
        0.8068915093110925,
        0.45987750211849154,
        -0.13501102001025458,
        -0.08544127388202666,
        0.03522629188570953,
    ],
    &[
        0.2303778133088965,
        0.7148465705529157,
        0.6308807679298589,
        -0.027983769416859854,
        -0.18703481171909309,
        0.030841381835560764,
        0.0328830116668852,
        -0.010597401785069032,
    ],
    &[
        0.16010239797419293,
        0.6038292697971896,
        0.7243085284377729,
        0.13842814590132074,
        -0.24229488706638203,
        -0.032244869584638375,
        0.07757149384004572,
        -0.006241490212798274,
        -0.012580751999081999,
        0.0033357252854737712,
    ],
    &[
        0.11154074335010947,
        0.49462389039845306,
        0.7511339080210954,
        0.31525035170919763,
        -0.22626469396543983,
        -0.12976686756726194,
        0.09750160558732304,
        0.027522865530305727,
        -0.03158203931748603,
        0.0005538422011614961,
        0.004777257510945511,
        -0.0010773010853084796,
    ],
];

#[derive(Debug, Clone, PartialEq)]
pub struct Wavelet {
    name: String,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Wavelet {
    /// Daubechies wavelet with `order` vanishing moments (`2 × order` taps).
    pub fn daubechies(order: usize) -> Result<Self, SignalError> {
        let lo = DB
            .get(order.wrapping_sub(1))
            .ok_or_else(|| SignalError::UnknownWavelet(format!("db{order}")))?
            .to_vec();
        let l = lo.len();
        let hi = (0..l)
            .map(|n| {
                if n % 2 == 0 {
                    lo[l - 1 - n]
                } else {
                    -lo[l - 1 - n]
                }
            })
            .collect();
        Ok(Wavelet {
            name: format!("db{order}"),
            lo,
            hi,
        })
    }

    /// Parses identifiers such as `db4`; `haar` is an alias of `db1`.
    pub fn from_name(name: &str) -> Result<Self, SignalError> {
        let lower = name.trim().to_ascii_lowercase();
        if lower == "haar" {
            return Self::daubechies(1);
        }
        lower
            .strip_prefix("db")
            .and_then(|o| o.parse::<usize>().ok())
            .ok_or_else(|| SignalError::UnknownWavelet(name.to_string()))
            .and_then(Self::daubechies)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn filter_len(&self) -> usize {
        self.lo.len()
    }

    /// Coefficient count of one analysis step on `n` samples.
    pub fn output_len(&self, n: usize, boundary: Boundary) -> usize {
        match boundary {
            Boundary::Symmetric => (n.max(1) - 1) / 2 + (self.lo.len() - 1) / 2 + 1,
            Boundary::Periodization => n.div_ceil(2),
        }
    }
}

impl Default for Wavelet {
    /// db4.
    fn default() -> Self {
        Self::daubechies(4).expect("db4 is tabulated")
    }
}

/// A validated, upper-case A/D path such as `AAD`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct WpdPath(String);

impl WpdPath {
    pub fn parse(s: &str) -> Result<Self, SignalError> {
        let up = s.trim().to_ascii_uppercase();
        if up.is_empty() || !up.chars().all(|c| c == 'A' || c == 'D') {
            return Err(SignalError::InvalidPath(s.to_string()));
        }
        Ok(WpdPath(up))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn level(&self) -> usize {
        self.0.len()
    }

    /// Same path with the last symbol flipped.
    pub fn sibling(&self) -> WpdPath {
        let mut s = self.0.clone();
        let last = if s.pop() == Some('A') { 'D' } else { 'A' };
        s.push(last);
        WpdPath(s)
    }
}

impl TryFrom<String> for WpdPath {
    type Error = SignalError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        WpdPath::parse(&s)
    }
}

impl From<WpdPath> for String {
    fn from(p: WpdPath) -> String {
        p.0
    }
}

impl std::fmt::Display for WpdPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// One node of the packet tree.
#[derive(Debug, Clone, PartialEq)]
pub struct WpdNode {
    pub path: WpdPath,
    pub coefficients: Vec<f64>,
    pub level: usize,
    /// Length of the signal the tree was built from.
    pub input_len: usize,
    pub wavelet: String,
    pub boundary: Boundary,
}

#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period) as usize;
    if m < n {
        m
    } else {
        2 * n - 1 - m
    }
}

/// One analysis step: (approximation, detail).
pub fn dwt_step(x: &[f64], w: &Wavelet, boundary: Boundary) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let l = w.lo.len();
    let m = w.output_len(n, boundary);
    let mut a = Vec::with_capacity(m);
    let mut d = Vec::with_capacity(m);
    match boundary {
        Boundary::Symmetric => {
            let kmin = -(((l - 1) / 2) as isize);
            for k in 0..m as isize {
                let start = 2 * (k + kmin);
                let (mut sa, mut sd) = (0.0, 0.0);
                for j in 0..l {
                    let idx = start + j as isize;
                    let v = if idx >= 0 && (idx as usize) < n {
                        x[idx as usize]
                    } else {
                        x[reflect(idx, n)]
                    };
                    sa += w.lo[j] * v;
                    sd += w.hi[j] * v;
                }
                a.push(sa);
                d.push(sd);
            }
        }
        Boundary::Periodization => {
            let np = 2 * m;
            let at = |i: usize| if i < n { x[i] } else { x[n - 1] };
            for k in 0..m {
                let (mut sa, mut sd) = (0.0, 0.0);
                for j in 0..l {
                    let v = at((2 * k + j) % np);
                    sa += w.lo[j] * v;
                    sd += w.hi[j] * v;
                }
                a.push(sa);
                d.push(sd);
            }
        }
    }
    (a, d)
}

/// Inverse of [`dwt_step`] for a signal of length `n`.
pub fn idwt_step(a: &[f64], d: &[f64], w: &Wavelet, boundary: Boundary, n: usize) -> Vec<f64> {
    let l = w.lo.len();
    match boundary {
        Boundary::Symmetric => {
            let kmin = -(((l - 1) / 2) as isize);
            let mut x = vec![0.0; n];
            for (k, (ak, dk)) in a.iter().zip(d).enumerate() {
                let start = 2 * (k as isize + kmin);
                for j in 0..l {
                    let idx = start + j as isize;
                    if idx >= 0 && (idx as usize) < n {
                        x[idx as usize] += w.lo[j] * ak + w.hi[j] * dk;
                    }
                }
            }
            x
        }
        Boundary::Periodization => {
            let np = 2 * a.len();
            let mut x = vec![0.0; np];
            for (k, (ak, dk)) in a.iter().zip(d).enumerate() {
                for j in 0..l {
                    x[(2 * k + j) % np] += w.lo[j] * ak + w.hi[j] * dk;
                }
            }
            x.truncate(n);
            x
        }
    }
}

fn check_len(n: usize, level: usize, w: &Wavelet) -> Result<(), SignalError> {
    let required = (1usize << level.min(40)).saturating_mul(w.filter_len());
    if n < required {
        return Err(SignalError::SignalTooShort { len: n, required });
    }
    Ok(())
}

/// Coefficients at the node reached by following `path`, with the default
/// (symmetric) boundary.
pub fn wpd(x: &[f64], path: &str, wavelet: &str) -> Result<WpdNode, SignalError> {
    wpd_with(
        x,
        &WpdPath::parse(path)?,
        &Wavelet::from_name(wavelet)?,
        Boundary::default(),
    )
}

pub fn wpd_with(
    x: &[f64],
    path: &WpdPath,
    w: &Wavelet,
    boundary: Boundary,
) -> Result<WpdNode, SignalError> {
    check_len(x.len(), path.level(), w)?;
    let mut cur = x.to_vec();
    for c in path.as_str().chars() {
        let (a, d) = dwt_step(&cur, w, boundary);
        cur = if c == 'A' { a } else { d };
    }
    Ok(WpdNode {
        path: path.clone(),
        coefficients: cur,
        level: path.level(),
        input_len: x.len(),
        wavelet: w.name.clone(),
        boundary,
    })
}

/// All `2^level` leaves, ordered lexicographically by path (A before D).
pub fn wpd_level(
    x: &[f64],
    level: usize,
    w: &Wavelet,
    boundary: Boundary,
) -> Result<Vec<WpdNode>, SignalError> {
    if level == 0 {
        return Err(SignalError::InvalidArgument(
            "level must be at least 1".into(),
        ));
    }
    check_len(x.len(), level, w)?;
    let mut frontier = vec![(String::new(), x.to_vec())];
    for _ in 0..level {
        frontier = frontier
            .into_iter()
            .flat_map(|(p, coeffs)| {
                let (a, d) = dwt_step(&coeffs, w, boundary);
                [(format!("{p}A"), a), (format!("{p}D"), d)]
            })
            .collect();
    }
    Ok(frontier
        .into_iter()
        .map(|(p, coefficients)| WpdNode {
            path: WpdPath(p),
            coefficients,
            level,
            input_len: x.len(),
            wavelet: w.name.clone(),
            boundary,
        })
        .collect())
}

/// Inverts a complete level of leaves back to the original signal.
pub fn wpd_reconstruct(nodes: &[WpdNode]) -> Result<Vec<f64>, SignalError> {
    let first = nodes
        .first()
        .ok_or_else(|| SignalError::IncompleteTree("no nodes".into()))?;
    let level = first.level;
    for n in nodes {
        if n.level != level
            || n.input_len != first.input_len
            || n.wavelet != first.wavelet
            || n.boundary != first.boundary
        {
            return Err(SignalError::IncompleteTree(
                "nodes come from different trees or levels".into(),
            ));
        }
    }
    let mut layer: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for n in nodes {
        if layer
            .insert(n.path.0.clone(), n.coefficients.clone())
            .is_some()
        {
            return Err(SignalError::IncompleteTree(format!(
                "duplicate leaf {}",
                n.path
            )));
        }
    }
    if level >= usize::BITS as usize || layer.len() != 1usize << level {
        return Err(SignalError::IncompleteTree(format!(
            "{} leaves present, level {level} needs {}",
            layer.len(),
            1u128 << level.min(127)
        )));
    }
    let w = Wavelet::from_name(&first.wavelet)?;
    let mut lengths = vec![first.input_len];
    for _ in 0..level {
        lengths.push(w.output_len(*lengths.last().unwrap(), first.boundary));
    }
    for depth in (0..level).rev() {
        let mut parents = BTreeMap::new();
        let keys: Vec<String> = layer.keys().filter(|k| k.ends_with('A')).cloned().collect();
        for key in keys {
            let parent = key[..key.len() - 1].to_string();
            let a = layer.remove(&key).unwrap();
            let d = layer
                .remove(&format!("{parent}D"))
                .ok_or_else(|| SignalError::IncompleteTree(format!("missing leaf {parent}D")))?;
            if a.len() != lengths[depth + 1] || d.len() != lengths[depth + 1] {
                return Err(SignalError::IncompleteTree(format!(
                    "unexpected coefficient count under {parent:?}"
                )));
            }
            parents.insert(
                parent,
                idwt_step(&a, &d, &w, first.boundary, lengths[depth]),
            );
        }
        if !layer.is_empty() {
            let missing: Vec<_> = layer.keys().collect();
            return Err(SignalError::IncompleteTree(format!(
                "leaves without a sibling: {missing:?}"
            )));
        }
        layer = parents;
    }
    Ok(layer.remove("").expect("root present after full reduction"))
}
