//! Signal conditioning and decomposition front-ends.

mod butterworth;
mod emd;
mod spectrum;
mod wavelet;

pub use butterworth::{
    butterworth_bandpass, butterworth_bandpass_sos, frequency_response, sosfilt, sosfiltfilt,
    Section,
};
pub use emd::{count_extrema, count_zero_crossings, emd, nth_emd, Emd, ImfSet};
pub use spectrum::{periodogram, Periodogram};
pub use wavelet::{
    dwt_step, idwt_step, wpd, wpd_level, wpd_reconstruct, wpd_with, Boundary, Wavelet, WpdNode,
    WpdPath,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SignalError {
    #[error("InvalidBand: need 0 < low ({low}) < high ({high}) < nyquist ({nyquist})")]
    InvalidBand { low: f64, high: f64, nyquist: f64 },
    #[error("SignalTooShort: {len} samples, at least {required} required")]
    SignalTooShort { len: usize, required: usize },
    #[error("UnknownWavelet: {0}")]
    UnknownWavelet(String),
    #[error("InvalidPath: {0:?} (expected a non-empty string over A/D)")]
    InvalidPath(String),
    #[error("IncompleteTree: {0}")]
    IncompleteTree(String),
    #[error("InvalidArgument: {0}")]
    InvalidArgument(String),
}

impl SignalError {
    pub fn name(&self) -> &'static str {
        match self {
            SignalError::InvalidBand { .. } => "InvalidBand",
            SignalError::SignalTooShort { .. } => "SignalTooShort",
            SignalError::UnknownWavelet(_) => "UnknownWavelet",
            SignalError::InvalidPath(_) => "InvalidPath",
            SignalError::IncompleteTree(_) => "IncompleteTree",
            SignalError::InvalidArgument(_) => "InvalidArgument",
        }
    }
}
