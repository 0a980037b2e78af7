use crate::classify::ClassifyError;
use crate::dataio::DataError;
use crate::evaluate::EvalError;
use crate::features::FeatureError;
use crate::oversample::SampleError;
use crate::signal::SignalError;

/// Any failure raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl Error {
    /// The variant name of the underlying error, e.g. `ChannelLengthMismatch`.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Data(e) => e.name(),
            Error::Signal(e) => e.name(),
            Error::Feature(e) => e.name(),
            Error::Sample(e) => e.name(),
            Error::Classify(e) => e.name(),
            Error::Eval(e) => e.name(),
        }
    }

    /// True for filesystem and parse failures, as opposed to computational ones.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Data(
                DataError::Io { .. }
                    | DataError::Parse { .. }
                    | DataError::MalformedHeader(_)
                    | DataError::ChannelLengthMismatch { .. }
                    | DataError::NonFiniteSample { .. }
                    | DataError::LabelInconsistency { .. }
            ) | Error::Feature(FeatureError::Io { .. } | FeatureError::Parse { .. })
        )
    }

    pub fn is_leakage_refusal(&self) -> bool {
        matches!(self, Error::Eval(EvalError::LeakageNotAcknowledged))
    }
}
