use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("negative duration {0} fs")]
    NegativeDuration(f64),

    #[error("step size {dt_fs} fs exceeds fwhm/20 = {max_fs} fs")]
    StepTooLarge { dt_fs: f64, max_fs: f64 },

    #[error("delta envelope has no finite duration; use apply_pulse_delta")]
    DeltaEnvelope,

    #[error("empty delay grid")]
    EmptyDelays,

    #[error("delay grid must be strictly increasing (index {0})")]
    UnorderedDelays(usize),

    #[error("delay {delay_fs} fs is below the minimum of {min_fs} fs")]
    DelayBelowMinimum { delay_fs: f64, min_fs: f64 },

    #[error("finite pulses overlap at delay {delay_fs} fs")]
    PulseOverlap { delay_fs: f64 },

    #[error("trace undersampled: largest step {step_fs} fs exceeds carrier period / 8 = {max_fs} fs")]
    Undersampled { step_fs: f64, max_fs: f64 },

    #[error("mode spacing too non-uniform for the revival model ({deviation_pct:.1}% deviation)")]
    NonUniformSpacing { deviation_pct: f64 },

    #[error("not enough usable points: need {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("non-positive value {value} at index {index}")]
    NonPositive { index: usize, value: f64 },

    #[error("no decay detected")]
    NoDecay,

    #[error("no temperature dependence")]
    NoTemperatureDependence,

    #[error("envelope has no minimum within horizon")]
    NoMinimum,
}

impl Error {
    /// True for failures of the numerics on otherwise well-formed input
    /// (degenerate fits, envelopes without structure).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::TooFewPoints { .. }
                | Error::NoDecay
                | Error::NoTemperatureDependence
                | Error::NoMinimum
                | Error::NonUniformSpacing { .. }
        )
    }
}
