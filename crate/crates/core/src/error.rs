use thiserror::Error;

/// Errors raised anywhere in the engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum JclError {
    #[error("photon frequency `{field}` must be positive, got {value}")]
    NonPositiveOmega { field: &'static str, value: f64 },

    #[error("dot level spacing `{field}` must be positive, got {value}")]
    NonPositiveSpacing { field: &'static str, value: f64 },

    #[error("photon cutoff `{field}` must be at least 1")]
    ZeroCutoff { field: &'static str },

    #[error("field `{field}` must be finite, got {value}")]
    NonFinite { field: &'static str, value: f64 },

    #[error("field `{field}` = {value} is outside {range}")]
    OutOfRange {
        field: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("energy {lambda_rel} lies outside the open lead band ({lower}, {upper})")]
    OutOfBand {
        lambda_rel: f64,
        lower: f64,
        upper: f64,
    },

    #[error("energy {lambda} coincides with a band edge")]
    BandEdgeSingularity { lambda: f64 },

    #[error("no scattering channel is open at energy {lambda}")]
    NoOpenChannels { lambda: f64 },

    #[error("linear system is numerically singular at energy {lambda} (condition estimate {condition:e})")]
    SingularLinearSystem { lambda: f64, condition: f64 },

    #[error("adaptive quadrature stopped at error {achieved:e} above target {target:e} after {panels} panels")]
    QuadratureNotConverged {
        achieved: f64,
        target: f64,
        panels: usize,
    },

    #[error("photon cutoff did not converge up to N_ph = {nph} (last change {change:e}, target {target:e})")]
    CutoffNotConverged { nph: usize, change: f64, target: f64 },

    #[error("scenario assertion failed: {0}")]
    ScenarioAssertionFailed(String),
}

pub type Result<T> = std::result::Result<T, JclError>;
