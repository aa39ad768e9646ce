use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("transfer function denominator vanishes at {freq_hz} Hz")]
    Evaluation { freq_hz: f64 },

    #[error("singular evaluation: {0}")]
    Singular(String),

    #[error("improper transfer function (numerator degree {num} > denominator degree {den})")]
    Improper { num: usize, den: usize },

    #[error("metric undefined: {0}")]
    MetricUndefined(String),

    #[error("no intersection between {lo_hz} Hz and {hi_hz} Hz")]
    NoIntersection { lo_hz: f64, hi_hz: f64 },

    #[error("{freq_hz} Hz lies outside the envelope band [{lo_hz}, {hi_hz}] Hz")]
    OutOfBand { freq_hz: f64, lo_hz: f64, hi_hz: f64 },

    #[error("scan has no {0} samples")]
    ChannelMissing(&'static str),

    #[error("unstable system, poles: {}", format_poles(.poles))]
    Unstable { poles: Vec<num_complex::Complex64> },

    #[error("response at {freq_hz} Hz did not become stationary: {detail}")]
    Convergence { freq_hz: f64, detail: String },

    #[error("scan aborted after consecutive failures, last at {freq_hz} Hz: {source}")]
    ScanAborted {
        freq_hz: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

fn format_poles(poles: &[num_complex::Complex64]) -> String {
    poles.iter().map(|p| format!("{:.6}{:+.6}j", p.re, p.im)).collect::<Vec<_>>().join(", ")
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
