//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong across the library surface.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Zero-forcing equalization at `h = 0` is undefined; trim the estimate
    /// before inverting it.
    #[error("zero-forcing coefficient requested for h = 0; trim the channel estimate first")]
    ZeroForcingSingular,

    /// The zeroth-order symbol MSE is zero, so the SNR approximation diverges.
    #[error("zeroth-order symbol MSE is zero; the SNR approximation diverges")]
    InfiniteZerothSnr,

    /// A true-metric Monte Carlo run was requested without trimming. The
    /// inverted estimate `1/h_hat` has no finite second moment when `h_hat`
    /// can come arbitrarily close to zero, so the sample mean would not
    /// converge to anything.
    #[error("{0} requires trim_lambda > 0: untrimmed zero-forcing has no finite mean-square error")]
    InfiniteMoment(&'static str),

    /// Sweep-spec parsing or validation failure: unreadable file, malformed
    /// TOML, unknown key, or an invalid combination of settings.
    #[error("config error: {0}")]
    Config(String),

    /// Filesystem trouble while reading a spec or writing CSV.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit code for the CLI: configuration problems exit 2,
    /// numerical/runtime problems exit 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }
}
