use std::fmt;

use envyorder::Error;

/// Some verification suite failed.
pub const EXIT_VERIFY_FAILED: i32 = 1;
/// Unreadable or invalid input.
pub const EXIT_INVALID: i32 = 2;
/// Flags that do not fit the problem or each other.
pub const EXIT_INCOMPATIBLE: i32 = 3;
/// A size or enumeration cap was exceeded.
pub const EXIT_SIZE_CAP: i32 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INVALID, message: message.into() }
    }

    pub fn incompatible(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INCOMPATIBLE, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::IncompatibleScheme(_) | Error::WrongWeightClass(_) | Error::UnsupportedDistribution(_) => {
                EXIT_INCOMPATIBLE
            }
            Error::SizeCap { .. } | Error::SupportTooLarge { .. } => EXIT_SIZE_CAP,
            Error::Invalid(_)
            | Error::InfeasibleCapacity { .. }
            | Error::Unmatchable { .. }
            | Error::NotStochastic(_)
            | Error::DimensionMismatch(_) => EXIT_INVALID,
        };
        CliError { code, message: e.to_string() }
    }
}
