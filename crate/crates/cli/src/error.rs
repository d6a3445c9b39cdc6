use thiserror::Error;

/// Failures surfaced to the user, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration, missing or mismatched artifacts, failed checks.
    #[error("{0}")]
    Validation(String),
    /// The computation itself broke down.
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }
}

impl From<phaseless::Error> for CliError {
    fn from(e: phaseless::Error) -> Self {
        match e {
            phaseless::Error::Numeric(_) | phaseless::Error::Domain(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_errors_map_to_exit_codes() {
        assert_eq!(CliError::from(phaseless::Error::Numeric("singular".into())).exit_code(), 2);
        assert_eq!(CliError::from(phaseless::Error::Domain("x < 0".into())).exit_code(), 2);
        assert_eq!(CliError::from(phaseless::Error::Config("n = 0".into())).exit_code(), 1);
        assert_eq!(CliError::from(phaseless::Error::Version { expected: 1, found: 2 }).exit_code(), 1);
    }
}
