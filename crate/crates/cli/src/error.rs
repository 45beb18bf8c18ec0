use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] tentlim_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for failed computations, 2 for bad input, 3 for exhausted precision.
    pub fn exit_code(&self) -> i32 {
        use tentlim_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Core(e) => match e {
                E::PrecisionExhausted(_) => 3,
                E::MalformedNumber(_)
                | E::ZeroDenominator(_)
                | E::OutOfDomain(_)
                | E::InvalidSlope(_)
                | E::InvalidArgument(_)
                | E::Precondition(_)
                | E::LengthMismatch { .. }
                | E::CenterOutside
                | E::AnchorOutside
                | E::AnchorAtFold
                | E::AnchorNotFixed(_) => 2,
                _ => 1,
            },
        }
    }
}
