use std::process::ExitCode;

use primewin::{Error, ErrorKind};

/// How a command finished; each variant has a fixed exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerificationFailed,
    InvalidInput,
    ResourceOrBound,
    Interrupted,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::VerificationFailed => 1,
            Outcome::InvalidInput => 2,
            Outcome::ResourceOrBound => 3,
            Outcome::Interrupted => 4,
        }
    }

    pub fn from_error(e: &Error) -> Self {
        match e.kind() {
            ErrorKind::InvalidInput | ErrorKind::Io => Outcome::InvalidInput,
            ErrorKind::Bound | ErrorKind::Resource => Outcome::ResourceOrBound,
        }
    }

    pub fn from_report(passed: bool) -> Self {
        if passed {
            Outcome::Success
        } else {
            Outcome::VerificationFailed
        }
    }
}

impl From<Outcome> for ExitCode {
    fn from(o: Outcome) -> Self {
        ExitCode::from(o.code())
    }
}
