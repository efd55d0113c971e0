use semipovm::Error;

/// A run failure and its stable exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or unreadable inputs; exit 2.
    Usage(String),
    /// A resource cap was hit; exit 3.
    Budget(String),
    /// An input or produced object failed validation; exit 4.
    Validation(String),
    /// A hard assertion failed; exit 5.
    Assertion(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Budget(_) => 3,
            Failure::Validation(_) => 4,
            Failure::Assertion(_) => 5,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            Failure::Assertion(_) => "fail",
            _ => "error",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Budget(m) | Failure::Validation(m) | Failure::Assertion(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Budget(_) => Failure::Budget(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.message())
    }
}
