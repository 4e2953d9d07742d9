use std::fmt;

/// Process exit status and diagnostic category.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Usage,
    Io,
    Numerical,
}

impl Kind {
    pub fn code(self) -> i32 {
        match self {
            Kind::Usage => 1,
            Kind::Io => 2,
            Kind::Numerical => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Usage => "usage",
            Kind::Io => "io",
            Kind::Numerical => "numerical",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            kind: Kind::Usage,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            kind: Kind::Io,
            message: message.into(),
        }
    }

    /// `error kind=<kind> code=<n> message="<json-escaped text>"`
    pub fn diagnostic(&self) -> String {
        let flat = self.message.replace(['\n', '\r'], " ");
        format!(
            "error kind={} code={} message={}",
            self.kind.name(),
            self.kind.code(),
            serde_json::to_string(&flat).unwrap_or_default()
        )
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl From<fba_core::Error> for CliError {
    fn from(e: fba_core::Error) -> Self {
        use fba_core::Error as E;
        let kind = match &e {
            E::InvalidParameter { .. } => Kind::Usage,
            E::EmptyRegion => Kind::Numerical,
            _ if e.is_numerical() => Kind::Numerical,
            _ => Kind::Io,
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::io(format!("json: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
