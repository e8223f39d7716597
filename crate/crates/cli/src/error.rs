use thiserror::Error;

/// Failure of a subcommand, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("audit failure: {0}")]
    Audit(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Audit(_) => 4,
        }
    }
}

impl From<paxp_core::Error> for CliError {
    fn from(e: paxp_core::Error) -> Self {
        match e {
            paxp_core::Error::InvalidThreshold(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(format!("{}: {e}", variant_name(&e))),
        }
    }
}

/// `SpaceTooLarge { .. }` -> `SpaceTooLarge`.
fn variant_name(e: &paxp_core::Error) -> String {
    let debug = format!("{e:?}");
    debug
        .split(|c: char| !c.is_alphanumeric())
        .next()
        .unwrap_or_default()
        .to_string()
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
