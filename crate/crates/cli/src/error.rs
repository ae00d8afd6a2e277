use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("invalid scenario:\n{}", .0.iter().map(|d| format!("  - {d}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<String>),
    #[error("{context}: {source}")]
    Task {
        context: String,
        #[source]
        source: hamcurv_core::Error,
    },
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn task(context: impl Into<String>) -> impl FnOnce(hamcurv_core::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Task { context, source }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
