use std::fmt;

/// Failures surfaced by the command-line tool.
#[derive(Debug)]
pub enum CliError {
    Core(kmboot_core::Error),
    /// Malformed input data.
    Input(String),
    /// Invalid flags or scenario file.
    Config(String),
    Io(String),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Input(_) => "invalid_input",
            CliError::Config(_) => "invalid_config",
            CliError::Io(_) => "io_error",
        }
    }

    /// 2 for validation problems, 3 when every bootstrap replicate was dropped.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(kmboot_core::Error::BootstrapDegenerate { .. }) => 3,
            CliError::Io(_) => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Input(m) | CliError::Config(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<kmboot_core::Error> for CliError {
    fn from(e: kmboot_core::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
