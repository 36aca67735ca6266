use exforge_core::augment::AugmentError;
use exforge_core::classifier::ClassifierError;
use exforge_core::emit::EmitError;
use exforge_core::filler::FillError;
use exforge_core::miner::MinerError;
use exforge_core::surface::SurfaceError;
use exforge_core::telemetry::TelemetryError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags or configuration.
    #[error("bad config: {0}")]
    Config(String),
    /// Missing or unreadable input, or an output that cannot be written.
    #[error("input error: {0}")]
    Input(String),
    /// Inputs were read but violate a contract.
    #[error("validation failure: {0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
            CliError::Validation(_) => EXIT_VALIDATION,
        }
    }

    /// The diagnostic as one line.
    pub fn one_line(&self) -> String {
        self.to_string().split_whitespace().collect::<Vec<_>>().join(" ")
    }
}

impl From<SurfaceError> for CliError {
    fn from(e: SurfaceError) -> Self {
        match e {
            SurfaceError::Io { .. } | SurfaceError::Parse(_) => CliError::Input(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<TelemetryError> for CliError {
    fn from(e: TelemetryError) -> Self {
        match e {
            TelemetryError::InvalidK => CliError::Config(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<MinerError> for CliError {
    fn from(e: MinerError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ClassifierError> for CliError {
    fn from(e: ClassifierError) -> Self {
        match e {
            ClassifierError::Io { .. }
            | ClassifierError::Data { .. }
            | ClassifierError::Model(_)
            | ClassifierError::UnsupportedModelVersion { .. } => CliError::Input(e.to_string()),
            ClassifierError::InvalidParams(_) => CliError::Config(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<FillError> for CliError {
    fn from(e: FillError) -> Self {
        match e {
            FillError::Record { .. } => CliError::Input(e.to_string()),
            FillError::UnknownCommand(_) => CliError::Validation(e.to_string()),
        }
    }
}

impl From<EmitError> for CliError {
    fn from(e: EmitError) -> Self {
        match e {
            EmitError::Io { .. } => CliError::Input(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<AugmentError> for CliError {
    fn from(e: AugmentError) -> Self {
        CliError::Validation(e.to_string())
    }
}
