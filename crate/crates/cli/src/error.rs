use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("object `{name}`: {msg}")]
    Structure { name: String, msg: String },
    #[error("object `{name}`: {source}")]
    Object {
        name: String,
        source: condstate::Error,
    },
    #[error("task `{task}`: {msg}")]
    Task { task: &'static str, msg: String },
    #[error("{0}")]
    Core(#[from] condstate::Error),
    #[error("unknown {what} `{name}`; available: {available}")]
    Unknown {
        what: &'static str,
        name: String,
        available: String,
    },
}

impl CliError {
    pub fn structure(name: &str, msg: impl Into<String>) -> Self {
        CliError::Structure {
            name: name.to_string(),
            msg: msg.into(),
        }
    }

    /// 1: unreadable or malformed input; 2: validation failure;
    /// 3: numerical domain error. Objects rejected while loading always count
    /// as validation failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. }
            | CliError::Parse(_)
            | CliError::Structure { .. }
            | CliError::Task { .. }
            | CliError::Unknown { .. } => 1,
            CliError::Object { .. } => 2,
            CliError::Core(source) => {
                if source.is_numerical_domain() {
                    3
                } else {
                    2
                }
            }
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
