use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {left_w}x{left_h} vs {right_w}x{right_h}{}", context_suffix(.context))]
    Dimension {
        left_w: u32,
        left_h: u32,
        right_w: u32,
        right_h: u32,
        context: Option<String>,
    },

    #[error("IoU is undefined: the valid region is empty")]
    UndefinedRegion,

    #[error("cannot aggregate an empty list")]
    EmptyAggregate,

    #[error("class id {0} is reserved as the ignore value")]
    InvalidClass(u8),

    #[error("malformed run-length data: {0}")]
    RleFormat(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing entry: {0}")]
    MissingEntry(String),

    #[error("duplicate entry: {0}")]
    DuplicateEntry(String),

    #[error("unsupported format: {0}")]
    Format(String),

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("backend error: {0}")]
    Backend(String),

    #[error("backend contract violation: {0}")]
    ContractViolation(String),

    #[error("failed to spawn adapter `{command}`: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("support pool: {0}")]
    SupportPool(String),

    #[error("group selection: {0}")]
    Group(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("sample {image_id}/class {class_id}: {source}")]
    Sample {
        image_id: String,
        class_id: u8,
        #[source]
        source: Box<Error>,
    },
}

fn context_suffix(context: &Option<String>) -> String {
    match context {
        Some(c) => format!(" ({c})"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn dimension(left: (u32, u32), right: (u32, u32)) -> Self {
        Error::Dimension {
            left_w: left.0,
            left_h: left.1,
            right_w: right.0,
            right_h: right.1,
            context: None,
        }
    }

    /// Attaches a short description (file name, support index) to a dimension error.
    pub fn with_context(self, what: impl Into<String>) -> Self {
        match self {
            Error::Dimension {
                left_w,
                left_h,
                right_w,
                right_h,
                ..
            } => Error::Dimension {
                left_w,
                left_h,
                right_w,
                right_h,
                context: Some(what.into()),
            },
            Error::Backend(msg) => Error::Backend(format!("{}: {msg}", what.into())),
            other => other,
        }
    }
}
