use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed input syntax. `line` is 1-based and counts the header.
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("invalid record{}: missing or invalid field `{field}`: {message}", fmt_line(.line))]
    Validation {
        field: String,
        line: Option<u64>,
        message: String,
    },

    #[error("value out of range for `{field}`: {message}")]
    Range { field: String, message: String },

    #[error("no citation baseline available{}", .id.as_ref().map(|i| format!(" for record `{i}`")).unwrap_or_default())]
    MissingBaseline { id: Option<String> },

    /// A binary or structured file that does not match its expected layout.
    #[error("invalid file format: {0}")]
    Format(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn fmt_line(line: &Option<u64>) -> String {
    match line {
        Some(l) => format!(" at line {l}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn validation(field: &str, line: Option<u64>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.to_string(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn range(field: &str, message: impl Into<String>) -> Self {
        Error::Range {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
