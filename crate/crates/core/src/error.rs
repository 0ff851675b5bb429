use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A scalar parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Structured input failed to parse or validate. `pointer` is a JSON
    /// pointer to the offending value (empty for the document root).
    #[error("parse error at `{pointer}`: {message}")]
    Parse { pointer: String, message: String },

    #[error(
        "consumer {consumer} appliance {appliance}: start {start} outside window [{est}, {lst}]"
    )]
    WindowViolation {
        consumer: usize,
        appliance: usize,
        start: usize,
        est: usize,
        lst: usize,
    },

    /// The search space exceeds the configured budget.
    #[error("search space of {required} nodes exceeds budget of {max_nodes}")]
    BudgetExceeded { required: u128, max_nodes: u64 },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("integration diverged at step {step}: non-finite state")]
    Integration { step: u64 },

    #[error("training error: {0}")]
    Training(String),

    #[error("generation error: {0}")]
    Generation(String),
}

impl Error {
    /// Stable machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::Parse { .. } => "parse",
            Error::WindowViolation { .. } => "window_violation",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::Shape(_) => "shape",
            Error::Integration { .. } => "integration",
            Error::Training(_) => "training",
            Error::Generation(_) => "generation",
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn parse(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}

/// Deserialize JSON, reporting failures with a JSON pointer to the value that
/// could not be read.
pub(crate) fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = json_pointer(e.path());
        Error::parse(pointer, e.into_inner().to_string())
    })
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } | Segment::Enum { variant: key } => {
                out.push_str(&key.replace('~', "~0").replace('/', "~1"))
            }
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, serde::Deserialize)]
    #[allow(dead_code)]
    struct Doc {
        items: Vec<Item>,
    }

    #[derive(Debug, serde::Deserialize)]
    #[allow(dead_code)]
    struct Item {
        #[serde(rename = "a/b")]
        n: u32,
    }

    #[test]
    fn parse_errors_carry_pointer() {
        let err = from_json::<Doc>(r#"{"items":[{"a/b":1},{"a/b":-3}]}"#).unwrap_err();
        match err {
            Error::Parse { pointer, .. } => assert_eq!(pointer, "/items/1/a~1b"),
            e => panic!("{e:?}"),
        }
        let err = from_json::<Doc>("{").unwrap_err();
        assert_eq!(err.kind(), "parse");
    }
}
