use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("registry error: {0}")]
    Registry(String),
    #[error("precision error: generator `{name}` has {available} digits, {requested} requested")]
    Precision {
        name: String,
        available: u32,
        requested: u32,
    },
    #[error("indistinguishable points after {digits} digits")]
    Indistinguishable { digits: u32 },
    #[error("rational overflow in {0}")]
    Overflow(&'static str),
    #[error("coverage error: {0}")]
    Coverage(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("spec error: {0}")]
    Spec(String),
    #[error("eigencomponent empty for lambda={lambda}, m={m}")]
    EigenComponentEmpty { lambda: String, m: usize },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("marker error: {0}")]
    Marker(String),
    #[error("certification error: {0}")]
    Certification(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
