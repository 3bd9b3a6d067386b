use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("field error: {0}")]
    Field(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid algebra: {0}")]
    Algebra(String),
    #[error("invalid module: {0}")]
    Module(String),
    #[error("invalid category: {0}")]
    Category(String),
    #[error("invalid functor: {0}")]
    Functor(String),
    #[error("invalid diagram: {0}")]
    Diagram(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("invalid complex: {0}")]
    Complex(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
