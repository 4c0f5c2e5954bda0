use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("EOS table parse error at line {line}: {message}")]
    TableParse { line: usize, message: String },

    #[error("EOS table query outside knot hull: {axis} = {value:e} not in [{lo:e}, {hi:e}]")]
    OutOfTable {
        axis: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("CFL condition violated at node {node}: dt * sum(2 d_ij) / m_i = {ratio}")]
    CflViolation { node: usize, ratio: f64 },

    #[error("inadmissible state at node {node}: {details}")]
    Inadmissible { node: usize, details: String },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
