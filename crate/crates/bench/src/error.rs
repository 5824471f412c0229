use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Solver(#[from] fasmg::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("not converged: {0}")]
    NotConverged(String),
}

impl BenchError {
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            BenchError::NotConverged(_) => 3,
            BenchError::Solver(_) | BenchError::Io(_) => 1,
        }
    }
}

pub type BenchResult<T> = std::result::Result<T, BenchError>;
