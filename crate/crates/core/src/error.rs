use thiserror::Error;

use crate::field::Location;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid of {cells} cells on axis {axis} cannot be coarsened {levels} times into even-sized levels")]
    NonDivisibleGrid { axis: usize, cells: usize, levels: usize },

    #[error("grid spacing differs between axes ({0} vs {1})")]
    NonUniformSpacing(f64, f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("ghost values of a {0:?} field are stale")]
    UnfilledGhosts(Location),

    #[error("field layout mismatch: {0}")]
    LocationMismatch(String),

    #[error("sweep plan built for {plan}D applied to a {field}D field")]
    PlanDimMismatch { plan: usize, field: usize },

    #[error("periodic boundary set on only one side of axis {0}")]
    OneSidedPeriodic(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("pressure right-hand side has mean {0:e}; the Neumann problem is incompatible")]
    IncompatibleRhs(f64),

    #[error("step {step} ({formula}) has no binding for {quantity}")]
    MissingBinding { step: usize, formula: String, quantity: String },

    #[error("schedule is invalid: {0}")]
    InvalidSchedule(String),

    #[error("time step {step}: {source}")]
    Step { step: usize, source: Box<Error> },

    #[error("reference data: {0}")]
    ReferenceData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
