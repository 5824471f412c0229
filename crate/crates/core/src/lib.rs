//! Matrix-free FAS multigrid on uniform staggered grids.
//!
//! The crate covers grid levels and halo storage ([`grid`], [`field`],
//! [`bc`]), the Helmholtz-type operator and its relatives ([`stencil`],
//! [`weno`]), multi-color Gauss-Seidel smoothing ([`smoother`]), inter-grid
//! transfers ([`transfer`]), the V-cycle driver ([`fas`]) and projection
//! time stepping for incompressible flow ([`ns`]).

pub mod bc;
pub mod error;
pub mod fas;
pub mod field;
pub mod grid;
pub mod ns;
mod par;
pub mod problems;
pub mod rng;
pub mod smoother;
pub mod stencil;
pub mod transfer;
pub mod weno;

pub use bc::{BoundaryConditions, FaceBc};
pub use error::{Error, Result};
pub use field::{Field, Layout, Location};
pub use grid::{make_hierarchy, GridHierarchy, GridLevel};
pub use par::pairwise_sum;
pub use stencil::OperatorCoeffs;
pub use fas::{FasParams, FasSolver, SolveReport};
pub use smoother::{Sequence, SweepPlan, SweepShape};
