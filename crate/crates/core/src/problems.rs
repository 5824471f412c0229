//! The manufactured Poisson-type benchmark and the convergence studies built
//! on it.
//!
//! The exact solution is `prod_a sin(pi sin(pi x_a))` on the unit square or
//! cube, which vanishes on the boundary. The operator is `p - lap(p)` with
//! homogeneous reflected Dirichlet conditions on every face.

use std::f64::consts::PI;

use crate::bc::BoundaryConditions;
use crate::error::Result;
use crate::fas::{FasParams, FasSolver, SolveReport};
use crate::field::{Field, Layout, Location};
use crate::grid::GridLevel;
use crate::rng;
use crate::smoother::SweepPlan;
use crate::stencil::{apply_operator, OperatorCoeffs};

fn g(x: f64) -> f64 {
    (PI * (PI * x).sin()).sin()
}

fn g2(x: f64) -> f64 {
    let (s, c) = (PI * x).sin_cos();
    -(PI * s).sin() * PI.powi(4) * c * c - (PI * s).cos() * PI.powi(3) * s
}

pub fn exact(dim: usize, x: f64, y: f64, z: f64) -> f64 {
    let p = g(x) * g(y);
    if dim == 3 {
        p * g(z)
    } else {
        p
    }
}

/// `p - lap(p)` of the exact solution, evaluated pointwise.
pub fn continuous_rhs(dim: usize, x: f64, y: f64, z: f64) -> f64 {
    let lap = if dim == 2 {
        g2(x) * g(y) + g(x) * g2(y)
    } else {
        g2(x) * g(y) * g(z) + g(x) * g2(y) * g(z) + g(x) * g(y) * g2(z)
    };
    exact(dim, x, y, z) - lap
}

#[derive(Debug, Clone)]
pub struct Benchmark {
    pub grid: GridLevel,
    pub bc: BoundaryConditions,
    pub coeffs: OperatorCoeffs,
    pub exact: Field,
}

impl Benchmark {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        let grid = GridLevel::unit(dim, n)?;
        let mut exact_f = Field::from_fn(grid, Location::Cell, Layout::new(1), |x, y, z| exact(dim, x, y, z));
        let bc = BoundaryConditions::dirichlet_zero();
        exact_f.fill_ghosts(&bc)?;
        Ok(Benchmark { grid, bc, coeffs: OperatorCoeffs::helmholtz(), exact: exact_f })
    }

    pub fn continuous_rhs(&self) -> Field {
        let d = self.grid.dim;
        Field::from_fn(self.grid, Location::Cell, Layout::new(1), |x, y, z| continuous_rhs(d, x, y, z))
    }

    /// Right-hand side for which the sampled exact solution is the exact
    /// discrete solution.
    pub fn discrete_rhs(&self) -> Result<Field> {
        apply_operator(&self.exact, self.coeffs)
    }

    pub fn solver(&self, params: FasParams, plan: SweepPlan) -> Result<FasSolver> {
        FasSolver::new(self.grid, Location::Cell, Layout::new(1), self.bc, self.coeffs, params, plan)
    }

    pub fn error(&self, p: &Field) -> Result<f64> {
        let mut e = p.clone();
        e.sub_assign(&self.exact)?;
        Ok(e.norm_l2_scaled())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub n: usize,
    pub error: f64,
    /// `log2(previous error / error)`; absent on the first row.
    pub order: Option<f64>,
    pub report: SolveReport,
}

/// Discretisation error against the exact solution for each size, solving
/// with the continuous right-hand side from a zero initial guess.
pub fn asymptotic_test(
    dim: usize,
    sizes: &[usize],
    params: impl Fn(&GridLevel) -> FasParams,
    plan: &SweepPlan,
) -> Result<Vec<ErrorRow>> {
    let mut rows: Vec<ErrorRow> = Vec::new();
    for &n in sizes {
        let b = Benchmark::new(dim, n)?;
        let f = b.continuous_rhs();
        let mut p = Field::zeros_like(&f);
        let report = b.solver(params(&b.grid), plan.clone())?.solve(&mut p, &f)?;
        let error = b.error(&p)?;
        let order = rows.last().map(|r| (r.error / error).log2());
        rows.push(ErrorRow { n, error, order, report });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleRow {
    pub n: usize,
    pub cycle: usize,
    pub residual: f64,
    pub error: f64,
}

/// Residual and algebraic error after every cycle, starting from a seeded
/// random guess with the discrete right-hand side.
pub fn algebraic_test(
    dim: usize,
    sizes: &[usize],
    params: impl Fn(&GridLevel) -> FasParams,
    plan: &SweepPlan,
    seed: u64,
) -> Result<Vec<(SolveReport, Vec<CycleRow>)>> {
    let mut out = Vec::new();
    for &n in sizes {
        let b = Benchmark::new(dim, n)?;
        let f = b.discrete_rhs()?;
        let mut p = Field::zeros_like(&f);
        rng::fill_uniform(&mut p, seed);
        let mut rows = Vec::new();
        let mut err_fail = None;
        let report = b.solver(params(&b.grid), plan.clone())?.solve_observed(&mut p, &f, |k, res, pk| {
            match b.error(pk) {
                Ok(error) => rows.push(CycleRow { n, cycle: k, residual: res, error }),
                Err(e) => err_fail = Some(e),
            }
        })?;
        if let Some(e) = err_fail {
            return Err(e);
        }
        out.push((report, rows));
    }
    Ok(out)
}
