//! FAS V-cycles with residual-controlled outer iteration.

use crate::bc::BoundaryConditions;
use crate::error::{Error, Result};
use crate::field::{Field, Layout, Location};
use crate::grid::{make_hierarchy, GridHierarchy, GridLevel};
use crate::smoother::{smooth, SweepPlan};
use crate::stencil::{apply_operator_into, residual_into, OperatorCoeffs};
use crate::transfer::{prolong_into, restrict_into};

/// Outer-loop and cycle parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FasParams {
    /// Stop once the scaled residual norm is at or below this.
    pub tol: f64,
    /// Maximum number of V-cycles.
    pub k_max: usize,
    /// Smoothing steps before and after each coarse-grid correction.
    pub smooth_steps: usize,
    /// Number of coarsenings below the finest level.
    pub mesh_level: usize,
}

impl FasParams {
    pub fn new(tol: f64, k_max: usize, smooth_steps: usize, mesh_level: usize) -> Result<Self> {
        let p = FasParams { tol, k_max, smooth_steps, mesh_level };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if self.k_max == 0 || self.smooth_steps == 0 || self.mesh_level == 0 {
            return Err(Error::InvalidParameter(
                "k_max, smooth_steps and mesh_level must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// tol 1e-9, 20 cycles, 2 smoothing steps, coarsening down to 2 cells.
    pub fn default_for(grid: &GridLevel) -> Self {
        FasParams {
            tol: 1e-9,
            k_max: 20,
            smooth_steps: 2,
            mesh_level: crate::grid::default_mesh_level(grid),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::NAN)
    }
}

struct Level {
    p: Field,
    f: Field,
    p0: Field,
    r: Field,
    tmp: Field,
}

impl Level {
    fn new(grid: GridLevel, loc: Location, layout: Layout, finest: bool) -> Self {
        let mk = || Field::new(grid, loc, layout);
        Level {
            p: mk(),
            f: mk(),
            p0: if finest { Field::default() } else { mk() },
            r: mk(),
            tmp: mk(),
        }
    }
}

/// Multigrid solver for `a*p - b*lap(p) = f` on one field location.
///
/// Work arrays for every level are allocated once and reused by every cycle.
pub struct FasSolver {
    hierarchy: GridHierarchy,
    levels: Vec<Level>,
    coeffs: OperatorCoeffs,
    params: FasParams,
    plan: SweepPlan,
    bc: BoundaryConditions,
    hom: BoundaryConditions,
    loc: Location,
}

impl FasSolver {
    pub fn new(
        grid: GridLevel,
        loc: Location,
        layout: Layout,
        bc: BoundaryConditions,
        coeffs: OperatorCoeffs,
        params: FasParams,
        plan: SweepPlan,
    ) -> Result<Self> {
        params.validate()?;
        if plan.dim != grid.dim {
            return Err(Error::PlanDimMismatch { plan: plan.dim, field: grid.dim });
        }
        if layout.periodic[..grid.dim] != bc.periodic_axes()[..grid.dim] {
            return Err(Error::LocationMismatch("layout periodicity differs from the boundary conditions".into()));
        }
        let hierarchy = make_hierarchy(&grid, params.mesh_level)?;
        let levels = hierarchy
            .levels()
            .iter()
            .enumerate()
            .map(|(i, g)| Level::new(*g, loc, layout, i == 0))
            .collect();
        Ok(FasSolver {
            hierarchy,
            levels,
            coeffs,
            params,
            plan,
            hom: bc.homogeneous(),
            bc,
            loc,
        })
    }

    pub fn hierarchy(&self) -> &GridHierarchy {
        &self.hierarchy
    }

    pub fn params(&self) -> &FasParams {
        &self.params
    }

    pub fn coeffs(&self) -> OperatorCoeffs {
        self.coeffs
    }

    pub fn location(&self) -> Location {
        self.loc
    }

    pub fn bc(&self) -> &BoundaryConditions {
        &self.bc
    }

    /// Constants are in the null space: the problem is solved up to a
    /// constant and the mean is projected out of `f` and `p`.
    pub fn is_singular(&self) -> bool {
        self.coeffs.a == 0.0 && self.bc.has_no_dirichlet(self.hierarchy.finest().dim)
    }

    fn check(&self, p: &Field, f: &Field) -> Result<()> {
        self.levels[0].r.require_same_layout(p)?;
        self.levels[0].r.require_same_layout(f)
    }

    /// One V-cycle on `p` for right-hand side `f`.
    pub fn vcycle(&mut self, p: &mut Field, f: &Field) -> Result<()> {
        self.check(p, f)?;
        std::mem::swap(&mut self.levels[0].p, p);
        self.levels[0].f.copy_from(f)?;
        let out = self.levels[0].p.fill_ghosts(&self.bc).and_then(|_| self.cycle());
        std::mem::swap(&mut self.levels[0].p, p);
        out
    }

    fn smooth_level(&mut self, l: usize) -> Result<()> {
        let lv = &mut self.levels[l];
        for _ in 0..self.params.smooth_steps {
            smooth(&lv.f, &mut lv.p, self.coeffs, &self.plan, &self.bc)?;
        }
        Ok(())
    }

    fn cycle(&mut self) -> Result<()> {
        let c = self.coeffs;
        let depth = self.levels.len();
        for l in 0..depth - 1 {
            self.smooth_level(l)?;
            let (head, tail) = self.levels.split_at_mut(l + 1);
            let (fine, coarse) = (&mut head[l], &mut tail[0]);
            residual_into(&fine.f, &fine.p, c, &mut fine.r)?;
            if self.loc != Location::Cell {
                fine.r.fill_ghosts(&self.hom)?;
            }
            restrict_into(&fine.p, &mut coarse.p)?;
            coarse.p.fill_ghosts(&self.bc)?;
            coarse.p0.copy_from(&coarse.p)?;
            restrict_into(&fine.r, &mut coarse.f)?;
            apply_operator_into(&coarse.p, c, &mut coarse.r)?;
            coarse.f.add_assign(&coarse.r)?;
        }
        self.smooth_level(depth - 1)?;
        for l in (0..depth - 1).rev() {
            let (head, tail) = self.levels.split_at_mut(l + 1);
            let (fine, coarse) = (&mut head[l], &mut tail[0]);
            coarse.tmp.copy_from(&coarse.p)?;
            coarse.tmp.sub_assign(&coarse.p0)?;
            coarse.tmp.fill_ghosts(&self.hom)?;
            prolong_into(&coarse.tmp, &mut fine.tmp)?;
            fine.p.add_assign(&fine.tmp)?;
            self.smooth_level(l)?;
        }
        Ok(())
    }

    fn top_residual(&mut self) -> Result<f64> {
        let top = &mut self.levels[0];
        residual_into(&top.f, &top.p, self.coeffs, &mut top.r)?;
        Ok(top.r.norm_l2_scaled())
    }

    /// Runs V-cycles until the residual drops to `tol` or `k_max` cycles.
    pub fn solve(&mut self, p: &mut Field, f: &Field) -> Result<SolveReport> {
        self.solve_observed(p, f, |_, _, _| {})
    }

    /// Like [`FasSolver::solve`], calling `observe(k, residual, p)` after
    /// every cycle.
    pub fn solve_observed(
        &mut self,
        p: &mut Field,
        f: &Field,
        mut observe: impl FnMut(usize, f64, &Field),
    ) -> Result<SolveReport> {
        self.check(p, f)?;
        self.levels[0].f.copy_from(f)?;
        std::mem::swap(&mut self.levels[0].p, p);
        let out = self.run(&mut observe);
        std::mem::swap(&mut self.levels[0].p, p);
        out
    }

    fn run(&mut self, observe: &mut impl FnMut(usize, f64, &Field)) -> Result<SolveReport> {
        let singular = self.is_singular();
        let top = &mut self.levels[0];
        if singular {
            let m = top.f.mean();
            top.f.map_active(|v| v - m);
        }
        top.p.fill_ghosts(&self.bc)?;
        let mut history = Vec::new();
        let mut converged = false;
        for k in 1..=self.params.k_max {
            self.cycle()?;
            let res = self.top_residual()?;
            history.push(res);
            observe(k, res, &self.levels[0].p);
            if res <= self.params.tol {
                converged = true;
                break;
            }
        }
        if singular {
            let top = &mut self.levels[0];
            let m = top.p.mean();
            top.p.map_active(|v| v - m);
            top.p.fill_ghosts(&self.bc)?;
        }
        Ok(SolveReport { iterations: history.len(), residual_history: history, converged })
    }
}

/// Builds a solver for `p`'s layout and runs it once.
pub fn solve(
    p: &mut Field,
    f: &Field,
    bc: &BoundaryConditions,
    coeffs: OperatorCoeffs,
    params: FasParams,
    plan: &SweepPlan,
) -> Result<SolveReport> {
    let mut s = FasSolver::new(*p.grid(), p.location(), p.layout(), *bc, coeffs, params, plan.clone())?;
    s.solve(p, f)
}
