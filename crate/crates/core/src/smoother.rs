//! Colored Gauss-Seidel smoothing.
//!
//! Points are grouped by the parity of their logical indices. Within one
//! group no point is a stencil neighbour of another, so a group can be
//! updated in any order, or in parallel, with the same result.

use std::fmt;
use std::str::FromStr;

use crate::bc::BoundaryConditions;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::par::{self, SharedMut};
use crate::stencil::OperatorCoeffs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn of(l: isize) -> Parity {
        if l.rem_euclid(2) == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    fn first_from(self, lo: isize) -> isize {
        if Parity::of(lo) == self {
            lo
        } else {
            lo + 1
        }
    }
}

use Parity::{Even as E, Odd as O};

/// A set of grid points selected by index parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColorSet {
    /// Parity of each logical index; the z entry is ignored in 2D.
    Axes([Parity; 3]),
    /// Parity of the index sum (red-black).
    Sum(Parity),
}

impl ColorSet {
    pub fn contains(&self, i: isize, j: isize, k: isize, dim: usize) -> bool {
        match *self {
            ColorSet::Axes(p) => {
                Parity::of(i) == p[0] && Parity::of(j) == p[1] && (dim == 2 || Parity::of(k) == p[2])
            }
            ColorSet::Sum(p) => Parity::of(i + j + if dim == 3 { k } else { 0 }) == p,
        }
    }
}

/// Order in which the color groups are visited.
///
/// `X` takes the diagonal pairs first. `Z` visits the 2x2 (2x2x2) parity
/// blocks in raster order and `U` in boustrophedon order, i fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepShape {
    X,
    U,
    Z,
    RedBlack,
}

/// How the two passes of one smoothing step are chained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sequence {
    /// 1234-1234
    ForwardForward,
    /// 1234-4321
    ForwardBackward,
}

impl SweepShape {
    pub fn colors(self, dim: usize) -> Vec<ColorSet> {
        let tuples: Vec<[Parity; 3]> = match (self, dim) {
            (SweepShape::RedBlack, _) => return vec![ColorSet::Sum(O), ColorSet::Sum(E)],
            (SweepShape::X, 2) => vec![[O, E, O], [E, O, O], [E, E, O], [O, O, O]],
            (SweepShape::Z, 2) => vec![[O, O, O], [E, O, O], [O, E, O], [E, E, O]],
            (SweepShape::U, 2) => vec![[O, O, O], [E, O, O], [E, E, O], [O, E, O]],
            (SweepShape::X, _) => vec![
                [O, E, E],
                [E, O, E],
                [E, E, O],
                [O, O, O],
                [O, E, O],
                [E, O, O],
                [E, E, E],
                [O, O, E],
            ],
            (SweepShape::Z, _) => vec![
                [O, O, O],
                [E, O, O],
                [O, E, O],
                [E, E, O],
                [O, O, E],
                [E, O, E],
                [O, E, E],
                [E, E, E],
            ],
            (SweepShape::U, _) => vec![
                [O, O, O],
                [E, O, O],
                [E, E, O],
                [O, E, O],
                [O, E, E],
                [E, E, E],
                [E, O, E],
                [O, O, E],
            ],
        };
        tuples.into_iter().map(ColorSet::Axes).collect()
    }
}

/// The color visits making up one smoothing step.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub shape: SweepShape,
    pub sequence: Sequence,
    pub dim: usize,
    visits: Vec<ColorSet>,
}

impl SweepPlan {
    pub fn new(shape: SweepShape, sequence: Sequence, dim: usize) -> Self {
        let colors = shape.colors(dim);
        let mut visits = colors.clone();
        match sequence {
            Sequence::ForwardForward => visits.extend(colors.iter().copied()),
            Sequence::ForwardBackward => visits.extend(colors.iter().rev().copied()),
        }
        SweepPlan { shape, sequence, dim, visits }
    }

    pub fn visits(&self) -> &[ColorSet] {
        &self.visits
    }

    pub fn default_for(dim: usize) -> Self {
        SweepPlan::new(SweepShape::X, Sequence::ForwardForward, dim)
    }
}

impl fmt::Display for SweepShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepShape::X => "x",
            SweepShape::U => "u",
            SweepShape::Z => "z",
            SweepShape::RedBlack => "rbgs",
        })
    }
}

impl FromStr for SweepShape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(SweepShape::X),
            "u" => Ok(SweepShape::U),
            "z" => Ok(SweepShape::Z),
            "rbgs" | "rb" => Ok(SweepShape::RedBlack),
            _ => Err(Error::InvalidParameter(format!("unknown smoother '{s}'"))),
        }
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sequence::ForwardForward => "ff",
            Sequence::ForwardBackward => "fb",
        })
    }
}

impl FromStr for Sequence {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ff" => Ok(Sequence::ForwardForward),
            "fb" => Ok(Sequence::ForwardBackward),
            _ => Err(Error::InvalidParameter(format!("unknown sweep sequence '{s}'"))),
        }
    }
}

/// One Gauss-Seidel relaxation of every point of `set`:
/// `p = (h^2 f + b * sum(neighbours)) / (a h^2 + 2d b)`.
pub fn gs_update(f: &Field, p: &mut Field, c: OperatorCoeffs, set: ColorSet) -> Result<()> {
    p.require_fresh()?;
    p.require_same_layout(f)?;
    let dim = p.dim();
    let h2 = p.h() * p.h();
    let denom = c.a * h2 + (2 * dim) as f64 * c.b;
    let (sy, sz) = (p.stride(1), p.stride(2));
    let (ilo, ihi) = p.active(0);
    let rows: Vec<_> = p
        .rows()
        .into_iter()
        .filter(|&(j, k)| match set {
            ColorSet::Axes(par) => Parity::of(j) == par[1] && (dim == 2 || Parity::of(k) == par[2]),
            ColorSet::Sum(_) => true,
        })
        .collect();
    let ix = p.indexer();
    let fd = f.data();
    let pd = SharedMut::new(p.data_mut());
    let row_len = ((ihi - ilo) / 2 + 1) as usize;
    par::for_rows(&rows, row_len, |j, k| {
        let first = match set {
            ColorSet::Axes(par) => par[0].first_from(ilo),
            ColorSet::Sum(par) => {
                let kk = if dim == 3 { k } else { 0 };
                if Parity::of(ilo + j + kk) == par {
                    ilo
                } else {
                    ilo + 1
                }
            }
        };
        let mut idx = ix.at(first, j, k);
        let mut i = first;
        while i <= ihi {
            // SAFETY: points of one color are never stencil neighbours of
            // each other, so the neighbours read here are not written by any
            // worker during this call and every written index belongs to
            // exactly one row.
            unsafe {
                let mut s = pd.read(idx + 1) + pd.read(idx - 1) + pd.read(idx + sy) + pd.read(idx - sy);
                if dim == 3 {
                    s = s + pd.read(idx + sz) + pd.read(idx - sz);
                }
                pd.write(idx, (h2 * fd[idx] + c.b * s) / denom);
            }
            i += 2;
            idx += 2;
        }
    });
    Ok(())
}

/// One smoothing step: every color visit of `plan`, ghosts refreshed before
/// each visit and once more at the end.
pub fn smooth(
    f: &Field,
    p: &mut Field,
    c: OperatorCoeffs,
    plan: &SweepPlan,
    bc: &BoundaryConditions,
) -> Result<()> {
    if plan.dim != p.dim() {
        return Err(Error::PlanDimMismatch { plan: plan.dim, field: p.dim() });
    }
    for &set in plan.visits() {
        p.fill_ghosts(bc)?;
        gs_update(f, p, c, set)?;
    }
    p.fill_ghosts(bc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingRow {
    pub shape: SweepShape,
    pub sequence: Sequence,
    pub report: crate::fas::SolveReport,
}

/// V-cycle counts of the six X/U/Z x ff/fb smoothers on the manufactured
/// benchmark with the continuous right-hand side and a zero initial guess.
pub fn compare_orderings(dim: usize, n: usize, tol: f64, k_max: usize) -> Result<Vec<OrderingRow>> {
    let b = crate::problems::Benchmark::new(dim, n)?;
    let f = b.continuous_rhs();
    let mut params = crate::fas::FasParams::default_for(&b.grid);
    params.tol = tol;
    params.k_max = k_max;
    let mut rows = Vec::new();
    for shape in [SweepShape::X, SweepShape::U, SweepShape::Z] {
        for sequence in [Sequence::ForwardForward, Sequence::ForwardBackward] {
            let mut p = Field::zeros_like(&f);
            let report = b.solver(params, SweepPlan::new(shape, sequence, dim))?.solve(&mut p, &f)?;
            rows.push(OrderingRow { shape, sequence, report });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Layout, Location};
    use crate::grid::GridLevel;
    use crate::stencil::{apply_operator, residual};

    fn setup(n: usize) -> (Field, Field, BoundaryConditions) {
        let g = GridLevel::unit(2, n).unwrap();
        let bc = BoundaryConditions::dirichlet_zero();
        let mut p = Field::from_fn(g, Location::Cell, Layout::new(1), |x, y, _| (3.0 * x).sin() * y);
        p.fill_ghosts(&bc).unwrap();
        let f = Field::from_fn(g, Location::Cell, Layout::new(1), |x, y, _| x + y * y);
        (p, f, bc)
    }

    #[test]
    fn update_formula_example() {
        let g = GridLevel::new(2, &[4, 4], &[0.0, 0.0], &[4.0, 4.0]).unwrap();
        let mut p = Field::new(g, Location::Cell, Layout::new(1));
        p.map_active(|_| 1.0);
        p.fill_ghosts(&BoundaryConditions::neumann()).unwrap();
        let mut f = Field::zeros_like(&p);
        f.map_active(|_| 5.0);
        gs_update(&f, &mut p, OperatorCoeffs::helmholtz(), ColorSet::Axes([O, O, O])).unwrap();
        assert_eq!(p.get(1, 1, 0), 1.8);
        assert_eq!(p.get(2, 1, 0), 1.0);
    }

    #[test]
    fn pressure_coefficients_formula() {
        let g = GridLevel::new(2, &[4, 4], &[0.0, 0.0], &[2.0, 2.0]).unwrap();
        let dt = 0.1;
        let mut p = Field::from_fn(g, Location::Cell, Layout::new(1), |x, y, _| x * y);
        p.fill_ghosts(&BoundaryConditions::neumann()).unwrap();
        let f = Field::from_fn(g, Location::Cell, Layout::new(1), |x, _, _| x);
        let before = p.clone();
        gs_update(&f, &mut p, OperatorCoeffs { a: 0.0, b: dt }, ColorSet::Sum(E)).unwrap();
        let n = before.get(3, 2, 0) + before.get(1, 2, 0) + before.get(2, 3, 0) + before.get(2, 1, 0);
        let h2 = 0.25;
        assert_eq!(p.get(2, 2, 0), (h2 * f.get(2, 2, 0) + dt * n) / (4.0 * dt));
    }

    #[test]
    fn colors_partition_the_interior() {
        for dim in [2, 3] {
            for shape in [SweepShape::X, SweepShape::U, SweepShape::Z, SweepShape::RedBlack] {
                let colors = shape.colors(dim);
                let kmax = if dim == 3 { 5 } else { 0 };
                for k in 0..=kmax {
                    for j in 1..=5 {
                        for i in 1..=6 {
                            let hits = colors.iter().filter(|c| c.contains(i, j, k.max(1), dim)).count();
                            assert_eq!(hits, 1, "{shape:?} {dim}D ({i},{j},{k})");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn plans_visit_every_color_twice() {
        let ff = SweepPlan::new(SweepShape::X, Sequence::ForwardForward, 2);
        assert_eq!(ff.visits().len(), 8);
        assert_eq!(ff.visits()[0], ColorSet::Axes([O, E, O]));
        assert_eq!(ff.visits()[4], ColorSet::Axes([O, E, O]));
        let fb = SweepPlan::new(SweepShape::X, Sequence::ForwardBackward, 2);
        assert_eq!(fb.visits()[4], ColorSet::Axes([O, O, O]));
        assert_eq!(SweepPlan::new(SweepShape::X, Sequence::ForwardForward, 3).visits().len(), 16);
        let rb = SweepPlan::new(SweepShape::RedBlack, Sequence::ForwardForward, 2);
        assert_eq!(rb.visits()[..2], [ColorSet::Sum(O), ColorSet::Sum(E)]);
    }

    #[test]
    fn discrete_solution_is_a_fixed_point() {
        let (p, _, bc) = setup(16);
        let f = apply_operator(&p, OperatorCoeffs::helmholtz()).unwrap();
        for shape in [SweepShape::X, SweepShape::RedBlack] {
            let mut q = p.clone();
            smooth(&f, &mut q, OperatorCoeffs::helmholtz(), &SweepPlan::new(shape, Sequence::ForwardForward, 2), &bc)
                .unwrap();
            assert!(q.max_abs_diff(&p).unwrap() < 1e-15);
        }
    }

    #[test]
    fn smoothing_reduces_the_residual() {
        let (mut p, f, bc) = setup(32);
        let c = OperatorCoeffs::helmholtz();
        let r0 = residual(&f, &p, c).unwrap().norm_l2_scaled();
        smooth(&f, &mut p, c, &SweepPlan::default_for(2), &bc).unwrap();
        let r1 = residual(&f, &p, c).unwrap().norm_l2_scaled();
        assert!(r1 < r0);
    }

    #[test]
    fn plan_dimension_is_checked() {
        let (mut p, f, bc) = setup(8);
        let e = smooth(&f, &mut p, OperatorCoeffs::helmholtz(), &SweepPlan::default_for(3), &bc);
        assert_eq!(e, Err(Error::PlanDimMismatch { plan: 3, field: 2 }));
    }

    #[test]
    fn parse_names() {
        assert_eq!("rbgs".parse::<SweepShape>().unwrap(), SweepShape::RedBlack);
        assert_eq!("fb".parse::<Sequence>().unwrap(), Sequence::ForwardBackward);
        assert!("w".parse::<SweepShape>().is_err());
    }
}
