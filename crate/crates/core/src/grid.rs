//! Uniform grid levels and the coarsening chain.

use crate::error::{Error, Result};

/// Geometry of one level of a uniform cell grid.
///
/// Cells are indexed 1..=n on every axis and faces 0..=n, so cell `i` spans
/// faces `i-1` and `i`. Unused axes (z in 2D) have a single cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridLevel {
    pub level: usize,
    pub dim: usize,
    pub cells: [usize; 3],
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub h: f64,
}

const SPACING_RTOL: f64 = 1e-12;

impl GridLevel {
    pub fn new(dim: usize, cells: &[usize], min: &[f64], max: &[f64]) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dimension {dim} is not 2 or 3")));
        }
        if cells.len() != dim || min.len() != dim || max.len() != dim {
            return Err(Error::InvalidGrid("extents do not match the dimension".into()));
        }
        let mut g = GridLevel {
            level: 0,
            dim,
            cells: [1; 3],
            min: [0.0; 3],
            max: [1.0; 3],
            h: 0.0,
        };
        for a in 0..dim {
            if cells[a] == 0 {
                return Err(Error::InvalidGrid(format!("axis {a} has no cells")));
            }
            if !(max[a] > min[a]) {
                return Err(Error::InvalidGrid(format!("axis {a} has an empty extent")));
            }
            g.cells[a] = cells[a];
            g.min[a] = min[a];
            g.max[a] = max[a];
        }
        g.h = (max[0] - min[0]) / cells[0] as f64;
        for a in 1..dim {
            let ha = (max[a] - min[a]) / cells[a] as f64;
            if ((ha - g.h) / g.h).abs() > SPACING_RTOL {
                return Err(Error::NonUniformSpacing(g.h, ha));
            }
        }
        // the z extent of a 2D grid is one cell of width h
        if dim == 2 {
            g.max[2] = g.h;
        }
        Ok(g)
    }

    /// `n`^dim cells on the unit square or cube.
    pub fn unit(dim: usize, n: usize) -> Result<Self> {
        GridLevel::new(dim, &vec![n; dim], &vec![0.0; dim], &vec![1.0; dim])
    }

    pub fn num_cells(&self) -> usize {
        self.cells[..self.dim].iter().product()
    }

    /// Coordinate of the center of cell `i` (1-based) along `axis`.
    pub fn cell_center(&self, axis: usize, i: isize) -> f64 {
        self.min[axis] + (i as f64 - 0.5) * self.h
    }

    /// Coordinate of face `i` (0-based) along `axis`.
    pub fn face(&self, axis: usize, i: isize) -> f64 {
        self.min[axis] + i as f64 * self.h
    }

    pub fn coarsen(&self) -> Option<GridLevel> {
        if self.cells[..self.dim].iter().any(|&n| n % 2 != 0) {
            return None;
        }
        let mut c = *self;
        for a in 0..self.dim {
            c.cells[a] /= 2;
        }
        c.h = 2.0 * self.h;
        if self.dim == 2 {
            c.max[2] = c.h;
        }
        c.level = self.level.saturating_sub(1);
        Some(c)
    }
}

/// The chain of levels used by one multigrid solve, finest first.
#[derive(Debug, Clone)]
pub struct GridHierarchy {
    levels: Vec<GridLevel>,
}

impl GridHierarchy {
    pub fn levels(&self) -> &[GridLevel] {
        &self.levels
    }

    pub fn finest(&self) -> &GridLevel {
        &self.levels[0]
    }

    pub fn coarsest(&self) -> &GridLevel {
        self.levels.last().expect("hierarchy is never empty")
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

/// Builds `mesh_level + 1` levels below and including `fine`.
///
/// Every level, the coarsest included, must have an even number of cells on
/// each axis so that the 2:1 transfer stencils nest exactly.
pub fn make_hierarchy(fine: &GridLevel, mesh_level: usize) -> Result<GridHierarchy> {
    if mesh_level == 0 {
        return Err(Error::InvalidParameter("mesh level must be at least 1".into()));
    }
    let need = 1usize
        .checked_shl(mesh_level as u32 + 1)
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidParameter(format!("mesh level {mesh_level} is too deep")))?;
    for a in 0..fine.dim {
        if !fine.cells[a].is_multiple_of(need) {
            return Err(Error::NonDivisibleGrid {
                axis: a,
                cells: fine.cells[a],
                levels: mesh_level,
            });
        }
    }
    let mut top = *fine;
    top.level = mesh_level;
    let mut levels = vec![top];
    for _ in 0..mesh_level {
        let next = levels.last().unwrap().coarsen().expect("divisibility checked above");
        levels.push(next);
    }
    Ok(GridHierarchy { levels })
}

/// Deepest admissible mesh level for `grid`: coarsen until a level has 2 cells
/// on its shortest axis.
pub fn default_mesh_level(grid: &GridLevel) -> usize {
    let mut n = *grid.cells[..grid.dim].iter().min().unwrap();
    let mut depth = 0;
    while n.is_multiple_of(4) {
        n /= 2;
        depth += 1;
    }
    depth.max(1)
}
