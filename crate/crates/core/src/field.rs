//! Scalar fields on cell centers or faces, stored with a ghost halo.
//!
//! Storage is x-fastest. Along an axis where the field sits on cell centers
//! the logical index runs over cells `1..=n`; along its own normal axis an
//! edge field sits on faces `0..=n`, where faces `0` and `n` are wall points
//! (or, for periodic axes, face `n` duplicates face `0`). `halo` further
//! layers are stored beyond those on each side.

use crate::bc::BoundaryConditions;
use crate::error::{Error, Result};
use crate::grid::GridLevel;
use crate::par::{self, Row};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Location {
    Cell,
    EdgeX,
    EdgeY,
    EdgeZ,
}

impl Location {
    /// Axis along which an edge field sits on faces.
    pub fn normal_axis(self) -> Option<usize> {
        match self {
            Location::Cell => None,
            Location::EdgeX => Some(0),
            Location::EdgeY => Some(1),
            Location::EdgeZ => Some(2),
        }
    }

    pub fn edge(axis: usize) -> Location {
        match axis {
            0 => Location::EdgeX,
            1 => Location::EdgeY,
            2 => Location::EdgeZ,
            _ => panic!("no edge location for axis {axis}"),
        }
    }
}

/// Halo depth and periodicity shared by all fields of one solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub halo: usize,
    pub periodic: [bool; 3],
}

impl Layout {
    pub fn new(halo: usize) -> Self {
        Layout { halo, periodic: [false; 3] }
    }

    pub fn for_bc(bc: &BoundaryConditions, halo: usize) -> Self {
        Layout { halo, periodic: bc.periodic_axes() }
    }
}

impl Default for Layout {
    fn default() -> Self {
        Layout::new(1)
    }
}

#[derive(Debug, Clone)]
pub struct Field {
    loc: Location,
    grid: GridLevel,
    layout: Layout,
    len: [usize; 3],
    off: [isize; 3],
    lo: [isize; 3],
    hi: [isize; 3],
    stride: [usize; 3],
    data: Vec<f64>,
    fresh: bool,
}

impl Field {
    pub fn new(grid: GridLevel, loc: Location, layout: Layout) -> Self {
        assert!(layout.halo >= 1, "fields need at least one ghost layer");
        if let Some(a) = loc.normal_axis() {
            assert!(a < grid.dim, "{loc:?} field on a {}D grid", grid.dim);
        }
        let g = layout.halo as isize;
        let mut len = [1usize; 3];
        let mut off = [0isize; 3];
        let mut lo = [0isize; 3];
        let mut hi = [0isize; 3];
        for a in 0..grid.dim {
            let n = grid.cells[a] as isize;
            if loc.normal_axis() == Some(a) {
                off[a] = g;
                len[a] = (n + 1 + 2 * g) as usize;
                if layout.periodic[a] {
                    lo[a] = 0;
                    hi[a] = n - 1;
                } else {
                    lo[a] = 1;
                    hi[a] = n - 1;
                }
            } else {
                off[a] = g - 1;
                len[a] = (n + 2 * g) as usize;
                lo[a] = 1;
                hi[a] = n;
            }
        }
        let stride = [1, len[0], len[0] * len[1]];
        Field {
            loc,
            grid,
            layout,
            len,
            off,
            lo,
            hi,
            stride,
            data: vec![0.0; len[0] * len[1] * len[2]],
            fresh: false,
        }
    }

    pub fn zeros_like(other: &Field) -> Self {
        Field::new(other.grid, other.loc, other.layout)
    }

    /// Field whose active points are `f(x, y, z)` at their physical coordinates.
    pub fn from_fn(
        grid: GridLevel,
        loc: Location,
        layout: Layout,
        f: impl Fn(f64, f64, f64) -> f64,
    ) -> Self {
        let mut out = Field::new(grid, loc, layout);
        out.set_active(f);
        out
    }

    pub fn location(&self) -> Location {
        self.loc
    }

    pub fn grid(&self) -> &GridLevel {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn h(&self) -> f64 {
        self.grid.h
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn halo(&self) -> usize {
        self.layout.halo
    }

    /// True when the field sits on faces along `axis`.
    pub fn on_faces(&self, axis: usize) -> bool {
        self.loc.normal_axis() == Some(axis)
    }

    /// Inclusive logical range of active (unknown) points along `axis`.
    pub fn active(&self, axis: usize) -> (isize, isize) {
        (self.lo[axis], self.hi[axis])
    }

    pub fn active_count(&self) -> usize {
        (0..3).map(|a| (self.hi[a] - self.lo[a] + 1) as usize).product()
    }

    /// Storage extent along `axis` as an inclusive logical range.
    pub fn stored(&self, axis: usize) -> (isize, isize) {
        (-self.off[axis], self.len[axis] as isize - 1 - self.off[axis])
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.stride[axis]
    }

    #[inline(always)]
    pub fn index(&self, i: isize, j: isize, k: isize) -> usize {
        debug_assert!(self.in_storage(i, j, k), "({i},{j},{k}) outside {:?} storage", self.loc);
        self.indexer().at(i, j, k)
    }

    /// Storage index map detached from the field borrow.
    pub(crate) fn indexer(&self) -> Indexer {
        Indexer { off: self.off, stride: self.stride }
    }

    fn in_storage(&self, i: isize, j: isize, k: isize) -> bool {
        [i, j, k]
            .iter()
            .enumerate()
            .all(|(a, &l)| l + self.off[a] >= 0 && ((l + self.off[a]) as usize) < self.len[a])
    }

    #[inline]
    pub fn get(&self, i: isize, j: isize, k: isize) -> f64 {
        self.data[self.index(i, j, k)]
    }

    pub fn set(&mut self, i: isize, j: isize, k: isize, v: f64) {
        let idx = self.index(i, j, k);
        self.data[idx] = v;
        self.fresh = false;
    }

    /// Physical coordinate of logical index `l` along `axis`.
    pub fn coord(&self, axis: usize, l: isize) -> f64 {
        if axis >= self.grid.dim {
            0.0
        } else if self.on_faces(axis) {
            self.grid.face(axis, l)
        } else {
            self.grid.cell_center(axis, l)
        }
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Mutable storage; the ghosts are considered stale afterwards.
    pub fn data_mut(&mut self) -> &mut [f64] {
        self.fresh = false;
        &mut self.data
    }

    pub fn is_fresh(&self) -> bool {
        self.fresh
    }

    pub fn mark_stale(&mut self) {
        self.fresh = false;
    }

    pub(crate) fn mark_fresh(&mut self) {
        self.fresh = true;
    }

    pub(crate) fn require_fresh(&self) -> Result<()> {
        if self.fresh {
            Ok(())
        } else {
            Err(Error::UnfilledGhosts(self.loc))
        }
    }

    pub fn same_layout(&self, other: &Field) -> bool {
        self.loc == other.loc
            && self.grid.cells == other.grid.cells
            && self.grid.dim == other.grid.dim
            && self.layout == other.layout
    }

    pub(crate) fn require_same_layout(&self, other: &Field) -> Result<()> {
        if self.same_layout(other) {
            Ok(())
        } else {
            Err(Error::LocationMismatch(format!(
                "{:?} {:?} halo {} vs {:?} {:?} halo {}",
                self.loc,
                &self.grid.cells[..self.grid.dim],
                self.layout.halo,
                other.loc,
                &other.grid.cells[..other.grid.dim],
                other.layout.halo
            )))
        }
    }

    /// Active rows `(j, k)`.
    pub(crate) fn rows(&self) -> Vec<Row> {
        let mut rows = Vec::with_capacity(
            ((self.hi[1] - self.lo[1] + 1) * (self.hi[2] - self.lo[2] + 1)) as usize,
        );
        for k in self.lo[2]..=self.hi[2] {
            for j in self.lo[1]..=self.hi[1] {
                rows.push((j, k));
            }
        }
        rows
    }

    pub(crate) fn row_len(&self) -> usize {
        (self.hi[0] - self.lo[0] + 1) as usize
    }

    /// Calls `f(i, j, k)` for every active point in storage order.
    pub fn for_each_active(&self, mut f: impl FnMut(isize, isize, isize)) {
        for k in self.lo[2]..=self.hi[2] {
            for j in self.lo[1]..=self.hi[1] {
                for i in self.lo[0]..=self.hi[0] {
                    f(i, j, k);
                }
            }
        }
    }

    pub fn set_active(&mut self, f: impl Fn(f64, f64, f64) -> f64) {
        let mut vals = Vec::with_capacity(self.active_count());
        self.for_each_active(|i, j, k| {
            vals.push((self.index(i, j, k), f(self.coord(0, i), self.coord(1, j), self.coord(2, k))))
        });
        for (idx, v) in vals {
            self.data[idx] = v;
        }
        self.fresh = false;
    }

    pub fn active_values(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.active_count());
        self.for_each_active(|i, j, k| out.push(self.get(i, j, k)));
        out
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|x| *x = v);
        self.fresh = false;
    }

    /// Copies all storage, ghosts and freshness included.
    pub fn copy_from(&mut self, other: &Field) -> Result<()> {
        self.require_same_layout(other)?;
        self.data.copy_from_slice(&other.data);
        self.fresh = other.fresh;
        Ok(())
    }

    fn zip_active(&mut self, other: &Field, op: impl Fn(f64, f64) -> f64 + Sync + Send) -> Result<()> {
        self.require_same_layout(other)?;
        let rows = self.rows();
        let n = self.row_len();
        let (i0, ix) = (self.lo[0], self.indexer());
        let out = par::SharedMut::new(&mut self.data);
        par::for_rows(&rows, n, |j, k| {
            let base = ix.at(i0, j, k);
            for t in 0..n {
                // SAFETY: each row is owned by exactly one worker.
                unsafe { out.write(base + t, op(out.read(base + t), other.data[base + t])) };
            }
        });
        self.fresh = false;
        Ok(())
    }

    /// `self += alpha * x` on active points.
    pub fn axpy(&mut self, alpha: f64, x: &Field) -> Result<()> {
        self.zip_active(x, move |s, x| s + alpha * x)
    }

    /// `self -= x` on active points.
    pub fn sub_assign(&mut self, x: &Field) -> Result<()> {
        self.zip_active(x, |s, x| s - x)
    }

    /// `self += x` on active points.
    pub fn add_assign(&mut self, x: &Field) -> Result<()> {
        self.zip_active(x, |s, x| s + x)
    }

    pub fn scale(&mut self, alpha: f64) {
        self.map_active(|v| alpha * v);
    }

    pub fn map_active(&mut self, f: impl Fn(f64) -> f64 + Sync + Send) {
        let rows = self.rows();
        let n = self.row_len();
        let (i0, ix) = (self.lo[0], self.indexer());
        let out = par::SharedMut::new(&mut self.data);
        par::for_rows(&rows, n, |j, k| {
            let base = ix.at(i0, j, k);
            for t in 0..n {
                // SAFETY: each row is owned by exactly one worker.
                unsafe { out.write(base + t, f(out.read(base + t))) };
            }
        });
        self.fresh = false;
    }

    /// Deterministic sum over active points.
    pub fn sum(&self) -> f64 {
        self.reduce_rows(|v| v)
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.active_count() as f64
    }

    fn reduce_rows(&self, f: impl Fn(f64) -> f64 + Sync + Send) -> f64 {
        let rows = self.rows();
        let n = self.row_len();
        par::sum_rows(&rows, n, |j, k| {
            let base = self.index(self.lo[0], j, k);
            self.data[base..base + n].iter().map(|&v| f(v)).sum()
        })
    }

    /// `h^{d/2} * sqrt(sum of squares)` over active points.
    pub fn norm_l2_scaled(&self) -> f64 {
        let d = self.grid.dim as i32;
        let s = self.reduce_rows(|v| v * v);
        self.grid.h.powi(d).sqrt() * s.sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.active_values().into_iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Field) -> Result<f64> {
        self.require_same_layout(other)?;
        let mut m: f64 = 0.0;
        self.for_each_active(|i, j, k| m = m.max((self.get(i, j, k) - other.get(i, j, k)).abs()));
        Ok(m)
    }

    pub fn is_finite(&self) -> bool {
        self.active_values().iter().all(|v| v.is_finite())
    }

    /// Fills wall points and ghost layers from `bc`.
    pub fn fill_ghosts(&mut self, bc: &BoundaryConditions) -> Result<()> {
        crate::bc::fill(self, bc)
    }

    pub(crate) fn raw_parts(&mut self) -> (&mut [f64], [usize; 3], [isize; 3], [usize; 3]) {
        (&mut self.data, self.len, self.off, self.stride)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Indexer {
    off: [isize; 3],
    stride: [usize; 3],
}

impl Indexer {
    #[inline(always)]
    pub(crate) fn at(&self, i: isize, j: isize, k: isize) -> usize {
        (i + self.off[0]) as usize
            + self.stride[1] * (j + self.off[1]) as usize
            + self.stride[2] * (k + self.off[2]) as usize
    }
}

impl Default for Field {
    fn default() -> Self {
        Field {
            loc: Location::Cell,
            grid: GridLevel {
                level: 0,
                dim: 2,
                cells: [0, 0, 1],
                min: [0.0; 3],
                max: [0.0; 3],
                h: 0.0,
            },
            layout: Layout::new(1),
            len: [0; 3],
            off: [0; 3],
            lo: [0; 3],
            hi: [-1; 3],
            stride: [0; 3],
            data: Vec::new(),
            fresh: false,
        }
    }
}
