//! Row-parallel loops and deterministic reductions.
//!
//! Work is split by grid rows (fixed `y, z`, all `x`). Small grids run
//! sequentially; the result of every reduction is independent of the worker
//! count because rows are summed left to right and row partials are combined
//! pairwise in row order.

use rayon::prelude::*;

/// Below this many points per call a loop stays on the calling thread.
pub(crate) const PAR_MIN_POINTS: usize = 1 << 14;

pub(crate) type Row = (isize, isize);

pub(crate) fn for_rows<F>(rows: &[Row], row_len: usize, f: F)
where
    F: Fn(isize, isize) + Sync + Send,
{
    if rows.len() * row_len < PAR_MIN_POINTS {
        rows.iter().for_each(|&(j, k)| f(j, k));
    } else {
        rows.par_iter().for_each(|&(j, k)| f(j, k));
    }
}

pub(crate) fn sum_rows<F>(rows: &[Row], row_len: usize, f: F) -> f64
where
    F: Fn(isize, isize) -> f64 + Sync + Send,
{
    let partials: Vec<f64> = if rows.len() * row_len < PAR_MIN_POINTS {
        rows.iter().map(|&(j, k)| f(j, k)).collect()
    } else {
        rows.par_iter().map(|&(j, k)| f(j, k)).collect()
    };
    pairwise_sum(&partials)
}

pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => {
            let (a, b) = v.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Raw write access shared across workers.
///
/// Only used by kernels whose workers write provably disjoint elements.
#[derive(Clone, Copy)]
pub(crate) struct SharedMut(*mut f64);

// SAFETY: the pointer is only dereferenced at indices that each worker owns
// exclusively; see the call sites.
unsafe impl Send for SharedMut {}
unsafe impl Sync for SharedMut {}

impl SharedMut {
    pub(crate) fn new(data: &mut [f64]) -> Self {
        SharedMut(data.as_mut_ptr())
    }

    /// # Safety
    /// `idx` must be in bounds and not accessed by any other worker during
    /// the enclosing parallel loop.
    #[inline(always)]
    pub(crate) unsafe fn write(self, idx: usize, v: f64) {
        *self.0.add(idx) = v;
    }

    /// # Safety
    /// `idx` must be in bounds and not written by any other worker during
    /// the enclosing parallel loop.
    #[inline(always)]
    pub(crate) unsafe fn read(self, idx: usize) -> f64 {
        *self.0.add(idx)
    }
}
