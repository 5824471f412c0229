//! Pointwise pieces of the projection step.

use crate::bc::BoundaryConditions;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::par::{self, SharedMut};
use crate::stencil::neighbour_sum;

use super::Forcing;

/// `out = a + w*(b - a)` on active points, then ghosts from `bc`. Equal
/// inputs give `a` back exactly.
pub fn blend_into(out: &mut Field, a: &Field, b: &Field, w: f64, bc: &BoundaryConditions) -> Result<()> {
    out.require_same_layout(a)?;
    out.require_same_layout(b)?;
    let rows = out.rows();
    let n = out.row_len();
    let i0 = out.active(0).0;
    let ix = out.indexer();
    let (ad, bd) = (a.data(), b.data());
    let o = SharedMut::new(out.data_mut());
    par::for_rows(&rows, n, |j, k| {
        let base = ix.at(i0, j, k);
        for idx in base..base + n {
            // SAFETY: rows are disjoint.
            unsafe { o.write(idx, ad[idx] + w * (bd[idx] - ad[idx])) };
        }
    });
    out.fill_ghosts(bc)
}

/// Inputs of one momentum right-hand side, all sharing the layout of `un`.
pub struct RhsTerms<'a> {
    pub un: &'a Field,
    pub conv: &'a Field,
    pub grad_p: &'a Field,
    /// Explicit half of the viscous term, `dt / (2 Re)`, or `None`.
    pub explicit_visc: Option<f64>,
    /// Body force, its axis and evaluation time.
    pub forcing: Option<(&'a Forcing, usize, f64)>,
}

/// `f = u^n - dt*conv - dt*grad p [+ nu*lap u^n] [+ dt*F]`.
pub fn momentum_rhs_into(t: &RhsTerms<'_>, dt: f64, out: &mut Field) -> Result<()> {
    let un = t.un;
    un.require_fresh()?;
    out.require_same_layout(un)?;
    out.require_same_layout(t.conv)?;
    out.require_same_layout(t.grad_p)?;
    let dim = un.dim();
    let h2 = un.h() * un.h();
    let diag = (2 * dim) as f64;
    let (sy, sz) = (un.stride(1), un.stride(2));
    let rows = un.rows();
    let n = un.row_len();
    let (lo, _) = un.active(0);
    let ix = un.indexer();
    let (ud, cd, gd) = (un.data(), t.conv.data(), t.grad_p.data());
    let xs: Vec<f64> = (0..n).map(|s| un.coord(0, lo + s as isize)).collect();
    let o = SharedMut::new(out.data_mut());
    par::for_rows(&rows, n, |j, k| {
        let base = ix.at(lo, j, k);
        let (y, z) = (un.coord(1, j), un.coord(2, k));
        for s in 0..n {
            let idx = base + s;
            let mut v = ud[idx] - dt * cd[idx] - dt * gd[idx];
            if let Some(nu) = t.explicit_visc {
                v += nu * (neighbour_sum(ud, idx, sy, sz, dim) - diag * ud[idx]) / h2;
            }
            if let Some((force, axis, time)) = t.forcing {
                v += dt * force(axis, [xs[s], y, z], time);
            }
            // SAFETY: rows are disjoint.
            unsafe { o.write(idx, v) };
        }
    });
    Ok(())
}

/// `out = -div`, after checking the discrete compatibility of the Neumann
/// problem.
pub fn pressure_rhs_into(div: &Field, out: &mut Field, check_mean: bool) -> Result<()> {
    out.copy_from(div)?;
    out.scale(-1.0);
    if check_mean {
        let m = out.mean();
        if m.abs() > 1e-10 {
            return Err(Error::IncompatibleRhs(m));
        }
    }
    Ok(())
}
