//! Matrix-free operators on staggered fields.

use crate::error::{Error, Result};
use crate::field::{Field, Layout, Location};
use crate::par::{self, SharedMut};

/// Coefficients of `a*p - b*lap(p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorCoeffs {
    pub a: f64,
    pub b: f64,
}

impl OperatorCoeffs {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "operator coefficients need a >= 0 and b > 0, got a={a}, b={b}"
            )));
        }
        Ok(OperatorCoeffs { a, b })
    }

    /// `p - lap(p)`.
    pub fn helmholtz() -> Self {
        OperatorCoeffs { a: 1.0, b: 1.0 }
    }
}

/// Sum of the `2d` axis neighbours in a fixed order: +x, -x, +y, -y, +z, -z.
#[inline(always)]
pub(crate) fn neighbour_sum(p: &[f64], idx: usize, sy: usize, sz: usize, dim: usize) -> f64 {
    let s = p[idx + 1] + p[idx - 1] + p[idx + sy] + p[idx - sy];
    if dim == 3 {
        s + p[idx + sz] + p[idx - sz]
    } else {
        s
    }
}

pub fn apply_operator(p: &Field, coeffs: OperatorCoeffs) -> Result<Field> {
    let mut out = Field::zeros_like(p);
    apply_operator_into(p, coeffs, &mut out)?;
    Ok(out)
}

pub fn apply_operator_into(p: &Field, c: OperatorCoeffs, out: &mut Field) -> Result<()> {
    stencil_into(None, p, c, out)
}

/// `r = f - (a*p - b*lap(p))` on active points.
pub fn residual(f: &Field, p: &Field, coeffs: OperatorCoeffs) -> Result<Field> {
    let mut out = Field::zeros_like(p);
    residual_into(f, p, coeffs, &mut out)?;
    Ok(out)
}

pub fn residual_into(f: &Field, p: &Field, c: OperatorCoeffs, out: &mut Field) -> Result<()> {
    stencil_into(Some(f), p, c, out)
}

fn stencil_into(f: Option<&Field>, p: &Field, c: OperatorCoeffs, out: &mut Field) -> Result<()> {
    p.require_fresh()?;
    p.require_same_layout(out)?;
    if let Some(f) = f {
        p.require_same_layout(f)?;
    }
    let dim = p.dim();
    let h2 = p.h() * p.h();
    let diag = (2 * dim) as f64;
    let (sy, sz) = (p.stride(1), p.stride(2));
    let rows = p.rows();
    let n = p.row_len();
    let i0 = p.active(0).0;
    let ix = p.indexer();
    let pd = p.data();
    let fd = f.map(|f| f.data());
    let o = SharedMut::new(out.data_mut());
    par::for_rows(&rows, n, |j, k| {
        let base = ix.at(i0, j, k);
        for idx in base..base + n {
            let lap = (neighbour_sum(pd, idx, sy, sz, dim) - diag * pd[idx]) / h2;
            let lp = c.a * pd[idx] - c.b * lap;
            let v = match fd {
                Some(fd) => fd[idx] - lp,
                None => lp,
            };
            // SAFETY: rows are disjoint and `o` does not alias `p` or `f`.
            unsafe { o.write(idx, v) };
        }
    });
    Ok(())
}

/// Face-normal differences of a cell field, one edge field per axis.
pub fn gradient_cc_to_edges(p: &Field, layout: Layout) -> Result<Vec<Field>> {
    (0..p.dim())
        .map(|a| {
            let mut g = Field::new(*p.grid(), Location::edge(a), layout);
            gradient_component_into(p, a, &mut g)?;
            Ok(g)
        })
        .collect()
}

/// `out = (p[cell l+1] - p[cell l]) / h` at the active faces of `out`.
pub fn gradient_component_into(p: &Field, axis: usize, out: &mut Field) -> Result<()> {
    p.require_fresh()?;
    check_staggered(p, out, axis)?;
    let inv_h = 1.0 / p.h();
    let sa = p.stride(axis);
    let pix = p.indexer();
    let oix = out.indexer();
    let rows = out.rows();
    let n = out.row_len();
    let i0 = out.active(0).0;
    let pd = p.data();
    let o = SharedMut::new(out.data_mut());
    par::for_rows(&rows, n, |j, k| {
        let ob = oix.at(i0, j, k);
        let pb = pix.at(i0, j, k);
        for t in 0..n {
            let v = (pd[pb + t + sa] - pd[pb + t]) * inv_h;
            // SAFETY: rows are disjoint.
            unsafe { o.write(ob + t, v) };
        }
    });
    Ok(())
}

fn check_staggered(cell: &Field, edge: &Field, axis: usize) -> Result<()> {
    if cell.location() != Location::Cell
        || edge.location() != Location::edge(axis)
        || cell.grid().cells != edge.grid().cells
        || cell.layout().periodic != edge.layout().periodic
    {
        return Err(Error::LocationMismatch(format!(
            "{:?} and {:?} are not staggered partners on axis {axis}",
            cell.location(),
            edge.location()
        )));
    }
    Ok(())
}

pub fn divergence_edges_to_cc(vel: &[&Field]) -> Result<Field> {
    let v0 = vel.first().ok_or_else(|| Error::LocationMismatch("no velocity components".into()))?;
    let mut out = Field::new(*v0.grid(), Location::Cell, Layout { halo: 1, periodic: v0.layout().periodic });
    divergence_into(vel, &mut out)?;
    Ok(out)
}

/// Sum over axes of `(u[face l] - u[face l-1]) / h` at every cell.
pub fn divergence_into(vel: &[&Field], out: &mut Field) -> Result<()> {
    let dim = out.dim();
    if vel.len() != dim {
        return Err(Error::LocationMismatch(format!("{} velocity components in {dim}D", vel.len())));
    }
    for (a, u) in vel.iter().enumerate() {
        u.require_fresh()?;
        check_staggered(out, u, a)?;
    }
    let inv_h = 1.0 / out.h();
    let oix = out.indexer();
    let rows = out.rows();
    let n = out.row_len();
    let ix: Vec<_> = vel.iter().map(|u| u.indexer()).collect();
    let st: Vec<usize> = (0..dim).map(|a| vel[a].stride(a)).collect();
    let o = SharedMut::new(out.data_mut());
    par::for_rows(&rows, n, |j, k| {
        let ob = oix.at(1, j, k);
        let bases: Vec<usize> = ix.iter().map(|x| x.at(1, j, k)).collect();
        for t in 0..n {
            let mut d = 0.0;
            for a in 0..dim {
                let u = vel[a].data();
                let idx = bases[a] + t;
                d += (u[idx] - u[idx - st[a]]) * inv_h;
            }
            // SAFETY: rows are disjoint.
            unsafe { o.write(ob + t, d) };
        }
    });
    Ok(())
}

/// `h^d` times the sum of the cell divergences.
pub fn integral_divergence(vel: &[&Field]) -> Result<f64> {
    let div = divergence_edges_to_cc(vel)?;
    Ok(div.sum() * div.h().powi(div.dim() as i32))
}
