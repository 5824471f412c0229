//! Restriction and prolongation between a level and the next coarser one.
//!
//! Cell fields use block averaging and piecewise-constant injection. Edge
//! fields use a full-weighting restriction, (1,2,1)/4 across fine faces along
//! the normal axis and (1,1)/2 over the two fine cells along each tangential
//! axis, and an interpolating prolongation: (3 near + far)/4 per tangential
//! axis on fine faces that coincide with coarse faces, then the mean of the
//! two neighbouring coincident faces in between.

use crate::error::{Error, Result};
use crate::field::{Field, Location};
use crate::grid::GridLevel;
use crate::par::{self, SharedMut};

fn coarse_grid(g: &GridLevel) -> Result<GridLevel> {
    g.coarsen()
        .ok_or_else(|| Error::InvalidGrid(format!("{:?} cells cannot be halved", &g.cells[..g.dim])))
}

fn fine_grid(g: &GridLevel) -> GridLevel {
    let mut f = *g;
    for a in 0..g.dim {
        f.cells[a] *= 2;
    }
    f.h = g.h / 2.0;
    if g.dim == 2 {
        f.max[2] = f.h;
    }
    f.level = g.level + 1;
    f
}

fn fill_active(out: &mut Field, f: impl Fn(isize, isize, isize) -> f64 + Sync + Send) {
    let rows = out.rows();
    let n = out.row_len();
    let (i0, _) = out.active(0);
    let ix = out.indexer();
    let o = SharedMut::new(out.data_mut());
    par::for_rows(&rows, n, |j, k| {
        let base = ix.at(i0, j, k);
        for t in 0..n as isize {
            // SAFETY: rows are disjoint.
            unsafe { o.write(base + t as usize, f(i0 + t, j, k)) };
        }
    });
}

fn check_pair(fine: &Field, coarse: &Field) -> Result<()> {
    let expect = coarse_grid(fine.grid())?;
    if fine.location() != coarse.location()
        || fine.layout() != coarse.layout()
        || expect.cells != coarse.grid().cells
    {
        return Err(Error::LocationMismatch("fields are not a fine/coarse pair".into()));
    }
    Ok(())
}

pub fn restrict(fine: &Field) -> Result<Field> {
    let mut out = Field::new(coarse_grid(fine.grid())?, fine.location(), fine.layout());
    restrict_into(fine, &mut out)?;
    Ok(out)
}

pub fn prolong(coarse: &Field) -> Result<Field> {
    let mut out = Field::new(fine_grid(coarse.grid()), coarse.location(), coarse.layout());
    prolong_into(coarse, &mut out)?;
    Ok(out)
}

pub fn restrict_into(fine: &Field, coarse: &mut Field) -> Result<()> {
    check_pair(fine, coarse)?;
    match fine.location() {
        Location::Cell => restrict_cell(fine, coarse),
        _ => {
            fine.require_fresh()?;
            restrict_edge_impl(fine, coarse)
        }
    }
    Ok(())
}

pub fn prolong_into(coarse: &Field, fine: &mut Field) -> Result<()> {
    check_pair(fine, coarse)?;
    match coarse.location() {
        Location::Cell => prolong_cell(coarse, fine),
        _ => {
            coarse.require_fresh()?;
            prolong_edge_impl(coarse, fine)
        }
    }
    Ok(())
}

pub fn restrict_cc(fine: &Field) -> Result<Field> {
    expect_cell(fine)?;
    restrict(fine)
}

pub fn prolong_cc(coarse: &Field) -> Result<Field> {
    expect_cell(coarse)?;
    prolong(coarse)
}

pub fn restrict_edge(fine: &Field) -> Result<Field> {
    expect_edge(fine)?;
    restrict(fine)
}

pub fn prolong_edge(coarse: &Field) -> Result<Field> {
    expect_edge(coarse)?;
    prolong(coarse)
}

fn expect_cell(f: &Field) -> Result<()> {
    match f.location() {
        Location::Cell => Ok(()),
        l => Err(Error::LocationMismatch(format!("{l:?} is not cell-centered"))),
    }
}

fn expect_edge(f: &Field) -> Result<()> {
    match f.location() {
        Location::Cell => Err(Error::LocationMismatch("cell field passed as edge field".into())),
        _ => Ok(()),
    }
}

fn restrict_cell(fine: &Field, coarse: &mut Field) {
    let dim = fine.dim();
    fill_active(coarse, |i, j, k| {
        let (fi, fj) = (2 * i - 1, 2 * j - 1);
        let pair = |fk: isize| {
            (fine.get(fi, fj, fk) + fine.get(fi, fj + 1, fk)) + (fine.get(fi + 1, fj, fk) + fine.get(fi + 1, fj + 1, fk))
        };
        if dim == 2 {
            pair(0) * 0.25
        } else {
            let fk = 2 * k - 1;
            (pair(fk) + pair(fk + 1)) * 0.125
        }
    });
}

fn prolong_cell(coarse: &Field, fine: &mut Field) {
    let dim = fine.dim();
    fill_active(fine, |i, j, k| {
        let kc = if dim == 3 { (k + 1) / 2 } else { 0 };
        coarse.get((i + 1) / 2, (j + 1) / 2, kc)
    });
}

fn tangential_axes(dim: usize, a: usize) -> Vec<usize> {
    (0..dim).filter(|&b| b != a).collect()
}

fn restrict_edge_impl(fine: &Field, coarse: &mut Field) {
    let dim = fine.dim();
    let a = fine.location().normal_axis().unwrap();
    let tang = tangential_axes(dim, a);
    let scale = if dim == 2 { 0.125 } else { 0.0625 };
    fill_active(coarse, |i, j, k| {
        let c = [i, j, k];
        let mut terms = [0.0; 4];
        for (child, term) in terms.iter_mut().enumerate().take(1 << tang.len()) {
            let mut l = c;
            l[a] = 2 * c[a];
            for (t, &b) in tang.iter().enumerate() {
                l[b] = 2 * c[b] - 1 + ((child >> t) & 1) as isize;
            }
            let at = |d: isize| {
                let mut m = l;
                m[a] += d;
                fine.get(m[0], m[1], m[2])
            };
            *term = (at(-1) + at(1)) + 2.0 * at(0);
        }
        ((terms[0] + terms[1]) + (terms[2] + terms[3])) * scale
    });
}

/// `(3 near + far) / 4`, written so that equal inputs come back unchanged.
fn near_far(near: f64, far: f64) -> f64 {
    near + (far - near) * 0.25
}

fn prolong_edge_impl(coarse: &Field, fine: &mut Field) {
    let dim = fine.dim();
    let a = coarse.location().normal_axis().unwrap();
    let tang = tangential_axes(dim, a);
    // value on a fine face that coincides with coarse face `ic` along `a`
    let coincident = |ic: isize, l: [isize; 3]| -> f64 {
        let mut base = [0isize; 3];
        let mut far = [0isize; 3];
        base[a] = ic;
        for &b in &tang {
            base[b] = (l[b] + 1) / 2;
            far[b] = if l[b] % 2 != 0 { -1 } else { 1 };
        }
        let at = |m: [isize; 3]| coarse.get(m[0], m[1], m[2]);
        match tang.len() {
            1 => {
                let b = tang[0];
                let mut f = base;
                f[b] += far[b];
                near_far(at(base), at(f))
            }
            _ => {
                let (b, c) = (tang[0], tang[1]);
                let along_b = |m: [isize; 3]| {
                    let mut f = m;
                    f[b] += far[b];
                    near_far(at(m), at(f))
                };
                let mut mc = base;
                mc[c] += far[c];
                near_far(along_b(base), along_b(mc))
            }
        }
    };
    fill_active(fine, |i, j, k| {
        let l = [i, j, k];
        if l[a] % 2 == 0 {
            coincident(l[a] / 2, l)
        } else {
            let ic = (l[a] - 1) / 2;
            (coincident(ic, l) + coincident(ic + 1, l)) * 0.5
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bc::BoundaryConditions;
    use crate::field::Layout;

    fn g2(n: usize) -> GridLevel {
        GridLevel::unit(2, n).unwrap()
    }

    #[test]
    fn block_average() {
        let mut f = Field::new(g2(2), Location::Cell, Layout::new(1));
        f.set(1, 1, 0, 1.0);
        f.set(2, 1, 0, 2.0);
        f.set(1, 2, 0, 3.0);
        f.set(2, 2, 0, 4.0);
        let c = restrict_cc(&f).unwrap();
        assert_eq!(c.get(1, 1, 0), 2.5);
    }

    #[test]
    fn restriction_of_linear_cells_is_exact() {
        let f = Field::from_fn(g2(16), Location::Cell, Layout::new(1), |x, y, _| 3.0 * x - y);
        let c = restrict_cc(&f).unwrap();
        let e = Field::from_fn(*c.grid(), Location::Cell, Layout::new(1), |x, y, _| 3.0 * x - y);
        assert!(c.max_abs_diff(&e).unwrap() < 1e-14);
    }

    #[test]
    fn injection_footprint() {
        let mut c = Field::new(g2(4), Location::Cell, Layout::new(1));
        c.set(2, 3, 0, 1.0);
        let f = prolong_cc(&c).unwrap();
        let mut ones = vec![];
        f.for_each_active(|i, j, _| {
            if f.get(i, j, 0) == 1.0 {
                ones.push((i, j))
            }
        });
        assert_eq!(ones, vec![(3, 5), (4, 5), (3, 6), (4, 6)]);
    }

    #[test]
    fn edge_restriction_preserves_linears() {
        let bc = BoundaryConditions::neumann();
        for loc in [Location::EdgeX, Location::EdgeY] {
            let mut f = Field::from_fn(g2(16), loc, Layout::new(1), |x, y, _| 1.0 + 2.0 * x - 5.0 * y);
            f.fill_ghosts(&bc).unwrap();
            let c = restrict_edge(&f).unwrap();
            let e = Field::from_fn(*c.grid(), loc, Layout::new(1), |x, y, _| 1.0 + 2.0 * x - 5.0 * y);
            assert!(c.max_abs_diff(&e).unwrap() < 1e-13, "{loc:?}");
        }
    }

    #[test]
    fn edge_prolongation_reproduces_linears_away_from_walls() {
        let lin = |x: f64, y: f64, _| 0.5 - x + 3.0 * y;
        // every stored point, ghosts included, holds the linear function
        let mut c = Field::new(g2(8), Location::EdgeX, Layout::new(1));
        let ((i0, i1), (j0, j1)) = (c.stored(0), c.stored(1));
        for i in i0..=i1 {
            for j in j0..=j1 {
                let v = lin(c.coord(0, i), c.coord(1, j), 0.0);
                c.set(i, j, 0, v);
            }
        }
        c.mark_fresh();
        let f = prolong_edge(&c).unwrap();
        let e = Field::from_fn(*f.grid(), Location::EdgeX, Layout::new(1), lin);
        assert!(f.max_abs_diff(&e).unwrap() < 1e-13);
    }

    #[test]
    fn restrict_after_prolong_is_identity_for_cells() {
        let c = Field::from_fn(g2(8), Location::Cell, Layout::new(1), |x, y, _| (x * 7.0).sin() + y);
        let back = restrict_cc(&prolong_cc(&c).unwrap()).unwrap();
        assert_eq!(back.active_values(), c.active_values());
    }

    #[test]
    fn constants_survive_bitwise() {
        let bc = BoundaryConditions::uniform(crate::bc::FaceBc::Dirichlet(0.3));
        for dim in [2, 3] {
            let g = GridLevel::unit(dim, 8).unwrap();
            for a in 0..dim {
                let loc = Location::edge(a);
                let mut f = Field::from_fn(g, loc, Layout::new(1), |_, _, _| 0.3);
                f.fill_ghosts(&bc).unwrap();
                let mut c = restrict(&f).unwrap();
                assert!(c.active_values().iter().all(|&v| v == 0.3));
                c.fill_ghosts(&bc).unwrap();
                let p = prolong(&c).unwrap();
                assert!(p.active_values().iter().all(|&v| v == 0.3), "{dim}D {loc:?}");
            }
            let f = Field::from_fn(g, Location::Cell, Layout::new(1), |_, _, _| 0.3);
            assert!(restrict(&f).unwrap().active_values().iter().all(|&v| v == 0.3));
            assert!(prolong(&f).unwrap().active_values().iter().all(|&v| v == 0.3));
        }
    }
}
