//! Operators and transfers against dense matrices assembled from the
//! stencil definitions, with boundary ghosts eliminated by hand.

use fasmg::rng::fill_uniform;
use fasmg::stencil::apply_operator;
use fasmg::transfer::{prolong_into, restrict_into};
use fasmg::{BoundaryConditions, FaceBc, Field, GridLevel, Layout, Location, OperatorCoeffs};

#[derive(Clone, Copy)]
enum Side {
    Dirichlet(f64),
    Neumann,
    Periodic,
}

/// Affine combination of active unknowns.
#[derive(Clone, Debug, Default)]
struct Affine {
    terms: Vec<(Vec<isize>, f64)>,
    constant: f64,
}

/// Active range of one axis and how out-of-range indices map back into it.
#[derive(Clone, Copy)]
struct Axis {
    n: isize,
    faces: bool,
    side: Side,
}

impl Axis {
    fn lo(&self) -> isize {
        match (self.faces, self.side) {
            (true, Side::Periodic) => 0,
            _ => 1,
        }
    }

    fn hi(&self) -> isize {
        if self.faces {
            self.n - 1
        } else {
            self.n
        }
    }

    /// `(index, weight)` pairs and a constant that give the value at `l`.
    fn resolve(&self, l: isize) -> (Vec<(isize, f64)>, f64) {
        let n = self.n;
        if (self.lo()..=self.hi()).contains(&l) {
            return (vec![(l, 1.0)], 0.0);
        }
        match (self.faces, self.side) {
            (false, Side::Periodic) => (vec![((l - 1).rem_euclid(n) + 1, 1.0)], 0.0),
            (true, Side::Periodic) => (vec![(l.rem_euclid(n), 1.0)], 0.0),
            // ghost(1-k) = 2v - cell(k), ghost(n+k) = 2v - cell(n+1-k)
            (false, Side::Dirichlet(v)) => {
                let k = if l < 1 { 1 - l } else { 2 * n + 1 - l };
                (vec![(k, -1.0)], 2.0 * v)
            }
            (false, Side::Neumann) => {
                let k = if l < 1 { 1 - l } else { 2 * n + 1 - l };
                (vec![(k, 1.0)], 0.0)
            }
            // wall faces carry v; ghost(-k) = 2v - face(k)
            (true, Side::Dirichlet(v)) => {
                if l == 0 || l == n {
                    (vec![], v)
                } else {
                    let k = if l < 0 { -l } else { 2 * n - l };
                    (vec![(k, -1.0)], 2.0 * v)
                }
            }
            (true, Side::Neumann) => {
                let k = if l <= 0 { (-l).max(1) } else { (2 * n - l).min(n - 1) };
                (vec![(k, 1.0)], 0.0)
            }
        }
    }
}

/// Value at logical index `l`, resolving x first, as the ghost fill leaves
/// x-ghosts defined in terms of already-filled y and z ghosts.
fn resolve(axes: &[Axis], l: &[isize]) -> Affine {
    let mut acc = Affine { terms: vec![(l.to_vec(), 1.0)], constant: 0.0 };
    for (a, ax) in axes.iter().enumerate() {
        let mut next = Affine { terms: vec![], constant: acc.constant };
        for (idx, w) in acc.terms {
            let (parts, c) = ax.resolve(idx[a]);
            next.constant += w * c;
            for (m, wm) in parts {
                let mut j = idx.clone();
                j[a] = m;
                next.terms.push((j, w * wm));
            }
        }
        acc = next;
    }
    acc
}

fn active_points(axes: &[Axis]) -> Vec<Vec<isize>> {
    let mut pts = vec![vec![]];
    for ax in axes {
        let mut next = Vec::new();
        for l in ax.lo()..=ax.hi() {
            for p in &pts {
                let mut q: Vec<isize> = p.clone();
                q.push(l);
                next.push(q);
            }
        }
        pts = next;
    }
    // storage order is x fastest
    pts.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
    pts
}

fn position(pts: &[Vec<isize>], p: &[isize]) -> usize {
    pts.iter().position(|q| q.as_slice() == p).expect("active point")
}

fn axes_for(dim: usize, n: usize, loc: Location, side: [Side; 3]) -> Vec<Axis> {
    (0..dim)
        .map(|a| Axis { n: n as isize, faces: loc.normal_axis() == Some(a), side: side[a] })
        .collect()
}

fn bc_for(side: [Side; 3]) -> BoundaryConditions {
    let face = |s: Side| match s {
        Side::Dirichlet(v) => FaceBc::Dirichlet(v),
        Side::Neumann => FaceBc::Neumann,
        Side::Periodic => FaceBc::Periodic,
    };
    BoundaryConditions::new([[face(side[0]); 2], [face(side[1]); 2], [face(side[2]); 2]]).unwrap()
}

fn at(f: &Field, p: &[isize]) -> f64 {
    f.get(p[0], p[1], if p.len() == 3 { p[2] } else { 0 })
}

fn random_field(grid: GridLevel, loc: Location, bc: &BoundaryConditions, seed: u64) -> Field {
    let mut f = Field::new(grid, loc, Layout::for_bc(bc, 1));
    fill_uniform(&mut f, seed);
    f.fill_ghosts(bc).unwrap();
    f
}

fn check_operator(dim: usize, n: usize, loc: Location, side: [Side; 3], c: OperatorCoeffs) {
    let grid = GridLevel::unit(dim, n).unwrap();
    let bc = bc_for(side);
    let axes = axes_for(dim, n, loc, side);
    let pts = active_points(&axes);
    let x = random_field(grid, loc, &bc, 7);
    let xs: Vec<f64> = pts.iter().map(|p| at(&x, p)).collect();
    let h2 = grid.h * grid.h;
    // dense matrix and boundary vector
    let m = pts.len();
    let mut mat = vec![vec![0.0; m]; m];
    let mut g = vec![0.0; m];
    for (r, p) in pts.iter().enumerate() {
        mat[r][r] += c.a + c.b * (2 * dim) as f64 / h2;
        for a in 0..dim {
            for d in [-1isize, 1] {
                let mut q = p.clone();
                q[a] += d;
                let aff = resolve(&axes, &q);
                g[r] -= c.b / h2 * aff.constant;
                for (idx, w) in aff.terms {
                    mat[r][position(&pts, &idx)] -= c.b / h2 * w;
                }
            }
        }
    }
    let y = apply_operator(&x, c).unwrap();
    for (r, p) in pts.iter().enumerate() {
        let dense: f64 = (0..m).map(|j| mat[r][j] * xs[j]).sum::<f64>() + g[r];
        let scale: f64 = (0..m).map(|j| (mat[r][j] * xs[j]).abs()).sum::<f64>() + g[r].abs();
        let got = at(&y, p);
        assert!(
            (got - dense).abs() <= 1e-14 * scale.max(1.0),
            "{loc:?} {dim}D at {p:?}: {got} vs {dense}"
        );
    }
}

const D0: Side = Side::Dirichlet(0.0);

pub fn operator_matches_dense_matrix_on_cells() {
    let c = OperatorCoeffs::new(1.0, 0.7).unwrap();
    for side in [
        [D0; 3],
        [Side::Dirichlet(0.3), Side::Dirichlet(-1.2), Side::Dirichlet(2.0)],
        [Side::Neumann; 3],
        [Side::Periodic; 3],
        [Side::Periodic, Side::Dirichlet(0.5), Side::Neumann],
    ] {
        check_operator(2, 16, Location::Cell, side, c);
        check_operator(3, 8, Location::Cell, side, c);
    }
}

pub fn operator_matches_dense_matrix_on_edges() {
    let c = OperatorCoeffs::new(1.0, 0.01).unwrap();
    for side in [[D0; 3], [Side::Dirichlet(1.0), Side::Dirichlet(-0.5), D0], [Side::Periodic; 3]] {
        for a in 0..2 {
            check_operator(2, 16, Location::edge(a), side, c);
        }
        for a in 0..3 {
            check_operator(3, 8, Location::edge(a), side, c);
        }
    }
    check_operator(2, 16, Location::edge(0), [Side::Neumann; 3], c);
}

/// `coarse = R fine`, R assembled from the restriction weights.
fn check_restriction(dim: usize, n: usize, loc: Location, side: [Side; 3]) {
    let fg = GridLevel::unit(dim, n).unwrap();
    let cg = fg.coarsen().unwrap();
    let bc = bc_for(side);
    let fine = random_field(fg, loc, &bc, 11);
    let mut coarse = Field::new(cg, loc, Layout::for_bc(&bc, 1));
    restrict_into(&fine, &mut coarse).unwrap();
    let cpts = active_points(&axes_for(dim, n / 2, loc, side));
    let faxes = axes_for(dim, n, loc, side);
    for p in &cpts {
        // children and weights
        let mut rows: Vec<(Vec<isize>, f64)> = vec![(vec![], 1.0)];
        for a in 0..dim {
            let opts: Vec<(isize, f64)> = if loc.normal_axis() == Some(a) {
                vec![(2 * p[a] - 1, 1.0), (2 * p[a], 2.0), (2 * p[a] + 1, 1.0)]
            } else {
                vec![(2 * p[a] - 1, 1.0), (2 * p[a], 1.0)]
            };
            rows = rows
                .into_iter()
                .flat_map(|(v, w)| {
                    opts.iter().map(move |&(l, wl)| {
                        let mut v = v.clone();
                        v.push(l);
                        (v, w * wl)
                    })
                })
                .collect();
        }
        let total: f64 = rows.iter().map(|r| r.1).sum();
        let mut dense = 0.0;
        let mut scale = 0.0;
        for (q, w) in rows {
            let aff = resolve(&faxes, &q);
            assert!(aff.constant == 0.0);
            for (idx, wi) in aff.terms {
                dense += w * wi * at(&fine, &idx) / total;
                scale += (w * wi * at(&fine, &idx) / total).abs();
            }
        }
        let got = at(&coarse, p);
        assert!((got - dense).abs() <= 1e-14 * scale.max(1.0), "{loc:?} {p:?}: {got} vs {dense}");
    }
}

pub fn restriction_matches_dense_matrix() {
    for side in [[D0; 3], [Side::Periodic; 3]] {
        check_restriction(2, 16, Location::Cell, side);
        check_restriction(3, 8, Location::Cell, side);
        for a in 0..2 {
            check_restriction(2, 16, Location::edge(a), side);
        }
        for a in 0..3 {
            check_restriction(3, 8, Location::edge(a), side);
        }
    }
}

/// Weights of the fine value at `l` along one axis in terms of coarse
/// indices.
fn prolong_weights(l: isize, normal: bool) -> Vec<(isize, f64)> {
    if normal {
        if l % 2 == 0 {
            vec![(l / 2, 1.0)]
        } else {
            vec![((l - 1) / 2, 0.5), ((l + 1) / 2, 0.5)]
        }
    } else {
        let base = (l + 1) / 2;
        let far = if l % 2 != 0 { base - 1 } else { base + 1 };
        vec![(base, 0.75), (far, 0.25)]
    }
}

fn check_prolongation(dim: usize, n: usize, loc: Location, side: [Side; 3]) {
    let fg = GridLevel::unit(dim, n).unwrap();
    let cg = fg.coarsen().unwrap();
    let bc = bc_for(side);
    let coarse = random_field(cg, loc, &bc, 13);
    let mut fine = Field::new(fg, loc, Layout::for_bc(&bc, 1));
    prolong_into(&coarse, &mut fine).unwrap();
    let caxes = axes_for(dim, n / 2, loc, side);
    for p in active_points(&axes_for(dim, n, loc, side)) {
        let mut rows: Vec<(Vec<isize>, f64)> = vec![(vec![], 1.0)];
        for a in 0..dim {
            let opts = if loc == Location::Cell {
                vec![((p[a] + 1) / 2, 1.0)]
            } else {
                prolong_weights(p[a], loc.normal_axis() == Some(a))
            };
            rows = rows
                .into_iter()
                .flat_map(|(v, w)| {
                    opts.iter().map(move |&(l, wl)| {
                        let mut v = v.clone();
                        v.push(l);
                        (v, w * wl)
                    })
                })
                .collect();
        }
        let mut dense = 0.0;
        let mut scale = 0.0;
        for (q, w) in rows {
            let aff = resolve(&caxes, &q);
            dense += w * aff.constant;
            for (idx, wi) in aff.terms {
                dense += w * wi * at(&coarse, &idx);
                scale += (w * wi * at(&coarse, &idx)).abs();
            }
        }
        let got = at(&fine, &p);
        assert!((got - dense).abs() <= 1e-14 * scale.max(1.0), "{loc:?} {p:?}: {got} vs {dense}");
    }
}

pub fn prolongation_matches_dense_matrix() {
    for side in [[D0; 3], [Side::Periodic; 3]] {
        check_prolongation(2, 16, Location::Cell, side);
        check_prolongation(3, 8, Location::Cell, side);
        for a in 0..2 {
            check_prolongation(2, 16, Location::edge(a), side);
        }
        for a in 0..3 {
            check_prolongation(3, 8, Location::edge(a), side);
        }
    }
}
