//! A two-level FAS cycle written out with plain arrays, compared bitwise
//! with the library on an 8x8 cell-centred grid.

use fasmg::rng::fill_uniform;
use fasmg::smoother::smooth;
use fasmg::{
    BoundaryConditions, FasParams, FasSolver, Field, GridLevel, Layout, Location, OperatorCoeffs, Sequence,
    SweepPlan, SweepShape,
};

/// `(n + 2)^2` values, ghosts included, `a[j][i]`.
type Grid = Vec<Vec<f64>>;

fn zeros(n: usize) -> Grid {
    vec![vec![0.0; n + 2]; n + 2]
}

/// Dirichlet `v` on every wall: `ghost = 2v - cell`.
fn ghosts(p: &mut Grid, v: f64) {
    let n = p.len() - 2;
    for i in 0..n + 2 {
        p[0][i] = 2.0 * v - p[1][i];
        p[n + 1][i] = 2.0 * v - p[n][i];
    }
    for row in p.iter_mut() {
        row[0] = 2.0 * v - row[1];
        row[n + 1] = 2.0 * v - row[n];
    }
}

/// Points `(i, j)` with the given parities, 0 = even, 1 = odd.
fn color(i: usize, j: usize, c: (usize, usize)) -> bool {
    i % 2 == c.0 && j % 2 == c.1
}

fn smooth_scalar(p: &mut Grid, f: &Grid, h: f64, a: f64, b: f64, visits: &[(usize, usize)], v: f64) {
    let n = p.len() - 2;
    let h2 = h * h;
    let denom = a * h2 + 4.0 * b;
    for &c in visits {
        ghosts(p, v);
        for j in 1..=n {
            for i in 1..=n {
                if color(i, j, c) {
                    let s = p[j][i + 1] + p[j][i - 1] + p[j + 1][i] + p[j - 1][i];
                    p[j][i] = (h2 * f[j][i] + b * s) / denom;
                }
            }
        }
    }
    ghosts(p, v);
}

fn apply(p: &Grid, h: f64, a: f64, b: f64) -> Grid {
    let n = p.len() - 2;
    let h2 = h * h;
    let mut out = zeros(n);
    for j in 1..=n {
        for i in 1..=n {
            let lap = (p[j][i + 1] + p[j][i - 1] + p[j + 1][i] + p[j - 1][i] - 4.0 * p[j][i]) / h2;
            out[j][i] = a * p[j][i] - b * lap;
        }
    }
    out
}

fn restrict(fine: &Grid) -> Grid {
    let nc = (fine.len() - 2) / 2;
    let mut c = zeros(nc);
    for j in 1..=nc {
        for i in 1..=nc {
            let (fi, fj) = (2 * i - 1, 2 * j - 1);
            c[j][i] = ((fine[fj][fi] + fine[fj + 1][fi]) + (fine[fj][fi + 1] + fine[fj + 1][fi + 1])) * 0.25;
        }
    }
    c
}

#[allow(clippy::too_many_arguments)]
fn two_grid(p: &mut Grid, f: &Grid, h: f64, a: f64, b: f64, s: usize, visits: &[(usize, usize)], v: f64) {
    let n = p.len() - 2;
    ghosts(p, v);
    for _ in 0..s {
        smooth_scalar(p, f, h, a, b, visits, v);
    }
    let lp = apply(p, h, a, b);
    let mut r = zeros(n);
    for j in 1..=n {
        for i in 1..=n {
            r[j][i] = f[j][i] - lp[j][i];
        }
    }
    let mut pc = restrict(p);
    ghosts(&mut pc, v);
    let p0 = pc.clone();
    let mut fc = restrict(&r);
    let l0 = apply(&pc, 2.0 * h, a, b);
    let nc = n / 2;
    for j in 1..=nc {
        for i in 1..=nc {
            fc[j][i] += l0[j][i];
        }
    }
    for _ in 0..s {
        smooth_scalar(&mut pc, &fc, 2.0 * h, a, b, visits, v);
    }
    for j in 1..=n {
        for i in 1..=n {
            let (ic, jc) = ((i + 1) / 2, (j + 1) / 2);
            p[j][i] += pc[jc][ic] - p0[jc][ic];
        }
    }
    for _ in 0..s {
        smooth_scalar(p, f, h, a, b, visits, v);
    }
}

fn to_grid(f: &Field) -> Grid {
    let n = f.grid().cells[0];
    let mut g = zeros(n);
    for (j, row) in g.iter_mut().enumerate().take(n + 1).skip(1) {
        for (i, x) in row.iter_mut().enumerate().take(n + 1).skip(1) {
            *x = f.get(i as isize, j as isize, 0);
        }
    }
    g
}

const ODD: usize = 1;
const EVEN: usize = 0;

fn x_visits() -> Vec<(usize, usize)> {
    let c = [(ODD, EVEN), (EVEN, ODD), (EVEN, EVEN), (ODD, ODD)];
    c.iter().chain(c.iter()).copied().collect()
}

fn inputs(n: usize, v: f64) -> (Field, Field, BoundaryConditions) {
    let grid = GridLevel::unit(2, n).unwrap();
    let bc = BoundaryConditions::uniform(fasmg::FaceBc::Dirichlet(v));
    let mut p = Field::new(grid, Location::Cell, Layout::new(1));
    fill_uniform(&mut p, 3);
    p.fill_ghosts(&bc).unwrap();
    let mut f = Field::new(grid, Location::Cell, Layout::new(1));
    fill_uniform(&mut f, 4);
    (p, f, bc)
}

pub fn two_grid_cycle_matches_scalar_transcription_bitwise() {
    for &(a, b, v) in &[(1.0, 1.0, 0.0), (0.5, 0.03, 0.0), (1.0, 2.0, 0.7)] {
        let (mut p, f, bc) = inputs(8, v);
        let mut ps = to_grid(&p);
        let fs = to_grid(&f);
        let c = OperatorCoeffs::new(a, b).unwrap();
        let params = FasParams::new(1e-12, 1, 2, 1).unwrap();
        let plan = SweepPlan::new(SweepShape::X, Sequence::ForwardForward, 2);
        let mut solver = FasSolver::new(*p.grid(), Location::Cell, Layout::new(1), bc, c, params, plan).unwrap();
        assert_eq!(solver.hierarchy().len(), 2);
        solver.vcycle(&mut p, &f).unwrap();
        let h = p.h();
        two_grid(&mut ps, &fs, h, a, b, 2, &x_visits(), v);
        for j in 1..=8 {
            for i in 1..=8 {
                let got = p.get(i, j, 0);
                let want = ps[j as usize][i as usize];
                assert_eq!(got.to_bits(), want.to_bits(), "a={a} b={b} ({i},{j}): {got} vs {want}");
            }
        }
    }
}

pub fn colored_sweeps_match_scalar_transcription_bitwise() {
    let plans: Vec<(SweepPlan, Vec<(usize, usize)>)> = vec![
        (SweepPlan::new(SweepShape::X, Sequence::ForwardForward, 2), x_visits()),
        (
            SweepPlan::new(SweepShape::Z, Sequence::ForwardBackward, 2),
            vec![(ODD, ODD), (EVEN, ODD), (ODD, EVEN), (EVEN, EVEN), (EVEN, EVEN), (ODD, EVEN), (EVEN, ODD), (ODD, ODD)],
        ),
        (
            SweepPlan::new(SweepShape::U, Sequence::ForwardForward, 2),
            vec![(ODD, ODD), (EVEN, ODD), (EVEN, EVEN), (ODD, EVEN), (ODD, ODD), (EVEN, ODD), (EVEN, EVEN), (ODD, EVEN)],
        ),
    ];
    for (plan, visits) in plans {
        let (mut p, f, bc) = inputs(16, 0.2);
        let mut ps = to_grid(&p);
        let fs = to_grid(&f);
        let c = OperatorCoeffs::new(1.0, 0.4).unwrap();
        smooth(&f, &mut p, c, &plan, &bc).unwrap();
        smooth_scalar(&mut ps, &fs, p.h(), 1.0, 0.4, &visits, 0.2);
        for j in 1..=16 {
            for i in 1..=16 {
                assert_eq!(p.get(i, j, 0).to_bits(), ps[j as usize][i as usize].to_bits(), "{:?}", plan.shape);
            }
        }
    }
}

/// Red-black: odd `i + j` first, then even.
pub fn red_black_matches_two_color_transcription() {
    let (mut p, f, bc) = inputs(16, 0.0);
    let mut ps = to_grid(&p);
    let fs = to_grid(&f);
    let c = OperatorCoeffs::helmholtz();
    let plan = SweepPlan::new(SweepShape::RedBlack, Sequence::ForwardForward, 2);
    smooth(&f, &mut p, c, &plan, &bc).unwrap();
    let h2 = p.h() * p.h();
    for _ in 0..2 {
        for parity in [1, 0] {
            ghosts(&mut ps, 0.0);
            for j in 1..=16 {
                for i in 1..=16 {
                    if (i + j) % 2 == parity {
                        let s = ps[j][i + 1] + ps[j][i - 1] + ps[j + 1][i] + ps[j - 1][i];
                        ps[j][i] = (h2 * fs[j][i] + s) / (h2 + 4.0);
                    }
                }
            }
        }
    }
    for j in 1..=16 {
        for i in 1..=16 {
            assert_eq!(p.get(i, j, 0).to_bits(), ps[j as usize][i as usize].to_bits());
        }
    }
}
