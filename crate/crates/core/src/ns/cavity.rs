//! Lid-driven cavity runs and centreline comparison with reference data.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fas::FasParams;
use crate::field::Field;
use crate::grid::GridLevel;
use crate::smoother::SweepPlan;

use super::stepper::{Simulation, StepReport};
use super::{FlowBc, NsParams, ScheduleMode, SchemeOrder};

/// Sampled profile along a line, coordinates ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub coords: Vec<f64>,
    pub values: Vec<f64>,
}

impl Profile {
    /// Linear interpolation, clamped at the ends.
    pub fn interpolate(&self, x: f64) -> f64 {
        let c = &self.coords;
        if x <= c[0] {
            return self.values[0];
        }
        let last = c.len() - 1;
        if x >= c[last] {
            return self.values[last];
        }
        let i = c.partition_point(|&v| v <= x) - 1;
        let t = (x - c[i]) / (c[i + 1] - c[i]);
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// `vertical`: lid-direction velocity against the wall-normal coordinate
/// through the centre. `horizontal`: wall-normal velocity against x.
#[derive(Debug, Clone, PartialEq)]
pub struct Centrelines {
    pub vertical: Profile,
    pub horizontal: Profile,
}

/// Samples `f` along axis `along` at cell centres plus both walls, averaging
/// over the index sets given for the other axes. Wall values are the mean of
/// the boundary cell and its ghost.
fn line(f: &Field, along: usize, fixed: &[(usize, Vec<isize>)]) -> Profile {
    let n = f.grid().cells[along] as isize;
    let sample = |l: isize| -> f64 {
        let mut idx = [0isize; 3];
        idx[along] = l;
        let (a0, ref s0) = fixed[0];
        let (a1, s1) = match fixed.get(1) {
            Some((a, s)) => (*a, s.clone()),
            None => (3, vec![0]),
        };
        let mut acc = 0.0;
        for &x0 in s0 {
            for &x1 in &s1 {
                idx[a0] = x0;
                if a1 < 3 {
                    idx[a1] = x1;
                }
                acc += f.get(idx[0], idx[1], idx[2]);
            }
        }
        acc / (s0.len() * s1.len()) as f64
    };
    let mut coords = vec![f.grid().min[along]];
    let mut values = vec![0.5 * (sample(0) + sample(1))];
    for l in 1..=n {
        coords.push(f.coord(along, l));
        values.push(sample(l));
    }
    coords.push(f.grid().max[along]);
    values.push(0.5 * (sample(n) + sample(n + 1)));
    Profile { coords, values }
}

/// Centrelines of the current state. In 2D `u(y)` at `x = 1/2` and `v(x)` at
/// `y = 1/2`; in 3D `u(z)` at `x = y = 1/2` and `w(x)` at `y = z = 1/2`.
pub fn centrelines(sim: &Simulation) -> Centrelines {
    let g = sim.grid();
    let mid = |a: usize| (g.cells[a] / 2) as isize;
    if g.dim == 2 {
        // face n/2 sits on the centre line
        let vertical = line(sim.velocity(0), 1, &[(0, vec![mid(0)])]);
        let horizontal = line(sim.velocity(1), 0, &[(1, vec![mid(1)])]);
        Centrelines { vertical, horizontal }
    } else {
        // y = 1/2 falls between cells n/2 and n/2 + 1
        let ymid = vec![mid(1), mid(1) + 1];
        let vertical = line(sim.velocity(0), 2, &[(0, vec![mid(0)]), (1, ymid.clone())]);
        let horizontal = line(sim.velocity(2), 0, &[(2, vec![mid(2)]), (1, ymid)]);
        Centrelines { vertical, horizontal }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CavitySetup {
    pub dim: usize,
    pub n: usize,
    pub re: f64,
    pub dt: f64,
    /// Hard cap on the integration time.
    pub t_end: f64,
    /// Steady once `||u^(n+1) - u^n|| / dt` drops below this.
    pub steady_tol: f64,
    pub order: SchemeOrder,
    pub mode: ScheduleMode,
    pub fas: FasParams,
    pub plan: SweepPlan,
}

impl CavitySetup {
    pub fn new(dim: usize, n: usize, re: f64) -> Result<Self> {
        let grid = GridLevel::unit(dim, n)?;
        let mut fas = FasParams::default_for(&grid);
        fas.tol = 1e-10;
        Ok(CavitySetup {
            dim,
            n,
            re,
            dt: 1e-3,
            t_end: 100.0,
            steady_tol: 1e-7,
            order: SchemeOrder::Second,
            mode: ScheduleMode::Efficient,
            fas,
            plan: SweepPlan::default_for(dim),
        })
    }

    pub fn params(&self, lid_speed: f64) -> NsParams {
        NsParams {
            re: self.re,
            dt: self.dt,
            t_end: self.t_end,
            bc: FlowBc::cavity(self.dim, lid_speed),
            order: self.order,
            mode: self.mode,
            fas: self.fas,
            plan: self.plan.clone(),
            forcing: None,
        }
    }

    pub fn simulation(&self, lid_speed: f64) -> Result<Simulation> {
        Simulation::new(GridLevel::unit(self.dim, self.n)?, self.params(lid_speed))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CavityReport {
    pub centrelines: Centrelines,
    /// Integral divergence after every step.
    pub divergence: Vec<f64>,
    /// `||u^(n+1) - u^n|| / dt` after every step.
    pub change: Vec<f64>,
    pub steady: bool,
    pub steps: usize,
    pub all_converged: bool,
}

/// Scaled L2 norm of `a - b` summed over components.
pub fn velocity_change(a: &[&Field], b: &[Field], work: &mut [Field]) -> Result<f64> {
    let mut s = 0.0;
    for ((x, y), w) in a.iter().zip(b).zip(work.iter_mut()) {
        w.copy_from(x)?;
        w.sub_assign(y)?;
        let n = w.norm_l2_scaled();
        s += n * n;
    }
    Ok(s.sqrt())
}

/// Integrates from rest until steady or `t_end`; `observe` sees every step.
pub fn run_cavity(setup: &CavitySetup, mut observe: impl FnMut(&StepReport, f64)) -> Result<CavityReport> {
    let mut sim = setup.simulation(1.0)?;
    let mut prev: Vec<Field> = sim.velocities().into_iter().cloned().collect();
    let mut work = prev.clone();
    let total = (setup.t_end / setup.dt).round() as usize;
    let mut divergence = Vec::new();
    let mut change = Vec::new();
    let mut steady = false;
    let mut all_converged = true;
    for _ in 0..total {
        let r = sim.step()?;
        let d = velocity_change(&sim.velocities(), &prev, &mut work)? / setup.dt;
        for (p, v) in prev.iter_mut().zip(sim.velocities()) {
            p.copy_from(v)?;
        }
        observe(&r, d);
        all_converged &= r.converged();
        divergence.push(r.integral_divergence);
        change.push(d);
        if d < setup.steady_tol {
            steady = true;
            break;
        }
    }
    Ok(CavityReport {
        centrelines: centrelines(&sim),
        divergence,
        change,
        steady,
        steps: sim.steps_taken(),
        all_converged,
    })
}

/// Reference centreline profiles at Re = 100, 400 and 1000.
#[derive(Debug, Clone, PartialEq)]
pub struct GhiaReference {
    pub reynolds: [f64; 3],
    /// `(y, [u; 3])` on the vertical centreline.
    pub u: Vec<(f64, [f64; 3])>,
    /// `(x, [v; 3])` on the horizontal centreline.
    pub v: Vec<(f64, [f64; 3])>,
}

impl GhiaReference {
    pub fn default_path() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join("ghia_1982.txt")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ReferenceData(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::ReferenceData(m) => Error::ReferenceData(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Two blocks of `coord val val val` rows; a comment line after data
    /// starts the second block.
    pub fn parse(text: &str) -> Result<Self> {
        let mut blocks: Vec<Vec<(f64, [f64; 3])>> = vec![Vec::new()];
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                if !blocks.last().expect("non-empty").is_empty() {
                    blocks.push(Vec::new());
                }
                continue;
            }
            let nums: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::ReferenceData(format!("line {}: {e}", ln + 1)))?;
            if nums.len() != 4 {
                return Err(Error::ReferenceData(format!("line {}: expected 4 columns, got {}", ln + 1, nums.len())));
            }
            blocks.last_mut().expect("non-empty").push((nums[0], [nums[1], nums[2], nums[3]]));
        }
        blocks.retain(|b| !b.is_empty());
        if blocks.len() != 2 {
            return Err(Error::ReferenceData(format!("expected 2 data blocks, found {}", blocks.len())));
        }
        let v = blocks.pop().expect("two blocks");
        let u = blocks.pop().expect("two blocks");
        Ok(GhiaReference { reynolds: [100.0, 400.0, 1000.0], u, v })
    }

    pub fn column(&self, re: f64) -> Result<usize> {
        self.reynolds
            .iter()
            .position(|&r| r == re)
            .ok_or_else(|| Error::ReferenceData(format!("no reference column for Re = {re}")))
    }

    /// Largest deviation of the two profiles at the reference points:
    /// `(max |u - u_ref|, max |v - v_ref|)`.
    pub fn deviation(&self, c: &Centrelines, re: f64) -> Result<(f64, f64)> {
        let k = self.column(re)?;
        let du = self.u.iter().map(|&(y, r)| (c.vertical.interpolate(y) - r[k]).abs()).fold(0.0, f64::max);
        let dv = self.v.iter().map(|&(x, r)| (c.horizontal.interpolate(x) - r[k]).abs()).fold(0.0, f64::max);
        Ok((du, dv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_reference_parses() {
        let g = GhiaReference::load(&GhiaReference::default_path()).unwrap();
        assert_eq!(g.u.len(), 17);
        assert_eq!(g.v.len(), 17);
        assert_eq!(g.u[0], (1.0, [1.0; 3]));
        assert_eq!(g.column(400.0).unwrap(), 1);
    }

    #[test]
    fn missing_file_names_the_path() {
        let e = GhiaReference::load(Path::new("/nonexistent/ghia.txt")).unwrap_err();
        assert!(e.to_string().contains("/nonexistent/ghia.txt"));
    }

    #[test]
    fn malformed_row_is_rejected() {
        assert!(GhiaReference::parse("1 2 3\n# b\n1 2 3 4\n").is_err());
        assert!(GhiaReference::parse("1 2 3 4\n").is_err());
    }

    #[test]
    fn interpolation_is_linear_and_clamped() {
        let p = Profile { coords: vec![0.0, 1.0, 3.0], values: vec![0.0, 2.0, 0.0] };
        assert_eq!(p.interpolate(0.5), 1.0);
        assert_eq!(p.interpolate(2.0), 1.0);
        assert_eq!(p.interpolate(-1.0), 0.0);
        assert_eq!(p.interpolate(5.0), 0.0);
    }

    #[test]
    fn lid_and_walls_appear_in_profiles() {
        let mut s = CavitySetup::new(2, 16, 100.0).unwrap();
        s.dt = 0.01;
        s.t_end = 0.05;
        let r = run_cavity(&s, |_, _| {}).unwrap();
        let v = &r.centrelines.vertical;
        assert!((v.values[v.values.len() - 1] - 1.0).abs() < 1e-14);
        assert!(v.values[0].abs() < 1e-14);
        let h = &r.centrelines.horizontal;
        assert!(h.values[0].abs() < 1e-14 && h.values[h.values.len() - 1].abs() < 1e-14);
        assert_eq!(r.steps, 5);
    }
}
