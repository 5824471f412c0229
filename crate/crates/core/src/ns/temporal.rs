//! Time-step refinement against a smooth 2D manufactured solution.
//!
//! ```text
//! u =  sin t sin^2(pi x) sin(2 pi y)
//! v = -sin t sin(2 pi x) sin^2(pi y)
//! p =  sin t (sin(pi y) - 2/pi)
//! ```
//!
//! on the unit square with no-slip walls; the body force makes these exact.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::Result;
use crate::fas::FasParams;
use crate::field::Field;
use crate::grid::GridLevel;
use crate::smoother::SweepPlan;

use super::stepper::Simulation;
use super::{FlowBc, Forcing, NsParams, ScheduleMode, SchemeOrder};

pub fn exact_u(x: f64, y: f64, t: f64) -> f64 {
    let s = (PI * x).sin();
    t.sin() * s * s * (2.0 * PI * y).sin()
}

pub fn exact_v(x: f64, y: f64, t: f64) -> f64 {
    let s = (PI * y).sin();
    -t.sin() * (2.0 * PI * x).sin() * s * s
}

pub fn exact_p(_x: f64, y: f64, t: f64) -> f64 {
    t.sin() * ((PI * y).sin() - 2.0 / PI)
}

/// `F = u_t + (u . grad) u - lap(u) / Re + grad p` for the fields above.
pub fn forcing(re: f64) -> Forcing {
    Arc::new(move |axis: usize, x: [f64; 3], t: f64| {
        let (x, y) = (x[0], x[1]);
        let (st, ct) = (t.sin(), t.cos());
        let sx = (PI * x).sin();
        let (sy, cy) = ((PI * y).sin(), (PI * y).cos());
        let (s2x, c2x) = ((2.0 * PI * x).sin(), (2.0 * PI * x).cos());
        let (s2y, c2y) = ((2.0 * PI * y).sin(), (2.0 * PI * y).cos());
        let u = st * sx * sx * s2y;
        let v = -st * s2x * sy * sy;
        if axis == 0 {
            let u_t = ct * sx * sx * s2y;
            let u_x = st * PI * s2x * s2y;
            let u_y = st * sx * sx * 2.0 * PI * c2y;
            let lap = st * (2.0 * PI * PI * c2x * s2y - 4.0 * PI * PI * sx * sx * s2y);
            u_t + u * u_x + v * u_y - lap / re
        } else {
            let v_t = -ct * s2x * sy * sy;
            let v_x = -st * 2.0 * PI * c2x * sy * sy;
            let v_y = -st * s2x * PI * s2y;
            let lap = -st * (-4.0 * PI * PI * s2x * sy * sy + 2.0 * PI * PI * s2x * c2y);
            let p_y = st * PI * cy;
            v_t + u * v_x + v * v_y - lap / re + p_y
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalRow {
    pub dt: f64,
    /// Scaled L2 errors of u, v and p at the final time.
    pub errors: [f64; 3],
    /// log2 of the error ratio to the previous (coarser) row.
    pub orders: Option<[f64; 3]>,
}

#[derive(Debug, Clone)]
pub struct TemporalSetup {
    pub n: usize,
    pub re: f64,
    pub t_end: f64,
    pub order: SchemeOrder,
    pub mode: ScheduleMode,
    pub fas: FasParams,
    pub plan: SweepPlan,
}

impl TemporalSetup {
    pub fn new(n: usize, order: SchemeOrder) -> Result<Self> {
        let grid = GridLevel::unit(2, n)?;
        let mut fas = FasParams::default_for(&grid);
        fas.tol = 1e-9;
        fas.k_max = 20;
        fas.smooth_steps = 2;
        Ok(TemporalSetup {
            n,
            re: 10.0,
            t_end: 1.0,
            order,
            mode: ScheduleMode::Efficient,
            fas,
            plan: SweepPlan::default_for(2),
        })
    }

    pub fn params(&self, dt: f64) -> NsParams {
        NsParams {
            re: self.re,
            dt,
            t_end: self.t_end,
            bc: FlowBc::no_slip(),
            order: self.order,
            mode: self.mode,
            fas: self.fas,
            plan: self.plan.clone(),
            forcing: Some(forcing(self.re)),
        }
    }
}

fn field_error(f: &Field, exact: impl Fn(f64, f64) -> f64, zero_mean: bool) -> f64 {
    let mut e = Field::zeros_like(f);
    e.set_active(|x, y, _| exact(x, y));
    let shift = if zero_mean { e.mean() - f.mean() } else { 0.0 };
    e.sub_assign(f).expect("same layout");
    if shift != 0.0 {
        e.map_active(|v| v - shift);
    }
    e.norm_l2_scaled()
}

/// Integrates to `t_end` with step `dt` and measures the errors. Pressures
/// are compared modulo their mean, which the Neumann problem leaves free.
pub fn run_one(setup: &TemporalSetup, dt: f64) -> Result<[f64; 3]> {
    let grid = GridLevel::unit(2, setup.n)?;
    let mut sim = Simulation::new(grid, setup.params(dt))?;
    sim.run_until(|_, _| false)?;
    let t = sim.time();
    Ok([
        field_error(sim.velocity(0), |x, y| exact_u(x, y, t), false),
        field_error(sim.velocity(1), |x, y| exact_v(x, y, t), false),
        field_error(sim.pressure(), |x, y| exact_p(x, y, t), true),
    ])
}

pub fn temporal_convergence(setup: &TemporalSetup, dts: &[f64]) -> Result<Vec<TemporalRow>> {
    let mut rows: Vec<TemporalRow> = Vec::with_capacity(dts.len());
    for &dt in dts {
        let errors = run_one(setup, dt)?;
        let orders = rows.last().map(|prev| {
            let r = prev.dt / dt;
            let mut o = [0.0; 3];
            for k in 0..3 {
                o[k] = (prev.errors[k] / errors[k]).ln() / r.ln();
            }
            o
        });
        rows.push(TemporalRow { dt, errors, orders });
    }
    Ok(rows)
}
