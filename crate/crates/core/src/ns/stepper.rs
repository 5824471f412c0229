//! Runs a [`SlotSchedule`] on real fields.

use crate::error::{Error, Result};
use crate::fas::{FasSolver, SolveReport};
use crate::field::{Field, Layout, Location};
use crate::grid::GridLevel;
use crate::stencil::{divergence_into, gradient_component_into, integral_divergence, OperatorCoeffs};
use crate::weno::weno3_convect_into;

use super::ops::{blend_into, momentum_rhs_into, pressure_rhs_into, RhsTerms};
use super::schedule::{validate_schedule, Formula, Quantity, SlotSchedule, Stage, Step};
use super::{Component, Mix, NsParams, SchemeOrder};

/// Ghost layers of velocity fields; the convection stencil reaches two deep.
pub const VELOCITY_HALO: usize = 2;

/// Persistent arrays named by a schedule.
pub struct SlotBank {
    fields: Vec<Field>,
    resident: Vec<bool>,
}

impl SlotBank {
    fn new(schedule: &SlotSchedule, grid: GridLevel, params: &NsParams) -> Self {
        let fields = schedule
            .slots
            .iter()
            .map(|s| match s.comp.axis() {
                Some(a) => Field::new(grid, Location::edge(a), velocity_layout(params, a)),
                None => Field::new(grid, Location::Cell, pressure_layout(params)),
            })
            .collect();
        SlotBank { fields, resident: schedule.slots.iter().map(|s| s.resident).collect() }
    }

    /// Number of persistent full-grid arrays this bank allocated.
    pub fn resident_allocations(&self) -> usize {
        self.resident.iter().filter(|&&r| r).count()
    }

    pub fn get(&self, slot: usize) -> &Field {
        &self.fields[slot]
    }
}

fn velocity_layout(p: &NsParams, axis: usize) -> Layout {
    Layout::for_bc(&p.bc.velocity[axis], VELOCITY_HALO)
}

fn pressure_layout(p: &NsParams) -> Layout {
    Layout::for_bc(&p.bc.pressure, 1)
}

/// Work arrays that are not part of the time-level state.
struct Scratch {
    blend: Vec<Field>,
    conv: Vec<Field>,
    grad: Vec<Field>,
    div: Field,
    prhs: Field,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub step: usize,
    pub time: f64,
    pub momentum: Vec<SolveReport>,
    pub pressure: SolveReport,
    /// `h^d` times the summed cell divergence of the new velocity.
    pub integral_divergence: f64,
}

impl StepReport {
    pub fn converged(&self) -> bool {
        self.pressure.converged && self.momentum.iter().all(|r| r.converged)
    }
}

pub struct Simulation {
    params: NsParams,
    schedule: SlotSchedule,
    grid: GridLevel,
    bank: SlotBank,
    scratch: Scratch,
    momentum: Vec<FasSolver>,
    pressure: FasSolver,
    steps_taken: usize,
    time: f64,
}

impl Simulation {
    /// Starts from rest with zero pressure.
    pub fn new(grid: GridLevel, params: NsParams) -> Result<Self> {
        params.validate()?;
        let schedule = SlotSchedule::new(params.mode, params.order, grid.dim);
        Self::with_schedule(grid, params, schedule)
    }

    pub fn with_schedule(grid: GridLevel, params: NsParams, schedule: SlotSchedule) -> Result<Self> {
        params.validate()?;
        let audit = validate_schedule(&schedule);
        if !audit.is_ok() {
            let msg: Vec<String> = audit.violations.iter().map(|v| v.to_string()).collect();
            return Err(Error::InvalidSchedule(msg.join("; ")));
        }
        if schedule.dim != grid.dim || params.plan.dim != grid.dim {
            return Err(Error::PlanDimMismatch { plan: schedule.dim, field: grid.dim });
        }
        let dim = grid.dim;
        let layouts: Vec<Layout> = (0..dim).map(|a| velocity_layout(&params, a)).collect();
        let vel_field = |a: usize| Field::new(grid, Location::edge(a), layouts[a]);
        let cell = Field::new(grid, Location::Cell, pressure_layout(&params));
        let visc = OperatorCoeffs::new(1.0, params.implicit_viscosity())?;
        let momentum = (0..dim)
            .map(|a| {
                FasSolver::new(
                    grid,
                    Location::edge(a),
                    layouts[a],
                    params.bc.velocity[a],
                    visc,
                    params.fas,
                    params.plan.clone(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let pressure = FasSolver::new(
            grid,
            Location::Cell,
            pressure_layout(&params),
            params.bc.pressure,
            OperatorCoeffs::new(0.0, params.dt)?,
            params.fas,
            params.plan.clone(),
        )?;
        let scratch = Scratch {
            blend: (0..dim).map(vel_field).collect(),
            conv: (0..dim).map(vel_field).collect(),
            grad: (0..dim).map(vel_field).collect(),
            div: cell.clone(),
            prhs: cell,
        };
        let bank = SlotBank::new(&schedule, grid, &params);
        let zero: Vec<Field> = (0..dim).map(vel_field).collect();
        let mut sim = Simulation {
            params,
            schedule,
            grid,
            bank,
            scratch,
            momentum,
            pressure,
            steps_taken: 0,
            time: 0.0,
        };
        sim.set_initial(&zero, None)?;
        Ok(sim)
    }

    /// Installs `u^0` (and `u^(-1) = u^0` for second order) and `p^0`;
    /// the previous pressure increment starts at zero.
    pub fn set_initial(&mut self, velocity: &[Field], pressure: Option<&Field>) -> Result<()> {
        let dim = self.grid.dim;
        if velocity.len() != dim {
            return Err(Error::LocationMismatch(format!("{} velocity components in {dim}D", velocity.len())));
        }
        for f in self.bank.fields.iter_mut() {
            f.fill(0.0);
        }
        let entry = self.schedule.entry.clone();
        for (slot, q) in entry {
            let field = &mut self.bank.fields[slot];
            match (q.comp.axis(), q.stage) {
                (Some(a), Stage::Current | Stage::Previous) => {
                    field.copy_from(&velocity[a])?;
                    field.fill_ghosts(&self.params.bc.velocity[a])?;
                }
                (None, Stage::Current) => {
                    if let Some(p) = pressure {
                        field.copy_from(p)?;
                    }
                    field.fill_ghosts(&self.params.bc.pressure)?;
                }
                (None, _) => field.fill_ghosts(&self.params.bc.pressure)?,
                _ => {}
            }
        }
        self.steps_taken = 0;
        self.time = 0.0;
        Ok(())
    }

    pub fn params(&self) -> &NsParams {
        &self.params
    }

    pub fn schedule(&self) -> &SlotSchedule {
        &self.schedule
    }

    pub fn grid(&self) -> &GridLevel {
        &self.grid
    }

    pub fn bank(&self) -> &SlotBank {
        &self.bank
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    /// Current velocity component `axis`.
    pub fn velocity(&self, axis: usize) -> &Field {
        let slot = self
            .schedule
            .entry_slot(Quantity::new(Component::velocity(axis), Stage::Current))
            .expect("validated schedule binds every velocity");
        self.bank.get(slot)
    }

    pub fn pressure(&self) -> &Field {
        let slot = self
            .schedule
            .entry_slot(Quantity::new(Component::P, Stage::Current))
            .expect("validated schedule binds the pressure");
        self.bank.get(slot)
    }

    pub fn velocities(&self) -> Vec<&Field> {
        (0..self.grid.dim).map(|a| self.velocity(a)).collect()
    }

    /// Advances by one time step.
    pub fn step(&mut self) -> Result<StepReport> {
        let n = self.steps_taken + 1;
        self.advance().map_err(|e| Error::Step { step: n, source: Box::new(e) })
    }

    fn advance(&mut self) -> Result<StepReport> {
        let steps = self.schedule.steps.clone();
        let mut momentum = Vec::with_capacity(self.grid.dim);
        let mut pressure = None;
        for (k, step) in steps.iter().enumerate() {
            match self.execute(k + 1, step)? {
                Some((Formula::PressurePoisson, r)) => pressure = Some(r),
                Some((_, r)) => momentum.push(r),
                None => {}
            }
        }
        self.steps_taken += 1;
        self.time = self.steps_taken as f64 * self.params.dt;
        let integral_divergence = integral_divergence(&self.velocities())?;
        Ok(StepReport {
            step: self.steps_taken,
            time: self.time,
            momentum,
            pressure: pressure.expect("every schedule solves for the pressure increment"),
            integral_divergence,
        })
    }

    fn read(&self, n: usize, step: &Step, q: Quantity) -> Result<usize> {
        step.slot_of(q).ok_or_else(|| Error::MissingBinding {
            step: n,
            formula: step.formula.to_string(),
            quantity: q.to_string(),
        })
    }

    /// Moves the written slot out of the bank, seeding it from `seed` if
    /// that lives elsewhere.
    fn take_output(&mut self, step: &Step, seed: Option<usize>) -> Result<Field> {
        let w = step.writes.1;
        let mut out = std::mem::take(&mut self.bank.fields[w]);
        if let Some(s) = seed {
            if s != w {
                out.copy_from(&self.bank.fields[s])?;
            }
        }
        Ok(out)
    }

    fn execute(&mut self, n: usize, step: &Step) -> Result<Option<(Formula, SolveReport)>> {
        use Stage::*;
        let q = Quantity::new;
        let dt = self.params.dt;
        match step.formula {
            Formula::MomentumRhs { comp, order, advecting } => {
                let c = comp.axis().expect("velocity component");
                let dim = self.grid.dim;
                // advecting velocity per axis, blended where the scheme asks
                let mut use_blend = [false; 3];
                for a in 0..dim {
                    let ca = Component::velocity(a);
                    let cur = self.read(n, step, q(ca, Current))?;
                    let other = match (order, advecting[a]) {
                        (SchemeOrder::First, _) | (_, Mix::Current) => None,
                        (_, Mix::Extrapolated) => Some((-0.5, self.read(n, step, q(ca, Previous))?)),
                        (_, Mix::Averaged) => Some((0.5, self.read(n, step, q(ca, Tentative))?)),
                    };
                    if let Some((w, s)) = other {
                        blend_into(
                            &mut self.scratch.blend[a],
                            &self.bank.fields[cur],
                            &self.bank.fields[s],
                            w,
                            &self.params.bc.velocity[a],
                        )?;
                        use_blend[a] = true;
                    }
                }
                let un_slot = self.read(n, step, q(comp, Current))?;
                let p_slot = self.read(n, step, q(Component::P, Current))?;
                let mut conv = std::mem::take(&mut self.scratch.conv[c]);
                let mut grad = std::mem::take(&mut self.scratch.grad[c]);
                {
                    let vel: Vec<&Field> = (0..dim)
                        .map(|a| {
                            if use_blend[a] {
                                Ok(&self.scratch.blend[a])
                            } else {
                                Ok(&self.bank.fields[self.read(n, step, q(Component::velocity(a), Current))?])
                            }
                        })
                        .collect::<Result<_>>()?;
                    weno3_convect_into(&vel, c, &mut conv)?;
                }
                gradient_component_into(&self.bank.fields[p_slot], c, &mut grad)?;
                let mut out = self.take_output(step, None)?;
                let explicit_visc = match order {
                    SchemeOrder::First => None,
                    SchemeOrder::Second => Some(dt / (2.0 * self.params.re)),
                };
                let forcing = self.params.forcing.as_ref().map(|f| (f, c, self.params.forcing_time(self.time)));
                let terms = RhsTerms {
                    un: &self.bank.fields[un_slot],
                    conv: &conv,
                    grad_p: &grad,
                    explicit_visc,
                    forcing,
                };
                let res = momentum_rhs_into(&terms, dt, &mut out);
                self.bank.fields[step.writes.1] = out;
                self.scratch.conv[c] = conv;
                self.scratch.grad[c] = grad;
                res.map(|_| None)
            }
            Formula::MomentumSolve { comp } => {
                let c = comp.axis().expect("velocity component");
                let f_slot = self.read(n, step, q(comp, Rhs))?;
                let guess = self.read(n, step, q(comp, Current))?;
                let mut out = self.take_output(step, Some(guess))?;
                let res = self.momentum[c].solve(&mut out, &self.bank.fields[f_slot]);
                self.bank.fields[step.writes.1] = out;
                res.map(|r| Some((step.formula, r)))
            }
            Formula::PressurePoisson => {
                let dim = self.grid.dim;
                let slots = (0..dim)
                    .map(|a| self.read(n, step, q(Component::velocity(a), Tentative)))
                    .collect::<Result<Vec<_>>>()?;
                let vel: Vec<&Field> = slots.iter().map(|&s| &self.bank.fields[s]).collect();
                divergence_into(&vel, &mut self.scratch.div)?;
                let singular = self.pressure.is_singular();
                pressure_rhs_into(&self.scratch.div, &mut self.scratch.prhs, singular)?;
                let guess = self.read(n, step, q(Component::P, LastIncrement))?;
                let mut out = self.take_output(step, Some(guess))?;
                let res = self.pressure.solve(&mut out, &self.scratch.prhs);
                self.bank.fields[step.writes.1] = out;
                res.map(|r| Some((step.formula, r)))
            }
            Formula::Correct { comp } => {
                let c = comp.axis().expect("velocity component");
                let src = self.read(n, step, q(comp, Tentative))?;
                let inc = self.read(n, step, q(Component::P, Tentative))?;
                let mut grad = std::mem::take(&mut self.scratch.grad[c]);
                let res = gradient_component_into(&self.bank.fields[inc], c, &mut grad);
                let mut out = self.take_output(step, Some(src))?;
                let res = res.and_then(|_| out.axpy(-dt, &grad)).and_then(|_| out.fill_ghosts(&self.params.bc.velocity[c]));
                self.bank.fields[step.writes.1] = out;
                self.scratch.grad[c] = grad;
                res.map(|_| None)
            }
            Formula::PressureUpdate => {
                let base = self.read(n, step, q(Component::P, Current))?;
                let inc = self.read(n, step, q(Component::P, Tentative))?;
                let mut out = self.take_output(step, Some(base))?;
                let res = out.add_assign(&self.bank.fields[inc]).and_then(|_| out.fill_ghosts(&self.params.bc.pressure));
                self.bank.fields[step.writes.1] = out;
                res.map(|_| None)
            }
            Formula::Copy => {
                let (from_q, from) = step.reads[0];
                if from_q != step.writes.0 {
                    return Err(Error::InvalidSchedule(format!("step {n} copies {from_q} as {}", step.writes.0)));
                }
                let mut out = self.take_output(step, Some(from))?;
                let res = self.refresh(&mut out);
                self.bank.fields[step.writes.1] = out;
                res.map(|_| None)
            }
        }
    }

    fn refresh(&self, f: &mut Field) -> Result<()> {
        match f.location().normal_axis() {
            Some(a) => f.fill_ghosts(&self.params.bc.velocity[a]),
            None => f.fill_ghosts(&self.params.bc.pressure),
        }
    }

    /// Runs until `t_end` or until `stop` returns true after a step.
    pub fn run_until(&mut self, mut stop: impl FnMut(&Simulation, &StepReport) -> bool) -> Result<Vec<StepReport>> {
        let total = (self.params.t_end / self.params.dt).round() as usize;
        let mut out = Vec::new();
        while self.steps_taken < total {
            let r = self.step()?;
            let done = stop(self, &r);
            out.push(r);
            if done {
                break;
            }
        }
        Ok(out)
    }
}

/// Copies of the current velocity, for change monitoring.
pub fn snapshot(sim: &Simulation) -> Vec<Field> {
    sim.velocities().into_iter().cloned().collect()
}
