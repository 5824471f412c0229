//! Projection time stepping for incompressible flow on the staggered grid.
//!
//! Velocity component `c` lives on the faces normal to axis `c`, pressure at
//! cell centres. Each step solves one implicit momentum equation per
//! component, a pressure-increment Poisson problem and a correction. The
//! order of those operations and the storage each intermediate lives in are
//! described by a [`SlotSchedule`], so the same stepper runs both the
//! straightforward and the storage-lean arrangements.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::bc::{BoundaryConditions, FaceBc, HIGH};
use crate::error::{Error, Result};
use crate::fas::FasParams;
use crate::smoother::SweepPlan;

pub mod cavity;
pub mod ops;
pub mod schedule;
pub mod stepper;
pub mod temporal;

pub use schedule::{validate_schedule, Quantity, ScheduleAudit, SlotSchedule, Stage, Violation};
pub use stepper::{Simulation, StepReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    U,
    V,
    W,
    P,
}

impl Component {
    pub fn velocity(axis: usize) -> Component {
        [Component::U, Component::V, Component::W][axis]
    }

    pub fn axis(self) -> Option<usize> {
        match self {
            Component::U => Some(0),
            Component::V => Some(1),
            Component::W => Some(2),
            Component::P => None,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Component::U => 'u',
            Component::V => 'v',
            Component::W => 'w',
            Component::P => 'p',
        }
    }
}

/// How an advecting velocity component enters a second-order momentum
/// right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mix {
    /// `u^n`
    Current,
    /// `(3u^n - u^(n-1)) / 2`
    Extrapolated,
    /// `(u^n + u~) / 2`
    Averaged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeOrder {
    First,
    Second,
}

impl SchemeOrder {
    pub fn as_u8(self) -> u8 {
        match self {
            SchemeOrder::First => 1,
            SchemeOrder::Second => 2,
        }
    }
}

impl TryFrom<u8> for SchemeOrder {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(SchemeOrder::First),
            2 => Ok(SchemeOrder::Second),
            _ => Err(Error::InvalidParameter(format!("scheme order must be 1 or 2, got {v}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScheduleMode {
    Classical,
    Efficient,
}

impl fmt::Display for ScheduleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScheduleMode::Classical => "classical",
            ScheduleMode::Efficient => "efficient",
        })
    }
}

impl FromStr for ScheduleMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(ScheduleMode::Classical),
            "efficient" => Ok(ScheduleMode::Efficient),
            _ => Err(Error::InvalidParameter(format!("unknown schedule '{s}'"))),
        }
    }
}

/// Boundary conditions of the velocity components and the pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowBc {
    pub velocity: [BoundaryConditions; 3],
    pub pressure: BoundaryConditions,
}

impl FlowBc {
    /// Static no-slip walls everywhere, Neumann pressure.
    pub fn no_slip() -> Self {
        FlowBc {
            velocity: [BoundaryConditions::dirichlet_zero(); 3],
            pressure: BoundaryConditions::neumann(),
        }
    }

    /// No-slip box whose top wall (y = max in 2D, z = max in 3D) slides in
    /// +x at `lid_speed`.
    pub fn cavity(dim: usize, lid_speed: f64) -> Self {
        let mut bc = FlowBc::no_slip();
        let top = dim - 1;
        bc.velocity[0] = bc.velocity[0]
            .with_face(top, HIGH, FaceBc::Dirichlet(lid_speed))
            .expect("non-periodic faces");
        bc
    }
}

/// Body force per unit mass: `(axis, [x, y, z], t) -> value`.
pub type Forcing = Arc<dyn Fn(usize, [f64; 3], f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct NsParams {
    pub re: f64,
    pub dt: f64,
    pub t_end: f64,
    pub bc: FlowBc,
    pub order: SchemeOrder,
    pub mode: ScheduleMode,
    /// Parameters of every momentum and pressure solve.
    pub fas: FasParams,
    pub plan: SweepPlan,
    /// Evaluated at `t + dt` (first order) or `t + dt/2` (second order).
    pub forcing: Option<Forcing>,
}

impl fmt::Debug for NsParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NsParams")
            .field("re", &self.re)
            .field("dt", &self.dt)
            .field("t_end", &self.t_end)
            .field("bc", &self.bc)
            .field("order", &self.order)
            .field("mode", &self.mode)
            .field("fas", &self.fas)
            .field("plan", &self.plan)
            .field("forcing", &self.forcing.is_some())
            .finish()
    }
}

impl NsParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.re > 0.0 && self.re.is_finite()) {
            return Err(Error::InvalidParameter(format!("Reynolds number {} must be positive", self.re)));
        }
        if !(self.dt > 0.0 && self.dt <= self.t_end) {
            return Err(Error::InvalidParameter(format!(
                "time step {} must be positive and at most t_end {}",
                self.dt, self.t_end
            )));
        }
        self.fas.validate()
    }

    /// Diffusion coefficient of the implicit momentum operator.
    pub fn implicit_viscosity(&self) -> f64 {
        match self.order {
            SchemeOrder::First => self.dt / self.re,
            SchemeOrder::Second => self.dt / (2.0 * self.re),
        }
    }

    /// Time at which the forcing of the step starting at `t` is evaluated.
    pub fn forcing_time(&self, t: f64) -> f64 {
        match self.order {
            SchemeOrder::First => t + self.dt,
            SchemeOrder::Second => t + 0.5 * self.dt,
        }
    }
}
