//! Boundary conditions and ghost filling.

use crate::error::{Error, Result};
use crate::field::{Field, Location};

/// Condition on one boundary face of the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaceBc {
    /// Fixed value on the wall: reflected ghosts for cell-like axes, wall
    /// points set directly for face-like axes.
    Dirichlet(f64),
    /// Zero normal gradient: ghosts copy the adjacent interior.
    Neumann,
    /// Wrap-around; must be set on both faces of an axis.
    Periodic,
}

pub const LOW: usize = 0;
pub const HIGH: usize = 1;

/// One [`FaceBc`] per side of each axis, indexed `[axis][LOW | HIGH]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryConditions {
    faces: [[FaceBc; 2]; 3],
}

impl BoundaryConditions {
    pub fn new(faces: [[FaceBc; 2]; 3]) -> Result<Self> {
        for (a, f) in faces.iter().enumerate() {
            let p = [f[0] == FaceBc::Periodic, f[1] == FaceBc::Periodic];
            if p[0] != p[1] {
                return Err(Error::OneSidedPeriodic(a));
            }
        }
        Ok(BoundaryConditions { faces })
    }

    pub fn uniform(bc: FaceBc) -> Self {
        BoundaryConditions { faces: [[bc; 2]; 3] }
    }

    pub fn dirichlet_zero() -> Self {
        Self::uniform(FaceBc::Dirichlet(0.0))
    }

    pub fn neumann() -> Self {
        Self::uniform(FaceBc::Neumann)
    }

    pub fn periodic() -> Self {
        Self::uniform(FaceBc::Periodic)
    }

    pub fn with_face(mut self, axis: usize, side: usize, bc: FaceBc) -> Result<Self> {
        self.faces[axis][side] = bc;
        Self::new(self.faces)
    }

    pub fn face(&self, axis: usize, side: usize) -> FaceBc {
        self.faces[axis][side]
    }

    pub fn periodic_axes(&self) -> [bool; 3] {
        [0, 1, 2].map(|a| self.faces[a][0] == FaceBc::Periodic)
    }

    /// Same kinds with every Dirichlet value set to zero (for corrections).
    pub fn homogeneous(&self) -> Self {
        let mut out = *self;
        for f in out.faces.iter_mut().flatten() {
            if let FaceBc::Dirichlet(_) = f {
                *f = FaceBc::Dirichlet(0.0);
            }
        }
        out
    }

    /// No Dirichlet face among the first `dim` axes: constants are in the
    /// null space of the pure Laplacian.
    pub fn has_no_dirichlet(&self, dim: usize) -> bool {
        self.faces[..dim]
            .iter()
            .flatten()
            .all(|f| !matches!(f, FaceBc::Dirichlet(_)))
    }
}

/// Fills the ghosts of a cell-centered field.
pub fn apply_ghost_cell(field: &mut Field, bc: &BoundaryConditions) -> Result<()> {
    if field.location() != Location::Cell {
        return Err(Error::LocationMismatch(format!("{:?} is not cell-centered", field.location())));
    }
    fill(field, bc)
}

/// Sets wall points and fills the ghosts of an edge field.
pub fn apply_ghost_edge(field: &mut Field, bc: &BoundaryConditions) -> Result<()> {
    if field.location() == Location::Cell {
        return Err(Error::LocationMismatch("cell-centered field passed as edge field".into()));
    }
    fill(field, bc)
}

pub(crate) fn fill(field: &mut Field, bc: &BoundaryConditions) -> Result<()> {
    let dim = field.dim();
    let periodic = field.layout().periodic;
    for a in 0..dim {
        if bc.periodic_axes()[a] != periodic[a] {
            return Err(Error::LocationMismatch(format!(
                "periodicity of axis {a} differs between field layout and boundary conditions"
            )));
        }
    }
    let n = field.grid().cells;
    let g = field.halo() as isize;
    let faces: Vec<bool> = (0..3).map(|a| field.on_faces(a)).collect();
    let (data, len, off, stride) = field.raw_parts();
    // z first, x last: the x sweep runs over the filled y/z ghosts and so
    // owns edges and corners.
    for a in (0..dim).rev() {
        let (b, c) = match a {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for pc in 0..len[c] {
            for pb in 0..len[b] {
                let base = pb * stride[b] + pc * stride[c];
                let at = |l: isize| base + (l + off[a]) as usize * stride[a];
                fill_line(data, &at, n[a] as isize, g, faces[a], bc.faces[a]);
            }
        }
    }
    field.mark_fresh();
    Ok(())
}

fn fill_line(
    d: &mut [f64],
    at: &impl Fn(isize) -> usize,
    n: isize,
    g: isize,
    on_faces: bool,
    bc: [FaceBc; 2],
) {
    if on_faces {
        if bc[0] == FaceBc::Periodic {
            for k in 1..=g {
                d[at(-k)] = d[at(n - k)];
            }
            for k in 0..=g {
                d[at(n + k)] = d[at(k)];
            }
            return;
        }
        match bc[0] {
            FaceBc::Dirichlet(v) => {
                d[at(0)] = v;
                for k in 1..=g {
                    d[at(-k)] = 2.0 * v - d[at(k)];
                }
            }
            _ => {
                d[at(0)] = d[at(1)];
                for k in 1..=g {
                    d[at(-k)] = d[at(k)];
                }
            }
        }
        match bc[1] {
            FaceBc::Dirichlet(v) => {
                d[at(n)] = v;
                for k in 1..=g {
                    d[at(n + k)] = 2.0 * v - d[at(n - k)];
                }
            }
            _ => {
                d[at(n)] = d[at(n - 1)];
                for k in 1..=g {
                    d[at(n + k)] = d[at(n - k)];
                }
            }
        }
    } else {
        if bc[0] == FaceBc::Periodic {
            for k in 1..=g {
                d[at(1 - k)] = d[at(n + 1 - k)];
                d[at(n + k)] = d[at(k)];
            }
            return;
        }
        for k in 1..=g {
            d[at(1 - k)] = match bc[0] {
                FaceBc::Dirichlet(v) => 2.0 * v - d[at(k)],
                _ => d[at(k)],
            };
            d[at(n + k)] = match bc[1] {
                FaceBc::Dirichlet(v) => 2.0 * v - d[at(n + 1 - k)],
                _ => d[at(n + 1 - k)],
            };
        }
    }
}
