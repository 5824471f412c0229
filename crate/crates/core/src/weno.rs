//! Third-order upwind WENO convection on staggered velocity fields.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::par::{self, SharedMut};

/// Regularisation of the smoothness indicators.
pub const WENO_EPS: f64 = 1e-6;

const GAMMA_FAR: f64 = 1.0 / 3.0;
const GAMMA_NEAR: f64 = 2.0 / 3.0;

/// Reconstructs the value on the face between `u0` and `up1` from the
/// stencils `{um1, u0}` and `{u0, up1}`, biased towards `u0`.
#[inline(always)]
pub fn reconstruct(um1: f64, u0: f64, up1: f64) -> f64 {
    let q0 = -0.5 * um1 + 1.5 * u0;
    let q1 = 0.5 * u0 + 0.5 * up1;
    let b0 = (u0 - um1) * (u0 - um1);
    let b1 = (up1 - u0) * (up1 - u0);
    let a0 = GAMMA_FAR / ((WENO_EPS + b0) * (WENO_EPS + b0));
    let a1 = GAMMA_NEAR / ((WENO_EPS + b1) * (WENO_EPS + b1));
    (a0 * q0 + a1 * q1) / (a0 + a1)
}

/// Upwind derivative at the centre of `u = [u_{i-2}, .., u_{i+2}]` for
/// transport velocity `vel`.
#[inline(always)]
pub fn upwind_derivative(u: [f64; 5], vel: f64, inv_h: f64) -> f64 {
    if vel >= 0.0 {
        (reconstruct(u[1], u[2], u[3]) - reconstruct(u[0], u[1], u[2])) * inv_h
    } else {
        (reconstruct(u[4], u[3], u[2]) - reconstruct(u[3], u[2], u[1])) * inv_h
    }
}

/// `(vel . grad) vel[target]` at the active points of `vel[target]`.
///
/// The transported component supplies its own advecting velocity; the other
/// components are averaged from their four nearest points.
pub fn weno3_convect(vel: &[&Field], target: usize) -> Result<Field> {
    let mut out = Field::zeros_like(vel.get(target).ok_or_else(|| {
        Error::InvalidParameter(format!("component {target} out of range"))
    })?);
    weno3_convect_into(vel, target, &mut out)?;
    Ok(out)
}

pub fn weno3_convect_into(vel: &[&Field], target: usize, out: &mut Field) -> Result<()> {
    let q = vel[target];
    let dim = q.dim();
    if vel.len() != dim {
        return Err(Error::LocationMismatch(format!("{} velocity components in {dim}D", vel.len())));
    }
    for (a, v) in vel.iter().enumerate() {
        v.require_fresh()?;
        if v.location().normal_axis() != Some(a) || v.grid().cells != q.grid().cells {
            return Err(Error::LocationMismatch(format!("component {a} is a {:?} field", v.location())));
        }
        if v.halo() < 2 {
            return Err(Error::InvalidParameter("convection needs two ghost layers".into()));
        }
    }
    q.require_same_layout(out)?;
    let inv_h = 1.0 / q.h();
    let qix = q.indexer();
    let vix: Vec<_> = vel.iter().map(|v| v.indexer()).collect();
    let rows = q.rows();
    let n = q.row_len();
    let i0 = q.active(0).0;
    let qd = q.data();
    let o = SharedMut::new(out.data_mut());
    par::for_rows(&rows, n, |j, k| {
        let qb = qix.at(i0, j, k);
        // base of the four-point average for each cross component
        let cross: Vec<(usize, usize, usize)> = (0..dim)
            .map(|a| {
                if a == target {
                    return (0, 0, 0);
                }
                let mut l = [i0, j, k];
                l[a] -= 1;
                (vix[a].at(l[0], l[1], l[2]), vel[a].stride(a), vel[a].stride(target))
            })
            .collect();
        for t in 0..n {
            let idx = qb + t;
            let mut conv = 0.0;
            for a in 0..dim {
                let adv = if a == target {
                    qd[idx]
                } else {
                    let (b, sa, sc) = cross[a];
                    let d = vel[a].data();
                    let b = b + t;
                    (d[b] + d[b + sa] + d[b + sc] + d[b + sc + sa]) * 0.25
                };
                let s = q.stride(a);
                let u = [qd[idx - 2 * s], qd[idx - s], qd[idx], qd[idx + s], qd[idx + 2 * s]];
                conv += adv * upwind_derivative(u, adv, inv_h);
            }
            // SAFETY: rows are disjoint and `out` does not alias the inputs.
            unsafe { o.write(idx, conv) };
        }
    });
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bc::BoundaryConditions;
    use crate::field::{Layout, Location};
    use crate::grid::GridLevel;

    #[test]
    fn linear_data_is_differentiated_exactly() {
        for vel in [1.0, -1.0] {
            let u = [1.0, 3.0, 5.0, 7.0, 9.0];
            assert!((upwind_derivative(u, vel, 1.0) - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn smooth_data_follows_the_linear_scheme() {
        // at the linear weights: (u_{i-2} - 6u_{i-1} + 3u_i + 2u_{i+1}) / 6
        let u = [0.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(upwind_derivative(u, 1.0, 1.0), 0.0);
        let x = |i: f64| 1e-5 * (i + 3.0) * (i + 3.0);
        let u = [x(-2.0), x(-1.0), x(0.0), x(1.0), x(2.0)];
        let lin = (u[0] - 6.0 * u[1] + 3.0 * u[2] + 2.0 * u[3]) / 6.0;
        assert!((upwind_derivative(u, 1.0, 1.0) - lin).abs() < 1e-3 * lin.abs());
    }

    #[test]
    fn uniform_flow_has_no_convection() {
        let g = GridLevel::unit(2, 8).unwrap();
        let bc = BoundaryConditions::periodic();
        let lay = Layout::for_bc(&bc, 2);
        let mut u = Field::from_fn(g, Location::EdgeX, lay, |_, _, _| 0.7);
        let mut v = Field::new(g, Location::EdgeY, lay);
        u.fill_ghosts(&bc).unwrap();
        v.fill_ghosts(&bc).unwrap();
        let c = weno3_convect(&[&u, &v], 0).unwrap();
        assert!(c.active_values().iter().all(|&x| x == 0.0));
    }

    fn shear_error(n: usize, amp: f64) -> f64 {
        use std::f64::consts::PI;
        let g = GridLevel::unit(2, n).unwrap();
        let bc = BoundaryConditions::periodic();
        let lay = Layout::for_bc(&bc, 2);
        let mut u = Field::from_fn(g, Location::EdgeX, lay, |_, y, _| amp * (2.0 * PI * y).sin());
        let mut v = Field::from_fn(g, Location::EdgeY, lay, |_, _, _| 0.5);
        u.fill_ghosts(&bc).unwrap();
        v.fill_ghosts(&bc).unwrap();
        let c = weno3_convect(&[&u, &v], 0).unwrap();
        let e = Field::from_fn(g, Location::EdgeX, lay, |_, y, _| 0.5 * amp * 2.0 * PI * (2.0 * PI * y).cos());
        c.max_abs_diff(&e).unwrap()
    }

    #[test]
    fn third_order_at_ideal_weights() {
        // amplitude small enough that the indicators sit far below WENO_EPS
        let r = shear_error(64, 1e-4) / shear_error(128, 1e-4);
        assert!((7.0..9.0).contains(&r), "ratio {r}");
    }

    #[test]
    fn step_profile_does_not_overshoot() {
        let g = GridLevel::unit(2, 32).unwrap();
        let bc = BoundaryConditions::periodic();
        let lay = Layout::for_bc(&bc, 2);
        let mut u = Field::from_fn(g, Location::EdgeX, lay, |_, y, _| if (0.3..0.6).contains(&y) { 1.0 } else { 0.0 });
        for vel in [0.5, -0.5] {
            let mut v = Field::from_fn(g, Location::EdgeY, lay, |_, _, _| vel);
            u.fill_ghosts(&bc).unwrap();
            v.fill_ghosts(&bc).unwrap();
            let c = weno3_convect(&[&u, &v], 0).unwrap();
            let dt = 0.2 * g.h / vel.abs();
            let mut next = u.clone();
            next.axpy(-dt, &c).unwrap();
            for x in next.active_values() {
                assert!((-1e-12..=1.0 + 1e-12).contains(&x), "{x}");
            }
        }
    }
}
