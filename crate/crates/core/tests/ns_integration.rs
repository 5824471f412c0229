//! Whole-step behaviour of the projection stepper.

use fasmg::bc::{FaceBc, LOW};
use fasmg::ns::ops::blend_into;
use fasmg::ns::schedule::Formula;
use fasmg::ns::temporal::{exact_u, exact_v};
use fasmg::ns::{FlowBc, NsParams, ScheduleMode, SchemeOrder, Simulation, SlotSchedule};
use fasmg::rng::fill_uniform;
use fasmg::stencil::divergence_edges_to_cc;
use fasmg::{BoundaryConditions, Error, FasParams, Field, GridLevel, Layout, Location, SweepPlan};

const MODES: [ScheduleMode; 2] = [ScheduleMode::Classical, ScheduleMode::Efficient];
const ORDERS: [SchemeOrder; 2] = [SchemeOrder::First, SchemeOrder::Second];

fn params(grid: &GridLevel, bc: FlowBc, order: SchemeOrder, mode: ScheduleMode, dt: f64, steps: usize) -> NsParams {
    let mut fas = FasParams::default_for(grid);
    fas.tol = 1e-10;
    NsParams {
        re: 100.0,
        dt,
        t_end: dt * steps as f64,
        bc,
        order,
        mode,
        fas,
        plan: SweepPlan::default_for(grid.dim),
        forcing: None,
    }
}

fn energy(sim: &Simulation) -> f64 {
    let hd = sim.grid().h.powi(sim.grid().dim as i32);
    sim.velocities().iter().map(|u| u.active_values().iter().map(|x| x * x).sum::<f64>()).sum::<f64>() * hd
}

#[test]
fn fluid_at_rest_stays_at_rest() {
    for dim in [2, 3] {
        let grid = GridLevel::unit(dim, 8).unwrap();
        for mode in MODES {
            for order in ORDERS {
                let mut sim = Simulation::new(grid, params(&grid, FlowBc::no_slip(), order, mode, 0.01, 4)).unwrap();
                sim.run_until(|_, _| false).unwrap();
                assert_eq!(sim.steps_taken(), 4);
                for u in sim.velocities() {
                    assert_eq!(u.max_abs(), 0.0);
                }
                assert_eq!(sim.pressure().max_abs(), 0.0);
            }
        }
    }
}

#[test]
fn both_arrangements_compute_the_same_flow() {
    for (dim, n, steps) in [(2, 32, 20), (3, 8, 4)] {
        let grid = GridLevel::unit(dim, n).unwrap();
        for order in ORDERS {
            let run = |mode| {
                let mut sim = Simulation::new(grid, params(&grid, FlowBc::cavity(dim, 1.0), order, mode, 0.01, steps)).unwrap();
                sim.run_until(|_, _| false).unwrap();
                let mut out: Vec<Field> = sim.velocities().into_iter().cloned().collect();
                out.push(sim.pressure().clone());
                out
            };
            let (a, b) = (run(ScheduleMode::Classical), run(ScheduleMode::Efficient));
            for (x, y) in a.iter().zip(&b) {
                let d = x.max_abs_diff(y).unwrap();
                assert!(d <= 1e-13 * x.max_abs().max(1e-300), "{dim}D {order:?}: {d}");
            }
        }
    }
}

#[test]
fn resident_allocations_follow_the_arrangement() {
    for (dim, want) in [(3, [12, 15, 8, 8]), (2, [9, 11, 6, 6])] {
        let grid = GridLevel::unit(dim, 8).unwrap();
        let mut got = Vec::new();
        for mode in MODES {
            for order in ORDERS {
                let sim = Simulation::new(grid, params(&grid, FlowBc::no_slip(), order, mode, 0.01, 1)).unwrap();
                got.push(sim.bank().resident_allocations());
            }
        }
        assert_eq!(got, want, "{dim}D");
    }
}

/// With `u^(-1) = u^0` the extrapolated advecting velocity is `u^0` exactly.
#[test]
fn first_step_extrapolation_degenerates() {
    let grid = GridLevel::unit(2, 16).unwrap();
    let bc = BoundaryConditions::dirichlet_zero();
    let mut u = Field::new(grid, Location::EdgeX, Layout::new(2));
    fill_uniform(&mut u, 11);
    u.fill_ghosts(&bc).unwrap();
    let mut out = Field::zeros_like(&u);
    blend_into(&mut out, &u, &u.clone(), -0.5, &bc).unwrap();
    assert_eq!(out.data(), u.data());
}

#[test]
fn energy_decays_with_static_walls() {
    let grid = GridLevel::unit(2, 32).unwrap();
    let layout = Layout::new(2);
    let u0 = Field::from_fn(grid, Location::EdgeX, layout, |x, y, _| exact_u(x, y, 1.0));
    let v0 = Field::from_fn(grid, Location::EdgeY, layout, |x, y, _| exact_v(x, y, 1.0));
    for order in ORDERS {
        let mut sim = Simulation::new(grid, params(&grid, FlowBc::no_slip(), order, ScheduleMode::Efficient, 0.01, 30)).unwrap();
        sim.set_initial(&[u0.clone(), v0.clone()], None).unwrap();
        let mut last = energy(&sim);
        sim.run_until(|s, r| {
            let e = energy(s);
            assert!(e <= last + 1e-12, "step {}: energy {last} -> {e}", r.step);
            last = e;
            false
        })
        .unwrap();
        assert!(last > 0.0);
    }
}

#[test]
fn projected_velocity_is_discretely_solenoidal() {
    let grid = GridLevel::unit(2, 32).unwrap();
    for mode in MODES {
        for order in ORDERS {
            let p = params(&grid, FlowBc::cavity(2, 1.0), order, mode, 0.005, 40);
            let (tol, dt) = (p.fas.tol, p.dt);
            let mut sim = Simulation::new(grid, p).unwrap();
            let reports = sim
                .run_until(|s, _| {
                    let div = divergence_edges_to_cc(&s.velocities()).unwrap();
                    assert!(div.norm_l2_scaled() <= 10.0 * tol / dt, "{}", div.norm_l2_scaled());
                    false
                })
                .unwrap();
            assert_eq!(reports.len(), 40);
            for r in &reports {
                assert!(r.converged(), "step {}", r.step);
                assert!(r.integral_divergence.abs() <= 1e-12, "step {}: {}", r.step, r.integral_divergence);
            }
        }
    }
}

#[test]
fn failures_carry_the_step_number() {
    let grid = GridLevel::unit(2, 8).unwrap();
    let mut bc = FlowBc::no_slip();
    bc.velocity[0] = bc.velocity[0].with_face(0, LOW, FaceBc::Dirichlet(1.0)).unwrap();
    let mut sim = Simulation::new(grid, params(&grid, bc, SchemeOrder::First, ScheduleMode::Efficient, 0.01, 3)).unwrap();
    match sim.step() {
        Err(Error::Step { step: 1, source }) => assert!(matches!(*source, Error::IncompatibleRhs(_)), "{source}"),
        other => panic!("expected a step-1 failure, got {other:?}"),
    }
    assert_eq!(sim.steps_taken(), 0);
}

#[test]
fn broken_schedules_are_refused() {
    let grid = GridLevel::unit(3, 8).unwrap();
    let mut s = SlotSchedule::efficient(SchemeOrder::First, 3);
    let k = s.steps.iter().position(|st| st.formula == Formula::PressurePoisson).unwrap();
    s.steps.swap(k, k + 1);
    let p = params(&grid, FlowBc::no_slip(), SchemeOrder::First, ScheduleMode::Efficient, 0.01, 1);
    match Simulation::with_schedule(grid, p, s) {
        Err(Error::InvalidSchedule(msg)) => assert!(msg.contains("step"), "{msg}"),
        Err(e) => panic!("unexpected error {e}"),
        Ok(_) => panic!("swapped schedule accepted"),
    }
}
