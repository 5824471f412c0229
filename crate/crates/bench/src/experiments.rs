//! Experiment drivers behind the subcommands.

use std::path::PathBuf;
use std::time::Instant;

use fasmg::ns::cavity::{run_cavity, CavitySetup, GhiaReference};
use fasmg::ns::temporal::{temporal_convergence, TemporalSetup};
use fasmg::ns::{validate_schedule, ScheduleMode, SchemeOrder, Simulation, SlotSchedule};
use fasmg::problems::{algebraic_test, asymptotic_test, Benchmark};
use fasmg::smoother::compare_orderings;
use fasmg::{Field, GridLevel, SweepPlan};

use crate::config::{Experiment, RunConfig};
use crate::csv::{num, opt, Table};
use crate::error::{BenchError, BenchResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    /// Solves that stopped at `k_max` above tolerance, described.
    pub unconverged: Vec<String>,
    /// Human-readable lines for stderr.
    pub summary: Vec<String>,
}

impl Outcome {
    fn new(table: Table) -> Self {
        Outcome { table, unconverged: Vec::new(), summary: Vec::new() }
    }
}

pub fn run(cfg: &RunConfig, reference: Option<PathBuf>) -> BenchResult<Outcome> {
    match (cfg.experiment, cfg.mode.as_str()) {
        (Experiment::Poisson, "asymptotic") => poisson_asymptotic(cfg),
        (Experiment::Poisson, _) => poisson_algebraic(cfg),
        (Experiment::SmootherCompare, _) => smoother_compare(cfg),
        (Experiment::Ns, "temporal") => ns_temporal(cfg),
        (Experiment::Ns, "cavity") => ns_cavity(cfg, reference),
        (Experiment::Ns, "divergence") => ns_divergence(cfg),
        (Experiment::Ns, _) => schedule_audit(cfg),
        (Experiment::Timing, _) => timing(cfg),
    }
}

fn fas_for(cfg: &RunConfig) -> impl Fn(&GridLevel) -> fasmg::FasParams + '_ {
    move |g| cfg.fas(g).unwrap_or_else(|_| fasmg::FasParams::default_for(g))
}

fn check_sizes(cfg: &RunConfig) -> BenchResult<()> {
    for &n in &cfg.sizes {
        let g = GridLevel::unit(cfg.dim, n).map_err(|e| BenchError::Config(e.to_string()))?;
        cfg.fas(&g)?;
        fasmg::make_hierarchy(&g, cfg.fas(&g)?.mesh_level).map_err(|e| BenchError::Config(e.to_string()))?;
    }
    Ok(())
}

pub fn poisson_asymptotic(cfg: &RunConfig) -> BenchResult<Outcome> {
    check_sizes(cfg)?;
    let rows = asymptotic_test(cfg.dim, &cfg.sizes, fas_for(cfg), &cfg.plan()?)?;
    let mut out = Outcome::new(Table::new(&["n", "error", "order", "iterations", "final_residual"]));
    for r in rows {
        if !r.report.converged {
            out.unconverged.push(format!("n = {}", r.n));
        }
        out.summary.push(format!("n = {:5}  error {:.4e}  order {}", r.n, r.error, opt(r.order)));
        out.table.push(vec![
            r.n.to_string(),
            num(r.error),
            opt(r.order),
            r.report.iterations.to_string(),
            num(r.report.final_residual()),
        ]);
    }
    Ok(out)
}

pub fn poisson_algebraic(cfg: &RunConfig) -> BenchResult<Outcome> {
    check_sizes(cfg)?;
    let runs = algebraic_test(cfg.dim, &cfg.sizes, fas_for(cfg), &cfg.plan()?, cfg.seed)?;
    let mut out = Outcome::new(Table::new(&["n", "cycle", "residual", "error"]));
    for (report, rows) in runs {
        let n = rows.first().map_or(0, |r| r.n);
        if !report.converged {
            out.unconverged.push(format!("n = {n}"));
        }
        out.summary.push(format!("n = {n:5}  iterations {}", report.iterations));
        for r in rows {
            out.table.push(vec![r.n.to_string(), r.cycle.to_string(), num(r.residual), num(r.error)]);
        }
    }
    Ok(out)
}

pub fn smoother_compare(cfg: &RunConfig) -> BenchResult<Outcome> {
    check_sizes(cfg)?;
    let n = cfg.sizes[0];
    let rows = compare_orderings(cfg.dim, n, cfg.tol, cfg.k_max)?;
    let mut out = Outcome::new(Table::new(&["shape", "sequence", "iterations", "final_residual"]));
    for r in rows {
        if !r.report.converged {
            out.unconverged.push(format!("{}-{}", r.shape, r.sequence));
        }
        out.summary.push(format!("{}-{}: {} cycles", r.shape, r.sequence, r.report.iterations));
        out.table.push(vec![
            r.shape.to_string(),
            r.sequence.to_string(),
            r.report.iterations.to_string(),
            num(r.report.final_residual()),
        ]);
    }
    Ok(out)
}

pub fn ns_temporal(cfg: &RunConfig) -> BenchResult<Outcome> {
    if cfg.dim != 2 {
        return Err(BenchError::Config("the temporal test is two-dimensional".into()));
    }
    check_sizes(cfg)?;
    let n = cfg.sizes[0];
    let mut setup = TemporalSetup::new(n, cfg.scheme_order()?)?;
    setup.re = cfg.re;
    setup.t_end = cfg.t_end.unwrap_or(1.0);
    setup.mode = cfg.schedule_mode()?;
    setup.fas = cfg.fas(&GridLevel::unit(2, n)?)?;
    setup.plan = cfg.plan()?;
    let dt0 = cfg.dt.unwrap_or(0.1);
    let rungs = cfg.steps.unwrap_or(5);
    let dts: Vec<f64> = (0..rungs).map(|k| dt0 / f64::powi(2.0, k as i32)).collect();
    let rows = temporal_convergence(&setup, &dts)?;
    let mut out =
        Outcome::new(Table::new(&["dt", "error_u", "error_v", "error_p", "order_u", "order_v", "order_p"]));
    for r in rows {
        let o = |k: usize| opt(r.orders.map(|o| o[k]));
        out.summary.push(format!(
            "dt = {:<8} u {:.3e} v {:.3e} p {:.3e}  orders {} {} {}",
            r.dt,
            r.errors[0],
            r.errors[1],
            r.errors[2],
            o(0),
            o(1),
            o(2)
        ));
        out.table.push(vec![num(r.dt), num(r.errors[0]), num(r.errors[1]), num(r.errors[2]), o(0), o(1), o(2)]);
    }
    Ok(out)
}

fn cavity_setup(cfg: &RunConfig) -> BenchResult<CavitySetup> {
    check_sizes(cfg)?;
    let n = cfg.sizes[0];
    let mut s = CavitySetup::new(cfg.dim, n, cfg.re)?;
    s.dt = cfg.dt.unwrap_or(1e-3);
    s.order = cfg.scheme_order()?;
    s.mode = cfg.schedule_mode()?;
    s.fas = cfg.fas(&GridLevel::unit(cfg.dim, n)?)?;
    s.plan = cfg.plan()?;
    if let Some(t) = cfg.t_end {
        s.t_end = t;
    }
    if let Some(k) = cfg.steps {
        s.t_end = k as f64 * s.dt;
    }
    Ok(s)
}

pub fn ns_cavity(cfg: &RunConfig, reference: Option<PathBuf>) -> BenchResult<Outcome> {
    let path = reference.unwrap_or_else(GhiaReference::default_path);
    let ghia = GhiaReference::load(&path).map_err(|e| {
        BenchError::Config(format!("reference profiles expected at {}: {e}", path.display()))
    })?;
    let column = ghia.column(cfg.re).ok();
    let s = cavity_setup(cfg)?;
    let report = run_cavity(&s, |_, _| {})?;
    let mut out = Outcome::new(Table::new(&["line", "coord", "value", "reference", "delta"]));
    if !report.all_converged {
        out.unconverged.push("a momentum or pressure solve".into());
    }
    let c = &report.centrelines;
    for (name, prof, data) in [("u", &c.vertical, &ghia.u), ("v", &c.horizontal, &ghia.v)] {
        for &(x, r) in data {
            let v = prof.interpolate(x);
            let (rf, d) = match column {
                Some(k) => (num(r[k]), num(v - r[k])),
                None => (String::new(), String::new()),
            };
            out.table.push(vec![name.into(), num(x), num(v), rf, d]);
        }
    }
    out.summary.push(format!(
        "{} steps, steady: {}, last change {:.3e}",
        report.steps,
        report.steady,
        report.change.last().copied().unwrap_or(f64::NAN)
    ));
    if column.is_some() {
        let (du, dv) = ghia.deviation(c, cfg.re)?;
        out.summary.push(format!("max |u - ref| = {du:.4}, max |v - ref| = {dv:.4}"));
    }
    out.summary.push(format!("u minimum on the vertical centreline {:.5}", c.vertical.min_value()));
    Ok(out)
}

pub fn ns_divergence(cfg: &RunConfig) -> BenchResult<Outcome> {
    let mut s = cavity_setup(cfg)?;
    if cfg.steps.is_none() && cfg.t_end.is_none() {
        s.t_end = 500.0 * s.dt;
    }
    s.steady_tol = 0.0;
    let mut out = Outcome::new(Table::new(&["step", "time", "integral_divergence", "pressure_iterations"]));
    let mut unconverged = 0;
    run_cavity(&s, |r, _| {
        if !r.converged() {
            unconverged += 1;
        }
        out.table.push(vec![
            r.step.to_string(),
            num(r.time),
            num(r.integral_divergence),
            r.pressure.iterations.to_string(),
        ]);
    })?;
    if unconverged > 0 {
        out.unconverged.push(format!("{unconverged} steps"));
    }
    let worst = out.table.rows.iter().map(|r| r[2].parse::<f64>().unwrap_or(f64::NAN).abs()).fold(0.0, f64::max);
    out.summary.push(format!("max |integral divergence| = {worst:.3e}"));
    Ok(out)
}

/// Validates the four shipped schedules and counts the arrays a run of
/// each actually allocates.
pub fn schedule_audit(cfg: &RunConfig) -> BenchResult<Outcome> {
    let dim = cfg.dim;
    let mut out = Outcome::new(Table::new(&[
        "schedule",
        "order",
        "dim",
        "resident_slots",
        "allocated",
        "status",
        "violations",
    ]));
    for order in [SchemeOrder::First, SchemeOrder::Second] {
        for mode in [ScheduleMode::Classical, ScheduleMode::Efficient] {
            let s = SlotSchedule::new(mode, order, dim);
            let audit = validate_schedule(&s);
            let mut setup = CavitySetup::new(dim, 8, 100.0)?;
            setup.order = order;
            setup.mode = mode;
            let sim = Simulation::new(GridLevel::unit(dim, 8)?, setup.params(1.0))?;
            let status = if audit.is_ok() { "ok" } else { "invalid" };
            let detail: Vec<String> = audit.violations.iter().map(|v| v.to_string()).collect();
            out.summary.push(format!("{mode} order {}: {status}, {} slots", order.as_u8(), audit.resident_slots));
            out.table.push(vec![
                mode.to_string(),
                order.as_u8().to_string(),
                dim.to_string(),
                audit.resident_slots.to_string(),
                sim.bank().resident_allocations().to_string(),
                status.into(),
                format!("\"{}\"", detail.join("; ").replace('"', "'")),
            ]);
        }
    }
    Ok(out)
}

/// Mean and standard deviation of `cycles` timed V-cycles after one warm-up
/// cycle, on a pool of `threads` workers.
pub fn time_cycles(dim: usize, n: usize, cycles: usize, threads: usize, plan: &SweepPlan) -> BenchResult<(f64, f64)> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| BenchError::Config(e.to_string()))?;
    pool.install(|| {
        let b = Benchmark::new(dim, n)?;
        let f = b.continuous_rhs();
        let mut p = Field::zeros_like(&f);
        let mut solver = b.solver(fasmg::FasParams::default_for(&b.grid), plan.clone())?;
        solver.vcycle(&mut p, &f)?;
        let mut t = Vec::with_capacity(cycles);
        for _ in 0..cycles {
            let start = Instant::now();
            solver.vcycle(&mut p, &f)?;
            t.push(start.elapsed().as_secs_f64());
        }
        let mean = t.iter().sum::<f64>() / t.len() as f64;
        let var = t.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / t.len() as f64;
        Ok((mean, var.sqrt()))
    })
}

pub const TIMED_CYCLES: usize = 10;

pub fn timing(cfg: &RunConfig) -> BenchResult<Outcome> {
    check_sizes(cfg)?;
    let plan = cfg.plan()?;
    let mut out = Outcome::new(Table::new(&[
        "n",
        "points",
        "threads",
        "mean_s",
        "stddev_s",
        "mean_1thread_s",
        "speedup",
    ]));
    for &n in &cfg.sizes {
        let (mean, sd) = time_cycles(cfg.dim, n, TIMED_CYCLES, cfg.threads, &plan)?;
        let base = if cfg.threads == 1 { mean } else { time_cycles(cfg.dim, n, TIMED_CYCLES, 1, &plan)?.0 };
        out.summary.push(format!("n = {n}: {mean:.4e} s per cycle on {} threads", cfg.threads));
        out.table.push(vec![
            n.to_string(),
            n.pow(cfg.dim as u32).to_string(),
            cfg.threads.to_string(),
            num(mean),
            num(sd),
            num(base),
            num(base / mean),
        ]);
    }
    Ok(out)
}
