use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fasmg_bench::experiments;
use fasmg_bench::{BenchError, BenchResult, Experiment, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "fasmg-bench", version, about = "Multigrid and projection-method experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Poisson convergence tables.
    Poisson {
        /// asymptotic | algebraic
        #[arg(long)]
        mode: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// V-cycle counts of the six X/U/Z smoother orderings.
    SmootherCompare {
        #[command(flatten)]
        common: Common,
    },
    /// Navier-Stokes runs.
    Ns {
        /// temporal | cavity | divergence | schedule-audit
        #[arg(long)]
        mode: Option<String>,
        /// Cavity reference profile file.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Wall time per V-cycle.
    Timing {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Default)]
struct Common {
    /// JSON file with default settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    /// Comma-separated grid sizes.
    #[arg(long, value_delimiter = ',')]
    size: Option<Vec<usize>>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    re: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Time steps (cavity, divergence) or ladder rungs (temporal).
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long)]
    smooth_steps: Option<usize>,
    #[arg(long)]
    mesh_level: Option<usize>,
    /// rbgs | x | u | z
    #[arg(long)]
    smoother: Option<String>,
    /// ff | fb
    #[arg(long)]
    sequence: Option<String>,
    /// 1 | 2
    #[arg(long)]
    order: Option<u8>,
    /// classical | efficient
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 3 if any solve misses its tolerance.
    #[arg(long)]
    strict: bool,
}

impl Common {
    fn overrides(&self, mode: Option<String>) -> Overrides {
        Overrides {
            mode,
            dim: self.dim,
            sizes: self.size.clone(),
            dt: self.dt,
            re: self.re,
            t_end: self.t_end,
            steps: self.steps,
            tol: self.tol,
            k_max: self.kmax,
            smooth_steps: self.smooth_steps,
            mesh_level: self.mesh_level,
            smoother: self.smoother.clone(),
            sequence: self.sequence.clone(),
            order: self.order,
            schedule: self.schedule.clone(),
            threads: self.threads,
            seed: self.seed,
            out: self.out.clone(),
            strict: self.strict.then_some(true),
        }
    }
}

fn run(cli: Cli) -> BenchResult<()> {
    let (experiment, mode, reference, common) = match cli.command {
        Command::Poisson { mode, common } => (Experiment::Poisson, mode, None, common),
        Command::SmootherCompare { common } => (Experiment::SmootherCompare, None, None, common),
        Command::Ns { mode, reference, common } => (Experiment::Ns, mode, reference, common),
        Command::Timing { common } => (Experiment::Timing, None, None, common),
    };
    let file = match &common.config {
        Some(p) => Overrides::from_file(p)?,
        None => Overrides::default(),
    };
    let cfg = RunConfig::resolve(experiment, &common.overrides(mode).over(&file))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build_global()
        .map_err(|e| BenchError::Config(e.to_string()))?;
    let outcome = experiments::run(&cfg, reference)?;
    outcome.table.write(&cfg.provenance(), cfg.out.as_deref())?;
    for line in &outcome.summary {
        eprintln!("{line}");
    }
    if cfg.strict && !outcome.unconverged.is_empty() {
        return Err(BenchError::NotConverged(outcome.unconverged.join(", ")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
