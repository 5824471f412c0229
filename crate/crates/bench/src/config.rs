//! Run configuration: a flat JSON file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use fasmg::ns::{ScheduleMode, SchemeOrder};
use fasmg::{FasParams, GridLevel, Sequence, SweepPlan, SweepShape};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{BenchError, BenchResult};

/// Every tunable, all optional. Used both as the file schema and as the
/// flag overlay.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub mode: Option<String>,
    pub dim: Option<usize>,
    pub sizes: Option<Vec<usize>>,
    pub dt: Option<f64>,
    pub re: Option<f64>,
    pub t_end: Option<f64>,
    pub steps: Option<usize>,
    pub tol: Option<f64>,
    pub k_max: Option<usize>,
    pub smooth_steps: Option<usize>,
    pub mesh_level: Option<usize>,
    pub smoother: Option<String>,
    pub sequence: Option<String>,
    pub order: Option<u8>,
    pub schedule: Option<String>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub strict: Option<bool>,
}

macro_rules! overlay {
    ($hi:expr, $lo:expr, $($f:ident),*) => {
        Overrides { $($f: $hi.$f.clone().or_else(|| $lo.$f.clone()),)* }
    };
}

impl Overrides {
    pub fn from_file(path: &Path) -> BenchResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> BenchResult<Self> {
        serde_json::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    /// `self` wins over `base`.
    pub fn over(&self, base: &Overrides) -> Overrides {
        overlay!(
            self, base, mode, dim, sizes, dt, re, t_end, steps, tol, k_max, smooth_steps, mesh_level, smoother,
            sequence, order, schedule, threads, seed, out, strict
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Experiment {
    Poisson,
    SmootherCompare,
    Ns,
    Timing,
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub mode: String,
    pub dim: usize,
    pub sizes: Vec<usize>,
    pub dt: Option<f64>,
    pub re: f64,
    pub t_end: Option<f64>,
    pub steps: Option<usize>,
    pub tol: f64,
    pub k_max: usize,
    pub smooth_steps: usize,
    pub mesh_level: Option<usize>,
    pub smoother: String,
    pub sequence: String,
    pub order: u8,
    pub schedule: String,
    pub threads: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub strict: bool,
}

fn default_mode(e: Experiment) -> &'static str {
    match e {
        Experiment::Poisson => "asymptotic",
        Experiment::Ns => "temporal",
        Experiment::SmootherCompare | Experiment::Timing => "",
    }
}

fn default_sizes(e: Experiment, mode: &str, dim: usize) -> Vec<usize> {
    match (e, mode, dim) {
        (Experiment::Poisson, "asymptotic", 3) => vec![32, 64, 128],
        (Experiment::Poisson, "asymptotic", _) => vec![128, 256, 512, 1024],
        (Experiment::Poisson, _, 3) => vec![32, 64, 128],
        (Experiment::Poisson, _, _) => vec![256, 512, 1024],
        (Experiment::SmootherCompare, _, 3) => vec![64],
        (Experiment::SmootherCompare, _, _) => vec![512],
        (Experiment::Ns, "temporal", _) => vec![512],
        (Experiment::Ns, "cavity", _) => vec![256],
        (Experiment::Ns, _, _) => vec![128],
        (Experiment::Timing, _, 3) => vec![32, 64, 128],
        (Experiment::Timing, _, _) => vec![256, 512, 1024],
    }
}

impl RunConfig {
    pub fn resolve(experiment: Experiment, o: &Overrides) -> BenchResult<Self> {
        let mode = o.mode.clone().unwrap_or_else(|| default_mode(experiment).to_string());
        let allowed: &[&str] = match experiment {
            Experiment::Poisson => &["asymptotic", "algebraic"],
            Experiment::Ns => &["temporal", "cavity", "divergence", "schedule-audit"],
            Experiment::SmootherCompare | Experiment::Timing => &[""],
        };
        if !allowed.contains(&mode.as_str()) {
            return Err(BenchError::Config(format!("mode '{mode}' is not one of {allowed:?}")));
        }
        let dim = o.dim.unwrap_or(if mode == "schedule-audit" { 3 } else { 2 });
        if dim != 2 && dim != 3 {
            return Err(BenchError::Config(format!("dim must be 2 or 3, got {dim}")));
        }
        let sizes = o.sizes.clone().unwrap_or_else(|| default_sizes(experiment, &mode, dim));
        if sizes.is_empty() {
            return Err(BenchError::Config("size list is empty".into()));
        }
        let default_k_max = if experiment == Experiment::SmootherCompare { 100 } else { 20 };
        let default_tol = match (experiment, mode.as_str()) {
            (Experiment::Ns, "cavity" | "divergence") => 1e-10,
            _ => 1e-9,
        };
        let cfg = RunConfig {
            experiment,
            dim,
            sizes,
            dt: o.dt,
            re: o.re.unwrap_or(if mode == "temporal" { 10.0 } else { 100.0 }),
            t_end: o.t_end,
            steps: o.steps,
            tol: o.tol.unwrap_or(default_tol),
            k_max: o.k_max.unwrap_or(default_k_max),
            smooth_steps: o.smooth_steps.unwrap_or(2),
            mesh_level: o.mesh_level,
            smoother: o.smoother.clone().unwrap_or_else(|| "x".into()),
            sequence: o.sequence.clone().unwrap_or_else(|| "ff".into()),
            order: o.order.unwrap_or(2),
            schedule: o.schedule.clone().unwrap_or_else(|| "efficient".into()),
            threads: o.threads.unwrap_or(1),
            seed: o.seed.unwrap_or(0),
            out: o.out.clone(),
            strict: o.strict.unwrap_or(false),
            mode,
        };
        cfg.plan()?;
        cfg.scheme_order()?;
        cfg.schedule_mode()?;
        if cfg.threads == 0 {
            return Err(BenchError::Config("threads must be at least 1".into()));
        }
        if !(cfg.tol > 0.0) || cfg.k_max == 0 || cfg.smooth_steps == 0 {
            return Err(BenchError::Config("tol, kmax and smooth-steps must be positive".into()));
        }
        if let Some(dt) = cfg.dt {
            if !(dt > 0.0) {
                return Err(BenchError::Config(format!("dt must be positive, got {dt}")));
            }
        }
        if !(cfg.re > 0.0) {
            return Err(BenchError::Config(format!("re must be positive, got {}", cfg.re)));
        }
        Ok(cfg)
    }

    pub fn plan(&self) -> BenchResult<SweepPlan> {
        let shape: SweepShape = self.smoother.parse().map_err(|e: fasmg::Error| BenchError::Config(e.to_string()))?;
        let seq: Sequence = self.sequence.parse().map_err(|e: fasmg::Error| BenchError::Config(e.to_string()))?;
        Ok(SweepPlan::new(shape, seq, self.dim))
    }

    pub fn scheme_order(&self) -> BenchResult<SchemeOrder> {
        SchemeOrder::try_from(self.order).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn schedule_mode(&self) -> BenchResult<ScheduleMode> {
        self.schedule.parse().map_err(|e: fasmg::Error| BenchError::Config(e.to_string()))
    }

    /// Solver parameters for `grid`; the mesh level defaults to the deepest.
    pub fn fas(&self, grid: &GridLevel) -> BenchResult<FasParams> {
        let mesh = self.mesh_level.unwrap_or_else(|| FasParams::default_for(grid).mesh_level);
        FasParams::new(self.tol, self.k_max, self.smooth_steps, mesh).map_err(|e| BenchError::Config(e.to_string()))
    }

    /// SHA-256 of the resolved configuration as JSON.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialises");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn provenance(&self) -> String {
        format!("config_sha256={} seed={} threads={}", self.digest(), self.seed, self.threads)
    }
}
