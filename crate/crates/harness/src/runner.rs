//! Single runs and ε-sweeps.

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rarn::manifold::ManifoldPoint;
use rarn::objective::Problem;
use rarn::rar::rar_solve;
use rarn::report::{RunReport, SolverConfig, SolverKind};
use rarn::rtr::rtr_solve;

use crate::config::ExperimentConfig;
use crate::{invalid, Result};

/// Sweeps fit exponents only over at least this many converged points.
pub const MIN_FIT_POINTS: usize = 4;

pub fn solve(problem: &Problem, cfg: &SolverConfig, x0: ManifoldPoint, seed: u64) -> Result<RunReport> {
    Ok(match cfg {
        SolverConfig::Rar(c) => rar_solve(problem, c, x0, seed)?,
        SolverConfig::Rtr(c) => rtr_solve(problem, c, x0, seed)?,
    })
}

/// One solver run as described by `cfg`. Deterministic in `cfg.seed`.
pub fn run_single(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let problem = cfg.problem.build()?;
    let x0 = cfg.start.point(&problem, cfg.seed)?;
    solve(&problem, &cfg.solver_config(), x0, cfg.seed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub eps_g: f64,
    pub eps_h: f64,
    pub outer_iters: usize,
    pub succ_iters: usize,
    pub hv_products: u64,
    pub converged: bool,
    /// Largest `σ_k` (RAR) or `Δ_k` (RTR) over the run.
    pub max_param: f64,
    pub seed: u64,
}

/// Per-ε counts and the fitted exponents. Slopes are `d log N / d log(1/ε_g)` over
/// converged points and are `None` with fewer than [`MIN_FIT_POINTS`] of them.
/// The operation exponent is a pure power-law fit; logarithmic factors in the
/// operation count are absorbed into the fitted slope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub solver: SolverKind,
    pub problem: String,
    pub master_seed: u64,
    pub points: Vec<SweepPoint>,
    pub iter_slope: Option<f64>,
    pub hv_slope: Option<f64>,
    /// Some point exhausted its outer budget.
    pub partial: bool,
}

impl SweepResult {
    pub fn from_points(solver: SolverKind, problem: String, master_seed: u64, points: Vec<SweepPoint>) -> Self {
        let conv: Vec<&SweepPoint> = points.iter().filter(|p| p.converged).collect();
        let eps: Vec<f64> = conv.iter().map(|p| p.eps_g).collect();
        let fit = |counts: Vec<f64>| if conv.len() >= MIN_FIT_POINTS { fit_slope(&eps, &counts) } else { None };
        let iter_slope = fit(conv.iter().map(|p| p.outer_iters as f64).collect());
        let hv_slope = fit(conv.iter().map(|p| p.hv_products as f64).collect());
        let partial = points.iter().any(|p| !p.converged);
        Self {
            solver,
            problem,
            master_seed,
            points,
            iter_slope,
            hv_slope,
            partial,
        }
    }
}

/// Least-squares slope of `log N` against `log(1/ε)`. Points with `N ≤ 0` are
/// skipped; `None` when fewer than two distinct abscissae remain.
pub fn fit_slope(eps: &[f64], counts: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = eps
        .iter()
        .zip(counts)
        .filter(|(e, c)| **e > 0.0 && **c > 0.0)
        .map(|(e, c)| (-e.ln(), c.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Runs every sweep point and keeps the full reports.
///
/// Point `i` uses solver seed `seed + i`; all points share the starting point
/// derived from `seed`, so only the tolerances differ between them.
pub fn run_sweep_with_reports(cfg: &ExperimentConfig) -> Result<(SweepResult, Vec<RunReport>)> {
    cfg.validate()?;
    let sweep = cfg.sweep.as_ref().ok_or_else(|| invalid("config has no [sweep] table"))?;
    let problem = cfg.problem.build()?;
    let x0 = cfg.start.point(&problem, cfg.seed)?;
    let jobs: Vec<(u64, SolverConfig)> = sweep
        .eps_g
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            let h = sweep.eps_h.as_ref().map(|h| h[i]);
            (cfg.seed.wrapping_add(i as u64), cfg.solver_config_at(Some(g), h))
        })
        .collect();
    let run = |(seed, sc): &(u64, SolverConfig)| solve(&problem, sc, x0.clone(), *seed);
    let reports: Vec<RunReport> = if sweep.parallel {
        jobs.par_iter().map(run).collect::<Result<_>>()?
    } else {
        jobs.iter().map(run).collect::<Result<_>>()?
    };

    let points: Vec<SweepPoint> = reports
        .iter()
        .zip(&jobs)
        .map(|(r, (seed, sc))| {
            let p = SweepPoint {
                eps_g: sc.eps_g(),
                eps_h: sc.eps_h(),
                outer_iters: r.outer_iters(),
                succ_iters: r.successful_iters(),
                hv_products: r.counters.hess_vec_products,
                converged: r.converged(),
                max_param: r.max_param().unwrap_or(f64::NAN),
                seed: *seed,
            };
            if !p.converged {
                warn!("sweep point eps_g = {:e} exhausted its budget", p.eps_g);
            }
            info!("eps_g = {:e}: {} iterations, {} Hessian products", p.eps_g, p.outer_iters, p.hv_products);
            p
        })
        .collect();
    let result = SweepResult::from_points(cfg.solver, cfg.problem.name().to_string(), cfg.seed, points);
    Ok((result, reports))
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    Ok(run_sweep_with_reports(cfg)?.0)
}
