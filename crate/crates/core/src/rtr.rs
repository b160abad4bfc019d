//! Regularized Riemannian trust region (RTR): radius adaptation around a Lanczos
//! trust-region solve with oracle-driven negative-curvature steps.

use std::sync::Arc;

use log::{debug, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krylov::{init_basis, solve_reduced_tr, subproblem_cap};
use crate::manifold::{Manifold, ManifoldPoint, RetractionKind};
use crate::meo::{meo_budget, meo_run, MeoOutcome, MeoParams, DEFAULT_C_MEO};
use crate::model::{model_decrease, rho, tc1_holds, tcc_holds, ModelAt, Regularizer};
use crate::objective::{Counters, Objective, ObjectiveEval};
use crate::report::{
    IterationRecord, RunReport, SolverConfig, Status, StepKind, SubproblemOutcome, SubproblemResult,
};

/// `‖η‖ ≥ Δ(1 − BOUNDARY_RTOL)` counts as a boundary step.
pub const BOUNDARY_RTOL: f64 = 1e-12;
const VERY_SUCCESSFUL: f64 = 0.75;
const UNSUCCESSFUL: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RtrConfig {
    pub eps_g: f64,
    pub eps_h: f64,
    pub theta1: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub radius_max: f64,
    pub radius0: f64,
    /// Acceptance threshold `ϱ ∈ [0, 1/4)`.
    pub rho_accept: f64,
    pub c_sub: f64,
    pub c_meo: f64,
    pub delta: f64,
    pub max_outer: usize,
    pub retraction: RetractionKind,
}

impl Default for RtrConfig {
    fn default() -> Self {
        Self {
            eps_g: 1e-6,
            eps_h: 1e-3,
            theta1: 1.0,
            kappa1: 0.25,
            kappa2: 2.0,
            radius_max: 10.0,
            radius0: 1.0,
            rho_accept: 0.05,
            c_sub: 50.0,
            c_meo: DEFAULT_C_MEO,
            delta: 0.05,
            max_outer: 10_000,
            retraction: RetractionKind::Exponential,
        }
    }
}

impl RtrConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v <= 1.0;
        for (name, v) in [("eps_g", self.eps_g), ("eps_h", self.eps_h), ("theta1", self.theta1)] {
            if !unit(v) {
                return Err(Error::config(format!("{name} = {v} must lie in (0, 1]")));
            }
        }
        if !(self.kappa2 >= 1.0 && 1.0 > self.kappa1 && self.kappa1 > 0.0) {
            return Err(Error::config(format!(
                "need kappa2 >= 1 > kappa1 > 0, got kappa1 = {}, kappa2 = {}",
                self.kappa1, self.kappa2
            )));
        }
        if !(self.radius_max > 0.0 && self.radius_max.is_finite() && self.radius0 > 0.0 && self.radius0 <= self.radius_max)
        {
            return Err(Error::config("need 0 < radius0 <= radius_max"));
        }
        if !(self.rho_accept >= 0.0 && self.rho_accept < 0.25) {
            return Err(Error::config(format!("rho_accept = {} must lie in [0, 1/4)", self.rho_accept)));
        }
        if !(self.c_sub > 0.0 && self.c_meo > 0.0) {
            return Err(Error::config("c_sub and c_meo must be positive"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config("delta must lie in (0, 1)"));
        }
        if self.max_outer == 0 {
            return Err(Error::config("max_outer must be at least 1"));
        }
        Ok(())
    }

    fn meo_params(&self) -> MeoParams {
        MeoParams {
            eps_h: self.eps_h,
            delta: self.delta,
            c_meo: self.c_meo,
        }
    }
}

pub fn on_boundary(step_norm: f64, radius: f64) -> bool {
    step_norm >= radius * (1.0 - BOUNDARY_RTOL)
}

/// Radius update: expand on very successful boundary steps, shrink when `ρ < 1/4`.
pub fn update_radius(radius: f64, rho: f64, step_norm: f64, cfg: &RtrConfig) -> f64 {
    if rho > VERY_SUCCESSFUL && on_boundary(step_norm, radius) {
        (cfg.kappa2 * radius).min(cfg.radius_max)
    } else if rho < UNSUCCESSFUL {
        cfg.kappa1 * radius
    } else {
        radius
    }
}

/// One subproblem process: the oracle at small gradients, otherwise a Lanczos
/// trust-region solve with `H + 2ε_H I` stopped by the residual test or the boundary.
pub fn rtr_subproblem(
    eval: &ObjectiveEval,
    radius: f64,
    cfg: &RtrConfig,
    manifold: &dyn Manifold,
    rng: &mut dyn rand::RngCore,
    counters: &mut Counters,
) -> Result<SubproblemResult> {
    let gn = eval.grad_norm();
    let hess = eval.hessian.as_ref();
    let hv_start = counters.hess_vec_products;
    let k_sub = subproblem_cap(cfg.c_sub, cfg.eps_h);
    let meo_cap = meo_budget(manifold.dim(), cfg.eps_h, cfg.delta, cfg.c_meo) + 1;

    if gn <= cfg.eps_g {
        let outcome = match meo_run(hess, &eval.gradient, &cfg.meo_params(), manifold, rng, counters)? {
            MeoOutcome::Certified { lambda_est } => SubproblemOutcome::Terminate {
                certificate: lambda_est,
                warning: None,
            },
            MeoOutcome::NegativeCurvature { direction, .. } => SubproblemOutcome::Step {
                eta: direction.scaled(radius),
                kind: StepKind::NegativeCurvature,
                on_boundary: true,
            },
        };
        assert!((counters.hess_vec_products - hv_start) as usize <= meo_cap);
        return Ok(SubproblemResult {
            outcome,
            iters: 0,
            op_norm_est: 0.0,
        });
    }

    let shift = 2.0 * cfg.eps_h;
    let mut st = init_basis(&eval.gradient, false, 0.0, cfg.eps_g, manifold, rng)?;
    let mut iters = 0;
    let mut found = None;
    for _ in 0..k_sub {
        if !st.lanczos_extend(hess, counters) {
            break;
        }
        iters += 1;
        let gr = st.reduced_gradient();
        let sol = solve_reduced_tr(&st.tridiagonal().shifted(shift), &gr, radius)?;
        let un = sol.u.norm();
        let boundary = on_boundary(un, radius);
        if boundary || tc1_holds(st.residual_norm(&sol.u, shift), un, cfg.theta1) {
            found = Some((st.lift(&sol.u)?, boundary));
            break;
        }
    }

    let outcome = match found {
        Some((eta, boundary)) => SubproblemOutcome::Step {
            eta,
            kind: StepKind::Krylov,
            on_boundary: boundary,
        },
        None => match meo_run(hess, &eval.gradient, &cfg.meo_params(), manifold, rng, counters)? {
            MeoOutcome::NegativeCurvature { direction, .. } => SubproblemOutcome::Step {
                eta: direction.scaled(radius),
                kind: StepKind::NegativeCurvature,
                on_boundary: true,
            },
            MeoOutcome::Certified { lambda_est } => SubproblemOutcome::Terminate {
                certificate: lambda_est,
                warning: Some(format!(
                    "oracle certified lambda_min >= {lambda_est:.3e} after {iters} Lanczos steps without a \
                     trust-region stopping test (|g| = {gn:.3e}); terminating"
                )),
            },
        },
    };
    let used = (counters.hess_vec_products - hv_start) as usize;
    assert!(used <= k_sub + meo_cap, "subproblem used {used} Hessian products");
    Ok(SubproblemResult {
        outcome,
        iters,
        op_norm_est: st.op_norm_estimate(),
    })
}

pub enum StepOutcome {
    Iteration(IterationRecord),
    Terminated { certificate: f64 },
}

/// RTR state machine over one run.
pub struct RtrSolver<'a> {
    problem: &'a dyn Objective,
    cfg: RtrConfig,
    seed: u64,
    rng: ChaCha8Rng,
    eval: ObjectiveEval,
    radius: f64,
    beta_h: f64,
    counters: Counters,
    records: Vec<IterationRecord>,
    warnings: Vec<String>,
    certificate: Option<f64>,
}

impl<'a> RtrSolver<'a> {
    pub fn new(problem: &'a dyn Objective, cfg: RtrConfig, x0: ManifoldPoint, seed: u64) -> Result<Self> {
        cfg.validate()?;
        problem.manifold().check_point(&x0)?;
        let mut counters = Counters::default();
        let eval = problem.evaluate(&Arc::new(x0), &mut counters)?;
        Ok(Self {
            problem,
            radius: cfg.radius0,
            cfg,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            eval,
            beta_h: 0.0,
            counters,
            records: Vec::new(),
            warnings: Vec::new(),
            certificate: None,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn point(&self) -> &Arc<ManifoldPoint> {
        &self.eval.point
    }

    pub fn eval(&self) -> &ObjectiveEval {
        &self.eval
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    pub fn step(&mut self) -> Result<StepOutcome> {
        let manifold = self.problem.manifold();
        let cfg = &self.cfg;
        let k = self.records.len();
        let gn = self.eval.grad_norm();
        let f = self.eval.value;
        let radius = self.radius;

        let sub = rtr_subproblem(&self.eval, radius, cfg, manifold, &mut self.rng, &mut self.counters)?;
        self.beta_h = self.beta_h.max(sub.op_norm_est);
        let (mut eta, mut kind, mut boundary) = match sub.outcome {
            SubproblemOutcome::Terminate { certificate, warning } => {
                if let Some(w) = warning {
                    warn!("rtr k={k}: {w}");
                    self.warnings.push(w);
                }
                self.certificate = Some(certificate);
                debug!("rtr: terminating at k = {k}, |g| = {gn:.3e}, lambda estimate {certificate:.3e}");
                return Ok(StepOutcome::Terminated { certificate });
            }
            SubproblemOutcome::Step { eta, kind, on_boundary } => (eta, kind, on_boundary),
        };

        let tr_model = ModelAt::new(&self.eval, Regularizer::TrQuad { eps_h: cfg.eps_h, radius });
        let h_eta = self.eval.hessian.apply(&eta.coords, &mut self.counters);
        let mut curv = eta.coords.dot(&h_eta);
        if eta.norm() > 0.0 {
            self.beta_h = self.beta_h.max(h_eta.norm() / eta.norm());
        }

        if kind == StepKind::Krylov {
            // Cauchy comparison on the solved model, whose quadratic term is H + 2ε_H I
            let solved = ModelAt::new(&self.eval, Regularizer::TrQuad { eps_h: 4.0 * cfg.eps_h, radius });
            let g_hg = self.eval.gradient.coords.dot(&self.eval.hessian.apply(&self.eval.gradient.coords, &mut self.counters));
            let tau = solved.cauchy_step_length(gn, g_hg);
            let cauchy = self.eval.gradient.scaled(-tau);
            let cauchy_curv = tau * tau * g_hg;
            if !tcc_holds(
                solved.value_from_curvature(&eta, curv),
                solved.value_from_curvature(&cauchy, cauchy_curv),
                f,
            ) {
                debug!("rtr k={k}: Krylov step failed the Cauchy comparison; using the Cauchy point");
                boundary = on_boundary(cauchy.norm(), radius);
                eta = cauchy;
                curv = cauchy_curv;
                kind = StepKind::Cauchy;
            }
        }

        let step_norm = eta.norm();
        let decrease = model_decrease(&self.eval, &eta, curv);
        if kind == StepKind::NegativeCurvature {
            assert!(
                decrease >= 0.25 * cfg.eps_h * radius * radius * (1.0 - 1e-12),
                "negative-curvature step decrease {decrease:e} below eps_h*radius^2/4"
            );
        }
        let reg_value = tr_model.reg.value(step_norm);
        let trial = manifold.retract(&self.eval.point, &eta, cfg.retraction)?;
        let f_trial = self.problem.value(&trial, &mut self.counters)?;
        let r = rho(f, f_trial, decrease);
        let success = r >= cfg.rho_accept;
        let radius_next = update_radius(radius, r, step_norm, cfg);

        let gradient_bound_ok = boundary
            || gn <= (self.beta_h + 2.0 * cfg.eps_h) * step_norm * (1.0 + 1e-10) + step_norm.powf(1.0 + cfg.theta1);
        if !gradient_bound_ok {
            debug!("rtr k={k}: gradient bound check failed (beta_h estimate {:.3e})", self.beta_h);
        }

        if success {
            self.eval = self.problem.evaluate(&Arc::new(trial), &mut self.counters)?;
        }
        self.radius = radius_next;

        let record = IterationRecord {
            k,
            grad_norm: gn,
            f,
            param: radius,
            param_next: radius_next,
            step_norm,
            rho: r,
            success,
            f_trial,
            model_decrease: decrease,
            reg_value,
            on_boundary: boundary,
            step_kind: kind,
            subproblem_iters: sub.iters,
            hv_products_cumulative: self.counters.hess_vec_products,
            step_bound_ok: true,
            gradient_bound_ok,
            cauchy_bound_ok: true,
        };
        debug!(
            "rtr k={k} f={f:.10e} |g|={gn:.3e} radius={radius:.3e} |eta|={step_norm:.3e} rho={r:.3} {kind:?} iters={}",
            sub.iters
        );
        self.records.push(record.clone());
        Ok(StepOutcome::Iteration(record))
    }

    pub fn run(mut self) -> Result<RunReport> {
        while self.records.len() < self.cfg.max_outer {
            if let StepOutcome::Terminated { .. } = self.step()? {
                return Ok(self.into_report(Status::Converged));
            }
        }
        warn!("rtr: outer budget of {} iterations exhausted", self.cfg.max_outer);
        Ok(self.into_report(Status::BudgetExhausted))
    }

    fn into_report(self, status: Status) -> RunReport {
        RunReport {
            problem: self.problem.name(),
            seed: self.seed,
            config: SolverConfig::Rtr(self.cfg),
            status,
            records: self.records,
            final_point: self.eval.point.coords.iter().copied().collect(),
            final_value: self.eval.value,
            final_grad_norm: self.eval.grad_norm(),
            certificate: self.certificate,
            counters: self.counters,
            warnings: self.warnings,
        }
    }
}

pub fn rtr_solve(problem: &dyn Objective, cfg: &RtrConfig, x0: ManifoldPoint, seed: u64) -> Result<RunReport> {
    RtrSolver::new(problem, cfg.clone(), x0, seed)?.run()
}
