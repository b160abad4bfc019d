//! Adaptive 2+ω regularization (RAR): outer σ-adaptation loop with a Lanczos
//! subproblem process that detects approximate second-order stationarity.

use std::sync::Arc;

use log::{debug, warn};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krylov::{init_basis, solve_reduced_ar, subproblem_cap, DEFAULT_PERTURBATION};
use crate::manifold::{Manifold, ManifoldPoint, RetractionKind};
use crate::meo::{meo_budget, meo_run, MeoOutcome, MeoParams, DEFAULT_C_MEO};
use crate::model::{
    cauchy_decrease_lower_bound, model_decrease, rho, step_norm_bound, tc1_holds, tcc_holds, tcd_threshold, ModelAt,
    Regularizer,
};
use crate::objective::{Counters, Objective, ObjectiveEval};
use crate::report::{
    IterationRecord, RunReport, SolverConfig, Status, StepKind, SubproblemOutcome, SubproblemResult,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RarConfig {
    pub eps_g: f64,
    pub eps_h: f64,
    pub omega: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
    pub sigma_lower: f64,
    pub sigma0: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub c_sub: f64,
    pub c_meo: f64,
    pub delta: f64,
    /// Relative size of the Krylov start-vector perturbation.
    pub perturbation: f64,
    pub max_outer: usize,
    pub retraction: RetractionKind,
}

impl Default for RarConfig {
    fn default() -> Self {
        Self {
            eps_g: 1e-6,
            eps_h: 1e-3,
            omega: 1.0,
            theta1: 1.0,
            theta2: 1.0,
            kappa1: 0.5,
            kappa2: 2.0,
            kappa3: 4.0,
            sigma_lower: 1e-4,
            sigma0: 1.0,
            rho1: 0.1,
            rho2: 0.9,
            c_sub: 50.0,
            c_meo: DEFAULT_C_MEO,
            delta: 0.05,
            perturbation: DEFAULT_PERTURBATION,
            max_outer: 10_000,
            retraction: RetractionKind::Exponential,
        }
    }
}

impl RarConfig {
    /// Defaults with `ω` and the matching `θ₁ = θ₂ = ω`.
    pub fn with_omega(omega: f64) -> Self {
        Self {
            omega,
            theta1: omega,
            theta2: omega,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v <= 1.0;
        for (name, v) in [
            ("eps_g", self.eps_g),
            ("eps_h", self.eps_h),
            ("omega", self.omega),
            ("theta1", self.theta1),
            ("theta2", self.theta2),
        ] {
            if !unit(v) {
                return Err(Error::config(format!("{name} = {v} must lie in (0, 1]")));
            }
        }
        if !(self.kappa3 > self.kappa2 && self.kappa2 >= 1.0 && 1.0 > self.kappa1 && self.kappa1 > 0.0) {
            return Err(Error::config(format!(
                "need kappa3 > kappa2 >= 1 > kappa1 > 0, got kappa1 = {}, kappa2 = {}, kappa3 = {}",
                self.kappa1, self.kappa2, self.kappa3
            )));
        }
        if !(self.sigma_lower > 0.0 && self.sigma0 >= self.sigma_lower && self.sigma0.is_finite()) {
            return Err(Error::config("need sigma0 >= sigma_lower > 0"));
        }
        if !(1.0 > self.rho2 && self.rho2 >= self.rho1 && self.rho1 > 0.0) {
            return Err(Error::config(format!(
                "need 1 > rho2 >= rho1 > 0, got rho1 = {}, rho2 = {}",
                self.rho1, self.rho2
            )));
        }
        if !(self.c_sub > 0.0 && self.c_meo > 0.0) {
            return Err(Error::config("c_sub and c_meo must be positive"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config("delta must lie in (0, 1)"));
        }
        if !(self.perturbation >= 0.0 && self.perturbation.is_finite()) {
            return Err(Error::config("perturbation must be a nonnegative number"));
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

/// σ update: very successful → `max(σ_lower, κ₁σ)`, successful → `σ`, otherwise `κ₂σ`.
pub fn update_sigma(sigma: f64, rho: f64, cfg: &RarConfig) -> f64 {
    if rho > cfg.rho2 {
        (cfg.kappa1 * sigma).max(cfg.sigma_lower)
    } else if rho >= cfg.rho1 {
        sigma
    } else {
        cfg.kappa2 * sigma
    }
}

/// One subproblem process: Lanczos growth with residual and decrease checks, the
/// regularized-Hessian recalculation, and the oracle call at small gradients.
pub fn rar_subproblem(
    eval: &ObjectiveEval,
    sigma: f64,
    sigma_bar: f64,
    cfg: &RarConfig,
    manifold: &dyn Manifold,
    rng: &mut dyn rand::RngCore,
    counters: &mut Counters,
) -> Result<SubproblemResult> {
    let gn = eval.grad_norm();
    let omega = cfg.omega;
    let k_sub = subproblem_cap(cfg.c_sub, cfg.eps_h);
    let tcd = tcd_threshold(omega.min(cfg.theta1), cfg.eps_h, sigma_bar);
    let hess = eval.hessian.as_ref();
    let hv_start = counters.hess_vec_products;

    let mut st = init_basis(&eval.gradient, true, cfg.perturbation, cfg.eps_g, manifold, rng)?;
    let mut u: Option<DVector<f64>> = None;
    let mut max_flag = true;
    let mut iters = 0;
    for _ in 0..k_sub {
        if !st.lanczos_extend(hess, counters) {
            break;
        }
        iters += 1;
        let gr = st.reduced_gradient();
        let sol = solve_reduced_ar(st.tridiagonal(), &gr, sigma, omega)?;
        let un = sol.u.norm();
        let decrease = -gr.dot(&sol.u) - 0.5 * st.curvature(&sol.u);
        let tc1 = gn > cfg.eps_g && tc1_holds(st.residual_norm(&sol.u, sigma * un.powf(omega)), un, cfg.theta1);
        u = Some(sol.u);
        if tc1 || decrease >= tcd {
            max_flag = false;
            break;
        }
    }
    let mut u = u.ok_or_else(|| Error::domain("tangent space has dimension zero"))?;

    let outcome = match (max_flag, gn > cfg.eps_g) {
        (true, false) => SubproblemOutcome::Terminate {
            certificate: st.tridiagonal().min_eigenvalue(),
            warning: None,
        },
        (true, true) => {
            let shift = 2.0 * cfg.eps_h;
            let mut extra = 0;
            loop {
                let gr = st.reduced_gradient();
                let sol = solve_reduced_ar(&st.tridiagonal().shifted(shift), &gr, sigma, omega)?;
                let un = sol.u.norm();
                let ok = tc1_holds(st.residual_norm(&sol.u, shift + sigma * un.powf(omega)), un, cfg.theta1);
                u = sol.u;
                if ok || extra >= k_sub || !st.lanczos_extend(hess, counters) {
                    break;
                }
                extra += 1;
            }
            iters += extra;
            SubproblemOutcome::Step {
                eta: st.lift(&u)?,
                kind: StepKind::Recalculated,
                on_boundary: false,
            }
        }
        (false, false) => match meo_run(hess, &eval.gradient, &cfg.meo_params(), manifold, rng, counters)? {
            MeoOutcome::Certified { lambda_est } => SubproblemOutcome::Terminate {
                certificate: lambda_est,
                warning: None,
            },
            MeoOutcome::NegativeCurvature { .. } => SubproblemOutcome::Step {
                eta: st.lift(&u)?,
                kind: StepKind::Krylov,
                on_boundary: false,
            },
        },
        (false, true) => SubproblemOutcome::Step {
            eta: st.lift(&u)?,
            kind: StepKind::Krylov,
            on_boundary: false,
        },
    };

    let used = counters.hess_vec_products - hv_start;
    let cap = 2 * k_sub + meo_budget(manifold.dim(), cfg.eps_h, cfg.delta, cfg.c_meo) + 1;
    assert!(used as usize <= cap, "subproblem used {used} Hessian products, cap {cap}");
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

/// RAR state machine over one run.
pub struct RarSolver<'a> {
    problem: &'a dyn Objective,
    cfg: RarConfig,
    seed: u64,
    rng: ChaCha8Rng,
    eval: ObjectiveEval,
    sigma: f64,
    sigma_max_seen: f64,
    beta_h: f64,
    counters: Counters,
    records: Vec<IterationRecord>,
    warnings: Vec<String>,
    certificate: Option<f64>,
}

impl<'a> RarSolver<'a> {
    pub fn new(problem: &'a dyn Objective, cfg: RarConfig, x0: ManifoldPoint, seed: u64) -> Result<Self> {
        cfg.validate()?;
        problem.manifold().check_point(&x0)?;
        let mut counters = Counters::default();
        let eval = problem.evaluate(&Arc::new(x0), &mut counters)?;
        Ok(Self {
            problem,
            sigma: cfg.sigma0,
            sigma_max_seen: cfg.sigma0,
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

    pub fn sigma(&self) -> f64 {
        self.sigma
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

    /// Running estimate of `‖H‖` over the run.
    pub fn beta_h(&self) -> f64 {
        self.beta_h
    }

    pub fn step(&mut self) -> Result<StepOutcome> {
        let manifold = self.problem.manifold();
        let cfg = &self.cfg;
        let k = self.records.len();
        let gn = self.eval.grad_norm();
        let f = self.eval.value;
        let sigma = self.sigma;

        let sub = rar_subproblem(
            &self.eval,
            sigma,
            self.sigma_max_seen,
            cfg,
            manifold,
            &mut self.rng,
            &mut self.counters,
        )?;
        self.beta_h = self.beta_h.max(sub.op_norm_est);
        let (mut eta, mut kind) = match sub.outcome {
            SubproblemOutcome::Terminate { certificate, warning } => {
                if let Some(w) = warning {
                    warn!("{w}");
                    self.warnings.push(w);
                }
                self.certificate = Some(certificate);
                debug!("rar: terminating at k = {k}, |g| = {gn:.3e}, lambda estimate {certificate:.3e}");
                return Ok(StepOutcome::Terminated { certificate });
            }
            SubproblemOutcome::Step { eta, kind, .. } => (eta, kind),
        };

        // Cauchy comparison on the model actually being minimized
        let model = ModelAt::new(&self.eval, Regularizer::ArPower { sigma, omega: cfg.omega });
        let h_eta = self.eval.hessian.apply(&eta.coords, &mut self.counters);
        let mut curv = eta.coords.dot(&h_eta);
        let g_hg = self.eval.gradient.coords.dot(&self.eval.hessian.apply(&self.eval.gradient.coords, &mut self.counters));
        let (cauchy, cauchy_curv) = if gn > 0.0 {
            let tau = model.cauchy_step_length(gn, g_hg);
            (self.eval.gradient.scaled(-tau), tau * tau * g_hg)
        } else {
            (self.eval.gradient.scaled(0.0), 0.0)
        };
        let m_cauchy = model.value_from_curvature(&cauchy, cauchy_curv);
        if !tcc_holds(model.value_from_curvature(&eta, curv), m_cauchy, f) {
            debug!("rar k={k}: {kind:?} step failed the Cauchy comparison; using the Cauchy point");
            eta = cauchy;
            curv = cauchy_curv;
            kind = StepKind::Cauchy;
        }
        let step_norm = eta.norm();
        if step_norm > 0.0 {
            self.beta_h = self.beta_h.max(h_eta.norm() / eta.norm().max(f64::MIN_POSITIVE));
        }

        let decrease = model_decrease(&self.eval, &eta, curv);
        let reg_value = model.reg.value(step_norm);
        let trial = manifold.retract(&self.eval.point, &eta, cfg.retraction)?;
        let f_trial = self.problem.value(&trial, &mut self.counters)?;
        let r = rho(f, f_trial, decrease);
        let success = r >= cfg.rho1;
        let sigma_next = update_sigma(sigma, r, cfg);

        let beta = if kind == StepKind::Recalculated {
            self.beta_h + 2.0 * cfg.eps_h
        } else {
            self.beta_h
        };
        let step_bound_ok = kind == StepKind::Recalculated
            || step_norm <= step_norm_bound(gn, self.beta_h, sigma, cfg.omega) * (1.0 + 1e-10);
        let gradient_bound_ok =
            gn <= (beta * step_norm + sigma * step_norm.powf(1.0 + cfg.omega)) * (1.0 + 1e-10) + 1e-300;
        let cauchy_bound_ok = gn == 0.0
            || f - m_cauchy >= cauchy_decrease_lower_bound(gn, self.beta_h, sigma, cfg.omega) * (1.0 - 1e-10);
        if !step_bound_ok || !gradient_bound_ok || !cauchy_bound_ok {
            debug!(
                "rar k={k}: bound check step={step_bound_ok} gradient={gradient_bound_ok} cauchy={cauchy_bound_ok} (beta_h estimate {:.3e})",
                self.beta_h
            );
        }

        if success {
            self.eval = self.problem.evaluate(&Arc::new(trial), &mut self.counters)?;
        }
        self.sigma = sigma_next;
        self.sigma_max_seen = self.sigma_max_seen.max(sigma_next);

        let record = IterationRecord {
            k,
            grad_norm: gn,
            f,
            param: sigma,
            param_next: sigma_next,
            step_norm,
            rho: r,
            success,
            f_trial,
            model_decrease: decrease,
            reg_value,
            on_boundary: false,
            step_kind: kind,
            subproblem_iters: sub.iters,
            hv_products_cumulative: self.counters.hess_vec_products,
            step_bound_ok,
            gradient_bound_ok,
            cauchy_bound_ok,
        };
        debug!(
            "rar k={k} f={f:.10e} |g|={gn:.3e} sigma={sigma:.3e} |eta|={step_norm:.3e} rho={r:.3} {kind:?} iters={}",
            sub.iters
        );
        self.records.push(record.clone());
        Ok(StepOutcome::Iteration(record))
    }

    /// Steps until termination or the outer budget runs out.
    pub fn run(mut self) -> Result<RunReport> {
        while self.records.len() < self.cfg.max_outer {
            if let StepOutcome::Terminated { .. } = self.step()? {
                return Ok(self.into_report(Status::Converged));
            }
        }
        warn!("rar: outer budget of {} iterations exhausted", self.cfg.max_outer);
        Ok(self.into_report(Status::BudgetExhausted))
    }

    fn into_report(self, status: Status) -> RunReport {
        RunReport {
            problem: self.problem.name(),
            seed: self.seed,
            config: SolverConfig::Rar(self.cfg),
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

pub fn rar_solve(problem: &dyn Objective, cfg: &RarConfig, x0: ManifoldPoint, seed: u64) -> Result<RunReport> {
    RarSolver::new(problem, cfg.clone(), x0, seed)?.run()
}
