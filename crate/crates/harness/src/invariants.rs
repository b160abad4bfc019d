//! Re-verification of a finished run from its trace alone.

use serde::{Deserialize, Serialize};

use rarn::rar::update_sigma;
use rarn::report::{RunReport, SolverConfig, Status};
use rarn::rtr::update_radius;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    /// The algorithm's contract is broken.
    Hard,
    /// A bound built on estimated constants (`β_H`) did not hold.
    Soft,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Records are numbered `0, 1, …` and each starts from the previous update.
    Indexing,
    /// `σ`/`Δ` update and the success flag follow from `ρ`.
    ParamUpdate,
    /// Non-finite or negative quantities where finite non-negative ones are required.
    Finite,
    /// `f` never increases and moves only on accepted steps.
    MonotoneF,
    /// `m(0) − m(η) ≥ φ(η)` on accepted steps.
    CauchyDecrease,
    /// RTR: `f(x) − f(R_x(η)) ≥ ϱ ε_H ‖η‖²/4` on accepted steps.
    TrustRegionDecrease,
    /// Cumulative Hessian-vector products never decrease and stay within the total.
    CounterConservation,
    /// `|K| = |S| + |U|` and the final status agrees with the trace.
    Status,
    StepBound,
    GradientBound,
    CauchyBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Iteration, if the violation belongs to one.
    pub k: Option<usize>,
    pub rule: Rule,
    pub severity: Severity,
    pub detail: String,
}

impl Violation {
    fn hard(k: Option<usize>, rule: Rule, detail: String) -> Self {
        Self {
            k,
            rule,
            severity: Severity::Hard,
            detail,
        }
    }

    fn soft(k: usize, rule: Rule, detail: &str) -> Self {
        Self {
            k: Some(k),
            rule,
            severity: Severity::Soft,
            detail: detail.to_string(),
        }
    }
}

const REL_TOL: f64 = 1e-10;

fn ge_tol(lhs: f64, rhs: f64, scale: f64) -> bool {
    lhs >= rhs - REL_TOL * scale.abs().max(rhs.abs()).max(f64::MIN_POSITIVE)
}

/// Checks a report against the solver rules. An empty list means the trace is clean.
pub fn verify_invariants(report: &RunReport) -> Vec<Violation> {
    let mut out = Vec::new();
    let recs = &report.records;

    for (i, r) in recs.iter().enumerate() {
        let k = Some(r.k);
        if r.k != i {
            out.push(Violation::hard(k, Rule::Indexing, format!("record {i} is numbered {}", r.k)));
        }
        if let Some(prev) = i.checked_sub(1).map(|j| &recs[j]) {
            if r.param != prev.param_next {
                out.push(Violation::hard(
                    k,
                    Rule::Indexing,
                    format!("parameter {:e} does not continue the previous update {:e}", r.param, prev.param_next),
                ));
            }
            let expect_f = if prev.success { prev.f_trial } else { prev.f };
            if r.f != expect_f {
                out.push(Violation::hard(
                    k,
                    Rule::MonotoneF,
                    format!("f = {:e} but the previous step leaves {expect_f:e}", r.f),
                ));
            }
            if r.f > prev.f {
                out.push(Violation::hard(k, Rule::MonotoneF, format!("f rose from {:e} to {:e}", prev.f, r.f)));
            }
            if r.hv_products_cumulative < prev.hv_products_cumulative {
                out.push(Violation::hard(
                    k,
                    Rule::CounterConservation,
                    format!("cumulative products fell from {} to {}", prev.hv_products_cumulative, r.hv_products_cumulative),
                ));
            }
        }

        if !(r.f.is_finite() && r.grad_norm.is_finite() && r.grad_norm >= 0.0 && r.step_norm.is_finite() && r.step_norm >= 0.0)
            || !(r.param.is_finite() && r.param > 0.0 && r.param_next.is_finite() && r.param_next > 0.0)
            || r.rho.is_nan()
            || !(r.model_decrease.is_finite() && r.reg_value.is_finite() && r.reg_value >= 0.0)
        {
            out.push(Violation::hard(k, Rule::Finite, format!("non-finite or negative entries in {r:?}")));
            continue;
        }

        let (expect_next, expect_success, threshold) = match &report.config {
            SolverConfig::Rar(c) => (update_sigma(r.param, r.rho, c), r.rho >= c.rho1, c.rho1),
            SolverConfig::Rtr(c) => (update_radius(r.param, r.rho, r.step_norm, c), r.rho >= c.rho_accept, c.rho_accept),
        };
        if r.param_next != expect_next {
            out.push(Violation::hard(
                k,
                Rule::ParamUpdate,
                format!("rho = {:.6} moves {:e} to {:e}, rule gives {expect_next:e}", r.rho, r.param, r.param_next),
            ));
        }
        if r.success != expect_success {
            out.push(Violation::hard(
                k,
                Rule::ParamUpdate,
                format!("success = {} with rho = {:.6} and threshold {threshold}", r.success, r.rho),
            ));
        }

        if r.success {
            if !(r.f_trial <= r.f) {
                out.push(Violation::hard(
                    k,
                    Rule::MonotoneF,
                    format!("accepted step raises f from {:e} to {:e}", r.f, r.f_trial),
                ));
            }
            if !ge_tol(r.model_decrease, r.reg_value, r.model_decrease) {
                out.push(Violation::hard(
                    k,
                    Rule::CauchyDecrease,
                    format!("model decrease {:e} below regularizer {:e}", r.model_decrease, r.reg_value),
                ));
            }
            if let SolverConfig::Rtr(c) = &report.config {
                let need = c.rho_accept * c.eps_h * r.step_norm * r.step_norm / 4.0;
                if !ge_tol(r.f - r.f_trial, need, r.f) {
                    out.push(Violation::hard(
                        k,
                        Rule::TrustRegionDecrease,
                        format!("decrease {:e} below rho*eps_h*|eta|^2/4 = {need:e}", r.f - r.f_trial),
                    ));
                }
            }
        }

        if !r.step_bound_ok {
            out.push(Violation::soft(r.k, Rule::StepBound, "step norm above its bound"));
        }
        if !r.gradient_bound_ok {
            out.push(Violation::soft(r.k, Rule::GradientBound, "gradient bound failed"));
        }
        if !r.cauchy_bound_ok {
            out.push(Violation::soft(r.k, Rule::CauchyBound, "Cauchy decrease below its lower bound"));
        }
    }

    if let Some(last) = recs.last() {
        if last.hv_products_cumulative > report.counters.hess_vec_products {
            out.push(Violation::hard(
                Some(last.k),
                Rule::CounterConservation,
                format!(
                    "trace reports {} products, counters only {}",
                    last.hv_products_cumulative, report.counters.hess_vec_products
                ),
            ));
        }
        let expect_f = if last.success { last.f_trial } else { last.f };
        if report.final_value != expect_f {
            out.push(Violation::hard(
                None,
                Rule::MonotoneF,
                format!("final value {:e} does not match the last step ({expect_f:e})", report.final_value),
            ));
        }
    }

    if report.successful_iters() + report.unsuccessful_iters() != report.outer_iters() {
        out.push(Violation::hard(None, Rule::Status, "successful and unsuccessful counts do not add up".into()));
    }
    let max_outer = match &report.config {
        SolverConfig::Rar(c) => c.max_outer,
        SolverConfig::Rtr(c) => c.max_outer,
    };
    match report.status {
        Status::Converged => {
            if report.final_grad_norm > report.config.eps_g() {
                out.push(Violation::hard(
                    None,
                    Rule::Status,
                    format!("converged with |g| = {:e} above eps_g", report.final_grad_norm),
                ));
            }
            if report.certificate.is_none() {
                out.push(Violation::hard(None, Rule::Status, "converged without a curvature certificate".into()));
            }
        }
        Status::BudgetExhausted => {
            if report.outer_iters() != max_outer {
                out.push(Violation::hard(
                    None,
                    Rule::Status,
                    format!("budget exhausted after {} of {max_outer} iterations", report.outer_iters()),
                ));
            }
        }
    }
    out
}

pub fn hard_count(v: &[Violation]) -> usize {
    v.iter().filter(|v| v.severity == Severity::Hard).count()
}
