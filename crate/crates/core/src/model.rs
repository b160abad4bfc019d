//! Regularized second-order models `m̄(η) = m(η) + φ(η)` around an iterate, the
//! Cauchy point, the acceptance ratio ρ and the subproblem termination tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::TangentVector;
use crate::objective::{Counters, ObjectiveEval};

/// Relative slack on the trust-region constraint.
const RADIUS_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Regularizer {
    /// `φ(η) = σ/(2+ω)·‖η‖^{2+ω}`.
    ArPower { sigma: f64, omega: f64 },
    /// `φ(η) = ε_H‖η‖²/4` with the hard constraint `‖η‖ ≤ Δ`.
    TrQuad { eps_h: f64, radius: f64 },
}

impl Regularizer {
    pub fn value(&self, eta_norm: f64) -> f64 {
        match *self {
            Regularizer::ArPower { sigma, omega } => sigma / (2.0 + omega) * eta_norm.powf(2.0 + omega),
            Regularizer::TrQuad { eps_h, .. } => 0.25 * eps_h * eta_norm * eta_norm,
        }
    }

    /// `∇φ(η) = c(‖η‖)·η`; returns the scalar `c`.
    pub fn grad_factor(&self, eta_norm: f64) -> f64 {
        match *self {
            Regularizer::ArPower { sigma, omega } => sigma * eta_norm.powf(omega),
            Regularizer::TrQuad { eps_h, .. } => 0.5 * eps_h,
        }
    }

    /// Smallest eigenvalue of `Hess φ(η)`. For the power term
    /// `Hess φ = σ‖η‖^ω (I + ω ηηᵀ/‖η‖²)`, whose spectrum is `{σ‖η‖^ω, (1+ω)σ‖η‖^ω}`.
    pub fn hess_min_eig(&self, eta_norm: f64) -> f64 {
        self.grad_factor(eta_norm)
    }

    pub fn hess_max_eig(&self, eta_norm: f64) -> f64 {
        match *self {
            Regularizer::ArPower { omega, .. } => (1.0 + omega) * self.grad_factor(eta_norm),
            Regularizer::TrQuad { .. } => self.grad_factor(eta_norm),
        }
    }

    pub fn radius(&self) -> Option<f64> {
        match *self {
            Regularizer::TrQuad { radius, .. } => Some(radius),
            Regularizer::ArPower { .. } => None,
        }
    }
}

/// Inexactness parameters of the subproblem termination criteria.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerminationParams {
    pub theta1: f64,
    pub theta2: f64,
    pub eps_g: f64,
    pub eps_h: f64,
    /// Minimum unregularized model decrease accepted by the decrease test.
    pub tcd_threshold: f64,
}

impl TerminationParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v <= 1.0;
        if !unit(self.theta1) || !unit(self.theta2) {
            return Err(Error::config("theta1 and theta2 must lie in (0, 1]"));
        }
        if !unit(self.eps_g) || !unit(self.eps_h) {
            return Err(Error::config("eps_g and eps_h must lie in (0, 1]"));
        }
        if !(self.tcd_threshold >= 0.0) {
            return Err(Error::config("tcd_threshold must be nonnegative"));
        }
        Ok(())
    }
}

/// `α ε_H^{(2+α)/α} / (12 σ̄^{2/α})`.
pub fn tcd_threshold(alpha: f64, eps_h: f64, sigma_bar: f64) -> f64 {
    alpha * eps_h.powf((2.0 + alpha) / alpha) / (12.0 * sigma_bar.powf(2.0 / alpha))
}

/// The regularized model at one iterate. `shift` replaces `H` by `H + shift·I`
/// (used by the regularized-Hessian recalculation).
#[derive(Clone, Copy, Debug)]
pub struct ModelAt<'a> {
    pub eval: &'a ObjectiveEval,
    pub reg: Regularizer,
    pub shift: f64,
}

impl<'a> ModelAt<'a> {
    pub fn new(eval: &'a ObjectiveEval, reg: Regularizer) -> Self {
        Self { eval, reg, shift: 0.0 }
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self
    }

    fn check(&self, eta: &TangentVector) -> Result<()> {
        if !eta.is_based_at(&self.eval.point) {
            return Err(Error::contract("model evaluated at a vector from another tangent space"));
        }
        if let Some(radius) = self.reg.radius() {
            if eta.norm() > radius * (1.0 + RADIUS_SLACK) {
                return Err(Error::domain(format!(
                    "step norm {} exceeds trust-region radius {radius}",
                    eta.norm()
                )));
            }
        }
        Ok(())
    }

    /// `m̄(η)` given `⟨η, Hη⟩` (without the shift) computed elsewhere.
    pub fn value_from_curvature(&self, eta: &TangentVector, eta_h_eta: f64) -> f64 {
        let n2 = eta.coords.norm_squared();
        self.eval.value
            + self.eval.gradient.coords.dot(&eta.coords)
            + 0.5 * (eta_h_eta + self.shift * n2)
            + self.reg.value(n2.sqrt())
    }

    /// `m̄(η)`; costs one Hessian-vector product.
    pub fn value(&self, eta: &TangentVector, counters: &mut Counters) -> Result<f64> {
        self.check(eta)?;
        let h_eta = self.eval.hessian.apply(&eta.coords, counters);
        Ok(self.value_from_curvature(eta, eta.coords.dot(&h_eta)))
    }

    /// `grad m̄(η) = g + (H + shift)η + ∇φ(η)`; costs one Hessian-vector product.
    pub fn grad(&self, eta: &TangentVector, counters: &mut Counters) -> Result<TangentVector> {
        if !eta.is_based_at(&self.eval.point) {
            return Err(Error::contract("model gradient at a vector from another tangent space"));
        }
        let h_eta = self.eval.hessian.apply(&eta.coords, counters);
        let c = self.shift + self.reg.grad_factor(eta.norm());
        Ok(TangentVector::new(
            &self.eval.gradient.coords + h_eta + &eta.coords * c,
            eta.base.clone(),
        ))
    }

    /// Minimizer of `m̄` along `span{g}`. Costs one Hessian-vector product when `g ≠ 0`.
    pub fn cauchy_point(&self, counters: &mut Counters) -> TangentVector {
        let g = &self.eval.gradient;
        let gn = g.norm();
        if gn == 0.0 {
            return TangentVector::zero(g.base.clone());
        }
        let g_hg = g.coords.dot(&self.eval.hessian.apply(&g.coords, counters));
        let tau = self.cauchy_step_length(gn, g_hg);
        g.scaled(-tau)
    }

    /// Step length `τ*` such that `−τ* g` minimizes the model along the gradient.
    pub fn cauchy_step_length(&self, gnorm: f64, g_hg: f64) -> f64 {
        let g2 = gnorm * gnorm;
        let curv = g_hg + self.shift * g2;
        match self.reg {
            Regularizer::TrQuad { eps_h, radius } => {
                let c = curv + 0.5 * eps_h * g2;
                let boundary = radius / gnorm;
                if c <= 0.0 {
                    boundary
                } else {
                    (g2 / c).min(boundary)
                }
            }
            Regularizer::ArPower { sigma, omega } => {
                // h'(τ) = −‖g‖² + τ·curv + σ τ^{1+ω} ‖g‖^{2+ω}; h'(0) < 0 and h' → ∞,
                // with a single sign change on τ > 0.
                let gp = gnorm.powf(2.0 + omega);
                let dh = |t: f64| -g2 + t * curv + sigma * t.powf(1.0 + omega) * gp;
                let d2h = |t: f64| curv + sigma * (1.0 + omega) * t.powf(omega) * gp;
                let mut lo = 0.0;
                let mut hi = 1.0 / gnorm.max(1e-300);
                while dh(hi) <= 0.0 {
                    lo = hi;
                    hi *= 2.0;
                }
                safeguarded_root(dh, d2h, lo, hi, 1e-12)
            }
        }
    }
}

/// Safeguarded Newton/bisection for an increasing-through-zero function on `[lo, hi]`
/// with `f(lo) ≤ 0 < f(hi)`. Stops when the bracket is relatively smaller than `rtol`.
pub(crate) fn safeguarded_root(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    rtol: f64,
) -> f64 {
    let mut t = 0.5 * (lo + hi);
    for _ in 0..300 {
        let v = f(t);
        if v == 0.0 {
            return t;
        }
        if v < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo <= rtol * hi.abs() {
            return 0.5 * (lo + hi);
        }
        let d = df(t);
        let newton = t - v / d;
        if d > 0.0 && newton > lo && newton < hi {
            if (newton - t).abs() <= rtol * newton.abs() {
                return newton;
            }
            t = newton;
        } else {
            t = 0.5 * (lo + hi);
        }
    }
    t
}

/// Unregularized decrease `m(0) − m(η) = −⟨g, η⟩ − ½⟨η, Hη⟩`.
pub fn model_decrease(eval: &ObjectiveEval, eta: &TangentVector, eta_h_eta: f64) -> f64 {
    -eval.gradient.coords.dot(&eta.coords) - 0.5 * eta_h_eta
}

/// Acceptance ratio `(f(x) − f(R_x(η))) / (m(0) − m(η))`; a nonpositive or
/// non-finite denominator yields `−∞` so the step is rejected.
pub fn rho(f_x: f64, f_next: f64, decrease: f64) -> f64 {
    if !(decrease > 0.0) || !f_next.is_finite() {
        return f64::NEG_INFINITY;
    }
    (f_x - f_next) / decrease
}

/// Model-gradient residual test on precomputed norms: `‖grad m̄(η)‖ ≤ ‖η‖^{1+θ₁}`; false for `η = 0`.
pub fn tc1_holds(residual_norm: f64, step_norm: f64, theta1: f64) -> bool {
    step_norm > 0.0 && residual_norm <= step_norm.powf(1.0 + theta1)
}

pub fn check_tc1(m: &ModelAt<'_>, eta: &TangentVector, params: &TerminationParams, counters: &mut Counters) -> Result<bool> {
    let r = m.grad(eta, counters)?;
    Ok(tc1_holds(r.norm(), eta.norm(), params.theta1))
}

/// Curvature test with `λ_min(H)` replaced by an estimate (typically `λ_min(T_j)` of a Krylov basis).
pub fn check_tc2(m: &ModelAt<'_>, eta: &TangentVector, params: &TerminationParams, lambda_min_estimate: f64) -> bool {
    let n = eta.norm();
    lambda_min_estimate + m.shift + m.reg.hess_min_eig(n) >= -n.powf(params.theta2)
}

/// Cauchy comparison: `m̄(η) ≤ m̄(η^C)` up to a `1e−12·max(1, |f|)` slack.
pub fn check_tcc(m: &ModelAt<'_>, eta: &TangentVector, counters: &mut Counters) -> Result<bool> {
    let cauchy = m.cauchy_point(counters);
    let mc = m.value(&cauchy, counters)?;
    let me = m.value(eta, counters)?;
    Ok(tcc_holds(me, mc, m.eval.value))
}

pub fn tcc_holds(model_at_step: f64, model_at_cauchy: f64, f_x: f64) -> bool {
    model_at_step <= model_at_cauchy + 1e-12 * f_x.abs().max(1.0)
}

/// Decrease test: unregularized decrease at least `params.tcd_threshold`. Only meaningful for
/// the power regularizer.
pub fn check_tcd(m: &ModelAt<'_>, eta: &TangentVector, params: &TerminationParams, counters: &mut Counters) -> Result<bool> {
    if !matches!(m.reg, Regularizer::ArPower { .. }) {
        return Err(Error::contract("the decrease test applies to the adaptive power regularizer only"));
    }
    if !eta.is_based_at(&m.eval.point) {
        return Err(Error::contract("the decrease test was evaluated at a vector from another tangent space"));
    }
    let h_eta = m.eval.hessian.apply(&eta.coords, counters);
    let dec = model_decrease(m.eval, eta, eta.coords.dot(&h_eta));
    Ok(dec >= params.tcd_threshold)
}

/// Lower bound on the Cauchy decrease of the power-regularized model:
/// `‖g‖² / (4 max(β_H, σ^{1/(1+ω)} ‖g‖^{ω/(1+ω)}))`.
pub fn cauchy_decrease_lower_bound(gnorm: f64, beta_h: f64, sigma: f64, omega: f64) -> f64 {
    let denom = beta_h.max(sigma.powf(1.0 / (1.0 + omega)) * gnorm.powf(omega / (1.0 + omega)));
    gnorm * gnorm / (4.0 * denom)
}

/// Upper bound on Cauchy-compliant steps of the power-regularized model:
/// `(3(β_H+1)/σ)^{1/ω} ∨ (‖g‖ ∧ (6‖g‖/σ)^{1/(1+ω)})`.
pub fn step_norm_bound(gnorm: f64, beta_h: f64, sigma: f64, omega: f64) -> f64 {
    let a = (3.0 * (beta_h + 1.0) / sigma).powf(1.0 / omega);
    let b = gnorm.min((6.0 * gnorm / sigma).powf(1.0 / (1.0 + omega)));
    a.max(b)
}
