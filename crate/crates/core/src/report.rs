//! Per-iteration records and run reports shared by both solvers.

use serde::{Deserialize, Serialize};

use crate::manifold::TangentVector;
use crate::objective::Counters;
use crate::rar::RarConfig;
use crate::rtr::RtrConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Rar,
    Rtr,
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverKind::Rar => "rar",
            SolverKind::Rtr => "rtr",
        })
    }
}

/// Where an outer step came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// Krylov subspace solution of the model.
    Krylov,
    /// Krylov solution of the model with `H + 2ε_H I`.
    Recalculated,
    /// Scaled oracle direction of negative curvature.
    NegativeCurvature,
    /// Cauchy point substituted for a step that failed the Cauchy comparison.
    Cauchy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    BudgetExhausted,
}

/// One outer iteration. `param` is `σ_k` (RAR) or `Δ_k` (RTR).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub grad_norm: f64,
    pub f: f64,
    pub param: f64,
    pub param_next: f64,
    pub step_norm: f64,
    #[serde(with = "float_or_string")]
    pub rho: f64,
    pub success: bool,
    #[serde(with = "float_or_string")]
    pub f_trial: f64,
    /// Unregularized model decrease `m(0) − m(η)`.
    pub model_decrease: f64,
    /// Regularizer value `φ(η)`.
    pub reg_value: f64,
    pub on_boundary: bool,
    pub step_kind: StepKind,
    pub subproblem_iters: usize,
    pub hv_products_cumulative: u64,
    /// Step-size bound held (always true where it does not apply).
    pub step_bound_ok: bool,
    /// Gradient bound `‖g‖ ≤ β_H‖η‖ + ‖∇φ(η)‖` held (always true where it does not apply).
    pub gradient_bound_ok: bool,
    /// Cauchy decrease lower bound held (always true where it does not apply).
    pub cauchy_bound_ok: bool,
}

/// Solver parameters as used for the run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "solver", rename_all = "lowercase")]
pub enum SolverConfig {
    Rar(RarConfig),
    Rtr(RtrConfig),
}

impl SolverConfig {
    pub fn kind(&self) -> SolverKind {
        match self {
            SolverConfig::Rar(_) => SolverKind::Rar,
            SolverConfig::Rtr(_) => SolverKind::Rtr,
        }
    }

    pub fn eps_g(&self) -> f64 {
        match self {
            SolverConfig::Rar(c) => c.eps_g,
            SolverConfig::Rtr(c) => c.eps_g,
        }
    }

    pub fn eps_h(&self) -> f64 {
        match self {
            SolverConfig::Rar(c) => c.eps_h,
            SolverConfig::Rtr(c) => c.eps_h,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub problem: String,
    pub seed: u64,
    pub config: SolverConfig,
    pub status: Status,
    pub records: Vec<IterationRecord>,
    pub final_point: Vec<f64>,
    pub final_value: f64,
    pub final_grad_norm: f64,
    /// Lower estimate of `λ_min(H)` at the final iterate backing the stopping decision.
    pub certificate: Option<f64>,
    pub counters: Counters,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn solver(&self) -> SolverKind {
        self.config.kind()
    }

    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    /// `|K|`.
    pub fn outer_iters(&self) -> usize {
        self.records.len()
    }

    /// `|S|`.
    pub fn successful_iters(&self) -> usize {
        self.records.iter().filter(|r| r.success).count()
    }

    /// `|U|`.
    pub fn unsuccessful_iters(&self) -> usize {
        self.records.iter().filter(|r| !r.success).count()
    }

    /// Largest `σ_k` (or `Δ_k`) seen, including the final value.
    pub fn max_param(&self) -> Option<f64> {
        self.records.iter().flat_map(|r| [r.param, r.param_next]).reduce(f64::max)
    }
}

/// What one subproblem solve produced.
#[derive(Clone, Debug)]
pub enum SubproblemOutcome {
    Step {
        eta: TangentVector,
        kind: StepKind,
        on_boundary: bool,
    },
    /// Stop the outer loop; `certificate` estimates `λ_min(H)`.
    Terminate {
        certificate: f64,
        warning: Option<String>,
    },
}

#[derive(Clone, Debug)]
pub struct SubproblemResult {
    pub outcome: SubproblemOutcome,
    /// Lanczos steps taken (both passes on the recalculation path).
    pub iters: usize,
    /// Largest `‖Hq‖` over unit Lanczos vectors.
    pub op_norm_est: f64,
}

/// Serializes non-finite floats as strings (`"inf"`, `"-inf"`, `"NaN"`) so JSON can carry them.
pub mod float_or_string {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    struct FloatVisitor;

    impl Visitor<'_> for FloatVisitor {
        type Value = f64;

        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("a number or one of \"inf\", \"-inf\", \"NaN\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            v.parse().map_err(|_| E::invalid_value(de::Unexpected::Str(v), &self))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(FloatVisitor)
    }
}
