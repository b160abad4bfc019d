//! Experiment configuration files.
//!
//! A config is TOML: top-level keys `seed`, `solver`, `alpha`, then the tables
//! `[problem]`, `[start]`, `[rar]`, `[rtr]` and `[sweep]`. Every solver key is
//! optional and defaults to the values in `reference.toml` at the workspace root.
//!
//! When the active solver table does not set `eps_h`, it is coupled to `eps_g` as
//! `ε_H = ε_g^{α/(1+α)}`, with `α` taken from `alpha` or else from the problem
//! (1 for Rayleigh and quadratics, `mu` for the Hölder well).

use std::path::Path;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use rarn::manifold::ManifoldPoint;
use rarn::objective::{planted_matrix, Objective, Problem};
use rarn::rar::RarConfig;
use rarn::report::{SolverConfig, SolverKind};
use rarn::rtr::RtrConfig;

use crate::{invalid, HarnessError, Result};

/// Offset between a run seed and the seed of its random starting point.
pub const START_SEED_OFFSET: u64 = 1000;
pub const DEFAULT_MATRIX_SEED: u64 = 42;

fn default_solver() -> SolverKind {
    SolverKind::Rtr
}

fn default_true() -> bool {
    true
}

fn default_matrix_seed() -> u64 {
    DEFAULT_MATRIX_SEED
}

fn default_mu() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    /// `xᵀAx` on the sphere in ℝⁿ; `A` has eigenvalues `spectrum` (default `1, …, n`).
    Rayleigh {
        n: usize,
        #[serde(default)]
        spectrum: Option<Vec<f64>>,
        /// Conjugate by a random orthogonal matrix; otherwise `A` is diagonal.
        #[serde(default = "default_true")]
        rotate: bool,
        #[serde(default = "default_matrix_seed")]
        matrix_seed: u64,
    },
    /// Hölder well in ℝⁿ; `B` has eigenvalues `spectrum` (default one at −1, the rest in `[0.5, 1.5)`).
    HolderWell {
        n: usize,
        #[serde(default = "default_mu")]
        mu: f64,
        #[serde(default)]
        spectrum: Option<Vec<f64>>,
        /// Default: uniform in `[−1, 1]ⁿ` drawn from `matrix_seed`.
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default = "default_true")]
        rotate: bool,
        #[serde(default = "default_matrix_seed")]
        matrix_seed: u64,
    },
    /// `½xᵀBx + cᵀx` in ℝⁿ; default spectrum `1, …, n` and `c = 1`.
    Quadratic {
        n: usize,
        #[serde(default)]
        spectrum: Option<Vec<f64>>,
        #[serde(default)]
        linear: Option<Vec<f64>>,
        #[serde(default = "default_true")]
        rotate: bool,
        #[serde(default = "default_matrix_seed")]
        matrix_seed: u64,
    },
}

impl ProblemConfig {
    /// Built-in problems selectable by name from the command line.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "rayleigh" => Some(ProblemConfig::Rayleigh {
                n: 100,
                spectrum: None,
                rotate: true,
                matrix_seed: DEFAULT_MATRIX_SEED,
            }),
            "holder_well" => Some(ProblemConfig::HolderWell {
                n: 10,
                mu: 0.5,
                spectrum: None,
                center: None,
                rotate: true,
                matrix_seed: DEFAULT_MATRIX_SEED,
            }),
            "quadratic" => Some(ProblemConfig::Quadratic {
                n: 20,
                spectrum: None,
                linear: None,
                rotate: true,
                matrix_seed: DEFAULT_MATRIX_SEED,
            }),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProblemConfig::Rayleigh { .. } => "rayleigh",
            ProblemConfig::HolderWell { .. } => "holder_well",
            ProblemConfig::Quadratic { .. } => "quadratic",
        }
    }

    pub fn n(&self) -> usize {
        match self {
            ProblemConfig::Rayleigh { n, .. } | ProblemConfig::HolderWell { n, .. } | ProblemConfig::Quadratic { n, .. } => *n,
        }
    }

    /// Hölder exponent of the Hessian used for the default `ε_H` coupling.
    pub fn alpha(&self) -> f64 {
        match self {
            ProblemConfig::HolderWell { mu, .. } => *mu,
            _ => 1.0,
        }
    }

    fn spectrum(&self) -> Vec<f64> {
        let n = self.n();
        let given = match self {
            ProblemConfig::Rayleigh { spectrum, .. }
            | ProblemConfig::HolderWell { spectrum, .. }
            | ProblemConfig::Quadratic { spectrum, .. } => spectrum.clone(),
        };
        given.unwrap_or_else(|| match self {
            ProblemConfig::HolderWell { .. } => (0..n).map(|i| if i == 0 { -1.0 } else { 0.5 + i as f64 / n as f64 }).collect(),
            _ => (1..=n).map(|i| i as f64).collect(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(invalid("problem dimension n must be positive"));
        }
        let spectrum = self.spectrum();
        if spectrum.len() != n {
            return Err(invalid(format!("spectrum has {} entries, expected n = {n}", spectrum.len())));
        }
        let check_len = |what: &str, v: &Option<Vec<f64>>| match v {
            Some(v) if v.len() != n => Err(invalid(format!("{what} has {} entries, expected n = {n}", v.len()))),
            _ => Ok(()),
        };
        match self {
            ProblemConfig::Rayleigh { .. } if n < 2 => Err(invalid("rayleigh needs n >= 2")),
            ProblemConfig::HolderWell { center, .. } => check_len("center", center),
            ProblemConfig::Quadratic { linear, .. } => check_len("linear", linear),
            _ => Ok(()),
        }
    }

    pub fn build(&self) -> Result<Problem> {
        self.validate()?;
        let spectrum = self.spectrum();
        let (rotate, seed) = match self {
            ProblemConfig::Rayleigh { rotate, matrix_seed, .. }
            | ProblemConfig::HolderWell { rotate, matrix_seed, .. }
            | ProblemConfig::Quadratic { rotate, matrix_seed, .. } => (*rotate, *matrix_seed),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = if rotate {
            planted_matrix(&spectrum, Some(&mut rng))
        } else {
            planted_matrix(&spectrum, None)
        };
        let n = self.n();
        let problem = match self {
            ProblemConfig::Rayleigh { .. } => Problem::rayleigh(m)?,
            ProblemConfig::HolderWell { mu, center, .. } => {
                let a = match center {
                    Some(c) => DVector::from_column_slice(c),
                    None => DVector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0)),
                };
                Problem::holder_well(a, *mu, m)?
            }
            ProblemConfig::Quadratic { linear, .. } => {
                let c = linear.as_ref().map_or_else(|| DVector::from_element(n, 1.0), |c| DVector::from_column_slice(c));
                Problem::quadratic(m, c)?
            }
        };
        Ok(problem)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StartConfig {
    /// Random point on the manifold; the seed defaults to the run seed plus 1000.
    Random {
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Explicit coordinates (must lie on the manifold).
    Point { coords: Vec<f64> },
}

impl Default for StartConfig {
    fn default() -> Self {
        StartConfig::Random { seed: None }
    }
}

impl StartConfig {
    pub fn point(&self, problem: &Problem, seed: u64) -> Result<ManifoldPoint> {
        let m = problem.manifold();
        match self {
            StartConfig::Point { coords } => {
                if coords.len() != m.ambient_dim() {
                    return Err(invalid(format!(
                        "start point has {} coordinates, expected {}",
                        coords.len(),
                        m.ambient_dim()
                    )));
                }
                Ok(m.point(DVector::from_column_slice(coords))?)
            }
            StartConfig::Random { seed: Some(s) } => Ok(m.random_point(&mut ChaCha8Rng::seed_from_u64(*s))),
            StartConfig::Random { seed: None } => {
                Ok(m.random_point(&mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(START_SEED_OFFSET))))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Strictly decreasing tolerances.
    pub eps_g: Vec<f64>,
    /// Optional explicit `ε_H` per point; otherwise coupled to `ε_g`.
    #[serde(default)]
    pub eps_h: Option<Vec<f64>>,
    #[serde(default = "default_true")]
    pub parallel: bool,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.eps_g.is_empty() {
            return Err(invalid("sweep.eps_g is empty"));
        }
        if let Some(e) = self.eps_g.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
            return Err(invalid(format!("sweep.eps_g value {e} must lie in (0, 1]")));
        }
        if self.eps_g.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("sweep.eps_g must be strictly decreasing"));
        }
        if let Some(h) = &self.eps_h {
            if h.len() != self.eps_g.len() {
                return Err(invalid(format!("sweep.eps_h has {} entries, sweep.eps_g has {}", h.len(), self.eps_g.len())));
            }
            if let Some(e) = h.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
                return Err(invalid(format!("sweep.eps_h value {e} must lie in (0, 1]")));
            }
        }
        Ok(())
    }
}

/// `ε_H = ε_g^{α/(1+α)}`.
pub fn coupled_eps_h(eps_g: f64, alpha: f64) -> f64 {
    eps_g.powf(alpha / (1.0 + alpha))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_solver")]
    pub solver: SolverKind,
    #[serde(default)]
    pub alpha: Option<f64>,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub start: StartConfig,
    #[serde(default)]
    pub rar: RarConfig,
    #[serde(default)]
    pub rtr: RtrConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(skip)]
    pub rar_eps_h_fixed: bool,
    #[serde(skip)]
    pub rtr_eps_h_fixed: bool,
}

impl ExperimentConfig {
    /// Defaults for every section around the given problem.
    pub fn new(problem: ProblemConfig) -> Self {
        Self {
            seed: 0,
            solver: default_solver(),
            alpha: None,
            problem,
            start: StartConfig::default(),
            rar: RarConfig::default(),
            rtr: RtrConfig::default(),
            sweep: None,
            rar_eps_h_fixed: false,
            rtr_eps_h_fixed: false,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))?;
        let table: toml::Table = toml::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))?;
        let fixed = |section: &str| {
            table
                .get(section)
                .and_then(|t| t.as_table())
                .is_some_and(|t| t.contains_key("eps_h"))
        };
        cfg.rar_eps_h_fixed = fixed("rar");
        cfg.rtr_eps_h_fixed = fixed("rtr");
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            HarnessError::Parse(m) => HarnessError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or_else(|| self.problem.alpha())
    }

    /// Solver parameters for one run at `eps_g`, with `ε_H` from `eps_h`, the
    /// solver table, or the coupling rule, in that order.
    pub fn solver_config_at(&self, eps_g: Option<f64>, eps_h: Option<f64>) -> SolverConfig {
        let alpha = self.alpha();
        let pick = |cfg_g: f64, cfg_h: f64, fixed: bool| {
            let g = eps_g.unwrap_or(cfg_g);
            let h = match eps_h {
                Some(h) => h,
                None if fixed && eps_g.is_none() => cfg_h,
                None => coupled_eps_h(g, alpha),
            };
            (g, h)
        };
        match self.solver {
            SolverKind::Rar => {
                let (g, h) = pick(self.rar.eps_g, self.rar.eps_h, self.rar_eps_h_fixed);
                SolverConfig::Rar(RarConfig { eps_g: g, eps_h: h, ..self.rar.clone() })
            }
            SolverKind::Rtr => {
                let (g, h) = pick(self.rtr.eps_g, self.rtr.eps_h, self.rtr_eps_h_fixed);
                SolverConfig::Rtr(RtrConfig { eps_g: g, eps_h: h, ..self.rtr.clone() })
            }
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        self.solver_config_at(None, None)
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a <= 1.0) {
                return Err(invalid(format!("alpha = {a} must lie in (0, 1]")));
            }
        }
        validate_solver(&self.solver_config())?;
        if let Some(sweep) = &self.sweep {
            sweep.validate()?;
            for (i, &g) in sweep.eps_g.iter().enumerate() {
                let h = sweep.eps_h.as_ref().map(|h| h[i]);
                validate_solver(&self.solver_config_at(Some(g), h))?;
            }
        }
        if let StartConfig::Point { coords } = &self.start {
            let ambient = self.problem.n();
            if coords.len() != ambient {
                return Err(invalid(format!("start point has {} coordinates, expected {ambient}", coords.len())));
            }
        }
        Ok(())
    }
}

pub fn validate_solver(cfg: &SolverConfig) -> Result<()> {
    match cfg {
        SolverConfig::Rar(c) => c.validate()?,
        SolverConfig::Rtr(c) => c.validate()?,
    }
    Ok(())
}
