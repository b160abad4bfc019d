//! Lanczos tridiagonalization on a tangent space and the reduced subproblem
//! solvers for the power-regularized and trust-region models.
//!
//! After `j` Lanczos steps the basis `Q_j = (q₀, …, q_{j−1})` satisfies
//! `H Q_j = Q_j T_j + β_j q_j e_jᵀ`, so every quantity the outer solvers need
//! (model values, model-gradient residuals) is available from `T_j`, `β_j` and
//! the reduced vector `u` without further Hessian-vector products.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldPoint, TangentVector};
use crate::model::safeguarded_root;
use crate::objective::{Counters, HessVec};

/// Default relative magnitude of the start-vector perturbation.
pub const DEFAULT_PERTURBATION: f64 = 1e-6;
/// Residual norms below this fraction of the operator-norm estimate end the recurrence.
const BREAKDOWN_TOL: f64 = 1e-12;
const ROOT_RTOL: f64 = 1e-13;

/// Lanczos-step cap `K_sub = ⌈c_sub·ε_H^{−1/2}⌉`.
pub fn subproblem_cap(c_sub: f64, eps_h: f64) -> usize {
    let k = (c_sub / eps_h.sqrt()).ceil();
    if k.is_finite() && k >= 1.0 {
        k as usize
    } else {
        1
    }
}

/// Symmetric tridiagonal matrix; `off[i]` couples rows `i` and `i + 1`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if !diag.is_empty() && off.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch {
                expected: diag.len().saturating_sub(1),
                got: off.len(),
            });
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.diag.iter().chain(self.off.iter()).all(|v| v.is_finite())
    }

    pub fn shifted(&self, s: f64) -> Self {
        Self {
            diag: self.diag.iter().map(|d| d + s).collect(),
            off: self.off.clone(),
        }
    }

    pub fn mul(&self, u: &DVector<f64>) -> DVector<f64> {
        let n = self.len();
        DVector::from_fn(n, |i, _| {
            let mut v = self.diag[i] * u[i];
            if i > 0 {
                v += self.off[i - 1] * u[i - 1];
            }
            if i + 1 < n {
                v += self.off[i] * u[i + 1];
            }
            v
        })
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::from_diagonal(&DVector::from_column_slice(&self.diag));
        for i in 0..n.saturating_sub(1) {
            m[(i, i + 1)] = self.off[i];
            m[(i + 1, i)] = self.off[i];
        }
        m
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence of the LDLᵀ pivots).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.len() {
            let b2 = if i > 0 { self.off[i - 1] * self.off[i - 1] } else { 0.0 };
            d = self.diag[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = -f64::EPSILON * (x.abs() + 1.0) * 1e-3;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// `k`-th smallest eigenvalue (0-based) by Sturm bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        assert!(k < self.len(), "eigenvalue index out of range");
        let (mut lo, mut hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        lo -= 1e-12 * scale;
        hi += 1e-12 * scale;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * scale {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalue(0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalue(self.len() - 1)
    }

    /// Smallest eigenpair via a dense symmetric eigensolver.
    pub fn min_eigenpair(&self) -> (f64, DVector<f64>) {
        let eig = SymmetricEigen::new(self.to_dense());
        let (idx, val) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, v)| (i, *v))
            .unwrap();
        (val, eig.eigenvectors.column(idx).into_owned())
    }

    /// Cholesky factor of `T + λI` as (diagonal, subdiagonal) of the lower bidiagonal `L`;
    /// `None` unless the shifted matrix is numerically positive definite.
    fn cholesky(&self, lambda: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        let n = self.len();
        let mut ld = Vec::with_capacity(n);
        let mut ls = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n {
            let mut p = self.diag[i] + lambda;
            if i > 0 {
                let s = self.off[i - 1] / ld[i - 1];
                ls.push(s);
                p -= s * s;
            }
            if !(p > 0.0) {
                return None;
            }
            ld.push(p.sqrt());
        }
        Some((ld, ls))
    }
}

/// `λ_min(T)` with values within rounding of zero snapped to zero.
fn clean_min_eigenvalue(t: &Tridiagonal) -> f64 {
    let lmin = t.min_eigenvalue();
    let (lo, hi) = t.gershgorin();
    if lmin.abs() <= 16.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
        0.0
    } else {
        lmin
    }
}

/// `u(λ) = −(T + λI)⁻¹ g` and `‖L⁻¹u‖²` (for d‖u‖/dλ = −‖L⁻¹u‖²/‖u‖).
fn shifted_solve(t: &Tridiagonal, g: &DVector<f64>, lambda: f64) -> Option<(DVector<f64>, f64)> {
    let (ld, ls) = t.cholesky(lambda)?;
    let n = t.len();
    // L y = −g
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let prev = if i > 0 { ls[i - 1] * y[i - 1] } else { 0.0 };
        y[i] = (-g[i] - prev) / ld[i];
    }
    // Lᵀ u = y
    let mut u = DVector::zeros(n);
    for i in (0..n).rev() {
        let next = if i + 1 < n { ls[i] * u[i + 1] } else { 0.0 };
        u[i] = (y[i] - next) / ld[i];
    }
    // w = L⁻¹ u
    let mut w = DVector::zeros(n);
    for i in 0..n {
        let prev = if i > 0 { ls[i - 1] * w[i - 1] } else { 0.0 };
        w[i] = (u[i] - prev) / ld[i];
    }
    Some((u, w.norm_squared()))
}

/// Solution of a reduced (Krylov-subspace) model problem.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedSolution {
    pub u: DVector<f64>,
    /// Lagrange multiplier: `(T + λI)u = −g̃`.
    pub lambda: f64,
    /// Trust-region solution lies on the boundary.
    pub on_boundary: bool,
    /// Solved through eigenvector completion.
    pub hard_case: bool,
}

fn check_reduced_inputs(t: &Tridiagonal, g: &DVector<f64>) -> Result<()> {
    if t.is_empty() {
        return Err(Error::domain("empty reduced problem"));
    }
    if g.len() != t.len() {
        return Err(Error::DimensionMismatch {
            expected: t.len(),
            got: g.len(),
        });
    }
    if !t.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("reduced subproblem data".into()));
    }
    Ok(())
}

/// Lower end of the multiplier search: smallest λ above `floor` where `T + λI`
/// factors, starting at `floor + 1e−14·scale`.
fn factorable_floor(t: &Tridiagonal, g: &DVector<f64>, floor: f64, scale: f64) -> (f64, Option<(DVector<f64>, f64)>) {
    let mut delta = 1e-14 * scale.max(1e-300);
    for _ in 0..60 {
        let lam = floor + delta;
        if let Some(sol) = shifted_solve(t, g, lam) {
            return (lam, Some(sol));
        }
        delta *= 4.0;
    }
    (floor + delta, None)
}

/// Minimizer of `⟨u,g⟩ + ½uᵀTu + ‖u‖^{2}·(shift)/2` restricted to the bottom
/// eigenspace complement, completed along the bottom eigenvector to norm `target`.
fn hard_case_completion(t: &Tridiagonal, g: &DVector<f64>, lambda_hat: f64, target: f64) -> DVector<f64> {
    let eig = SymmetricEigen::new(t.to_dense());
    let lmin = eig.eigenvalues.min();
    let scale = eig.eigenvalues.amax().max(1.0);
    let tol = 1e-10 * scale;
    let mut u = DVector::zeros(t.len());
    let mut bottom: Option<DVector<f64>> = None;
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(i);
        if l - lmin <= tol {
            if bottom.is_none() {
                bottom = Some(v.into_owned());
            }
            continue;
        }
        u -= v * (v.dot(g) / (l + lambda_hat));
    }
    let v = bottom.expect("nonempty spectrum");
    let rest = (target * target - u.norm_squared()).max(0.0).sqrt();
    // either sign is optimal when g ⊥ v; prefer the descent orientation
    let sign = if v.dot(g) > 0.0 { -1.0 } else { 1.0 };
    u + v * (sign * rest)
}

/// Global minimizer of `⟨g,u⟩ + ½uᵀTu + σ/(2+ω)‖u‖^{2+ω}` via the secular equation
/// `λ = σ‖u(λ)‖^ω`, `u(λ) = −(T + λI)⁻¹g`.
pub fn solve_reduced_ar(t: &Tridiagonal, g: &DVector<f64>, sigma: f64, omega: f64) -> Result<ReducedSolution> {
    check_reduced_inputs(t, g)?;
    if !(sigma > 0.0 && sigma.is_finite()) || !(omega > 0.0 && omega <= 1.0) {
        return Err(Error::domain(format!("need sigma > 0 and omega in (0, 1], got {sigma}, {omega}")));
    }
    let n = t.len();
    let lmin = clean_min_eigenvalue(t);
    let lambda_hat = (-lmin).max(0.0);
    let radius_of = |lam: f64| (lam / sigma).powf(1.0 / omega);
    let (lo_g, hi_g) = t.gershgorin();
    let scale = lo_g.abs().max(hi_g.abs()).max(g.norm()).max(1e-300);

    if g.norm() == 0.0 {
        if lmin >= 0.0 {
            return Ok(ReducedSolution {
                u: DVector::zeros(n),
                lambda: 0.0,
                on_boundary: false,
                hard_case: false,
            });
        }
        let u = hard_case_completion(t, g, lambda_hat, radius_of(lambda_hat));
        return Ok(ReducedSolution {
            u,
            lambda: lambda_hat,
            on_boundary: false,
            hard_case: true,
        });
    }

    // bracket start: λ = 0 when T ≻ 0, otherwise just above −λ_min
    let (lam_lo, lo_sol) = if lmin > 0.0 {
        match shifted_solve(t, g, 0.0) {
            Some(sol) => (0.0, Some(sol)),
            None => factorable_floor(t, g, 0.0, scale),
        }
    } else {
        factorable_floor(t, g, lambda_hat, scale)
    };
    let psi_lo = match &lo_sol {
        Some((u, _)) => u.norm() - radius_of(lam_lo),
        None => f64::INFINITY,
    };
    if psi_lo <= 0.0 {
        if lmin < 0.0 {
            let u = hard_case_completion(t, g, lambda_hat, radius_of(lambda_hat));
            return Ok(ReducedSolution {
                u,
                lambda: lambda_hat,
                on_boundary: false,
                hard_case: true,
            });
        }
        // T ⪰ 0 and the root sits within the floor offset
        let (u, _) = lo_sol.expect("factorization succeeded");
        return Ok(ReducedSolution {
            lambda: sigma * u.norm().powf(omega),
            u,
            on_boundary: false,
            hard_case: false,
        });
    }

    let mut lam_hi = (lam_lo * 2.0).max(lam_lo + (sigma * g.norm().powf(omega)).powf(1.0 / (1.0 + omega)));
    loop {
        match shifted_solve(t, g, lam_hi) {
            Some((u, _)) if u.norm() - radius_of(lam_hi) < 0.0 => break,
            _ => lam_hi = lam_lo + 2.0 * (lam_hi - lam_lo).max(1e-300),
        }
        if !lam_hi.is_finite() {
            return Err(Error::NonFinite("secular equation bracket".into()));
        }
    }

    // χ(λ) = 1/‖u(λ)‖ − 1/r(λ) is increasing with the same root and is close to
    // linear near the pole, which suits Newton.
    let chi = |lam: f64| match shifted_solve(t, g, lam) {
        Some((u, _)) => 1.0 / u.norm() - 1.0 / radius_of(lam),
        None => f64::NEG_INFINITY,
    };
    let dchi = |lam: f64| match shifted_solve(t, g, lam) {
        Some((u, w2)) => {
            let un = u.norm();
            w2 / (un * un * un) + (sigma.powf(1.0 / omega) / omega) * lam.powf(-1.0 / omega - 1.0)
        }
        None => f64::NAN,
    };
    let lambda = safeguarded_root(chi, dchi, lam_lo, lam_hi, ROOT_RTOL);
    let (u, _) = shifted_solve(t, g, lambda).ok_or_else(|| Error::NonFinite("secular solve".into()))?;
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("secular solve".into()));
    }
    // report the multiplier consistent with the returned u
    let lambda = sigma * u.norm().powf(omega);
    Ok(ReducedSolution {
        u,
        lambda,
        on_boundary: false,
        hard_case: false,
    })
}

/// Minimizer of `⟨g,u⟩ + ½uᵀTu` subject to `‖u‖ ≤ Δ` (Moré–Sorensen on a tridiagonal).
pub fn solve_reduced_tr(t: &Tridiagonal, g: &DVector<f64>, radius: f64) -> Result<ReducedSolution> {
    check_reduced_inputs(t, g)?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::domain(format!("trust-region radius must be positive, got {radius}")));
    }
    let n = t.len();
    let lmin = clean_min_eigenvalue(t);
    let lambda_hat = (-lmin).max(0.0);
    let (lo_g, hi_g) = t.gershgorin();
    let scale = lo_g.abs().max(hi_g.abs()).max(g.norm()).max(1e-300);

    if g.norm() == 0.0 {
        if lmin >= 0.0 {
            return Ok(ReducedSolution {
                u: DVector::zeros(n),
                lambda: 0.0,
                on_boundary: false,
                hard_case: false,
            });
        }
        let u = hard_case_completion(t, g, lambda_hat, radius);
        return Ok(ReducedSolution {
            u,
            lambda: lambda_hat,
            on_boundary: true,
            hard_case: true,
        });
    }

    if lmin > 0.0 {
        if let Some((u, _)) = shifted_solve(t, g, 0.0) {
            if u.norm() <= radius {
                return Ok(ReducedSolution {
                    u,
                    lambda: 0.0,
                    on_boundary: false,
                    hard_case: false,
                });
            }
        }
    }

    let (lam_lo, lo_sol) = if lmin > 0.0 {
        (0.0, shifted_solve(t, g, 0.0))
    } else {
        factorable_floor(t, g, lambda_hat, scale)
    };
    let psi_lo = match &lo_sol {
        Some((u, _)) => u.norm() - radius,
        None => f64::INFINITY,
    };
    if psi_lo <= 0.0 {
        if lmin < 0.0 {
            let u = hard_case_completion(t, g, lambda_hat, radius);
            return Ok(ReducedSolution {
                u,
                lambda: lambda_hat,
                on_boundary: true,
                hard_case: true,
            });
        }
        // singular PSD T with the minimum-norm solution inside the region
        let (u, _) = lo_sol.expect("factorization succeeded");
        return Ok(ReducedSolution {
            u,
            lambda: 0.0,
            on_boundary: false,
            hard_case: false,
        });
    }

    let mut lam_hi = lam_lo + g.norm() / radius + scale;
    while let Some((u, _)) = shifted_solve(t, g, lam_hi) {
        if u.norm() < radius {
            break;
        }
        lam_hi = lam_lo + 2.0 * (lam_hi - lam_lo);
        if !lam_hi.is_finite() {
            return Err(Error::NonFinite("trust-region bracket".into()));
        }
    }

    let chi = |lam: f64| match shifted_solve(t, g, lam) {
        Some((u, _)) => 1.0 / u.norm() - 1.0 / radius,
        None => f64::NEG_INFINITY,
    };
    let dchi = |lam: f64| match shifted_solve(t, g, lam) {
        Some((u, w2)) => {
            let un = u.norm();
            w2 / (un * un * un)
        }
        None => f64::NAN,
    };
    let lambda = safeguarded_root(chi, dchi, lam_lo, lam_hi, ROOT_RTOL);
    let (mut u, _) = shifted_solve(t, g, lambda).ok_or_else(|| Error::NonFinite("trust-region solve".into()))?;
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("trust-region solve".into()));
    }
    // land exactly on the sphere ‖u‖ = Δ
    let un = u.norm();
    u *= radius / un;
    Ok(ReducedSolution {
        u,
        lambda,
        on_boundary: true,
        hard_case: false,
    })
}

/// Lanczos process state on one tangent space.
#[derive(Clone, Debug)]
pub struct KrylovState {
    base: Arc<ManifoldPoint>,
    /// `q₀ … q_j`: the `j` columns of `Q_j` plus the pending next vector unless broken down.
    basis: Vec<DVector<f64>>,
    tri: Tridiagonal,
    /// `β_j`, the coupling between `q_{j−1}` and the pending `q_j`.
    next_beta: f64,
    gradient: DVector<f64>,
    g_norm: f64,
    start_perturbed: bool,
    broken: bool,
    max_dim: usize,
    op_norm_est: f64,
}

impl KrylovState {
    /// Starts a Lanczos process from an arbitrary nonzero tangent vector; `gradient`
    /// is the vector projected into the reduced problems.
    pub fn from_start(
        start: DVector<f64>,
        gradient: DVector<f64>,
        base: Arc<ManifoldPoint>,
        max_dim: usize,
        start_perturbed: bool,
    ) -> Result<Self> {
        let n = start.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::domain("Lanczos start vector must be nonzero and finite"));
        }
        let g_norm = gradient.norm();
        Ok(Self {
            base,
            basis: vec![start / n],
            tri: Tridiagonal::default(),
            next_beta: 0.0,
            gradient,
            g_norm,
            start_perturbed,
            broken: max_dim == 0,
            max_dim,
            op_norm_est: 0.0,
        })
    }

    /// Order `j` of the current Krylov subspace (number of Hessian products taken).
    pub fn order(&self) -> usize {
        self.tri.len()
    }

    pub fn tridiagonal(&self) -> &Tridiagonal {
        &self.tri
    }

    /// Orthonormal basis vectors `q₀ … q_{j−1}`.
    pub fn basis(&self) -> &[DVector<f64>] {
        &self.basis[..self.order()]
    }

    pub fn g_norm(&self) -> f64 {
        self.g_norm
    }

    pub fn start_perturbed(&self) -> bool {
        self.start_perturbed
    }

    pub fn base(&self) -> &Arc<ManifoldPoint> {
        &self.base
    }

    /// The subspace is invariant (or the tangent space is exhausted); further steps are no-ops.
    pub fn is_broken_down(&self) -> bool {
        self.broken
    }

    /// `β_j`, zero after breakdown.
    pub fn next_beta(&self) -> f64 {
        if self.broken {
            0.0
        } else {
            self.next_beta
        }
    }

    /// Largest `‖Hq‖` seen, a lower estimate of `‖H‖`.
    pub fn op_norm_estimate(&self) -> f64 {
        self.op_norm_est
    }

    /// Appends one Lanczos vector; consumes exactly one Hessian-vector product.
    /// Returns `false` (and does nothing) once the process has broken down.
    pub fn lanczos_extend(&mut self, hess: &dyn HessVec, counters: &mut Counters) -> bool {
        if self.broken {
            return false;
        }
        let j = self.order();
        let q = self.basis[j].clone();
        let hq = hess.apply(&q, counters);
        self.op_norm_est = self.op_norm_est.max(hq.norm());
        let alpha = q.dot(&hq);
        let mut w = hq - &q * alpha;
        if j > 0 {
            w -= &self.basis[j - 1] * self.next_beta;
        }
        hess.project(&mut w);
        // full reorthogonalization, two passes
        for _ in 0..2 {
            for v in &self.basis {
                let c = v.dot(&w);
                w -= v * c;
            }
        }
        let beta = w.norm();
        self.tri.diag.push(alpha);
        if j > 0 {
            self.tri.off.push(self.next_beta);
        }
        self.next_beta = beta;
        if beta <= BREAKDOWN_TOL * self.op_norm_est.max(f64::MIN_POSITIVE) || j + 1 >= self.max_dim {
            self.broken = true;
        } else {
            self.basis.push(w / beta);
        }
        true
    }

    /// `g̃ = Q_j* g`.
    pub fn reduced_gradient(&self) -> DVector<f64> {
        let j = self.order();
        if !self.start_perturbed {
            let mut r = DVector::zeros(j);
            if j > 0 {
                r[0] = self.g_norm;
            }
            return r;
        }
        DVector::from_iterator(j, self.basis().iter().map(|q| q.dot(&self.gradient)))
    }

    /// `Q_j u` as a tangent vector.
    pub fn lift(&self, u: &DVector<f64>) -> Result<TangentVector> {
        if u.len() != self.order() {
            return Err(Error::DimensionMismatch {
                expected: self.order(),
                got: u.len(),
            });
        }
        let mut v = DVector::zeros(self.base.dim());
        for (q, c) in self.basis().iter().zip(u.iter()) {
            v.axpy(*c, q, 1.0);
        }
        Ok(TangentVector::new(v, Arc::clone(&self.base)))
    }

    /// `‖g + (H + c·I) Q_j u‖` computed from the Lanczos relation (no Hessian products).
    pub fn residual_norm(&self, u: &DVector<f64>, coeff: f64) -> f64 {
        let g_red = self.reduced_gradient();
        let r_red = &g_red + self.tri.mul(u) + u * coeff;
        let tail = self.next_beta() * u[u.len() - 1];
        if !self.start_perturbed {
            return (r_red.norm_squared() + tail * tail).sqrt();
        }
        let mut r = self.lift(&r_red).expect("dimension checked").coords;
        if !self.broken {
            r.axpy(tail, &self.basis[self.order()], 1.0);
        }
        // component of g outside span(Q_j)
        let mut g_perp = self.gradient.clone();
        for (q, c) in self.basis().iter().zip(g_red.iter()) {
            g_perp.axpy(-*c, q, 1.0);
        }
        (r + g_perp).norm()
    }

    /// Model curvature `⟨Q_j u, H Q_j u⟩ = uᵀ T_j u`.
    pub fn curvature(&self, u: &DVector<f64>) -> f64 {
        u.dot(&self.tri.mul(u))
    }
}

/// Starts a Lanczos process at `g`, or at `g + ζ·v` with a uniformly random unit
/// tangent `v` and `ζ = rel_magnitude·max(‖g‖, ε_g)` when `perturb` is set.
pub fn init_basis(
    g: &TangentVector,
    perturb: bool,
    rel_magnitude: f64,
    eps_g: f64,
    manifold: &dyn Manifold,
    rng: &mut dyn rand::RngCore,
) -> Result<KrylovState> {
    let gn = g.norm();
    if !perturb && gn == 0.0 {
        return Err(Error::domain("cannot start an unperturbed Krylov basis at a zero gradient"));
    }
    let start = if perturb {
        let v = manifold.random_unit_tangent(&g.base, rng);
        let zeta = rel_magnitude * gn.max(eps_g);
        &g.coords + v.coords * zeta
    } else {
        g.coords.clone()
    };
    KrylovState::from_start(start, g.coords.clone(), Arc::clone(&g.base), manifold.dim(), perturb)
}
