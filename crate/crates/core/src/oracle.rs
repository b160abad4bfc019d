//! Dense reference solvers used to cross-check the matrix-free code paths.
//!
//! Everything here works in the eigenbasis of an explicit symmetric matrix and
//! finds multipliers by plain bisection, sharing no code with the Lanczos solvers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

const BISECTIONS: usize = 400;

struct Spectral {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    gamma: Vec<f64>,
}

impl Spectral {
    fn new(h: &DMatrix<f64>, g: &DVector<f64>) -> Self {
        let eig = SymmetricEigen::new(h.clone());
        let gamma = (0..h.nrows()).map(|i| eig.eigenvectors.column(i).dot(g)).collect();
        Self {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
            gamma,
        }
    }

    fn lmin(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn bottom(&self) -> Vec<usize> {
        let lmin = self.lmin();
        let scale = self.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        (0..self.values.len()).filter(|&i| self.values[i] - lmin <= 1e-10 * scale).collect()
    }

    fn norm_at(&self, lam: f64, skip: &[usize]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.values.len() {
            if skip.contains(&i) {
                continue;
            }
            let d = self.values[i] + lam;
            s += self.gamma[i] * self.gamma[i] / (d * d);
        }
        s.sqrt()
    }

    fn step_at(&self, lam: f64, skip: &[usize]) -> DVector<f64> {
        let mut u = DVector::zeros(self.values.len());
        for i in 0..self.values.len() {
            if skip.contains(&i) {
                continue;
            }
            u -= self.vectors.column(i) * (self.gamma[i] / (self.values[i] + lam));
        }
        u
    }

    /// Root of the decreasing function `‖u(λ)‖ − r(λ)` on `(lo, ∞)` by bisection.
    fn bisect(&self, lo: f64, r: impl Fn(f64) -> f64) -> f64 {
        let mut a = lo;
        let mut b = lo + 1.0;
        while self.norm_at(b, &[]) > r(b) {
            b = lo + 2.0 * (b - lo);
        }
        for _ in 0..BISECTIONS {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if self.norm_at(m, &[]) > r(m) {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    /// Returns `(u, λ)` of the hard case when it applies.
    fn hard_case(&self, lam_hat: f64, target: f64, g_norm: f64) -> Option<(DVector<f64>, f64)> {
        let bottom = self.bottom();
        if bottom.iter().any(|&i| self.gamma[i].abs() > 1e-12 * g_norm.max(1e-300)) {
            return None;
        }
        let up = self.step_at(lam_hat, &bottom);
        if up.norm() > target {
            return None;
        }
        let tau = (target * target - up.norm_squared()).sqrt();
        Some((up + self.vectors.column(bottom[0]) * tau, lam_hat))
    }
}

/// Global minimizer `(u, λ)` of `⟨g,u⟩ + ½uᵀHu + σ/(2+ω)‖u‖^{2+ω}`.
pub fn dense_ar_solution(h: &DMatrix<f64>, g: &DVector<f64>, sigma: f64, omega: f64) -> (DVector<f64>, f64) {
    let sp = Spectral::new(h, g);
    let lam_hat = (-sp.lmin()).max(0.0);
    let r = |lam: f64| (lam / sigma).powf(1.0 / omega);
    if lam_hat > 0.0 || g.norm() == 0.0 {
        if let Some(sol) = sp.hard_case(lam_hat, r(lam_hat), g.norm()) {
            return sol;
        }
    }
    let lam = sp.bisect(lam_hat, r);
    (sp.step_at(lam, &[]), lam)
}

/// Global minimizer `(u, λ)` of `⟨g,u⟩ + ½uᵀHu` subject to `‖u‖ ≤ Δ`.
pub fn dense_tr_solution(h: &DMatrix<f64>, g: &DVector<f64>, radius: f64) -> (DVector<f64>, f64) {
    let sp = Spectral::new(h, g);
    let lmin = sp.lmin();
    if lmin > 0.0 && sp.norm_at(0.0, &[]) <= radius {
        return (sp.step_at(0.0, &[]), 0.0);
    }
    let lam_hat = (-lmin).max(0.0);
    if let Some(sol) = sp.hard_case(lam_hat, radius, g.norm()) {
        return sol;
    }
    let lam = sp.bisect(lam_hat, |_| radius);
    let mut u = sp.step_at(lam, &[]);
    u *= radius / u.norm();
    (u, lam)
}

pub fn ar_model_value(h: &DMatrix<f64>, g: &DVector<f64>, sigma: f64, omega: f64, u: &DVector<f64>) -> f64 {
    g.dot(u) + 0.5 * u.dot(&(h * u)) + sigma / (2.0 + omega) * u.norm().powf(2.0 + omega)
}

pub fn tr_model_value(h: &DMatrix<f64>, g: &DVector<f64>, u: &DVector<f64>) -> f64 {
    g.dot(u) + 0.5 * u.dot(&(h * u))
}

pub fn dense_min_eigenvalue(h: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(h.clone()).eigenvalues.min()
}
