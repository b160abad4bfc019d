//! Minimal eigenvalue oracle: certify `H ⪰ −ε_H I` or produce a unit direction `v`
//! with `⟨v, g⟩ ≤ 0` and `⟨v, Hv⟩ ≤ −ε_H/2`.

use std::sync::Arc;

use log::{debug, warn};

use crate::error::{Error, Result};
use crate::krylov::KrylovState;
use crate::manifold::{Manifold, TangentVector};
use crate::objective::{Counters, HessVec};

pub const DEFAULT_C_MEO: f64 = 4.0;

#[derive(Clone, Debug, PartialEq)]
pub enum MeoOutcome {
    /// `λ_min(T_K)` of the explored Krylov subspace.
    Certified { lambda_est: f64 },
    NegativeCurvature { direction: TangentVector, rayleigh: f64 },
}

impl MeoOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, MeoOutcome::Certified { .. })
    }
}

/// `K_meo = min(n, ⌈c·ε_H^{−1/2}·ln(n/δ)⌉)`, at least 1.
pub fn meo_budget(n: usize, eps_h: f64, delta: f64, c_meo: f64) -> usize {
    let k = (c_meo * eps_h.powf(-0.5) * (n as f64 / delta).ln()).ceil();
    let k = if k.is_finite() && k >= 1.0 { k as usize } else { 1 };
    k.min(n).max(1)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeoParams {
    pub eps_h: f64,
    pub delta: f64,
    pub c_meo: f64,
}

impl MeoParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_h > 0.0 && self.eps_h <= 1.0) {
            return Err(Error::config("MEO needs eps_h in (0, 1]"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config("MEO needs delta in (0, 1)"));
        }
        if !(self.c_meo > 0.0) {
            return Err(Error::config("c_meo must be positive"));
        }
        Ok(())
    }
}

/// Lanczos from a random unit tangent for at most `K_meo` steps. A candidate
/// direction is re-verified with one direct Hessian-vector product before it is
/// returned, so a call consumes at most `K_meo + 1` products.
pub fn meo_run(
    hess: &dyn HessVec,
    g: &TangentVector,
    params: &MeoParams,
    manifold: &dyn Manifold,
    rng: &mut dyn rand::RngCore,
    counters: &mut Counters,
) -> Result<MeoOutcome> {
    params.validate()?;
    counters.meo_calls += 1;
    let n = manifold.dim();
    let budget = meo_budget(n, params.eps_h, params.delta, params.c_meo);
    let start = manifold.random_unit_tangent(&g.base, rng);
    let mut state = KrylovState::from_start(start.coords, g.coords.clone(), Arc::clone(&g.base), n, false)?;
    let threshold = -0.5 * params.eps_h;
    let hv_before = counters.hess_vec_products;

    let mut lambda_est = f64::INFINITY;
    for _ in 0..budget {
        if !state.lanczos_extend(hess, counters) {
            break;
        }
        let t = state.tridiagonal();
        lambda_est = t.min_eigenvalue();
        if lambda_est > threshold {
            continue;
        }
        let (_, y) = t.min_eigenpair();
        let mut v = state.lift(&y)?;
        let vn = v.norm();
        v = v.scaled(1.0 / vn);
        if v.coords.dot(&g.coords) > 0.0 {
            v = v.scaled(-1.0);
        }
        let rayleigh = v.coords.dot(&hess.apply(&v.coords, counters));
        if rayleigh <= threshold && v.coords.dot(&g.coords) <= 0.0 {
            debug!("MEO found curvature {rayleigh:.3e} after {} Lanczos steps", state.order());
            assert!(counters.hess_vec_products - hv_before <= budget as u64 + 1);
            return Ok(MeoOutcome::NegativeCurvature { direction: v, rayleigh });
        }
        warn!("MEO candidate failed direct verification (rayleigh {rayleigh:.3e}); certifying on the explored subspace");
        break;
    }
    assert!(counters.hess_vec_products - hv_before <= budget as u64 + 1);
    Ok(MeoOutcome::Certified { lambda_est })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{Euclidean, ManifoldPoint};
    use crate::objective::{planted_matrix, DenseHessian};
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(g: &[f64]) -> (Euclidean, TangentVector) {
        let n = g.len();
        let m = Euclidean::new(n);
        let x = Arc::new(m.point(DVector::zeros(n)).unwrap());
        (m, TangentVector::new(DVector::from_column_slice(g), x))
    }

    fn params(eps_h: f64) -> MeoParams {
        MeoParams {
            eps_h,
            delta: 0.05,
            c_meo: DEFAULT_C_MEO,
        }
    }

    #[test]
    fn budget_formula() {
        assert_eq!(meo_budget(100, 1e-2, 0.05, 4.0), 100);
        assert_eq!(meo_budget(10_000, 1.0, 0.05, 4.0), (4.0 * (10_000.0f64 / 0.05).ln()).ceil() as usize);
        assert_eq!(meo_budget(1, 1.0, 0.5, 4.0), 1);
    }

    #[test]
    fn finds_negative_direction() {
        let (m, g) = setup(&[0.0, 1.0]);
        let h = DenseHessian::new(DMatrix::from_diagonal(&DVector::from_column_slice(&[-1.0, 1.0])));
        for seed in 0..20 {
            let mut c = Counters::default();
            let out = meo_run(&h, &g, &params(0.5), &m, &mut ChaCha8Rng::seed_from_u64(seed), &mut c).unwrap();
            match out {
                MeoOutcome::NegativeCurvature { direction, rayleigh } => {
                    let d = &direction.coords;
                    assert!((rayleigh - (d[1] * d[1] - d[0] * d[0])).abs() <= 1e-12);
                    assert!(rayleigh <= -0.25);
                    assert!(direction.coords.dot(&g.coords) <= 0.0);
                    // a full two-step exploration lands on the bottom eigenvector ±e₁
                    if c.hess_vec_products == 3 {
                        assert!((rayleigh + 1.0).abs() <= 1e-12);
                        assert!(d[1].abs() <= 1e-7);
                    }
                }
                other => panic!("expected negative curvature, got {other:?}"),
            }
            assert_eq!(c.meo_calls, 1);
        }
    }

    #[test]
    fn certifies_identity() {
        let (m, g) = setup(&[0.3, 0.1, 0.0, 2.0]);
        let h = DenseHessian::new(DMatrix::identity(4, 4));
        let mut c = Counters::default();
        let out = meo_run(&h, &g, &params(0.1), &m, &mut ChaCha8Rng::seed_from_u64(1), &mut c).unwrap();
        match out {
            MeoOutcome::Certified { lambda_est } => assert!((lambda_est - 1.0).abs() <= 1e-12),
            other => panic!("expected certificate, got {other:?}"),
        }
        assert_eq!(c.hess_vec_products, 1);
    }

    #[test]
    fn shallow_curvature_is_certified() {
        let eps = 0.2;
        let (m, g) = setup(&[1.0, 0.0, 0.0]);
        let h = DenseHessian::new(DMatrix::from_diagonal(&DVector::from_column_slice(&[-eps / 4.0, 1.0, 2.0])));
        let mut c = Counters::default();
        let out = meo_run(&h, &g, &params(eps), &m, &mut ChaCha8Rng::seed_from_u64(2), &mut c).unwrap();
        assert!(out.is_certified());
    }

    #[test]
    fn rejects_bad_parameters() {
        let (m, g) = setup(&[1.0]);
        let h = DenseHessian::new(DMatrix::identity(1, 1));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut c = Counters::default();
        let bad = MeoParams { delta: 1.0, ..params(0.1) };
        assert!(meo_run(&h, &g, &bad, &m, &mut rng, &mut c).is_err());
        let bad = MeoParams { eps_h: 0.0, ..params(0.1) };
        assert!(meo_run(&h, &g, &bad, &m, &mut rng, &mut c).is_err());
    }

    #[test]
    fn planted_negative_eigenvalue_is_found() {
        let n = 50;
        let eps = 1e-2;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut missed = 0;
        for _ in 0..40 {
            let mut spec: Vec<f64> = (0..n).map(|i| 0.1 + i as f64 / n as f64).collect();
            spec[0] = -2.0 * eps;
            let a = planted_matrix(&spec, Some(&mut rng));
            let (m, g) = setup(&vec![0.0; n]);
            let mut c = Counters::default();
            let out = meo_run(&DenseHessian::new(a.clone()), &g, &params(eps), &m, &mut rng, &mut c).unwrap();
            match out {
                MeoOutcome::Certified { .. } => missed += 1,
                MeoOutcome::NegativeCurvature { direction, rayleigh } => {
                    let direct = direction.coords.dot(&(&a * &direction.coords));
                    assert!(direct <= -eps / 2.0 && (direct - rayleigh).abs() <= 1e-12);
                }
            }
            assert!(c.hess_vec_products <= meo_budget(n, eps, 0.05, DEFAULT_C_MEO) as u64 + 1);
        }
        assert!(missed <= 2, "missed {missed}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn outputs_satisfy_contract(seed in 0u64..10_000, n in 2usize..12, eps in 0.01f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = Euclidean::new(n);
            let x = Arc::new(ManifoldPoint::new(DVector::zeros(n), crate::manifold::ManifoldTag { name: "euclidean", ambient_dim: n }));
            let a = DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 3 + seed as usize) % 11) as f64 / 5.0 - 1.0);
            let h = (&a + a.transpose()) * 0.5;
            let g = m.random_unit_tangent(&x, &mut rng);
            let mut c = Counters::default();
            let out = meo_run(&DenseHessian::new(h.clone()), &g, &params(eps), &m, &mut rng, &mut c).unwrap();
            prop_assert!(c.hess_vec_products <= meo_budget(n, eps, 0.05, DEFAULT_C_MEO) as u64 + 1);
            if let MeoOutcome::NegativeCurvature { direction, .. } = out {
                prop_assert!((direction.norm() - 1.0).abs() <= 1e-12);
                prop_assert!(direction.coords.dot(&g.coords) <= 0.0);
                prop_assert!(direction.coords.dot(&(&h * &direction.coords)) <= -eps / 2.0);
            }
        }
    }
}
