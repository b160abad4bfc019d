use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rarn::objective::{dense_min_eigenvalue, planted_matrix, Objective, Problem};
use rarn::rar::{rar_solve, RarConfig};
use rarn::report::{RunReport, Status};
use rarn::rtr::{rtr_solve, RtrConfig};

fn spd(n: usize, seed: u64) -> DMatrix<f64> {
    let spec: Vec<f64> = (0..n).map(|i| 0.5 + i as f64).collect();
    planted_matrix(&spec, Some(&mut ChaCha8Rng::seed_from_u64(seed)))
}

fn both(problem: &Problem, eps_g: f64, eps_h: f64, x0: &DVector<f64>, seed: u64) -> [RunReport; 2] {
    let m = problem.manifold();
    let rar = RarConfig { eps_g, eps_h, ..RarConfig::default() };
    let rtr = RtrConfig { eps_g, eps_h, ..RtrConfig::default() };
    [
        rar_solve(problem, &rar, m.point(x0.clone()).unwrap(), seed).unwrap(),
        rtr_solve(problem, &rtr, m.point(x0.clone()).unwrap(), seed).unwrap(),
    ]
}

fn final_point(rep: &RunReport) -> DVector<f64> {
    DVector::from_column_slice(&rep.final_point)
}

#[test]
fn convex_quadratic_matches_linear_solve() {
    let b = spd(8, 1);
    let c = DVector::from_fn(8, |i, _| (i as f64 - 3.5) / 2.0);
    let expect = b.clone().lu().solve(&(-&c)).unwrap();
    let p = Problem::quadratic(b, c).unwrap();
    for rep in both(&p, 1e-9, 1e-4, &DVector::from_element(8, 3.0), 5) {
        assert_eq!(rep.status, Status::Converged, "{}", rep.solver());
        assert!((final_point(&rep) - &expect).amax() < 1e-8);
    }
}

#[test]
fn small_rayleigh_saddle_is_escaped() {
    // e₂ is a critical point with one negative curvature direction
    let a = DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, 2.0, 3.0, 4.0]));
    let p = Problem::rayleigh(a).unwrap();
    let e2 = DVector::from_column_slice(&[0.0, 1.0, 0.0, 0.0]);
    for rep in both(&p, 1e-8, 1e-3, &e2, 3) {
        assert_eq!(rep.status, Status::Converged);
        assert!((rep.final_value - 1.0).abs() < 1e-10, "{} ended at f = {}", rep.solver(), rep.final_value);
        assert!(rep.certificate.unwrap() >= -1e-3);
    }
}

#[test]
fn runs_are_deterministic_in_the_seed() {
    let p = Problem::rayleigh_planted(&(1..=30).map(f64::from).collect::<Vec<_>>(), Some(&mut ChaCha8Rng::seed_from_u64(9))).unwrap();
    let x0 = p.manifold().random_point(&mut ChaCha8Rng::seed_from_u64(2)).coords;
    let a = both(&p, 1e-7, 1e-3, &x0, 17);
    let b = both(&p, 1e-7, 1e-3, &x0, 17);
    for (ra, rb) in a.iter().zip(&b) {
        assert_eq!(ra.records, rb.records);
        assert_eq!(ra.final_point, rb.final_point);
    }
}

#[test]
fn holder_well_converges_to_a_second_order_point() {
    let n = 6;
    let mut diag: Vec<f64> = (0..n).map(|i| 0.5 + i as f64 / n as f64).collect();
    diag[0] = -1.0;
    let b = DMatrix::from_diagonal(&DVector::from_vec(diag));
    let center = DVector::from_fn(n, |i, _| 0.3 - 0.1 * i as f64);
    let p = Problem::holder_well(center, 0.5, b).unwrap();
    let x0 = DVector::from_element(n, 0.2);
    for rep in both(&p, 1e-8, 1e-3, &x0, 4) {
        assert_eq!(rep.status, Status::Converged, "{}", rep.solver());
        let x = Arc::new(p.manifold().point(final_point(&rep)).unwrap());
        assert!(dense_min_eigenvalue(&p, &x).unwrap() >= -1e-3);
    }
}

#[test]
fn budget_exhaustion_is_reported() {
    let p = Problem::rayleigh_planted(&(1..=50).map(f64::from).collect::<Vec<_>>(), Some(&mut ChaCha8Rng::seed_from_u64(1))).unwrap();
    let x0 = p.manifold().random_point(&mut ChaCha8Rng::seed_from_u64(3));
    let cfg = RarConfig { eps_g: 1e-12, max_outer: 2, ..RarConfig::default() };
    let rep = rar_solve(&p, &cfg, x0, 0).unwrap();
    assert_eq!(rep.status, Status::BudgetExhausted);
    assert_eq!(rep.outer_iters(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn accepted_steps_never_raise_f(seed in 0u64..10_000, n in 3usize..12) {
        let spec: Vec<f64> = (0..n).map(|i| i as f64 - 1.0).collect();
        let p = Problem::rayleigh_planted(&spec, Some(&mut ChaCha8Rng::seed_from_u64(seed))).unwrap();
        let x0 = p.manifold().random_point(&mut ChaCha8Rng::seed_from_u64(seed + 1)).coords;
        for rep in both(&p, 1e-8, 1e-3, &x0, seed) {
            prop_assert_eq!(rep.status, Status::Converged);
            for r in &rep.records {
                if r.success {
                    prop_assert!(r.f_trial <= r.f);
                }
            }
            prop_assert!((rep.final_value + 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn convex_quadratics_solve_exactly(seed in 0u64..10_000, n in 1usize..7) {
        let b = spd(n, seed);
        let c = DVector::from_fn(n, |i, _| ((seed + i as u64) % 7) as f64 - 3.0);
        let expect = b.clone().lu().solve(&(-&c)).unwrap();
        let p = Problem::quadratic(b, c).unwrap();
        for rep in both(&p, 1e-8, 1e-4, &DVector::zeros(n), seed) {
            prop_assert_eq!(rep.status, Status::Converged);
            prop_assert!((final_point(&rep) - &expect).amax() < 1e-7);
        }
    }
}
