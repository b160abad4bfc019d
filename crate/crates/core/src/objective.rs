//! Objective oracles: value, Riemannian gradient and Hessian-vector products,
//! with explicit operation counters, plus finite-difference validators.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{Euclidean, Manifold, ManifoldPoint, RetractionKind, Sphere, TangentVector};

/// Unit-operation counters for one run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub func_evals: u64,
    pub grad_evals: u64,
    pub hess_vec_products: u64,
    pub meo_calls: u64,
}

impl Counters {
    /// Gradient evaluations plus Hessian-vector products.
    pub fn operations(&self) -> u64 {
        self.grad_evals + self.hess_vec_products
    }
}

/// A self-adjoint linear operator on one tangent space, acting on ambient coordinates.
pub trait HessVec: Debug + Send + Sync {
    fn dim(&self) -> usize;

    /// Applies the operator; every call counts one Hessian-vector product.
    fn apply(&self, v: &DVector<f64>, counters: &mut Counters) -> DVector<f64>;

    /// Removes the components of `v` outside the tangent space. Free of charge.
    fn project(&self, _v: &mut DVector<f64>) {}
}

/// Explicit symmetric matrix acting as a Hessian. Mostly useful for tests and
/// for problems that are small enough to store their Hessian.
#[derive(Clone, Debug)]
pub struct DenseHessian {
    pub matrix: DMatrix<f64>,
}

impl DenseHessian {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }
}

impl HessVec for DenseHessian {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply(&self, v: &DVector<f64>, counters: &mut Counters) -> DVector<f64> {
        counters.hess_vec_products += 1;
        &self.matrix * v
    }
}

/// Riemannian Hessian of the Rayleigh quotient on the sphere:
/// `v ↦ 2P_x(A − (xᵀAx)I)P_x v`, which vanishes on the normal direction.
#[derive(Debug)]
struct RayleighHessian {
    a: Arc<DMatrix<f64>>,
    x: DVector<f64>,
    fx: f64,
}

impl HessVec for RayleighHessian {
    fn dim(&self) -> usize {
        self.x.len()
    }

    fn apply(&self, v: &DVector<f64>, counters: &mut Counters) -> DVector<f64> {
        counters.hess_vec_products += 1;
        let pv = v - &self.x * self.x.dot(v);
        let av = &*self.a * &pv;
        let proj = &av - &self.x * self.x.dot(&av);
        (proj - pv * self.fx) * 2.0
    }

    fn project(&self, v: &mut DVector<f64>) {
        let c = self.x.dot(v);
        v.axpy(-c, &self.x, 1.0);
    }
}

/// `v ↦ diag(d) v + B v`.
#[derive(Debug)]
struct DiagPlusMatrix {
    diag: DVector<f64>,
    b: Arc<DMatrix<f64>>,
}

impl HessVec for DiagPlusMatrix {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, v: &DVector<f64>, counters: &mut Counters) -> DVector<f64> {
        counters.hess_vec_products += 1;
        self.diag.component_mul(v) + &*self.b * v
    }
}

/// Cached oracle output at one iterate: `f(x)`, `grad f(x)` and `Hess f(x)[·]`.
#[derive(Clone, Debug)]
pub struct ObjectiveEval {
    pub point: Arc<ManifoldPoint>,
    pub value: f64,
    pub gradient: TangentVector,
    pub hessian: Arc<dyn HessVec>,
}

impl ObjectiveEval {
    pub fn grad_norm(&self) -> f64 {
        self.gradient.norm()
    }

    pub fn hess_vec(&self, v: &TangentVector, counters: &mut Counters) -> Result<TangentVector> {
        if !v.is_based_at(&self.point) {
            return Err(Error::contract("Hessian applied to a vector from another tangent space"));
        }
        Ok(TangentVector::new(
            self.hessian.apply(&v.coords, counters),
            Arc::clone(&self.point),
        ))
    }
}

/// Smooth objective on a manifold.
pub trait Objective: Debug + Send + Sync {
    fn manifold(&self) -> &dyn Manifold;

    fn value(&self, x: &ManifoldPoint, counters: &mut Counters) -> Result<f64>;

    fn evaluate(&self, x: &Arc<ManifoldPoint>, counters: &mut Counters) -> Result<ObjectiveEval>;

    fn name(&self) -> String {
        "custom".to_string()
    }
}

/// Built-in test problems.
#[derive(Clone, Debug, PartialEq)]
pub enum ProblemSpec {
    /// `f(x) = xᵀAx` on the unit sphere.
    Rayleigh { a: DMatrix<f64> },
    /// `f(x) = Σ|xᵢ−aᵢ|^{2+μ}/(2+μ) + ½xᵀBx` on ℝⁿ; Hessian is μ-Hölder at `a`.
    HolderWell {
        center: DVector<f64>,
        mu: f64,
        b: DMatrix<f64>,
    },
    /// `f(x) = ½xᵀBx + cᵀx` on ℝⁿ.
    Quadratic { b: DMatrix<f64>, c: DVector<f64> },
}

#[derive(Clone, Debug)]
enum Geometry {
    Sphere(Sphere),
    Euclidean(Euclidean),
}

#[derive(Clone, Debug)]
pub struct Problem {
    spec: ProblemSpec,
    geometry: Geometry,
    // shared with Hessian operators handed out by `evaluate`
    matrix: Arc<DMatrix<f64>>,
}

fn check_symmetric(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::config(format!("{what} must be square")));
    }
    let scale = m.amax().max(1.0);
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::config(format!("{what} must be symmetric")));
            }
        }
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(what.to_string()));
    }
    Ok(())
}

impl Problem {
    pub fn new(spec: ProblemSpec) -> Result<Self> {
        let (geometry, matrix) = match &spec {
            ProblemSpec::Rayleigh { a } => {
                check_symmetric(a, "Rayleigh matrix A")?;
                if a.nrows() < 2 {
                    return Err(Error::config("Rayleigh problem needs n >= 2"));
                }
                (Geometry::Sphere(Sphere::new(a.nrows())), a.clone())
            }
            ProblemSpec::HolderWell { center, mu, b } => {
                check_symmetric(b, "HolderWell matrix B")?;
                if !(*mu > 0.0 && *mu <= 1.0) {
                    return Err(Error::config(format!("Hölder exponent mu = {mu} must lie in (0, 1]")));
                }
                if center.len() != b.nrows() {
                    return Err(Error::DimensionMismatch {
                        expected: b.nrows(),
                        got: center.len(),
                    });
                }
                (Geometry::Euclidean(Euclidean::new(b.nrows())), b.clone())
            }
            ProblemSpec::Quadratic { b, c } => {
                check_symmetric(b, "quadratic matrix B")?;
                if c.len() != b.nrows() {
                    return Err(Error::DimensionMismatch {
                        expected: b.nrows(),
                        got: c.len(),
                    });
                }
                (Geometry::Euclidean(Euclidean::new(b.nrows())), b.clone())
            }
        };
        Ok(Self {
            spec,
            geometry,
            matrix: Arc::new(matrix),
        })
    }

    pub fn rayleigh(a: DMatrix<f64>) -> Result<Self> {
        Self::new(ProblemSpec::Rayleigh { a })
    }

    /// Rayleigh problem with `A = Q diag(spectrum) Qᵀ`; `Q` is Haar-random when `rng` is given,
    /// identity otherwise.
    pub fn rayleigh_planted(spectrum: &[f64], rng: Option<&mut dyn RngCore>) -> Result<Self> {
        Self::rayleigh(planted_matrix(spectrum, rng))
    }

    pub fn holder_well(center: DVector<f64>, mu: f64, b: DMatrix<f64>) -> Result<Self> {
        Self::new(ProblemSpec::HolderWell { center, mu, b })
    }

    pub fn quadratic(b: DMatrix<f64>, c: DVector<f64>) -> Result<Self> {
        Self::new(ProblemSpec::Quadratic { b, c })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Whether `B` (HolderWell) has a negative eigenvalue, i.e. the well has a saddle at `a`.
    pub fn is_indefinite(&self) -> bool {
        SymmetricEigen::new((*self.matrix).clone()).eigenvalues.min() < 0.0
    }

    fn check(&self, x: &ManifoldPoint) -> Result<()> {
        self.manifold().check_point(x)
    }
}

/// `Q diag(spectrum) Qᵀ` with Haar-random orthogonal `Q` (or the identity).
pub fn planted_matrix(spectrum: &[f64], rng: Option<&mut dyn RngCore>) -> DMatrix<f64> {
    let n = spectrum.len();
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(spectrum));
    match rng {
        None => d,
        Some(rng) => {
            let q = random_orthogonal(n, rng);
            let m = &q * d * q.transpose();
            (&m + m.transpose()) * 0.5
        }
    }
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with sign fix).
pub fn random_orthogonal(n: usize, rng: &mut dyn RngCore) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rand::Rng::sample::<f64, _>(rng, rand_distr::StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

impl Objective for Problem {
    fn name(&self) -> String {
        match self.spec {
            ProblemSpec::Rayleigh { .. } => "rayleigh",
            ProblemSpec::HolderWell { .. } => "holder_well",
            ProblemSpec::Quadratic { .. } => "quadratic",
        }
        .to_string()
    }

    fn manifold(&self) -> &dyn Manifold {
        match &self.geometry {
            Geometry::Sphere(s) => s,
            Geometry::Euclidean(e) => e,
        }
    }

    fn value(&self, x: &ManifoldPoint, counters: &mut Counters) -> Result<f64> {
        self.check(x)?;
        counters.func_evals += 1;
        let v = &x.coords;
        Ok(match &self.spec {
            ProblemSpec::Rayleigh { .. } => v.dot(&(&*self.matrix * v)),
            ProblemSpec::HolderWell { center, mu, .. } => {
                let p = 2.0 + mu;
                let well: f64 = v.iter().zip(center.iter()).map(|(xi, ai)| (xi - ai).abs().powf(p)).sum();
                well / p + 0.5 * v.dot(&(&*self.matrix * v))
            }
            ProblemSpec::Quadratic { c, .. } => 0.5 * v.dot(&(&*self.matrix * v)) + c.dot(v),
        })
    }

    fn evaluate(&self, x: &Arc<ManifoldPoint>, counters: &mut Counters) -> Result<ObjectiveEval> {
        self.check(x)?;
        counters.func_evals += 1;
        counters.grad_evals += 1;
        let v = &x.coords;
        let bx = &*self.matrix * v;
        let (value, grad, hessian): (f64, DVector<f64>, Arc<dyn HessVec>) = match &self.spec {
            ProblemSpec::Rayleigh { .. } => {
                let fx = v.dot(&bx);
                let grad = (&bx - v * fx) * 2.0;
                let hess = RayleighHessian {
                    a: Arc::clone(&self.matrix),
                    x: v.clone(),
                    fx,
                };
                (fx, grad, Arc::new(hess))
            }
            ProblemSpec::HolderWell { center, mu, .. } => {
                let p = 2.0 + mu;
                let d = v - center;
                let well: f64 = d.iter().map(|t| t.abs().powf(p)).sum();
                let value = well / p + 0.5 * v.dot(&bx);
                let grad = d.map(|t| t.signum() * t.abs().powf(1.0 + mu)) + &bx;
                let diag = d.map(|t| (1.0 + mu) * t.abs().powf(*mu));
                let hess = DiagPlusMatrix {
                    diag,
                    b: Arc::clone(&self.matrix),
                };
                (value, grad, Arc::new(hess))
            }
            ProblemSpec::Quadratic { c, .. } => {
                let value = 0.5 * v.dot(&bx) + c.dot(v);
                let hess = DiagPlusMatrix {
                    diag: DVector::zeros(v.len()),
                    b: Arc::clone(&self.matrix),
                };
                (value, bx + c, Arc::new(hess))
            }
        };
        if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("objective evaluation".into()));
        }
        Ok(ObjectiveEval {
            point: Arc::clone(x),
            value,
            gradient: TangentVector::new(grad, Arc::clone(x)),
            hessian,
        })
    }
}

/// Orthonormal basis of `T_x M` as the columns of an ambient matrix.
pub fn tangent_basis(manifold: &dyn Manifold, x: &ManifoldPoint) -> DMatrix<f64> {
    let n = x.dim();
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(manifold.dim());
    for i in 0..n {
        if cols.len() == manifold.dim() {
            break;
        }
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        let mut v = manifold.project_tangent(&x.coords, &e);
        for _ in 0..2 {
            for c in &cols {
                let a = c.dot(&v);
                v -= c * a;
            }
        }
        let nv = v.norm();
        if nv > 1e-8 {
            cols.push(v / nv);
        }
    }
    DMatrix::from_columns(&cols)
}

/// Matrix of the Riemannian Hessian in an orthonormal tangent basis (dense oracle;
/// costs one uncounted product per tangent dimension).
pub fn dense_tangent_hessian(problem: &dyn Objective, x: &Arc<ManifoldPoint>) -> Result<DMatrix<f64>> {
    let mut scratch = Counters::default();
    let eval = problem.evaluate(x, &mut scratch)?;
    let basis = tangent_basis(problem.manifold(), x);
    let d = basis.ncols();
    let mut h = DMatrix::zeros(d, d);
    for j in 0..d {
        let hv = eval.hessian.apply(&basis.column(j).into_owned(), &mut scratch);
        let col = basis.transpose() * hv;
        h.set_column(j, &col);
    }
    Ok((&h + h.transpose()) * 0.5)
}

/// Smallest eigenvalue of the Riemannian Hessian at `x` by dense eigendecomposition.
pub fn dense_min_eigenvalue(problem: &dyn Objective, x: &Arc<ManifoldPoint>) -> Result<f64> {
    let h = dense_tangent_hessian(problem, x)?;
    Ok(SymmetricEigen::new(h).eigenvalues.min())
}

const FD_DIRECTIONS: usize = 10;
const FD_STEP: f64 = 1e-6;

/// Max relative error between `⟨grad f, η⟩` and central differences of `f ∘ R_x`
/// along random unit tangents. Errors are measured relative to `‖grad f(x)‖`, so
/// the check is meaningful away from critical points.
pub fn check_gradient_fd(problem: &dyn Objective, x: &Arc<ManifoldPoint>, rng: &mut dyn RngCore) -> Result<f64> {
    let m = problem.manifold();
    let mut c = Counters::default();
    let eval = problem.evaluate(x, &mut c)?;
    let scale = eval.grad_norm().max(1e-12);
    let mut worst: f64 = 0.0;
    for _ in 0..FD_DIRECTIONS {
        let eta = m.random_unit_tangent(x, rng);
        let plus = m.retract(x, &eta.scaled(FD_STEP), RetractionKind::Exponential)?;
        let minus = m.retract(x, &eta.scaled(-FD_STEP), RetractionKind::Exponential)?;
        let fd = (problem.value(&plus, &mut c)? - problem.value(&minus, &mut c)?) / (2.0 * FD_STEP);
        let slope = eval.gradient.coords.dot(&eta.coords);
        worst = worst.max((fd - slope).abs() / scale);
    }
    Ok(worst)
}

/// Max relative error between `Hess f(x)[η]` and central differences of the
/// gradient along geodesics, transported back to `T_x M`.
pub fn check_hessvec_fd(problem: &dyn Objective, x: &Arc<ManifoldPoint>, rng: &mut dyn RngCore) -> Result<f64> {
    let m = problem.manifold();
    let mut c = Counters::default();
    let eval = problem.evaluate(x, &mut c)?;
    let mut worst: f64 = 0.0;
    for _ in 0..FD_DIRECTIONS {
        let eta = m.random_unit_tangent(x, rng);
        let hv = eval.hess_vec(&eta, &mut c)?;
        let mut back = Vec::with_capacity(2);
        for s in [FD_STEP, -FD_STEP] {
            let y = Arc::new(m.retract(x, &eta.scaled(s), RetractionKind::Exponential)?);
            let gy = problem.evaluate(&y, &mut c)?.gradient;
            back.push(m.transport(&y, x, &gy)?.coords);
        }
        let fd = (&back[0] - &back[1]) / (2.0 * FD_STEP);
        let scale = hv.norm().max(fd.norm()).max(1e-12);
        worst = worst.max((fd - &hv.coords).norm() / scale);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    fn point(p: &Problem, c: Vec<f64>) -> Arc<ManifoldPoint> {
        Arc::new(p.manifold().point(DVector::from_vec(c)).unwrap())
    }

    fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let g = DMatrix::from_fn(n, n, |_, _| rand::Rng::random_range(rng, -1.0..1.0));
        (&g + g.transpose()) * 0.5
    }

    #[test]
    fn rayleigh_examples() {
        let p = Problem::rayleigh(diag(&[1.0, 2.0])).unwrap();
        let mut c = Counters::default();
        let ev = p.evaluate(&point(&p, vec![1.0, 0.0]), &mut c).unwrap();
        assert_eq!(ev.value, 1.0);
        assert_eq!(ev.grad_norm(), 0.0);

        let s = 1.0 / 2f64.sqrt();
        let ev = p.evaluate(&point(&p, vec![s, s]), &mut c).unwrap();
        assert_relative_eq!(ev.value, 1.5, epsilon = 1e-15);
        // 2(Ax − 1.5x) = 2(s − 1.5s, 2s − 1.5s) = (−s, s)
        assert_relative_eq!(ev.gradient.coords, DVector::from_vec(vec![-s, s]), epsilon = 1e-15);
        assert_relative_eq!(ev.grad_norm(), 1.0, epsilon = 1e-15);
        assert_eq!(c.func_evals, 2);
        assert_eq!(c.grad_evals, 2);
        assert_eq!(c.hess_vec_products, 0);
    }

    #[test]
    fn holder_well_example() {
        let p = Problem::holder_well(DVector::zeros(2), 1.0, DMatrix::zeros(2, 2)).unwrap();
        let mut c = Counters::default();
        let ev = p.evaluate(&point(&p, vec![1.0, 0.0]), &mut c).unwrap();
        assert_relative_eq!(ev.value, 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(ev.gradient.coords, DVector::from_vec(vec![1.0, 0.0]));
        let v = TangentVector::new(DVector::from_vec(vec![1.0, 1.0]), Arc::clone(&ev.point));
        let hv = ev.hess_vec(&v, &mut c).unwrap();
        assert_eq!(hv.coords, DVector::from_vec(vec![2.0, 0.0]));
        assert_eq!(c.hess_vec_products, 1);
    }

    #[test]
    fn wrong_manifold_is_contract_error() {
        let p = Problem::rayleigh(diag(&[1.0, 2.0])).unwrap();
        let x = Arc::new(Euclidean::new(2).point(DVector::from_vec(vec![1.0, 0.0])).unwrap());
        let mut c = Counters::default();
        assert!(matches!(p.evaluate(&x, &mut c), Err(Error::Contract(_))));
    }

    #[test]
    fn invalid_problems_rejected() {
        let mut a = diag(&[1.0, 2.0]);
        a[(0, 1)] = 1.0;
        assert!(Problem::rayleigh(a).is_err());
        assert!(Problem::holder_well(DVector::zeros(2), 1.5, DMatrix::zeros(2, 2)).is_err());
        assert!(Problem::holder_well(DVector::zeros(2), 0.0, DMatrix::zeros(2, 2)).is_err());
        assert!(Problem::holder_well(DVector::zeros(3), 0.5, DMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn gradient_fd_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_symmetric(8, &mut rng);
        let p = Problem::rayleigh(a).unwrap();
        for _ in 0..5 {
            let x = Arc::new(p.manifold().random_point(&mut rng));
            assert!(check_gradient_fd(&p, &x, &mut rng).unwrap() <= 1e-5);
        }

        let center = DVector::from_fn(6, |i, _| 0.1 * i as f64);
        let b = random_symmetric(6, &mut rng);
        let p = Problem::holder_well(center, 1.0, b).unwrap();
        let x = point(&p, vec![1.0, -0.7, 0.9, 1.5, -0.2, 2.0]);
        assert!(check_gradient_fd(&p, &x, &mut rng).unwrap() <= 1e-5);

        let b = random_symmetric(5, &mut rng);
        let cvec = DVector::from_fn(5, |i, _| 1.0 - 0.3 * i as f64);
        let p = Problem::quadratic(b, cvec).unwrap();
        let x = point(&p, vec![0.2, -0.1, 0.3, 0.05, -0.4]);
        assert!(check_gradient_fd(&p, &x, &mut rng).unwrap() <= 1e-9);
    }

    #[test]
    fn hessvec_fd_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_symmetric(8, &mut rng);
        let p = Problem::rayleigh(a).unwrap();
        for _ in 0..5 {
            let x = Arc::new(p.manifold().random_point(&mut rng));
            assert!(check_hessvec_fd(&p, &x, &mut rng).unwrap() <= 1e-4);
        }

        let b = random_symmetric(4, &mut rng);
        let p = Problem::quadratic(b, DVector::zeros(4)).unwrap();
        let x = point(&p, vec![0.3, -1.0, 2.0, 0.5]);
        assert!(check_hessvec_fd(&p, &x, &mut rng).unwrap() <= 1e-9);

        let b = random_symmetric(4, &mut rng);
        let p = Problem::holder_well(DVector::zeros(4), 0.5, b).unwrap();
        let x = point(&p, vec![0.8, -1.2, 0.5, 2.0]);
        assert!(check_hessvec_fd(&p, &x, &mut rng).unwrap() <= 1e-3);
    }

    #[test]
    fn hessian_is_self_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let problems = vec![
            Problem::rayleigh(random_symmetric(7, &mut rng)).unwrap(),
            Problem::holder_well(DVector::zeros(7), 0.5, random_symmetric(7, &mut rng)).unwrap(),
        ];
        for p in &problems {
            let x = Arc::new(p.manifold().random_point(&mut rng));
            let ev = p.evaluate(&x, &mut Counters::default()).unwrap();
            let mut c = Counters::default();
            for _ in 0..100 {
                let u = p.manifold().random_unit_tangent(&x, &mut rng);
                let v = p.manifold().random_unit_tangent(&x, &mut rng).scaled(2.0);
                let hu = ev.hess_vec(&u, &mut c).unwrap();
                let hv = ev.hess_vec(&v, &mut c).unwrap();
                let lhs = u.coords.dot(&hv.coords);
                let rhs = hu.coords.dot(&v.coords);
                assert!((lhs - rhs).abs() <= 1e-10 * u.norm() * v.norm());
            }
            assert_eq!(c.hess_vec_products, 200);
        }
    }

    #[test]
    fn holder_hessian_continuity() {
        // ‖H(x) − H(y)‖ = max_i (1+μ)| |dxᵢ|^μ − |dyᵢ|^μ | ≤ (1+μ)‖x−y‖^μ (B cancels)
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mu = 0.5;
        let center = DVector::from_vec(vec![0.2, -0.1, 0.4]);
        let p = Problem::holder_well(center.clone(), mu, random_symmetric(3, &mut rng)).unwrap();
        for _ in 0..200 {
            let dx = DVector::from_fn(3, |_, _| rand::Rng::random_range(&mut rng, -0.1..0.1));
            let dy = DVector::from_fn(3, |_, _| rand::Rng::random_range(&mut rng, -0.1..0.1));
            let x = point(&p, (&center + &dx).as_slice().to_vec());
            let y = point(&p, (&center + &dy).as_slice().to_vec());
            let hx = dense_tangent_hessian(&p, &x).unwrap();
            let hy = dense_tangent_hessian(&p, &y).unwrap();
            let diff = SymmetricEigen::new(hx - hy).eigenvalues.amax();
            let dist = (&x.coords - &y.coords).norm();
            assert!(diff <= (1.0 + mu) * dist.powf(mu) + 1e-12);
        }
    }

    #[test]
    fn dense_hessian_at_rayleigh_eigenvectors() {
        let p = Problem::rayleigh(diag(&[1.0, 2.0, 3.0])).unwrap();
        let x = point(&p, vec![0.0, 1.0, 0.0]);
        // Hess at e₂ has eigenvalues 2(λᵢ − 2) on the tangent space: {−2, 2}
        let l = dense_min_eigenvalue(&p, &x).unwrap();
        assert_relative_eq!(l, -2.0, epsilon = 1e-12);
        let x = point(&p, vec![1.0, 0.0, 0.0]);
        assert_relative_eq!(dense_min_eigenvalue(&p, &x).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn planted_matrix_has_the_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let spectrum = [-3.0, 0.5, 1.0, 7.0];
        let m = planted_matrix(&spectrum, Some(&mut rng));
        let mut eig: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in eig.iter().zip(spectrum.iter()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }
}
