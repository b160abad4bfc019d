//! Geometry layer: points, tangent vectors, retractions, exponential and
//! logarithm maps, parallel transport and distances.
//!
//! Both provided manifolds are embedded submanifolds of ℝⁿ with the induced
//! metric, so points and tangent vectors are stored as ambient coordinates and
//! the inner product is the Euclidean dot product. New manifolds plug in by
//! implementing [`Manifold`].

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum drift `|‖x‖ − 1|` tolerated for sphere points.
pub const SPHERE_POINT_TOL: f64 = 1e-12;
/// Maximum `|⟨v, x⟩|` tolerated for sphere tangent vectors.
pub const SPHERE_TANGENT_TOL: f64 = 1e-10;
/// `‖x + y‖` below this is treated as an antipodal pair on the sphere.
const ANTIPODAL_TOL: f64 = 1e-10;

/// Identifies which manifold a point lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ManifoldTag {
    pub name: &'static str,
    pub ambient_dim: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RetractionKind {
    Exponential,
    Projection,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldPoint {
    pub coords: DVector<f64>,
    pub tag: ManifoldTag,
}

impl ManifoldPoint {
    pub fn new(coords: DVector<f64>, tag: ManifoldTag) -> Self {
        Self { coords, tag }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// A tangent vector together with the point whose tangent space it lives in.
#[derive(Clone, Debug)]
pub struct TangentVector {
    pub coords: DVector<f64>,
    pub base: Arc<ManifoldPoint>,
}

impl TangentVector {
    pub fn new(coords: DVector<f64>, base: Arc<ManifoldPoint>) -> Self {
        Self { coords, base }
    }

    pub fn zero(base: Arc<ManifoldPoint>) -> Self {
        Self {
            coords: DVector::zeros(base.dim()),
            base,
        }
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            coords: &self.coords * alpha,
            base: Arc::clone(&self.base),
        }
    }

    /// Same tangent space check; pointer equality short-circuits the coordinate compare.
    pub fn same_base(&self, other: &TangentVector) -> bool {
        Arc::ptr_eq(&self.base, &other.base) || *self.base == *other.base
    }

    pub fn is_based_at(&self, x: &ManifoldPoint) -> bool {
        std::ptr::eq(Arc::as_ptr(&self.base), x) || *self.base == *x
    }
}

impl PartialEq for TangentVector {
    fn eq(&self, other: &Self) -> bool {
        self.same_base(other) && self.coords == other.coords
    }
}

/// ⟨u, v⟩ at their common base point.
pub fn inner(u: &TangentVector, v: &TangentVector) -> Result<f64> {
    if !u.same_base(v) {
        return Err(Error::contract("inner product of tangent vectors at different base points"));
    }
    Ok(u.coords.dot(&v.coords))
}

/// Riemannian manifold embedded in ℝⁿ with the induced metric.
pub trait Manifold: Debug + Send + Sync {
    fn tag(&self) -> ManifoldTag;

    /// Intrinsic dimension (tangent space dimension).
    fn dim(&self) -> usize;

    fn ambient_dim(&self) -> usize {
        self.tag().ambient_dim
    }

    fn contains(&self, coords: &DVector<f64>) -> bool;

    /// Orthogonal projection of an ambient vector onto `T_x M`.
    fn project_tangent(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64>;

    /// Retraction on raw coordinates. `eta` must already be tangent at `x`.
    fn retract_coords(&self, x: &DVector<f64>, eta: &DVector<f64>, kind: RetractionKind) -> DVector<f64>;

    fn log_coords(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>>;

    fn transport_coords(&self, x: &DVector<f64>, y: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>>;

    fn distance_coords(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64;

    /// Maps ambient coordinates onto the manifold (used to build points from raw data).
    fn normalize(&self, coords: DVector<f64>) -> Result<DVector<f64>>;

    fn random_coords(&self, rng: &mut dyn rand::RngCore) -> DVector<f64>;

    fn point(&self, coords: DVector<f64>) -> Result<ManifoldPoint> {
        if coords.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                got: coords.len(),
            });
        }
        if !self.contains(&coords) {
            return Err(Error::domain(format!("coordinates are not on {}", self.tag().name)));
        }
        Ok(ManifoldPoint::new(coords, self.tag()))
    }

    fn check_point(&self, x: &ManifoldPoint) -> Result<()> {
        if x.tag != self.tag() {
            return Err(Error::contract(format!(
                "point lives on {}({}), expected {}({})",
                x.tag.name,
                x.tag.ambient_dim,
                self.tag().name,
                self.ambient_dim()
            )));
        }
        Ok(())
    }

    fn random_point(&self, rng: &mut dyn rand::RngCore) -> ManifoldPoint {
        ManifoldPoint::new(self.random_coords(rng), self.tag())
    }

    /// Uniformly distributed unit tangent vector at `x`.
    fn random_unit_tangent(&self, x: &Arc<ManifoldPoint>, rng: &mut dyn rand::RngCore) -> TangentVector {
        loop {
            let raw = gaussian_vector(x.dim(), rng);
            let v = self.project_tangent(&x.coords, &raw);
            let n = v.norm();
            if n > 1e-8 {
                return TangentVector::new(v / n, Arc::clone(x));
            }
        }
    }

    fn retract(&self, x: &ManifoldPoint, eta: &TangentVector, kind: RetractionKind) -> Result<ManifoldPoint> {
        self.check_point(x)?;
        if !eta.is_based_at(x) {
            return Err(Error::contract("retraction direction is not tangent at the given point"));
        }
        Ok(ManifoldPoint::new(self.retract_coords(&x.coords, &eta.coords, kind), x.tag))
    }

    fn log_map(&self, x: &Arc<ManifoldPoint>, y: &ManifoldPoint) -> Result<TangentVector> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(TangentVector::new(self.log_coords(&x.coords, &y.coords)?, Arc::clone(x)))
    }

    fn transport(&self, x: &ManifoldPoint, y: &Arc<ManifoldPoint>, v: &TangentVector) -> Result<TangentVector> {
        self.check_point(x)?;
        self.check_point(y)?;
        if !v.is_based_at(x) {
            return Err(Error::contract("transported vector is not tangent at the source point"));
        }
        Ok(TangentVector::new(
            self.transport_coords(&x.coords, &y.coords, &v.coords)?,
            Arc::clone(y),
        ))
    }

    fn distance(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.distance_coords(&x.coords, &y.coords))
    }
}

pub(crate) fn gaussian_vector(n: usize, rng: &mut dyn rand::RngCore) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Flat space ℝⁿ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Euclidean {
    n: usize,
}

impl Euclidean {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl Manifold for Euclidean {
    fn tag(&self) -> ManifoldTag {
        ManifoldTag {
            name: "euclidean",
            ambient_dim: self.n,
        }
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn contains(&self, coords: &DVector<f64>) -> bool {
        coords.len() == self.n && coords.iter().all(|c| c.is_finite())
    }

    fn project_tangent(&self, _x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        v.clone()
    }

    fn retract_coords(&self, x: &DVector<f64>, eta: &DVector<f64>, _kind: RetractionKind) -> DVector<f64> {
        x + eta
    }

    fn log_coords(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(y - x)
    }

    fn transport_coords(&self, _x: &DVector<f64>, _y: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(v.clone())
    }

    fn distance_coords(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (x - y).norm()
    }

    fn normalize(&self, coords: DVector<f64>) -> Result<DVector<f64>> {
        if !self.contains(&coords) {
            return Err(Error::domain("non-finite Euclidean coordinates"));
        }
        Ok(coords)
    }

    fn random_coords(&self, rng: &mut dyn rand::RngCore) -> DVector<f64> {
        gaussian_vector(self.n, rng)
    }
}

/// Unit sphere S^{n−1} ⊂ ℝⁿ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sphere {
    n: usize,
}

impl Sphere {
    /// Sphere embedded in ℝ^`ambient_dim`.
    pub fn new(ambient_dim: usize) -> Self {
        assert!(ambient_dim >= 2, "sphere needs ambient dimension at least 2");
        Self { n: ambient_dim }
    }

    /// Returns (unit direction, angle) of the geodesic from x to y.
    fn geodesic(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
        if (x + y).norm() < ANTIPODAL_TOL {
            return Err(Error::domain("antipodal points: geodesic is not unique"));
        }
        let c = x.dot(y);
        let w = y - x * c;
        let s = w.norm();
        let theta = s.atan2(c);
        if s == 0.0 {
            return Ok((DVector::zeros(x.len()), 0.0));
        }
        Ok((w / s, theta))
    }
}

impl Manifold for Sphere {
    fn tag(&self) -> ManifoldTag {
        ManifoldTag {
            name: "sphere",
            ambient_dim: self.n,
        }
    }

    fn dim(&self) -> usize {
        self.n - 1
    }

    fn contains(&self, coords: &DVector<f64>) -> bool {
        coords.len() == self.n && (coords.norm() - 1.0).abs() <= SPHERE_POINT_TOL
    }

    fn project_tangent(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        v - x * x.dot(v)
    }

    fn retract_coords(&self, x: &DVector<f64>, eta: &DVector<f64>, kind: RetractionKind) -> DVector<f64> {
        let t = eta.norm();
        if t == 0.0 {
            return x.clone();
        }
        let y = match kind {
            RetractionKind::Exponential => x * t.cos() + eta * (t.sin() / t),
            RetractionKind::Projection => x + eta,
        };
        let n = y.norm();
        y / n
    }

    fn log_coords(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        let (u, theta) = self.geodesic(x, y)?;
        Ok(u * theta)
    }

    fn transport_coords(&self, x: &DVector<f64>, y: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
        let (u, theta) = self.geodesic(x, y)?;
        if theta == 0.0 {
            return Ok(v.clone());
        }
        // Only the component along the geodesic direction rotates in the (x, u) plane.
        let a = u.dot(v);
        Ok(v + (&u * (theta.cos() - 1.0) - x * theta.sin()) * a)
    }

    fn distance_coords(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let c = x.dot(y).clamp(-1.0, 1.0);
        let s = (y - x * c).norm();
        s.atan2(c)
    }

    fn normalize(&self, coords: DVector<f64>) -> Result<DVector<f64>> {
        let n = coords.norm();
        if coords.len() != self.n || !n.is_finite() || n == 0.0 {
            return Err(Error::domain("cannot normalize onto the sphere"));
        }
        Ok(coords / n)
    }

    fn random_coords(&self, rng: &mut dyn rand::RngCore) -> DVector<f64> {
        loop {
            let v = gaussian_vector(self.n, rng);
            let n = v.norm();
            if n > 1e-8 {
                return v / n;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    fn e(n: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        v
    }

    fn sphere_point(s: &Sphere, c: DVector<f64>) -> Arc<ManifoldPoint> {
        Arc::new(s.point(c).unwrap())
    }

    #[test]
    fn inner_examples() {
        let r2 = Euclidean::new(2);
        let x = Arc::new(r2.point(DVector::from_vec(vec![0.3, -1.0])).unwrap());
        let u = TangentVector::new(DVector::from_vec(vec![1.0, 0.0]), Arc::clone(&x));
        let v = TangentVector::new(DVector::from_vec(vec![0.0, 1.0]), Arc::clone(&x));
        assert_eq!(inner(&u, &v).unwrap(), 0.0);
        let u = TangentVector::new(DVector::from_vec(vec![1.0, 2.0]), Arc::clone(&x));
        let v = TangentVector::new(DVector::from_vec(vec![3.0, 4.0]), Arc::clone(&x));
        assert_eq!(inner(&u, &v).unwrap(), 11.0);

        let s1 = Sphere::new(2);
        let b = sphere_point(&s1, e(2, 0));
        let w = TangentVector::new(DVector::from_vec(vec![0.0, 3.0]), b);
        assert_eq!(inner(&w, &w).unwrap(), 9.0);
    }

    #[test]
    fn inner_rejects_mismatched_base() {
        let r2 = Euclidean::new(2);
        let x = Arc::new(r2.point(DVector::from_vec(vec![0.0, 0.0])).unwrap());
        let y = Arc::new(r2.point(DVector::from_vec(vec![1.0, 0.0])).unwrap());
        let u = TangentVector::new(DVector::from_vec(vec![1.0, 0.0]), x);
        let v = TangentVector::new(DVector::from_vec(vec![1.0, 0.0]), y);
        assert!(matches!(inner(&u, &v), Err(Error::Contract(_))));
    }

    #[test]
    fn retract_examples() {
        let s = Sphere::new(3);
        let x = sphere_point(&s, e(3, 0));
        let eta = TangentVector::new(e(3, 1) * FRAC_PI_2, Arc::clone(&x));
        let y = s.retract(&x, &eta, RetractionKind::Exponential).unwrap();
        assert_relative_eq!(y.coords, e(3, 1), epsilon = 1e-15);

        let eta = TangentVector::new(e(3, 1), Arc::clone(&x));
        let y = s.retract(&x, &eta, RetractionKind::Projection).unwrap();
        let expected = DVector::from_vec(vec![1.0 / SQRT_2, 1.0 / SQRT_2, 0.0]);
        assert_relative_eq!(y.coords, expected, epsilon = 1e-15);

        for kind in [RetractionKind::Exponential, RetractionKind::Projection] {
            let zero = TangentVector::zero(Arc::clone(&x));
            assert_eq!(s.retract(&x, &zero, kind).unwrap(), *x);
        }

        let r = Euclidean::new(2);
        let p = Arc::new(r.point(DVector::from_vec(vec![1.0, 1.0])).unwrap());
        let eta = TangentVector::new(DVector::from_vec(vec![0.5, -2.0]), Arc::clone(&p));
        for kind in [RetractionKind::Exponential, RetractionKind::Projection] {
            let q = r.retract(&p, &eta, kind).unwrap();
            assert_eq!(q.coords, DVector::from_vec(vec![1.5, -1.0]));
        }
    }

    #[test]
    fn retract_rejects_foreign_tangent() {
        let s = Sphere::new(3);
        let x = sphere_point(&s, e(3, 0));
        let y = sphere_point(&s, e(3, 1));
        let eta = TangentVector::new(e(3, 2), y);
        assert!(s.retract(&x, &eta, RetractionKind::Projection).is_err());
        let r = Euclidean::new(3);
        assert!(matches!(r.check_point(&x), Err(Error::Contract(_))));
    }

    #[test]
    fn log_examples() {
        let s = Sphere::new(3);
        let x = sphere_point(&s, e(3, 0));
        let y = s.point(e(3, 1)).unwrap();
        let v = s.log_map(&x, &y).unwrap();
        assert_relative_eq!(v.coords, e(3, 1) * FRAC_PI_2, epsilon = 1e-15);
        let v = s.log_map(&x, &x).unwrap();
        assert_eq!(v.norm(), 0.0);

        let r = Euclidean::new(2);
        let p = Arc::new(r.point(DVector::from_vec(vec![1.0, 1.0])).unwrap());
        let q = r.point(DVector::from_vec(vec![4.0, 5.0])).unwrap();
        assert_eq!(r.log_map(&p, &q).unwrap().coords, DVector::from_vec(vec![3.0, 4.0]));
    }

    #[test]
    fn antipodal_is_domain_error() {
        let s = Sphere::new(3);
        let x = sphere_point(&s, e(3, 0));
        let y = sphere_point(&s, -e(3, 0));
        assert!(matches!(s.log_map(&x, &y), Err(Error::Domain(_))));
        let v = TangentVector::new(e(3, 1), Arc::clone(&x));
        assert!(matches!(s.transport(&x, &y, &v), Err(Error::Domain(_))));
    }

    #[test]
    fn transport_examples() {
        let r = Euclidean::new(2);
        let p = Arc::new(r.point(DVector::from_vec(vec![-3.0, 1.0])).unwrap());
        let q = Arc::new(r.point(DVector::from_vec(vec![7.0, 2.0])).unwrap());
        let v = TangentVector::new(DVector::from_vec(vec![1.0, 2.0]), Arc::clone(&p));
        assert_eq!(r.transport(&p, &q, &v).unwrap().coords, v.coords);

        let s = Sphere::new(3);
        let x = sphere_point(&s, e(3, 0));
        let y = sphere_point(&s, e(3, 1));
        let c = 2.5;
        let v = TangentVector::new(e(3, 1) * c, Arc::clone(&x));
        let w = s.transport(&x, &y, &v).unwrap();
        assert_relative_eq!(w.coords, -e(3, 0) * c, epsilon = 1e-14);

        let normal = TangentVector::new(e(3, 2) * 0.7, Arc::clone(&x));
        let w = s.transport(&x, &y, &normal).unwrap();
        assert_relative_eq!(w.coords, normal.coords, epsilon = 1e-15);
    }

    /// Integrates V' = −⟨γ', V⟩ γ along the unit-speed geodesic (the embedded
    /// sphere's parallel transport ODE) with classical RK4.
    fn transport_by_ode(x: &DVector<f64>, y: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let c = x.dot(y);
        let w = y - x * c;
        let theta = w.norm().atan2(c);
        let u = w.normalize();
        let gamma = |t: f64| x * t.cos() + &u * t.sin();
        let dgamma = |t: f64| -x * t.sin() + &u * t.cos();
        let rhs = |t: f64, vv: &DVector<f64>| -gamma(t) * dgamma(t).dot(vv);
        let steps = 2000;
        let h = theta / steps as f64;
        let mut vv = v.clone();
        for i in 0..steps {
            let t = i as f64 * h;
            let k1 = rhs(t, &vv);
            let k2 = rhs(t + h / 2.0, &(&vv + &k1 * (h / 2.0)));
            let k3 = rhs(t + h / 2.0, &(&vv + &k2 * (h / 2.0)));
            let k4 = rhs(t + h, &(&vv + &k3 * h));
            vv += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        vv
    }

    #[test]
    fn sphere_transport_matches_ode_integration() {
        let s = Sphere::new(4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let x = Arc::new(s.random_point(&mut rng));
            let y = Arc::new(s.random_point(&mut rng));
            let v = s.random_unit_tangent(&x, &mut rng).scaled(1.7);
            let closed = s.transport(&x, &y, &v).unwrap();
            let ode = transport_by_ode(&x.coords, &y.coords, &v.coords);
            assert_relative_eq!(closed.coords, ode, epsilon = 1e-10);
        }
        // the literal example from the geometry contract
        let ode = transport_by_ode(&e(3, 0), &e(3, 1), &(e(3, 1) * 2.0));
        assert_relative_eq!(ode, -e(3, 0) * 2.0, epsilon = 1e-12);
    }

    #[test]
    fn distance_examples() {
        let s = Sphere::new(3);
        let x = s.point(e(3, 0)).unwrap();
        let y = s.point(e(3, 1)).unwrap();
        assert_relative_eq!(s.distance(&x, &y).unwrap(), FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(s.distance(&x, &x).unwrap(), 0.0);
        let r = Euclidean::new(2);
        let p = r.point(DVector::from_vec(vec![0.0, 0.0])).unwrap();
        let q = r.point(DVector::from_vec(vec![3.0, 4.0])).unwrap();
        assert_eq!(r.distance(&p, &q).unwrap(), 5.0);
    }

    #[test]
    fn projection_retraction_is_second_order() {
        let s = Sphere::new(5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let x = Arc::new(s.random_point(&mut rng));
            let eta = s.random_unit_tangent(&x, &mut rng);
            let ts = [1e-2, 1e-3, 1e-4, 1e-5];
            let mut logs = Vec::new();
            for &t in &ts {
                let step = eta.scaled(t);
                let p = s.retract(&x, &step, RetractionKind::Projection).unwrap();
                let q = s.retract(&x, &step, RetractionKind::Exponential).unwrap();
                let d = s.distance(&p, &q).unwrap();
                logs.push((t.ln(), d.ln()));
            }
            // least-squares slope of log d vs log t
            let n = logs.len() as f64;
            let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
            let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let slope = sxy / sxx;
            assert!(slope >= 1.9, "fitted retraction agreement order {slope}");
        }
    }

    #[test]
    fn log_exp_identity_and_transport_isometry() {
        let s = Sphere::new(6);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let x = Arc::new(s.random_point(&mut rng));
            let y = Arc::new(s.random_point(&mut rng));
            let v = s.log_map(&x, &y).unwrap();
            assert!((v.norm() - s.distance(&x, &y).unwrap()).abs() <= 1e-10);
            let back = s.retract(&x, &v, RetractionKind::Exponential).unwrap();
            assert!((back.coords - &y.coords).norm() <= 1e-10);

            let w = s.random_unit_tangent(&x, &mut rng).scaled(3.0);
            let pw = s.transport(&x, &y, &w).unwrap();
            assert!((pw.norm() - 3.0).abs() <= 1e-10);
            assert!(pw.coords.dot(&y.coords).abs() <= SPHERE_TANGENT_TOL);
        }
    }

    #[test]
    fn retraction_keeps_points_on_sphere() {
        let s = Sphere::new(10);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut x = Arc::new(s.random_point(&mut rng));
        for i in 0..500 {
            let kind = if i % 2 == 0 {
                RetractionKind::Projection
            } else {
                RetractionKind::Exponential
            };
            let eta = s.random_unit_tangent(&x, &mut rng).scaled(0.9);
            x = Arc::new(s.retract(&x, &eta, kind).unwrap());
            assert!(s.contains(&x.coords));
        }
    }
}
