//! Domain representations and distance oracles.
//!
//! A domain is a compact `K = closure(Omega)` described by a [`Shape`]
//! (an oriented-distance oracle `b` with metric projection). Two wrappers add
//! the data the mesh constructions consume:
//!
//! * [`SmoothDomain`]: a validated lower bound on the reach of the boundary.
//! * [`StarDomain`]: a star center and the radius of a uniform inner tangent ball.

mod atlas;
mod curve;
mod shape;
mod surface;

pub use atlas::{BoundaryAtlas, Chart};
pub use curve::ArcLength;
pub use shape::{Projection, RadialCurve, RoundedPolygon, Shape};
pub use surface::{geodesic_fill_distance, SurfaceGraph};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned bounding box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len(), "bbox corners must share a dimension");
        Self { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn diagonal(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *v >= a - tol && *v <= b + tol)
    }

    /// Box grown by `pad` on every side.
    pub fn inflate(&self, pad: f64) -> Self {
        Self::new(self.lo.iter().map(|v| v - pad).collect(), self.hi.iter().map(|v| v + pad).collect())
    }
}

/// Shared oracle interface of [`SmoothDomain`] and [`StarDomain`].
pub trait Domain: Send + Sync {
    fn shape(&self) -> &Shape;

    /// Absolute tolerance for geometric predicates.
    fn tolerance(&self) -> f64;

    fn dim(&self) -> usize {
        self.shape().dim()
    }

    fn bbox(&self) -> BBox {
        self.shape().bbox()
    }

    fn diameter(&self) -> f64 {
        self.shape().diameter()
    }

    fn oriented_distance(&self, x: &[f64]) -> f64 {
        self.shape().oriented_distance(x)
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.oriented_distance(x) <= self.tolerance()
    }

    /// Center used by polar control grids and radial clamping.
    fn star_center(&self) -> Vec<f64> {
        self.shape().center()
    }

    /// Atlas of boundary charts, available for 3D shapes.
    fn atlas(&self) -> Option<BoundaryAtlas> {
        match self.shape() {
            Shape::Ball { center, radius } => Some(BoundaryAtlas::sphere(*center, *radius)),
            _ => None,
        }
    }

    /// Pulls `x` radially towards the star center until it lies in `K`.
    fn clamp_into(&self, x: &mut [f64]) {
        if self.oriented_distance(x) <= 0.0 {
            return;
        }
        let c = self.star_center();
        let v: Vec<f64> = x.iter().zip(&c).map(|(a, b)| a - b).collect();
        let r = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if r == 0.0 {
            return;
        }
        let dir: Vec<f64> = v.iter().map(|t| t / r).collect();
        let exit = self.shape().ray_exit(&c, &dir);
        // land strictly inside so `contains` holds at the tolerance
        let s = exit.min(r) * (1.0 - 4.0 * f64::EPSILON);
        for k in 0..x.len() {
            x[k] = c[k] + s * dir[k];
        }
    }
}

/// Domain with a validated lower bound on the reach of its boundary.
#[derive(Clone, Debug)]
pub struct SmoothDomain {
    shape: Shape,
    reach: f64,
    tol: f64,
}

impl SmoothDomain {
    /// Builds the domain and validates the declared reach with sampled
    /// double-ball tests and, for planar curves, the curvature bound.
    pub fn new(shape: Shape, reach: f64) -> Result<Self> {
        let tol = 1e-9 * shape.diameter();
        Self::with_tolerance(shape, reach, tol)
    }

    pub fn with_tolerance(shape: Shape, reach: f64, tol: f64) -> Result<Self> {
        if !(reach > 0.0) {
            return Err(Error::InvalidDomain("reach must be positive".into()));
        }
        let kmax = shape.max_curvature();
        if reach * kmax > 1.0 + 1e-12 {
            return Err(Error::InvalidDomain(format!(
                "declared reach {reach} exceeds the curvature radius {}",
                1.0 / kmax
            )));
        }
        let domain = Self { shape, reach, tol };
        let report = validate_reach(&domain, reach, 256);
        if !report.valid {
            return Err(Error::InvalidDomain(format!(
                "declared reach {reach} fails the double-ball test (violation {:.3e})",
                report.worst_violation
            )));
        }
        Ok(domain)
    }

    pub fn reach(&self) -> f64 {
        self.reach
    }
}

impl Domain for SmoothDomain {
    fn shape(&self) -> &Shape {
        &self.shape
    }

    fn tolerance(&self) -> f64 {
        self.tol
    }
}

/// Domain star-shaped with respect to `center`, with a uniform inner
/// tangent ball of radius `r_ball`.
#[derive(Clone, Debug)]
pub struct StarDomain {
    shape: Shape,
    center: Vec<f64>,
    lipschitz: f64,
    r_ball: f64,
    tol: f64,
}

impl StarDomain {
    pub fn new(shape: Shape, center: Option<Vec<f64>>, lipschitz: f64, r_ball: f64) -> Result<Self> {
        let center = center.unwrap_or_else(|| shape.center());
        if center.len() != shape.dim() {
            return Err(Error::InvalidDomain("center dimension mismatch".into()));
        }
        if !(r_ball > 0.0) {
            return Err(Error::InvalidDomain("inner ball radius must be positive".into()));
        }
        if !(lipschitz >= 0.0) {
            return Err(Error::InvalidDomain("Lipschitz bound must be nonnegative".into()));
        }
        let tol = 1e-9 * shape.diameter();
        let domain = Self { shape, center, lipschitz, r_ball, tol };
        domain.check()?;
        Ok(domain)
    }

    fn check(&self) -> Result<()> {
        let c = &self.center;
        if self.shape.oriented_distance(c) >= 0.0 {
            return Err(Error::InvalidDomain("star center must be interior".into()));
        }
        let samples = boundary_samples(&self.shape, 512);
        let mut min_rho = f64::INFINITY;
        for x in &samples {
            let rho = dist(x, c);
            min_rho = min_rho.min(rho);
            for k in 1..16 {
                let t = k as f64 / 16.0;
                let y: Vec<f64> = c.iter().zip(x).map(|(a, b)| a + t * (b - a)).collect();
                if self.shape.oriented_distance(&y) >= 0.0 {
                    return Err(Error::InvalidDomain("domain is not star-shaped w.r.t. its center".into()));
                }
            }
        }
        if self.r_ball > min_rho + self.tol {
            return Err(Error::InvalidDomain(format!(
                "inner ball radius {} exceeds the minimal radial extent {min_rho}",
                self.r_ball
            )));
        }
        for x in samples.iter().step_by(4) {
            let p = self.shape.project(x)?;
            let center: Vec<f64> = x.iter().zip(&p.normal).map(|(a, n)| a - self.r_ball * n).collect();
            for q in ball_samples(&center, self.r_ball, self.dim()) {
                if self.shape.oriented_distance(&q) > 1e-7 * self.shape.diameter() {
                    return Err(Error::InvalidDomain(format!(
                        "inner tangent ball of radius {} leaves the domain",
                        self.r_ball
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn r_ball(&self) -> f64 {
        self.r_ball
    }
}

impl Domain for StarDomain {
    fn shape(&self) -> &Shape {
        &self.shape
    }

    fn tolerance(&self) -> f64 {
        self.tol
    }

    fn star_center(&self) -> Vec<f64> {
        self.center.clone()
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Roughly `n` points on the boundary: curve samples in 2D, a Fibonacci
/// lattice mapped through the radial exit function in 3D.
pub fn boundary_samples(shape: &Shape, n: usize) -> Vec<Vec<f64>> {
    if shape.dim() == 2 {
        (0..n).map(|i| shape.curve_point(i as f64 / n as f64).expect("planar").to_vec()).collect()
    } else {
        let c = shape.center();
        fibonacci_sphere(n)
            .into_iter()
            .map(|u| {
                let r = shape.ray_exit(&c, &u);
                (0..3).map(|k| c[k] + r * u[k]).collect()
            })
            .collect()
    }
}

/// `n` nearly uniform unit vectors on the 2-sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<Vec<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let (s, c) = (golden * i as f64).sin_cos();
            vec![r * c, r * s, z]
        })
        .collect()
}

/// Concentric sample rings (2D) or shells (3D) filling a closed ball.
fn ball_samples(center: &[f64], r: f64, dim: usize) -> Vec<Vec<f64>> {
    let mut out = vec![center.to_vec()];
    for k in 1..=4 {
        let rr = r * k as f64 / 4.0;
        if dim == 2 {
            for j in 0..64 {
                let (s, c) = (std::f64::consts::TAU * j as f64 / 64.0).sin_cos();
                out.push(vec![center[0] + rr * c, center[1] + rr * s]);
            }
        } else {
            for u in fibonacci_sphere(128) {
                out.push((0..3).map(|i| center[i] + rr * u[i]).collect());
            }
        }
    }
    out
}

/// `d_{complement}(x) = max(0, -b(x))`.
pub fn distance_to_complement<D: Domain + ?Sized>(domain: &D, x: &[f64]) -> f64 {
    (-domain.oriented_distance(x)).max(0.0)
}

/// Gradient of the oriented distance `b`: the outward unit normal at the
/// foot of the metric projection. Matches finite differences of `b`.
pub fn oriented_distance_gradient<D: Domain + ?Sized>(domain: &D, x: &[f64]) -> Result<Vec<f64>> {
    Ok(domain.shape().project(x)?.normal)
}

/// `-grad b`. On the boundary this is the inward unit normal along which
/// boundary meshes are transported onto interior level sets.
pub fn inward_normal<D: Domain + ?Sized>(domain: &D, x: &[f64]) -> Result<Vec<f64>> {
    Ok(oriented_distance_gradient(domain, x)?.into_iter().map(|v| -v).collect())
}

/// Nearest boundary point of `x`.
pub fn metric_projection<D: Domain + ?Sized>(domain: &D, x: &[f64]) -> Result<Vec<f64>> {
    Ok(domain.shape().project(x)?.foot)
}

/// Outcome of the sampled double-ball reach test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReachReport {
    pub valid: bool,
    /// Largest sampled amount by which a ball leaves its side (<= tol when valid).
    pub worst_violation: f64,
    pub violating_point: Option<Vec<f64>>,
}

/// Checks `B(x - r grad b, r) in Omega` and `B(x + r grad b, r) in complement`
/// at `n_samples` boundary points.
pub fn validate_reach<D: Domain + ?Sized>(domain: &D, r: f64, n_samples: usize) -> ReachReport {
    let shape = domain.shape();
    let tol = domain.tolerance().max(1e-12);
    let mut worst = f64::NEG_INFINITY;
    let mut violating = None;
    for x in boundary_samples(shape, n_samples) {
        let Ok(p) = shape.project(&x) else { continue };
        let n = &p.normal;
        let inner: Vec<f64> = x.iter().zip(n).map(|(a, b)| a - r * b).collect();
        let outer: Vec<f64> = x.iter().zip(n).map(|(a, b)| a + r * b).collect();
        for q in ball_samples(&inner, r, shape.dim()) {
            let v = shape.oriented_distance(&q);
            if v > worst {
                worst = v;
                if v > tol {
                    violating = Some(q);
                }
            }
        }
        for q in ball_samples(&outer, r, shape.dim()) {
            let v = -shape.oriented_distance(&q);
            if v > worst {
                worst = v;
                if v > tol {
                    violating = Some(q);
                }
            }
        }
    }
    ReachReport { valid: worst <= tol, worst_violation: worst, violating_point: violating }
}

/// Length of the maximal segment from the projection `y` of `x` through `x`
/// that stays in the domain.
pub fn inner_segment_length<D: Domain + ?Sized>(domain: &D, x: &[f64]) -> Result<f64> {
    let shape = domain.shape();
    let p = shape.project(x)?;
    let y = p.foot;
    let v: Vec<f64> = p.normal.iter().map(|t| -t).collect();
    let at = |s: f64| -> Vec<f64> { y.iter().zip(&v).map(|(a, b)| a + s * b).collect() };
    let diam = shape.diameter();
    let step = diam / 1024.0;
    let mut inside = (-p.signed_distance).max(0.0);
    let mut s = inside + step;
    while s < 2.0 * diam && shape.oriented_distance(&at(s)) < 0.0 {
        inside = s;
        s += step;
    }
    let (mut lo, mut hi) = (inside, s);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if shape.oriented_distance(&at(mid)) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * diam {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_disk() -> SmoothDomain {
        SmoothDomain::new(Shape::disk([0.0, 0.0], 1.0).unwrap(), 1.0).unwrap()
    }

    fn ellipse() -> SmoothDomain {
        SmoothDomain::new(Shape::ellipse([0.0, 0.0], 2.0, 1.0).unwrap(), 0.5).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn distance_to_complement_examples() {
        let d = unit_disk();
        assert_eq!(distance_to_complement(&d, &[0.0, 0.0]), 1.0);
        assert_eq!(distance_to_complement(&d, &[2.0, 0.0]), 0.0);
        // brute force over dense boundary samples
        let brute = (0..100_000)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / 100_000.0;
                (t.cos() - 0.25).hypot(t.sin())
            })
            .fold(f64::INFINITY, f64::min);
        let v = distance_to_complement(&d, &[0.25, 0.0]);
        assert!((v - 0.75).abs() < 1e-15);
        assert!((v - brute).abs() < 1e-9);
    }

    #[test]
    fn gradient_and_inward_normal_examples() {
        let d = unit_disk();
        assert!(close(&inward_normal(&d, &[0.5, 0.0]).unwrap(), &[-1.0, 0.0], 1e-15));
        assert!(close(&inward_normal(&d, &[0.0, 0.9]).unwrap(), &[0.0, -1.0], 1e-15));
        assert!(close(&oriented_distance_gradient(&d, &[0.5, 0.0]).unwrap(), &[1.0, 0.0], 1e-15));
        let e = ellipse();
        assert!(close(&inward_normal(&e, &[0.0, 0.5]).unwrap(), &[0.0, -1.0], 1e-12));
    }

    #[test]
    fn projection_examples() {
        let d = unit_disk();
        assert!(close(&metric_projection(&d, &[0.5, 0.0]).unwrap(), &[1.0, 0.0], 1e-15));
        assert!(matches!(metric_projection(&d, &[0.0, 0.0]), Err(Error::SingularPoint { .. })));
    }

    #[test]
    fn reach_examples() {
        let d = unit_disk();
        assert!(validate_reach(&d, 0.99, 256).valid);
        assert!(!validate_reach(&d, 1.5, 256).valid);
        assert!(validate_reach(&ellipse(), 0.4, 256).valid);
        assert!(!validate_reach(&ellipse(), 0.6, 256).valid);
        assert!(SmoothDomain::new(Shape::disk([0.0, 0.0], 1.0).unwrap(), 1.5).is_err());
    }

    #[test]
    fn inner_segment_examples() {
        let d = unit_disk();
        assert!((inner_segment_length(&d, &[0.5, 0.0]).unwrap() - 2.0).abs() < 1e-12);
        let ball = SmoothDomain::new(Shape::ball([0.0; 3], 1.0).unwrap(), 1.0).unwrap();
        assert!((inner_segment_length(&ball, &[0.0, 0.0, 0.3]).unwrap() - 2.0).abs() < 1e-12);
        assert!((inner_segment_length(&ellipse(), &[0.0, 0.5]).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn star_domain_checks() {
        let s = StarDomain::new(Shape::disk([0.0, 0.0], 1.0).unwrap(), None, 0.0, 1.0).unwrap();
        assert_eq!(s.r_ball(), 1.0);
        assert!(StarDomain::new(Shape::disk([0.0, 0.0], 1.0).unwrap(), None, 0.0, 1.2).is_err());
        assert!(StarDomain::new(Shape::ellipse([0.0, 0.0], 2.0, 1.0).unwrap(), None, 0.0, 0.7).is_err());
        assert!(StarDomain::new(Shape::ellipse([0.0, 0.0], 2.0, 1.0).unwrap(), None, 0.0, 0.5).is_ok());
    }

    #[test]
    fn clamp_lands_inside() {
        let e = ellipse();
        let mut x = vec![3.0, 1.0];
        e.clamp_into(&mut x);
        assert!(e.oriented_distance(&x) <= 0.0);
        assert!(e.oriented_distance(&x) > -1e-12);
    }
}
