//! Built-in shapes with analytic (or Newton-refined) oriented-distance oracles.
//!
//! Sign convention: `b(x) < 0` inside, `b(x) > 0` outside, and the gradient
//! of `b` is the outward unit normal at the foot point of the projection.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use super::BBox;
use crate::error::{Error, Result};

/// Foot point of the metric projection onto the boundary, with the oriented
/// distance and the outward normal there (equal to the gradient of `b`).
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub foot: Vec<f64>,
    pub signed_distance: f64,
    pub normal: Vec<f64>,
}

#[derive(Clone, Debug)]
pub enum Shape {
    Disk { center: [f64; 2], radius: f64 },
    Ball { center: [f64; 3], radius: f64 },
    Ellipse { center: [f64; 2], a: f64, b: f64 },
    Rounded(RoundedPolygon),
    Radial(RadialCurve),
}

/// Convex polygon (or segment) inflated by a disk of radius `radius`.
#[derive(Clone, Debug)]
pub struct RoundedPolygon {
    vertices: Vec<[f64; 2]>,
    radius: f64,
    normals: Vec<[f64; 2]>,
    pieces: Vec<Piece>,
    starts: Vec<f64>,
    perimeter: f64,
}

#[derive(Clone, Copy, Debug)]
enum Piece {
    Segment { a: [f64; 2], b: [f64; 2], len: f64 },
    Arc { center: [f64; 2], start: f64, sweep: f64 },
}

/// Star-shaped curve `c + rho(theta) (cos theta, sin theta)` with a
/// trigonometric radial function.
#[derive(Clone, Debug)]
pub struct RadialCurve {
    center: [f64; 2],
    base: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
    samples: OnceLock<Vec<[f64; 2]>>,
    extent: OnceLock<BBox>,
}

const PROJECTION_SAMPLES: usize = 4096;

fn sub2(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm2(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

fn cross2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn as2(x: &[f64]) -> [f64; 2] {
    [x[0], x[1]]
}

impl RoundedPolygon {
    fn new(vertices: Vec<[f64; 2]>, radius: f64) -> Result<Self> {
        let m = vertices.len();
        if m < 2 {
            return Err(Error::InvalidDomain("rounded polygon needs at least 2 vertices".into()));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidDomain("rounding radius must be positive".into()));
        }
        let mut normals = Vec::with_capacity(m);
        for i in 0..m {
            let e = sub2(vertices[(i + 1) % m], vertices[i]);
            let len = norm2(e);
            if len == 0.0 {
                return Err(Error::InvalidDomain("repeated polygon vertex".into()));
            }
            normals.push([e[1] / len, -e[0] / len]);
        }
        if m >= 3 {
            for i in 0..m {
                let e0 = sub2(vertices[(i + 1) % m], vertices[i]);
                let e1 = sub2(vertices[(i + 2) % m], vertices[(i + 1) % m]);
                if cross2(e0, e1) <= 0.0 {
                    return Err(Error::InvalidDomain(
                        "polygon must be strictly convex and counter-clockwise".into(),
                    ));
                }
            }
        }
        let mut pieces = Vec::with_capacity(2 * m);
        for i in 0..m {
            let j = (i + 1) % m;
            let n = normals[i];
            let a = [vertices[i][0] + radius * n[0], vertices[i][1] + radius * n[1]];
            let b = [vertices[j][0] + radius * n[0], vertices[j][1] + radius * n[1]];
            pieces.push(Piece::Segment { a, b, len: norm2(sub2(b, a)) });
            let n1 = normals[j];
            let mut sweep = cross2(n, n1).atan2(dot2(n, n1));
            if sweep <= 0.0 {
                sweep += TAU;
            }
            pieces.push(Piece::Arc { center: vertices[j], start: n[1].atan2(n[0]), sweep });
        }
        let mut starts = Vec::with_capacity(pieces.len());
        let mut acc = 0.0;
        for p in &pieces {
            starts.push(acc);
            acc += match *p {
                Piece::Segment { len, .. } => len,
                Piece::Arc { sweep, .. } => radius * sweep,
            };
        }
        Ok(Self { vertices, radius, normals, pieces, starts, perimeter: acc })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    fn centroid(&self) -> [f64; 2] {
        let m = self.vertices.len() as f64;
        let s = self.vertices.iter().fold([0.0, 0.0], |a, v| [a[0] + v[0], a[1] + v[1]]);
        [s[0] / m, s[1] / m]
    }

    fn closest_on_edge(&self, i: usize, x: [f64; 2]) -> [f64; 2] {
        let a = self.vertices[i];
        let b = self.vertices[(i + 1) % self.vertices.len()];
        let e = sub2(b, a);
        let t = (dot2(sub2(x, a), e) / dot2(e, e)).clamp(0.0, 1.0);
        [a[0] + t * e[0], a[1] + t * e[1]]
    }

    fn inside_polygon(&self, x: [f64; 2]) -> bool {
        let m = self.vertices.len();
        if m == 2 {
            let q = self.closest_on_edge(0, x);
            return norm2(sub2(x, q)) <= 1e-15 * (1.0 + norm2(x));
        }
        (0..m).all(|i| cross2(sub2(self.vertices[(i + 1) % m], self.vertices[i]), sub2(x, self.vertices[i])) >= 0.0)
    }

    fn oriented_distance(&self, x: [f64; 2]) -> f64 {
        if self.inside_polygon(x) {
            let e = (0..self.vertices.len())
                .map(|i| dot2(sub2(self.vertices[i], x), self.normals[i]))
                .fold(f64::INFINITY, f64::min);
            -e.max(0.0) - self.radius
        } else {
            let d = (0..self.vertices.len())
                .map(|i| norm2(sub2(x, self.closest_on_edge(i, x))))
                .fold(f64::INFINITY, f64::min);
            d - self.radius
        }
    }

    fn project(&self, x: [f64; 2], scale: f64) -> Result<Projection> {
        let r = self.radius;
        if self.inside_polygon(x) {
            let mut dists: Vec<(f64, usize)> = (0..self.vertices.len())
                .map(|i| (dot2(sub2(self.vertices[i], x), self.normals[i]).max(0.0), i))
                .collect();
            dists.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (e, k) = dists[0];
            let n = self.normals[k];
            let foot = [x[0] + (e + r) * n[0], x[1] + (e + r) * n[1]];
            if dists.len() > 1 && dists[1].0 - e <= 1e-12 * scale {
                let n2 = self.normals[dists[1].1];
                let foot2 = [x[0] + (e + r) * n2[0], x[1] + (e + r) * n2[1]];
                let sep = norm2(sub2(foot, foot2));
                if sep > 1e-6 * scale {
                    return Err(Error::SingularPoint { point: x.to_vec(), separation: sep });
                }
            }
            Ok(Projection { foot: foot.to_vec(), signed_distance: -e - r, normal: n.to_vec() })
        } else {
            let (q, d) = (0..self.vertices.len())
                .map(|i| {
                    let q = self.closest_on_edge(i, x);
                    (q, norm2(sub2(x, q)))
                })
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty polygon");
            let n = [(x[0] - q[0]) / d, (x[1] - q[1]) / d];
            let foot = [q[0] + r * n[0], q[1] + r * n[1]];
            Ok(Projection { foot: foot.to_vec(), signed_distance: d - r, normal: n.to_vec() })
        }
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let s = s.rem_euclid(self.perimeter);
        let k = match self.starts.binary_search_by(|v| v.total_cmp(&s)) {
            Ok(k) => k,
            Err(k) => k - 1,
        };
        (k, s - self.starts[k])
    }

    /// Point, first and second derivatives with respect to normalized arc length.
    fn eval(&self, t: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
        let p = self.perimeter;
        let (k, ds) = self.locate(t * p);
        match self.pieces[k] {
            Piece::Segment { a, b, len } => {
                let u = ds / len;
                let d = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
                ([a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])], [p * d[0], p * d[1]], [0.0, 0.0])
            }
            Piece::Arc { center, start, .. } => {
                let r = self.radius;
                let ang = start + ds / r;
                let (s, c) = ang.sin_cos();
                (
                    [center[0] + r * c, center[1] + r * s],
                    [-p * s, p * c],
                    [-p * p / r * c, -p * p / r * s],
                )
            }
        }
    }
}

impl RadialCurve {
    fn rho_derivs(&self, theta: f64) -> (f64, f64, f64) {
        let mut r = self.base;
        let mut r1 = 0.0;
        let mut r2 = 0.0;
        for (k, (&c, &s)) in self.cos.iter().zip(self.sin.iter()).enumerate() {
            let kf = (k + 1) as f64;
            let (sk, ck) = (kf * theta).sin_cos();
            r += c * ck + s * sk;
            r1 += kf * (-c * sk + s * ck);
            r2 += -kf * kf * (c * ck + s * sk);
        }
        (r, r1, r2)
    }

    pub fn rho(&self, theta: f64) -> f64 {
        self.rho_derivs(theta).0
    }

    fn eval(&self, t: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
        let theta = TAU * t;
        let (r, r1, r2) = self.rho_derivs(theta);
        let (s, c) = theta.sin_cos();
        let p = [self.center[0] + r * c, self.center[1] + r * s];
        let d = [r1 * c - r * s, r1 * s + r * c];
        let dd = [r2 * c - 2.0 * r1 * s - r * c, r2 * s + 2.0 * r1 * c - r * s];
        (p, [TAU * d[0], TAU * d[1]], [TAU * TAU * dd[0], TAU * TAU * dd[1]])
    }

    fn samples(&self) -> &[[f64; 2]] {
        self.samples.get_or_init(|| {
            (0..PROJECTION_SAMPLES)
                .map(|i| self.eval(i as f64 / PROJECTION_SAMPLES as f64).0)
                .collect()
        })
    }

    fn extent(&self) -> &BBox {
        self.extent.get_or_init(|| {
            let mut lo = [f64::INFINITY; 2];
            let mut hi = [f64::NEG_INFINITY; 2];
            for i in 0..8192 {
                let (p, _, _) = self.eval(i as f64 / 8192.0);
                for k in 0..2 {
                    lo[k] = lo[k].min(p[k]);
                    hi[k] = hi[k].max(p[k]);
                }
            }
            // sampled extremes: pad by the sampling error bound
            let pad = 1e-6 * (hi[0] - lo[0]).max(hi[1] - lo[1]);
            BBox::new(vec![lo[0] - pad, lo[1] - pad], vec![hi[0] + pad, hi[1] + pad])
        })
    }

    fn inside(&self, x: [f64; 2]) -> bool {
        let v = sub2(x, self.center);
        norm2(v) < self.rho(v[1].atan2(v[0]))
    }
}

impl Shape {
    pub fn disk(center: [f64; 2], radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidDomain("disk radius must be positive".into()));
        }
        Ok(Shape::Disk { center, radius })
    }

    pub fn ball(center: [f64; 3], radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidDomain("ball radius must be positive".into()));
        }
        Ok(Shape::Ball { center, radius })
    }

    pub fn ellipse(center: [f64; 2], a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::InvalidDomain("ellipse semi-axes must be positive".into()));
        }
        Ok(Shape::Ellipse { center, a, b })
    }

    /// Points within `radius` of the horizontal segment of half-length
    /// `half_length` centred at `center`.
    pub fn stadium(center: [f64; 2], half_length: f64, radius: f64) -> Result<Self> {
        if !(half_length > 0.0) {
            return Err(Error::InvalidDomain("stadium half-length must be positive".into()));
        }
        let v = vec![[center[0] - half_length, center[1]], [center[0] + half_length, center[1]]];
        Ok(Shape::Rounded(RoundedPolygon::new(v, radius)?))
    }

    /// Convex counter-clockwise polygon inflated by `radius`.
    pub fn rounded_polygon(vertices: Vec<[f64; 2]>, radius: f64) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidDomain("rounded polygon needs at least 3 vertices".into()));
        }
        Ok(Shape::Rounded(RoundedPolygon::new(vertices, radius)?))
    }

    /// `rho(theta) = base + sum_k cos[k-1] cos(k theta) + sin[k-1] sin(k theta)`.
    pub fn star_radial(center: [f64; 2], base: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        let mut sin = sin;
        let mut cos = cos;
        let k = cos.len().max(sin.len());
        cos.resize(k, 0.0);
        sin.resize(k, 0.0);
        let curve = RadialCurve { center, base, cos, sin, samples: OnceLock::new(), extent: OnceLock::new() };
        let min_rho = (0..2048)
            .map(|i| curve.rho(TAU * i as f64 / 2048.0))
            .fold(f64::INFINITY, f64::min);
        if !(min_rho > 0.0) {
            return Err(Error::InvalidDomain("radial function must stay positive".into()));
        }
        Ok(Shape::Radial(curve))
    }

    pub fn dim(&self) -> usize {
        match self {
            Shape::Ball { .. } => 3,
            _ => 2,
        }
    }

    pub fn center(&self) -> Vec<f64> {
        match self {
            Shape::Disk { center, .. } | Shape::Ellipse { center, .. } => center.to_vec(),
            Shape::Ball { center, .. } => center.to_vec(),
            Shape::Rounded(p) => p.centroid().to_vec(),
            Shape::Radial(r) => r.center.to_vec(),
        }
    }

    pub fn bbox(&self) -> BBox {
        match self {
            Shape::Disk { center, radius } => BBox::new(
                vec![center[0] - radius, center[1] - radius],
                vec![center[0] + radius, center[1] + radius],
            ),
            Shape::Ball { center, radius } => BBox::new(
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            Shape::Ellipse { center, a, b } => {
                BBox::new(vec![center[0] - a, center[1] - b], vec![center[0] + a, center[1] + b])
            }
            Shape::Rounded(p) => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in &p.vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k] - p.radius);
                        hi[k] = hi[k].max(v[k] + p.radius);
                    }
                }
                BBox::new(lo.to_vec(), hi.to_vec())
            }
            Shape::Radial(r) => r.extent().clone(),
        }
    }

    /// Diagonal of the bounding box.
    pub fn diameter(&self) -> f64 {
        self.bbox().diagonal()
    }

    pub fn oriented_distance(&self, x: &[f64]) -> f64 {
        match self {
            Shape::Disk { center, radius } => (x[0] - center[0]).hypot(x[1] - center[1]) - radius,
            Shape::Ball { center, radius } => {
                let d: f64 = (0..3).map(|k| (x[k] - center[k]).powi(2)).sum();
                d.sqrt() - radius
            }
            Shape::Rounded(p) => p.oriented_distance(as2(x)),
            Shape::Ellipse { .. } | Shape::Radial(_) => match self.project(x) {
                Ok(p) => p.signed_distance,
                // on a medial-axis point every minimizer shares the same distance
                Err(_) => self.oriented_distance_ambiguous(x),
            },
        }
    }

    fn oriented_distance_ambiguous(&self, x: &[f64]) -> f64 {
        let y = as2(x);
        match self {
            Shape::Ellipse { center, a, b } => {
                let (p, _) = ellipse_foot(*a, *b, [y[0] - center[0], y[1] - center[1]]);
                let d = norm2(sub2([y[0] - center[0], y[1] - center[1]], p));
                let inside = ((y[0] - center[0]) / a).powi(2) + ((y[1] - center[1]) / b).powi(2) < 1.0;
                if inside { -d } else { d }
            }
            Shape::Radial(r) => {
                let mins = curve_minimizers(self, r.samples(), y);
                let d = mins[0].1;
                if r.inside(y) { -d } else { d }
            }
            _ => unreachable!("analytic shapes never report ambiguity here"),
        }
    }

    /// Metric projection onto the boundary. Fails with `SingularPoint` when two
    /// minimizers are more than `1e-6 * diameter` apart.
    pub fn project(&self, x: &[f64]) -> Result<Projection> {
        let scale = self.diameter();
        match self {
            Shape::Disk { center, radius } => {
                let v = [x[0] - center[0], x[1] - center[1]];
                let r = norm2(v);
                if r <= f64::EPSILON * radius {
                    return Err(Error::SingularPoint { point: x.to_vec(), separation: 2.0 * radius });
                }
                let n = [v[0] / r, v[1] / r];
                Ok(Projection {
                    foot: vec![center[0] + radius * n[0], center[1] + radius * n[1]],
                    signed_distance: r - radius,
                    normal: n.to_vec(),
                })
            }
            Shape::Ball { center, radius } => {
                let v: Vec<f64> = (0..3).map(|k| x[k] - center[k]).collect();
                let r = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                if r <= f64::EPSILON * radius {
                    return Err(Error::SingularPoint { point: x.to_vec(), separation: 2.0 * radius });
                }
                let n: Vec<f64> = v.iter().map(|c| c / r).collect();
                Ok(Projection {
                    foot: (0..3).map(|k| center[k] + radius * n[k]).collect(),
                    signed_distance: r - radius,
                    normal: n,
                })
            }
            Shape::Ellipse { center, a, b } => {
                let y = [x[0] - center[0], x[1] - center[1]];
                let (p, sep) = ellipse_foot(*a, *b, y);
                if sep > 1e-6 * scale {
                    return Err(Error::SingularPoint { point: x.to_vec(), separation: sep });
                }
                let n0 = [p[0] / (a * a), p[1] / (b * b)];
                let nn = norm2(n0);
                let d = norm2(sub2(y, p));
                let inside = (y[0] / a).powi(2) + (y[1] / b).powi(2) < 1.0;
                Ok(Projection {
                    foot: vec![p[0] + center[0], p[1] + center[1]],
                    signed_distance: if inside { -d } else { d },
                    normal: vec![n0[0] / nn, n0[1] / nn],
                })
            }
            Shape::Rounded(p) => p.project(as2(x), scale),
            Shape::Radial(r) => {
                let y = as2(x);
                let mins = curve_minimizers(self, r.samples(), y);
                let best = mins[0];
                let tie_tol = 1e-10 * scale;
                let (pb, db, _) = r.eval(best.0);
                for &(t, d) in &mins[1..] {
                    if d - best.1 <= tie_tol {
                        let sep = norm2(sub2(r.eval(t).0, pb));
                        if sep > 1e-6 * scale {
                            return Err(Error::SingularPoint { point: x.to_vec(), separation: sep });
                        }
                    }
                }
                let tn = norm2(db);
                let normal = [db[1] / tn, -db[0] / tn];
                let d = best.1;
                Ok(Projection {
                    foot: pb.to_vec(),
                    signed_distance: if r.inside(y) { -d } else { d },
                    normal: normal.to_vec(),
                })
            }
        }
    }

    /// Distance from the star center along unit direction `dir` to the boundary.
    /// Closed form when `origin` is the shape center, bisection otherwise.
    pub fn ray_exit(&self, origin: &[f64], dir: &[f64]) -> f64 {
        let c = self.center();
        let at_center = origin.iter().zip(&c).all(|(a, b)| (a - b).abs() <= 1e-15 * (1.0 + b.abs()));
        if at_center {
            match self {
                Shape::Disk { radius, .. } | Shape::Ball { radius, .. } => return *radius,
                Shape::Ellipse { a, b, .. } => {
                    return 1.0 / ((dir[0] / a).powi(2) + (dir[1] / b).powi(2)).sqrt();
                }
                Shape::Radial(r) => return r.rho(dir[1].atan2(dir[0])),
                Shape::Rounded(_) => {}
            }
        }
        let mut lo = 0.0;
        let mut hi = 2.0 * self.diameter();
        let at = |s: f64| -> Vec<f64> { origin.iter().zip(dir).map(|(o, d)| o + s * d).collect() };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.oriented_distance(&at(mid)) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-16 * (1.0 + hi) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Point, first and second derivative of the 2D boundary curve at `t in [0,1)`.
    /// Counter-clockwise orientation.
    pub fn curve_eval(&self, t: f64) -> Option<([f64; 2], [f64; 2], [f64; 2])> {
        match self {
            Shape::Disk { center, radius } => {
                let (s, c) = (TAU * t).sin_cos();
                let w = TAU * radius;
                Some((
                    [center[0] + radius * c, center[1] + radius * s],
                    [-w * s, w * c],
                    [-TAU * w * c, -TAU * w * s],
                ))
            }
            Shape::Ellipse { center, a, b } => {
                let (s, c) = (TAU * t).sin_cos();
                Some((
                    [center[0] + a * c, center[1] + b * s],
                    [-TAU * a * s, TAU * b * c],
                    [-TAU * TAU * a * c, -TAU * TAU * b * s],
                ))
            }
            Shape::Rounded(p) => Some(p.eval(t)),
            Shape::Radial(r) => Some(r.eval(t)),
            Shape::Ball { .. } => None,
        }
    }

    pub fn curve_point(&self, t: f64) -> Option<[f64; 2]> {
        self.curve_eval(t).map(|e| e.0)
    }

    /// Whether the curve parameter is already proportional to arc length.
    pub fn arc_length_parameterized(&self) -> bool {
        matches!(self, Shape::Disk { .. } | Shape::Rounded(_))
    }

    /// Closed-form perimeter where one exists.
    pub fn exact_perimeter(&self) -> Option<f64> {
        match self {
            Shape::Disk { radius, .. } => Some(TAU * radius),
            Shape::Rounded(p) => Some(p.perimeter),
            _ => None,
        }
    }

    /// Supremum of the boundary curvature, sampled densely (exact for the
    /// disk, ellipse and rounded polygons).
    pub fn max_curvature(&self) -> f64 {
        match self {
            Shape::Disk { radius, .. } | Shape::Ball { radius, .. } => 1.0 / radius,
            Shape::Ellipse { a, b, .. } => a.max(*b) / a.min(*b).powi(2),
            Shape::Rounded(p) => 1.0 / p.radius,
            Shape::Radial(r) => (0..16384)
                .map(|i| {
                    let (_, d, dd) = r.eval(i as f64 / 16384.0);
                    cross2(d, dd).abs() / norm2(d).powi(3)
                })
                .fold(0.0, f64::max),
        }
    }
}

/// Local minimizers `(t, distance)` of `|curve(t) - x|`, sorted by distance,
/// refined by safeguarded Newton on `(c(t) - x) . c'(t) = 0`.
pub(crate) fn curve_minimizers(shape: &Shape, samples: &[[f64; 2]], x: [f64; 2]) -> Vec<(f64, f64)> {
    let m = samples.len();
    let d2: Vec<f64> = samples.iter().map(|p| dot2(sub2(*p, x), sub2(*p, x))).collect();
    let global = d2.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut out = Vec::new();
    for i in 0..m {
        let prev = d2[(i + m - 1) % m];
        let next = d2[(i + 1) % m];
        // plateau ties count once: strict on the left
        if d2[i] < prev && d2[i] <= next && d2[i] <= global * 1.05 + 1e-12 {
            let h = 1.0 / m as f64;
            let t = refine_foot(shape, x, i as f64 * h - h, i as f64 * h + h);
            let p = shape.curve_point(t).expect("planar curve");
            out.push((t.rem_euclid(1.0), norm2(sub2(p, x))));
        }
    }
    if out.is_empty() {
        // constant-distance ring (x at the center of a circle)
        out.push((0.0, global.sqrt()));
    }
    out.sort_by(|a, b| a.1.total_cmp(&b.1));
    out
}

fn refine_foot(shape: &Shape, x: [f64; 2], mut lo: f64, mut hi: f64) -> f64 {
    let g = |t: f64| {
        let (p, d, dd) = shape.curve_eval(t).expect("planar curve");
        let r = sub2(p, x);
        (dot2(r, d), dot2(d, d) + dot2(r, dd))
    };
    let (glo, _) = g(lo);
    let (ghi, _) = g(hi);
    if glo > 0.0 || ghi < 0.0 {
        // no sign change: fall back to golden section on the distance
        let f = |t: f64| {
            let p = shape.curve_point(t).expect("planar curve");
            dot2(sub2(p, x), sub2(p, x))
        };
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (lo, hi);
        for _ in 0..100 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        return 0.5 * (a + b);
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..100 {
        let (gv, gd) = g(t);
        if gv < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let mut next = if gd > 0.0 { t - gv / gd } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-16 {
            return next;
        }
        t = next;
        if hi - lo <= 1e-16 {
            break;
        }
    }
    t
}

/// Closest point on the centered ellipse `x^2/a^2 + y^2/b^2 = 1` to `y`
/// (robust bisection on the Lagrange parameter), together with the
/// separation of the mirror minimizer when the projection is not unique.
fn ellipse_foot(a: f64, b: f64, y: [f64; 2]) -> ([f64; 2], f64) {
    if a == b {
        let r = norm2(y);
        if r == 0.0 {
            return ([a, 0.0], 2.0 * a);
        }
        return ([a * y[0] / r, a * y[1] / r], 0.0);
    }
    // reduce to e0 > e1, first quadrant
    let swap = b > a;
    let (e0, e1) = if swap { (b, a) } else { (a, b) };
    let (q0, q1) = if swap { (y[1], y[0]) } else { (y[0], y[1]) };
    let (y0, y1) = (q0.abs(), q1.abs());
    let mut sep = 0.0;
    let (x0, x1) = if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g != 0.0 {
                let r0 = (e0 / e1).powi(2);
                let sbar = ellipse_root(r0, z0, z1, g);
                (r0 * y0 / (sbar + r0), y1 / (sbar + 1.0))
            } else {
                (y0, y1)
            }
        } else {
            (0.0, e1)
        }
    } else {
        let numer0 = e0 * y0;
        let denom0 = e0 * e0 - e1 * e1;
        if numer0 < denom0 {
            let xde0 = numer0 / denom0;
            let x1 = e1 * (1.0 - xde0 * xde0).max(0.0).sqrt();
            sep = 2.0 * x1;
            (e0 * xde0, x1)
        } else {
            (e0, 0.0)
        }
    };
    let p0 = x0.copysign(q0);
    let p1 = if q1 == 0.0 { x1 } else { x1.copysign(q1) };
    let p = if swap { [p1, p0] } else { [p0, p1] };
    (p, sep)
}

fn ellipse_root(r0: f64, z0: f64, z1: f64, g: f64) -> f64 {
    let n0 = r0 * z0;
    let mut s0 = z1 - 1.0;
    let mut s1 = if g < 0.0 { 0.0 } else { n0.hypot(z1) - 1.0 };
    let mut s = 0.0;
    for _ in 0..1100 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let ratio0 = n0 / (s + r0);
        let ratio1 = z1 / (s + 1.0);
        let gs = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
        if gs > 0.0 {
            s0 = s;
        } else if gs < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ellipse_foot_matches_dense_search() {
        let (a, b) = (2.0, 1.0);
        for &y in &[[0.3, 0.2], [2.5, 1.5], [-1.0, 0.4], [0.0, 0.5], [1.9, -0.01]] {
            let (p, _) = ellipse_foot(a, b, y);
            let mut best = f64::INFINITY;
            for i in 0..200_000 {
                let t = TAU * i as f64 / 200_000.0;
                best = best.min((a * t.cos() - y[0]).hypot(b * t.sin() - y[1]));
            }
            let d = norm2(sub2(p, y));
            assert!((d - best).abs() < 1e-8, "{y:?}: {d} vs {best}");
        }
    }

    #[test]
    fn ellipse_center_is_singular() {
        let e = Shape::ellipse([0.0, 0.0], 2.0, 1.0).unwrap();
        assert!(matches!(e.project(&[0.0, 0.0]), Err(Error::SingularPoint { .. })));
        assert!(matches!(e.project(&[0.5, 0.0]), Err(Error::SingularPoint { .. })));
        assert!(e.project(&[1.9, 0.0]).is_ok());
        assert!((e.oriented_distance(&[0.0, 0.0]) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rounded_polygon_perimeter() {
        let s = Shape::stadium([0.0, 0.0], 1.0, 0.5).unwrap();
        assert!((s.exact_perimeter().unwrap() - (4.0 + PI)).abs() < 1e-12);
        let (p, _, _) = s.curve_eval(0.0).unwrap();
        assert!((s.oriented_distance(&p)).abs() < 1e-12);
        assert!(matches!(s.project(&[0.2, 0.0]), Err(Error::SingularPoint { .. })));
        assert!((s.oriented_distance(&[0.2, 0.3]) + 0.2).abs() < 1e-14);
    }

    #[test]
    fn radial_curve_points_on_boundary() {
        let s = Shape::star_radial([0.1, -0.2], 1.0, vec![0.0, 0.0, 0.15], vec![0.1]).unwrap();
        for i in 0..50 {
            let (p, _, _) = s.curve_eval(i as f64 / 50.0).unwrap();
            assert!(s.oriented_distance(&p).abs() < 1e-10);
        }
        let pr = s.project(&[0.5, 0.1]).unwrap();
        assert!(s.oriented_distance(&pr.foot).abs() < 1e-10);
    }
}
