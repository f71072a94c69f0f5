//! Admissible meshes of `C^{1,1}` domains built from the distance function.
//!
//! Near the boundary, the Bernstein inequality integrated along projection
//! segments gives the potential `F(d) = n arccos(1 - 2d / delta)`. Its level
//! sets at `m_n = ceil(2 n pi) + 1` equispaced values are the inner parallel
//! surfaces at distances `d^i = delta/2 (1 - cos(i pi / m_n))`, and together
//! they norm the tube with constant 2. Each level carries a boundary mesh
//! transported inward along the normal; a cubic grid covers the core
//! `K_delta = {d >= delta}`. The union norms `K` with constant
//! `max{2mu/(mu-2), lambda/(lambda-1)}`.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{distance_to_complement, inward_normal, Domain, SmoothDomain};
use crate::meshgen_star::{boundary_mesh, dedup_indices};
use crate::polyspace::{Mesh, Poly, PolySpace, Provenance};
use crate::verify::SupEstimator;

/// Tube depth and slack parameters of the construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct C11Params {
    pub delta: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl C11Params {
    pub fn new(delta: f64, lambda: f64, mu: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter("delta must be positive".into()));
        }
        if !(lambda > 1.0) {
            return Err(Error::InvalidParameter("lambda must exceed 1".into()));
        }
        if !(mu > 2.0) {
            return Err(Error::InvalidParameter("mu must exceed 2".into()));
        }
        Ok(Self { delta, lambda, mu })
    }

    /// `delta = 0.9 reach`, `lambda = 2`, `mu = 4`: constant 4.
    pub fn defaults(reach: f64) -> Self {
        Self { delta: 0.9 * reach, lambda: 2.0, mu: 4.0 }
    }

    /// Fails unless `delta` is below the validated reach.
    pub fn check(&self, domain: &SmoothDomain) -> Result<()> {
        if self.delta >= domain.reach() {
            return Err(Error::InvalidParameter(format!(
                "delta = {} must be below the reach {}",
                self.delta,
                domain.reach()
            )));
        }
        Ok(())
    }

    /// `ceil(2 n pi) + 1` levels beyond the boundary.
    pub fn m_n(n: usize) -> usize {
        (2.0 * n as f64 * PI).ceil() as usize + 1
    }

    /// `max{2mu/(mu-2), lambda/(lambda-1)}`. The tube term follows from
    /// `||p||_K <= 2||p||_Y + (2/mu)||p||_K`, the core term from
    /// `||p||_K <= ||p||_Z + (1/lambda)||p||_K`.
    pub fn constant(&self) -> f64 {
        (2.0 * self.mu / (self.mu - 2.0)).max(self.lambda / (self.lambda - 1.0))
    }

    /// The same maximum with `1/(lambda-1)` as the core term.
    pub fn printed_constant(&self) -> f64 {
        (2.0 * self.mu / (self.mu - 2.0)).max(1.0 / (self.lambda - 1.0))
    }

    /// Fill distance of the core grid, `delta / (lambda n + 1/2)`.
    pub fn grid_h(&self, n: usize) -> f64 {
        self.delta / (self.lambda * n as f64 + 0.5)
    }
}

/// Bernstein weight `n / sqrt(d (delta - d))` for `d < delta`, else `n / d`.
/// Infinite at `d = 0`.
pub fn phi(n: usize, delta: f64, dist: f64) -> f64 {
    if dist <= 0.0 {
        return f64::INFINITY;
    }
    if dist < delta {
        n as f64 / (dist * (delta - dist)).sqrt()
    } else {
        n as f64 / dist
    }
}

/// Integral of [`phi`] from the boundary: `n arccos(1 - 2d/delta)` for
/// `d < delta`, `n (pi + ln(d/delta))` beyond.
pub fn potential_f(n: usize, delta: f64, dist: f64) -> f64 {
    let n = n as f64;
    let dist = dist.max(0.0);
    if dist < delta {
        let x = dist / delta;
        // arccos(1 - 2x) = 2 arcsin(sqrt x), better conditioned for small x
        if x <= 0.5 {
            n * 2.0 * x.sqrt().asin()
        } else {
            n * (1.0 - 2.0 * x).acos()
        }
    } else {
        n * (PI + (dist / delta).ln())
    }
}

/// `d^i = delta/2 (1 - cos(i pi / m_n))`, `i = 0..=m_n`.
pub fn level_distances(params: &C11Params, n: usize) -> Vec<f64> {
    let m = C11Params::m_n(n);
    (0..=m)
        .map(|i| {
            if i == m {
                return params.delta;
            }
            // delta/2 (1 - cos t) = delta sin^2(t/2)
            let s = (PI * i as f64 / (2 * m) as f64).sin();
            params.delta * s * s
        })
        .collect()
}

/// Points of the cubic grid of `step` through the bounding-box center with
/// oriented distance at most `max_b`.
pub fn cubic_grid(domain: &dyn Domain, step: f64, max_b: f64) -> Vec<Vec<f64>> {
    let bbox = domain.bbox();
    let c = bbox.center();
    let d = bbox.dim();
    let half: Vec<i64> = (0..d).map(|j| ((bbox.hi[j] - c[j]) / step).floor() as i64).collect();
    let rows: Vec<Vec<f64>> = grid_rows(&c, &half, step);
    let c = &c;
    rows.into_par_iter()
        .flat_map_iter(|base| {
            let k = half[0];
            (-k..=k).filter_map(move |i| {
                let mut p = base.clone();
                p[0] = c[0] + i as f64 * step;
                (domain.oriented_distance(&p) <= max_b).then_some(p)
            })
        })
        .collect()
}

/// Number of grid points [`cubic_grid`] would return, without storing them.
pub fn cubic_grid_count(domain: &dyn Domain, step: f64, max_b: f64) -> usize {
    let bbox = domain.bbox();
    let c = bbox.center();
    let d = bbox.dim();
    let half: Vec<i64> = (0..d).map(|j| ((bbox.hi[j] - c[j]) / step).floor() as i64).collect();
    grid_rows(&c, &half, step)
        .into_par_iter()
        .map(|base| {
            let mut p = base;
            (-half[0]..=half[0])
                .filter(|&i| {
                    p[0] = c[0] + i as f64 * step;
                    domain.oriented_distance(&p) <= max_b
                })
                .count()
        })
        .sum()
}

/// Every combination of the coordinates `1..d`, with coordinate 0 left at the center.
fn grid_rows(c: &[f64], half: &[i64], step: f64) -> Vec<Vec<f64>> {
    let mut rows = vec![c.to_vec()];
    for j in 1..c.len() {
        rows = rows
            .into_iter()
            .flat_map(|r| {
                (-half[j]..=half[j]).map(move |i| {
                    let mut q = r.clone();
                    q[j] = c[j] + i as f64 * step;
                    q
                })
            })
            .collect();
    }
    rows
}

/// Largest sampled distance to the complement, from a 256-per-axis grid.
fn sampled_inradius(domain: &dyn Domain) -> f64 {
    let bbox = domain.bbox();
    let step = bbox.lo.iter().zip(&bbox.hi).map(|(a, b)| b - a).fold(0.0, f64::max) / 256.0;
    let mut best = distance_to_complement(domain, &domain.star_center());
    for p in cubic_grid(domain, step, 0.0) {
        best = best.max(distance_to_complement(domain, &p));
    }
    best
}

/// The core grid `Z`: the cubic grid of step `h / sqrt(d)`,
/// `h = delta / (lambda n + 1/2)`, restricted to `K_delta`.
pub fn interior_grid(domain: &dyn Domain, n: usize, params: &C11Params) -> Result<Vec<Vec<f64>>> {
    let h = params.grid_h(n);
    let step = h / (domain.dim() as f64).sqrt();
    let z = cubic_grid(domain, step, -params.delta);
    if !z.is_empty() {
        return Ok(z);
    }
    if sampled_inradius(domain) < params.delta {
        return Err(Error::EmptyCore { delta: params.delta });
    }
    // the core is thinner than the grid: refine once
    let z = cubic_grid(domain, step / 2.0, -params.delta);
    if z.is_empty() {
        return Err(Error::EmptyCore { delta: params.delta });
    }
    Ok(z)
}

/// Meshes of the inner parallel surfaces `{d = d^i}`.
#[derive(Clone, Debug)]
pub struct LevelSetFamily {
    pub distances: Vec<f64>,
    /// `levels[i]` lies on `{d = d^i}`.
    pub levels: Vec<Vec<Vec<f64>>>,
    /// `1 + L delta` with `L = 1 / (reach - delta)`.
    pub lipschitz_factor: f64,
    /// Geodesic fill targets of the boundary meshes for `i = 0` and `i >= 1`.
    pub fill_targets: [f64; 2],
    /// Largest deviation of a transported point from its level.
    pub max_deviation: f64,
}

impl LevelSetFamily {
    pub fn cardinality(&self) -> usize {
        self.levels.iter().map(|l| l.len()).sum()
    }
}

/// Level `0` is `boundary_mesh(delta / (mu n))`. Levels `i >= 1` transport
/// `boundary_mesh(delta / (2 mu n (1 + L delta)))` by `y -> y + d^i nu(y)`,
/// `nu` the inward normal; the map is `(1 + L delta)`-Lipschitz, so the
/// transported fill distance is at most `delta / (2 mu n)`.
pub fn level_set_mesh(domain: &SmoothDomain, n: usize, params: &C11Params) -> Result<LevelSetFamily> {
    if n == 0 {
        return Err(Error::InvalidParameter("degree must be at least 1".into()));
    }
    params.check(domain)?;
    let distances = level_distances(params, n);
    let lip = 1.0 / (domain.reach() - params.delta);
    let factor = 1.0 + lip * params.delta;
    let nf = n as f64;
    let h0 = params.delta / (params.mu * nf);
    let h1 = params.delta / (2.0 * params.mu * nf * factor);
    let y0 = boundary_mesh(domain, h0.min(domain.diameter()))?;
    let base = boundary_mesh(domain, h1.min(domain.diameter()))?;
    let normals: Vec<Vec<f64>> = base.points.par_iter().map(|y| inward_normal(domain, y)).collect::<Result<_>>()?;
    let tol = domain.tolerance().max(1e-12);
    let mut levels = vec![y0.points];
    let mut max_dev: f64 = 0.0;
    for (i, &d) in distances.iter().enumerate().skip(1) {
        let pts: Vec<Vec<f64>> = base
            .points
            .iter()
            .zip(&normals)
            .map(|(y, nu)| y.iter().zip(nu).map(|(a, v)| a + d * v).collect())
            .collect();
        let dev = pts
            .par_iter()
            .map(|x| (distance_to_complement(domain, x) - d).abs())
            .reduce(|| 0.0, f64::max);
        if dev > tol {
            return Err(Error::TransportError { level: i, deviation: dev });
        }
        max_dev = max_dev.max(dev);
        levels.push(pts);
    }
    Ok(LevelSetFamily { distances, levels, lipschitz_factor: factor, fill_targets: [h0, h1], max_deviation: max_dev })
}

/// `A_n = Y u Z`, de-duplicated. Layer tags: level index `i` for the level
/// meshes, `m_n + 1` for the core grid.
pub fn c11_mesh(domain: &SmoothDomain, n: usize, params: &C11Params) -> Result<Mesh> {
    let family = level_set_mesh(domain, n, params)?;
    let z = match interior_grid(domain, n, params) {
        Ok(z) => z,
        // degenerate core: the tube estimate alone covers K
        Err(Error::EmptyCore { .. }) => Vec::new(),
        Err(e) => return Err(e),
    };
    let m = C11Params::m_n(n);
    let mut tagged: Vec<(Vec<f64>, usize)> = Vec::with_capacity(family.cardinality() + z.len());
    for (i, level) in family.levels.into_iter().enumerate() {
        tagged.extend(level.into_iter().map(|p| (p, i)));
    }
    tagged.extend(z.into_iter().map(|p| (p, m + 1)));
    let (points, layers) = dedup_tagged(tagged, 1e-12 * domain.diameter());
    Ok(Mesh {
        degree: n,
        constant: params.constant(),
        provenance: Provenance::C11 {
            delta: params.delta,
            lambda: params.lambda,
            mu: params.mu,
            m_n: m,
            levels: family.distances,
            h: params.grid_h(n),
            printed_constant: params.printed_constant(),
        },
        points,
        layers: Some(layers),
    })
}

fn dedup_tagged(tagged: Vec<(Vec<f64>, usize)>, tol: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let (mut points, mut tags): (Vec<Vec<f64>>, Vec<usize>) = tagged.into_iter().unzip();
    let keep = dedup_indices(&points, tol);
    if keep.len() < points.len() {
        tags = keep.iter().map(|&i| tags[i]).collect();
        points = keep.into_iter().map(|i| std::mem::take(&mut points[i])).collect();
    }
    (points, tags)
}

/// Outcome of a sampled derivative-inequality check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityReport {
    /// Largest sampled `|derivative| / bound`.
    pub max_ratio: f64,
    /// Samples whose ratio exceeds `1 + 1e-6`.
    pub violations: usize,
    pub samples: usize,
    pub trials: usize,
}

impl InequalityReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Relative slack allowed on every sampled inequality.
pub const INEQUALITY_RTOL: f64 = 1e-6;

/// Samples `|d_v p(x)| <= (n / delta) ||p||_K` over grid points `x` of
/// `K_delta` and 16 directions `v`, for seeded random polynomials.
pub fn kdelta_markov_check(domain: &dyn Domain, n: usize, delta: f64, trials: usize, seed: u64) -> Result<InequalityReport> {
    let mut xs = cubic_grid(domain, domain.diameter() / 48.0, -delta);
    if xs.is_empty() {
        if sampled_inradius(domain) < delta {
            return Err(Error::EmptyCore { delta });
        }
        xs = cubic_grid(domain, domain.diameter() / 192.0, -delta);
    }
    let space = std::sync::Arc::new(PolySpace::new(n, domain.bbox())?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let polys: Vec<Poly> = (0..trials).map(|_| Poly::random(space.clone(), &mut rng)).collect();
    let norms = SupEstimator::for_domain(domain).sup_norms(&space, &polys);
    let dirs = crate::verify::directions(domain.dim(), 16);
    let bound = n as f64 / delta;
    let mut report = InequalityReport { max_ratio: 0.0, violations: 0, samples: 0, trials };
    let results: Vec<(f64, usize, usize)> = polys
        .par_iter()
        .zip(&norms)
        .map(|(p, &norm)| {
            let mut worst: f64 = 0.0;
            let mut bad = 0;
            let mut count = 0;
            for x in &xs {
                for v in &dirs {
                    let r = p.directional(x, v).abs() / (bound * norm);
                    worst = worst.max(r);
                    bad += usize::from(r > 1.0 + INEQUALITY_RTOL);
                    count += 1;
                }
            }
            (worst, bad, count)
        })
        .collect();
    for (w, b, c) in results {
        report.max_ratio = report.max_ratio.max(w);
        report.violations += b;
        report.samples += c;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Shape;

    fn disk() -> SmoothDomain {
        SmoothDomain::new(Shape::disk([0.0, 0.0], 1.0).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn phi_and_f_values() {
        assert!((phi(2, 1.0, 0.5) - 4.0).abs() < 1e-15);
        assert!((phi(3, 1.0, 2.0) - 1.5).abs() < 1e-15);
        assert!((phi(1, 4.0, 2.0) - 0.5).abs() < 1e-15);
        assert_eq!(phi(1, 1.0, 0.0), f64::INFINITY);
        assert_eq!(potential_f(5, 1.0, 0.0), 0.0);
        assert!((potential_f(2, 1.0, 0.5) - PI).abs() < 1e-15);
        assert!((potential_f(1, 1.0, std::f64::consts::E) - (PI + 1.0)).abs() < 1e-14);
    }

    #[test]
    fn level_distance_examples() {
        let p = C11Params::new(1.0, 2.0, 4.0).unwrap();
        let d = level_distances(&p, 1);
        assert_eq!(d.len(), 9);
        assert_eq!(d[0], 0.0);
        assert_eq!(d[8], 1.0);
        assert!((d[4] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn params_validation() {
        assert!(matches!(C11Params::new(0.3, 2.0, 2.0), Err(Error::InvalidParameter(m)) if m == "mu must exceed 2"));
        assert!(C11Params::new(0.3, 1.0, 4.0).is_err());
        let p = C11Params::new(0.3, 2.0, 4.0).unwrap();
        assert_eq!(p.constant(), 4.0);
        assert_eq!(p.printed_constant(), 4.0);
    }

    #[test]
    fn disk_interior_grid_count() {
        let p = C11Params::new(0.3, 2.0, 4.0).unwrap();
        let z = interior_grid(&disk(), 1, &p).unwrap();
        assert!((z.len() as f64 - 214.0).abs() < 20.0, "{}", z.len());
        let p = C11Params::new(1.2, 2.0, 4.0).unwrap();
        assert!(matches!(interior_grid(&disk(), 1, &p), Err(Error::EmptyCore { .. })));
    }

    #[test]
    fn disk_levels_are_circles() {
        let p = C11Params::new(0.3, 2.0, 4.0).unwrap();
        let fam = level_set_mesh(&disk(), 2, &p).unwrap();
        for (d, level) in fam.distances.iter().zip(&fam.levels) {
            for x in level {
                assert!((x[0].hypot(x[1]) - (1.0 - d)).abs() < 1e-12);
            }
        }
        let m = c11_mesh(&disk(), 2, &p).unwrap();
        assert_eq!(m.constant, 4.0);
        assert_eq!(m.layers.as_ref().unwrap().len(), m.cardinality());
    }
}
