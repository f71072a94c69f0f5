//! Sampled checks of the polynomial inequalities behind the constructions.

use std::sync::Arc;

use rayon::prelude::*;

use super::{sup_norms_on, trial_polys, SupEstimator, INTERVAL_GRID};
use crate::error::{Error, Result};
use crate::geometry::{boundary_samples, inward_normal, Domain, Shape, SmoothDomain};
use crate::meshgen_c11::{cubic_grid, level_distances, level_set_mesh, C11Params, InequalityReport, INEQUALITY_RTOL};
use crate::polyspace::{bernstein_bound, Poly, PolySpace};

/// Folds per-trial `(worst ratio, violations, samples)` into a report.
fn collect(rows: Vec<(f64, usize, usize)>, trials: usize) -> InequalityReport {
    let mut r = InequalityReport { max_ratio: 0.0, violations: 0, samples: 0, trials };
    for (w, v, s) in rows {
        r.max_ratio = r.max_ratio.max(w);
        r.violations += v;
        r.samples += s;
    }
    r
}

fn tally(ratios: impl Iterator<Item = f64>) -> (f64, usize, usize) {
    let mut out = (0.0f64, 0, 0);
    for r in ratios {
        out.0 = out.0.max(r);
        out.1 += usize::from(r > 1.0 + INEQUALITY_RTOL);
        out.2 += 1;
    }
    out
}

/// `|p'(x)| <= n / sqrt((x - a)(b - x)) ||p||_[a,b]` at 100 interior points,
/// for seeded random polynomials and the adversarial Chebyshev family.
pub fn bernstein_check(n: usize, a: f64, b: f64, trials: usize, seed: u64) -> Result<InequalityReport> {
    if a >= b {
        return Err(Error::InvalidParameter("need a < b".into()));
    }
    let est = SupEstimator::interval(a, b, INTERVAL_GRID);
    let space = Arc::new(PolySpace::new(n, est.bbox().clone())?);
    let polys = trial_polys(&space, trials, seed, &est.grid.points)?.polys;
    let norms = est.sup_norms(&space, &polys);
    let xs: Vec<(f64, f64)> = (0..100)
        .map(|k| {
            let x = a + (b - a) * (k as f64 + 0.5) / 100.0;
            (x, bernstein_bound(n, a, b, x).expect("interior point"))
        })
        .collect();
    let rows = polys
        .par_iter()
        .zip(&norms)
        .map(|(p, &norm)| tally(xs.iter().map(|(x, bound)| p.directional(&[*x], &[1.0]).abs() / (bound * norm))))
        .collect();
    Ok(collect(rows, polys.len()))
}

/// Tangential Markov inequality on the circle of radius `r`:
/// `|d_v p(x)| <= (n / r) ||p||_B(0, r)` for unit tangents `v` at 360 points.
pub fn tangential_markov_test(r: f64, n: usize, trials: usize, seed: u64) -> Result<InequalityReport> {
    let ball = SmoothDomain::new(Shape::disk([0.0, 0.0], r)?, r)?;
    let est = SupEstimator::for_domain(&ball);
    let space = Arc::new(PolySpace::new(n, ball.bbox())?);
    let polys = trial_polys(&space, trials, seed, &est.grid.points)?.polys;
    let norms = est.sup_norms(&space, &polys);
    let frames: Vec<([f64; 2], [f64; 2])> = (0..360)
        .map(|k| {
            let (s, c) = (std::f64::consts::TAU * k as f64 / 360.0).sin_cos();
            ([r * c, r * s], [-s, c])
        })
        .collect();
    let rows = polys
        .par_iter()
        .zip(&norms)
        .map(|(p, &norm)| {
            tally(frames.iter().map(|(x, v)| p.directional(x, v).abs() * r / (n.max(1) as f64 * norm)))
        })
        .collect();
    Ok(collect(rows, polys.len()))
}

/// Unit tangent vectors of the level surface with unit normal `nu`.
fn tangents(nu: &[f64]) -> Vec<Vec<f64>> {
    if nu.len() == 2 {
        return vec![vec![-nu[1], nu[0]]];
    }
    // any vector not parallel to nu, then two cross products
    let e = if nu[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let cross = |a: &[f64], b: &[f64]| vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let t1 = cross(nu, &e);
    let l = t1.iter().map(|v| v * v).sum::<f64>().sqrt();
    let t1: Vec<f64> = t1.iter().map(|v| v / l).collect();
    let t2 = cross(nu, &t1);
    vec![t1, t2]
}

/// Tangential derivatives on the level surfaces `{d = d^i}`:
/// `|d_v p| <= (n / delta) ||p||_K` on the boundary and `(2n / delta) ||p||_K`
/// on the inner levels, at up to 48 points of each level mesh.
pub fn level_set_tangential_check(
    domain: &SmoothDomain,
    n: usize,
    params: &C11Params,
    trials: usize,
    seed: u64,
) -> Result<InequalityReport> {
    let family = level_set_mesh(domain, n, params)?;
    let mut frames: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    let nf = n as f64;
    for (i, level) in family.levels.iter().enumerate() {
        let bound = if i == 0 { nf / params.delta } else { 2.0 * nf / params.delta };
        let stride = level.len().div_ceil(48).max(1);
        for x in level.iter().step_by(stride) {
            let nu = inward_normal(domain, x)?;
            for t in tangents(&nu) {
                frames.push((x.clone(), t, bound));
            }
        }
    }
    let est = SupEstimator::for_domain(domain);
    let space = Arc::new(PolySpace::new(n, domain.bbox())?);
    let polys = trial_polys(&space, trials, seed, &est.grid.points)?.polys;
    let norms = est.sup_norms(&space, &polys);
    let rows = polys
        .par_iter()
        .zip(&norms)
        .map(|(p, &norm)| tally(frames.iter().map(|(x, v, b)| p.directional(x, v).abs() / (b * norm))))
        .collect();
    Ok(collect(rows, polys.len()))
}

/// `||p||_K <= max{2 ||p||_Gamma, ||p||_K_delta}` with `Gamma` the union of
/// the level surfaces, sampled densely by transporting 4096 boundary points
/// (2D) to every level, and `K_delta` sampled by a fine cubic grid. An empty
/// core contributes 0.
pub fn piecewise_estimate_check(
    domain: &SmoothDomain,
    n: usize,
    params: &C11Params,
    trials: usize,
    seed: u64,
) -> Result<InequalityReport> {
    params.check(domain)?;
    let feet = boundary_samples(domain.shape(), if domain.dim() == 2 { 4096 } else { 20_000 });
    let normals: Vec<Vec<f64>> = feet.par_iter().map(|y| inward_normal(domain, y)).collect::<Result<_>>()?;
    let mut gamma = Vec::new();
    for d in level_distances(params, n) {
        for (y, nu) in feet.iter().zip(&normals) {
            gamma.push(y.iter().zip(nu).map(|(a, b)| a + d * b).collect::<Vec<f64>>());
        }
    }
    let step = domain.diameter() / if domain.dim() == 2 { 300.0 } else { 60.0 };
    let core = cubic_grid(domain, step, -params.delta);
    let est = SupEstimator::for_domain(domain);
    let space = Arc::new(PolySpace::new(n, domain.bbox())?);
    let polys: Vec<Poly> = trial_polys(&space, trials, seed, &est.grid.points)?.polys;
    let on_k = est.sup_norms(&space, &polys);
    let on_gamma = sup_norms_on(&space, &gamma, &polys);
    let on_core = if core.is_empty() { vec![0.0; polys.len()] } else { sup_norms_on(&space, &core, &polys) };
    let rows = (0..polys.len())
        .map(|j| tally(std::iter::once(on_k[j] / (2.0 * on_gamma[j]).max(on_core[j]))))
        .collect();
    Ok(collect(rows, polys.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernstein_holds() {
        let r = bernstein_check(7, -1.0, 2.0, 100, 5).unwrap();
        assert!(r.holds(), "{r:?}");
        assert!(r.max_ratio > 0.5);
    }

    #[test]
    fn tangential_linear_is_sharp() {
        let r = tangential_markov_test(1.0, 1, 20, 3).unwrap();
        assert!(r.holds());
        assert!((r.max_ratio - 1.0).abs() < 1e-9, "{}", r.max_ratio);
    }
}
