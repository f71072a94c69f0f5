//! Numerical certification: sup norms over continua, sampled and LP norming
//! constants, inequality suites, cardinality fits and the least-squares study.
//!
//! Sup norms over `K` are estimated on a control grid and then polished by a
//! compass search started from the best grid points, so they are lower bounds
//! of the true sup that are usually tight to many digits.

mod compare;
mod lp;
mod norming;
mod render;
mod report;
mod suites;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{fibonacci_sphere, BBox, Domain};
use crate::polyspace::{Poly, PolySpace};

pub use compare::{
    baseline_markov_cardinality, baseline_markov_mesh, baseline_markov_step, cardinality_slope, dls_convergence_study,
    DlsRow, SlopeFit, Target,
};
pub use lp::{best_uniform_error, norming_constant_lp, LpConstant};
pub use norming::{norming_ratio_estimate, norming_ratio_with, trial_polys, NormingEstimate, TrialSet};
pub use render::{csv_table, svg_curve, svg_mesh};
pub use report::{verify_mesh, Violation, VerificationReport, VerifyOptions};
pub use suites::{bernstein_check, level_set_tangential_check, piecewise_estimate_check, tangential_markov_test};

/// Default size of 2D and 3D control grids.
pub const DEFAULT_GRID: usize = 20_000;
/// Default size of interval control grids.
pub const INTERVAL_GRID: usize = 10_000;

/// Rows of the basis matrix evaluated at once.
const CHUNK: usize = 2048;

/// `count` unit directions, up to sign: equally spaced angles in `[0, pi)` in
/// 2D, a Fibonacci lattice in 3D.
pub fn directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0]],
        2 => (0..count)
            .map(|j| {
                let (s, c) = (PI * j as f64 / count as f64).sin_cos();
                vec![c, s]
            })
            .collect(),
        _ => fibonacci_sphere(count),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Polar,
    Interval,
    Custom,
}

/// Sample of a compact on which sup norms are taken.
#[derive(Clone, Debug)]
pub struct ControlGrid {
    pub points: Vec<Vec<f64>>,
    /// Largest gap between neighbouring grid points.
    pub spacing: f64,
    pub kind: GridKind,
}

impl ControlGrid {
    /// Polar grid around the star center with about `target` points. Rings
    /// sit at radial fractions `sin(pi k / 2R)`, crowding towards the boundary
    /// where extremal polynomials peak, and the outer ring is on the boundary.
    pub fn polar(domain: &dyn Domain, target: usize) -> Self {
        let c = domain.star_center();
        let shape = domain.shape();
        let (rings, dirs): (usize, Vec<Vec<f64>>) = if domain.dim() == 2 {
            let rings = ((target as f64 / 4.0).sqrt().round() as usize).max(4);
            let spokes = 4 * rings;
            let dirs = (0..spokes)
                .map(|j| {
                    let (s, co) = (2.0 * PI * j as f64 / spokes as f64).sin_cos();
                    vec![co, s]
                })
                .collect();
            (rings, dirs)
        } else {
            let rings = ((target as f64 / 16.0).cbrt().round() as usize).max(4);
            (rings, fibonacci_sphere((target / rings).max(8)))
        };
        let reach: Vec<f64> = dirs.par_iter().map(|u| shape.ray_exit(&c, u)).collect();
        let fractions: Vec<f64> = (1..=rings)
            .map(|k| if k == rings { 1.0 } else { (0.5 * PI * k as f64 / rings as f64).sin() })
            .collect();
        let mut points = vec![c.clone()];
        for t in &fractions {
            for (u, r) in dirs.iter().zip(&reach) {
                let mut p: Vec<f64> = c.iter().zip(u).map(|(a, b)| a + t * r * b).collect();
                domain.clamp_into(&mut p);
                points.push(p);
            }
        }
        let rmax = reach.iter().copied().fold(0.0, f64::max);
        let angular = if domain.dim() == 2 {
            2.0 * PI / dirs.len() as f64
        } else {
            (4.0 * PI / dirs.len() as f64).sqrt() * 1.2
        };
        let radial = fractions[0];
        Self { points, spacing: rmax * radial.max(angular), kind: GridKind::Polar }
    }

    /// `m >= 2` equispaced points of `[a, b]`, endpoints included.
    pub fn interval(a: f64, b: f64, m: usize) -> Self {
        let m = m.max(2);
        let points = (0..m)
            .map(|i| vec![if i == m - 1 { b } else { a + (b - a) * i as f64 / (m - 1) as f64 }])
            .collect();
        Self { points, spacing: (b - a) / (m - 1) as f64, kind: GridKind::Interval }
    }

    /// Grid given point by point; spacing is unknown and recorded as 0.
    pub fn custom(points: Vec<Vec<f64>>) -> Self {
        Self { points, spacing: 0.0, kind: GridKind::Custom }
    }
}

/// The set searched by local refinement.
#[derive(Clone, Copy)]
enum Region<'a> {
    Domain(&'a dyn Domain),
    Interval(f64, f64),
    /// Grid only, no refinement.
    Fixed,
}

/// Lower estimates of `||p||_K` for batches of polynomials.
#[derive(Clone)]
pub struct SupEstimator<'a> {
    pub grid: ControlGrid,
    region: Region<'a>,
    bbox: BBox,
}

impl<'a> SupEstimator<'a> {
    pub fn for_domain(domain: &'a dyn Domain) -> Self {
        Self::with_grid(domain, ControlGrid::polar(domain, DEFAULT_GRID))
    }

    pub fn with_grid(domain: &'a dyn Domain, grid: ControlGrid) -> Self {
        Self { grid, region: Region::Domain(domain), bbox: domain.bbox() }
    }

    pub fn interval(a: f64, b: f64, m: usize) -> Self {
        Self { grid: ControlGrid::interval(a, b, m), region: Region::Interval(a, b), bbox: BBox::new(vec![a], vec![b]) }
    }

    /// Sup over the grid points alone.
    pub fn grid_only(grid: ControlGrid, bbox: BBox) -> Self {
        Self { grid, region: Region::Fixed, bbox }
    }

    /// Box on which polynomial spaces for this compact are built.
    pub fn bbox(&self) -> &BBox {
        &self.bbox
    }

    pub fn refines(&self) -> bool {
        !matches!(self.region, Region::Fixed)
    }

    /// `max |p|` over the grid, refined locally from the three best grid
    /// points of each polynomial.
    pub fn sup_norms(&self, space: &PolySpace, polys: &[Poly]) -> Vec<f64> {
        if polys.is_empty() {
            return Vec::new();
        }
        let coeffs = coefficient_matrix(polys);
        let top = top_abs(space, &self.grid.points, &coeffs, 3);
        polys
            .par_iter()
            .zip(&top)
            .map(|(p, best)| {
                let mut s = best.first().map_or(0.0, |b| b.0);
                if !matches!(self.region, Region::Fixed) {
                    for &(_, i) in best {
                        s = s.max(self.polish(p, &self.grid.points[i]));
                    }
                }
                s
            })
            .collect()
    }

    /// Local max of `|p|` near `x0`. On a domain the search runs in polar
    /// coordinates about the star center (angles and the radial fraction
    /// `t` in `[0, 1]`), so maxima on the boundary are a search in the
    /// angles alone.
    fn polish(&self, p: &Poly, x0: &[f64]) -> f64 {
        match self.region {
            Region::Fixed => p.eval(x0).abs(),
            Region::Interval(a, b) => {
                let step = if self.grid.spacing > 0.0 { self.grid.spacing } else { 1e-3 * (b - a) };
                compass(|y| p.eval(y).abs(), x0.to_vec(), vec![step], &[(a, b)])
            }
            Region::Domain(d) => {
                let c = d.star_center();
                let shape = d.shape();
                let v: Vec<f64> = x0.iter().zip(&c).map(|(a, b)| a - b).collect();
                let r = v.iter().map(|t| t * t).sum::<f64>().sqrt();
                let to_dir = |q: &[f64]| -> Vec<f64> {
                    if q.len() == 1 {
                        vec![q[0].cos(), q[0].sin()]
                    } else {
                        let (sa, ca) = q[0].sin_cos();
                        let (sb, cb) = q[1].sin_cos();
                        vec![sa * cb, sa * sb, ca]
                    }
                };
                let angles = if c.len() == 2 {
                    vec![v[1].atan2(v[0])]
                } else {
                    vec![(v[2] / r.max(f64::MIN_POSITIVE)).clamp(-1.0, 1.0).acos(), v[1].atan2(v[0])]
                };
                let t0 = if r == 0.0 { 0.0 } else { (r / shape.ray_exit(&c, &to_dir(&angles))).min(1.0) };
                let na = angles.len();
                let mut q0 = angles;
                q0.push(t0);
                let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); na];
                if na == 2 {
                    bounds[0] = (0.0, PI);
                }
                bounds.push((0.0, 1.0));
                let mut steps = vec![0.05; na];
                steps.push(0.05);
                let f = |q: &[f64]| {
                    let u = to_dir(&q[..na]);
                    let s = q[na] * shape.ray_exit(&c, &u);
                    let mut x: Vec<f64> = c.iter().zip(&u).map(|(a, b)| a + s * b).collect();
                    d.clamp_into(&mut x);
                    p.eval(&x).abs()
                };
                compass(f, q0, steps, &bounds).max(p.eval(x0).abs())
            }
        }
    }
}

/// Coordinate compass search maximizing `f` over a box; all steps are halved
/// together when no move improves.
fn compass<F: Fn(&[f64]) -> f64>(f: F, mut x: Vec<f64>, mut steps: Vec<f64>, bounds: &[(f64, f64)]) -> f64 {
    let floor: Vec<f64> = steps.iter().map(|s| s * 1e-9).collect();
    let mut fx = f(&x);
    let mut evals = 1;
    while steps.iter().zip(&floor).any(|(s, m)| s > m) && evals < 1500 {
        let mut moved = false;
        'moves: for k in 0..x.len() {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                y[k] = (y[k] + sign * steps[k]).clamp(bounds[k].0, bounds[k].1);
                if y[k] == x[k] {
                    continue;
                }
                let fy = f(&y);
                evals += 1;
                if fy > fx {
                    x = y;
                    fx = fy;
                    moved = true;
                    break 'moves;
                }
            }
        }
        if !moved {
            steps.iter_mut().for_each(|s| *s *= 0.5);
        }
    }
    fx
}

/// Coefficients as the columns of an `N x T` matrix.
pub(crate) fn coefficient_matrix(polys: &[Poly]) -> DMatrix<f64> {
    let n = polys[0].coeffs().len();
    DMatrix::from_fn(n, polys.len(), |i, j| polys[j].coeffs()[i])
}

/// Whether `a` ranks before `b`: larger value, then lower index.
fn better(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

fn push_top(list: &mut Vec<(f64, usize)>, item: (f64, usize), k: usize) {
    if list.len() == k && !better(item, list[k - 1]) {
        return;
    }
    let pos = list.iter().position(|&e| better(item, e)).unwrap_or(list.len());
    list.insert(pos, item);
    list.truncate(k);
}

/// For each coefficient column, the `k` largest `|p(x)|` over `points` with
/// their indices, best first. Ties go to the lowest index, so the result does
/// not depend on how the work is split.
pub(crate) fn top_abs(space: &PolySpace, points: &[Vec<f64>], coeffs: &DMatrix<f64>, k: usize) -> Vec<Vec<(f64, usize)>> {
    let n = space.len();
    let t = coeffs.ncols();
    points
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(ci, chunk)| {
            let mut rows = vec![0.0; chunk.len() * n];
            for (i, x) in chunk.iter().enumerate() {
                space.eval_basis(x, &mut rows[i * n..(i + 1) * n]);
            }
            let b = DMatrix::from_row_slice(chunk.len(), n, &rows);
            let v = b * coeffs;
            let mut out = vec![Vec::with_capacity(k); t];
            for (j, list) in out.iter_mut().enumerate() {
                for (i, val) in v.column(j).iter().enumerate() {
                    push_top(list, (val.abs(), ci * CHUNK + i), k);
                }
            }
            out
        })
        .reduce(
            || vec![Vec::new(); t],
            |mut a, b| {
                for (la, lb) in a.iter_mut().zip(b) {
                    for item in lb {
                        push_top(la, item, k);
                    }
                }
                a
            },
        )
}

/// `max |p|` over a finite set, for many polynomials at once.
pub fn sup_norms_on(space: &PolySpace, points: &[Vec<f64>], polys: &[Poly]) -> Vec<f64> {
    if polys.is_empty() {
        return Vec::new();
    }
    top_abs(space, points, &coefficient_matrix(polys), 1)
        .into_iter()
        .map(|l| l.first().map_or(0.0, |b| b.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Shape, SmoothDomain};
    use std::sync::Arc;

    #[test]
    fn polar_grid_reaches_the_boundary() {
        let d = SmoothDomain::new(Shape::disk([0.0, 0.0], 1.0).unwrap(), 1.0).unwrap();
        let g = ControlGrid::polar(&d, 2000);
        let rmax = g.points.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
        assert!((rmax - 1.0).abs() < 1e-12);
        assert!(g.points.iter().all(|p| d.contains(p)));
        assert!(g.points.len() > 1500 && g.points.len() < 2500);
    }

    #[test]
    fn linear_sup_on_disk() {
        let d = SmoothDomain::new(Shape::disk([0.0, 0.0], 1.0).unwrap(), 1.0).unwrap();
        let space = Arc::new(PolySpace::new(1, d.bbox()).unwrap());
        // x + y peaks at sqrt 2, off the grid spokes for an odd spoke count
        let grid = ControlGrid::polar(&d, 900);
        let p = Poly::chebyshev_product(space.clone(), &[(1, vec![1.0, 1.0], 0.0)]).unwrap();
        let s = SupEstimator::with_grid(&d, grid).sup_norms(&space, &[p]);
        assert!((s[0] - 2f64.sqrt()).abs() < 1e-8, "{}", s[0]);
    }

    #[test]
    fn top_k_is_ordered() {
        let mut l = Vec::new();
        for (i, v) in [3.0, 1.0, 3.0, 5.0, 2.0].into_iter().enumerate() {
            push_top(&mut l, (v, i), 3);
        }
        assert_eq!(l, vec![(5.0, 3), (3.0, 0), (3.0, 2)]);
    }
}
