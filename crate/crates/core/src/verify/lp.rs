//! Linear programs on Vandermonde rows, solved by constraint generation.

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, Solution, Variable};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyspace::{afp_extract, PolySpace};

/// Feasibility slack of the cutting-plane loop, relative.
const CUT_TOL: f64 = 1e-9;
/// Most violated rows added per round.
const CUTS_PER_ROUND: usize = 16;
/// Control points handled in sequence, carrying the active set along.
const SWEEP: usize = 64;

/// `max_x max{ p(x) : |p(y)| <= 1 on the mesh }` over control points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpConstant {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub control_points: usize,
    /// Largest number of mesh rows any single program needed.
    pub max_active: usize,
}

fn lp_error(e: microlp::Error) -> Error {
    match e {
        microlp::Error::Unbounded => Error::Unbounded,
        other => Error::Lp(other.to_string()),
    }
}

fn solve(lp: &Problem) -> Result<Solution> {
    lp.solve()
        .map_err(lp_error)?
        .into_solution()
        .map_err(|_| Error::Lp("solve interrupted".into()))
}

fn rows_of(space: &PolySpace, points: &[Vec<f64>]) -> Vec<f64> {
    let n = space.len();
    let mut rows = vec![0.0; points.len() * n];
    rows.par_chunks_mut(n).zip(points).for_each(|(r, x)| space.eval_basis(x, r));
    rows
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Indices of the `k` largest scores above `floor`, largest first.
fn worst(scores: impl Iterator<Item = (usize, f64)>, floor: f64, k: usize) -> Vec<usize> {
    let mut v: Vec<(usize, f64)> = scores.filter(|e| e.1 > floor).collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    v.truncate(k);
    v.into_iter().map(|e| e.0).collect()
}

struct PointProgram<'a> {
    n: usize,
    mesh_rows: &'a [f64],
    base: &'a [usize],
}

impl PointProgram<'_> {
    fn row(&self, i: usize) -> &[f64] {
        &self.mesh_rows[i * self.n..(i + 1) * self.n]
    }

    fn expr(&self, vars: &[Variable], i: usize) -> LinearExpr {
        let mut e = LinearExpr::empty();
        for (v, c) in vars.iter().zip(self.row(i)) {
            e.add(*v, *c);
        }
        e
    }

    /// Cutting-plane solve at basis row `bx` from the rows `start`; returns
    /// the certified ratio `p(x) / max_mesh |p|` and the number of rows used.
    /// `active` is replaced by the binding rows.
    fn run(&self, bx: &[f64], start: &[usize], active: &mut Vec<usize>) -> Result<(f64, usize)> {
        let m = self.mesh_rows.len() / self.n;
        let mut in_set = vec![false; m];
        let mut set: Vec<usize> = Vec::new();
        for &i in start {
            if !in_set[i] {
                in_set[i] = true;
                set.push(i);
            }
        }
        loop {
            let mut lp = Problem::new(OptimizationDirection::Maximize);
            let vars: Vec<Variable> = bx.iter().map(|&b| lp.add_var(b, (f64::NEG_INFINITY, f64::INFINITY))).collect();
            for &i in &set {
                lp.add_constraint(self.expr(&vars, i), ComparisonOp::Le, 1.0);
                lp.add_constraint(self.expr(&vars, i), ComparisonOp::Ge, -1.0);
            }
            let sol = solve(&lp)?;
            let c: Vec<f64> = vars.iter().map(|v| sol.var_value(*v)).collect();
            let vals: Vec<f64> = (0..m).map(|i| dot(self.row(i), &c).abs()).collect();
            let cuts = worst(vals.iter().copied().enumerate().filter(|e| !in_set[e.0]), 1.0 + CUT_TOL, CUTS_PER_ROUND);
            if cuts.is_empty() {
                let top = vals.iter().copied().fold(0.0, f64::max);
                let px = dot(bx, &c);
                active.clear();
                active.extend(set.iter().copied().filter(|&i| vals[i] >= 1.0 - 1e-7));
                return Ok((if top > 0.0 { px / top } else { px }, set.len()));
            }
            for i in cuts {
                in_set[i] = true;
                set.push(i);
            }
        }
    }
}

/// Bounds pushed apart by distinct amounts below 1e-9, so that no vertex of
/// the feasible polytope has more than `N` tight rows.
fn upper(j: usize) -> f64 {
    1.0 + 1e-9 * (j as f64 * 0.618_033_988_749_894_9).fract()
}

/// Primal active-set method for `max b.c` subject to `|V_i . c| <= 1`.
///
/// The feasible set does not depend on the control point, so the iterate
/// and its working set carry over from one point to the next. Each step
/// either moves along the projection of `b` onto the face of the working
/// rows until a new row binds, or drops the working row with the most
/// negative multiplier.
struct ActiveSet<'a> {
    n: usize,
    rows: &'a [f64],
    c: Vec<f64>,
    work: Vec<(usize, f64)>,
    in_work: Vec<bool>,
    norms: Vec<f64>,
}

impl<'a> ActiveSet<'a> {
    fn new(n: usize, rows: &'a [f64]) -> Self {
        let m = rows.len() / n;
        let norms = rows.chunks(n).map(|r| dot(r, r).sqrt()).collect();
        Self { n, rows, c: vec![0.0; n], work: Vec::new(), in_work: vec![false; m], norms }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.n..(i + 1) * self.n]
    }

    fn drop_row(&mut self, k: usize) {
        let (i, _) = self.work.remove(k);
        self.in_work[i] = false;
    }

    /// Certified ratio `b.c / max |V c|` of the final iterate, and whether it
    /// is optimal rather than cut off by the iteration cap.
    fn maximize(&mut self, b: &[f64]) -> Result<(f64, bool)> {
        let n = self.n;
        let m = self.in_work.len();
        let bnorm = dot(b, b).sqrt();
        let mut vc: Vec<f64> = (0..m).map(|i| dot(self.row(i), &self.c)).collect();
        let cap = 40 * n + 400;
        let mut degenerate = 0;
        for _ in 0..cap {
            let k = self.work.len();
            let (d, qtb, r) = if k == 0 {
                (b.to_vec(), DVector::zeros(0), DMatrix::zeros(0, 0))
            } else {
                let gt = DMatrix::from_fn(n, k, |a, j| self.work[j].1 * self.row(self.work[j].0)[a]);
                let qr = gt.qr();
                let q = qr.q();
                let bv = DVector::from_column_slice(b);
                let qtb = q.transpose() * &bv;
                let d = &bv - &q * &qtb;
                (d.as_slice().to_vec(), qtb, qr.r())
            };
            let dnorm = dot(&d, &d).sqrt();
            if k < n && dnorm > 1e-10 * bnorm {
                let tol = 1e-7 * dnorm;
                let mut best: Option<(f64, usize, f64)> = None;
                let mut vd = vec![0.0; m];
                for j in 0..m {
                    vd[j] = dot(self.row(j), &d);
                    if self.in_work[j] {
                        continue;
                    }
                    let a = vd[j];
                    let (t, sign) = if a > tol * self.norms[j] {
                        ((upper(j) - vc[j]) / a, 1.0)
                    } else if a < -tol * self.norms[j] {
                        ((upper(j + m) + vc[j]) / -a, -1.0)
                    } else {
                        continue;
                    };
                    let t = t.max(0.0);
                    if best.is_none_or(|bst| t < bst.0) {
                        best = Some((t, j, sign));
                    }
                }
                let (t, j, sign) = best.ok_or(Error::Unbounded)?;
                degenerate = if t == 0.0 { degenerate + 1 } else { 0 };
                for (ci, di) in self.c.iter_mut().zip(&d) {
                    *ci += t * di;
                }
                for (v, a) in vc.iter_mut().zip(&vd) {
                    *v += t * a;
                }
                self.work.push((j, sign));
                self.in_work[j] = true;
            } else {
                let lambda = match r.solve_upper_triangular(&qtb) {
                    Some(l) => l,
                    None => {
                        // dependent working rows; shed the newest and go on
                        self.drop_row(k - 1);
                        continue;
                    }
                };
                let tol = 1e-12 * bnorm;
                // after many degenerate steps, drop by lowest index (Bland)
                let pick = if degenerate > 2 * n {
                    (0..k).filter(|&a| lambda[a] < -tol).min_by_key(|&a| self.work[a].0)
                } else {
                    (0..k).filter(|&a| lambda[a] < -tol).min_by(|&a, &b2| lambda[a].total_cmp(&lambda[b2]))
                };
                match pick {
                    Some(a) => self.drop_row(a),
                    None => return Ok((self.certify(b), true)),
                }
            }
        }
        Ok((self.certify(b), false))
    }

    fn certify(&self, b: &[f64]) -> f64 {
        let m = self.in_work.len();
        let top = (0..m).map(|i| dot(self.row(i), &self.c).abs()).fold(0.0, f64::max);
        let px = dot(b, &self.c);
        if top > 0.0 {
            px / top
        } else {
            px
        }
    }
}

/// Exact norming constant of `mesh` over the finite set `control`: for each
/// control point the largest value at it of a polynomial bounded by 1 on the
/// mesh. Points are swept in order with a warm-started active-set method; a
/// point where it stalls is re-solved by the simplex code with constraint
/// generation from the approximate Fekete rows.
pub fn norming_constant_lp(space: &PolySpace, mesh: &[Vec<f64>], control: &[Vec<f64>]) -> Result<LpConstant> {
    if control.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = space.len();
    if mesh.len() < n {
        return Err(Error::Unbounded);
    }
    let base = match afp_extract(space, mesh) {
        Ok(b) => b,
        Err(Error::RankDeficient { .. }) => return Err(Error::Unbounded),
        Err(e) => return Err(e),
    };
    let mesh_rows = rows_of(space, mesh);
    let control_rows = rows_of(space, control);
    let prog = PointProgram { n, mesh_rows: &mesh_rows, base: &base };
    let results: Vec<(f64, usize, usize)> = control_rows
        .par_chunks(n * SWEEP)
        .enumerate()
        .map(|(ci, chunk)| -> Result<(f64, usize, usize)> {
            let mut solver = ActiveSet::new(n, &mesh_rows);
            let mut active = Vec::new();
            let mut best = (f64::NEG_INFINITY, 0, 0);
            for (k, bx) in chunk.chunks(n).enumerate() {
                let (v, size) = match solver.maximize(bx)? {
                    (v, true) => (v, solver.work.len()),
                    (v, false) => {
                        // stalled on nearly dependent rows; the simplex code
                        // starts from the rows it got stuck on
                        let mut start = prog.base.to_vec();
                        start.extend(solver.work.iter().map(|w| w.0));
                        solver = ActiveSet::new(n, &mesh_rows);
                        match prog.run(bx, &start, &mut active) {
                            Ok((w, size)) => (w.max(v), size),
                            Err(Error::Lp(_)) => (v, n),
                            Err(e) => return Err(e),
                        }
                    }
                };
                if v > best.0 {
                    best.0 = v;
                    best.1 = ci * SWEEP + k;
                }
                best.2 = best.2.max(size);
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let mut best = (f64::NEG_INFINITY, 0, 0);
    for r in results {
        if r.0 > best.0 {
            best.0 = r.0;
            best.1 = r.1;
        }
        best.2 = best.2.max(r.2);
    }
    Ok(LpConstant { value: best.0, argmax: control[best.1].clone(), control_points: control.len(), max_active: best.2 })
}

/// Best uniform approximation error of `values` on `points` by the space,
/// `min_p max_i |values_i - p(x_i)|`, as the LP optimum (a lower bound that
/// is tight to the solver tolerance). The values are first reduced by their
/// least-squares fit and rescaled, so tiny errors are resolved as well as
/// large ones.
pub fn best_uniform_error(space: &PolySpace, points: &[Vec<f64>], values: &[f64]) -> Result<f64> {
    let n = space.len();
    let m = points.len();
    if values.len() != m {
        return Err(Error::InvalidParameter(format!("{m} points but {} values", values.len())));
    }
    let rows = rows_of(space, points);
    let v = nalgebra::DMatrix::from_row_slice(m, n, &rows);
    let ls = v
        .clone()
        .svd(true, true)
        .solve(&nalgebra::DVector::from_column_slice(values), 1e-13)
        .map_err(|e| Error::Lp(e.to_string()))?;
    let resid: Vec<f64> = (0..m).map(|i| values[i] - dot(&rows[i * n..(i + 1) * n], ls.as_slice())).collect();
    let scale = resid.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let f: Vec<f64> = resid.iter().map(|r| r / scale).collect();
    let base = afp_extract(space, points)?;
    let mut in_set = vec![false; m];
    let mut set = Vec::new();
    // Fekete points and the largest residuals seed the first program
    for i in base.into_iter().chain(worst(f.iter().map(|r| r.abs()).enumerate(), 0.0, 2 * n)) {
        if !in_set[i] {
            in_set[i] = true;
            set.push(i);
        }
    }
    loop {
        let mut lp = Problem::new(OptimizationDirection::Maximize);
        let vars: Vec<Variable> = (0..n).map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
        let t = lp.add_var(-1.0, (0.0, f64::INFINITY));
        for &i in &set {
            let mut e = LinearExpr::empty();
            for (var, c) in vars.iter().zip(&rows[i * n..(i + 1) * n]) {
                e.add(*var, *c);
            }
            let mut lo = e.clone();
            e.add(t, -1.0);
            lo.add(t, 1.0);
            lp.add_constraint(e, ComparisonOp::Le, f[i]);
            lp.add_constraint(lo, ComparisonOp::Ge, f[i]);
        }
        let sol = solve(&lp)?;
        let c: Vec<f64> = vars.iter().map(|v| sol.var_value(*v)).collect();
        let tv = sol.var_value(t);
        let err: Vec<f64> = (0..m).map(|i| (f[i] - dot(&rows[i * n..(i + 1) * n], &c)).abs()).collect();
        let cuts = worst(err.iter().copied().enumerate().filter(|e| !in_set[e.0]), tv * (1.0 + CUT_TOL) + 1e-12, CUTS_PER_ROUND);
        if cuts.is_empty() {
            return Ok(tv * scale);
        }
        for i in cuts {
            if !in_set[i] {
                in_set[i] = true;
                set.push(i);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BBox;
    use crate::polyspace::chebyshev_points_scaled;

    #[test]
    fn mesh_containing_grid_gives_one() {
        let s = PolySpace::new(4, BBox::new(vec![0.0], vec![1.0])).unwrap();
        let grid: Vec<Vec<f64>> = (0..101).map(|i| vec![i as f64 / 100.0]).collect();
        let v = norming_constant_lp(&s, &grid, &grid).unwrap();
        assert!((v.value - 1.0).abs() < 1e-9, "{}", v.value);
    }

    #[test]
    fn chebyshev_interval_constant() {
        let s = PolySpace::new(3, BBox::new(vec![0.0], vec![1.0])).unwrap();
        let mesh: Vec<Vec<f64>> = chebyshev_points_scaled(3, 1.0).into_iter().map(|x| vec![x]).collect();
        let grid: Vec<Vec<f64>> = (0..1000).map(|i| vec![i as f64 / 999.0]).collect();
        let v = norming_constant_lp(&s, &mesh, &grid).unwrap();
        assert!(v.value > 1.0 && v.value <= 2f64.sqrt() * (1.0 + 1e-6), "{}", v.value);
    }

    #[test]
    fn too_few_points_is_unbounded() {
        let s = PolySpace::new(2, BBox::new(vec![-1.0, -1.0], vec![1.0, 1.0])).unwrap();
        let mesh: Vec<Vec<f64>> = (0..5).map(|i| vec![0.1 * i as f64, 0.3 - 0.05 * (i * i) as f64]).collect();
        let ctrl = vec![vec![0.0, 0.0]];
        assert!(matches!(norming_constant_lp(&s, &mesh, &ctrl), Err(Error::Unbounded)));
    }

    #[test]
    fn uniform_error_of_abs() {
        // best degree-1 approximation of |x| on [-1, 1] has error 1/2
        let s = PolySpace::new(1, BBox::new(vec![-1.0], vec![1.0])).unwrap();
        let pts: Vec<Vec<f64>> = (0..201).map(|i| vec![-1.0 + i as f64 / 100.0]).collect();
        let vals: Vec<f64> = pts.iter().map(|x| x[0].abs()).collect();
        let e = best_uniform_error(&s, &pts, &vals).unwrap();
        assert!((e - 0.5).abs() < 1e-9, "{e}");
    }
}
