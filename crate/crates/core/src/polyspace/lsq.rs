//! Least squares on Vandermonde systems and greedy Fekete extraction.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{Mesh, Poly, PolySpace};
use crate::error::{Error, Result};

/// Relative singular-value threshold for numerical rank.
const RANK_TOL: f64 = 1e-11;

/// Numerical rank of a matrix: singular values above `RANK_TOL * sigma_max`.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    // reduce tall matrices to their square R factor first
    let r = if m.nrows() > m.ncols() { m.clone().qr().r() } else { m.clone() };
    let sv = r.singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > RANK_TOL * top).count()
}

pub(super) fn least_squares(space: &Arc<PolySpace>, points: &[Vec<f64>], values: &[f64]) -> Result<Poly> {
    let n = space.len();
    if points.len() != values.len() {
        return Err(Error::InvalidParameter(format!(
            "{} points but {} sample values",
            points.len(),
            values.len()
        )));
    }
    if points.len() < n {
        return Err(Error::RankDeficient { rank: points.len(), needed: n });
    }
    let v = space.vandermonde(points);
    let qr = v.qr();
    let r = qr.r();
    let sv = r.singular_values();
    let rank = sv.iter().filter(|s| **s > RANK_TOL * sv.max()).count();
    if rank < n {
        return Err(Error::RankDeficient { rank, needed: n });
    }
    let mut rhs = DVector::from_column_slice(values);
    qr.q_tr_mul(&mut rhs);
    let top = rhs.rows(0, n).into_owned();
    let c = r.solve_upper_triangular(&top).ok_or(Error::RankDeficient { rank, needed: n })?;
    Poly::new(space.clone(), c.iter().copied().collect())
}

/// Discrete least-squares projection of mesh samples onto the space.
pub fn dls_fit(space: &Arc<PolySpace>, mesh: &Mesh, samples: &[f64]) -> Result<Poly> {
    least_squares(space, &mesh.points, samples)
}

/// Approximate Fekete points: indices of `N` mesh points picked by a
/// column-pivoted orthogonalization of the transposed Vandermonde matrix.
///
/// Each step takes the row of largest residual norm (lowest index on exact
/// ties) and projects it out of the remaining rows, which is the pivot
/// sequence of Householder QR with column pivoting on `V^T`.
pub fn afp_extract(space: &PolySpace, points: &[Vec<f64>]) -> Result<Vec<usize>> {
    let n = space.len();
    let m = points.len();
    if m < n {
        return Err(Error::RankDeficient { rank: m, needed: n });
    }
    let mut rows = vec![0.0; m * n];
    for (i, p) in points.iter().enumerate() {
        space.eval_basis(p, &mut rows[i * n..(i + 1) * n]);
    }
    let norm2 = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let scale = (0..m).map(|i| norm2(&rows[i * n..(i + 1) * n])).fold(0.0, f64::max).sqrt();
    let mut taken = vec![false; m];
    let mut chosen = Vec::with_capacity(n);
    for k in 0..n {
        let mut best = (-1.0, usize::MAX);
        for i in 0..m {
            if !taken[i] {
                let v = norm2(&rows[i * n..(i + 1) * n]);
                if v > best.0 {
                    best = (v, i);
                }
            }
        }
        let (v, p) = best;
        if v.sqrt() <= RANK_TOL * 10.0 * scale {
            return Err(Error::RankDeficient { rank: k, needed: n });
        }
        taken[p] = true;
        chosen.push(p);
        let inv = 1.0 / v.sqrt();
        let q: Vec<f64> = rows[p * n..(p + 1) * n].iter().map(|x| x * inv).collect();
        for i in 0..m {
            if taken[i] {
                continue;
            }
            let row = &mut rows[i * n..(i + 1) * n];
            // two passes keep the residuals orthogonal to q in floating point
            for _ in 0..2 {
                let c: f64 = row.iter().zip(&q).map(|(a, b)| a * b).sum();
                row.iter_mut().zip(&q).for_each(|(a, b)| *a -= c * b);
            }
        }
    }
    Ok(chosen)
}
