//! Total-degree polynomial spaces in a product Chebyshev basis.
//!
//! The basis of `P^n(R^d)` is `T_a1(t_1) ... T_ad(t_d)` with `|a| <= n`, where
//! `t` is `x` mapped affinely from the bounding box onto `[-1, 1]^d`. Indices
//! are graded by total degree, then reverse-lexicographic within a degree.

mod lsq;
mod mesh;

pub use lsq::{afp_extract, dls_fit, numerical_rank};
pub use mesh::{Mesh, Provenance};

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::BBox;

/// `binom(n + d, d)`, the dimension of `P^n(R^d)`.
pub fn space_dimension(n: usize, d: usize) -> Result<usize> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    let mut acc: usize = 1;
    for k in 1..=d {
        // acc * (n + k) / k stays integral at every step
        acc = acc
            .checked_mul(n + k)
            .ok_or_else(|| Error::InvalidParameter(format!("binom({}, {d}) overflows", n + d)))?
            / k;
    }
    Ok(acc)
}

/// The `2n + 1` points `r/2 (1 + cos(pi (2n - j) / 2n))`, `j = 0..=2n`.
///
/// Built symmetrically from `sin` so the set is exactly mirrored about `r/2`.
pub fn chebyshev_points_scaled(n: usize, r: f64) -> Vec<f64> {
    assert!(n >= 1 && r > 0.0, "need n >= 1 and r > 0");
    let m = 2 * n;
    let half = |j: usize| {
        // 1 + cos(pi (m - j) / m) = 2 sin^2(pi j / 2m)
        let s = (std::f64::consts::PI * j as f64 / (2 * m) as f64).sin();
        r * s * s
    };
    (0..=m)
        .map(|j| match (2 * j).cmp(&m) {
            std::cmp::Ordering::Less => half(j),
            std::cmp::Ordering::Equal => 0.5 * r,
            std::cmp::Ordering::Greater => r - half(m - j),
        })
        .collect()
}

/// [`chebyshev_points_scaled`] as a mesh of `[0, r]` with constant `sqrt 2`.
pub fn interval_mesh(n: usize, r: f64) -> Mesh {
    Mesh {
        degree: n,
        constant: std::f64::consts::SQRT_2,
        provenance: Provenance::Interval { r },
        points: chebyshev_points_scaled(n, r).into_iter().map(|x| vec![x]).collect(),
        layers: None,
    }
}

/// Bernstein's bound `n / sqrt((x - a)(b - x))` for `|p'(x)| / ||p||_[a,b]`.
pub fn bernstein_bound(n: usize, a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a < x && x < b) {
        return Err(Error::InvalidParameter(format!("x = {x} must lie strictly inside ({a}, {b})")));
    }
    Ok(n as f64 / ((x - a) * (b - x)).sqrt())
}

/// `T_0..=T_n` at `t` into `out`.
fn chebyshev_values(t: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = t;
    }
    for k in 2..out.len() {
        out[k] = 2.0 * t * out[k - 1] - out[k - 2];
    }
}

/// `T_0'..=T_n'` at `t` via `T_k' = k U_{k-1}`.
fn chebyshev_derivatives(t: f64, out: &mut [f64]) {
    out[0] = 0.0;
    let (mut u_prev, mut u) = (0.0, 1.0); // U_{-1}, U_0
    for k in 1..out.len() {
        out[k] = k as f64 * u;
        let next = 2.0 * t * u - u_prev;
        u_prev = u;
        u = next;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolySpace {
    dim: usize,
    degree: usize,
    bbox: BBox,
    exponents: Vec<Vec<usize>>,
}

impl PolySpace {
    pub fn new(degree: usize, bbox: BBox) -> Result<Self> {
        let dim = bbox.dim();
        let expected = space_dimension(degree, dim)?;
        if bbox.lo.iter().zip(&bbox.hi).any(|(a, b)| !(b > a)) {
            return Err(Error::InvalidParameter("bounding box must have positive extent".into()));
        }
        let mut exponents = Vec::with_capacity(expected);
        for total in 0..=degree {
            push_compositions(total, dim, &mut Vec::new(), &mut exponents);
        }
        debug_assert_eq!(exponents.len(), expected);
        Ok(Self { dim, degree, bbox, exponents })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn bbox(&self) -> &BBox {
        &self.bbox
    }

    /// `N`, the number of basis functions.
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<usize>] {
        &self.exponents
    }

    fn local(&self, x: &[f64], j: usize) -> f64 {
        let (a, b) = (self.bbox.lo[j], self.bbox.hi[j]);
        (2.0 * x[j] - a - b) / (b - a)
    }

    fn table(&self, x: &[f64]) -> Vec<f64> {
        let m = self.degree + 1;
        let mut t = vec![0.0; self.dim * m];
        for j in 0..self.dim {
            chebyshev_values(self.local(x, j), &mut t[j * m..(j + 1) * m]);
        }
        t
    }

    /// All basis functions at `x`.
    pub fn eval_basis(&self, x: &[f64], out: &mut [f64]) {
        let m = self.degree + 1;
        let t = self.table(x);
        for (o, alpha) in out.iter_mut().zip(&self.exponents) {
            *o = alpha.iter().enumerate().map(|(j, &a)| t[j * m + a]).product();
        }
    }

    /// Derivatives of all basis functions at `x` along `v`.
    pub fn eval_basis_directional(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        let m = self.degree + 1;
        let t = self.table(x);
        let mut dt = vec![0.0; self.dim * m];
        for j in 0..self.dim {
            chebyshev_derivatives(self.local(x, j), &mut dt[j * m..(j + 1) * m]);
            let scale = 2.0 / (self.bbox.hi[j] - self.bbox.lo[j]);
            dt[j * m..(j + 1) * m].iter_mut().for_each(|d| *d *= scale);
        }
        for (o, alpha) in out.iter_mut().zip(&self.exponents) {
            let mut acc = 0.0;
            for (k, vk) in v.iter().enumerate() {
                if *vk == 0.0 {
                    continue;
                }
                let mut term = *vk;
                for (j, &a) in alpha.iter().enumerate() {
                    term *= if j == k { dt[j * m + a] } else { t[j * m + a] };
                }
                acc += term;
            }
            *o = acc;
        }
    }

    /// `V[i][j] = basis_j(points[i])`.
    pub fn vandermonde(&self, points: &[Vec<f64>]) -> DMatrix<f64> {
        let n = self.len();
        let mut v = DMatrix::zeros(points.len(), n);
        let mut row = vec![0.0; n];
        for (i, p) in points.iter().enumerate() {
            self.eval_basis(p, &mut row);
            for j in 0..n {
                v[(i, j)] = row[j];
            }
        }
        v
    }

    /// Coefficients of the polynomial whose values at `points` are `values`,
    /// by least squares. Exact for polynomials on a unisolvent set.
    pub fn fit(self: &Arc<Self>, points: &[Vec<f64>], values: &[f64]) -> Result<Poly> {
        lsq::least_squares(self, points, values)
    }

    /// Tensor grid of `(n + 1)^d` Chebyshev–Lobatto points of the box,
    /// unisolvent for the space.
    pub fn tensor_grid(&self) -> Vec<Vec<f64>> {
        let m = self.degree + 1;
        let axes: Vec<Vec<f64>> = (0..self.dim)
            .map(|j| {
                let (a, b) = (self.bbox.lo[j], self.bbox.hi[j]);
                (0..m)
                    .map(|k| {
                        let c = if m == 1 { 0.0 } else { (std::f64::consts::PI * k as f64 / (m - 1) as f64).cos() };
                        0.5 * (a + b) + 0.5 * (b - a) * c
                    })
                    .collect()
            })
            .collect();
        let mut out = vec![Vec::new()];
        for axis in &axes {
            out = out
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(*v);
                        q
                    })
                })
                .collect();
        }
        out
    }
}

fn push_compositions(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if parts == 1 {
        let mut alpha = prefix.clone();
        alpha.push(total);
        out.push(alpha);
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first);
        push_compositions(total - first, parts - 1, prefix, out);
        prefix.pop();
    }
}

/// A polynomial of `space`, stored by its basis coefficients.
#[derive(Clone, Debug)]
pub struct Poly {
    space: Arc<PolySpace>,
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(space: Arc<PolySpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients, got {}",
                space.len(),
                coeffs.len()
            )));
        }
        Ok(Self { space, coeffs })
    }

    pub fn constant(space: Arc<PolySpace>, c: f64) -> Self {
        let mut coeffs = vec![0.0; space.len()];
        coeffs[0] = c;
        Self { space, coeffs }
    }

    /// I.i.d. standard normal coefficients.
    pub fn random<R: Rng + ?Sized>(space: Arc<PolySpace>, rng: &mut R) -> Self {
        let coeffs = (0..space.len()).map(|_| rng.sample(StandardNormal)).collect();
        Self { space, coeffs }
    }

    /// `prod_k T_{deg_k}(a_k . x + b_k)`, for total degree at most the space's.
    pub fn chebyshev_product(space: Arc<PolySpace>, factors: &[(usize, Vec<f64>, f64)]) -> Result<Self> {
        let total: usize = factors.iter().map(|f| f.0).sum();
        if total > space.degree() {
            return Err(Error::InvalidParameter(format!(
                "product degree {total} exceeds the space degree {}",
                space.degree()
            )));
        }
        let grid = space.tensor_grid();
        let values: Vec<f64> = grid
            .iter()
            .map(|x| {
                factors
                    .iter()
                    .map(|(k, a, b)| {
                        let t = a.iter().zip(x).map(|(u, v)| u * v).sum::<f64>() + b;
                        chebyshev_t(*k, t)
                    })
                    .product()
            })
            .collect();
        space.fit(&grid, &values)
    }

    pub fn space(&self) -> &Arc<PolySpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut b = vec![0.0; self.space.len()];
        self.space.eval_basis(x, &mut b);
        b.iter().zip(&self.coeffs).map(|(u, c)| u * c).sum()
    }

    /// Derivative along `v` (not normalized).
    pub fn directional(&self, x: &[f64], v: &[f64]) -> f64 {
        let mut b = vec![0.0; self.space.len()];
        self.space.eval_basis_directional(x, v, &mut b);
        b.iter().zip(&self.coeffs).map(|(u, c)| u * c).sum()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (0..self.space.dim())
            .map(|k| {
                let mut e = vec![0.0; self.space.dim()];
                e[k] = 1.0;
                self.directional(x, &e)
            })
            .collect()
    }
}

/// `T_k(t)` for any real `t`.
pub fn chebyshev_t(k: usize, t: f64) -> f64 {
    let mut v = vec![0.0; k + 1];
    chebyshev_values(t, &mut v);
    v[k]
}

/// `max |p|` over a finite set.
pub fn sup_norm_on(points: &[Vec<f64>], p: &Poly) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(points.iter().map(|x| p.eval(x).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box(d: usize) -> BBox {
        BBox::new(vec![-1.0; d], vec![1.0; d])
    }

    #[test]
    fn dimensions() {
        assert_eq!(space_dimension(0, 2).unwrap(), 1);
        assert_eq!(space_dimension(2, 2).unwrap(), 6);
        assert_eq!(space_dimension(10, 3).unwrap(), 286);
        assert!(space_dimension(usize::MAX / 2, 3).is_err());
        let s = PolySpace::new(10, unit_box(3)).unwrap();
        assert_eq!(s.len(), 286);
        assert!(s.exponents().iter().all(|a| a.iter().sum::<usize>() <= 10));
    }

    #[test]
    fn chebyshev_points() {
        assert_eq!(chebyshev_points_scaled(1, 2.0), vec![0.0, 1.0, 2.0]);
        let p = chebyshev_points_scaled(2, 1.0);
        let want = [0.0, (1.0 - 0.5f64.sqrt()) / 2.0, 0.5, (1.0 + 0.5f64.sqrt()) / 2.0, 1.0];
        for (a, b) in p.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let p = chebyshev_points_scaled(7, 3.0);
        for j in 0..p.len() {
            assert!((p[j] + p[p.len() - 1 - j] - 3.0).abs() < 1e-15);
        }
        assert!(p.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let space = Arc::new(PolySpace::new(5, BBox::new(vec![0.0, -2.0], vec![3.0, 1.0])).unwrap());
        let coeffs = (0..space.len()).map(|i| ((i * 7 % 11) as f64 - 5.0) / 3.0).collect();
        let p = Poly::new(space, coeffs).unwrap();
        let x = [1.1, -0.3];
        let g = p.gradient(&x);
        let h = 1e-6;
        for k in 0..2 {
            let mut a = x;
            let mut b = x;
            a[k] += h;
            b[k] -= h;
            let fd = (p.eval(&a) - p.eval(&b)) / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-6 * (1.0 + g[k].abs()), "{fd} vs {}", g[k]);
        }
    }

    #[test]
    fn chebyshev_product_fit_is_exact() {
        let space = Arc::new(PolySpace::new(4, unit_box(2)).unwrap());
        let p = Poly::chebyshev_product(
            space,
            &[(3, vec![0.6, 0.8], 0.0), (1, vec![1.0, 0.0], 0.2)],
        )
        .unwrap();
        let x = [0.31, -0.77];
        let want = chebyshev_t(3, 0.6 * x[0] + 0.8 * x[1]) * (x[0] + 0.2);
        assert!((p.eval(&x) - want).abs() < 1e-12);
    }

    #[test]
    fn sup_norm_examples() {
        let s1 = Arc::new(PolySpace::new(1, BBox::new(vec![-2.0], vec![2.0])).unwrap());
        // p(x) = x in the scaled basis: x = 2 T_1(x / 2)
        let p = Poly::new(s1, vec![0.0, 2.0]).unwrap();
        let pts = vec![vec![0.0], vec![0.5], vec![-2.0]];
        assert_eq!(sup_norm_on(&pts, &p).unwrap(), 2.0);
        assert!(matches!(sup_norm_on(&[], &p), Err(Error::EmptySet)));
    }

    #[test]
    fn bernstein() {
        assert_eq!(bernstein_bound(3, -1.0, 1.0, 0.0).unwrap(), 3.0);
        assert_eq!(bernstein_bound(1, 0.0, 4.0, 2.0).unwrap(), 0.5);
        assert!(bernstein_bound(1, 0.0, 1.0, 0.0).is_err());
    }
}
