//! Cardinality growth, the Markov-grid baseline and the least-squares study.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{best_uniform_error, norming_ratio_with, ControlGrid, SupEstimator, DEFAULT_GRID};
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::meshgen_c11::{cubic_grid, cubic_grid_count};
use crate::polyspace::{dls_fit, Mesh, Poly, PolySpace, Provenance};

/// Least-squares line `log |X_n| = slope log n + intercept`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the fit residuals in log space.
    pub residual: f64,
}

/// Fits `(degree, cardinality)` pairs; needs at least three distinct degrees.
pub fn cardinality_slope(table: &[(usize, usize)]) -> Result<SlopeFit> {
    let mut degrees: Vec<usize> = table.iter().map(|e| e.0).collect();
    degrees.sort_unstable();
    degrees.dedup();
    if degrees.len() < 3 || table.iter().any(|e| e.0 == 0 || e.1 == 0) {
        return Err(Error::InvalidParameter("slope fit needs three distinct positive degrees".into()));
    }
    let xs: Vec<f64> = table.iter().map(|e| (e.0 as f64).ln()).collect();
    let ys: Vec<f64> = table.iter().map(|e| (e.1 as f64).ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum::<f64>() / m).sqrt();
    Ok(SlopeFit { slope, intercept, residual })
}

/// Grid step `1 / (2 sqrt(d) M n^rexp)` that makes a Markov inequality with
/// constant `M n^rexp` give norming constant 2.
pub fn baseline_markov_step(dim: usize, n: usize, markov_m: f64, markov_exp: f64) -> Result<f64> {
    if !(markov_m > 0.0) {
        return Err(Error::InvalidParameter("Markov constant must be positive".into()));
    }
    if !(markov_exp >= 1.0) {
        return Err(Error::InvalidParameter("Markov exponent must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("degree must be at least 1".into()));
    }
    Ok(1.0 / (2.0 * (dim as f64).sqrt() * markov_m * (n as f64).powf(markov_exp)))
}

/// `K` intersected with the cubic grid of [`baseline_markov_step`].
pub fn baseline_markov_mesh(domain: &dyn Domain, n: usize, markov_m: f64, markov_exp: f64) -> Result<Mesh> {
    let step = baseline_markov_step(domain.dim(), n, markov_m, markov_exp)?;
    Ok(Mesh {
        degree: n,
        constant: 2.0,
        provenance: Provenance::Baseline { markov_m, markov_exp, step },
        points: cubic_grid(domain, step, 0.0),
        layers: None,
    })
}

/// Cardinality of [`baseline_markov_mesh`] without building it.
pub fn baseline_markov_cardinality(domain: &dyn Domain, n: usize, markov_m: f64, markov_exp: f64) -> Result<usize> {
    let step = baseline_markov_step(domain.dim(), n, markov_m, markov_exp)?;
    Ok(cubic_grid_count(domain, step, 0.0))
}

/// Functions approximated by the least-squares study.
#[derive(Clone, Debug)]
pub enum Target {
    /// `exp(x_1 + ... + x_d)`.
    Exp,
    /// `1 / (1 + 25 |x|^2)`.
    Runge,
    /// `|x_1|`.
    Abs,
    Poly(Poly),
}

impl Target {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "exp" => Ok(Self::Exp),
            "runge" => Ok(Self::Runge),
            "abs" => Ok(Self::Abs),
            other => Err(Error::InvalidParameter(format!("unknown target function '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Exp => "exp",
            Self::Runge => "runge",
            Self::Abs => "abs",
            Self::Poly(_) => "poly",
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Self::Exp => x.iter().sum::<f64>().exp(),
            Self::Runge => 1.0 / (1.0 + 25.0 * x.iter().map(|v| v * v).sum::<f64>()),
            Self::Abs => x[0].abs(),
            Self::Poly(p) => p.eval(x),
        }
    }
}

/// One degree of the least-squares study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DlsRow {
    pub degree: usize,
    pub cardinality: usize,
    /// `max |f - Lf|` over the control grid.
    pub error: f64,
    /// Sampled norming ratio `C_n` of the mesh.
    pub norming: f64,
    /// Best uniform error on the control grid, a lower bound of `d_n(f, K)`.
    pub best_error: f64,
    /// `(1 + C_n (1 + sqrt(card))) best_error`.
    pub bound: f64,
}

impl DlsRow {
    pub fn within_bound(&self) -> bool {
        self.error <= self.bound
    }
}

/// Fits `f` by discrete least squares on `mesh_for(n)` for each degree and
/// compares the uniform error with `(1 + C_n (1 + sqrt(card))) d_n`.
pub fn dls_convergence_study<M>(
    domain: &dyn Domain,
    mesh_for: M,
    f: &Target,
    degrees: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<DlsRow>>
where
    M: Fn(usize) -> Result<Mesh>,
{
    let grid = ControlGrid::polar(domain, DEFAULT_GRID);
    let values: Vec<f64> = grid.points.iter().map(|x| f.eval(x)).collect();
    let est = SupEstimator::with_grid(domain, grid);
    let mut rows = Vec::with_capacity(degrees.len());
    for &n in degrees {
        let mesh = mesh_for(n)?;
        let space = Arc::new(PolySpace::new(n, domain.bbox())?);
        let samples: Vec<f64> = mesh.points.iter().map(|x| f.eval(x)).collect();
        let p = dls_fit(&space, &mesh, &samples)?;
        let error = est.grid.points.iter().zip(&values).map(|(x, v)| (v - p.eval(x)).abs()).fold(0.0, f64::max);
        let norming = norming_ratio_with(&mesh, &est, trials, seed)?.ratio;
        let best_error = best_uniform_error(&space, &est.grid.points, &values)?;
        let card = mesh.cardinality() as f64;
        rows.push(DlsRow {
            degree: n,
            cardinality: mesh.cardinality(),
            error,
            norming,
            best_error,
            bound: (1.0 + norming * (1.0 + card.sqrt())) * best_error,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Shape, SmoothDomain};

    #[test]
    fn exact_power_law_slope() {
        let t: Vec<(usize, usize)> = [4usize, 8, 16, 32].iter().map(|&n| (n, 7 * n * n)).collect();
        let f = cardinality_slope(&t).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && f.residual < 1e-12);
        assert!(cardinality_slope(&t[..2]).is_err());
    }

    #[test]
    fn baseline_disk_count() {
        let d = SmoothDomain::new(Shape::disk([0.0, 0.0], 1.0).unwrap(), 1.0).unwrap();
        let step = baseline_markov_step(2, 4, 2.0, 2.0).unwrap();
        assert!((step - 1.0 / (2.0 * 2f64.sqrt() * 32.0)).abs() < 1e-15);
        let c = baseline_markov_cardinality(&d, 4, 2.0, 2.0).unwrap();
        let expect = std::f64::consts::PI / (step * step);
        assert!((c as f64 - expect).abs() < 0.01 * expect, "{c} vs {expect}");
        let m = baseline_markov_mesh(&d, 4, 2.0, 2.0).unwrap();
        assert_eq!(m.cardinality(), c);
        assert_eq!(m.constant, 2.0);
    }
}
