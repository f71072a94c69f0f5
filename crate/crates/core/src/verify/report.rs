use serde::{Deserialize, Serialize};

use super::{norming_constant_lp, norming_ratio_with, ControlGrid, LpConstant, NormingEstimate, SupEstimator};
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::polyspace::{Mesh, PolySpace};

/// Relative slack on a sampled ratio before it counts against the claim.
pub const RATIO_RTOL: f64 = 1e-9;
/// Relative slack on LP values, which carry the solver tolerance.
pub const LP_RTOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub trials: usize,
    pub seed: u64,
    pub grid: usize,
    /// Also solve the LP on a control grid of `lp_grid` points.
    pub lp: bool,
    pub lp_grid: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { trials: 1000, seed: 0, grid: super::DEFAULT_GRID, lp: false, lp_grid: 2000 }
    }
}

/// A check that failed, with the offending value and its limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: String,
    pub value: f64,
    pub limit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub construction: String,
    pub degree: usize,
    pub cardinality: usize,
    pub claimed_constant: f64,
    /// Absent when a trial polynomial vanished on the mesh.
    pub norming: Option<NormingEstimate>,
    pub lp: Option<LpConstant>,
    /// Sampled ratio restricted to the LP control grid; never above the LP value.
    pub lp_grid_ratio: Option<f64>,
    pub violations: Vec<Violation>,
    pub seed: u64,
    pub trials: usize,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Sampled norming ratio of `mesh` against its claimed constant, and the LP
/// constant on a coarser grid when requested. A mesh with constant 0 makes
/// no claim and is only measured.
pub fn verify_mesh(mesh: &Mesh, domain: &dyn Domain, opts: &VerifyOptions) -> Result<VerificationReport> {
    let claim = mesh.constant;
    let mut violations = Vec::new();
    let est = SupEstimator::with_grid(domain, ControlGrid::polar(domain, opts.grid));
    let norming = match norming_ratio_with(mesh, &est, opts.trials, opts.seed) {
        Ok(n) => {
            if claim > 0.0 && n.ratio > claim * (1.0 + RATIO_RTOL) {
                violations.push(Violation { kind: "norming_ratio".into(), value: n.ratio, limit: claim });
            }
            Some(n)
        }
        Err(Error::ZeroOnMesh { trial }) => {
            violations.push(Violation { kind: "zero_on_mesh".into(), value: trial as f64, limit: 0.0 });
            None
        }
        Err(e) => return Err(e),
    };
    let (mut lp, mut lp_grid_ratio) = (None, None);
    if opts.lp {
        let grid = ControlGrid::polar(domain, opts.lp_grid);
        let space = PolySpace::new(mesh.degree, domain.bbox())?;
        match norming_constant_lp(&space, &mesh.points, &grid.points) {
            Ok(c) => {
                if claim > 0.0 && c.value > claim * (1.0 + LP_RTOL) {
                    violations.push(Violation { kind: "lp_constant".into(), value: c.value, limit: claim });
                }
                let on_grid = SupEstimator::grid_only(grid, domain.bbox());
                if let Ok(r) = norming_ratio_with(mesh, &on_grid, opts.trials, opts.seed) {
                    if r.ratio > c.value * (1.0 + LP_RTOL) {
                        violations.push(Violation { kind: "lp_below_sample".into(), value: r.ratio, limit: c.value });
                    }
                    lp_grid_ratio = Some(r.ratio);
                }
                lp = Some(c);
            }
            Err(Error::Unbounded) => {
                violations.push(Violation { kind: "lp_unbounded".into(), value: f64::MAX, limit: claim });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(VerificationReport {
        construction: mesh.provenance.tag().into(),
        degree: mesh.degree,
        cardinality: mesh.cardinality(),
        claimed_constant: claim,
        norming,
        lp,
        lp_grid_ratio,
        violations,
        seed: opts.seed,
        trials: opts.trials,
    })
}
