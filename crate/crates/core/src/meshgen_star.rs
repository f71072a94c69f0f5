//! Admissible meshes of star-shaped domains whose complement has positive
//! reach.
//!
//! A boundary mesh `Y` with geodesic fill distance `r / 2n` (where `r` is the
//! radius of the uniform inner tangent ball) is copied onto the `2n + 1`
//! homothetic layers `c + s_i (Y - c)`, with `s_i` the Chebyshev points of
//! `[0, 1]`. Each ray from the center then carries a `sqrt 2` norming set for
//! its segment, and the tangential Markov inequality on the inner balls
//! controls `p` between boundary nodes, giving the constant `2(sqrt 2 + 1)`.

use std::f64::consts::SQRT_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    boundary_samples, geodesic_fill_distance, ArcLength, BoundaryAtlas, Domain, StarDomain, SurfaceGraph,
};
use crate::polyspace::{chebyshev_points_scaled, Mesh, Provenance};

/// Norming constant of [`star_mesh`] and [`star_mesh_refined`].
pub const STAR_CONSTANT: f64 = 2.0 * (SQRT_2 + 1.0);

/// Nodes of the dense 2D polyline used to measure fill distances.
const POLYLINE_NODES: usize = 8192;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMeshKind {
    /// Equispaced in arc length along a planar boundary curve.
    ArcLength,
    /// Per-chart grids mapped through Lipschitz graphs.
    ChartGrid,
}

/// Boundary points with a certified geodesic fill distance.
#[derive(Clone, Debug)]
pub struct BoundaryMesh {
    pub points: Vec<Vec<f64>>,
    /// Curve parameters of the points (2D only), increasing.
    pub params: Option<Vec<f64>>,
    pub target_h: f64,
    /// Graph-geodesic fill distance on a dense discretization of the boundary.
    pub measured_fill: f64,
    /// Edge length of that discretization; the measurement error is below it.
    pub slack: f64,
    pub kind: BoundaryMeshKind,
    /// Points added at worst-fill nodes after the construction.
    pub repaired: usize,
}

impl BoundaryMesh {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `|Y| h^(d-1)`, bounded in `h` for a construction of optimal size.
    pub fn kappa(&self) -> f64 {
        let d = self.points.first().map_or(2, |p| p.len());
        self.points.len() as f64 * self.target_h.powi(d as i32 - 1)
    }
}

/// Boundary mesh with geodesic fill distance at most `h`.
///
/// Planar domains use `ceil(P / 2h)` points equispaced in arc length
/// (`P` the perimeter), whose fill distance is half the spacing. Domains in
/// 3D need a boundary atlas; each chart contributes the grid of step
/// `h / sqrt(1 + L^2)` of its parameter square.
pub fn boundary_mesh<D: Domain + ?Sized>(domain: &D, h: f64) -> Result<BoundaryMesh> {
    let diameter = domain.diameter();
    if !(h > 0.0) || h > diameter {
        return Err(Error::InvalidStep { h, diameter });
    }
    match domain.dim() {
        2 => Ok(arc_length_mesh(domain, h)),
        d => {
            let atlas = domain.atlas().ok_or(Error::AtlasRequired { dim: d })?;
            chart_grid_mesh(domain, &atlas, h)
        }
    }
}

/// 3D boundary mesh from an explicitly supplied atlas.
pub fn boundary_mesh_with_atlas<D: Domain + ?Sized>(domain: &D, atlas: &BoundaryAtlas, h: f64) -> Result<BoundaryMesh> {
    let diameter = domain.diameter();
    if !(h > 0.0) || h > diameter {
        return Err(Error::InvalidStep { h, diameter });
    }
    chart_grid_mesh(domain, atlas, h)
}

/// Number of arc-length equispaced points whose half spacing is at most `h`.
pub fn arc_length_count(perimeter: f64, h: f64) -> usize {
    // the relative slack absorbs rounding when P / 2h is an integer
    ((perimeter / (2.0 * h)) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

fn arc_length_mesh<D: Domain + ?Sized>(domain: &D, h: f64) -> BoundaryMesh {
    let shape = domain.shape();
    let arc = ArcLength::new(shape);
    let total = arc.total();
    let k = arc_length_count(total, h);
    let params: Vec<f64> = (0..k).map(|j| arc.param_at(total * j as f64 / k as f64)).collect();
    let points: Vec<Vec<f64>> =
        params.iter().map(|&t| shape.curve_point(t).expect("planar curve").to_vec()).collect();

    // dense polyline through the mesh points, for the fill measurement
    let mut nodes: Vec<(f64, bool)> = params.iter().map(|&t| (t, true)).collect();
    nodes.extend((0..POLYLINE_NODES).map(|j| (j as f64 / POLYLINE_NODES as f64, false)));
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    let coords: Vec<Vec<f64>> = nodes.iter().map(|(t, _)| shape.curve_point(*t).unwrap().to_vec()).collect();
    let sources: Vec<usize> = nodes.iter().enumerate().filter(|(_, n)| n.1).map(|(i, _)| i).collect();
    let graph = SurfaceGraph::closed_polyline(coords);
    let measured = geodesic_fill_distance(&graph, &sources).expect("polyline is connected");
    BoundaryMesh {
        points,
        params: Some(params),
        target_h: h,
        measured_fill: measured,
        slack: graph.max_edge_length(),
        kind: BoundaryMeshKind::ArcLength,
        repaired: 0,
    }
}

fn chart_grid_mesh<D: Domain + ?Sized>(domain: &D, atlas: &BoundaryAtlas, h: f64) -> Result<BoundaryMesh> {
    let diameter = domain.diameter();
    let mut points: Vec<Vec<f64>> = Vec::new();
    for chart in &atlas.charts {
        let r = chart.half_side;
        let step = h / (1.0 + chart.lipschitz * chart.lipschitz).sqrt();
        let count = (2.0 * r / step).ceil() as usize;
        for i in 0..=count {
            for j in 0..=count {
                let u = [-r + i as f64 * step, -r + j as f64 * step];
                if let Some(p) = chart.map(u) {
                    if chart.owns(&p) {
                        points.push(p.to_vec());
                    }
                }
            }
        }
    }
    dedup_points(&mut points, 1e-12 * diameter);

    let (mut graph, slack) = surface_graph(domain, h)?;
    let mut sources = graph.insert_snapped(&points, 6);
    let mut measured = geodesic_fill_distance(&graph, &sources)?;
    let mut repaired = 0;
    // a repair point can only lower the fill distance
    while measured > h + slack && repaired < 10_000 {
        let dist = graph.distances_from(&sources);
        let worst = (0..dist.len()).max_by(|a, b| dist[*a].total_cmp(&dist[*b])).expect("nonempty graph");
        points.push(graph.nodes[worst].clone());
        sources.push(worst);
        measured = geodesic_fill_distance(&graph, &sources)?;
        repaired += 1;
    }
    Ok(BoundaryMesh {
        points,
        params: None,
        target_h: h,
        measured_fill: measured,
        slack,
        kind: BoundaryMeshKind::ChartGrid,
        repaired,
    })
}

/// Dense triangulated discretization of a 3D boundary, with edges well below `h`.
fn surface_graph<D: Domain + ?Sized>(domain: &D, h: f64) -> Result<(SurfaceGraph, f64)> {
    let shape = domain.shape();
    let c = shape.center();
    let c3 = [c[0], c[1], c[2]];
    let mut sub = 2;
    let mut graph = SurfaceGraph::sphere(c3, 1.0, sub);
    while graph.max_edge_length() * shape.diameter() > h / 4.0 && sub < 6 {
        sub += 1;
        graph = SurfaceGraph::sphere(c3, 1.0, sub);
    }
    // push the unit icosphere onto the boundary along rays from the center
    let mut g = graph;
    for node in g.nodes.iter_mut() {
        let dir: Vec<f64> = (0..3).map(|k| node[k] - c[k]).collect();
        let r = shape.ray_exit(&c, &dir);
        for k in 0..3 {
            node[k] = c[k] + r * dir[k];
        }
    }
    let rebuilt = rebuild_weights(g);
    let slack = rebuilt.max_edge_length();
    Ok((rebuilt, slack))
}

fn rebuild_weights(g: SurfaceGraph) -> SurfaceGraph {
    let mut out = SurfaceGraph { nodes: g.nodes, adjacency: vec![Vec::new(); g.adjacency.len()] };
    for (u, edges) in g.adjacency.iter().enumerate() {
        for &(v, _) in edges {
            if u < v {
                out.add_edge(u, v);
            }
        }
    }
    out
}

/// Removes points within `tol` of an earlier point, keeping first occurrences.
pub fn dedup_points(points: &mut Vec<Vec<f64>>, tol: f64) {
    let keep = dedup_indices(points, tol);
    if keep.len() == points.len() {
        return;
    }
    let mut old = std::mem::take(points);
    *points = keep.into_iter().map(|i| std::mem::take(&mut old[i])).collect();
}

/// Indices of the points kept by [`dedup_points`], increasing.
pub fn dedup_indices(points: &[Vec<f64>], tol: f64) -> Vec<usize> {
    use std::collections::HashMap;
    let cell = tol.max(f64::MIN_POSITIVE) * 4.0;
    let key = |p: &[f64]| -> [i64; 3] {
        let mut k = [0i64; 3];
        for (j, v) in p.iter().enumerate().take(3) {
            k[j] = (v / cell).floor() as i64;
        }
        k
    };
    let d = points.first().map_or(0, |p| p.len()).min(3);
    // a point within tol of p lies in p's cell or a neighbouring one
    let mut offsets = vec![[0i64; 3]];
    for j in 0..d {
        offsets = offsets
            .into_iter()
            .flat_map(|o| {
                (-1..=1).map(move |s| {
                    let mut q = o;
                    q[j] = s;
                    q
                })
            })
            .collect();
    }
    let mut seen: HashMap<[i64; 3], Vec<usize>> = HashMap::with_capacity(points.len());
    let mut kept: Vec<usize> = Vec::with_capacity(points.len());
    for (idx, p) in points.iter().enumerate() {
        let k = key(p);
        let dup = offsets.iter().any(|off| {
            let nk = [k[0] + off[0], k[1] + off[1], k[2] + off[2]];
            seen.get(&nk).is_some_and(|ids| {
                ids.iter().any(|&i| points[i].iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() <= tol)
            })
        });
        if !dup {
            seen.entry(k).or_default().push(idx);
            kept.push(idx);
        }
    }
    kept
}

/// Layer fractions and fill target of [`star_mesh`].
#[derive(Clone, Debug, PartialEq)]
pub struct StarMeshParams {
    pub degree: usize,
    /// `s_i = (1 + cos(pi (2n - i) / 2n)) / 2`, `i = 0..=2n`.
    pub scales: Vec<f64>,
    /// Boundary fill target `r / 2n`.
    pub boundary_h: f64,
    pub refined: bool,
}

impl StarMeshParams {
    pub fn new(domain: &StarDomain, degree: usize, refined: bool) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidParameter("degree must be at least 1".into()));
        }
        Ok(Self {
            degree,
            scales: chebyshev_points_scaled(degree, 1.0),
            boundary_h: domain.r_ball() / (2 * degree) as f64,
            refined,
        })
    }
}

fn layer(center: &[f64], y: &[Vec<f64>], s: f64) -> Vec<Vec<f64>> {
    y.iter().map(|p| p.iter().zip(center).map(|(a, c)| c + s * (a - c)).collect()).collect()
}

/// The mesh `X_n = {c} u (c + s_i (Y - c), i = 1..=2n)` with
/// `Y = boundary_mesh(r / 2n)`; `|X_n| = 2n |Y| + 1`.
pub fn star_mesh(domain: &StarDomain, n: usize) -> Result<Mesh> {
    let params = StarMeshParams::new(domain, n, false)?;
    let y = boundary_mesh(domain, params.boundary_h)?;
    let c = domain.center();
    let mut points = vec![c.to_vec()];
    let mut layers = vec![0];
    for (i, &s) in params.scales.iter().enumerate().skip(1) {
        points.extend(layer(c, &y.points, s));
        layers.extend(std::iter::repeat(i).take(y.len()));
    }
    Ok(Mesh {
        degree: n,
        constant: STAR_CONSTANT,
        provenance: Provenance::Star { r_ball: domain.r_ball(), h: params.boundary_h },
        points,
        layers: Some(layers),
    })
}

/// Lower bound on the distance from the layer `c + s (boundary - c)` to the
/// boundary, from dense samples minus the sampling gap.
fn layer_clearance(domain: &StarDomain, s: f64, samples: &[Vec<f64>]) -> f64 {
    let c = domain.center();
    let shape = domain.shape();
    let min = samples
        .par_iter()
        .map(|x| {
            let q: Vec<f64> = x.iter().zip(c).map(|(a, cc)| cc + s * (a - cc)).collect();
            -shape.oriented_distance(&q)
        })
        .reduce(|| f64::INFINITY, f64::min);
    // b is 1-Lipschitz, and the scaled samples are at most s * gap apart
    let gap = samples
        .iter()
        .zip(samples.iter().cycle().skip(1))
        .map(|(a, b)| a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    (min - s * gap).max(0.0)
}

/// Per-layer coarsened variant. Layer `i` only needs geodesic fill
/// `delta_i / 2n` on itself, with `delta_i = max(dist(layer_i, boundary) / 2, s_i r)`
/// the radius of an inscribed ball tangent to the layer.
pub fn star_mesh_refined(domain: &StarDomain, n: usize) -> Result<Mesh> {
    let params = StarMeshParams::new(domain, n, true)?;
    if domain.dim() != 2 {
        // the clearance sampling below walks a planar boundary curve
        return Err(Error::InvalidParameter("the refined star mesh is implemented for planar domains".into()));
    }
    let samples = boundary_samples(domain.shape(), 4096);
    let diameter = domain.diameter();
    let r = domain.r_ball();
    let c = domain.center();
    let n2 = (2 * n) as f64;
    let targets: Vec<f64> = params.scales[1..]
        .iter()
        .map(|&s| {
            let delta = (layer_clearance(domain, s, &samples) / 2.0).max(s * r);
            // the layer is the boundary scaled by s: unscaled target delta / (2n s)
            (delta / (n2 * s)).min(diameter)
        })
        .collect();
    let mut points = vec![c.to_vec()];
    let mut layers = vec![0];
    let mut cache: Vec<(f64, BoundaryMesh)> = Vec::new();
    for (i, (&s, &h)) in params.scales[1..].iter().zip(&targets).enumerate() {
        if !cache.iter().any(|(hh, _)| *hh == h) {
            cache.push((h, boundary_mesh(domain, h)?));
        }
        let y = &cache.iter().find(|(hh, _)| *hh == h).unwrap().1;
        points.extend(layer(c, &y.points, s));
        layers.extend(std::iter::repeat(i + 1).take(y.len()));
    }
    Ok(Mesh {
        degree: n,
        constant: STAR_CONSTANT,
        provenance: Provenance::StarRefined { r_ball: r, layer_h: targets.iter().zip(&params.scales[1..]).map(|(h, s)| h * s).collect() },
        points,
        layers: Some(layers),
    })
}
