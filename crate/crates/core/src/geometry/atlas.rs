//! Lipschitz graph charts covering a 3D boundary surface.

use std::fmt;
use std::sync::Arc;

type GraphFn = Arc<dyn Fn([f64; 2]) -> Option<f64> + Send + Sync>;
type OwnsFn = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// One chart: `anchor + u1 e1 + u2 e2 + graph(u) e3` for `u` in the square of
/// half-side `half_side`, where `(e1, e2, e3)` is the orthonormal `frame`.
/// A point produced by the chart is kept only where `owns` accepts it, so
/// overlapping charts can partition the surface.
#[derive(Clone)]
pub struct Chart {
    pub anchor: [f64; 3],
    pub frame: [[f64; 3]; 3],
    pub half_side: f64,
    pub lipschitz: f64,
    graph: GraphFn,
    owns: OwnsFn,
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chart")
            .field("anchor", &self.anchor)
            .field("half_side", &self.half_side)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

impl Chart {
    pub fn new(
        anchor: [f64; 3],
        frame: [[f64; 3]; 3],
        half_side: f64,
        lipschitz: f64,
        graph: impl Fn([f64; 2]) -> Option<f64> + Send + Sync + 'static,
        owns: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self { anchor, frame, half_side, lipschitz, graph: Arc::new(graph), owns: Arc::new(owns) }
    }

    /// Surface point over `u`, if the graph is defined there.
    pub fn map(&self, u: [f64; 2]) -> Option<[f64; 3]> {
        let h = (self.graph)(u)?;
        let [e1, e2, e3] = self.frame;
        Some(std::array::from_fn(|k| self.anchor[k] + u[0] * e1[k] + u[1] * e2[k] + h * e3[k]))
    }

    pub fn owns(&self, p: &[f64]) -> bool {
        (self.owns)(p)
    }
}

/// Finite family of charts whose owned images cover the boundary.
#[derive(Clone, Debug)]
pub struct BoundaryAtlas {
    pub charts: Vec<Chart>,
}

impl BoundaryAtlas {
    /// Six axis-aligned height-function charts of the sphere. Each chart owns
    /// the points whose dominant coordinate is its axis, widened by a 5% margin.
    pub fn sphere(center: [f64; 3], radius: f64) -> Self {
        let margin = 0.05 * radius;
        let half_side = radius / std::f64::consts::SQRT_2 + margin;
        let mut charts = Vec::with_capacity(6);
        for axis in 0..3 {
            for sign in [1.0, -1.0] {
                let mut e3 = [0.0; 3];
                e3[axis] = -sign;
                let mut e1 = [0.0; 3];
                e1[(axis + 1) % 3] = 1.0;
                let mut e2 = [0.0; 3];
                e2[(axis + 2) % 3] = 1.0;
                let mut anchor = center;
                anchor[axis] += sign * radius;
                let owns = move |p: &[f64]| {
                    let w: Vec<f64> = (0..3).map(|k| p[k] - center[k]).collect();
                    sign * w[axis] > 0.0
                        && (0..3).filter(|&k| k != axis).all(|k| w[k].abs() <= sign * w[axis] + margin)
                };
                let graph = move |u: [f64; 2]| {
                    let q = radius * radius - u[0] * u[0] - u[1] * u[1];
                    (q > 0.0).then(|| radius - q.sqrt())
                };
                let lipschitz = sphere_chart_lipschitz(radius, half_side, margin);
                charts.push(Chart::new(anchor, [e1, e2, e3], half_side, lipschitz, graph, owns));
            }
        }
        Self { charts }
    }

    pub fn max_lipschitz(&self) -> f64 {
        self.charts.iter().map(|c| c.lipschitz).fold(0.0, f64::max)
    }
}

/// Sampled maximum of `|grad graph|` over the owned part of one sphere chart.
fn sphere_chart_lipschitz(radius: f64, half_side: f64, margin: f64) -> f64 {
    let m = 400;
    let mut best: f64 = 0.0;
    for i in 0..=m {
        for j in 0..=m {
            let u = [
                -half_side + 2.0 * half_side * i as f64 / m as f64,
                -half_side + 2.0 * half_side * j as f64 / m as f64,
            ];
            let q = radius * radius - u[0] * u[0] - u[1] * u[1];
            if q <= 0.0 {
                continue;
            }
            let height = q.sqrt();
            if u[0].abs() <= height + margin && u[1].abs() <= height + margin {
                best = best.max(u[0].hypot(u[1]) / height);
            }
        }
    }
    // grid sampling of a smooth maximum; pad by one cell of slope change
    best * 1.01
}
