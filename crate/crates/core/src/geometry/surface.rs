//! Graph discretizations of boundary curves and level surfaces, and the
//! geodesic fill distance measured on them.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::error::{Error, Result};

/// Weighted adjacency graph embedded in R^d.
#[derive(Clone, Debug, Default)]
pub struct SurfaceGraph {
    pub nodes: Vec<Vec<f64>>,
    pub adjacency: Vec<Vec<(usize, f64)>>,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

impl SurfaceGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        let w = dist(&self.nodes[a], &self.nodes[b]);
        self.adjacency[a].push((b, w));
        self.adjacency[b].push((a, w));
    }

    /// Closed polyline through `points` in order.
    pub fn closed_polyline(points: Vec<Vec<f64>>) -> Self {
        let n = points.len();
        let mut g = Self { adjacency: vec![Vec::new(); n], nodes: points };
        for i in 0..n {
            if n > 1 && !(n == 2 && i == 1) {
                g.add_edge(i, (i + 1) % n);
            }
        }
        g
    }

    /// Icosphere: an icosahedron refined `subdivisions` times and pushed onto
    /// the sphere. Edge lengths shrink by about half per level.
    pub fn sphere(center: [f64; 3], radius: f64, subdivisions: u32) -> Self {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut verts: Vec<[f64; 3]> = vec![
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ];
        for v in verts.iter_mut() {
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            v.iter_mut().for_each(|c| *c /= n);
        }
        let mut faces: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..subdivisions {
            let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
            let mut midpoint = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| -> usize {
                let key = (a.min(b), a.max(b));
                *cache.entry(key).or_insert_with(|| {
                    let m: [f64; 3] = std::array::from_fn(|k| 0.5 * (verts[a][k] + verts[b][k]));
                    let n = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
                    verts.push(m.map(|c| c / n));
                    verts.len() - 1
                })
            };
            let mut next = Vec::with_capacity(faces.len() * 4);
            for [a, b, c] in faces {
                let ab = midpoint(a, b, &mut verts);
                let bc = midpoint(b, c, &mut verts);
                let ca = midpoint(c, a, &mut verts);
                next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            faces = next;
        }
        let nodes: Vec<Vec<f64>> =
            verts.iter().map(|v| (0..3).map(|k| center[k] + radius * v[k]).collect()).collect();
        let mut g = Self { adjacency: vec![Vec::new(); nodes.len()], nodes };
        let mut seen = std::collections::HashSet::new();
        for [a, b, c] in faces {
            for (u, v) in [(a, b), (b, c), (c, a)] {
                if seen.insert((u.min(v), u.max(v))) {
                    g.add_edge(u, v);
                }
            }
        }
        g
    }

    pub fn max_edge_length(&self) -> f64 {
        self.adjacency.iter().flatten().map(|e| e.1).fold(0.0, f64::max)
    }

    /// Inserts `points` as new nodes, each joined to its `k` nearest existing
    /// nodes. Returns the new node indices.
    pub fn insert_snapped(&mut self, points: &[Vec<f64>], k: usize) -> Vec<usize> {
        let base = self.nodes.len();
        let mut ids = Vec::with_capacity(points.len());
        for p in points {
            let mut near: Vec<(f64, usize)> = (0..base).map(|i| (dist(&self.nodes[i], p), i)).collect();
            let k = k.min(near.len());
            if k > 0 {
                near.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0));
            }
            let id = self.nodes.len();
            self.nodes.push(p.clone());
            self.adjacency.push(Vec::new());
            for &(_, j) in near.iter().take(k) {
                self.add_edge(id, j);
            }
            ids.push(id);
        }
        ids
    }

    /// Multi-source shortest-path distances from `sources`.
    pub fn distances_from(&self, sources: &[usize]) -> Vec<f64> {
        #[derive(PartialEq)]
        struct Item(f64, usize);
        impl Eq for Item {}
        impl Ord for Item {
            fn cmp(&self, other: &Self) -> Ordering {
                other.0.total_cmp(&self.0).then_with(|| self.1.cmp(&other.1))
            }
        }
        impl PartialOrd for Item {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }
        let mut d = vec![f64::INFINITY; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            d[s] = 0.0;
            heap.push(Item(0.0, s));
        }
        while let Some(Item(du, u)) = heap.pop() {
            if du > d[u] {
                continue;
            }
            for &(v, w) in &self.adjacency[u] {
                let nd = du + w;
                if nd < d[v] {
                    d[v] = nd;
                    heap.push(Item(nd, v));
                }
            }
        }
        d
    }

    fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        self.distances_from(&[0]).iter().all(|v| v.is_finite())
    }
}

/// `sup_x inf_{y in Y}` graph-geodesic distance, with the supremum taken over
/// every point of every edge (not only the nodes). Graph paths follow chords,
/// so the error against the true surface is bounded by the edge length.
pub fn geodesic_fill_distance(surface: &SurfaceGraph, sources: &[usize]) -> Result<f64> {
    if sources.is_empty() {
        return Err(Error::EmptySet);
    }
    if !surface.is_connected() {
        return Err(Error::DisconnectedSurface);
    }
    let d = surface.distances_from(sources);
    let mut fill: f64 = d.iter().cloned().fold(0.0, f64::max);
    for (u, edges) in surface.adjacency.iter().enumerate() {
        for &(v, w) in edges {
            fill = fill.max(0.5 * (d[u] + d[v] + w));
        }
    }
    Ok(fill)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    fn circle(n: usize) -> SurfaceGraph {
        SurfaceGraph::closed_polyline(
            (0..n).map(|i| {
                let (s, c) = (TAU * i as f64 / n as f64).sin_cos();
                vec![c, s]
            })
            .collect(),
        )
    }

    #[test]
    fn circle_quarter_points() {
        let g = circle(10_000);
        let h = geodesic_fill_distance(&g, &[0, 2500, 5000, 7500]).unwrap();
        assert!((h - PI / 4.0).abs() < 1e-3);
        let all: Vec<usize> = (0..10_000).collect();
        let h = geodesic_fill_distance(&g, &all).unwrap();
        // sup over edge midpoints: half an edge
        assert!(h < 1e-3);
    }

    #[test]
    fn disconnected_is_rejected() {
        let mut g = circle(100);
        g.nodes.push(vec![5.0, 5.0]);
        g.adjacency.push(Vec::new());
        assert!(matches!(geodesic_fill_distance(&g, &[0]), Err(Error::DisconnectedSurface)));
    }

    #[test]
    fn icosphere_edges_shrink() {
        let g = SurfaceGraph::sphere([0.0; 3], 1.0, 3);
        assert_eq!(g.len(), 642);
        assert!(g.max_edge_length() < 0.2);
        for p in &g.nodes {
            assert!(((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() - 1.0).abs() < 1e-14);
        }
    }
}
