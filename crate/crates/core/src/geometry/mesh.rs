use std::collections::{BinaryHeap, HashMap};
use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::surfaces::AnalyticSurface;

/// Smallest corner angle accepted, in radians.
pub const MIN_ANGLE: f64 = 1e-3;

pub type Point = [f64; 3];

/// Surface coordinates `(u, v)` of every vertex on the analytic surface it was
/// sampled from.
#[derive(Debug, Clone, PartialEq)]
pub struct Parametrization {
    pub surface: AnalyticSurface,
    pub coords: Vec<[f64; 2]>,
}

/// Closed, oriented triangle mesh with its intrinsic metric.
///
/// Edge lengths normally come from the vertex positions. A mesh built with
/// [`TriangleMesh::with_metric`] carries its own lengths instead, which is how
/// the flat torus is represented; its positions are then only a picture.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    vertices: Vec<Point>,
    faces: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    /// Per face, the three edges `(a,b), (b,c), (c,a)` with the sign of the
    /// face's traversal relative to the canonical `i < j` orientation.
    face_edges: Vec<[(usize, i8); 3]>,
    edge_lengths: Vec<f64>,
    face_areas: Vec<f64>,
    /// Interior angle at each corner, in face order.
    corner_angles: Vec<[f64; 3]>,
    dual_areas: Vec<f64>,
    intrinsic: bool,
    parametrization: Option<Parametrization>,
}

fn distance(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Area from side lengths (Kahan's stable Heron formula).
fn triangle_area(a: f64, b: f64, c: f64) -> f64 {
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s;
    let q = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    0.25 * q.max(0.0).sqrt()
}

/// Angle opposite side `a`.
fn opposite_angle(a: f64, b: f64, c: f64) -> f64 {
    ((b * b + c * c - a * a) / (2.0 * b * c)).clamp(-1.0, 1.0).acos()
}

impl TriangleMesh {
    /// Mesh whose metric is induced by the vertex positions.
    pub fn new(vertices: Vec<Point>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let positions = vertices.clone();
        Self::build(vertices, faces, false, |i, j| distance(&positions[i], &positions[j]))
    }

    /// Mesh with intrinsic edge lengths `length(i, j)`.
    pub fn with_metric(
        vertices: Vec<Point>,
        faces: Vec<[usize; 3]>,
        length: impl Fn(usize, usize) -> f64,
    ) -> Result<Self> {
        Self::build(vertices, faces, true, length)
    }

    fn build(
        vertices: Vec<Point>,
        faces: Vec<[usize; 3]>,
        intrinsic: bool,
        length: impl Fn(usize, usize) -> f64,
    ) -> Result<Self> {
        let nv = vertices.len();
        if nv == 0 || faces.is_empty() {
            return Err(Error::InvalidMesh("mesh has no vertices or no faces".into()));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidMesh("non-finite vertex coordinate".into()));
        }
        let mut used = vec![false; nv];
        for (f, face) in faces.iter().enumerate() {
            for &v in face {
                if v >= nv {
                    return Err(Error::InvalidMesh(format!("face {f} references vertex {v} of {nv}")));
                }
                used[v] = true;
            }
            if face[0] == face[1] || face[1] == face[2] || face[0] == face[2] {
                return Err(Error::DegenerateFace {
                    face: f,
                    reason: "repeated vertex".into(),
                });
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::InvalidMesh(format!("vertex {v} belongs to no face")));
        }

        // Directed half-edges per undirected edge.
        let mut edge_index: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges: Vec<[usize; 2]> = Vec::new();
        let mut uses: Vec<Vec<(usize, i8)>> = Vec::new();
        let mut face_edges = Vec::with_capacity(faces.len());
        for (f, &[a, b, c]) in faces.iter().enumerate() {
            let mut fe = [(0, 0); 3];
            for (k, &(from, to)) in [(a, b), (b, c), (c, a)].iter().enumerate() {
                let key = [from.min(to), from.max(to)];
                let sign = if from < to { 1 } else { -1 };
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    uses.push(Vec::new());
                    edges.len() - 1
                });
                uses[e].push((f, sign));
                fe[k] = (e, sign);
            }
            face_edges.push(fe);
        }
        for (e, u) in uses.iter().enumerate() {
            let [i, j] = edges[e];
            if u.len() != 2 {
                return Err(Error::MeshNotClosed(i, j, u.len()));
            }
            if u[0].1 == u[1].1 {
                return Err(Error::MeshNotOrientable(i, j));
            }
        }

        let edge_lengths: Vec<f64> = edges.iter().map(|&[i, j]| length(i, j)).collect();
        if let Some(e) = edge_lengths.iter().position(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidMesh(format!(
                "edge ({}, {}) has length {}",
                edges[e][0], edges[e][1], edge_lengths[e]
            )));
        }

        let mut face_areas = Vec::with_capacity(faces.len());
        let mut corner_angles = Vec::with_capacity(faces.len());
        let mut dual_areas = vec![0.0; nv];
        for (f, fe) in face_edges.iter().enumerate() {
            // Side k joins corners k and k+1, so corner k is opposite side k+1.
            let l = [edge_lengths[fe[0].0], edge_lengths[fe[1].0], edge_lengths[fe[2].0]];
            let (lmax, lsum) = (l[0].max(l[1]).max(l[2]), l[0] + l[1] + l[2]);
            if 2.0 * lmax >= lsum {
                return Err(Error::DegenerateFace {
                    face: f,
                    reason: format!("side lengths {l:?} violate the strict triangle inequality"),
                });
            }
            let area = triangle_area(l[0], l[1], l[2]);
            let angles = [
                opposite_angle(l[1], l[2], l[0]),
                opposite_angle(l[2], l[0], l[1]),
                opposite_angle(l[0], l[1], l[2]),
            ];
            let min_angle = angles.iter().cloned().fold(f64::INFINITY, f64::min);
            if !(area > 0.0) || min_angle <= MIN_ANGLE {
                return Err(Error::DegenerateFace {
                    face: f,
                    reason: format!("area {area:e}, smallest angle {min_angle:e} rad"),
                });
            }
            for &v in &faces[f] {
                dual_areas[v] += area / 3.0;
            }
            face_areas.push(area);
            corner_angles.push(angles);
        }

        Ok(Self {
            vertices,
            faces,
            edges,
            face_edges,
            edge_lengths,
            face_areas,
            corner_angles,
            dual_areas,
            intrinsic,
            parametrization: None,
        })
    }

    pub fn with_parametrization(mut self, parametrization: Parametrization) -> Result<Self> {
        if parametrization.coords.len() != self.vertices.len() {
            return Err(Error::DimensionMismatch {
                expected: self.vertices.len(),
                actual: parametrization.coords.len(),
            });
        }
        self.parametrization = Some(parametrization);
        Ok(self)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Edges with canonical orientation `i < j`.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn face_edges(&self) -> &[[(usize, i8); 3]] {
        &self.face_edges
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_lengths
    }

    pub fn face_areas(&self) -> &[f64] {
        &self.face_areas
    }

    pub fn corner_angles(&self) -> &[[f64; 3]] {
        &self.corner_angles
    }

    /// Barycentric dual areas (a third of each incident face).
    pub fn dual_areas(&self) -> &[f64] {
        &self.dual_areas
    }

    pub fn is_intrinsic(&self) -> bool {
        self.intrinsic
    }

    pub fn parametrization(&self) -> Option<&Parametrization> {
        self.parametrization.as_ref()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.face_count() as i64
    }

    /// Total area, which is the volume of a surface.
    pub fn area(&self) -> f64 {
        self.face_areas.iter().sum()
    }

    /// Number of connected components of the vertex-edge graph.
    pub fn components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.vertex_count()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut count = self.vertex_count();
        for &[i, j] in &self.edges {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a] = b;
                count -= 1;
            }
        }
        count
    }

    /// `2π - Σ incident angles` per vertex.
    pub fn angle_defects(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.vertex_count()];
        for (face, angles) in self.faces.iter().zip(&self.corner_angles) {
            for k in 0..3 {
                sums[face[k]] += angles[k];
            }
        }
        sums.into_iter().map(|s| 2.0 * std::f64::consts::PI - s).collect()
    }

    fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.vertex_count()];
        for (&[i, j], &l) in self.edges.iter().zip(&self.edge_lengths) {
            adj[i].push((j, l));
            adj[j].push((i, l));
        }
        adj
    }

    /// Shortest edge-path distances from `source`.
    pub fn graph_distances(&self, source: usize) -> Vec<f64> {
        dijkstra(&self.adjacency(), source)
    }

    /// Largest shortest edge-path distance over all vertex pairs.
    ///
    /// Edge paths are never shorter than geodesics, so this estimates the
    /// Riemannian diameter from above up to the distance from vertex pairs to
    /// the true extremal pair.
    pub fn diameter_estimate(&self) -> f64 {
        let adj = self.adjacency();
        (0..self.vertex_count())
            .into_par_iter()
            .map(|s| dijkstra(&adj, s).into_iter().fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max)
    }
}

#[derive(PartialEq)]
struct Visit(f64, usize);

impl Eq for Visit {}

impl Ord for Visit {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| self.1.cmp(&other.1))
    }
}

impl PartialOrd for Visit {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Visit(0.0, source));
    while let Some(Visit(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, l) in &adj[v] {
            let nd = d + l;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Visit(nd, w));
            }
        }
    }
    dist
}
