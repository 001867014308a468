//! Triangle meshes and coverage submeshes.

mod shapes;
mod submesh;

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

pub use shapes::{grid, icosphere, unit_square};
pub use submesh::{score, union_boundary, union_coverage, Submesh};

pub type Point = Point3<f64>;

/// Directed edge of a triangle, oriented by that triangle's winding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfEdge {
    pub from: u32,
    pub to: u32,
}

impl HalfEdge {
    pub fn new(from: u32, to: u32) -> Self {
        debug_assert_ne!(from, to);
        HalfEdge { from, to }
    }

    pub fn reversed(self) -> Self {
        HalfEdge {
            from: self.to,
            to: self.from,
        }
    }

    fn key(self) -> (u32, u32) {
        (self.from.min(self.to), self.from.max(self.to))
    }
}

const NO_TRIANGLE: u32 = u32::MAX;

/// Undirected edge with its one or two incident triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub a: u32,
    pub b: u32,
    triangles: [u32; 2],
}

impl Edge {
    pub fn incident(&self) -> impl Iterator<Item = u32> + '_ {
        self.triangles.iter().copied().filter(|&t| t != NO_TRIANGLE)
    }

    pub fn is_border(&self) -> bool {
        self.triangles[1] == NO_TRIANGLE
    }
}

/// Immutable indexed triangle mesh with edge adjacency and per-triangle area.
///
/// Meshes built through [`TriangleMesh::new`] are rescaled so that their
/// bounding-box diagonal is 1. Scaling is about the origin, so camera poses
/// given in model units map over by the same factor.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    vertices: Vec<Point>,
    triangles: Vec<[u32; 3]>,
    edges: Vec<Edge>,
    edge_lookup: HashMap<(u32, u32), u32>,
    triangle_edges: Vec<[u32; 3]>,
    triangle_area: Vec<f64>,
    normalization_scale: f64,
    digest: u64,
}

impl TriangleMesh {
    /// Validates and normalizes a mesh given in model units.
    pub fn new(vertices: Vec<Point>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        let diagonal = bbox_diagonal(&vertices)?;
        let scale = 1.0 / diagonal;
        let vertices = vertices.into_iter().map(|p| p * scale).collect();
        Self::build(vertices, triangles, scale)
    }

    /// Rebuilds a mesh whose vertices are already normalized by `scale`.
    pub fn from_normalized(
        vertices: Vec<Point>,
        triangles: Vec<[u32; 3]>,
        scale: f64,
    ) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Mesh(format!(
                "normalization scale {scale} is not positive"
            )));
        }
        bbox_diagonal(&vertices)?;
        Self::build(vertices, triangles, scale)
    }

    /// Copy with every coordinate multiplied by `s` (no renormalization).
    pub fn scaled(&self, s: f64) -> Result<Self> {
        let vertices = self.vertices.iter().map(|p| p * s).collect();
        Self::from_normalized(
            vertices,
            self.triangles.clone(),
            self.normalization_scale * s,
        )
    }

    fn build(
        vertices: Vec<Point>,
        triangles: Vec<[u32; 3]>,
        normalization_scale: f64,
    ) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::Mesh("mesh has no triangles".into()));
        }
        let nv = vertices.len();
        let mut edges: Vec<Edge> = Vec::new();
        let mut edge_lookup: HashMap<(u32, u32), u32> = HashMap::new();
        let mut directed: HashMap<(u32, u32), u32> = HashMap::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let t = t as u32;
            if tri.iter().any(|&v| v as usize >= nv) {
                return Err(Error::Mesh(format!(
                    "triangle {t} references a missing vertex"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::Mesh(format!("triangle {t} repeats a vertex")));
            }
            let mut ids = [0u32; 3];
            for (k, id) in ids.iter_mut().enumerate() {
                let h = HalfEdge::new(tri[k], tri[(k + 1) % 3]);
                if let Some(other) = directed.insert((h.from, h.to), t) {
                    return Err(Error::Mesh(format!(
                        "half-edge {}->{} used by triangles {other} and {t}: inconsistent orientation or non-manifold edge",
                        h.from, h.to
                    )));
                }
                let key = h.key();
                *id = match edge_lookup.get(&key) {
                    Some(&e) => {
                        let edge = &mut edges[e as usize];
                        if edge.triangles[1] != NO_TRIANGLE {
                            return Err(Error::Mesh(format!(
                                "edge {}-{} has more than two incident triangles",
                                key.0, key.1
                            )));
                        }
                        edge.triangles[1] = t;
                        e
                    }
                    None => {
                        let e = edges.len() as u32;
                        edges.push(Edge {
                            a: key.0,
                            b: key.1,
                            triangles: [t, NO_TRIANGLE],
                        });
                        edge_lookup.insert(key, e);
                        e
                    }
                };
            }
            triangle_edges.push(ids);
        }

        let triangle_area = triangles
            .iter()
            .map(|tri| {
                let [a, b, c] = tri.map(|v| vertices[v as usize]);
                0.5 * (b - a).cross(&(c - a)).norm()
            })
            .collect();
        let digest = mesh_digest(&vertices, &triangles);

        Ok(TriangleMesh {
            vertices,
            triangles,
            edges,
            edge_lookup,
            triangle_edges,
            triangle_area,
            normalization_scale,
            digest,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        self.triangle_area[t]
    }

    pub fn triangle_areas(&self) -> &[f64] {
        &self.triangle_area
    }

    pub fn normalization_scale(&self) -> f64 {
        self.normalization_scale
    }

    /// First 8 bytes of SHA-256 over the normalized geometry.
    pub fn digest(&self) -> u64 {
        self.digest
    }

    /// Undirected edge ids of triangle `t`, side `k` running `v[k] -> v[k+1]`.
    pub fn triangle_edges(&self, t: usize) -> [u32; 3] {
        self.triangle_edges[t]
    }

    /// Oriented half-edges of triangle `t`.
    pub fn half_edges(&self, t: usize) -> [HalfEdge; 3] {
        let [a, b, c] = self.triangles[t];
        [
            HalfEdge::new(a, b),
            HalfEdge::new(b, c),
            HalfEdge::new(c, a),
        ]
    }

    pub fn edge_id(&self, h: HalfEdge) -> Option<u32> {
        self.edge_lookup.get(&h.key()).copied()
    }

    pub fn edge(&self, id: u32) -> &Edge {
        &self.edges[id as usize]
    }

    pub fn edge_length(&self, h: HalfEdge) -> f64 {
        (self.vertices[h.to as usize] - self.vertices[h.from as usize]).norm()
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v as usize].coords);
        Point::from((a + b + c) / 3.0)
    }

    /// Unnormalized face normal (length = 2 * area).
    pub fn face_normal(&self, t: usize) -> Vector3<f64> {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v as usize]);
        (b - a).cross(&(c - a))
    }

    pub fn bbox(&self) -> (Point, Point) {
        bbox(&self.vertices)
    }

    pub fn bbox_diagonal(&self) -> f64 {
        let (lo, hi) = self.bbox();
        (hi - lo).norm()
    }
}

fn bbox(points: &[Point]) -> (Point, Point) {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (lo, hi)
}

fn bbox_diagonal(points: &[Point]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Mesh("mesh has no vertices".into()));
    }
    if points
        .iter()
        .any(|p| !p.coords.iter().all(|c| c.is_finite()))
    {
        return Err(Error::Mesh("non-finite vertex coordinate".into()));
    }
    let (lo, hi) = bbox(points);
    let d = (hi - lo).norm();
    if d > 0.0 && d.is_finite() {
        Ok(d)
    } else {
        Err(Error::Mesh("degenerate bounding box".into()))
    }
}

fn mesh_digest(vertices: &[Point], triangles: &[[u32; 3]]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update((vertices.len() as u64).to_le_bytes());
    for p in vertices {
        for c in p.coords.iter() {
            hasher.update(c.to_le_bytes());
        }
    }
    hasher.update((triangles.len() as u64).to_le_bytes());
    for tri in triangles {
        for v in tri {
            hasher.update(v.to_le_bytes());
        }
    }
    let out = hasher.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("sha256 output is 32 bytes"))
}
