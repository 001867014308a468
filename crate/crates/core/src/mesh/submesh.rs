use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;

use super::{HalfEdge, TriangleMesh};
use crate::{Error, Result};

/// A coverage region: a set of mesh triangles with its oriented boundary
/// and cached area `A` and boundary length `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct Submesh {
    triangles: FixedBitSet,
    boundary: BTreeSet<HalfEdge>,
    area: f64,
    boundary_length: f64,
    mesh_digest: u64,
}

impl Submesh {
    pub fn empty(mesh: &TriangleMesh) -> Self {
        Submesh {
            triangles: FixedBitSet::with_capacity(mesh.triangle_count()),
            boundary: BTreeSet::new(),
            area: 0.0,
            boundary_length: 0.0,
            mesh_digest: mesh.digest(),
        }
    }

    pub fn from_triangles<I>(mesh: &TriangleMesh, triangles: I) -> Result<Self>
    where
        I: IntoIterator<Item = usize>,
    {
        let n = mesh.triangle_count();
        let mut bits = FixedBitSet::with_capacity(n);
        for t in triangles {
            if t >= n {
                return Err(Error::input(format!(
                    "triangle index {t} out of range (mesh has {n})"
                )));
            }
            bits.insert(t);
        }
        Ok(Self::from_valid_bits(mesh, bits))
    }

    pub fn from_bitset(mesh: &TriangleMesh, bits: &FixedBitSet) -> Result<Self> {
        let bits = checked_bits(mesh, bits)?;
        Ok(Self::from_valid_bits(mesh, bits))
    }

    fn from_valid_bits(mesh: &TriangleMesh, triangles: FixedBitSet) -> Self {
        let boundary = boundary_of(mesh, &triangles);
        let area = area_of(mesh, &triangles);
        let boundary_length = length_of(mesh, &boundary);
        Submesh {
            triangles,
            boundary,
            area,
            boundary_length,
            mesh_digest: mesh.digest(),
        }
    }

    pub fn triangles(&self) -> &FixedBitSet {
        &self.triangles
    }

    pub fn boundary(&self) -> &BTreeSet<HalfEdge> {
        &self.boundary
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn boundary_length(&self) -> f64 {
        self.boundary_length
    }

    pub fn mesh_digest(&self) -> u64 {
        self.mesh_digest
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_clear()
    }

    pub fn len(&self) -> usize {
        self.triangles.count_ones(..)
    }

    pub fn contains(&self, t: usize) -> bool {
        self.triangles.contains(t)
    }

    /// Whether the undirected edge under `h` belongs to some triangle of this submesh.
    pub fn has_edge(&self, mesh: &TriangleMesh, h: HalfEdge) -> bool {
        mesh.edge_id(h).is_some_and(|e| {
            mesh.edge(e)
                .incident()
                .any(|t| self.triangles.contains(t as usize))
        })
    }

    /// True when the two submeshes share at least one triangle.
    pub fn overlaps(&self, other: &Submesh) -> bool {
        !self.triangles.is_disjoint(&other.triangles)
    }

    /// Number of triangles in `self` that `other` does not already contain.
    pub fn gain_over(&self, other: &Submesh) -> usize {
        self.triangles.difference_count(&other.triangles)
    }

    fn check_mesh(&self, mesh: &TriangleMesh) -> Result<()> {
        if self.mesh_digest == mesh.digest() && self.triangles.len() == mesh.triangle_count() {
            Ok(())
        } else {
            Err(Error::MeshMismatch)
        }
    }
}

impl TriangleMesh {
    /// Boundary of a triangle set computed directly from edge incidence:
    /// the half-edges whose undirected edge has exactly one incident
    /// triangle in the set, oriented as in that triangle.
    pub fn brute_force_boundary(&self, triangles: &FixedBitSet) -> Result<BTreeSet<HalfEdge>> {
        let bits = checked_bits(self, triangles)?;
        Ok(boundary_of(self, &bits))
    }
}

fn checked_bits(mesh: &TriangleMesh, bits: &FixedBitSet) -> Result<FixedBitSet> {
    let n = mesh.triangle_count();
    if let Some(t) = bits.ones().find(|&t| t >= n) {
        return Err(Error::input(format!(
            "triangle index {t} out of range (mesh has {n})"
        )));
    }
    let mut out = bits.clone();
    out.grow(n);
    if out.len() > n {
        out = out.ones().collect::<FixedBitSet>();
        out.grow(n);
    }
    Ok(out)
}

fn boundary_of(mesh: &TriangleMesh, bits: &FixedBitSet) -> BTreeSet<HalfEdge> {
    let mut out = BTreeSet::new();
    for t in bits.ones() {
        let sides = mesh.half_edges(t);
        for (k, e) in mesh.triangle_edges(t).into_iter().enumerate() {
            let inside = mesh
                .edge(e)
                .incident()
                .filter(|&u| bits.contains(u as usize))
                .count();
            if inside == 1 {
                out.insert(sides[k]);
            }
        }
    }
    out
}

// Summed in triangle-index order so equal sets give bit-equal areas.
fn area_of(mesh: &TriangleMesh, bits: &FixedBitSet) -> f64 {
    bits.ones().fold(0.0, |acc, t| acc + mesh.triangle_area(t))
}

fn length_of(mesh: &TriangleMesh, boundary: &BTreeSet<HalfEdge>) -> f64 {
    boundary
        .iter()
        .fold(0.0, |acc, &h| acc + mesh.edge_length(h))
}

/// Boundary of `x1 ∪ x2` from the boundaries of the parts:
///
/// `[bd(x1) \ ed(x2)] ∪ [bd(x2) \ ed(x1)] ∪ [bd(x1) ∩ bd(x2)]`
///
/// with `bd` holding oriented half-edges and `ed` membership tested on the
/// undirected edge. An edge shared between a triangle of `x1` and its
/// neighbour in `x2` shows up in the two boundaries with opposite
/// orientations, so the intersection term drops it.
pub fn union_boundary(
    mesh: &TriangleMesh,
    x1: &Submesh,
    x2: &Submesh,
) -> Result<BTreeSet<HalfEdge>> {
    x1.check_mesh(mesh)?;
    x2.check_mesh(mesh)?;
    let mut out = BTreeSet::new();
    for &h in &x1.boundary {
        if !x2.has_edge(mesh, h) || x2.boundary.contains(&h) {
            out.insert(h);
        }
    }
    for &h in &x2.boundary {
        if !x1.has_edge(mesh, h) {
            out.insert(h);
        }
    }
    Ok(out)
}

/// Coverage of two submeshes taken together.
pub fn union_coverage(mesh: &TriangleMesh, x1: &Submesh, x2: &Submesh) -> Result<Submesh> {
    x1.check_mesh(mesh)?;
    x2.check_mesh(mesh)?;
    if x2.is_empty() {
        return Ok(x1.clone());
    }
    if x1.is_empty() {
        return Ok(x2.clone());
    }
    let boundary = union_boundary(mesh, x1, x2)?;
    let mut triangles = x1.triangles.clone();
    triangles.union_with(&x2.triangles);
    let area = area_of(mesh, &triangles);
    let boundary_length = length_of(mesh, &boundary);
    Ok(Submesh {
        triangles,
        boundary,
        area,
        boundary_length,
        mesh_digest: x1.mesh_digest,
    })
}

/// `A(x) / L(x)^λ`.
///
/// A nonempty submesh with no boundary (a fully covered closed surface)
/// scores `A` at `λ = 0` and `+∞` otherwise.
pub fn score(x: &Submesh, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::input(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    if x.is_empty() {
        return Err(Error::UndefinedScore);
    }
    if lambda == 0.0 {
        return Ok(x.area);
    }
    Ok(x.area / x.boundary_length.powf(lambda))
}
