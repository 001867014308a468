use std::sync::Arc;

use sha2::{Digest, Sha256};

use super::ViewPoint;
use crate::mesh::{union_coverage, Submesh, TriangleMesh};
use crate::{Error, Result};

/// Coverage of every initial view point, plus their union (the achievable coverage).
///
/// `cameras` is `None` for tables built directly from triangle sets, as the
/// synthetic instances are.
#[derive(Debug, Clone)]
pub struct CoverageTable {
    mesh: Arc<TriangleMesh>,
    cameras: Option<Vec<ViewPoint>>,
    coverage: Vec<Submesh>,
    achievable: Submesh,
    digest: u64,
}

impl CoverageTable {
    pub fn new(
        mesh: Arc<TriangleMesh>,
        cameras: Option<Vec<ViewPoint>>,
        coverage: Vec<Submesh>,
    ) -> Result<Self> {
        if coverage.is_empty() {
            return Err(Error::input("coverage table needs at least one view"));
        }
        if let Some(cams) = &cameras {
            if cams.len() != coverage.len() {
                return Err(Error::input(format!(
                    "{} cameras but {} coverage entries",
                    cams.len(),
                    coverage.len()
                )));
            }
        }
        let mut achievable = Submesh::empty(&mesh);
        for c in &coverage {
            achievable = union_coverage(&mesh, &achievable, c)?;
        }
        let digest = table_digest(&mesh, &coverage);
        Ok(CoverageTable {
            mesh,
            cameras,
            coverage,
            achievable,
            digest,
        })
    }

    pub fn from_triangle_lists(
        mesh: Arc<TriangleMesh>,
        cameras: Option<Vec<ViewPoint>>,
        lists: &[Vec<u32>],
    ) -> Result<Self> {
        let coverage = lists
            .iter()
            .map(|l| Submesh::from_triangles(&mesh, l.iter().map(|&t| t as usize)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(mesh, cameras, coverage)
    }

    pub fn mesh(&self) -> &TriangleMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<TriangleMesh> {
        &self.mesh
    }

    pub fn cameras(&self) -> Option<&[ViewPoint]> {
        self.cameras.as_deref()
    }

    /// Number of initial view points `N`.
    pub fn view_count(&self) -> usize {
        self.coverage.len()
    }

    pub fn coverage(&self, view: usize) -> &Submesh {
        &self.coverage[view]
    }

    pub fn coverages(&self) -> &[Submesh] {
        &self.coverage
    }

    pub fn achievable(&self) -> &Submesh {
        &self.achievable
    }

    pub fn mesh_digest(&self) -> u64 {
        self.mesh.digest()
    }

    /// Hash of the mesh digest and every view's triangle list.
    pub fn digest(&self) -> u64 {
        self.digest
    }

    pub fn triangle_lists(&self) -> Vec<Vec<u32>> {
        self.coverage
            .iter()
            .map(|c| c.triangles().ones().map(|t| t as u32).collect())
            .collect()
    }
}

fn table_digest(mesh: &TriangleMesh, coverage: &[Submesh]) -> u64 {
    let mut h = Sha256::new();
    h.update(mesh.digest().to_le_bytes());
    h.update((coverage.len() as u64).to_le_bytes());
    for c in coverage {
        h.update((c.len() as u64).to_le_bytes());
        for t in c.triangles().ones() {
            h.update((t as u32).to_le_bytes());
        }
    }
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("sha256 output is 32 bytes"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::grid;

    #[test]
    fn achievable_is_union_of_views() {
        let mesh = Arc::new(grid(4, 4));
        let lists = vec![vec![0, 1, 2], vec![2, 3, 10], vec![]];
        let table = CoverageTable::from_triangle_lists(mesh.clone(), None, &lists).unwrap();
        let expect = Submesh::from_triangles(&mesh, [0, 1, 2, 3, 10]).unwrap();
        assert_eq!(table.achievable().triangles(), expect.triangles());
        assert_eq!(table.achievable().boundary(), expect.boundary());
        assert!((table.achievable().area() - expect.area()).abs() < 1e-15);
        assert_eq!(table.view_count(), 3);
    }

    #[test]
    fn single_view_achievable_area() {
        let mesh = Arc::new(grid(3, 3));
        let table =
            CoverageTable::from_triangle_lists(mesh.clone(), None, &[vec![4, 5, 7]]).unwrap();
        let area: f64 = [4, 5, 7].iter().map(|&t| mesh.triangle_area(t)).sum();
        assert!((table.achievable().area() - area).abs() < 1e-15);
    }

    #[test]
    fn duplicate_views_get_identical_entries() {
        let mesh = Arc::new(grid(3, 3));
        let table =
            CoverageTable::from_triangle_lists(mesh, None, &[vec![1, 2], vec![1, 2]]).unwrap();
        assert_eq!(table.coverage(0), table.coverage(1));
    }

    #[test]
    fn rejects_empty_and_mismatched() {
        let mesh = Arc::new(grid(2, 2));
        assert!(CoverageTable::from_triangle_lists(mesh.clone(), None, &[]).is_err());
        assert!(
            CoverageTable::from_triangle_lists(mesh.clone(), Some(vec![]), &[vec![0]]).is_err()
        );
        assert!(CoverageTable::from_triangle_lists(mesh, None, &[vec![99]]).is_err());
    }
}
