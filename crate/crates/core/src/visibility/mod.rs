//! Per-view coverage: which triangles each candidate camera sees.
//!
//! A triangle counts as covered when its centroid is inside the view
//! frustum, it faces the camera, and the segment from the centroid to the
//! camera reaches the camera without crossing the mesh. Coverage is binary
//! per triangle.

mod bvh;
mod table;

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::mesh::{Point, Submesh, TriangleMesh};
use crate::{Error, Result};

pub use bvh::{intersect_triangle, Bvh, Hit, Ray};
pub use table::CoverageTable;

/// Self-intersection guard for occlusion rays, relative to the bounding-box diagonal.
pub const OCCLUSION_EPS: f64 = 1e-6;

/// Pinhole camera pose and frustum, in normalized mesh units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewPoint {
    position: Point,
    direction: Vector3<f64>,
    up: Vector3<f64>,
    fov_y: f64,
    aspect: f64,
    near: f64,
    far: f64,
}

impl ViewPoint {
    /// `direction` and `up` are normalized here; they must not be parallel.
    pub fn new(
        position: Point,
        direction: Vector3<f64>,
        up: Vector3<f64>,
        fov_y: f64,
        aspect: f64,
        near: f64,
        far: f64,
    ) -> Result<Self> {
        let finite = position
            .coords
            .iter()
            .chain(direction.iter())
            .chain(up.iter())
            .all(|c| c.is_finite());
        if !finite {
            return Err(Error::input("camera pose has non-finite components"));
        }
        let dn = direction.norm();
        let un = up.norm();
        if dn == 0.0 || un == 0.0 {
            return Err(Error::input("camera direction and up must be nonzero"));
        }
        let direction = direction / dn;
        let up = up / un;
        if direction.cross(&up).norm() < 1e-9 {
            return Err(Error::input("camera direction and up are parallel"));
        }
        if !(fov_y > 0.0 && fov_y < std::f64::consts::PI) {
            return Err(Error::input(format!("fov_y {fov_y} outside (0, pi)")));
        }
        if !(aspect > 0.0 && aspect.is_finite()) {
            return Err(Error::input(format!("aspect {aspect} must be positive")));
        }
        if !(near > 0.0 && near < far && far.is_finite()) {
            return Err(Error::input(format!(
                "need 0 < near < far, got near {near}, far {far}"
            )));
        }
        Ok(ViewPoint {
            position,
            direction,
            up,
            fov_y,
            aspect,
            near,
            far,
        })
    }

    /// Like `new`, but keeps already-unit `direction` and `up` bit-for-bit
    /// instead of renormalizing them (used when reading saved cameras).
    pub(crate) fn from_stored(
        position: Point,
        direction: Vector3<f64>,
        up: Vector3<f64>,
        fov_y: f64,
        aspect: f64,
        near: f64,
        far: f64,
    ) -> Result<Self> {
        let mut v = Self::new(position, direction, up, fov_y, aspect, near, far)?;
        if (direction.norm() - 1.0).abs() > 1e-9 || (up.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::input("stored camera axes are not unit length"));
        }
        v.direction = direction;
        v.up = up;
        Ok(v)
    }

    /// Camera at `position` looking at `target`.
    pub fn look_at(
        position: Point,
        target: Point,
        up: Vector3<f64>,
        fov_y: f64,
        aspect: f64,
        near: f64,
        far: f64,
    ) -> Result<Self> {
        Self::new(position, target - position, up, fov_y, aspect, near, far)
    }

    pub fn position(&self) -> Point {
        self.position
    }
    pub fn direction(&self) -> Vector3<f64> {
        self.direction
    }
    pub fn up(&self) -> Vector3<f64> {
        self.up
    }
    pub fn fov_y(&self) -> f64 {
        self.fov_y
    }
    pub fn aspect(&self) -> f64 {
        self.aspect
    }
    pub fn near(&self) -> f64 {
        self.near
    }
    pub fn far(&self) -> f64 {
        self.far
    }

    /// Same pose with a different far plane.
    pub fn with_far(&self, far: f64) -> Result<Self> {
        Self::new(
            self.position,
            self.direction,
            self.up,
            self.fov_y,
            self.aspect,
            self.near,
            far,
        )
    }

    /// Pose with positions and clip distances multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(
            self.position * s,
            self.direction,
            self.up,
            self.fov_y,
            self.aspect,
            self.near * s,
            self.far * s,
        )
    }

    pub fn in_frustum(&self, p: &Point) -> bool {
        let right = self.direction.cross(&self.up).normalize();
        let up = right.cross(&self.direction);
        let v = p - self.position;
        let z = v.dot(&self.direction);
        if z < self.near || z > self.far {
            return false;
        }
        let half_h = z * (self.fov_y / 2.0).tan();
        let half_w = half_h * self.aspect;
        v.dot(&up).abs() <= half_h && v.dot(&right).abs() <= half_w
    }
}

/// Triangles of `mesh` covered by `view`.
pub fn view_coverage(mesh: &TriangleMesh, bvh: &Bvh, view: &ViewPoint) -> Submesh {
    let eps = OCCLUSION_EPS * mesh.bbox_diagonal();
    let covered = (0..mesh.triangle_count()).filter(|&t| {
        let c = mesh.centroid(t);
        if !view.in_frustum(&c) {
            return false;
        }
        let to_cam = view.position - c;
        if mesh.face_normal(t).dot(&to_cam) <= 0.0 {
            return false;
        }
        let dist = to_cam.norm();
        let ray = Ray::new(c, to_cam / dist);
        !bvh.occluded(mesh, &ray, eps, dist)
    });
    Submesh::from_triangles(mesh, covered).expect("indices come from the mesh")
}

/// Coverage of every view, computed in parallel. Output order follows `views`.
pub fn precompute_coverage(
    mesh: std::sync::Arc<TriangleMesh>,
    views: Vec<ViewPoint>,
) -> Result<CoverageTable> {
    if views.is_empty() {
        return Err(Error::input("no view points given"));
    }
    let bvh = Bvh::build(&mesh);
    let coverage: Vec<Submesh> = views
        .par_iter()
        .map(|v| view_coverage(&mesh, &bvh, v))
        .collect();
    CoverageTable::new(mesh, Some(views), coverage)
}

/// `n` cameras spread over a sphere of `radius` around the bounding-box center,
/// each looking at the center. Useful for quick experiments and tests.
pub fn cameras_around(mesh: &TriangleMesh, n: usize, radius: f64, fov_y: f64) -> Vec<ViewPoint> {
    let (lo, hi) = mesh.bbox();
    let center = nalgebra::center(&lo, &hi);
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let y = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - y * y).sqrt();
            let phi = golden * i as f64;
            let dir = Vector3::new(r * phi.cos(), y, r * phi.sin());
            let up = if dir.y.abs() > 0.9 {
                Vector3::x()
            } else {
                Vector3::y()
            };
            ViewPoint::look_at(
                center + dir * radius,
                center,
                up,
                fov_y,
                1.0,
                1e-3,
                4.0 * radius,
            )
            .expect("valid generated camera")
        })
        .collect()
}
