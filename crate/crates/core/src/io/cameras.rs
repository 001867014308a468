use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::mesh::{Point, TriangleMesh};
use crate::visibility::ViewPoint;
use crate::Result;

use super::read_file;

/// One entry of a cameras file. Positions and clip distances are in the
/// mesh's model units; the field of view is in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraSpec {
    pub position: [f64; 3],
    pub direction: [f64; 3],
    pub up: [f64; 3],
    pub fov_y_deg: f64,
    pub aspect: f64,
    pub near: f64,
    pub far: f64,
}

impl CameraSpec {
    /// Converts to normalized mesh units.
    pub fn to_view(&self, mesh: &TriangleMesh) -> Result<ViewPoint> {
        let s = mesh.normalization_scale();
        ViewPoint::new(
            Point::from(self.position) * s,
            Vector3::from(self.direction),
            Vector3::from(self.up),
            self.fov_y_deg.to_radians(),
            self.aspect,
            self.near * s,
            self.far * s,
        )
    }

    pub fn from_view(view: &ViewPoint, mesh: &TriangleMesh) -> Self {
        let s = mesh.normalization_scale();
        CameraSpec {
            position: (view.position() / s).coords.into(),
            direction: view.direction().into(),
            up: view.up().into(),
            fov_y_deg: view.fov_y().to_degrees(),
            aspect: view.aspect(),
            near: view.near() / s,
            far: view.far() / s,
        }
    }
}

pub fn cameras_from_json(text: &str, mesh: &TriangleMesh) -> Result<Vec<ViewPoint>> {
    let specs: Vec<CameraSpec> = serde_json::from_str(text)?;
    specs.iter().map(|c| c.to_view(mesh)).collect()
}

pub fn cameras_to_json(views: &[ViewPoint], mesh: &TriangleMesh) -> Result<String> {
    let specs: Vec<CameraSpec> = views
        .iter()
        .map(|v| CameraSpec::from_view(v, mesh))
        .collect();
    Ok(serde_json::to_string_pretty(&specs)?)
}

pub fn load_cameras(path: &Path, mesh: &TriangleMesh) -> Result<Vec<ViewPoint>> {
    let bytes = read_file(path)?;
    let specs: Vec<CameraSpec> = serde_json::from_slice(&bytes)?;
    specs.iter().map(|c| c.to_view(mesh)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::grid;

    #[test]
    fn degrees_and_units_are_converted() {
        let mesh = grid(3, 4); // diagonal 5 -> scale 0.2
        let text = r#"[{"position":[0,0,10],"direction":[0,0,-1],"up":[0,1,0],
                        "fov_y_deg":90,"aspect":1.5,"near":0.5,"far":20}]"#;
        let views = cameras_from_json(text, &mesh).unwrap();
        let v = &views[0];
        assert!((v.fov_y() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((v.position().z - 2.0).abs() < 1e-12);
        assert!((v.far() - 4.0).abs() < 1e-12);
        let back = cameras_to_json(&views, &mesh).unwrap();
        let again = cameras_from_json(&back, &mesh).unwrap();
        assert!((again[0].position() - v.position()).norm() < 1e-12);
    }

    #[test]
    fn invalid_camera_is_rejected() {
        let mesh = grid(2, 2);
        let text = r#"[{"position":[0,0,1],"direction":[0,1,0],"up":[0,1,0],
                        "fov_y_deg":60,"aspect":1,"near":0.1,"far":2}]"#;
        assert!(cameras_from_json(text, &mesh).is_err());
        assert!(cameras_from_json("{", &mesh).is_err());
    }
}
