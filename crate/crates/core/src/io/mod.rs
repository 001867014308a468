//! File formats: Wavefront OBJ meshes, camera lists, coverage caches, model
//! weights, plan JSON and CSV reports.
//!
//! Every writer goes through [`write_atomic`]: data lands in a temporary
//! file next to the target and is renamed over it once complete.

mod binary;
mod cache;
mod cameras;
mod obj;
mod report;
mod weights;

use std::io::Write;
use std::path::Path;

use crate::planner::Plan;
use crate::{Error, Result};

pub use cache::{
    decode_coverage_cache, encode_coverage_cache, load_coverage_cache, save_coverage_cache,
    Certification, CoverageCache,
};
pub use cameras::{cameras_from_json, cameras_to_json, load_cameras, CameraSpec};
pub use obj::{load_mesh, parse_obj, write_obj};
pub use report::{
    learning_curve_rows, write_learning_curve, write_report, CurveRow, ReportRow, RunReport,
};
pub use weights::{check_digests, decode_model, encode_model, load_model, save_model, DigestCheck};

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn save_plan(path: &Path, plan: &Plan) -> Result<()> {
    let mut json = serde_json::to_vec_pretty(plan)?;
    json.push(b'\n');
    write_atomic(path, &json)
}

pub fn load_plan(path: &Path) -> Result<Plan> {
    Ok(serde_json::from_slice(&read_file(path)?)?)
}
