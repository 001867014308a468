use std::path::Path;
use std::sync::Arc;

use nalgebra::Vector3;

use crate::mesh::{Point, TriangleMesh};
use crate::visibility::{CoverageTable, ViewPoint};
use crate::{Error, Result};

use super::binary::{checked_u32, Put, Reader};
use super::{read_file, write_atomic};

const MAGIC: &[u8; 4] = b"VPCC";
const VERSION: u32 = 1;
const NONE: u32 = u32::MAX;

/// Counts recorded when a synthetic instance was certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Certification {
    pub oracle_count: Option<usize>,
    pub connected_oracle_count: Option<usize>,
    pub greedy_count: usize,
}

/// A coverage table plus optional certification counts, as stored on disk.
///
/// The file carries the normalized mesh itself so that planning and
/// training need no separate mesh input, and both the mesh digest and the
/// table digest are checked on load.
#[derive(Debug, Clone)]
pub struct CoverageCache {
    pub table: CoverageTable,
    pub certification: Option<Certification>,
}

fn opt_u32(n: Option<usize>) -> Result<u32> {
    match n {
        Some(n) if n < NONE as usize => Ok(n as u32),
        Some(n) => Err(Error::input(format!("count {n} too large"))),
        None => Ok(NONE),
    }
}

fn put_point(out: &mut Vec<u8>, p: [f64; 3]) {
    for c in p {
        out.put_f64(c);
    }
}

pub fn encode_coverage_cache(cache: &CoverageCache) -> Result<Vec<u8>> {
    let table = &cache.table;
    let mesh = table.mesh();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.put_u32(VERSION);
    out.put_u64(table.mesh_digest());
    out.put_u64(table.digest());

    out.put_f64(mesh.normalization_scale());
    out.put_u32(checked_u32("vertex", mesh.vertices().len())?);
    for p in mesh.vertices() {
        put_point(&mut out, [p.x, p.y, p.z]);
    }
    out.put_u32(checked_u32("triangle", mesh.triangle_count())?);
    for tri in mesh.triangles() {
        for &i in tri {
            out.put_u32(i);
        }
    }

    let lists = table.triangle_lists();
    out.put_u32(checked_u32("view", lists.len())?);
    match table.cameras() {
        None => out.put_u8(0),
        Some(cams) => {
            out.put_u8(1);
            for c in cams {
                put_point(&mut out, c.position().coords.into());
                put_point(&mut out, c.direction().into());
                put_point(&mut out, c.up().into());
                for v in [c.fov_y(), c.aspect(), c.near(), c.far()] {
                    out.put_f64(v);
                }
            }
        }
    }

    for list in &lists {
        out.put_u32(checked_u32("triangle", list.len())?);
        for &t in list {
            out.put_u32(t);
        }
    }

    match &cache.certification {
        None => out.put_u8(0),
        Some(c) => {
            out.put_u8(1);
            out.put_u32(opt_u32(c.oracle_count)?);
            out.put_u32(opt_u32(c.connected_oracle_count)?);
            out.put_u32(opt_u32(Some(c.greedy_count))?);
        }
    }
    Ok(out)
}

fn read_point(r: &mut Reader) -> Result<[f64; 3]> {
    Ok([r.f64()?, r.f64()?, r.f64()?])
}

fn read_opt(r: &mut Reader) -> Result<Option<usize>> {
    let v = r.u32()?;
    Ok((v != NONE).then_some(v as usize))
}

fn read_flag(r: &mut Reader) -> Result<bool> {
    match r.u8()? {
        0 => Ok(false),
        1 => Ok(true),
        v => Err(r.error(format!("invalid flag byte {v}"))),
    }
}

pub fn decode_coverage_cache(bytes: &[u8]) -> Result<CoverageCache> {
    let mut r = Reader::new("coverage cache", bytes);
    r.magic(MAGIC)?;
    r.version(VERSION)?;
    let mesh_digest = r.u64()?;
    let table_digest = r.u64()?;

    let scale = r.f64()?;
    let nv = r.len(24)?;
    let vertices = (0..nv)
        .map(|_| read_point(&mut r).map(Point::from))
        .collect::<Result<Vec<_>>>()?;
    let nt = r.len(12)?;
    let triangles = (0..nt)
        .map(|_| Ok([r.u32()?, r.u32()?, r.u32()?]))
        .collect::<Result<Vec<_>>>()?;
    let mesh = TriangleMesh::from_normalized(vertices, triangles, scale)?;
    if mesh.digest() != mesh_digest {
        return Err(Error::DigestMismatch {
            expected: mesh_digest,
            found: mesh.digest(),
        });
    }

    let views = r.u32()? as usize;
    let cameras = if read_flag(&mut r)? {
        let mut cams = Vec::with_capacity(views.min(1 << 16));
        for _ in 0..views {
            let at = r.offset();
            let [pos, dir, up] = [
                read_point(&mut r)?,
                read_point(&mut r)?,
                read_point(&mut r)?,
            ];
            let [fov, aspect, near, far] = [r.f64()?, r.f64()?, r.f64()?, r.f64()?];
            let cam = ViewPoint::from_stored(
                Point::from(pos),
                Vector3::from(dir),
                Vector3::from(up),
                fov,
                aspect,
                near,
                far,
            )
            .map_err(|e| Error::Format {
                format: "coverage cache",
                offset: at,
                msg: e.to_string(),
            })?;
            cams.push(cam);
        }
        Some(cams)
    } else {
        None
    };

    let mut lists = Vec::with_capacity(views.min(1 << 16));
    for _ in 0..views {
        let n = r.len(4)?;
        lists.push((0..n).map(|_| r.u32()).collect::<Result<Vec<_>>>()?);
    }

    let certification = if read_flag(&mut r)? {
        let oracle_count = read_opt(&mut r)?;
        let connected_oracle_count = read_opt(&mut r)?;
        let greedy_count = read_opt(&mut r)?.ok_or_else(|| r.error("missing greedy count"))?;
        Some(Certification {
            oracle_count,
            connected_oracle_count,
            greedy_count,
        })
    } else {
        None
    };
    r.finish()?;

    let table = CoverageTable::from_triangle_lists(Arc::new(mesh), cameras, &lists)?;
    if table.digest() != table_digest {
        return Err(Error::DigestMismatch {
            expected: table_digest,
            found: table.digest(),
        });
    }
    Ok(CoverageCache {
        table,
        certification,
    })
}

pub fn save_coverage_cache(path: &Path, cache: &CoverageCache) -> Result<()> {
    write_atomic(path, &encode_coverage_cache(cache)?)
}

pub fn load_coverage_cache(path: &Path) -> Result<CoverageCache> {
    decode_coverage_cache(&read_file(path)?)
}
