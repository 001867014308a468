use std::fmt::Write as _;
use std::path::Path;

use crate::mesh::{Point, TriangleMesh};
use crate::{Error, Result};

use super::{read_file, write_atomic};

/// Parses vertex (`v`) and face (`f`) records. Faces with more than three
/// corners become triangle fans; `v/vt/vn` corner syntax and negative
/// (relative) indices are accepted. Everything else is ignored.
pub fn parse_obj(text: &str) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let err = |msg: String| Error::Syntax {
            format: "obj",
            line: lineno + 1,
            msg,
        };
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let coords: Vec<f64> = parts
                    .take(3)
                    .map(|p| {
                        p.parse::<f64>()
                            .map_err(|e| err(format!("bad coordinate '{p}': {e}")))
                    })
                    .collect::<Result<_>>()?;
                if coords.len() != 3 {
                    return Err(err("vertex needs three coordinates".into()));
                }
                vertices.push(Point::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let corners: Vec<u32> = parts
                    .map(|p| {
                        let idx = p.split('/').next().unwrap_or("");
                        let i: i64 = idx
                            .parse()
                            .map_err(|e| err(format!("bad face index '{p}': {e}")))?;
                        let n = vertices.len() as i64;
                        let resolved = if i < 0 { n + i } else { i - 1 };
                        if i == 0 || resolved < 0 || resolved >= n {
                            return Err(err(format!("face index {i} out of range")));
                        }
                        Ok(resolved as u32)
                    })
                    .collect::<Result<_>>()?;
                if corners.len() < 3 {
                    return Err(err("face needs at least three corners".into()));
                }
                for k in 1..corners.len() - 1 {
                    triangles.push([corners[0], corners[k], corners[k + 1]]);
                }
            }
            _ => {}
        }
    }
    if triangles.is_empty() {
        return Err(Error::Mesh("OBJ file contains no faces".into()));
    }
    TriangleMesh::new(vertices, triangles)
}

/// Reads and normalizes an OBJ mesh.
pub fn load_mesh(path: &Path) -> Result<TriangleMesh> {
    let bytes = read_file(path)?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Format {
        format: "obj",
        offset: e.utf8_error().valid_up_to() as u64,
        msg: "not valid UTF-8".into(),
    })?;
    parse_obj(&text)
}

/// Writes vertices with round-trip float formatting, so re-parsing yields
/// the same coordinates.
pub fn write_obj(path: &Path, mesh: &TriangleMesh) -> Result<()> {
    write_atomic(path, obj_text(mesh).as_bytes())
}

pub(crate) fn obj_text(mesh: &TriangleMesh) -> String {
    let mut out = String::new();
    for p in mesh.vertices() {
        let _ = writeln!(out, "v {:?} {:?} {:?}", p.x, p.y, p.z);
    }
    for [a, b, c] in mesh.triangles() {
        let _ = writeln!(out, "f {} {} {}", a + 1, b + 1, c + 1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{icosphere, HalfEdge};

    const SQUARE: &str = "# unit square\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3\nf 1 3 4\n";

    #[test]
    fn two_triangle_square() {
        let mesh = parse_obj(SQUARE).unwrap();
        assert_eq!(mesh.vertices().len(), 4);
        assert_eq!(mesh.triangle_count(), 2);
        let diag = mesh.edge_id(HalfEdge::new(0, 2)).unwrap();
        assert_eq!(mesh.edge(diag).incident().count(), 2);
        assert!((mesh.bbox_diagonal() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quad_is_fanned() {
        let mesh =
            parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1/1 2/2/2 3/3/3 4/4/4\n").unwrap();
        assert_eq!(mesh.triangles(), &[[0, 1, 2], [0, 2, 3]]);
        let rel = parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf -4 -3 -2 -1\n").unwrap();
        assert_eq!(rel.triangles(), mesh.triangles());
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(matches!(
            parse_obj("v 0 0\nf 1 2 3\n"),
            Err(Error::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_obj("v 0 0 0\nf 1 2 3\n"),
            Err(Error::Syntax { line: 2, .. })
        ));
        assert!(matches!(parse_obj("v 0 0 0\n"), Err(Error::Mesh(_))));
        let nonmanifold =
            "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 -1 0\nv 0 0 1\nf 1 2 3\nf 2 1 4\nf 1 2 5\n";
        assert!(matches!(parse_obj(nonmanifold), Err(Error::Mesh(_))));
    }

    #[test]
    fn icosphere_round_trip() {
        let mesh = icosphere(3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ico.obj");
        write_obj(&path, &mesh).unwrap();
        let back = load_mesh(&path).unwrap();
        assert_eq!(back.triangles(), mesh.triangles());
        for (a, b) in back.vertices().iter().zip(mesh.vertices()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(load_mesh(&dir.path().join("missing.obj")).is_err());
    }
}
