//! Procedural meshes used by synthetic instances and tests.

use std::collections::HashMap;

use super::{Point, TriangleMesh};

/// Two-triangle unit square in model units (not rescaled):
/// `T0 = (v0, v1, v2)`, `T1 = (v0, v2, v3)`.
pub fn unit_square() -> TriangleMesh {
    let verts = vec![
        Point::new(0.0, 0.0, 0.0),
        Point::new(1.0, 0.0, 0.0),
        Point::new(1.0, 1.0, 0.0),
        Point::new(0.0, 1.0, 0.0),
    ];
    TriangleMesh::from_normalized(verts, vec![[0, 1, 2], [0, 2, 3]], 1.0).expect("valid square")
}

/// Planar `width x height` grid of unit cells in the xy-plane, normals +z.
///
/// Cell `(x, y)` owns triangles `2 * (y * width + x)` and the one after it.
pub fn grid(width: usize, height: usize) -> TriangleMesh {
    assert!(width > 0 && height > 0, "grid must have at least one cell");
    let stride = width + 1;
    let mut verts = Vec::with_capacity(stride * (height + 1));
    for y in 0..=height {
        for x in 0..=width {
            verts.push(Point::new(x as f64, y as f64, 0.0));
        }
    }
    let mut tris = Vec::with_capacity(2 * width * height);
    for y in 0..height {
        for x in 0..width {
            let v00 = (y * stride + x) as u32;
            let v10 = v00 + 1;
            let v01 = v00 + stride as u32;
            let v11 = v01 + 1;
            tris.push([v00, v10, v11]);
            tris.push([v00, v11, v01]);
        }
    }
    TriangleMesh::new(verts, tris).expect("valid grid")
}

/// Geodesic sphere: icosahedron subdivided `subdivisions` times
/// (`20 * 4^subdivisions` triangles), outward winding.
pub fn icosphere(subdivisions: u32) -> TriangleMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Point> = [
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
    ]
    .iter()
    .map(|&[x, y, z]| Point::from(Point::new(x, y, z).coords.normalize()))
    .collect();
    let mut faces: Vec<[u32; 3]> = vec![
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
        let mut midpoints: HashMap<(u32, u32), u32> = HashMap::new();
        let mut midpoint = |a: u32, b: u32, verts: &mut Vec<Point>| -> u32 {
            *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let m = (verts[a as usize].coords + verts[b as usize].coords).normalize();
                verts.push(Point::from(m));
                (verts.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    TriangleMesh::new(verts, faces).expect("valid icosphere")
}
