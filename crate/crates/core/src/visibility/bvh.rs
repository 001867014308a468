//! Bounding volume hierarchy over mesh triangles for ray queries.

use nalgebra::Vector3;

use crate::mesh::{Point, TriangleMesh};

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: Point,
    hi: Point,
}

impl Aabb {
    fn empty() -> Self {
        Aabb {
            lo: Point::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            hi: Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: &Point) {
        self.lo = self.lo.inf(p);
        self.hi = self.hi.sup(p);
    }

    fn merge(&mut self, other: &Aabb) {
        self.grow(&other.lo);
        self.grow(&other.hi);
    }

    /// Slab test; returns the entry distance when the ray overlaps `[t_min, t_max]`.
    fn entry(&self, ray: &Ray, t_min: f64, t_max: f64) -> Option<f64> {
        let mut t0 = t_min;
        let mut t1 = t_max;
        for axis in 0..3 {
            let inv = ray.inv_dir[axis];
            let mut near = (self.lo[axis] - ray.origin[axis]) * inv;
            let mut far = (self.hi[axis] - ray.origin[axis]) * inv;
            if near.is_nan() || far.is_nan() {
                // origin on a slab plane with a zero direction component
                if ray.origin[axis] < self.lo[axis] || ray.origin[axis] > self.hi[axis] {
                    return None;
                }
                continue;
            }
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            t0 = t0.max(near);
            t1 = t1.min(far);
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Ray {
    pub origin: Point,
    pub dir: Vector3<f64>,
    inv_dir: Vector3<f64>,
}

impl Ray {
    pub fn new(origin: Point, dir: Vector3<f64>) -> Self {
        Ray {
            origin,
            dir,
            inv_dir: dir.map(|c| 1.0 / c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub triangle: usize,
    pub t: f64,
}

/// Möller–Trumbore, two-sided. Returns the ray parameter of the hit.
pub fn intersect_triangle(mesh: &TriangleMesh, t: usize, ray: &Ray) -> Option<f64> {
    let [a, b, c] = mesh.triangles()[t].map(|v| mesh.vertices()[v as usize]);
    let e1 = b - a;
    let e2 = c - a;
    let p = ray.dir.cross(&e2);
    let det = e1.dot(&p);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let inv = 1.0 / det;
    let s = ray.origin - a;
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = ray.dir.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    Some(e2.dot(&q) * inv)
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        bounds: Aabb,
        start: usize,
        end: usize,
    },
    Inner {
        bounds: Aabb,
        left: usize,
        right: usize,
    },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

/// Median-split BVH. Nearest-hit ties resolve to the lowest triangle index,
/// matching a linear scan exactly.
#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<usize>,
}

impl Bvh {
    pub fn build(mesh: &TriangleMesh) -> Self {
        let n = mesh.triangle_count();
        let mut order: Vec<usize> = (0..n).collect();
        let centroids: Vec<Point> = (0..n).map(|t| mesh.centroid(t)).collect();
        let boxes: Vec<Aabb> = (0..n)
            .map(|t| {
                let mut b = Aabb::empty();
                for v in mesh.triangles()[t] {
                    b.grow(&mesh.vertices()[v as usize]);
                }
                b
            })
            .collect();
        let mut nodes = Vec::with_capacity(2 * n / LEAF_SIZE + 1);
        build_node(&mut nodes, &mut order, 0, n, &centroids, &boxes);
        Bvh { nodes, order }
    }

    /// Closest hit with `t` in `[t_min, t_max]`.
    pub fn nearest_hit(
        &self,
        mesh: &TriangleMesh,
        ray: &Ray,
        t_min: f64,
        t_max: f64,
    ) -> Option<Hit> {
        let mut best: Option<Hit> = None;
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let limit = best.map_or(t_max, |h| h.t);
            let node = &self.nodes[i];
            if node.bounds().entry(ray, t_min, limit).is_none() {
                continue;
            }
            match *node {
                Node::Leaf { start, end, .. } => {
                    for &t in &self.order[start..end] {
                        if let Some(d) = intersect_triangle(mesh, t, ray) {
                            if d < t_min || d > t_max {
                                continue;
                            }
                            let better = match best {
                                None => true,
                                Some(h) => d < h.t || (d == h.t && t < h.triangle),
                            };
                            if better {
                                best = Some(Hit { triangle: t, t: d });
                            }
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        best
    }

    /// Whether anything is hit with `t` strictly inside `(t_min, t_max)`.
    pub fn occluded(&self, mesh: &TriangleMesh, ray: &Ray, t_min: f64, t_max: f64) -> bool {
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i];
            if node.bounds().entry(ray, t_min, t_max).is_none() {
                continue;
            }
            match *node {
                Node::Leaf { start, end, .. } => {
                    let hit = self.order[start..end].iter().any(|&t| {
                        intersect_triangle(mesh, t, ray).is_some_and(|d| d > t_min && d < t_max)
                    });
                    if hit {
                        return true;
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        false
    }
}

fn build_node(
    nodes: &mut Vec<Node>,
    order: &mut [usize],
    start: usize,
    end: usize,
    centroids: &[Point],
    boxes: &[Aabb],
) -> usize {
    let mut bounds = Aabb::empty();
    let mut cbounds = Aabb::empty();
    for &t in &order[start..end] {
        bounds.merge(&boxes[t]);
        cbounds.grow(&centroids[t]);
    }
    let idx = nodes.len();
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf { bounds, start, end });
        return idx;
    }
    let extent = cbounds.hi - cbounds.lo;
    let axis = extent.imax();
    let mid = (start + end) / 2;
    order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
        centroids[a][axis]
            .total_cmp(&centroids[b][axis])
            .then(a.cmp(&b))
    });
    nodes.push(Node::Leaf { bounds, start, end });
    let left = build_node(nodes, order, start, mid, centroids, boxes);
    let right = build_node(nodes, order, mid, end, centroids, boxes);
    nodes[idx] = Node::Inner {
        bounds,
        left,
        right,
    };
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{icosphere, TriangleMesh};
    use rand::{Rng, SeedableRng};

    fn linear_nearest(mesh: &TriangleMesh, ray: &Ray) -> Option<Hit> {
        let mut best: Option<Hit> = None;
        for t in 0..mesh.triangle_count() {
            if let Some(d) = intersect_triangle(mesh, t, ray) {
                if d >= 0.0 && best.is_none_or(|h| d < h.t) {
                    best = Some(Hit { triangle: t, t: d });
                }
            }
        }
        best
    }

    #[test]
    fn ray_through_centroid_hits_single_triangle() {
        let verts = vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
        ];
        let mesh = TriangleMesh::new(verts, vec![[0, 1, 2]]).unwrap();
        let bvh = Bvh::build(&mesh);
        let c = mesh.centroid(0);
        let ray = Ray::new(
            c + Vector3::new(0.0, 0.0, 1.0),
            Vector3::new(0.0, 0.0, -1.0),
        );
        let hit = bvh.nearest_hit(&mesh, &ray, 0.0, f64::INFINITY).unwrap();
        assert_eq!(hit.triangle, 0);
        assert!((hit.t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ray_missing_box_has_no_hit() {
        let mesh = icosphere(2);
        let bvh = Bvh::build(&mesh);
        let ray = Ray::new(Point::new(5.0, 5.0, 5.0), Vector3::new(1.0, 0.0, 0.0));
        assert!(bvh.nearest_hit(&mesh, &ray, 0.0, f64::INFINITY).is_none());
        assert!(!bvh.occluded(&mesh, &ray, 0.0, f64::INFINITY));
    }

    #[test]
    fn random_rays_match_linear_scan() {
        let mesh = icosphere(3);
        let bvh = Bvh::build(&mesh);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let o = Point::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let target = Point::new(
                rng.random_range(-0.3..0.3),
                rng.random_range(-0.3..0.3),
                rng.random_range(-0.3..0.3),
            );
            let ray = Ray::new(o, (target - o).normalize());
            let a = bvh.nearest_hit(&mesh, &ray, 0.0, f64::INFINITY);
            let b = linear_nearest(&mesh, &ray);
            match (a, b) {
                (Some(a), Some(b)) => {
                    assert!((a.t - b.t).abs() <= 1e-9);
                    assert_eq!(a.triangle, b.triangle);
                }
                (None, None) => {}
                other => panic!("bvh and linear scan disagree: {other:?}"),
            }
        }
    }
}
