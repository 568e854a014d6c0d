//! Random surface samples and sampled Hausdorff distances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::mesh::{bounding_box, PointCloud, TriMesh, Vec3};

/// `n` area-uniform samples carrying their face normals. Zero-area faces
/// are never drawn.
pub fn sample_mesh_to_cloud(mesh: &TriMesh, n: usize, seed: u64) -> PointCloud {
    let (pts, faces) = sample_surface(mesh, n, seed);
    let normals = faces.iter().map(|&f| mesh.face_normal(f)).collect();
    PointCloud::new(pts, normals).expect("sampled faces have non-zero area")
}

fn sample_surface(mesh: &TriMesh, n: usize, seed: u64) -> (Vec<Vec3>, Vec<usize>) {
    let mut cdf = Vec::with_capacity(mesh.num_faces());
    let mut total = 0.0;
    for f in 0..mesh.num_faces() {
        total += mesh.face_area(f);
        cdf.push(total);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = mesh.vertices();
    let mut pts = Vec::with_capacity(n);
    let mut faces = Vec::with_capacity(n);
    if !(total > 0.0) {
        return (pts, faces);
    }
    for _ in 0..n {
        let r = rng.random_range(0.0..total);
        let f = cdf.partition_point(|&c| c <= r).min(cdf.len() - 1);
        let (s, t): (f64, f64) = (rng.random(), rng.random());
        let s = s.sqrt();
        let [a, b, c] = mesh.faces()[f];
        pts.push(v[a] * (1.0 - s) + v[b] * (s * (1.0 - t)) + v[c] * (s * t));
        faces.push(f);
    }
    (pts, faces)
}

/// Closest point to `p` on triangle `abc`.
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

struct Node {
    lo: Vec3,
    hi: Vec3,
    /// Leaf: range into `order`; inner: children indices.
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

/// Bounding volume hierarchy over the faces of a mesh for closest-point queries.
pub struct TriangleTree<'a> {
    mesh: &'a TriMesh,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

const LEAF_SIZE: usize = 4;

impl<'a> TriangleTree<'a> {
    pub fn new(mesh: &'a TriMesh) -> Self {
        let v = mesh.vertices();
        let centroids: Vec<Vec3> = mesh
            .faces()
            .iter()
            .map(|f| (v[f[0]] + v[f[1]] + v[f[2]]) / 3.0)
            .collect();
        let mut tree = TriangleTree {
            mesh,
            order: (0..mesh.num_faces()).collect(),
            nodes: Vec::new(),
        };
        if !tree.order.is_empty() {
            tree.build(0, tree.order.len(), &centroids);
        }
        tree
    }

    fn build(&mut self, start: usize, end: usize, centroids: &[Vec3]) -> usize {
        let v = self.mesh.vertices();
        let corners: Vec<Vec3> = self.order[start..end]
            .iter()
            .flat_map(|&f| self.mesh.faces()[f].map(|i| v[i]))
            .collect();
        let (lo, hi) = bounding_box(&corners);
        let id = self.nodes.len();
        self.nodes.push(Node {
            lo,
            hi,
            start,
            end,
            children: None,
        });
        if end - start > LEAF_SIZE {
            let cs: Vec<Vec3> = self.order[start..end].iter().map(|&f| centroids[f]).collect();
            let (clo, chi) = bounding_box(&cs);
            let axis = (chi - clo).imax();
            let mid = (start + end) / 2;
            self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                centroids[a][axis].total_cmp(&centroids[b][axis]).then(a.cmp(&b))
            });
            let l = self.build(start, mid, centroids);
            let r = self.build(mid, end, centroids);
            self.nodes[id].children = Some((l, r));
        }
        id
    }

    /// Distance from `p` to the mesh surface.
    pub fn distance(&self, p: &Vec3) -> f64 {
        if self.nodes.is_empty() {
            return f64::INFINITY;
        }
        let mut best = f64::INFINITY;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if box_distance_sq(p, &node.lo, &node.hi) >= best {
                continue;
            }
            match node.children {
                Some((l, r)) => {
                    let dl = box_distance_sq(p, &self.nodes[l].lo, &self.nodes[l].hi);
                    let dr = box_distance_sq(p, &self.nodes[r].lo, &self.nodes[r].hi);
                    // visit the nearer child first
                    if dl < dr {
                        stack.extend([r, l]);
                    } else {
                        stack.extend([l, r]);
                    }
                }
                None => {
                    let v = self.mesh.vertices();
                    for &f in &self.order[node.start..node.end] {
                        let [a, b, c] = self.mesh.faces()[f];
                        let q = closest_point_on_triangle(p, &v[a], &v[b], &v[c]);
                        best = best.min((q - p).norm_squared());
                    }
                }
            }
        }
        best.sqrt()
    }
}

fn box_distance_sq(p: &Vec3, lo: &Vec3, hi: &Vec3) -> f64 {
    let d = Vec3::from_fn(|i, _| (lo[i] - p[i]).max(0.0).max(p[i] - hi[i]));
    d.norm_squared()
}

/// Largest distance from points of `a` (vertices plus `samples` random
/// points) to the surface of `b`.
pub fn directed_hausdorff(a: &TriMesh, b: &TriMesh, samples: usize, seed: u64) -> f64 {
    let tree = TriangleTree::new(b);
    let (mut pts, _) = sample_surface(a, samples, seed);
    pts.extend_from_slice(a.vertices());
    pts.par_iter().map(|p| tree.distance(p)).reduce(|| 0.0, f64::max)
}

/// Symmetric sampled Hausdorff distance as a fraction of the diagonal of the
/// box bounding both meshes.
pub fn hausdorff(a: &TriMesh, b: &TriMesh, samples: usize) -> f64 {
    hausdorff_seeded(a, b, samples, 0)
}

pub fn hausdorff_seeded(a: &TriMesh, b: &TriMesh, samples: usize, seed: u64) -> f64 {
    let mut all = a.vertices().to_vec();
    all.extend_from_slice(b.vertices());
    let (lo, hi) = bounding_box(&all);
    let diag = (hi - lo).norm();
    let d = directed_hausdorff(a, b, samples, seed).max(directed_hausdorff(b, a, samples, seed.wrapping_add(1)));
    if diag > 0.0 {
        d / diag
    } else {
        0.0
    }
}
