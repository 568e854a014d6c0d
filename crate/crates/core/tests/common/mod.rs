//! Independent oracles and input generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};
use std::f64::consts::PI;

use rand::Rng;
use subfit::primitives;
use subfit::{TriMesh, Vec3};

pub fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn edge_faces(faces: &[[usize; 3]]) -> HashMap<(usize, usize), Vec<usize>> {
    let mut m: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (f, t) in faces.iter().enumerate() {
        for k in 0..3 {
            m.entry(key(t[k], t[(k + 1) % 3])).or_default().push(f);
        }
    }
    m
}

fn valences(nv: usize, faces: &[[usize; 3]]) -> Vec<usize> {
    let mut nb = vec![HashSet::new(); nv];
    for t in faces {
        for k in 0..3 {
            nb[t[k]].insert(t[(k + 1) % 3]);
            nb[t[(k + 1) % 3]].insert(t[k]);
        }
    }
    nb.iter().map(|s| s.len()).collect()
}

/// Flips the interior edge `(a, b)` when the result stays manifold with
/// valences inside `lo..=hi`.
pub fn flip(faces: &mut [[usize; 3]], nv: usize, a: usize, b: usize, lo: usize, hi: usize) -> bool {
    let ef = edge_faces(faces);
    let Some(fs) = ef.get(&key(a, b)) else { return false };
    if fs.len() != 2 {
        return false;
    }
    // orient so that the first face runs a -> b
    let (mut a, mut b) = (a, b);
    let t0 = faces[fs[0]];
    let runs = (0..3).any(|k| t0[k] == a && t0[(k + 1) % 3] == b);
    if !runs {
        std::mem::swap(&mut a, &mut b);
    }
    let opp = |t: [usize; 3]| t.into_iter().find(|&x| x != a && x != b).unwrap();
    let (c, d) = (opp(faces[fs[0]]), opp(faces[fs[1]]));
    if c == d || ef.contains_key(&key(c, d)) {
        return false;
    }
    let val = valences(nv, faces);
    if val[a] <= lo || val[b] <= lo || val[c] >= hi || val[d] >= hi {
        return false;
    }
    faces[fs[0]] = [a, d, c];
    faces[fs[1]] = [b, c, d];
    true
}

/// Closed random manifold mesh with roughly `target` vertices and valences
/// in `3..=12`, built from a decimated icosphere by random edge flips.
pub fn random_closed_mesh(rng: &mut impl Rng, target: usize) -> TriMesh {
    let base = primitives::icosphere(if target > 42 { 2 } else { 1 });
    let target = target.clamp(8, base.num_vertices());
    let base = subfit::decimate::decimate_qem(&base, target, true).unwrap();
    let nv = base.num_vertices();
    let mut faces = base.faces().to_vec();
    for _ in 0..nv * 2 {
        let t = faces[rng.random_range(0..faces.len())];
        let k = rng.random_range(0..3);
        flip(&mut faces, nv, t[k], t[(k + 1) % 3], 3, 12);
    }
    let verts = base
        .vertices()
        .iter()
        .map(|p| p + Vec3::from_fn(|_, _| rng.random_range(-0.05..0.05)))
        .collect();
    TriMesh::new(verts, faces).unwrap()
}

/// Raises or lowers the valence of vertex `v` towards `n` with edge flips.
pub fn force_valence(mesh: &TriMesh, v: usize, n: usize) -> TriMesh {
    let nv = mesh.num_vertices();
    let mut faces = mesh.faces().to_vec();
    for _ in 0..64 {
        let cur = valences(nv, &faces)[v];
        if cur == n {
            break;
        }
        let mut done = false;
        if cur < n {
            // flip an edge of the link of v so that v gains a neighbor
            let link: Vec<(usize, usize)> = faces
                .iter()
                .filter(|t| t.contains(&v))
                .map(|t| {
                    let k = t.iter().position(|&x| x == v).unwrap();
                    (t[(k + 1) % 3], t[(k + 2) % 3])
                })
                .collect();
            for (a, b) in link {
                if flip(&mut faces, nv, a, b, 3, n.max(12)) {
                    done = true;
                    break;
                }
            }
        } else {
            let nbrs: Vec<usize> = faces.iter().filter(|t| t.contains(&v)).flatten().copied().collect();
            for x in nbrs {
                if x != v && flip(&mut faces, nv, v, x, 3.min(n), 12) {
                    done = true;
                    break;
                }
            }
        }
        if !done {
            break;
        }
    }
    TriMesh::new(mesh.vertices().to_vec(), faces).unwrap()
}

pub fn random_bary(rng: &mut impl Rng) -> [f64; 3] {
    let (a, b): (f64, f64) = (rng.random(), rng.random());
    let (a, b) = if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) };
    [1.0 - a - b, a, b]
}

fn beta(n: usize) -> f64 {
    let c = 3.0 / 8.0 + 0.25 * (2.0 * PI / n as f64).cos();
    (5.0 / 8.0 - c * c) / n as f64
}

/// A cropped piece of a subdivided mesh that tracks which positions agree
/// with the full refinement.
struct Local {
    pos: Vec<Vec3>,
    valid: Vec<bool>,
    faces: Vec<[usize; 3]>,
    crease: HashSet<(usize, usize)>,
}

impl Local {
    fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.pos.len()];
        for t in &self.faces {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if !nb[a].contains(&b) {
                    nb[a].push(b);
                    nb[b].push(a);
                }
            }
        }
        nb
    }

    fn complete(&self, v: usize, nb: &[Vec<usize>], ef: &HashMap<(usize, usize), Vec<usize>>) -> bool {
        nb[v].iter().all(|&x| ef[&key(v, x)].len() == 2 || self.crease.contains(&key(v, x)))
    }

    fn crease_neighbors(&self, v: usize, nb: &[Vec<usize>]) -> Vec<usize> {
        nb[v].iter().copied().filter(|&x| self.crease.contains(&key(v, x))).collect()
    }

    fn subdivide(&self) -> Local {
        let nb = self.neighbors();
        let ef = edge_faces(&self.faces);
        let mut pos = Vec::new();
        let mut valid = Vec::new();
        for v in 0..self.pos.len() {
            let cn = self.crease_neighbors(v, &nb);
            let ok = self.valid[v]
                && self.complete(v, &nb, &ef)
                && nb[v].iter().all(|&x| self.valid[x])
                && (cn.is_empty() || cn.len() == 2);
            let p = if cn.len() != 2 {
                let n = nb[v].len();
                let b = beta(n);
                self.pos[v] * (1.0 - n as f64 * b) + nb[v].iter().map(|&x| self.pos[x]).sum::<Vec3>() * b
            } else {
                self.pos[v] * 0.75 + (self.pos[cn[0]] + self.pos[cn[1]]) * 0.125
            };
            pos.push(p);
            valid.push(ok);
        }
        let mut mid = HashMap::new();
        let mut crease = HashSet::new();
        for (&(a, b), fs) in &ef {
            let id = pos.len();
            mid.insert((a, b), id);
            if self.crease.contains(&(a, b)) {
                pos.push((self.pos[a] + self.pos[b]) * 0.5);
                valid.push(self.valid[a] && self.valid[b]);
                crease.insert(key(a, id));
                crease.insert(key(b, id));
                continue;
            }
            let opp: Vec<usize> = fs
                .iter()
                .map(|&f| self.faces[f].into_iter().find(|&x| x != a && x != b).unwrap())
                .collect();
            let p = (self.pos[a] + self.pos[b]) * 0.375 + opp.iter().map(|&x| self.pos[x]).sum::<Vec3>() * 0.125;
            pos.push(p);
            valid.push(fs.len() == 2 && self.valid[a] && self.valid[b] && opp.iter().all(|&x| self.valid[x]));
        }
        let mut faces = Vec::with_capacity(4 * self.faces.len());
        for t in &self.faces {
            let e = |i: usize, j: usize| mid[&key(t[i], t[j])];
            let (e01, e12, e20) = (e(0, 1), e(1, 2), e(2, 0));
            faces.push([t[0], e01, e20]);
            faces.push([t[1], e12, e01]);
            faces.push([t[2], e20, e12]);
            faces.push([e01, e12, e20]);
        }
        Local { pos, valid, faces, crease }
    }

    /// Keeps the faces within `rings` vertex rings of face `f` and returns
    /// the new index of `f`.
    fn crop(&self, f: usize, rings: usize) -> (Local, usize) {
        let nb = self.neighbors();
        let mut dist = vec![usize::MAX; self.pos.len()];
        let mut queue = VecDeque::new();
        for &v in &self.faces[f] {
            dist[v] = 0;
            queue.push_back(v);
        }
        while let Some(v) = queue.pop_front() {
            if dist[v] == rings {
                continue;
            }
            for &x in &nb[v] {
                if dist[x] == usize::MAX {
                    dist[x] = dist[v] + 1;
                    queue.push_back(x);
                }
            }
        }
        let mut remap = HashMap::new();
        let mut out = Local {
            pos: Vec::new(),
            valid: Vec::new(),
            faces: Vec::new(),
            crease: HashSet::new(),
        };
        let mut new_f = 0;
        for (g, t) in self.faces.iter().enumerate() {
            if t.iter().any(|&v| dist[v] > rings) {
                continue;
            }
            if g == f {
                new_f = out.faces.len();
            }
            let mapped = t.map(|v| {
                *remap.entry(v).or_insert_with(|| {
                    out.pos.push(self.pos[v]);
                    out.valid.push(self.valid[v]);
                    out.pos.len() - 1
                })
            });
            out.faces.push(mapped);
        }
        for &(a, b) in &self.crease {
            if let (Some(&x), Some(&y)) = (remap.get(&a), remap.get(&b)) {
                out.crease.insert(key(x, y));
            }
        }
        (out, new_f)
    }

    fn limit(&self, v: usize) -> Option<Vec3> {
        let nb = self.neighbors();
        let ef = edge_faces(&self.faces);
        if !self.valid[v] || !self.complete(v, &nb, &ef) || nb[v].iter().any(|&x| !self.valid[x]) {
            return None;
        }
        let cn = self.crease_neighbors(v, &nb);
        if cn.len() == 2 {
            return Some(self.pos[v] * (2.0 / 3.0) + (self.pos[cn[0]] + self.pos[cn[1]]) / 6.0);
        }
        let n = nb[v].len();
        let chi = 1.0 / (n as f64 + 3.0 / (8.0 * beta(n)));
        Some(self.pos[v] * (1.0 - n as f64 * chi) + nb[v].iter().map(|&x| self.pos[x]).sum::<Vec3>() * chi)
    }
}

/// Limit point by repeated Loop refinement around the sample, cropped to a
/// few rings per level, followed by linear interpolation of the corner limit
/// positions of the final tiny face. `None` when the crop was too tight.
pub fn recursive_limit_point(mesh: &TriMesh, face: usize, bary: [f64; 3], depth: usize) -> Option<Vec3> {
    const RINGS: usize = 4;
    let ef = edge_faces(mesh.faces());
    let full = Local {
        pos: mesh.vertices().to_vec(),
        valid: vec![true; mesh.num_vertices()],
        faces: mesh.faces().to_vec(),
        crease: ef.iter().filter(|(_, fs)| fs.len() == 1).map(|(&k, _)| k).collect(),
    };
    let (mut local, mut f) = full.crop(face, RINGS);
    let mut b = bary;
    for _ in 0..depth {
        let fine = local.subdivide();
        let (child, nb) = if b[0] >= 0.5 {
            (0, [2.0 * b[0] - 1.0, 2.0 * b[1], 2.0 * b[2]])
        } else if b[1] >= 0.5 {
            (1, [2.0 * b[1] - 1.0, 2.0 * b[2], 2.0 * b[0]])
        } else if b[2] >= 0.5 {
            (2, [2.0 * b[2] - 1.0, 2.0 * b[0], 2.0 * b[1]])
        } else {
            (3, [1.0 - 2.0 * b[2], 1.0 - 2.0 * b[0], 1.0 - 2.0 * b[1]])
        };
        b = nb;
        (local, f) = fine.crop(4 * f + child, RINGS);
    }
    let t = local.faces[f];
    let mut p = Vec3::zeros();
    for k in 0..3 {
        p += local.limit(t[k])? * b[k];
    }
    Some(p)
}

/// The twelve quartic box-spline basis functions of a regular patch.
/// Control points are numbered row by row:
///
/// ```text
///     1   2
///   3   4   5
/// 6   7   8   9
///   10  11  12
/// ```
///
/// and the patch is the triangle `(4, 7, 8)` with `u = 1 - v - w`.
pub fn box_spline_basis(v: f64, w: f64) -> [f64; 12] {
    let u = 1.0 - v - w;
    let (u2, u3, u4) = (u * u, u * u * u, u * u * u * u);
    let (v2, v3, v4) = (v * v, v * v * v, v * v * v * v);
    let (w2, w3, w4) = (w * w, w * w * w, w * w * w * w);
    [
        u4 + 2.0 * u3 * v,
        u4 + 2.0 * u3 * w,
        u4 + 2.0 * u3 * w + 6.0 * u3 * v + 6.0 * u2 * v * w + 12.0 * u2 * v2 + 6.0 * u * v2 * w + 6.0 * u * v3 + 2.0 * v3 * w + v4,
        6.0 * u4
            + 24.0 * u3 * w
            + 24.0 * u2 * w2
            + 8.0 * u * w3
            + w4
            + 24.0 * u3 * v
            + 60.0 * u2 * v * w
            + 36.0 * u * v * w2
            + 6.0 * v * w3
            + 24.0 * u2 * v2
            + 36.0 * u * v2 * w
            + 12.0 * v2 * w2
            + 8.0 * u * v3
            + 6.0 * v3 * w
            + v4,
        u4 + 6.0 * u3 * w + 12.0 * u2 * w2 + 6.0 * u * w3 + w4 + 2.0 * u3 * v + 6.0 * u2 * v * w + 6.0 * u * v * w2 + 2.0 * v * w3,
        2.0 * u * v3 + v4,
        u4 + 6.0 * u3 * w
            + 12.0 * u2 * w2
            + 6.0 * u * w3
            + w4
            + 8.0 * u3 * v
            + 36.0 * u2 * v * w
            + 36.0 * u * v * w2
            + 8.0 * v * w3
            + 24.0 * u2 * v2
            + 60.0 * u * v2 * w
            + 24.0 * v2 * w2
            + 24.0 * u * v3
            + 24.0 * v3 * w
            + 6.0 * v4,
        u4 + 8.0 * u3 * w
            + 24.0 * u2 * w2
            + 24.0 * u * w3
            + 6.0 * w4
            + 6.0 * u3 * v
            + 36.0 * u2 * v * w
            + 60.0 * u * v * w2
            + 24.0 * v * w3
            + 12.0 * u2 * v2
            + 36.0 * u * v2 * w
            + 24.0 * v2 * w2
            + 6.0 * u * v3
            + 8.0 * v3 * w
            + v4,
        2.0 * u * w3 + w4,
        2.0 * v3 * w + v4,
        2.0 * u * w3 + w4 + 6.0 * u * v * w2 + 6.0 * v * w3 + 6.0 * u * v2 * w + 12.0 * v2 * w2 + 2.0 * u * v3 + 6.0 * v3 * w + v4,
        w4 + 2.0 * v * w3,
    ]
    .map(|x| x / 12.0)
}

/// Lattice offsets of the twelve box-spline control points relative to
/// point 4, in units of the patch edges `e1 = 7 - 4` and `e2 = 8 - 4`.
pub const BOX_SPLINE_OFFSETS: [(i64, i64); 12] = [
    (0, -1),
    (-1, 0),
    (1, -1),
    (0, 0),
    (-1, 1),
    (2, -1),
    (1, 0),
    (0, 1),
    (-1, 2),
    (2, 0),
    (1, 1),
    (0, 2),
];

/// Central differences of `f` along every coordinate of every point.
pub fn finite_difference_gradient(x: &[Vec3], step: f64, f: impl Fn(&[Vec3]) -> f64) -> Vec<Vec3> {
    let mut g = vec![Vec3::zeros(); x.len()];
    let mut y = x.to_vec();
    for i in 0..x.len() {
        for c in 0..3 {
            y[i][c] = x[i][c] + step;
            let a = f(&y);
            y[i][c] = x[i][c] - step;
            let b = f(&y);
            y[i][c] = x[i][c];
            g[i][c] = (a - b) / (2.0 * step);
        }
    }
    g
}

/// `|a - b| / |b|` over stacked coordinates.
pub fn relative_error(a: &[Vec3], b: &[Vec3]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_squared()).sum();
    let den: f64 = b.iter().map(|y| y.norm_squared()).sum();
    (num / den).sqrt()
}

/// Icosphere of the given sphere whose vertices are displaced by up to
/// `jitter` times the radius in uniformly random directions.
pub fn perturbed_icosphere(level: usize, center: Vec3, radius: f64, jitter: f64, seed: u64) -> TriMesh {
    use rand::SeedableRng;
    let ico = primitives::icosphere(level);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let pts = ico
        .vertices()
        .iter()
        .map(|p| {
            let d = loop {
                let d = Vec3::from_fn(|_, _| rng.random_range(-1.0..1.0));
                if d.norm() <= 1.0 {
                    break d;
                }
            };
            center + p * radius + d * (jitter * radius)
        })
        .collect();
    ico.with_positions(pts).unwrap()
}

/// Unit-box sphere setup: the cloud and a perturbed icosphere control mesh.
pub fn sphere_problem(points: usize, level: usize, jitter: f64, seed: u64) -> (subfit::PointCloud, TriMesh) {
    let center = Vec3::repeat(0.5);
    let cloud = primitives::sphere_cloud(points, center, 0.5, seed);
    (cloud, perturbed_icosphere(level, center, 0.5, jitter, seed.wrapping_add(1)))
}

/// Sampled two-sided Hausdorff distance between `mesh` and the sphere
/// `(center, radius)`, relative to the bounding box diagonal of the sphere.
pub fn sphere_hausdorff(mesh: &TriMesh, center: Vec3, radius: f64, samples: usize, seed: u64) -> f64 {
    let to_sphere = subfit::optimizer::sample_mesh_to_cloud(mesh, samples, seed)
        .points()
        .iter()
        .chain(mesh.vertices())
        .map(|p| ((p - center).norm() - radius).abs())
        .fold(0.0, f64::max);
    let tree = subfit::optimizer::TriangleTree::new(mesh);
    let to_mesh = primitives::sphere_cloud(samples, center, radius, seed.wrapping_add(7))
        .points()
        .iter()
        .map(|p| tree.distance(p))
        .fold(0.0, f64::max);
    to_sphere.max(to_mesh) / (2.0 * radius * 3f64.sqrt())
}
