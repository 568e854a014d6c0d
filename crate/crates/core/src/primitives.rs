//! Closed test shapes and synthetic clouds.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::{PointCloud, TriMesh, Vec3};

pub fn tetrahedron() -> TriMesh {
    let v = vec![
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, 0.0, 1.0),
    ];
    let f = vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]];
    TriMesh::new(v, f).expect("tetrahedron is manifold")
}

/// Regular icosahedron inscribed in the unit sphere.
pub fn icosahedron() -> TriMesh {
    let (v, f) = icosahedron_raw();
    TriMesh::new(v, f).expect("icosahedron is manifold")
}

fn icosahedron_raw() -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let v: Vec<Vec3> = [
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
    .map(|c| Vec3::new(c[0], c[1], c[2]).normalize())
    .collect();
    let f = vec![
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
    (v, f)
}

/// Unit icosphere from `level` rounds of midpoint refinement:
/// 12, 42, 162, 642, 2562, ... vertices.
pub fn icosphere(level: usize) -> TriMesh {
    let (mut v, mut f) = icosahedron_raw();
    for _ in 0..level {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut nf = Vec::with_capacity(f.len() * 4);
        let mut midpoint = |a: usize, b: usize, v: &mut Vec<Vec3>| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                v.push(((v[a] + v[b]) * 0.5).normalize());
                v.len() - 1
            })
        };
        for &[a, b, c] in &f {
            let ab = midpoint(a, b, &mut v);
            let bc = midpoint(b, c, &mut v);
            let ca = midpoint(c, a, &mut v);
            nf.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        f = nf;
    }
    TriMesh::new(v, f).expect("icosphere is manifold")
}

/// Unit geodesic sphere with each icosahedron face split into `freq^2`
/// triangles: `10 freq^2 + 2` vertices.
pub fn geodesic_sphere(freq: usize) -> TriMesh {
    assert!(freq >= 1);
    let (base, base_faces) = icosahedron_raw();
    let mut index: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
    let mut verts = Vec::new();
    let mut faces = Vec::with_capacity(base_faces.len() * freq * freq);
    let mut vid = |corners: [usize; 3], i: usize, j: usize, verts: &mut Vec<Vec3>| -> usize {
        let k = freq - i - j;
        let mut key: Vec<(usize, usize)> = [(corners[0], k), (corners[1], i), (corners[2], j)]
            .into_iter()
            .filter(|&(_, w)| w > 0)
            .collect();
        key.sort_unstable();
        *index.entry(key).or_insert_with(|| {
            let p = (base[corners[0]] * k as f64 + base[corners[1]] * i as f64 + base[corners[2]] * j as f64)
                / freq as f64;
            verts.push(p.normalize());
            verts.len() - 1
        })
    };
    for &c in &base_faces {
        for j in 0..freq {
            for i in 0..freq - j {
                let a = vid(c, i, j, &mut verts);
                let b = vid(c, i + 1, j, &mut verts);
                let d = vid(c, i, j + 1, &mut verts);
                faces.push([a, b, d]);
                if i + j + 1 < freq {
                    let e = vid(c, i + 1, j + 1, &mut verts);
                    faces.push([b, e, d]);
                }
            }
        }
    }
    TriMesh::new(verts, faces).expect("geodesic sphere is manifold")
}

/// Torus with an `m x n` vertex grid where every vertex has valence 6.
pub fn torus(m: usize, n: usize, major: f64, minor: f64) -> TriMesh {
    assert!(m >= 3 && n >= 3);
    let id = |i: usize, j: usize| (i % m) * n + (j % n);
    let mut v = Vec::with_capacity(m * n);
    for i in 0..m {
        let u = 2.0 * PI * i as f64 / m as f64;
        for j in 0..n {
            let w = 2.0 * PI * j as f64 / n as f64;
            let r = major + minor * w.cos();
            v.push(Vec3::new(r * u.cos(), r * u.sin(), minor * w.sin()));
        }
    }
    let mut f = Vec::with_capacity(2 * m * n);
    for i in 0..m {
        for j in 0..n {
            f.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            f.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriMesh::new(v, f).expect("torus is manifold")
}

/// `n` uniform samples on a sphere with outward normals.
pub fn sphere_cloud(n: usize, center: Vec3, radius: f64, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(n);
    let mut nrm = Vec::with_capacity(n);
    for _ in 0..n {
        let z: f64 = rng.random_range(-1.0..1.0);
        let phi: f64 = rng.random_range(0.0..2.0 * PI);
        let s = (1.0 - z * z).sqrt();
        let d = Vec3::new(s * phi.cos(), s * phi.sin(), z);
        pts.push(center + d * radius);
        nrm.push(d);
    }
    PointCloud::new(pts, nrm).expect("sphere samples are valid")
}
