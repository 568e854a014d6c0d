//! Triangle meshes, oriented point clouds and their adjacency.

use std::collections::HashMap;

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Marker for "no face" in [`TriMesh::edge_faces`].
pub const NO_FACE: usize = usize::MAX;

/// Problems found while building adjacency.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<String>,
}

impl ValidationReport {
    pub fn is_manifold(&self) -> bool {
        self.issues.is_empty()
    }

    fn push(&mut self, issue: String) {
        // keep the report readable on badly broken inputs
        if self.issues.len() < 64 {
            self.issues.push(issue);
        }
    }

    pub fn summary(&self) -> String {
        match self.issues.len() {
            0 => "ok".to_string(),
            1 => self.issues[0].clone(),
            n => format!("{} (+{} more)", self.issues[0], n - 1),
        }
    }
}

#[derive(Clone, Debug, Default)]
struct Topology {
    edges: Vec<[usize; 2]>,
    edge_index: HashMap<(usize, usize), usize>,
    edge_faces: Vec<[usize; 2]>,
    face_edges: Vec<[usize; 3]>,
    rings: Vec<Vec<usize>>,
    ring_faces: Vec<Vec<usize>>,
    boundary: Vec<bool>,
}

/// Indexed triangle mesh with counterclockwise faces.
///
/// Adjacency is built on construction. One-rings are ordered
/// counterclockwise; for a boundary vertex the ring starts and ends on the
/// boundary and has one more entry than the vertex has faces.
#[derive(Clone, Debug)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    topo: Topology,
    report: ValidationReport,
}

impl TriMesh {
    /// Builds a mesh and rejects it unless it is an oriented 2-manifold.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let mesh = Self::new_unchecked(vertices, faces)?;
        if !mesh.report.is_manifold() {
            return Err(Error::NonManifold(mesh.report.summary()));
        }
        Ok(mesh)
    }

    /// Builds a mesh, recording manifold violations in [`TriMesh::report`]
    /// instead of failing. Index errors are still fatal.
    pub fn new_unchecked(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let n = vertices.len();
        for (fi, f) in faces.iter().enumerate() {
            if f.iter().any(|&v| v >= n) {
                return Err(Error::Parse(format!("face {fi} references a vertex out of range")));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::Parse(format!("face {fi} is degenerate: {f:?}")));
            }
        }
        if vertices.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::Parse("non-finite vertex coordinate".into()));
        }
        let (topo, report) = build_topology(n, &faces);
        Ok(TriMesh {
            vertices,
            faces,
            topo,
            report,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    pub fn is_manifold(&self) -> bool {
        self.report.is_manifold()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_edges(&self) -> usize {
        self.topo.edges.len()
    }

    /// Same connectivity, new positions.
    pub fn with_positions(&self, vertices: Vec<Vec3>) -> Result<Self> {
        if vertices.len() != self.vertices.len() {
            return Err(Error::DimensionMismatch {
                expected: self.vertices.len(),
                got: vertices.len(),
            });
        }
        Ok(TriMesh {
            vertices,
            faces: self.faces.clone(),
            topo: self.topo.clone(),
            report: self.report.clone(),
        })
    }

    /// Undirected edges as `[lo, hi]` vertex pairs.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.topo.edges
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.topo.edge_index.get(&(a.min(b), a.max(b))).copied()
    }

    /// The one or two faces incident to an edge; a missing face is [`NO_FACE`].
    pub fn edge_faces(&self, e: usize) -> [usize; 2] {
        self.topo.edge_faces[e]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.topo.edge_faces[e][1] == NO_FACE
    }

    /// Edge `k` of face `f` joins corners `k` and `k + 1`.
    pub fn face_edges(&self, f: usize) -> [usize; 3] {
        self.topo.face_edges[f]
    }

    pub fn one_ring(&self, v: usize) -> &[usize] {
        &self.topo.rings[v]
    }

    /// Faces around `v`, face `i` lying between ring entries `i` and `i + 1`.
    pub fn ring_faces(&self, v: usize) -> &[usize] {
        &self.topo.ring_faces[v]
    }

    pub fn valence(&self, v: usize) -> usize {
        self.topo.rings[v].len()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.topo.boundary[v]
    }

    pub fn has_boundary(&self) -> bool {
        self.topo.edge_faces.iter().any(|ef| ef[1] == NO_FACE)
    }

    /// The corner of face `f` that is not on edge `(a, b)`.
    pub fn opposite_vertex(&self, f: usize, a: usize, b: usize) -> usize {
        let face = self.faces[f];
        face.into_iter()
            .find(|&v| v != a && v != b)
            .expect("face does not contain the edge")
    }

    pub fn face_normal(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.faces[f];
        let n = (self.vertices[b] - self.vertices[a]).cross(&(self.vertices[c] - self.vertices[a]));
        let len = n.norm();
        if len > 0.0 {
            n / len
        } else {
            n
        }
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.faces[f];
        0.5 * (self.vertices[b] - self.vertices[a])
            .cross(&(self.vertices[c] - self.vertices[a]))
            .norm()
    }

    pub fn bbox(&self) -> (Vec3, Vec3) {
        bounding_box(&self.vertices)
    }

    pub fn bbox_diagonal(&self) -> f64 {
        let (lo, hi) = self.bbox();
        (hi - lo).norm()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.topo.edges.len() as i64 + self.faces.len() as i64
    }

    /// Number of closed boundary loops.
    pub fn boundary_loops(&self) -> usize {
        let mut next: HashMap<usize, usize> = HashMap::new();
        for (e, ef) in self.topo.edge_faces.iter().enumerate() {
            if ef[1] != NO_FACE {
                continue;
            }
            let [a, b] = self.topo.edges[e];
            // orient along the face so each boundary vertex has one successor
            let f = self.faces[ef[0]];
            let k = f.iter().position(|&v| v == a).unwrap();
            if f[(k + 1) % 3] == b {
                next.insert(a, b);
            } else {
                next.insert(b, a);
            }
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut loops = 0;
        let mut starts: Vec<usize> = next.keys().copied().collect();
        starts.sort_unstable();
        for s in starts {
            if seen[s] {
                continue;
            }
            loops += 1;
            let mut v = s;
            while !seen[v] {
                seen[v] = true;
                match next.get(&v) {
                    Some(&n) => v = n,
                    None => break,
                }
            }
        }
        loops
    }

    pub fn connected_components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &[a, b] in &self.topo.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        (0..self.vertices.len())
            .filter(|&v| find(&mut parent, v) == v)
            .count()
    }

    /// Total genus from V - E + F = 2c - 2g - b.
    pub fn genus(&self) -> i64 {
        let c = self.connected_components() as i64;
        let b = self.boundary_loops() as i64;
        (2 * c - b - self.euler_characteristic()) / 2
    }

    /// Order-sensitive hash of the face list and vertex count.
    pub fn connectivity_hash(&self) -> [u8; 32] {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update((self.vertices.len() as u64).to_le_bytes());
        for f in &self.faces {
            for &v in f {
                h.update((v as u64).to_le_bytes());
            }
        }
        h.finalize().into()
    }
}

pub fn bounding_box(points: &[Vec3]) -> (Vec3, Vec3) {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (lo, hi)
}

fn build_topology(n: usize, faces: &[[usize; 3]]) -> (Topology, ValidationReport) {
    let mut report = ValidationReport::default();
    let mut topo = Topology {
        face_edges: Vec::with_capacity(faces.len()),
        ..Default::default()
    };
    let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(faces.len() * 3);

    for (fi, f) in faces.iter().enumerate() {
        let mut fe = [0; 3];
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            if let Some(prev) = directed.insert((a, b), fi) {
                report.push(format!(
                    "directed edge ({a}, {b}) used by faces {prev} and {fi} (inconsistent orientation)"
                ));
            }
            let key = (a.min(b), a.max(b));
            let e = *topo.edge_index.entry(key).or_insert_with(|| {
                topo.edges.push([key.0, key.1]);
                topo.edge_faces.push([NO_FACE, NO_FACE]);
                topo.edges.len() - 1
            });
            let ef = &mut topo.edge_faces[e];
            if ef[0] == NO_FACE {
                ef[0] = fi;
            } else if ef[1] == NO_FACE {
                ef[1] = fi;
            } else {
                report.push(format!("edge ({}, {}) has more than two faces", key.0, key.1));
            }
            fe[k] = e;
        }
        topo.face_edges.push(fe);
    }

    // Wedges (a -> b) around each vertex, one per incident face.
    let mut wedges: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); n];
    for (fi, f) in faces.iter().enumerate() {
        for k in 0..3 {
            wedges[f[k]].push((f[(k + 1) % 3], f[(k + 2) % 3], fi));
        }
    }

    topo.rings = Vec::with_capacity(n);
    topo.ring_faces = Vec::with_capacity(n);
    topo.boundary = Vec::with_capacity(n);
    for (v, ws) in wedges.iter().enumerate() {
        if ws.is_empty() {
            report.push(format!("vertex {v} is isolated"));
            topo.rings.push(Vec::new());
            topo.ring_faces.push(Vec::new());
            topo.boundary.push(true);
            continue;
        }
        let mut by_start: HashMap<usize, usize> = HashMap::with_capacity(ws.len());
        let mut ends: HashMap<usize, usize> = HashMap::with_capacity(ws.len());
        for (i, w) in ws.iter().enumerate() {
            by_start.insert(w.0, i);
            *ends.entry(w.1).or_default() += 1;
        }
        let start = ws
            .iter()
            .enumerate()
            .filter(|(_, w)| !ends.contains_key(&w.0))
            .map(|(i, _)| i)
            .min_by_key(|&i| ws[i].0)
            .unwrap_or_else(|| {
                // closed fan: start at the smallest neighbour for determinism
                (0..ws.len()).min_by_key(|&i| ws[i].0).unwrap()
            });
        let open = !ends.contains_key(&ws[start].0);
        let mut used = vec![false; ws.len()];
        let mut ring = vec![ws[start].0];
        let mut rfaces = Vec::with_capacity(ws.len());
        let mut cur = start;
        loop {
            if used[cur] {
                break;
            }
            used[cur] = true;
            rfaces.push(ws[cur].2);
            ring.push(ws[cur].1);
            match by_start.get(&ws[cur].1) {
                Some(&nx) => cur = nx,
                None => break,
            }
        }
        if !open {
            if ring.first() == ring.last() && ring.len() > 1 {
                ring.pop();
            } else {
                report.push(format!("vertex {v} has a broken fan"));
            }
        }
        if used.iter().any(|u| !u) {
            report.push(format!("vertex {v} is not manifold (multiple fans)"));
        }
        topo.rings.push(ring);
        topo.ring_faces.push(rfaces);
        topo.boundary.push(open);
    }
    (topo, report)
}

/// Points with unit normals.
#[derive(Clone, Debug, Default)]
pub struct PointCloud {
    points: Vec<Vec3>,
    normals: Vec<Vec3>,
}

impl PointCloud {
    /// Normals are rescaled to unit length; zero or non-finite data is rejected.
    pub fn new(points: Vec<Vec3>, normals: Vec<Vec3>) -> Result<Self> {
        if points.len() != normals.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: normals.len(),
            });
        }
        let mut unit = Vec::with_capacity(normals.len());
        for (i, (p, n)) in points.iter().zip(&normals).enumerate() {
            if !p.iter().chain(n.iter()).all(|c| c.is_finite()) {
                return Err(Error::Parse(format!("point {i} has a non-finite coordinate")));
            }
            let len = n.norm();
            if len < 1e-12 {
                return Err(Error::Parse(format!("point {i} has a zero-length normal")));
            }
            unit.push(n / len);
        }
        Ok(PointCloud {
            points,
            normals: unit,
        })
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bbox_diagonal(&self) -> f64 {
        let (lo, hi) = bounding_box(&self.points);
        (hi - lo).norm()
    }

    /// Rigidly translated copy.
    pub fn translated(&self, t: &Vec3) -> PointCloud {
        PointCloud {
            points: self.points.iter().map(|p| p + t).collect(),
            normals: self.normals.clone(),
        }
    }
}
