//! Quadric error metric edge-collapse simplification.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{Matrix3, Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::mesh::{TriMesh, Vec3};
use crate::subdiv::MAX_VALENCE;

/// Plane quadric accumulated per vertex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadric(pub Matrix4<f64>);

impl Quadric {
    pub fn zero() -> Self {
        Quadric(Matrix4::zeros())
    }

    /// Quadric of the plane `n . x + d = 0` scaled by `weight`.
    pub fn plane(n: &Vec3, d: f64, weight: f64) -> Self {
        let p = Vector4::new(n.x, n.y, n.z, d);
        Quadric(p * p.transpose() * weight)
    }

    pub fn error(&self, x: &Vec3) -> f64 {
        let p = Vector4::new(x.x, x.y, x.z, 1.0);
        (p.transpose() * self.0 * p)[0]
    }

    /// Minimizer of the error, or `None` when the linear part is singular
    /// relative to its own magnitude.
    pub fn minimizer(&self) -> Option<Vec3> {
        let a: Matrix3<f64> = self.0.fixed_view::<3, 3>(0, 0).into_owned();
        let b = Vec3::new(self.0[(0, 3)], self.0[(1, 3)], self.0[(2, 3)]);
        let scale = a.trace() / 3.0;
        if !(a.determinant().abs() >= 1e-12 * scale * scale * scale) || scale <= 0.0 {
            return None;
        }
        a.try_inverse().map(|inv| -(inv * b))
    }
}

impl std::ops::Add for Quadric {
    type Output = Quadric;
    fn add(self, o: Quadric) -> Quadric {
        Quadric(self.0 + o.0)
    }
}

#[derive(Debug)]
struct Candidate {
    cost: f64,
    a: usize,
    b: usize,
    stamp: (u32, u32),
    target: Vec3,
}

impl PartialEq for Candidate {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Candidate {
    // reversed so that BinaryHeap pops the cheapest, then lowest indices
    fn cmp(&self, o: &Self) -> Ordering {
        o.cost
            .total_cmp(&self.cost)
            .then_with(|| o.a.cmp(&self.a))
            .then_with(|| o.b.cmp(&self.b))
    }
}

struct State {
    pos: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    face_alive: Vec<bool>,
    vert_faces: Vec<Vec<usize>>,
    alive: Vec<bool>,
    boundary: Vec<bool>,
    version: Vec<u32>,
    quadrics: Vec<Quadric>,
    preserve_boundary: bool,
}

impl State {
    fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut n: Vec<usize> = self.vert_faces[v]
            .iter()
            .flat_map(|&f| self.faces[f])
            .filter(|&x| x != v)
            .collect();
        n.sort_unstable();
        n.dedup();
        n
    }

    fn shared_faces(&self, a: usize, b: usize) -> Vec<usize> {
        self.vert_faces[a]
            .iter()
            .copied()
            .filter(|&f| self.faces[f].contains(&b))
            .collect()
    }

    fn candidate(&self, a: usize, b: usize) -> Candidate {
        let (a, b) = (a.min(b), a.max(b));
        let q = self.quadrics[a] + self.quadrics[b];
        let target = q.minimizer().unwrap_or_else(|| (self.pos[a] + self.pos[b]) * 0.5);
        Candidate {
            cost: q.error(&target).max(0.0),
            a,
            b,
            stamp: (self.version[a], self.version[b]),
            target,
        }
    }

    fn legal(&self, c: &Candidate) -> bool {
        let (a, b) = (c.a, c.b);
        let shared = self.shared_faces(a, b);
        if shared.is_empty() {
            return false;
        }
        let boundary_edge = shared.len() == 1;
        if self.preserve_boundary && (self.boundary[a] || self.boundary[b]) {
            return false;
        }
        if !boundary_edge && self.boundary[a] && self.boundary[b] {
            return false;
        }
        // link condition: the common neighbors are exactly the apexes of the shared faces
        let na = self.neighbors(a);
        let nb = self.neighbors(b);
        let common = na.iter().filter(|x| nb.binary_search(x).is_ok()).count();
        if common != shared.len() {
            return false;
        }
        if na.len() + nb.len() - common - 2 > MAX_VALENCE {
            return false;
        }
        // collapsing a tetrahedron-like cell would leave a doubled face
        if na.len() == 3 && nb.len() == 3 && !boundary_edge && common == 2 {
            let apex: Vec<usize> = shared
                .iter()
                .map(|&f| *self.faces[f].iter().find(|&&x| x != a && x != b).unwrap())
                .collect();
            if self.shared_faces(apex[0], apex[1]).len() == 2 {
                return false;
            }
        }
        for v in [a, b] {
            for &f in &self.vert_faces[v] {
                if shared.contains(&f) {
                    continue;
                }
                let tri = self.faces[f];
                let before = triangle_normal(&self.pos[tri[0]], &self.pos[tri[1]], &self.pos[tri[2]]);
                let moved = tri.map(|x| if x == a || x == b { c.target } else { self.pos[x] });
                let after = triangle_normal(&moved[0], &moved[1], &moved[2]);
                let (lb, la) = (before.norm(), after.norm());
                if la <= 1e-14 * lb || before.dot(&after) <= 0.0 {
                    return false;
                }
            }
        }
        true
    }

    fn collapse(&mut self, c: &Candidate) {
        let (a, b) = (c.a, c.b);
        for f in self.shared_faces(a, b) {
            self.face_alive[f] = false;
            for x in self.faces[f] {
                self.vert_faces[x].retain(|&g| g != f);
            }
        }
        let moved = std::mem::take(&mut self.vert_faces[b]);
        for &f in &moved {
            for x in self.faces[f].iter_mut() {
                if *x == b {
                    *x = a;
                }
            }
        }
        self.vert_faces[a].extend(moved);
        self.vert_faces[a].sort_unstable();
        self.alive[b] = false;
        self.boundary[a] |= self.boundary[b];
        self.pos[a] = c.target;
        self.quadrics[a] = self.quadrics[a] + self.quadrics[b];
        self.version[a] += 1;
        self.version[b] += 1;
    }
}

fn triangle_normal(a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    (b - a).cross(&(c - a))
}

/// Collapses edges until `target_vertices` remain. On failure the partially
/// simplified mesh is returned alongside the error.
pub fn decimate_qem_partial(mesh: &TriMesh, target_vertices: usize, preserve_boundary: bool) -> (TriMesh, Result<()>) {
    if !mesh.is_manifold() {
        return (mesh.clone(), Err(Error::NonManifold(mesh.report().summary())));
    }
    let n = mesh.num_vertices();
    let mut st = State {
        pos: mesh.vertices().to_vec(),
        faces: mesh.faces().to_vec(),
        face_alive: vec![true; mesh.num_faces()],
        vert_faces: (0..n).map(|v| mesh.ring_faces(v).to_vec()).collect(),
        alive: vec![true; n],
        boundary: (0..n).map(|v| mesh.is_boundary_vertex(v)).collect(),
        version: vec![0; n],
        quadrics: vec![Quadric::zero(); n],
        preserve_boundary,
    };
    for (f, tri) in mesh.faces().iter().enumerate() {
        let nrm = mesh.face_normal(f);
        let q = Quadric::plane(&nrm, -nrm.dot(&st.pos[tri[0]]), 1.0);
        for &v in tri {
            st.quadrics[v] = st.quadrics[v] + q;
        }
    }
    if !preserve_boundary {
        // perpendicular planes along boundary edges keep the border in place
        for (e, &[a, b]) in mesh.edges().iter().enumerate() {
            if mesh.is_boundary_edge(e) {
                let f = mesh.edge_faces(e)[0];
                let side = (st.pos[b] - st.pos[a]).cross(&mesh.face_normal(f));
                if side.norm() > 0.0 {
                    let s = side.normalize();
                    let q = Quadric::plane(&s, -s.dot(&st.pos[a]), 1.0);
                    st.quadrics[a] = st.quadrics[a] + q;
                    st.quadrics[b] = st.quadrics[b] + q;
                }
            }
        }
    }
    let mut heap: BinaryHeap<Candidate> = mesh.edges().iter().map(|&[a, b]| st.candidate(a, b)).collect();
    let mut count = n;
    while count > target_vertices {
        let Some(c) = heap.pop() else { break };
        if !st.alive[c.a] || !st.alive[c.b] || c.stamp != (st.version[c.a], st.version[c.b]) {
            continue;
        }
        if !st.legal(&c) {
            continue;
        }
        st.collapse(&c);
        count -= 1;
        for nb in st.neighbors(c.a) {
            heap.push(st.candidate(c.a, nb));
        }
    }
    let out = compact(&st);
    if count > target_vertices {
        return (
            out,
            Err(Error::TargetUnreachable {
                target: target_vertices,
                reached: count,
            }),
        );
    }
    (out, Ok(()))
}

pub fn decimate_qem(mesh: &TriMesh, target_vertices: usize, preserve_boundary: bool) -> Result<TriMesh> {
    let (out, res) = decimate_qem_partial(mesh, target_vertices, preserve_boundary);
    res.map(|_| out)
}

fn compact(st: &State) -> TriMesh {
    let mut remap = vec![usize::MAX; st.pos.len()];
    let mut vertices = Vec::new();
    for (v, &alive) in st.alive.iter().enumerate() {
        if alive {
            remap[v] = vertices.len();
            vertices.push(st.pos[v]);
        }
    }
    let faces = st
        .faces
        .iter()
        .zip(&st.face_alive)
        .filter(|(_, &alive)| alive)
        .map(|(f, _)| f.map(|v| remap[v]))
        .collect();
    TriMesh::new(vertices, faces).expect("edge collapse preserves manifoldness")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives;

    #[test]
    fn quadric_of_own_planes_is_zero() {
        let m = primitives::icosphere(1);
        let mut q = Quadric::zero();
        let v = 7;
        for &f in m.ring_faces(v) {
            let n = m.face_normal(f);
            q = q + Quadric::plane(&n, -n.dot(&m.vertices()[v]), 1.0);
        }
        assert!(q.error(&m.vertices()[v]).abs() < 1e-10);
        assert!((q.0 - q.0.transpose()).norm() == 0.0);
        assert!(q.0.symmetric_eigenvalues().iter().all(|&l| l > -1e-12));
    }

    #[test]
    fn icosphere_to_162() {
        let m = primitives::icosphere(3);
        assert_eq!(m.num_vertices(), 642);
        let d = decimate_qem(&m, 162, false).unwrap();
        assert_eq!(d.num_vertices(), 162);
        assert!(d.is_manifold());
        assert_eq!(d.euler_characteristic(), 2);
        assert_eq!(d.genus(), 0);
    }

    #[test]
    fn unchanged_at_current_count() {
        let m = primitives::icosphere(1);
        let d = decimate_qem(&m, m.num_vertices(), false).unwrap();
        assert_eq!(d.vertices(), m.vertices());
        assert_eq!(d.faces(), m.faces());
    }

    #[test]
    fn tetrahedron_cannot_shrink() {
        let t = primitives::tetrahedron();
        let (out, res) = decimate_qem_partial(&t, 3, false);
        assert!(matches!(res, Err(Error::TargetUnreachable { target: 3, reached: 4 })));
        assert_eq!(out.num_vertices(), 4);
    }

    #[test]
    fn torus_keeps_genus() {
        let t = primitives::torus(24, 12, 2.0, 0.6);
        let d = decimate_qem(&t, 60, false).unwrap();
        assert_eq!(d.num_vertices(), 60);
        assert_eq!(d.genus(), 1);
    }
}
