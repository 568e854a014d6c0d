//! Evaluation of faces touching the mesh boundary.
//!
//! Closed-form evaluation does not cover boundary patches, so these are
//! refined locally: a few rings around the face are subdivided with the
//! boundary masks, the neighbourhood is cropped around the sample after every
//! step, and after [`BOUNDARY_DEPTH`] steps the sample is interpolated from the
//! limit positions of the tiny face that contains it. Vertices whose masks
//! would reach past the cropped region are tracked as invalid and never used.

use std::collections::{HashMap, HashSet, VecDeque};

use nalgebra::Vector2;

use crate::mesh::{TriMesh, Vec3, NO_FACE};

use super::basis::LocalFrame;
use super::step::loop_beta;

pub const BOUNDARY_DEPTH: usize = 10;
const CROP_RINGS: usize = 3;

type Row = Vec<(usize, f64)>;

struct Local {
    mesh: TriMesh,
    weights: Vec<Row>,
    valid: Vec<bool>,
    true_boundary: HashSet<(usize, usize)>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn mix(rows: &[(&Row, f64)]) -> Row {
    let mut acc: HashMap<usize, f64> = HashMap::new();
    for (row, s) in rows {
        for &(c, w) in row.iter() {
            *acc.entry(c).or_insert(0.0) += s * w;
        }
    }
    let mut out: Row = acc.into_iter().collect();
    out.sort_unstable_by_key(|&(c, _)| c);
    out
}

impl Local {
    /// Vertex is interior here or sits on the real boundary with both
    /// boundary edges present.
    fn complete(&self, v: usize) -> bool {
        let ring = self.mesh.one_ring(v);
        if ring.is_empty() {
            return false;
        }
        if !self.mesh.is_boundary_vertex(v) {
            return true;
        }
        self.true_boundary.contains(&key(v, ring[0]))
            && self.true_boundary.contains(&key(v, ring[ring.len() - 1]))
    }

    fn refine(&self) -> Local {
        let m = &self.mesh;
        let nv = m.num_vertices();
        let mut weights = Vec::with_capacity(nv + m.num_edges());
        let mut valid = Vec::with_capacity(nv + m.num_edges());
        for v in 0..nv {
            let ring = m.one_ring(v);
            let complete = self.complete(v);
            if complete && m.is_boundary_vertex(v) {
                let (a, b) = (ring[0], ring[ring.len() - 1]);
                weights.push(mix(&[(&self.weights[v], 0.75), (&self.weights[a], 0.125), (&self.weights[b], 0.125)]));
                valid.push(self.valid[v] && self.valid[a] && self.valid[b]);
            } else if complete {
                let n = ring.len();
                let beta = loop_beta(n);
                let mut parts = vec![(&self.weights[v], 1.0 - n as f64 * beta)];
                parts.extend(ring.iter().map(|&r| (&self.weights[r], beta)));
                weights.push(mix(&parts));
                valid.push(self.valid[v] && ring.iter().all(|&r| self.valid[r]));
            } else {
                weights.push(self.weights[v].clone());
                valid.push(false);
            }
        }
        let mut true_boundary = HashSet::new();
        for (e, &[a, b]) in m.edges().iter().enumerate() {
            let [f0, f1] = m.edge_faces(e);
            if f1 != NO_FACE {
                let c = m.opposite_vertex(f0, a, b);
                let d = m.opposite_vertex(f1, a, b);
                weights.push(mix(&[
                    (&self.weights[a], 0.375),
                    (&self.weights[b], 0.375),
                    (&self.weights[c], 0.125),
                    (&self.weights[d], 0.125),
                ]));
                valid.push([a, b, c, d].iter().all(|&x| self.valid[x]));
            } else {
                let real = self.true_boundary.contains(&key(a, b));
                weights.push(mix(&[(&self.weights[a], 0.5), (&self.weights[b], 0.5)]));
                valid.push(real && self.valid[a] && self.valid[b]);
                if real {
                    true_boundary.insert(key(a, nv + e));
                    true_boundary.insert(key(nv + e, b));
                }
            }
        }
        let mut faces = Vec::with_capacity(m.num_faces() * 4);
        for (f, &[p0, p1, p2]) in m.faces().iter().enumerate() {
            let [e01, e12, e20] = m.face_edges(f).map(|e| nv + e);
            faces.push([p0, e01, e20]);
            faces.push([p1, e12, e01]);
            faces.push([p2, e20, e12]);
            faces.push([e01, e12, e20]);
        }
        let mesh = TriMesh::new_unchecked(vec![Vec3::zeros(); weights.len()], faces)
            .expect("refined local mesh indices are valid");
        Local {
            mesh,
            weights,
            valid,
            true_boundary,
        }
    }

    /// Keeps the faces within `CROP_RINGS` rings of `face`; returns the new
    /// index of `face`.
    fn crop(&self, face: usize) -> (Local, usize) {
        let m = &self.mesh;
        let keep_v = rings_around(m, face, CROP_RINGS);
        let mut remap: HashMap<usize, usize> = HashMap::new();
        let mut faces = Vec::new();
        let mut new_face = usize::MAX;
        for (f, tri) in m.faces().iter().enumerate() {
            if tri.iter().all(|v| keep_v.contains(v)) {
                if f == face {
                    new_face = faces.len();
                }
                let mapped = tri.map(|v| {
                    let next = remap.len();
                    *remap.entry(v).or_insert(next)
                });
                faces.push(mapped);
            }
        }
        let mut order: Vec<(usize, usize)> = remap.iter().map(|(&old, &new)| (new, old)).collect();
        order.sort_unstable();
        let weights = order.iter().map(|&(_, old)| self.weights[old].clone()).collect();
        let valid = order.iter().map(|&(_, old)| self.valid[old]).collect();
        let true_boundary = self
            .true_boundary
            .iter()
            .filter_map(|&(a, b)| Some(key(*remap.get(&a)?, *remap.get(&b)?)))
            .collect();
        let mesh = TriMesh::new_unchecked(vec![Vec3::zeros(); order.len()], faces)
            .expect("cropped mesh indices are valid");
        (
            Local {
                mesh,
                weights,
                valid,
                true_boundary,
            },
            new_face,
        )
    }

    fn limit_row(&self, v: usize) -> Row {
        let ring = self.mesh.one_ring(v);
        if !self.complete(v) {
            log::debug!("boundary evaluation fell back to a control point");
            return self.weights[v].clone();
        }
        if self.mesh.is_boundary_vertex(v) {
            let (a, b) = (ring[0], ring[ring.len() - 1]);
            return mix(&[(&self.weights[v], 2.0 / 3.0), (&self.weights[a], 1.0 / 6.0), (&self.weights[b], 1.0 / 6.0)]);
        }
        let n = ring.len();
        let chi = 1.0 / (n as f64 + 3.0 / (8.0 * loop_beta(n)));
        let mut parts = vec![(&self.weights[v], 1.0 - n as f64 * chi)];
        parts.extend(ring.iter().map(|&r| (&self.weights[r], chi)));
        mix(&parts)
    }
}

/// Vertices within `k` edge hops of the corners of `face`.
pub(crate) fn rings_around(m: &TriMesh, face: usize, k: usize) -> HashSet<usize> {
    let mut dist: HashMap<usize, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    for &v in &m.faces()[face] {
        dist.insert(v, 0);
        queue.push_back(v);
    }
    while let Some(v) = queue.pop_front() {
        let d = dist[&v];
        if d == k {
            continue;
        }
        for &r in m.one_ring(v) {
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(r) {
                e.insert(d + 1);
                queue.push_back(r);
            }
        }
    }
    dist.into_keys().collect()
}

/// Child of a face and the sample's barycentrics in it; ties go to the
/// lower child index (corners 0, 1, 2, then the centre 3).
pub(crate) fn descend(b: [f64; 3]) -> (usize, [f64; 3]) {
    let (k, c) = if b[0] >= 0.5 {
        (0, [2.0 * b[0] - 1.0, 2.0 * b[1], 2.0 * b[2]])
    } else if b[1] >= 0.5 {
        (1, [2.0 * b[1] - 1.0, 2.0 * b[2], 2.0 * b[0]])
    } else if b[2] >= 0.5 {
        (2, [2.0 * b[2] - 1.0, 2.0 * b[0], 2.0 * b[1]])
    } else {
        (3, [1.0 - 2.0 * b[2], 1.0 - 2.0 * b[0], 1.0 - 2.0 * b[1]])
    };
    let c = c.map(|x| x.max(0.0));
    let s: f64 = c.iter().sum();
    (k, c.map(|x| x / s))
}

/// Corner positions of child `k` given the parent's corner positions.
fn child_corners<T>(k: usize, d: [T; 3]) -> [T; 3]
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let mid = |a: T, b: T| (a + b) * 0.5;
    let (m01, m12, m20) = (mid(d[0], d[1]), mid(d[1], d[2]), mid(d[2], d[0]));
    match k {
        0 => [d[0], m01, m20],
        1 => [d[1], m12, m01],
        2 => [d[2], m20, m12],
        _ => [m01, m12, m20],
    }
}

/// Weights over the vertices of `mesh` of the limit point at barycentric
/// coordinates `bary` of `face`, plus the weights' derivatives with
/// respect to `(bary[1], bary[2])`.
pub fn eval_boundary_face(mesh: &TriMesh, face: usize, bary: [f64; 3]) -> (Row, Row, Row) {
    let keep = rings_around(mesh, face, CROP_RINGS);
    let mut remap: HashMap<usize, usize> = HashMap::new();
    let mut faces = Vec::new();
    let mut local_face = 0;
    for (f, tri) in mesh.faces().iter().enumerate() {
        if tri.iter().all(|v| keep.contains(v)) {
            if f == face {
                local_face = faces.len();
            }
            faces.push(tri.map(|v| {
                let next = remap.len();
                *remap.entry(v).or_insert(next)
            }));
        }
    }
    let mut back = vec![0; remap.len()];
    for (&g, &l) in &remap {
        back[l] = g;
    }
    let mut true_boundary = HashSet::new();
    for (e, &[a, b]) in mesh.edges().iter().enumerate() {
        if mesh.is_boundary_edge(e) {
            if let (Some(&la), Some(&lb)) = (remap.get(&a), remap.get(&b)) {
                true_boundary.insert(key(la, lb));
            }
        }
    }
    let mut local = Local {
        mesh: TriMesh::new_unchecked(vec![Vec3::zeros(); back.len()], faces).expect("valid indices"),
        weights: back.iter().map(|&g| vec![(g, 1.0)]).collect(),
        valid: vec![true; back.len()],
        true_boundary,
    };

    let mut f = local_face;
    let mut b = bary;
    let mut dom = [Vector2::new(0.0, 0.0), Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0)];
    for _ in 0..BOUNDARY_DEPTH {
        let refined = local.refine();
        let (k, nb) = descend(b);
        dom = child_corners(k, dom);
        b = nb;
        let (cropped, nf) = refined.crop(4 * f + k);
        local = cropped;
        f = nf;
    }
    let corners = local.mesh.faces()[f];
    let rows: Vec<Row> = corners.iter().map(|&v| local.limit_row(v)).collect();
    let pos = mix(&[(&rows[0], b[0]), (&rows[1], b[1]), (&rows[2], b[2])]);
    let j = LocalFrame::new(dom).jacobian();
    // d(beta1, beta2)/d(v, w) from the frame, beta0 = 1 - beta1 - beta2
    let dbeta = |col: usize| [-(j[(0, col)] + j[(1, col)]), j[(0, col)], j[(1, col)]];
    let (dv, dw) = (dbeta(0), dbeta(1));
    let dpos_v = mix(&[(&rows[0], dv[0]), (&rows[1], dv[1]), (&rows[2], dv[2])]);
    let dpos_w = mix(&[(&rows[0], dw[0]), (&rows[1], dw[1]), (&rows[2], dw[2])]);
    (pos, dpos_v, dpos_w)
}
