use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mesh::{TriMesh, Vec3, NO_FACE};
use crate::sparse::SparseMatrix;

/// Loop's vertex-mask weight for an interior vertex of valence `n`.
pub fn loop_beta(n: usize) -> f64 {
    let n = n as f64;
    let c = 3.0 / 8.0 + 0.25 * (2.0 * PI / n).cos();
    (5.0 / 8.0 - c * c) / n
}

/// Weights putting vertex `v` on the limit surface, as `(vertex, weight)`.
pub fn limit_stencil(mesh: &TriMesh, v: usize) -> Vec<(usize, f64)> {
    let ring = mesh.one_ring(v);
    if mesh.is_boundary_vertex(v) {
        let (first, last) = (ring[0], ring[ring.len() - 1]);
        return vec![(v, 2.0 / 3.0), (first, 1.0 / 6.0), (last, 1.0 / 6.0)];
    }
    let n = ring.len();
    let chi = 1.0 / (n as f64 + 3.0 / (8.0 * loop_beta(n)));
    let mut row = Vec::with_capacity(n + 1);
    row.push((v, 1.0 - n as f64 * chi));
    row.extend(ring.iter().map(|&r| (r, chi)));
    row
}

/// One Loop refinement `M0 -> M1` as the row-stochastic matrix `S`
/// (`|V1| x |V0|`) together with the refined mesh.
///
/// Vertices `0..V` of `M1` are the refined old vertices, vertex `V + e` is
/// the new vertex on edge `e`. Face `f = (p0, p1, p2)` becomes children
/// `4f..4f+4`: the corners at `p0`, `p1`, `p2` and the centre.
#[derive(Clone, Debug)]
pub struct SubdivisionStep {
    pub coarse_vertices: usize,
    pub coarse_faces: usize,
    pub matrix: SparseMatrix,
    pub refined: TriMesh,
}

impl SubdivisionStep {
    pub fn edge_vertex(&self, e: usize) -> usize {
        self.coarse_vertices + e
    }
}

pub fn subdivide_once(mesh: &TriMesh) -> Result<SubdivisionStep> {
    if !mesh.is_manifold() {
        return Err(Error::NonManifold(mesh.report().summary()));
    }
    let nv = mesh.num_vertices();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(nv + mesh.num_edges());
    for v in 0..nv {
        let ring = mesh.one_ring(v);
        if mesh.is_boundary_vertex(v) {
            let (first, last) = (ring[0], ring[ring.len() - 1]);
            rows.push(vec![(v, 0.75), (first, 0.125), (last, 0.125)]);
        } else {
            let n = ring.len();
            let beta = loop_beta(n);
            let mut row = vec![(v, 1.0 - n as f64 * beta)];
            row.extend(ring.iter().map(|&r| (r, beta)));
            rows.push(row);
        }
    }
    for (e, &[a, b]) in mesh.edges().iter().enumerate() {
        let [f0, f1] = mesh.edge_faces(e);
        if f1 == NO_FACE {
            rows.push(vec![(a, 0.5), (b, 0.5)]);
        } else {
            let c = mesh.opposite_vertex(f0, a, b);
            let d = mesh.opposite_vertex(f1, a, b);
            rows.push(vec![(a, 0.375), (b, 0.375), (c, 0.125), (d, 0.125)]);
        }
    }
    let matrix = SparseMatrix::from_rows(nv, rows);

    let mut faces = Vec::with_capacity(mesh.num_faces() * 4);
    for (f, &[p0, p1, p2]) in mesh.faces().iter().enumerate() {
        let [e01, e12, e20] = mesh.face_edges(f).map(|e| nv + e);
        faces.push([p0, e01, e20]);
        faces.push([p1, e12, e01]);
        faces.push([p2, e20, e12]);
        faces.push([e01, e12, e20]);
    }
    let positions = matrix.apply(mesh.vertices())?;
    let refined = TriMesh::new(positions, faces)?;
    Ok(SubdivisionStep {
        coarse_vertices: nv,
        coarse_faces: mesh.num_faces(),
        matrix,
        refined,
    })
}

/// Applies `level` Loop steps; with `limit` the final vertices are moved to
/// their limit positions.
pub fn subdivide_to_level(mesh: &TriMesh, level: usize, limit: bool) -> Result<TriMesh> {
    if level > 6 {
        return Err(Error::LevelTooLarge(level));
    }
    let mut cur = mesh.clone();
    for _ in 0..level {
        cur = subdivide_once(&cur)?.refined;
    }
    if limit {
        let pos: Vec<Vec3> = (0..cur.num_vertices())
            .map(|v| {
                limit_stencil(&cur, v)
                    .into_iter()
                    .fold(Vec3::zeros(), |acc, (u, w)| acc + cur.vertices()[u] * w)
            })
            .collect();
        cur = cur.with_positions(pos)?;
    }
    Ok(cur)
}
