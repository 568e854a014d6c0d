use std::f64::consts::PI;

use crate::mesh::{TriMesh, Vec3};

/// Disc of `rings` rings around a centre vertex of valence `n`, built from
/// `n` sixty-degree wedges of the triangular lattice so that every
/// non-centre interior vertex has valence 6.
///
/// Vertex 0 is the centre, ring `k` holds `n * k` vertices numbered
/// counterclockwise from sector 0. For `n == 6` the positions form the
/// planar unit lattice; otherwise they are only placeholders.
pub fn cone_template(n: usize, rings: usize) -> TriMesh {
    assert!(n >= 3 && rings >= 1);
    let ring_start = |k: usize| 1 + n * k * (k - 1) / 2;
    let id = |k: usize, m: usize| if k == 0 { 0 } else { ring_start(k) + m % (n * k) };
    let dir = |s: usize| {
        let t = 2.0 * PI * (s % n) as f64 / n as f64;
        Vec3::new(t.cos(), t.sin(), 0.0)
    };

    let mut verts = vec![Vec3::zeros()];
    for k in 1..=rings {
        for m in 0..n * k {
            let (s, t) = (m / k, m % k);
            verts.push(dir(s) * k as f64 + (dir(s + 1) - dir(s)) * t as f64);
        }
    }
    let mut faces = Vec::new();
    for k in 0..rings {
        for s in 0..n {
            for t in 0..=k {
                faces.push([id(k, s * k + t), id(k + 1, s * (k + 1) + t), id(k + 1, s * (k + 1) + t + 1)]);
            }
            for t in 0..k {
                faces.push([id(k, s * k + t), id(k + 1, s * (k + 1) + t + 1), id(k, s * k + t + 1)]);
            }
        }
    }
    TriMesh::new(verts, faces).expect("cone template is manifold")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_vertices_are_regular() {
        for n in [3, 4, 5, 6, 7, 12] {
            let t = cone_template(n, 4);
            assert_eq!(t.valence(0), n);
            assert!(!t.is_boundary_vertex(0));
            for v in 1..t.num_vertices() {
                if !t.is_boundary_vertex(v) {
                    assert_eq!(t.valence(v), 6, "n={n} v={v}");
                }
            }
            // rings 1..3 are interior
            assert_eq!((1..t.num_vertices()).filter(|&v| !t.is_boundary_vertex(v)).count(), n * 6);
        }
    }

    #[test]
    fn planar_lattice_is_counterclockwise() {
        let t = cone_template(6, 3);
        for f in 0..t.num_faces() {
            assert!(t.face_normal(f).z > 0.99);
        }
    }
}
