use crate::error::{Error, Result};
use crate::mesh::TriMesh;

use super::step::SubdivisionStep;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatchKind {
    /// All three corners interior with valence 6: 12 control points.
    Regular,
    /// One interior corner of the given valence, placed first: `N + 6` points.
    Irregular(usize),
    /// A corner lies on the mesh boundary; evaluated by local refinement.
    Boundary,
}

/// Control points of one face of `M1`.
///
/// The patch corners are `(face[rotation], face[rotation + 1],
/// face[rotation + 2])` and the parameters `(v, w)` weight the second and
/// third corner. Regular and irregular control lists are ordered as
/// `[c, r0 = a, r1 = b, r2 .. r(N-1), a1, a2, a3, b1, b2]`: the first
/// corner, its counterclockwise one-ring starting at the second corner, the
/// three further neighbours of `a` and the two further neighbours of `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchEntry {
    pub kind: PatchKind,
    pub rotation: usize,
    pub control: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct PatchTable {
    pub entries: Vec<PatchEntry>,
}

impl PatchTable {
    pub fn regular_count(&self) -> usize {
        self.entries.iter().filter(|e| e.kind == PatchKind::Regular).count()
    }

    pub fn irregular_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| matches!(e.kind, PatchKind::Irregular(_)))
            .count()
    }
}

/// Ring of `v` rotated to start at `start`.
fn ring_from(mesh: &TriMesh, v: usize, start: usize) -> Option<Vec<usize>> {
    let ring = mesh.one_ring(v);
    let k = ring.iter().position(|&r| r == start)?;
    Some(ring[k..].iter().chain(&ring[..k]).copied().collect())
}

/// Control points of the patch `(c, a, b)`; `a` and `b` must be interior
/// valence-6 vertices and `c` interior.
pub fn gather_patch(mesh: &TriMesh, c: usize, a: usize, b: usize) -> Option<Vec<usize>> {
    if [c, a, b].iter().any(|&v| mesh.is_boundary_vertex(v)) {
        return None;
    }
    if mesh.valence(a) != 6 || mesh.valence(b) != 6 {
        return None;
    }
    let rc = ring_from(mesh, c, a)?;
    if rc.get(1) != Some(&b) {
        return None;
    }
    let ra = ring_from(mesh, a, b)?;
    let rb = ring_from(mesh, b, c)?;
    // ra = [b, c, r(N-1), a1, a2, a3], rb = [c, a, a3, b1, b2, r2]
    let n = rc.len();
    if ra[1] != c || ra[2] != rc[n - 1] || rb[1] != a || ra[5] != rb[2] || rb[5] != rc[2 % n] {
        return None;
    }
    let mut out = Vec::with_capacity(rc.len() + 6);
    out.push(c);
    out.extend(&rc);
    out.extend(&ra[3..6]);
    out.extend(&rb[3..5]);
    Some(out)
}

/// Classifies a face of `M1` and collects its control points.
pub fn classify_face(mesh: &TriMesh, f: usize) -> Result<PatchEntry> {
    let face = mesh.faces()[f];
    if face.iter().any(|&v| mesh.is_boundary_vertex(v)) {
        return Ok(PatchEntry {
            kind: PatchKind::Boundary,
            rotation: 0,
            control: Vec::new(),
        });
    }
    let irregular: Vec<usize> = (0..3).filter(|&k| mesh.valence(face[k]) != 6).collect();
    let (kind, rotation) = match irregular.as_slice() {
        [] => (PatchKind::Regular, 0),
        [k] => (PatchKind::Irregular(mesh.valence(face[*k])), *k),
        _ => {
            return Err(Error::PatchConditionViolated {
                face: f,
                reason: format!("{} extraordinary corners", irregular.len()),
            })
        }
    };
    let (c, a, b) = (face[rotation], face[(rotation + 1) % 3], face[(rotation + 2) % 3]);
    let control = gather_patch(mesh, c, a, b).ok_or_else(|| Error::PatchConditionViolated {
        face: f,
        reason: "corner neighbourhood is not a regular fan".into(),
    })?;
    Ok(PatchEntry {
        kind,
        rotation,
        control,
    })
}

pub fn build_patch_table(step: &SubdivisionStep) -> Result<PatchTable> {
    let mesh = &step.refined;
    let entries = (0..mesh.num_faces())
        .map(|f| classify_face(mesh, f))
        .collect::<Result<Vec<_>>>()?;
    Ok(PatchTable { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives;
    use crate::subdiv::step::subdivide_once;

    #[test]
    fn icosahedron_patch_counts() {
        let step = subdivide_once(&primitives::icosahedron()).unwrap();
        let table = build_patch_table(&step).unwrap();
        assert_eq!(table.entries.len(), 80);
        // corner children of each coarse face touch a valence-5 vertex
        assert_eq!(table.irregular_count(), 60);
        assert_eq!(table.regular_count(), 20);
        for (f, e) in table.entries.iter().enumerate() {
            match e.kind {
                PatchKind::Irregular(n) => {
                    assert_eq!(n, 5);
                    assert_eq!(e.control.len(), 11);
                    let corner = step.refined.faces()[f][e.rotation];
                    assert_eq!(e.control[0], corner);
                    assert!(corner < 12);
                }
                PatchKind::Regular => assert_eq!(e.control.len(), 12),
                PatchKind::Boundary => panic!("closed mesh"),
            }
        }
    }

    #[test]
    fn torus_patches_are_regular_and_distinct() {
        let step = subdivide_once(&primitives::torus(6, 6, 2.0, 0.7)).unwrap();
        let table = build_patch_table(&step).unwrap();
        assert_eq!(table.regular_count(), table.entries.len());
        for e in &table.entries {
            let mut c = e.control.clone();
            c.sort_unstable();
            c.dedup();
            assert_eq!(c.len(), 12);
        }
    }

    #[test]
    fn two_extraordinary_corners_are_rejected() {
        // the coarse icosahedron itself has only valence-5 vertices
        let ico = primitives::icosahedron();
        let err = classify_face(&ico, 0).unwrap_err();
        assert_eq!(err.class(), "PatchConditionViolated");
    }
}
