use crate::error::{Error, Result};
use crate::mesh::{TriMesh, Vec3};
use crate::sparse::SparseMatrix;

use super::boundary::{descend, eval_boundary_face};
use super::eval::{eval_basis, eval_basis_derivatives};
use super::patch::{build_patch_table, PatchKind, PatchTable};
use super::step::{subdivide_once, SubdivisionStep};

/// A point on a face of the control mesh, `b0 + b1 + b2 = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleSpec {
    pub face: usize,
    pub bary: [f64; 3],
}

impl SampleSpec {
    pub fn new(face: usize, bary: [f64; 3]) -> Result<Self> {
        let s: f64 = bary.iter().sum();
        if bary.iter().any(|&b| !(b >= -1e-12)) || (s - 1.0).abs() > 1e-12 {
            return Err(Error::Domain { v: bary[1], w: bary[2] });
        }
        Ok(SampleSpec { face, bary })
    }
}

/// One sample per control vertex, placed at that vertex.
pub fn vertex_samples(mesh: &TriMesh) -> Vec<SampleSpec> {
    (0..mesh.num_vertices())
        .map(|v| {
            let f = mesh.ring_faces(v)[0];
            let k = mesh.faces()[f].iter().position(|&x| x == v).unwrap();
            let mut bary = [0.0; 3];
            bary[k] = 1.0;
            SampleSpec { face: f, bary }
        })
        .collect()
}

/// Samples at the vertices of the once-refined mesh: every control vertex
/// plus every edge midpoint.
pub fn level1_samples(mesh: &TriMesh) -> Vec<SampleSpec> {
    let mut out = vertex_samples(mesh);
    for (e, &[a, b]) in mesh.edges().iter().enumerate() {
        let f = mesh.edge_faces(e)[0];
        let face = mesh.faces()[f];
        let mut bary = [0.0; 3];
        for (k, &v) in face.iter().enumerate() {
            if v == a || v == b {
                bary[k] = 0.5;
            }
        }
        out.push(SampleSpec { face: f, bary });
    }
    out
}

/// Exact limit-surface evaluation of a fixed control connectivity.
#[derive(Clone, Debug)]
pub struct LimitSurface {
    pub step: SubdivisionStep,
    pub table: PatchTable,
}

/// Limit weights over control vertices and their parameter derivatives.
#[derive(Clone, Debug, Default)]
pub struct SampleWeights {
    pub position: Vec<(usize, f64)>,
    pub d_v: Vec<(usize, f64)>,
    pub d_w: Vec<(usize, f64)>,
}

impl LimitSurface {
    pub fn new(control: &TriMesh) -> Result<Self> {
        let step = subdivide_once(control)?;
        let table = build_patch_table(&step)?;
        Ok(LimitSurface { step, table })
    }

    /// Refined face containing the sample and its patch parameters `(v, w)`
    /// in that face's patch orientation.
    pub fn map_sample_to_patch(&self, sample: &SampleSpec) -> Result<(usize, f64, f64)> {
        if sample.face >= self.step.coarse_faces {
            return Err(Error::DimensionMismatch {
                expected: self.step.coarse_faces,
                got: sample.face,
            });
        }
        let (k, b) = descend(sample.bary);
        let face = 4 * sample.face + k;
        let r = self.table.entries[face].rotation;
        Ok((face, b[(r + 1) % 3], b[(r + 2) % 3]))
    }

    /// Weights over the vertices of `M1`.
    pub fn refined_weights(&self, sample: &SampleSpec, derivatives: bool) -> Result<SampleWeights> {
        let (face, v, w) = self.map_sample_to_patch(sample)?;
        let entry = &self.table.entries[face];
        if entry.kind == PatchKind::Boundary {
            let (_, b) = descend(sample.bary);
            let (position, d_v, d_w) = eval_boundary_face(&self.step.refined, face, b);
            return Ok(SampleWeights { position, d_v, d_w });
        }
        let zip = |wts: Vec<f64>| -> Vec<(usize, f64)> { entry.control.iter().copied().zip(wts).collect() };
        let position = zip(eval_basis(entry, v, w)?);
        let (d_v, d_w) = if derivatives {
            let (a, b) = eval_basis_derivatives(entry, v, w)?;
            (zip(a), zip(b))
        } else {
            Default::default()
        };
        Ok(SampleWeights { position, d_v, d_w })
    }

    /// Weights over the control vertices of `M0`. Derivatives are with
    /// respect to the refined patch's `(v, w)`.
    pub fn weights(&self, sample: &SampleSpec, derivatives: bool) -> Result<SampleWeights> {
        let r = self.refined_weights(sample, derivatives)?;
        let m = &self.step.matrix;
        Ok(SampleWeights {
            position: m.combine_rows(&r.position),
            d_v: m.combine_rows(&r.d_v),
            d_w: m.combine_rows(&r.d_w),
        })
    }

    pub fn point(&self, sample: &SampleSpec, control: &[Vec3]) -> Result<Vec3> {
        let w = self.weights(sample, false)?;
        Ok(w.position.iter().fold(Vec3::zeros(), |acc, &(c, x)| acc + control[c] * x))
    }

    /// Sparse operator mapping control positions to the limit positions of
    /// `samples`.
    pub fn sample_operator(&self, samples: &[SampleSpec]) -> Result<SampleOperator> {
        let rows = samples
            .iter()
            .map(|s| self.weights(s, false).map(|w| w.position))
            .collect::<Result<Vec<_>>>()?;
        Ok(SampleOperator {
            matrix: SparseMatrix::from_rows(self.step.coarse_vertices, rows),
        })
    }
}

/// Linear map `W` from control positions to sample positions on the limit
/// surface; `W` is also the Jacobian of the sample positions.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleOperator {
    pub matrix: SparseMatrix,
}

impl SampleOperator {
    pub fn num_samples(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_controls(&self) -> usize {
        self.matrix.ncols()
    }

    /// `Q = W V`.
    pub fn eval_points(&self, positions: &[Vec3]) -> Result<Vec<Vec3>> {
        self.matrix.apply(positions)
    }

    /// `W^T g`: pulls per-sample gradients back to the control vertices.
    pub fn pull_back(&self, per_sample: &[Vec3]) -> Result<Vec<Vec3>> {
        self.matrix.apply_transpose(per_sample)
    }
}

pub fn build_sample_operator(control: &TriMesh, samples: &[SampleSpec]) -> Result<SampleOperator> {
    LimitSurface::new(control)?.sample_operator(samples)
}

pub fn eval_points(op: &SampleOperator, positions: &[Vec3]) -> Result<Vec<Vec3>> {
    op.eval_points(positions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives;
    use crate::subdiv::step::limit_stencil;

    #[test]
    fn vertex_sample_row_is_limit_stencil() {
        let t = primitives::torus(7, 6, 2.0, 0.7);
        let op = build_sample_operator(&t, &vertex_samples(&t)).unwrap();
        for v in [0, 5, 17] {
            let mut expected = limit_stencil(&t, v);
            expected.sort_by_key(|x| x.0);
            let row: Vec<_> = op.matrix.row(v).filter(|x| x.1.abs() > 1e-15).collect();
            assert_eq!(row.len(), expected.len());
            for ((c, w), (ce, we)) in row.iter().zip(&expected) {
                assert_eq!(c, ce);
                assert!((w - we).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn extraordinary_vertex_sample_is_limit_stencil() {
        let ico = primitives::icosahedron();
        let op = build_sample_operator(&ico, &vertex_samples(&ico)).unwrap();
        let expected = limit_stencil(&ico, 3);
        for (c, w) in expected {
            let got = op.matrix.row(3).find(|x| x.0 == c).unwrap().1;
            assert!((got - w).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_and_scaled_positions() {
        let ico = primitives::icosphere(1);
        let op = build_sample_operator(&ico, &level1_samples(&ico)).unwrap();
        let p = Vec3::new(0.3, -1.0, 2.0);
        for q in op.eval_points(&vec![p; ico.num_vertices()]).unwrap() {
            assert!((q - p).norm() < 1e-12);
        }
        let zero = op.eval_points(&vec![Vec3::zeros(); ico.num_vertices()]).unwrap();
        assert!(zero.iter().all(|q| q.norm() == 0.0));
        let q1 = op.eval_points(ico.vertices()).unwrap();
        let doubled: Vec<Vec3> = ico.vertices().iter().map(|x| x * 2.0).collect();
        let q2 = op.eval_points(&doubled).unwrap();
        for (a, b) in q1.iter().zip(&q2) {
            assert!((a * 2.0 - b).norm() < 1e-12);
        }
        assert!(op.eval_points(&doubled[1..]).is_err());
    }

    #[test]
    fn edge_midpoint_ties_agree_between_children() {
        let ico = primitives::icosphere(1);
        let surf = LimitSurface::new(&ico).unwrap();
        let s = SampleSpec::new(3, [0.5, 0.5, 0.0]).unwrap();
        let (face, _, _) = surf.map_sample_to_patch(&s).unwrap();
        assert_eq!(face, 12);
        let a = surf.point(&s, ico.vertices()).unwrap();
        // the same point approached from the corner-1 child
        let b = surf.point(&SampleSpec::new(3, [0.5 - 1e-13, 0.5 + 1e-13, 0.0]).unwrap(), ico.vertices()).unwrap();
        assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn invalid_sample_spec() {
        assert!(SampleSpec::new(0, [0.5, 0.6, 0.0]).is_err());
        assert!(SampleSpec::new(0, [1.1, -0.1, 0.0]).is_err());
    }
}
