//! Loop subdivision: one refinement step as a sparse matrix, exact limit
//! evaluation on the refined mesh, and the sample operator `W` composed of
//! the two.

mod basis;
mod boundary;
pub mod cache;
mod eval;
mod operator;
mod patch;
mod step;
mod template;
mod valence;

pub use basis::RegularBasis;
pub use boundary::BOUNDARY_DEPTH;
pub use eval::{eval_basis, eval_basis_derivatives};
pub use operator::{
    build_sample_operator, eval_points, level1_samples, vertex_samples, LimitSurface, SampleOperator,
    SampleSpec, SampleWeights,
};
pub use patch::{build_patch_table, classify_face, gather_patch, PatchEntry, PatchKind, PatchTable};
pub use step::{limit_stencil, loop_beta, subdivide_once, subdivide_to_level, SubdivisionStep};
pub use template::cone_template;
pub use valence::{valence_table, ValenceTable, MAX_LEVEL, MAX_VALENCE};

use crate::error::{Error, Result};
use crate::mesh::{TriMesh, Vec3};

/// The optimized coarse mesh: fixed connectivity, current positions and the
/// rest pose used by the rigidity term.
#[derive(Clone, Debug)]
pub struct ControlMesh {
    mesh: TriMesh,
    rest: Vec<Vec3>,
}

impl ControlMesh {
    /// Rest pose is the mesh's current positions.
    pub fn new(mesh: TriMesh) -> Result<Self> {
        if !mesh.is_manifold() {
            return Err(Error::NonManifold(mesh.report().summary()));
        }
        let rest = mesh.vertices().to_vec();
        Ok(ControlMesh { mesh, rest })
    }

    pub fn with_rest(mesh: TriMesh, rest: Vec<Vec3>) -> Result<Self> {
        if rest.len() != mesh.num_vertices() {
            return Err(Error::DimensionMismatch {
                expected: mesh.num_vertices(),
                got: rest.len(),
            });
        }
        let mut c = ControlMesh::new(mesh)?;
        c.rest = rest;
        Ok(c)
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn positions(&self) -> &[Vec3] {
        self.mesh.vertices()
    }

    pub fn rest_positions(&self) -> &[Vec3] {
        &self.rest
    }

    /// Mesh holding the rest positions.
    pub fn rest_mesh(&self) -> TriMesh {
        self.mesh.with_positions(self.rest.clone()).expect("same size")
    }

    pub fn set_positions(&mut self, positions: Vec<Vec3>) -> Result<()> {
        if positions.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::DegenerateInput("non-finite control position".into()));
        }
        self.mesh = self.mesh.with_positions(positions)?;
        Ok(())
    }
}
