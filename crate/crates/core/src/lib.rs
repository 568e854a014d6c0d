//! Fitting Loop subdivision surfaces to oriented point clouds.
//!
//! The coarse control mesh is optimized so that its limit surface, sampled
//! through an exact linear operator, lies on the implicit moving least
//! squares surface of the cloud, while an as-rigid-as-possible term keeps
//! the control mesh close to its rest shape.

pub mod arap;
pub mod decimate;
pub mod error;
pub mod imls;
pub mod io;
pub mod mesh;
pub mod normalize;
pub mod optimizer;
pub mod primitives;
pub mod sparse;
pub mod subdiv;

pub use error::{Error, Result};
pub use mesh::{PointCloud, TriMesh, Vec3};
pub use normalize::NormalizeTransform;
pub use subdiv::ControlMesh;
