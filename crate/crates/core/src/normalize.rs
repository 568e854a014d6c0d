use crate::error::{Error, Result};
use crate::mesh::{bounding_box, PointCloud, TriMesh, Vec3};

/// Uniform scale plus translation, applied as `x' = scale * (x + translation)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizeTransform {
    scale: f64,
    translation: Vec3,
}

impl NormalizeTransform {
    pub fn new(scale: f64, translation: Vec3) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) || !translation.iter().all(|c| c.is_finite()) {
            return Err(Error::DegenerateInput(format!("invalid transform scale {scale}")));
        }
        Ok(NormalizeTransform { scale, translation })
    }

    pub fn identity() -> Self {
        NormalizeTransform {
            scale: 1.0,
            translation: Vec3::zeros(),
        }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn translation(&self) -> Vec3 {
        self.translation
    }

    pub fn forward(&self, p: &Vec3) -> Vec3 {
        (p + self.translation) * self.scale
    }

    pub fn inverse(&self, p: &Vec3) -> Vec3 {
        p / self.scale - self.translation
    }

    /// Transform mapping the bounding box of `points` into `[0,1]^3`, the
    /// longest axis spanning exactly `[0,1]`.
    pub fn unit_box(points: &[Vec3]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::DegenerateInput("no points".into()));
        }
        if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::DegenerateInput("non-finite coordinate".into()));
        }
        let (lo, hi) = bounding_box(points);
        let longest = (hi - lo).max();
        if !(longest > 0.0) {
            return Err(Error::DegenerateInput("all points coincide".into()));
        }
        NormalizeTransform::new(1.0 / longest, -lo)
    }

    pub fn apply_cloud(&self, cloud: &PointCloud) -> PointCloud {
        let pts = cloud.points().iter().map(|p| self.forward(p)).collect();
        // uniform scale leaves unit normals unchanged
        PointCloud::new(pts, cloud.normals().to_vec()).expect("transform preserves validity")
    }

    pub fn apply_mesh(&self, mesh: &TriMesh) -> TriMesh {
        let pts = mesh.vertices().iter().map(|p| self.forward(p)).collect();
        mesh.with_positions(pts).expect("same vertex count")
    }
}

pub fn normalize_cloud(cloud: &PointCloud) -> Result<(PointCloud, NormalizeTransform)> {
    let t = NormalizeTransform::unit_box(cloud.points())?;
    Ok((t.apply_cloud(cloud), t))
}

pub fn normalize_mesh(mesh: &TriMesh) -> Result<(TriMesh, NormalizeTransform)> {
    let t = NormalizeTransform::unit_box(mesh.vertices())?;
    Ok((t.apply_mesh(mesh), t))
}
