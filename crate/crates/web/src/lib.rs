//! Browser bindings: a target cloud, a control mesh fitted to it, and views
//! of the limit surface and the implicit field.

use subfit::imls::ImlsSurface;
use subfit::optimizer::{fit_static, FitConfig};
use subfit::primitives::{icosphere, sphere_cloud};
use subfit::subdiv::subdivide_to_level;
use subfit::{ControlMesh, PointCloud, TriMesh, Vec3};
use wasm_bindgen::prelude::*;

fn js_error(e: subfit::Error) -> JsError {
    JsError::new(&format!("class={} {e}", e.class()))
}

fn flatten(points: &[Vec3]) -> Vec<f64> {
    points.iter().flat_map(|p| [p.x, p.y, p.z]).collect()
}

/// Samples of the ellipsoid with semi-axes `axes` centered in the unit box,
/// pushed along the normal by up to `noise`.
fn ellipsoid_cloud(n: usize, axes: Vec3, noise: f64, seed: u64) -> PointCloud {
    let unit = sphere_cloud(n, Vec3::zeros(), 1.0, seed);
    let center = Vec3::repeat(0.5);
    let mut pts = Vec::with_capacity(n);
    let mut nrm = Vec::with_capacity(n);
    for (i, d) in unit.points().iter().enumerate() {
        let p = d.component_mul(&axes);
        let normal = d.component_div(&axes).normalize();
        // cheap deterministic jitter in [-1, 1]
        let h = ((i as u64 ^ seed).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 11) as f64 / (1u64 << 53) as f64;
        pts.push(center + p + normal * (noise * (2.0 * h - 1.0)));
        nrm.push(normal);
    }
    PointCloud::new(pts, nrm).expect("ellipsoid samples are valid")
}

#[wasm_bindgen]
pub struct Demo {
    cloud: PointCloud,
    control: ControlMesh,
    config: FitConfig,
    history: Vec<f64>,
}

#[wasm_bindgen]
impl Demo {
    /// An ellipsoid cloud and a level-1 icosphere control mesh squeezed to
    /// 85% of its axes.
    #[wasm_bindgen(constructor)]
    pub fn new(points: usize, ax: f64, ay: f64, az: f64, noise: f64, seed: u32) -> Result<Demo, JsError> {
        let axes = Vec3::new(ax, ay, az);
        if !axes.iter().all(|a| *a > 0.0 && *a <= 0.5) {
            return Err(JsError::new("semi-axes must lie in (0, 0.5]"));
        }
        let cloud = ellipsoid_cloud(points.max(10), axes, noise.max(0.0), seed.into());
        let ico = icosphere(1);
        let start = ico
            .with_positions(ico.vertices().iter().map(|p| Vec3::repeat(0.5) + p.component_mul(&axes) * 0.85).collect())
            .map_err(js_error)?;
        let config = FitConfig {
            h0: 0.1,
            alpha: 0.01,
            learning_rate: 2e-3,
            threads: 0,
            ..FitConfig::default()
        };
        Ok(Demo {
            cloud,
            control: ControlMesh::new(start).map_err(js_error)?,
            config,
            history: Vec::new(),
        })
    }

    pub fn set_alpha(&mut self, alpha: f64) {
        self.config.alpha = alpha;
    }

    pub fn set_radius(&mut self, h: f64) {
        self.config.h0 = h;
    }

    /// Runs up to `iters` iterations from the current control mesh and
    /// returns the final total energy.
    pub fn fit(&mut self, iters: usize) -> Result<f64, JsError> {
        let config = FitConfig {
            max_iters: iters.max(1),
            ..self.config.clone()
        };
        let (fitted, report) = fit_static(&self.cloud, &self.control, &config).map_err(js_error)?;
        self.history.extend(report.energy_history());
        self.control = fitted;
        Ok(report.final_total)
    }

    pub fn energy_history(&self) -> Vec<f64> {
        self.history.clone()
    }

    pub fn cloud_points(&self) -> Vec<f64> {
        flatten(self.cloud.points())
    }

    pub fn control_points(&self) -> Vec<f64> {
        flatten(self.control.positions())
    }

    pub fn control_faces(&self) -> Vec<u32> {
        faces(self.control.mesh())
    }

    /// Vertex positions of the limit surface refined `level` times.
    pub fn limit_points(&self, level: usize) -> Result<Vec<f64>, JsError> {
        let fine = subdivide_to_level(self.control.mesh(), level, true).map_err(js_error)?;
        Ok(flatten(fine.vertices()))
    }

    pub fn limit_faces(&self, level: usize) -> Result<Vec<u32>, JsError> {
        let fine = subdivide_to_level(self.control.mesh(), level, true).map_err(js_error)?;
        Ok(faces(&fine))
    }

    /// Signed distance of the cloud's implicit surface on a `res`×`res` grid
    /// over the unit square at height `z`, row-major with `y` down. NaN marks
    /// cells with no point within the support radius.
    pub fn field_slice(&self, res: usize, z: f64) -> Result<Vec<f64>, JsError> {
        let surface = ImlsSurface::new(self.cloud.clone(), self.config.h0).map_err(js_error)?;
        let step = 1.0 / res.max(1) as f64;
        let mut out = Vec::with_capacity(res * res);
        for j in 0..res {
            for i in 0..res {
                let p = Vec3::new((i as f64 + 0.5) * step, 1.0 - (j as f64 + 0.5) * step, z);
                out.push(surface.value(&p).unwrap_or(f64::NAN));
            }
        }
        Ok(out)
    }
}

fn faces(mesh: &TriMesh) -> Vec<u32> {
    mesh.faces().iter().flat_map(|f| f.map(|v| v as u32)).collect()
}
