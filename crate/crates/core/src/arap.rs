//! As-rigid-as-possible energy of the control mesh against its rest pose.

use nalgebra::Matrix3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imls::pairwise_sum;
use crate::mesh::{TriMesh, Vec3};

/// Smallest triangle angle (radians) accepted in a rest mesh.
pub const MIN_ANGLE: f64 = 1e-6;
/// Negative weights are clamped at this multiple of `-mean |w|`.
pub const NEGATIVE_CLAMP: f64 = 10.0;

/// Cotangent weight `(cot a + cot b) / 2` per edge of `mesh.edges()`, with a
/// single term on boundary edges.
pub fn cotangent_weights(mesh: &TriMesh) -> Result<Vec<f64>> {
    let p = mesh.vertices();
    let mut w = vec![0.0; mesh.num_edges()];
    for (f, tri) in mesh.faces().iter().enumerate() {
        let edges = mesh.face_edges(f);
        for k in 0..3 {
            // edge k joins corners k and k+1; the opposite corner is k+2
            let o = tri[(k + 2) % 3];
            let a = p[tri[k]] - p[o];
            let b = p[tri[(k + 1) % 3]] - p[o];
            let cross = a.cross(&b).norm();
            let angle = cross.atan2(a.dot(&b));
            if !(angle > MIN_ANGLE && angle < std::f64::consts::PI - MIN_ANGLE) {
                return Err(Error::DegenerateTriangle(f));
            }
            w[edges[k]] += 0.5 * a.dot(&b) / cross;
        }
    }
    let mean = w.iter().map(|x| x.abs()).sum::<f64>() / w.len().max(1) as f64;
    let floor = -NEGATIVE_CLAMP * mean;
    let clamped = w.iter().filter(|&&x| x < floor).count();
    if clamped > 0 {
        log::warn!("clamped {clamped} cotangent weights below {floor:.3e}");
        for x in w.iter_mut() {
            *x = x.max(floor);
        }
    }
    Ok(w)
}

#[derive(Clone, Debug)]
pub struct ArapState {
    rest: Vec<Vec3>,
    /// Per vertex: `(j, w_ij)` over the one-ring.
    neighbors: Vec<Vec<(usize, f64)>>,
    rotations: Vec<Matrix3<f64>>,
}

impl ArapState {
    /// Weights come from `rest`; rotations start at the identity.
    pub fn new(rest: &TriMesh) -> Result<Self> {
        let w = cotangent_weights(rest)?;
        let mut neighbors = vec![Vec::new(); rest.num_vertices()];
        for (e, &[a, b]) in rest.edges().iter().enumerate() {
            neighbors[a].push((b, w[e]));
            neighbors[b].push((a, w[e]));
        }
        Ok(ArapState {
            rest: rest.vertices().to_vec(),
            neighbors,
            rotations: vec![Matrix3::identity(); rest.num_vertices()],
        })
    }

    pub fn rotations(&self) -> &[Matrix3<f64>] {
        &self.rotations
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        self.neighbors[i].iter().find(|x| x.0 == j).map(|x| x.1)
    }

    pub fn rest_positions(&self) -> &[Vec3] {
        &self.rest
    }

    fn check(&self, positions: &[Vec3]) -> Result<()> {
        if positions.len() != self.rest.len() {
            return Err(Error::DimensionMismatch {
                expected: self.rest.len(),
                got: positions.len(),
            });
        }
        Ok(())
    }

    /// Best rotation per vertex from the SVD of `sum w_ij e_ij rest_ij^T`.
    pub fn fit_rotations(&mut self, positions: &[Vec3]) -> Result<()> {
        self.check(positions)?;
        let rest = &self.rest;
        self.rotations = self
            .neighbors
            .par_iter()
            .enumerate()
            .map(|(i, ring)| {
                let mut cov = Matrix3::zeros();
                for &(j, w) in ring {
                    cov += (positions[i] - positions[j]) * (rest[i] - rest[j]).transpose() * w;
                }
                best_rotation(&cov)
            })
            .collect();
        Ok(())
    }

    pub fn energy(&self, positions: &[Vec3]) -> Result<f64> {
        self.check(positions)?;
        let cells: Vec<f64> = self
            .neighbors
            .par_iter()
            .enumerate()
            .map(|(i, ring)| {
                ring.iter()
                    .map(|&(j, w)| w * self.residual(positions, i, j).norm_squared())
                    .sum()
            })
            .collect();
        Ok(pairwise_sum(&cells))
    }

    /// Gradient with the rotations held fixed.
    pub fn gradient(&self, positions: &[Vec3]) -> Result<Vec<Vec3>> {
        self.check(positions)?;
        Ok(self
            .neighbors
            .par_iter()
            .enumerate()
            .map(|(i, ring)| {
                ring.iter().fold(Vec3::zeros(), |acc, &(j, w)| {
                    acc + (self.residual(positions, i, j) - self.residual(positions, j, i)) * (2.0 * w)
                })
            })
            .collect())
    }

    fn residual(&self, p: &[Vec3], i: usize, j: usize) -> Vec3 {
        (p[i] - p[j]) - self.rotations[i] * (self.rest[i] - self.rest[j])
    }
}

/// Rotation `R` maximizing `tr(R^T cov)`, never a reflection.
pub fn best_rotation(cov: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = cov.svd(true, true);
    let (mut u, v_t) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let s = svd.singular_values;
    if s.min() < 1e-12 * s.max().max(f64::MIN_POSITIVE) {
        log::debug!("rank-deficient ARAP covariance, singular values {s:?}");
    }
    let mut r = u * v_t;
    if r.determinant() < 0.0 {
        let k = s.imin();
        u.column_mut(k).neg_mut();
        r = u * v_t;
    }
    r
}

pub fn fit_rotations(positions: &[Vec3], state: &mut ArapState) -> Result<()> {
    state.fit_rotations(positions)
}

pub fn energy_reg(positions: &[Vec3], state: &ArapState) -> Result<f64> {
    state.energy(positions)
}

pub fn energy_reg_gradient(positions: &[Vec3], state: &ArapState) -> Result<Vec<Vec3>> {
    state.gradient(positions)
}
