//! Implicit moving least squares surface of an oriented point cloud.
//!
//! `f(x) = sum n_k . (x - p_k) phi_k / sum phi_k` with the compactly
//! supported kernel `phi(r) = (1 - r^2/h^2)^4`, summed over cloud points
//! closer than `h`.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{PointCloud, Vec3};

/// Neighborhoods whose kernel weights sum below this count as empty.
pub const MIN_WEIGHT_SUM: f64 = 1e-12;

pub fn kernel(r: f64, h: f64) -> f64 {
    if r >= h {
        return 0.0;
    }
    let t = 1.0 - (r * r) / (h * h);
    t * t * t * t
}

/// Uniform hash grid with cell size `h`, answering radius-`h` queries.
#[derive(Clone, Debug)]
pub struct SpatialIndex {
    h: f64,
    points: Vec<Vec3>,
    cells: HashMap<[i64; 3], Vec<u32>>,
}

impl SpatialIndex {
    pub fn new(points: &[Vec3], h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Config(format!("support radius must be positive, got {h}")));
        }
        let mut cells: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(cell_of(p, h)).or_default().push(i as u32);
        }
        Ok(SpatialIndex {
            h,
            points: points.to_vec(),
            cells,
        })
    }

    pub fn radius(&self) -> f64 {
        self.h
    }

    /// Indices `k` with `|x - p_k| < h`, in a fixed order for a given `x`.
    pub fn query(&self, x: &Vec3, out: &mut Vec<usize>) {
        out.clear();
        let c = cell_of(x, self.h);
        let h2 = self.h * self.h;
        for dz in -1..=1 {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let Some(bucket) = self.cells.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) else {
                        continue;
                    };
                    for &k in bucket {
                        if (self.points[k as usize] - x).norm_squared() < h2 {
                            out.push(k as usize);
                        }
                    }
                }
            }
        }
    }

    /// Distance from `x` to the closest indexed point.
    pub fn nearest_distance(&self, x: &Vec3) -> f64 {
        self.nearest_excluding(x, usize::MAX)
    }

    /// Distance from point `k` to its closest other point.
    pub fn spacing(&self, k: usize) -> f64 {
        self.nearest_excluding(&self.points[k], k)
    }

    fn nearest_excluding(&self, x: &Vec3, skip: usize) -> f64 {
        let c = cell_of(x, self.h);
        // rings of cells are searched outward until the best hit is provably closest
        let mut best = f64::INFINITY;
        for ring in 0i64.. {
            // past this point a linear scan is cheaper than visiting empty cells
            if (2 * ring + 1).pow(3) as usize > self.points.len() {
                break;
            }
            for dz in -ring..=ring {
                for dy in -ring..=ring {
                    for dx in -ring..=ring {
                        if dx.abs().max(dy.abs()).max(dz.abs()) != ring {
                            continue;
                        }
                        if let Some(bucket) = self.cells.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                            for &k in bucket {
                                if k as usize != skip {
                                    best = best.min((self.points[k as usize] - x).norm());
                                }
                            }
                        }
                    }
                }
            }
            if best <= ring as f64 * self.h {
                return best;
            }
        }
        self.points
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != skip)
            .map(|(_, p)| (p - x).norm())
            .fold(best, f64::min)
    }
}

fn cell_of(p: &Vec3, h: f64) -> [i64; 3] {
    [
        (p.x / h).floor() as i64,
        (p.y / h).floor() as i64,
        (p.z / h).floor() as i64,
    ]
}

#[derive(Clone, Debug)]
pub struct ImlsSurface {
    cloud: PointCloud,
    index: SpatialIndex,
}

impl ImlsSurface {
    pub fn new(cloud: PointCloud, h: f64) -> Result<Self> {
        let index = SpatialIndex::new(cloud.points(), h)?;
        Ok(ImlsSurface { cloud, index })
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    pub fn index(&self) -> &SpatialIndex {
        &self.index
    }

    pub fn radius(&self) -> f64 {
        self.index.h
    }

    /// `None` when no cloud point lies within the support radius.
    pub fn value(&self, x: &Vec3) -> Option<f64> {
        let mut nb = Vec::new();
        self.eval(x, &mut nb, false).map(|(f, _)| f)
    }

    pub fn gradient(&self, x: &Vec3) -> Option<Vec3> {
        self.value_and_gradient(x).map(|(_, g)| g)
    }

    pub fn value_and_gradient(&self, x: &Vec3) -> Option<(f64, Vec3)> {
        let mut nb = Vec::new();
        self.eval(x, &mut nb, true)
    }

    fn eval(&self, x: &Vec3, nb: &mut Vec<usize>, with_gradient: bool) -> Option<(f64, Vec3)> {
        self.index.query(x, nb);
        if nb.is_empty() {
            return None;
        }
        let h = self.index.h;
        let inv_h2 = 1.0 / (h * h);
        let (pts, nrm) = (self.cloud.points(), self.cloud.normals());
        let mut den = 0.0;
        let mut num = 0.0;
        let mut d_den = Vec3::zeros();
        let mut d_num = Vec3::zeros();
        for &k in nb.iter() {
            let d = x - pts[k];
            let t = 1.0 - d.norm_squared() * inv_h2;
            let t3 = t * t * t;
            let phi = t3 * t;
            let dist = nrm[k].dot(&d);
            den += phi;
            num += dist * phi;
            if with_gradient {
                let d_phi = d * (-8.0 * t3 * inv_h2);
                d_den += d_phi;
                d_num += nrm[k] * phi + d_phi * dist;
            }
        }
        if den < MIN_WEIGHT_SUM {
            return None;
        }
        let f = num / den;
        Some((f, (d_num - d_den * f) / den))
    }
}

pub fn imls_value(surface: &ImlsSurface, x: &Vec3) -> Option<f64> {
    surface.value(x)
}

pub fn imls_gradient(surface: &ImlsSurface, x: &Vec3) -> Option<Vec3> {
    surface.gradient(x)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EmptyPolicy {
    /// Samples without neighbors contribute nothing and are counted.
    #[default]
    Skip,
    Error,
}

/// Per-sample outcome of an energy evaluation.
#[derive(Clone, Debug, Default)]
pub struct DistDiagnostics {
    /// `f(Q_i)`, or `None` for skipped samples.
    pub values: Vec<Option<f64>>,
    pub skipped: usize,
}

impl DistDiagnostics {
    pub fn skipped_fraction(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.skipped as f64 / self.values.len() as f64
        }
    }

    pub fn mean_abs_value(&self) -> f64 {
        let v: Vec<f64> = self.values.iter().flatten().map(|f| f.abs()).collect();
        if v.is_empty() {
            f64::NAN
        } else {
            pairwise_sum(&v) / v.len() as f64
        }
    }
}

/// Sum with a fixed binary-tree order, so parallel producers give
/// run-to-run identical totals.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `E_dist = sum f(Q_i)^2` with per-sample gradients `2 f grad f`.
pub fn energy_and_gradient(
    surface: &ImlsSurface,
    samples: &[Vec3],
    policy: EmptyPolicy,
) -> Result<(f64, Vec<Vec3>, DistDiagnostics)> {
    let evals: Vec<Option<(f64, Vec3)>> = samples
        .par_iter()
        .map_init(Vec::new, |nb, q| surface.eval(q, nb, true))
        .collect();
    finish(surface, samples, policy, evals)
}

pub fn energy_dist(surface: &ImlsSurface, samples: &[Vec3], policy: EmptyPolicy) -> Result<(f64, DistDiagnostics)> {
    let evals: Vec<Option<(f64, Vec3)>> = samples
        .par_iter()
        .map_init(Vec::new, |nb, q| surface.eval(q, nb, false))
        .collect();
    finish(surface, samples, policy, evals).map(|(e, _, d)| (e, d))
}

pub fn energy_dist_gradient(surface: &ImlsSurface, samples: &[Vec3], policy: EmptyPolicy) -> Result<Vec<Vec3>> {
    energy_and_gradient(surface, samples, policy).map(|(_, g, _)| g)
}

fn finish(
    surface: &ImlsSurface,
    samples: &[Vec3],
    policy: EmptyPolicy,
    evals: Vec<Option<(f64, Vec3)>>,
) -> Result<(f64, Vec<Vec3>, DistDiagnostics)> {
    let skipped = evals.iter().filter(|e| e.is_none()).count();
    if policy == EmptyPolicy::Error {
        if let Some(i) = evals.iter().position(|e| e.is_none()) {
            return Err(Error::EmptyNeighborhood(i));
        }
    }
    if !samples.is_empty() && skipped == samples.len() {
        let max_nearest = samples
            .par_iter()
            .map(|q| surface.index.nearest_distance(q))
            .reduce(|| 0.0, f64::max);
        return Err(Error::AllSamplesEmpty {
            count: samples.len(),
            max_nearest,
        });
    }
    let squares: Vec<f64> = evals.iter().map(|e| e.map_or(0.0, |(f, _)| f * f)).collect();
    let grads = evals
        .iter()
        .map(|e| e.map_or(Vec3::zeros(), |(f, g)| g * (2.0 * f)))
        .collect();
    let diag = DistDiagnostics {
        values: evals.iter().map(|e| e.map(|(f, _)| f)).collect(),
        skipped,
    };
    Ok((pairwise_sum(&squares), grads, diag))
}
