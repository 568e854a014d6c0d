//! Minimization of `E_dist + alpha * E_reg` over the control positions,
//! for single targets and warm-started sequences.

mod config;
mod report;
mod sampling;

pub use config::{FitConfig, HSchedule, OptimizerKind, Preset};
pub use report::{FitReport, IterRecord, Termination};
pub use sampling::{
    closest_point_on_triangle, directed_hausdorff, hausdorff, hausdorff_seeded, sample_mesh_to_cloud, TriangleTree,
};

use web_time::Instant;

use crate::arap::ArapState;
use crate::error::{Error, Result};
use crate::imls::{energy_and_gradient, energy_dist, DistDiagnostics, ImlsSurface};
use crate::mesh::{bounding_box, PointCloud, TriMesh, Vec3};
use crate::normalize::NormalizeTransform;
use crate::subdiv::cache::load_or_build;
use crate::subdiv::{level1_samples, vertex_samples, ControlMesh, LimitSurface, SampleOperator, SampleSpec};

/// Iterations over which the relative energy change is measured.
pub const CONVERGENCE_WINDOW: usize = 10;
/// Warn when more than this fraction of samples has no neighbors.
pub const SKIP_WARN_FRACTION: f64 = 0.1;

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
const ARMIJO_C: f64 = 1e-4;
const MIN_STEP_FRACTION: f64 = 1e-12;

/// Energy terms and gradient at one set of control positions.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub total: f64,
    pub e_dist: f64,
    pub e_reg: f64,
    pub gradient: Vec<Vec3>,
    pub diagnostics: DistDiagnostics,
}

/// Total energy and its gradient with the rotations in `arap` held fixed.
pub fn total_energy_and_gradient(
    positions: &[Vec3],
    op: &SampleOperator,
    surface: &ImlsSurface,
    arap: &ArapState,
    config: &FitConfig,
) -> Result<Evaluation> {
    let q = op.eval_points(positions)?;
    let (e_dist, per_sample, diagnostics) = energy_and_gradient(surface, &q, config.empty_policy)?;
    let mut gradient = op.pull_back(&per_sample)?;
    let mut e_reg = 0.0;
    if config.alpha > 0.0 {
        e_reg = arap.energy(positions)?;
        for (g, r) in gradient.iter_mut().zip(arap.gradient(positions)?) {
            *g += r * config.alpha;
        }
    }
    Ok(Evaluation {
        total: e_dist + config.alpha * e_reg,
        e_dist,
        e_reg,
        gradient,
        diagnostics,
    })
}

fn total_energy(
    positions: &[Vec3],
    op: &SampleOperator,
    surface: &ImlsSurface,
    arap: &ArapState,
    config: &FitConfig,
) -> Result<f64> {
    let q = op.eval_points(positions)?;
    let (e_dist, _) = energy_dist(surface, &q, config.empty_policy)?;
    let e_reg = if config.alpha > 0.0 { arap.energy(positions)? } else { 0.0 };
    Ok(e_dist + config.alpha * e_reg)
}

pub fn sample_specs(control: &TriMesh, level: u8) -> Vec<SampleSpec> {
    match level {
        0 => vertex_samples(control),
        _ => level1_samples(control),
    }
}

/// The sample operator for `control`, read from or stored in the cache
/// directory when one is configured.
pub fn sample_operator(control: &TriMesh, config: &FitConfig) -> Result<SampleOperator> {
    let specs = sample_specs(control, config.samples_level);
    match &config.cache_dir {
        Some(dir) => load_or_build(dir, control, &specs),
        None => LimitSurface::new(control)?.sample_operator(&specs),
    }
}

/// Median distance from a cloud point to its nearest neighbor, over at
/// most 10000 evenly strided points.
pub fn median_spacing(surface: &ImlsSurface) -> f64 {
    let n = surface.cloud().len();
    if n < 2 {
        return 0.0;
    }
    let stride = n.div_ceil(10_000);
    let mut d: Vec<f64> = (0..n).step_by(stride).map(|k| surface.index().spacing(k)).collect();
    d.sort_by(f64::total_cmp);
    d[d.len() / 2]
}

fn in_unit_box(points: &[Vec3]) -> bool {
    let (lo, hi) = bounding_box(points);
    let tol = 1e-6;
    lo.min() >= -tol && hi.max() <= 1.0 + tol && ((hi - lo).max() - 1.0).abs() <= 1e-3
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

struct Problem<'a> {
    op: &'a SampleOperator,
    arap: ArapState,
    config: &'a FitConfig,
    /// Moment estimates left by the previous run, reused by the next one.
    adam: Option<Adam>,
}

impl Problem<'_> {
    /// Runs the descent from `start` for at most `budget` iterations and
    /// returns the best positions found.
    fn run(&mut self, cloud: &PointCloud, start: &[Vec3], budget: usize) -> Result<(Vec<Vec3>, FitReport)> {
        let cfg = self.config;
        let clock = Instant::now();
        let mut h = cfg.h0;
        let mut surface = ImlsSurface::new(cloud.clone(), h)?;
        let h_floor = match cfg.h_schedule {
            HSchedule::Off => h,
            HSchedule::Geometric => (4.0 * median_spacing(&surface)).min(h),
        };
        let mut report = FitReport::new(cfg.clone());
        let mut x = start.to_vec();
        let mut adam = self.adam.take().unwrap_or_else(|| Adam::new(x.len()));
        let initial_adam = adam.clone();
        // total per iteration of the current phase, for the convergence window
        let mut trace: Vec<f64> = Vec::new();
        // best total, its positions and the optimizer state at that point
        let mut best: (f64, Vec<Vec3>, Adam) = (f64::INFINITY, x.clone(), adam.clone());
        let mut reference = f64::NAN;
        let mut warned = false;
        report.termination = Termination::MaxIters;

        for it in 0..budget {
            if it % cfg.arap_refit_every == 0 && cfg.alpha > 0.0 {
                self.arap.fit_rotations(&x)?;
            }
            let eval = match total_energy_and_gradient(&x, self.op, &surface, &self.arap, cfg) {
                Ok(e) => e,
                Err(e @ Error::AllSamplesEmpty { .. }) if it == 0 => return Err(e),
                Err(Error::AllSamplesEmpty { .. }) => return Err(Error::Diverged(it)),
                Err(e) => return Err(e),
            };
            if !eval.total.is_finite() || eval.gradient.iter().any(|g| !g.iter().all(|c| c.is_finite())) {
                return Err(Error::Diverged(it));
            }
            if !warned && eval.diagnostics.skipped_fraction() > SKIP_WARN_FRACTION {
                log::warn!(
                    "iteration {it}: {} of {} samples have no cloud point within h = {h}",
                    eval.diagnostics.skipped,
                    eval.diagnostics.values.len()
                );
                warned = true;
            }
            report.push(it, &eval, clock.elapsed());
            if reference.is_nan() {
                reference = eval.total;
            }
            if eval.total < best.0 {
                best = (eval.total, x.clone(), adam.clone());
            }
            trace.push(eval.total);

            // compares the mean of the last window with the one before it,
            // so a single oscillating iterate cannot look converged
            let k = trace.len();
            let stalled = k >= 2 * CONVERGENCE_WINDOW && {
                let mean = |w: &[f64]| w.iter().sum::<f64>() / w.len() as f64;
                let new = mean(&trace[k - CONVERGENCE_WINDOW..]);
                let old = mean(&trace[k - 2 * CONVERGENCE_WINDOW..k - CONVERGENCE_WINDOW]);
                old <= 0.0 || (old - new).abs() / old < cfg.convergence_tol
            };
            if stalled || best.0 == 0.0 {
                if cfg.h_schedule == HSchedule::Geometric && h > h_floor {
                    h = (h * 0.5).max(h_floor);
                    log::info!("iteration {it}: support radius reduced to {h}");
                    surface = ImlsSurface::new(cloud.clone(), h)?;
                    x = best.1.clone();
                    adam = Adam::new(x.len());
                    best = (f64::INFINITY, x.clone(), adam.clone());
                    trace.clear();
                    reference = f64::NAN;
                    continue;
                }
                report.termination = Termination::Converged;
                break;
            }
            if it + 1 == budget {
                break;
            }
            match (cfg.optimizer, cfg.line_search) {
                (OptimizerKind::GradientDescent, false) => {
                    for (p, g) in x.iter_mut().zip(&eval.gradient) {
                        *p -= g * cfg.learning_rate;
                    }
                }
                (OptimizerKind::GradientDescent, true) => {
                    match self.line_search(&x, &eval, &surface)? {
                        Some(next) => x = next,
                        None => {
                            report.termination = Termination::Converged;
                            break;
                        }
                    }
                }
                (OptimizerKind::Adam, _) => adam.step(&mut x, &eval.gradient, cfg.learning_rate),
            }
        }

        // a run that gains less than the tolerance leaves the start untouched
        let improved = best.0 < reference * (1.0 - cfg.convergence_tol) || reference.is_nan();
        let (out, state) = if improved || h != cfg.h0 {
            (best.1, best.2)
        } else {
            report.termination = Termination::NoImprovement;
            (start.to_vec(), initial_adam)
        };
        if cfg.alpha > 0.0 {
            self.arap.fit_rotations(&out)?;
        }
        let fin = total_energy_and_gradient(&out, self.op, &surface, &self.arap, cfg)?;
        report.finish(&fin, h, clock.elapsed());
        self.adam = Some(state);
        Ok((out, report))
    }

    /// Backtracking along `-g` from the configured step; `None` when no
    /// step decreases the energy.
    fn line_search(&self, x: &[Vec3], eval: &Evaluation, surface: &ImlsSurface) -> Result<Option<Vec<Vec3>>> {
        let g2: f64 = eval.gradient.iter().map(|g| g.norm_squared()).sum();
        if g2 == 0.0 {
            return Ok(None);
        }
        let mut t = self.config.learning_rate;
        while t >= self.config.learning_rate * MIN_STEP_FRACTION {
            let trial: Vec<Vec3> = x.iter().zip(&eval.gradient).map(|(p, g)| p - g * t).collect();
            match total_energy(&trial, self.op, surface, &self.arap, self.config) {
                Ok(e) if e.is_finite() && e <= eval.total - ARMIJO_C * t * g2 => return Ok(Some(trial)),
                Ok(_) | Err(Error::AllSamplesEmpty { .. }) => t *= 0.5,
                Err(e) => return Err(e),
            }
        }
        Ok(None)
    }
}

#[derive(Clone, Debug)]
struct Adam {
    m: Vec<Vec3>,
    v: Vec<Vec3>,
    t: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Adam {
            m: vec![Vec3::zeros(); n],
            v: vec![Vec3::zeros(); n],
            t: 0,
        }
    }

    fn step(&mut self, x: &mut [Vec3], g: &[Vec3], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - ADAM_BETA1.powi(self.t);
        let c2 = 1.0 - ADAM_BETA2.powi(self.t);
        for i in 0..x.len() {
            self.m[i] = self.m[i] * ADAM_BETA1 + g[i] * (1.0 - ADAM_BETA1);
            self.v[i] = self.v[i] * ADAM_BETA2 + g[i].component_mul(&g[i]) * (1.0 - ADAM_BETA2);
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            x[i] -= m_hat.zip_map(&v_hat, |m, v| lr * m / (v.sqrt() + ADAM_EPS));
        }
    }
}

/// Fits `initial` to `cloud`. A cloud outside the unit box is normalized
/// for the fit (with a warning) and the result mapped back.
pub fn fit_static(cloud: &PointCloud, initial: &ControlMesh, config: &FitConfig) -> Result<(ControlMesh, FitReport)> {
    config.validate()?;
    with_threads(config.threads, || {
        if in_unit_box(cloud.points()) {
            return fit_normalized(cloud, initial, config);
        }
        log::warn!("point cloud is not in the unit box; normalizing for the fit");
        let t = NormalizeTransform::unit_box(cloud.points())?;
        let map = |pts: &[Vec3], f: &dyn Fn(&Vec3) -> Vec3| pts.iter().map(f).collect::<Vec<_>>();
        let init = ControlMesh::with_rest(
            t.apply_mesh(initial.mesh()),
            map(initial.rest_positions(), &|p| t.forward(p)),
        )?;
        let (fitted, report) = fit_normalized(&t.apply_cloud(cloud), &init, config)?;
        let back = ControlMesh::with_rest(
            initial.mesh().with_positions(map(fitted.positions(), &|p| t.inverse(p)))?,
            initial.rest_positions().to_vec(),
        )?;
        Ok((back, report))
    })?
}

fn fit_normalized(cloud: &PointCloud, initial: &ControlMesh, config: &FitConfig) -> Result<(ControlMesh, FitReport)> {
    let op = sample_operator(initial.mesh(), config)?;
    let mut problem = Problem {
        op: &op,
        arap: ArapState::new(&initial.rest_mesh())?,
        config,
        adam: None,
    };
    let (x, report) = problem.run(cloud, initial.positions(), config.max_iters)?;
    let mut out = initial.clone();
    out.set_positions(x)?;
    Ok((out, report))
}

/// A sequence frame: an oriented cloud, or a mesh to be sampled into one.
#[derive(Clone, Debug)]
pub enum Target {
    Cloud(PointCloud),
    Mesh(TriMesh),
}

impl Target {
    /// Mesh targets are sampled with `config.mesh_samples` points, seeded by
    /// the config seed and `frame`.
    pub fn to_cloud(&self, config: &FitConfig, frame: usize) -> PointCloud {
        match self {
            Target::Cloud(c) => c.clone(),
            Target::Mesh(m) => sample_mesh_to_cloud(m, config.mesh_samples, config.seed.wrapping_add(frame as u64)),
        }
    }
}

/// Fits every frame in turn, each starting from the previous solution and
/// optimizer state. The rest pose of the rigidity term stays that of `template`. Frames must share
/// one normalization.
pub fn fit_sequence(
    frames: &[Target],
    template: &ControlMesh,
    config: &FitConfig,
) -> Result<Vec<(ControlMesh, FitReport)>> {
    config.validate()?;
    with_threads(config.threads, || {
        let op = sample_operator(template.mesh(), config)?;
        let mut problem = Problem {
            op: &op,
            arap: ArapState::new(&template.rest_mesh())?,
            config,
            adam: None,
        };
        let mut out = Vec::with_capacity(frames.len());
        let mut x = template.positions().to_vec();
        for (i, frame) in frames.iter().enumerate() {
            let cloud = frame.to_cloud(config, i);
            if !in_unit_box(cloud.points()) {
                log::warn!("frame {i} lies outside the unit box");
            }
            let budget = if i == 0 { config.max_iters } else { config.frame_budget() };
            let wrap = |e: Error| Error::Frame {
                frame: i,
                source: Box::new(e),
            };
            let (next, mut report) = problem.run(&cloud, &x, budget).map_err(wrap)?;
            report.frame = Some(i);
            let mut mesh = template.clone();
            mesh.set_positions(next.clone()).map_err(wrap)?;
            out.push((mesh, report));
            x = next;
        }
        Ok(out)
    })?
}

/// Sampled Hausdorff distance between the level-`level` limit mesh of
/// `control` and `target`, relative to their joint bounding box diagonal.
pub fn limit_hausdorff(control: &ControlMesh, target: &TriMesh, level: usize, samples: usize) -> Result<f64> {
    let refined = crate::subdiv::subdivide_to_level(control.mesh(), level, true)?;
    Ok(hausdorff(&refined, target, samples))
}
