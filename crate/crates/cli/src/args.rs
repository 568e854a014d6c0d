use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use subfit::optimizer::{FitConfig, HSchedule, OptimizerKind, Preset};

#[derive(Parser, Debug)]
#[command(name = "subfit", version, about = "Fit Loop subdivision surfaces to oriented point clouds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Reduce a dense mesh to a control mesh by edge collapse.
    Decimate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        target_vertices: usize,
        #[arg(long)]
        allow_nonmanifold: bool,
    },
    /// Fit a control mesh to one target.
    Fit {
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long, required_unless_present = "dump_config")]
        init: Option<PathBuf>,
        /// Output mesh; the report goes next to it as `<stem>.report.txt`.
        #[arg(long, required_unless_present = "dump_config")]
        out: Option<PathBuf>,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Fit a control mesh to every frame of a directory, in name order.
    FitSeq {
        /// Directory of frames, clouds (.ply with normals) or meshes.
        #[arg(long = "in", required_unless_present = "dump_config")]
        input: Option<PathBuf>,
        #[arg(long, required_unless_present = "dump_config")]
        init: Option<PathBuf>,
        /// Output directory, one OBJ per frame plus `report.txt`.
        #[arg(long, required_unless_present = "dump_config")]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Normalize::Shared)]
        normalize: Normalize,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Apply Loop subdivision steps.
    Subdivide {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        level: usize,
        /// Push the final vertices to the limit surface.
        #[arg(long)]
        limit: bool,
        #[arg(long)]
        allow_nonmanifold: bool,
    },
    /// Evaluate the implicit distance of a cloud at query points.
    EvalImls {
        #[arg(long)]
        cloud: PathBuf,
        /// Query points: the vertices of a mesh or the points of a cloud.
        #[arg(long = "in")]
        input: PathBuf,
        /// Text output, one `x y z f gx gy gz` line per query; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<PresetArg>,
        /// Support radius in unit-box units.
        #[arg(long)]
        h0: Option<f64>,
    },
    /// Two-sided Hausdorff distance between two meshes, relative to their
    /// joint bounding box diagonal.
    Hausdorff {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        target_mesh: PathBuf,
        /// Subdivide `--in` this many times first.
        #[arg(long, default_value_t = 0)]
        level: usize,
        #[arg(long)]
        limit: bool,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        allow_nonmanifold: bool,
    },
}

#[derive(Args, Debug)]
#[group(multiple = false)]
pub struct TargetArgs {
    /// Oriented point cloud (.ply with normals).
    #[arg(long, required_unless_present_any = ["target_mesh", "dump_config"])]
    pub cloud: Option<PathBuf>,
    /// Mesh target, sampled into a cloud.
    #[arg(long)]
    pub target_mesh: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Configuration file as written by `--dump-config`; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    pub dump_config: bool,
    #[arg(long, value_enum)]
    pub preset: Option<PresetArg>,
    #[arg(long)]
    pub h0: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub iters: Option<usize>,
    /// Iteration budget of each frame after the first.
    #[arg(long)]
    pub frame_iters: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub samples_level: Option<u8>,
    #[arg(long, value_enum)]
    pub optimizer: Option<OptimizerArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads, 0 for all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Backtracking line search (gradient descent only).
    #[arg(long)]
    pub line_search: bool,
    #[arg(long, value_enum)]
    pub h_schedule: Option<HScheduleArg>,
    #[arg(long)]
    pub arap_refit_every: Option<usize>,
    /// Points drawn from mesh targets.
    #[arg(long)]
    pub mesh_samples: Option<usize>,
    #[arg(long)]
    pub allow_nonmanifold: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PresetArg {
    Clean,
    Noisy,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Clean => Preset::Clean,
            PresetArg::Noisy => Preset::Noisy,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OptimizerArg {
    Adam,
    Gd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum HScheduleArg {
    Off,
    Geometric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Normalize {
    Shared,
    PerFrame,
}

impl FitArgs {
    /// Defaults, then the config file, then the preset, then single flags.
    pub fn config(&self, base: FitConfig) -> FitConfig {
        let mut c = base;
        if let Some(p) = self.preset {
            c = c.with_preset(p.into());
        }
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut c.h0, self.h0);
        set(&mut c.alpha, self.alpha);
        set(&mut c.learning_rate, self.lr);
        set(&mut c.convergence_tol, self.tol);
        if let Some(n) = self.iters {
            c.max_iters = n;
        }
        if let Some(n) = self.frame_iters {
            c.frame_iters = Some(n);
        }
        if let Some(l) = self.samples_level {
            c.samples_level = l;
        }
        if let Some(o) = self.optimizer {
            c.optimizer = match o {
                OptimizerArg::Adam => OptimizerKind::Adam,
                OptimizerArg::Gd => OptimizerKind::GradientDescent,
            };
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(t) = self.threads {
            c.threads = t;
        }
        if self.line_search {
            c.line_search = true;
        }
        if let Some(h) = self.h_schedule {
            c.h_schedule = match h {
                HScheduleArg::Off => HSchedule::Off,
                HScheduleArg::Geometric => HSchedule::Geometric,
            };
        }
        if let Some(n) = self.arap_refit_every {
            c.arap_refit_every = n;
        }
        if let Some(n) = self.mesh_samples {
            c.mesh_samples = n;
        }
        c
    }
}
