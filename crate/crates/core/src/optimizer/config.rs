use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::imls::EmptyPolicy;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptimizerKind {
    GradientDescent,
    Adam,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HSchedule {
    Off,
    /// Halve `h` whenever progress stalls, down to four times the median
    /// point spacing.
    Geometric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Clean,
    Noisy,
}

impl Preset {
    /// `(h0, alpha)`. The published radii are read as squared radii; see the
    /// README.
    pub fn values(self) -> (f64, f64) {
        match self {
            Preset::Clean => (0.0005f64.sqrt(), 0.01),
            Preset::Noisy => (0.05f64.sqrt(), 0.1),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    pub h0: f64,
    pub alpha: f64,
    pub learning_rate: f64,
    pub max_iters: usize,
    pub convergence_tol: f64,
    pub samples_level: u8,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub h_schedule: HSchedule,
    pub line_search: bool,
    /// Worker threads; 0 uses all cores.
    pub threads: usize,
    pub arap_refit_every: usize,
    /// Iteration budget per sequence frame; `None` means `max_iters / 4`.
    pub frame_iters: Option<usize>,
    /// Points drawn when a target is given as a mesh.
    pub mesh_samples: usize,
    pub empty_policy: EmptyPolicy,
    /// Not serialized; set from the environment.
    pub cache_dir: Option<PathBuf>,
}

impl Default for FitConfig {
    fn default() -> Self {
        let (h0, alpha) = Preset::Clean.values();
        FitConfig {
            h0,
            alpha,
            learning_rate: 1e-3,
            max_iters: 2000,
            convergence_tol: 1e-6,
            samples_level: 0,
            optimizer: OptimizerKind::Adam,
            seed: 0,
            h_schedule: HSchedule::Off,
            line_search: false,
            threads: 0,
            arap_refit_every: 1,
            frame_iters: None,
            mesh_samples: 100_000,
            empty_policy: EmptyPolicy::Skip,
            cache_dir: None,
        }
    }
}

impl FitConfig {
    pub fn with_preset(mut self, preset: Preset) -> Self {
        (self.h0, self.alpha) = preset.values();
        self
    }

    pub fn frame_budget(&self) -> usize {
        self.frame_iters.unwrap_or((self.max_iters / 4).max(1))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.h0 > 0.0 && self.h0.is_finite()) {
            return bad(format!("h0 must be positive, got {}", self.h0));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be non-negative, got {}", self.alpha));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if !(self.convergence_tol >= 0.0) {
            return bad(format!("convergence_tol must be non-negative, got {}", self.convergence_tol));
        }
        if self.samples_level > 1 {
            return bad(format!("samples_level must be 0 or 1, got {}", self.samples_level));
        }
        if self.arap_refit_every == 0 {
            return bad("arap_refit_every must be at least 1".into());
        }
        if self.frame_iters == Some(0) {
            return bad("frame_iters must be at least 1".into());
        }
        if self.mesh_samples == 0 {
            return bad("mesh_samples must be at least 1".into());
        }
        Ok(())
    }

    /// `key = value` lines, readable by [`FitConfig::from_text`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
        // `{:?}` on f64 round-trips exactly
        kv("h0", format!("{:?}", self.h0));
        kv("alpha", format!("{:?}", self.alpha));
        kv("learning_rate", format!("{:?}", self.learning_rate));
        kv("max_iters", self.max_iters.to_string());
        kv("convergence_tol", format!("{:?}", self.convergence_tol));
        kv("samples_level", self.samples_level.to_string());
        kv("optimizer", optimizer_name(self.optimizer).into());
        kv("seed", self.seed.to_string());
        kv("h_schedule", schedule_name(self.h_schedule).into());
        kv("line_search", self.line_search.to_string());
        kv("threads", self.threads.to_string());
        kv("arap_refit_every", self.arap_refit_every.to_string());
        kv("frame_iters", self.frame_iters.map_or("auto".into(), |n| n.to_string()));
        kv("mesh_samples", self.mesh_samples.to_string());
        kv("empty_policy", policy_name(self.empty_policy).into());
        s
    }

    /// Starts from the defaults; unknown keys are an error.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = FitConfig::default();
        for (ln, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", ln + 1)))?;
            c.set(k.trim(), v.trim())?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "h0" => self.h0 = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "learning_rate" => self.learning_rate = parse(key, value)?,
            "max_iters" => self.max_iters = parse(key, value)?,
            "convergence_tol" => self.convergence_tol = parse(key, value)?,
            "samples_level" => self.samples_level = parse(key, value)?,
            "optimizer" => {
                self.optimizer = match value {
                    "gd" => OptimizerKind::GradientDescent,
                    "adam" => OptimizerKind::Adam,
                    _ => return Err(Error::Config(format!("unknown optimizer {value:?}"))),
                }
            }
            "seed" => self.seed = parse(key, value)?,
            "h_schedule" => {
                self.h_schedule = match value {
                    "off" => HSchedule::Off,
                    "geometric" => HSchedule::Geometric,
                    _ => return Err(Error::Config(format!("unknown h_schedule {value:?}"))),
                }
            }
            "line_search" => self.line_search = parse(key, value)?,
            "threads" => self.threads = parse(key, value)?,
            "arap_refit_every" => self.arap_refit_every = parse(key, value)?,
            "frame_iters" => {
                self.frame_iters = match value {
                    "auto" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "mesh_samples" => self.mesh_samples = parse(key, value)?,
            "empty_policy" => {
                self.empty_policy = match value {
                    "skip" => EmptyPolicy::Skip,
                    "error" => EmptyPolicy::Error,
                    _ => return Err(Error::Config(format!("unknown empty_policy {value:?}"))),
                }
            }
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
}

fn optimizer_name(k: OptimizerKind) -> &'static str {
    match k {
        OptimizerKind::GradientDescent => "gd",
        OptimizerKind::Adam => "adam",
    }
}

fn schedule_name(s: HSchedule) -> &'static str {
    match s {
        HSchedule::Off => "off",
        HSchedule::Geometric => "geometric",
    }
}

fn policy_name(p: EmptyPolicy) -> &'static str {
    match p {
        EmptyPolicy::Skip => "skip",
        EmptyPolicy::Error => "error",
    }
}
