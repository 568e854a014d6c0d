use std::fmt::Write as _;
use std::time::Duration;

use super::config::FitConfig;
use super::Evaluation;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIters,
    /// No iterate beat the start by the convergence tolerance; the start is
    /// returned unchanged.
    NoImprovement,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIters => "max_iters",
            Termination::NoImprovement => "no_improvement",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterRecord {
    pub iter: usize,
    pub e_dist: f64,
    pub e_reg: f64,
    pub total: f64,
    pub skipped: usize,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug)]
pub struct FitReport {
    pub config: FitConfig,
    pub records: Vec<IterRecord>,
    pub termination: Termination,
    pub frame: Option<usize>,
    pub wall_time: Duration,
    pub final_e_dist: f64,
    pub final_e_reg: f64,
    pub final_total: f64,
    pub final_skipped: usize,
    pub final_mean_abs_f: f64,
    pub final_max_abs_f: f64,
    pub num_samples: usize,
    pub final_h: f64,
    pub hausdorff: Option<f64>,
}

impl FitReport {
    pub(crate) fn new(config: FitConfig) -> Self {
        FitReport {
            final_h: config.h0,
            config,
            records: Vec::new(),
            termination: Termination::MaxIters,
            frame: None,
            wall_time: Duration::ZERO,
            final_e_dist: f64::NAN,
            final_e_reg: f64::NAN,
            final_total: f64::NAN,
            final_skipped: 0,
            final_mean_abs_f: f64::NAN,
            final_max_abs_f: f64::NAN,
            num_samples: 0,
            hausdorff: None,
        }
    }

    pub(crate) fn push(&mut self, iter: usize, e: &Evaluation, elapsed: Duration) {
        self.records.push(IterRecord {
            iter,
            e_dist: e.e_dist,
            e_reg: e.e_reg,
            total: e.total,
            skipped: e.diagnostics.skipped,
            elapsed_ms: elapsed.as_secs_f64() * 1e3,
        });
    }

    pub(crate) fn finish(&mut self, e: &Evaluation, h: f64, elapsed: Duration) {
        self.final_e_dist = e.e_dist;
        self.final_e_reg = e.e_reg;
        self.final_total = e.total;
        self.final_skipped = e.diagnostics.skipped;
        self.final_mean_abs_f = e.diagnostics.mean_abs_value();
        self.final_max_abs_f = e.diagnostics.values.iter().flatten().fold(0.0, |m, f| m.max(f.abs()));
        self.num_samples = e.diagnostics.values.len();
        self.final_h = h;
        self.wall_time = elapsed;
    }

    /// Total energy per iteration.
    pub fn energy_history(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.total).collect()
    }

    /// Commented header with the configuration and summary, then one
    /// whitespace-separated record per iteration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if let Some(f) = self.frame {
            writeln!(s, "# frame = {f}").unwrap();
        }
        for line in self.config.to_text().lines() {
            writeln!(s, "# {line}").unwrap();
        }
        let mut kv = |k: &str, v: String| writeln!(s, "# {k} = {v}").unwrap();
        kv("termination", self.termination.as_str().into());
        kv("iterations", self.records.len().to_string());
        kv("wall_time_ms", format!("{:.3}", self.wall_time.as_secs_f64() * 1e3));
        kv("samples", self.num_samples.to_string());
        kv("final_h", format!("{:?}", self.final_h));
        kv("final_e_dist", format!("{:e}", self.final_e_dist));
        kv("final_e_reg", format!("{:e}", self.final_e_reg));
        kv("final_total", format!("{:e}", self.final_total));
        kv("final_skipped", self.final_skipped.to_string());
        kv("final_mean_abs_f", format!("{:e}", self.final_mean_abs_f));
        kv("final_max_abs_f", format!("{:e}", self.final_max_abs_f));
        if let Some(h) = self.hausdorff {
            kv("hausdorff", format!("{h:e}"));
        }
        writeln!(s, "iter E_dist E_reg total skipped elapsed_ms").unwrap();
        for r in &self.records {
            writeln!(
                s,
                "{} {:e} {:e} {:e} {} {:.3}",
                r.iter, r.e_dist, r.e_reg, r.total, r.skipped, r.elapsed_ms
            )
            .unwrap();
        }
        s
    }
}
