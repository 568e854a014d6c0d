mod args;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use subfit::decimate::decimate_qem_partial;
use subfit::imls::ImlsSurface;
use subfit::io::{load_mesh, load_point_cloud, load_target, write_mesh, MeshFormat};
use subfit::optimizer::{fit_sequence, fit_static, hausdorff_seeded, FitConfig, OptimizerKind, Target};
use subfit::subdiv::subdivide_to_level;
use subfit::{ControlMesh, Error, NormalizeTransform, PointCloud, Result, TriMesh, Vec3};

use args::{Cli, Command, FitArgs, Normalize, TargetArgs};

const CACHE_ENV: &str = "SUBFIT_CACHE_DIR";

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: class={} {}", e.class(), one_line(&e.to_string()));
            ExitCode::from(1)
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Decimate {
            input,
            out,
            target_vertices,
            allow_nonmanifold,
        } => {
            let mesh = read_mesh(&input, allow_nonmanifold)?;
            let (reduced, status) = decimate_qem_partial(&mesh, target_vertices, true);
            // the best-effort mesh is written even when the target was missed
            write_mesh(&reduced, &out, MeshFormat::from_path(&out)?, None)?;
            status?;
            println!("{} -> {} vertices", mesh.num_vertices(), reduced.num_vertices());
            Ok(())
        }
        Command::Fit { target, init, out, fit } => {
            let cfg = load_config(&fit)?;
            if fit.dump_config {
                print!("{}", cfg.to_text());
                return Ok(());
            }
            let (init, out) = (required(init), required(out));
            let cloud = read_target(&target, &cfg, fit.allow_nonmanifold)?;
            let init = ControlMesh::new(read_mesh(&init, fit.allow_nonmanifold)?)?;
            let (fitted, report) = fit_static(&cloud, &init, &cfg)?;
            write_mesh(fitted.mesh(), &out, MeshFormat::from_path(&out)?, None)?;
            write_text(&report_path(&out), &report.to_text())?;
            println!("{} after {} iterations, total {:e}", report.termination.as_str(), report.records.len(), report.final_total);
            Ok(())
        }
        Command::FitSeq {
            input,
            init,
            out,
            normalize,
            fit,
        } => {
            let cfg = load_config(&fit)?;
            if fit.dump_config {
                print!("{}", cfg.to_text());
                return Ok(());
            }
            let (input, init, out) = (required(input), required(init), required(out));
            fit_seq(&input, &init, &out, normalize, &cfg, fit.allow_nonmanifold)
        }
        Command::Subdivide {
            input,
            out,
            level,
            limit,
            allow_nonmanifold,
        } => {
            let mesh = read_mesh(&input, allow_nonmanifold)?;
            let fine = subdivide_to_level(&mesh, level, limit)?;
            write_mesh(&fine, &out, MeshFormat::from_path(&out)?, None)?;
            println!("{} -> {} faces", mesh.num_faces(), fine.num_faces());
            Ok(())
        }
        Command::EvalImls {
            cloud,
            input,
            out,
            preset,
            h0,
        } => {
            let mut cfg = FitConfig::default();
            if let Some(p) = preset {
                cfg = cfg.with_preset(p.into());
            }
            let h = h0.unwrap_or(cfg.h0);
            eval_imls(&cloud, &input, out.as_deref(), h)
        }
        Command::Hausdorff {
            input,
            target_mesh,
            level,
            limit,
            samples,
            seed,
            allow_nonmanifold,
        } => {
            let a = subdivide_to_level(&read_mesh(&input, allow_nonmanifold)?, level, limit)?;
            let b = read_mesh(&target_mesh, allow_nonmanifold)?;
            println!("{:e}", hausdorff_seeded(&a, &b, samples, seed));
            Ok(())
        }
    }
}

fn required(path: Option<PathBuf>) -> PathBuf {
    path.expect("clap requires paths unless dumping the config")
}

fn load_config(fit: &FitArgs) -> Result<FitConfig> {
    let base = match &fit.config {
        Some(path) => FitConfig::from_text(&fs::read_to_string(path).map_err(|e| io_error(path, e))?)?,
        None => FitConfig::default(),
    };
    let mut cfg = fit.config(base);
    cfg.validate()?;
    if cfg.line_search && cfg.optimizer == OptimizerKind::Adam {
        log::warn!("--line-search only applies to --optimizer gd");
    }
    cfg.cache_dir = std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    Ok(cfg)
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

/// `fitted.obj` -> `fitted.report.txt`
fn report_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.report.txt"))
}

fn read_mesh(path: &Path, allow_nonmanifold: bool) -> Result<TriMesh> {
    load_mesh(path, MeshFormat::from_path(path)?, allow_nonmanifold)
}

fn read_target(target: &TargetArgs, cfg: &FitConfig, allow_nonmanifold: bool) -> Result<PointCloud> {
    match (&target.cloud, &target.target_mesh) {
        (Some(path), _) => load_point_cloud(path),
        (None, Some(path)) => Ok(Target::Mesh(read_mesh(path, allow_nonmanifold)?).to_cloud(cfg, 0)),
        (None, None) => unreachable!("clap requires a target unless dumping the config"),
    }
}

fn frame_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| io_error(dir, e))? {
        let path = entry.map_err(|e| io_error(dir, e))?.path();
        if path.is_file() && MeshFormat::from_path(&path).is_ok() {
            paths.push(path);
        }
    }
    paths.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    if paths.is_empty() {
        return Err(Error::DegenerateInput(format!("no .obj or .ply frames in {}", dir.display())));
    }
    Ok(paths)
}

fn target_points(t: &Target) -> &[Vec3] {
    match t {
        Target::Cloud(c) => c.points(),
        Target::Mesh(m) => m.vertices(),
    }
}

fn transform_target(t: &Target, x: &NormalizeTransform) -> Target {
    match t {
        Target::Cloud(c) => Target::Cloud(x.apply_cloud(c)),
        Target::Mesh(m) => Target::Mesh(x.apply_mesh(m)),
    }
}

fn fit_seq(dir: &Path, init: &Path, out: &Path, normalize: Normalize, cfg: &FitConfig, allow_nonmanifold: bool) -> Result<()> {
    let paths = frame_paths(dir)?;
    let frames = paths
        .iter()
        .map(|p| load_target(p, allow_nonmanifold))
        .collect::<Result<Vec<_>>>()?;
    let init = read_mesh(init, allow_nonmanifold)?;

    let transforms = match normalize {
        Normalize::Shared => {
            let all: Vec<Vec3> = frames.iter().flat_map(|f| target_points(f).iter().copied()).collect();
            vec![NormalizeTransform::unit_box(&all)?; frames.len()]
        }
        Normalize::PerFrame => frames
            .iter()
            .map(|f| NormalizeTransform::unit_box(target_points(f)))
            .collect::<Result<Vec<_>>>()?,
    };
    let normalized: Vec<Target> = frames.iter().zip(&transforms).map(|(f, t)| transform_target(f, t)).collect();
    let template = ControlMesh::new(transforms[0].apply_mesh(&init))?;
    let results = fit_sequence(&normalized, &template, cfg)?;

    fs::create_dir_all(out).map_err(|e| io_error(out, e))?;
    let mut combined = String::new();
    for ((path, (mesh, report)), t) in paths.iter().zip(&results).zip(&transforms) {
        let name = path.file_stem().unwrap_or_default().to_string_lossy();
        let target = out.join(format!("{name}.obj"));
        write_mesh(mesh.mesh(), &target, MeshFormat::Obj, Some(t))?;
        writeln!(combined, "# source = {}", path.display()).unwrap();
        combined.push_str(&report.to_text());
        combined.push('\n');
        println!("{name}: {} after {} iterations", report.termination.as_str(), report.records.len());
    }
    write_text(&out.join("report.txt"), &combined)
}

fn eval_imls(cloud: &Path, queries: &Path, out: Option<&Path>, h: f64) -> Result<()> {
    let cloud = load_point_cloud(cloud)?;
    let points: Vec<Vec3> = match load_point_cloud(queries) {
        Ok(c) => c.points().to_vec(),
        Err(Error::MissingNormals | Error::Parse(_)) => read_mesh(queries, true)?.vertices().to_vec(),
        Err(e) => return Err(e),
    };
    // the radius is given in unit-box units, so evaluate in the cloud's unit box
    let t = NormalizeTransform::unit_box(cloud.points())?;
    let surface = ImlsSurface::new(t.apply_cloud(&cloud), h)?;
    let mut text = String::from("x y z f gx gy gz\n");
    for p in &points {
        match surface.value_and_gradient(&t.forward(p)) {
            Some((f, g)) => writeln!(text, "{} {} {} {:e} {} {} {}", p.x, p.y, p.z, f / t.scale(), g.x, g.y, g.z),
            None => writeln!(text, "{} {} {} nan nan nan nan", p.x, p.y, p.z),
        }
        .unwrap();
    }
    match out {
        Some(path) => write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

