//! OBJ and PLY readers and writers.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::{PointCloud, TriMesh, Vec3};
use crate::normalize::NormalizeTransform;
use crate::optimizer::Target;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("obj") => Ok(MeshFormat::Obj),
            Some("ply") => Ok(MeshFormat::Ply),
            _ => Err(Error::Parse(format!(
                "cannot infer mesh format from {}",
                path.display()
            ))),
        }
    }
}

/// Loads a triangle mesh. Non-manifold meshes are an error unless
/// `allow_nonmanifold` is set, in which case the problems stay in the
/// mesh's validation report.
pub fn load_mesh(path: &Path, format: MeshFormat, allow_nonmanifold: bool) -> Result<TriMesh> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let (vertices, faces) = match format {
        MeshFormat::Obj => read_obj(&mut reader)?,
        MeshFormat::Ply => {
            let ply = read_ply(&mut reader)?;
            (ply.positions, ply.faces)
        }
    };
    let mesh = TriMesh::new_unchecked(vertices, faces)?;
    if !mesh.is_manifold() {
        if !allow_nonmanifold {
            return Err(Error::NonManifold(mesh.report().summary()));
        }
        log::warn!("{}: {}", path.display(), mesh.report().summary());
    }
    Ok(mesh)
}

pub fn load_point_cloud(path: &Path) -> Result<PointCloud> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let ply = read_ply(&mut BufReader::new(file))?;
    let normals = ply.normals.ok_or(Error::MissingNormals)?;
    PointCloud::new(ply.positions, normals)
}

/// Loads a fitting target: a PLY with normals and no faces is a cloud,
/// anything else a mesh.
pub fn load_target(path: &Path, allow_nonmanifold: bool) -> Result<Target> {
    let format = MeshFormat::from_path(path)?;
    if format == MeshFormat::Ply {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let ply = read_ply(&mut BufReader::new(file))?;
        if let (Some(normals), true) = (ply.normals, ply.faces.is_empty()) {
            return Ok(Target::Cloud(PointCloud::new(ply.positions, normals)?));
        }
    }
    Ok(Target::Mesh(load_mesh(path, format, allow_nonmanifold)?))
}

/// Writes `mesh`, mapping vertices through `transform.inverse` first when given.
pub fn write_mesh(
    mesh: &TriMesh,
    path: &Path,
    format: MeshFormat,
    transform: Option<&NormalizeTransform>,
) -> Result<()> {
    let vertices: Vec<Vec3> = match transform {
        Some(t) => mesh.vertices().iter().map(|p| t.inverse(p)).collect(),
        None => mesh.vertices().to_vec(),
    };
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res = match format {
        MeshFormat::Obj => write_obj(&mut w, &vertices, mesh.faces()),
        MeshFormat::Ply => write_ply(&mut w, &vertices, None, mesh.faces()),
    };
    res.and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn write_point_cloud(cloud: &PointCloud, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_ply(&mut w, cloud.points(), Some(cloud.normals()), &[])
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn write_obj(w: &mut impl Write, vertices: &[Vec3], faces: &[[usize; 3]]) -> std::io::Result<()> {
    // `{}` on f64 prints the shortest representation that round-trips
    for p in vertices {
        writeln!(w, "v {} {} {}", p.x, p.y, p.z)?;
    }
    for f in faces {
        writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    Ok(())
}

fn write_ply(
    w: &mut impl Write,
    vertices: &[Vec3],
    normals: Option<&[Vec3]>,
    faces: &[[usize; 3]],
) -> std::io::Result<()> {
    writeln!(w, "ply\nformat ascii 1.0")?;
    writeln!(w, "element vertex {}", vertices.len())?;
    writeln!(w, "property double x\nproperty double y\nproperty double z")?;
    if normals.is_some() {
        writeln!(w, "property double nx\nproperty double ny\nproperty double nz")?;
    }
    if !faces.is_empty() {
        writeln!(w, "element face {}", faces.len())?;
        writeln!(w, "property list uchar int vertex_indices")?;
    }
    writeln!(w, "end_header")?;
    for (i, p) in vertices.iter().enumerate() {
        match normals {
            Some(n) => writeln!(w, "{} {} {} {} {} {}", p.x, p.y, p.z, n[i].x, n[i].y, n[i].z)?,
            None => writeln!(w, "{} {} {}", p.x, p.y, p.z)?,
        }
    }
    for f in faces {
        writeln!(w, "3 {} {} {}", f[0], f[1], f[2])?;
    }
    Ok(())
}

fn read_obj(reader: &mut impl BufRead) -> Result<(Vec<Vec3>, Vec<[usize; 3]>)> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut quads_split = 0usize;
    for (ln, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse(format!("line {}: {e}", ln + 1)))?;
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                let mut c = [0.0; 3];
                for x in c.iter_mut() {
                    *x = tok
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| Error::Parse(format!("line {}: bad vertex", ln + 1)))?;
                }
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let mut idx = Vec::with_capacity(4);
                for t in tok {
                    let first = t.split('/').next().unwrap_or("");
                    let i: i64 = first
                        .parse()
                        .map_err(|_| Error::Parse(format!("line {}: bad face index {t:?}", ln + 1)))?;
                    let resolved = match i {
                        0 => {
                            return Err(Error::Parse(format!(
                                "line {}: face index 0 (OBJ indices are 1-based)",
                                ln + 1
                            )))
                        }
                        i if i > 0 => (i - 1) as usize,
                        i => {
                            let back = (-i) as usize;
                            if back > vertices.len() {
                                return Err(Error::Parse(format!(
                                    "line {}: relative index {i} out of range",
                                    ln + 1
                                )));
                            }
                            vertices.len() - back
                        }
                    };
                    idx.push(resolved);
                }
                if idx.len() < 3 {
                    return Err(Error::Parse(format!("line {}: face with fewer than 3 vertices", ln + 1)));
                }
                if idx.len() > 3 {
                    quads_split += 1;
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    if quads_split > 0 {
        log::warn!("fan-triangulated {quads_split} polygon faces");
    }
    if let Some(bad) = faces.iter().flatten().find(|&&i| i >= vertices.len()) {
        return Err(Error::Parse(format!("face index {} out of range", bad + 1)));
    }
    Ok((vertices, faces))
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return Err(Error::Parse(format!("unknown PLY type {s:?}"))),
        })
    }

    fn read_le(self, r: &mut dyn Read) -> Result<f64> {
        macro_rules! rd {
            ($t:ty) => {{
                let mut b = [0u8; std::mem::size_of::<$t>()];
                r.read_exact(&mut b)
                    .map_err(|e| Error::Parse(format!("truncated binary PLY: {e}")))?;
                <$t>::from_le_bytes(b) as f64
            }};
        }
        Ok(match self {
            Scalar::I8 => rd!(i8),
            Scalar::U8 => rd!(u8),
            Scalar::I16 => rd!(i16),
            Scalar::U16 => rd!(u16),
            Scalar::I32 => rd!(i32),
            Scalar::U32 => rd!(u32),
            Scalar::F32 => rd!(f32),
            Scalar::F64 => rd!(f64),
        })
    }
}

#[derive(Debug)]
enum Property {
    Scalar(String, Scalar),
    List(String, Scalar, Scalar),
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

struct PlyData {
    positions: Vec<Vec3>,
    normals: Option<Vec<Vec3>>,
    faces: Vec<[usize; 3]>,
}

fn read_ply(reader: &mut impl BufRead) -> Result<PlyData> {
    let mut line = String::new();
    let mut next_line = |reader: &mut dyn BufRead| -> Result<String> {
        line.clear();
        let n = reader
            .read_line(&mut line)
            .map_err(|e| Error::Parse(format!("PLY header: {e}")))?;
        if n == 0 {
            return Err(Error::Parse("unexpected end of PLY header".into()));
        }
        Ok(line.trim().to_string())
    };
    if next_line(reader)? != "ply" {
        return Err(Error::Parse("missing 'ply' magic".into()));
    }
    let mut binary = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let l = next_line(reader)?;
        let tok: Vec<&str> = l.split_whitespace().collect();
        match tok.as_slice() {
            ["format", "ascii", _] => binary = Some(false),
            ["format", "binary_little_endian", _] => binary = Some(true),
            ["format", other, _] => {
                return Err(Error::Parse(format!("unsupported PLY format {other}")))
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad element count {count:?}")))?,
                props: Vec::new(),
            }),
            ["property", "list", ct, it, name] => elements
                .last_mut()
                .ok_or_else(|| Error::Parse("property before element".into()))?
                .props
                .push(Property::List(name.to_string(), Scalar::parse(ct)?, Scalar::parse(it)?)),
            ["property", ty, name] => elements
                .last_mut()
                .ok_or_else(|| Error::Parse("property before element".into()))?
                .props
                .push(Property::Scalar(name.to_string(), Scalar::parse(ty)?)),
            ["end_header"] => break,
            _ => return Err(Error::Parse(format!("bad PLY header line {l:?}"))),
        }
    }
    let binary = binary.ok_or_else(|| Error::Parse("PLY header has no format line".into()))?;

    let mut positions = Vec::new();
    let mut normals = Vec::new();
    let mut has_normals = false;
    let mut faces = Vec::new();

    let mut ascii_tokens: Vec<String> = Vec::new();
    let mut ascii_pos = 0usize;
    if !binary {
        let mut rest = String::new();
        reader
            .read_to_string(&mut rest)
            .map_err(|e| Error::Parse(format!("PLY body: {e}")))?;
        ascii_tokens = rest.split_whitespace().map(str::to_string).collect();
    }
    let mut read_value = |reader: &mut dyn BufRead, ty: Scalar| -> Result<f64> {
        if binary {
            ty.read_le(&mut *reader)
        } else {
            let t = ascii_tokens
                .get(ascii_pos)
                .ok_or_else(|| Error::Parse("truncated ASCII PLY body".into()))?;
            ascii_pos += 1;
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad PLY value {t:?}")))
        }
    };

    for el in &elements {
        let is_vertex = el.name == "vertex";
        let is_face = el.name == "face";
        let slot = |name: &str| -> Option<usize> {
            ["x", "y", "z", "nx", "ny", "nz"].iter().position(|&n| n == name)
        };
        if is_vertex {
            let names: Vec<&str> = el
                .props
                .iter()
                .filter_map(|p| match p {
                    Property::Scalar(n, _) => Some(n.as_str()),
                    _ => None,
                })
                .collect();
            for req in ["x", "y", "z"] {
                if !names.contains(&req) {
                    return Err(Error::Parse(format!("vertex element lacks property {req}")));
                }
            }
            has_normals = ["nx", "ny", "nz"].iter().all(|n| names.contains(n));
        }
        for _ in 0..el.count {
            let mut vals = [0.0f64; 6];
            for p in &el.props {
                match p {
                    Property::Scalar(name, ty) => {
                        let v = read_value(reader, *ty)?;
                        if is_vertex {
                            if let Some(s) = slot(name) {
                                vals[s] = v;
                            }
                        }
                    }
                    Property::List(name, ct, it) => {
                        let n = read_value(reader, *ct)? as usize;
                        let mut idx = Vec::with_capacity(n);
                        for _ in 0..n {
                            idx.push(read_value(reader, *it)?);
                        }
                        if is_face && (name == "vertex_indices" || name == "vertex_index") {
                            if n < 3 {
                                return Err(Error::Parse("PLY face with fewer than 3 vertices".into()));
                            }
                            let idx: Vec<usize> = idx
                                .into_iter()
                                .map(|x| {
                                    if x < 0.0 {
                                        Err(Error::Parse("negative PLY face index".into()))
                                    } else {
                                        Ok(x as usize)
                                    }
                                })
                                .collect::<Result<_>>()?;
                            for k in 1..n - 1 {
                                faces.push([idx[0], idx[k], idx[k + 1]]);
                            }
                        }
                    }
                }
            }
            if is_vertex {
                positions.push(Vec3::new(vals[0], vals[1], vals[2]));
                normals.push(Vec3::new(vals[3], vals[4], vals[5]));
            }
        }
    }
    if let Some(bad) = faces.iter().flatten().find(|&&i| i >= positions.len()) {
        return Err(Error::Parse(format!("PLY face index {bad} out of range")));
    }
    Ok(PlyData {
        positions,
        normals: has_normals.then_some(normals),
        faces,
    })
}
