//! OFF, OBJ and ASCII PLY readers for meshes; XYZ and vertex-only PLY for
//! point clouds. Vertex indices are 0-based after loading regardless of
//! the file convention. Polygonal faces are fan-triangulated.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{Point, PointCloud, TriMesh};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
    Ply,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "off" => Some(MeshFormat::Off),
            "obj" => Some(MeshFormat::Obj),
            "ply" => Some(MeshFormat::Ply),
            _ => None,
        }
    }
}

struct RawMesh {
    vertices: Vec<Point>,
    faces: Vec<Vec<usize>>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Loads a triangle mesh. The format is taken from `format` or, if absent,
/// from the file extension.
pub fn load_mesh(path: impl AsRef<Path>, format: Option<MeshFormat>) -> Result<TriMesh> {
    let path = path.as_ref();
    let format = format
        .or_else(|| MeshFormat::from_path(path))
        .ok_or_else(|| parse_err(path, 0, "unknown mesh format (expected .off, .obj or .ply)"))?;
    let text = read(path)?;
    parse_mesh(&text, format, path)
}

/// Parses mesh text; `origin` is only used in error messages.
pub fn parse_mesh(text: &str, format: MeshFormat, origin: &Path) -> Result<TriMesh> {
    let raw = match format {
        MeshFormat::Off => parse_off(text, origin)?,
        MeshFormat::Obj => parse_obj(text, origin)?,
        MeshFormat::Ply => parse_ply(text, origin)?,
    };
    let mut triangles = Vec::new();
    for f in &raw.faces {
        for k in 1..f.len() - 1 {
            triangles.push([f[0], f[k], f[k + 1]]);
        }
    }
    TriMesh::new(raw.vertices, triangles)
}

/// Data lines with comments stripped, paired with 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn parse_f64(tok: Option<&str>, path: &Path, line: usize) -> Result<f64> {
    tok.ok_or_else(|| parse_err(path, line, "missing coordinate"))?
        .parse::<f64>()
        .map_err(|e| parse_err(path, line, e.to_string()))
}

fn parse_usize(tok: Option<&str>, path: &Path, line: usize) -> Result<usize> {
    tok.ok_or_else(|| parse_err(path, line, "missing integer"))?
        .parse::<usize>()
        .map_err(|e| parse_err(path, line, e.to_string()))
}

fn parse_off(text: &str, path: &Path) -> Result<RawMesh> {
    let mut lines = data_lines(text);
    let (ln, first) = lines
        .next()
        .ok_or_else(|| parse_err(path, 0, "empty file"))?;
    let mut toks: Vec<&str> = first.split_whitespace().collect();
    if !toks[0].ends_with("OFF") {
        return Err(parse_err(path, ln, "missing OFF header"));
    }
    toks.remove(0);
    let (ln, counts) = if toks.is_empty() {
        let (l, s) = lines
            .next()
            .ok_or_else(|| parse_err(path, ln, "missing counts"))?;
        (l, s.split_whitespace().collect::<Vec<_>>())
    } else {
        (ln, toks)
    };
    let nv = parse_usize(counts.first().copied(), path, ln)?;
    let nf = parse_usize(counts.get(1).copied(), path, ln)?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (l, s) = lines
            .next()
            .ok_or_else(|| parse_err(path, ln, "truncated vertex list"))?;
        let mut it = s.split_whitespace();
        vertices.push(Point::new(
            parse_f64(it.next(), path, l)?,
            parse_f64(it.next(), path, l)?,
            parse_f64(it.next(), path, l)?,
        ));
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (l, s) = lines
            .next()
            .ok_or_else(|| parse_err(path, ln, "truncated face list"))?;
        let mut it = s.split_whitespace();
        let k = parse_usize(it.next(), path, l)?;
        if k < 3 {
            return Err(parse_err(path, l, "face with fewer than 3 vertices"));
        }
        let f = (0..k)
            .map(|_| parse_usize(it.next(), path, l))
            .collect::<Result<Vec<_>>>()?;
        faces.push(f);
    }
    Ok(RawMesh { vertices, faces })
}

fn parse_obj(text: &str, path: &Path) -> Result<RawMesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (l, s) in data_lines(text) {
        let mut it = s.split_whitespace();
        match it.next() {
            Some("v") => vertices.push(Point::new(
                parse_f64(it.next(), path, l)?,
                parse_f64(it.next(), path, l)?,
                parse_f64(it.next(), path, l)?,
            )),
            Some("f") => {
                let mut f = Vec::new();
                for tok in it {
                    let idx: i64 =
                        tok.split('/').next().unwrap_or("").parse().map_err(
                            |e: std::num::ParseIntError| parse_err(path, l, e.to_string()),
                        )?;
                    // 1-based, negative = relative to the end so far
                    let v = if idx > 0 {
                        idx - 1
                    } else {
                        vertices.len() as i64 + idx
                    };
                    if v < 0 {
                        return Err(parse_err(path, l, "face index out of range"));
                    }
                    f.push(v as usize);
                }
                if f.len() < 3 {
                    return Err(parse_err(path, l, "face with fewer than 3 vertices"));
                }
                faces.push(f);
            }
            _ => {}
        }
    }
    Ok(RawMesh { vertices, faces })
}

struct PlyElement {
    name: String,
    count: usize,
    props: Vec<String>,
}

fn parse_ply(text: &str, path: &Path) -> Result<RawMesh> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(parse_err(path, 1, "missing ply magic")),
    }
    let mut elements: Vec<PlyElement> = Vec::new();
    loop {
        let (l, s) = lines
            .next()
            .ok_or_else(|| parse_err(path, 0, "unterminated header"))?;
        let toks: Vec<&str> = s.split_whitespace().collect();
        match toks.first().copied() {
            Some("format") => {
                if toks.get(1) != Some(&"ascii") {
                    return Err(parse_err(path, l, "only ascii PLY is supported"));
                }
            }
            Some("element") => elements.push(PlyElement {
                name: toks.get(1).unwrap_or(&"").to_string(),
                count: parse_usize(toks.get(2).copied(), path, l)?,
                props: Vec::new(),
            }),
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(path, l, "property before element"))?;
                el.props.push(toks.last().unwrap_or(&"").to_string());
            }
            Some("end_header") => break,
            _ => {}
        }
    }

    let mut body = lines.filter(|(_, s)| !s.is_empty());
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for el in &elements {
        for _ in 0..el.count {
            let (l, s) = body
                .next()
                .ok_or_else(|| parse_err(path, 0, "truncated body"))?;
            let toks: Vec<&str> = s.split_whitespace().collect();
            match el.name.as_str() {
                "vertex" => {
                    let pos = |name: &str| -> Result<f64> {
                        let i =
                            el.props.iter().position(|p| p == name).ok_or_else(|| {
                                parse_err(path, l, format!("vertex has no {name}"))
                            })?;
                        parse_f64(toks.get(i).copied(), path, l)
                    };
                    vertices.push(Point::new(pos("x")?, pos("y")?, pos("z")?));
                }
                "face" => {
                    let k = parse_usize(toks.first().copied(), path, l)?;
                    if k < 3 || toks.len() < k + 1 {
                        return Err(parse_err(path, l, "bad face record"));
                    }
                    faces.push(
                        (1..=k)
                            .map(|i| parse_usize(toks.get(i).copied(), path, l))
                            .collect::<Result<Vec<_>>>()?,
                    );
                }
                _ => {}
            }
        }
    }
    Ok(RawMesh { vertices, faces })
}

/// Loads a point cloud from XYZ text (one `x y z` per line) or from the
/// vertices of a PLY, OFF or OBJ file (faces are ignored).
pub fn load_cloud(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let text = read(path)?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let points = match ext.as_str() {
        "ply" => parse_ply(&text, path)?.vertices,
        "off" => parse_off(&text, path)?.vertices,
        "obj" => parse_obj(&text, path)?.vertices,
        _ => {
            let mut pts = Vec::new();
            for (l, s) in data_lines(&text) {
                let mut it = s
                    .split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|t| !t.is_empty());
                pts.push(Point::new(
                    parse_f64(it.next(), path, l)?,
                    parse_f64(it.next(), path, l)?,
                    parse_f64(it.next(), path, l)?,
                ));
            }
            pts
        }
    };
    PointCloud::new(points)
}

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn off_string(mesh: &TriMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "OFF\n{} {} 0", mesh.n_vertices(), mesh.triangles().len());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{} {} {}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.z));
    }
    for t in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    s
}

pub fn write_off(path: impl AsRef<Path>, mesh: &TriMesh) -> Result<()> {
    write_text(path, &off_string(mesh))
}

pub fn write_xyz(path: impl AsRef<Path>, cloud: &PointCloud) -> Result<()> {
    let mut s = String::new();
    for p in cloud.points() {
        let _ = writeln!(s, "{} {} {}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.z));
    }
    write_text(path, &s)
}

pub(crate) fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path: PathBuf = path.as_ref().to_path_buf();
    fs::write(&path, text).map_err(|e| Error::io(path, e))
}
