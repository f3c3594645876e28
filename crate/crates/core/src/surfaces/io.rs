use std::fs;
use std::io::Write;
use std::path::Path;

use super::{SurfaceError, TriMesh};
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl MeshFormat {
    /// Guesses the format from the file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "off" => Some(MeshFormat::Off),
            "obj" => Some(MeshFormat::Obj),
            _ => None,
        }
    }
}

pub fn load_mesh(path: &Path, format: MeshFormat, pole: Vec3) -> Result<TriMesh, SurfaceError> {
    let text = fs::read_to_string(path)?;
    let (positions, faces) = match format {
        MeshFormat::Off => parse_off(&text)?,
        MeshFormat::Obj => parse_obj(&text)?,
    };
    TriMesh::new(positions, faces, pole)
}

fn perr(line: usize, message: impl Into<String>) -> SurfaceError {
    SurfaceError::Parse { line, message: message.into() }
}

fn fan(poly: &[usize], line: usize, out: &mut Vec<[usize; 3]>) -> Result<(), SurfaceError> {
    if poly.len() < 3 {
        return Err(perr(line, format!("face with {} vertices", poly.len())));
    }
    for k in 1..poly.len() - 1 {
        out.push([poly[0], poly[k], poly[k + 1]]);
    }
    Ok(())
}

fn number<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, SurfaceError> {
    let tok = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| perr(line, format!("bad {what} `{tok}`")))
}

/// ASCII OFF; polygons are fan-triangulated.
pub fn parse_off(text: &str) -> Result<(Vec<Vec3>, Vec<[usize; 3]>), SurfaceError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (first_no, first) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    let rest = first.strip_prefix("OFF").ok_or_else(|| perr(first_no, "missing OFF header"))?.trim();
    let (count_no, counts) = if rest.is_empty() {
        lines.next().ok_or_else(|| perr(first_no, "missing element counts"))?
    } else {
        (first_no, rest)
    };
    let mut toks = counts.split_whitespace();
    let nv: usize = number(toks.next(), count_no, "vertex count")?;
    let nf: usize = number(toks.next(), count_no, "face count")?;
    let mut positions = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (no, l) = lines.next().ok_or_else(|| perr(count_no, "file ends inside the vertex list"))?;
        let mut t = l.split_whitespace();
        positions.push([
            number(t.next(), no, "coordinate")?,
            number(t.next(), no, "coordinate")?,
            number(t.next(), no, "coordinate")?,
        ]);
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (no, l) = lines.next().ok_or_else(|| perr(count_no, "file ends inside the face list"))?;
        let mut t = l.split_whitespace();
        let k: usize = number(t.next(), no, "face size")?;
        let poly = (0..k)
            .map(|_| {
                let i: usize = number(t.next(), no, "vertex index")?;
                if i >= nv {
                    Err(perr(no, format!("vertex index {i} out of range")))
                } else {
                    Ok(i)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        fan(&poly, no, &mut faces)?;
    }
    Ok((positions, faces))
}

/// ASCII OBJ positions and faces; other statements are ignored.
pub fn parse_obj(text: &str) -> Result<(Vec<Vec3>, Vec<[usize; 3]>), SurfaceError> {
    let mut positions = Vec::new();
    let mut faces = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        let mut t = l.split_whitespace();
        match t.next() {
            Some("v") => positions.push([
                number(t.next(), no, "coordinate")?,
                number(t.next(), no, "coordinate")?,
                number(t.next(), no, "coordinate")?,
            ]),
            Some("f") => {
                let poly = t
                    .map(|tok| {
                        let head = tok.split('/').next().unwrap_or("");
                        let idx: i64 = head.parse().map_err(|_| perr(no, format!("bad vertex reference `{tok}`")))?;
                        let n = positions.len() as i64;
                        let resolved = if idx > 0 { idx - 1 } else { n + idx };
                        if idx == 0 || resolved < 0 || resolved >= n {
                            Err(perr(no, format!("vertex reference {idx} out of range")))
                        } else {
                            Ok(resolved as usize)
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                fan(&poly, no, &mut faces)?;
            }
            _ => {}
        }
    }
    Ok((positions, faces))
}

pub fn write_off(mesh: &TriMesh, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "OFF")?;
    writeln!(out, "{} {} 0", mesh.vertex_count(), mesh.triangles().len())?;
    for p in mesh.positions() {
        writeln!(out, "{} {} {}", p[0], p[1], p[2])?;
    }
    for t in mesh.triangles() {
        writeln!(out, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}
