//! Plain-text mesh format, 0-based indices:
//!
//! ```text
//! nv nt nb
//! x y marker        (nv lines)
//! i j k             (nt lines)
//! i j marker        (nb lines)
//! ```
//!
//! Tokens are whitespace separated; `#` starts a comment. Floats are written
//! in shortest round-trip form so export/import is bit exact.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{signed_area, Mesh};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum MeshWarning {
    /// A clockwise triangle was repaired by swapping its last two vertices.
    Reoriented { triangle: usize, line: usize },
}

impl std::fmt::Display for MeshWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeshWarning::Reoriented { triangle, line } => {
                write!(f, "line {line}: triangle {triangle} was clockwise, reoriented")
            }
        }
    }
}

/// Serialize to the text format. Periodic identification is not stored.
pub fn write_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", mesh.n_vertices(), mesh.n_triangles(), mesh.boundary_edges.len());
    for (p, m) in mesh.vertices.iter().zip(&mesh.vertex_markers) {
        let _ = writeln!(out, "{:?} {:?} {}", p[0], p[1], m);
    }
    for t in &mesh.triangles {
        let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
    }
    for e in &mesh.boundary_edges {
        let _ = writeln!(out, "{} {} {}", e.vertices[0], e.vertices[1], e.marker);
    }
    out
}

pub fn export_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_mesh(mesh))?;
    Ok(())
}

/// Read a mesh file, logging any orientation repairs.
pub fn import_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let (mesh, warnings) = parse_mesh(&text, path)?;
    for w in warnings {
        log::warn!("{}: {w}", path.display());
    }
    Ok(mesh)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
    path: &'a Path,
}

impl<'a> Lines<'a> {
    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse { path: PathBuf::from(self.path), line, msg: msg.into() }
    }

    /// Next non-empty record as (1-based line number, tokens).
    fn next_record(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        for (i, raw) in self.inner.by_ref() {
            self.last = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = content.split_whitespace().collect();
            if !tokens.is_empty() {
                return Ok((i + 1, tokens));
            }
        }
        Err(self.err(self.last + 1, format!("unexpected end of file, expected {what}")))
    }

    fn parse<T: std::str::FromStr>(&self, line: usize, tok: &str, what: &str) -> Result<T> {
        tok.parse().map_err(|_| self.err(line, format!("malformed {what} `{tok}`")))
    }
}

pub fn parse_mesh(text: &str, path: &Path) -> Result<(Mesh, Vec<MeshWarning>)> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0, path };

    let (line, tok) = lines.next_record("header `nv nt nb`")?;
    if tok.len() != 3 {
        return Err(lines.err(line, "header must be `nv nt nb`"));
    }
    let nv: usize = lines.parse(line, tok[0], "vertex count")?;
    let nt: usize = lines.parse(line, tok[1], "triangle count")?;
    let nb: usize = lines.parse(line, tok[2], "boundary edge count")?;

    let mut vertices = Vec::with_capacity(nv);
    let mut vertex_markers = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, tok) = lines.next_record("vertex `x y marker`")?;
        if tok.len() != 3 {
            return Err(lines.err(line, "vertex line must be `x y marker`"));
        }
        let x: f64 = lines.parse(line, tok[0], "coordinate")?;
        let y: f64 = lines.parse(line, tok[1], "coordinate")?;
        vertex_markers.push(lines.parse(line, tok[2], "marker")?);
        vertices.push([x, y]);
    }

    let mut warnings = Vec::new();
    let mut triangles = Vec::with_capacity(nt);
    for t in 0..nt {
        let (line, tok) = lines.next_record("triangle `i j k`")?;
        if tok.len() != 3 {
            return Err(lines.err(line, "triangle line must be `i j k`"));
        }
        let mut tri = [0usize; 3];
        for (slot, s) in tri.iter_mut().zip(&tok) {
            *slot = lines.parse(line, s, "vertex index")?;
            if *slot >= nv {
                return Err(lines.err(line, format!("vertex index {slot} out of range (nv = {nv})")));
            }
        }
        let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
        if area == 0.0 {
            return Err(lines.err(line, "degenerate triangle"));
        }
        if area < 0.0 {
            tri.swap(1, 2);
            warnings.push(MeshWarning::Reoriented { triangle: t, line });
        }
        triangles.push(tri);
    }

    let mut bmarkers = HashMap::new();
    for _ in 0..nb {
        let (line, tok) = lines.next_record("boundary edge `i j marker`")?;
        if tok.len() != 3 {
            return Err(lines.err(line, "boundary edge line must be `i j marker`"));
        }
        let i: usize = lines.parse(line, tok[0], "vertex index")?;
        let j: usize = lines.parse(line, tok[1], "vertex index")?;
        if i >= nv || j >= nv {
            return Err(lines.err(line, "boundary edge vertex index out of range"));
        }
        let m: i32 = lines.parse(line, tok[2], "marker")?;
        bmarkers.insert((i.min(j), i.max(j)), m);
    }
    if let Ok((line, _)) = lines.next_record("") {
        return Err(lines.err(line, "trailing data after declared records"));
    }

    let mesh = Mesh::from_parts(vertices, vertex_markers, triangles, None, &bmarkers)
        .map_err(|e| lines.err(0, e.to_string()))?;
    Ok((mesh, warnings))
}
