//! Text mesh format.
//!
//! ```text
//! # fovexpm mesh v1
//! domain square
//! vertices 9
//! 0.0 0.0 1          x y boundary-flag
//! ...
//! triangles 8
//! 0 1 4              zero-based, counterclockwise
//! ...
//! ```
//!
//! Boundary flags are recomputed from the triangles on reading and must agree
//! with the stored ones.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fovexpm_core::fem::{Domain, TriMesh};

use crate::error::{CliError, Result};

pub const MESH_HEADER: &str = "# fovexpm mesh v1";

pub fn format_mesh(mesh: &TriMesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MESH_HEADER}");
    let _ = writeln!(out, "domain {}", mesh.domain);
    let _ = writeln!(out, "vertices {}", mesh.num_vertices());
    for (v, &b) in mesh.vertices.iter().zip(&mesh.boundary) {
        let _ = writeln!(out, "{:.16e} {:.16e} {}", v[0], v[1], u8::from(b));
    }
    let _ = writeln!(out, "triangles {}", mesh.num_triangles());
    for t in &mesh.triangles {
        let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
    }
    out
}

pub fn write_mesh(path: &Path, mesh: &TriMesh) -> Result<()> {
    fs::write(path, format_mesh(mesh)).map_err(|e| CliError::io(path, e))
}

fn header_value<'a>(line: Option<(usize, &'a str)>, name: &str, origin: &Path) -> Result<(usize, &'a str)> {
    let (n, l) = line.ok_or_else(|| CliError::parse(origin, 0, format!("missing '{name}' line")))?;
    let value = l.strip_prefix(name).ok_or_else(|| CliError::parse(origin, n, format!("expected '{name}'")))?;
    Ok((n, value.trim()))
}

pub fn parse_mesh(text: &str, origin: &Path) -> Result<TriMesh> {
    let err = |line: usize, msg: &str| CliError::parse(origin, line, msg);
    let mut lines =
        text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (line, domain) = header_value(lines.next(), "domain", origin)?;
    let domain: Domain = domain.parse().map_err(|_| err(line, "unknown domain"))?;
    let (line, nv) = header_value(lines.next(), "vertices", origin)?;
    let nv: usize = nv.parse().map_err(|_| err(line, "bad vertex count"))?;
    let mut vertices = Vec::with_capacity(nv);
    let mut flags = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, l) = lines.next().ok_or_else(|| err(0, "too few vertices"))?;
        let w: Vec<&str> = l.split_whitespace().collect();
        if w.len() != 3 {
            return Err(err(line, "expected 'x y flag'"));
        }
        let x: f64 = w[0].parse().map_err(|_| err(line, "bad coordinate"))?;
        let y: f64 = w[1].parse().map_err(|_| err(line, "bad coordinate"))?;
        let flag = match w[2] {
            "0" => false,
            "1" => true,
            _ => return Err(err(line, "boundary flag must be 0 or 1")),
        };
        vertices.push([x, y]);
        flags.push(flag);
    }
    let (line, nt) = header_value(lines.next(), "triangles", origin)?;
    let nt: usize = nt.parse().map_err(|_| err(line, "bad triangle count"))?;
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (line, l) = lines.next().ok_or_else(|| err(0, "too few triangles"))?;
        let idx: Vec<usize> = l
            .split_whitespace()
            .map(|w| w.parse().map_err(|_| err(line, "bad vertex index")))
            .collect::<Result<_>>()?;
        let [a, b, c] = idx[..] else {
            return Err(err(line, "expected three vertex indices"));
        };
        triangles.push([a, b, c]);
    }
    if let Some((line, _)) = lines.next() {
        return Err(err(line, "unexpected trailing content"));
    }
    let mesh = TriMesh::new(vertices, triangles, domain)?;
    if mesh.boundary != flags {
        return Err(err(0, "stored boundary flags disagree with the triangulation"));
    }
    Ok(mesh)
}

pub fn read_mesh(path: &Path) -> Result<TriMesh> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_mesh(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fovexpm_core::fem::{mesh_square, mesh_star};

    #[test]
    fn round_trip() {
        for mesh in [mesh_square(4).unwrap(), mesh_star(5, 2.0, 0.8, 1).unwrap()] {
            let back = parse_mesh(&format_mesh(&mesh), Path::new("m.txt")).unwrap();
            assert_eq!(back, mesh);
        }
    }

    #[test]
    fn rejects_inconsistent_flags() {
        let text = format_mesh(&mesh_square(2).unwrap()).replacen(" 1\n", " 0\n", 1);
        assert!(parse_mesh(&text, Path::new("m.txt")).is_err());
        assert!(parse_mesh("domain square\nvertices 1\n0 0 1\n", Path::new("m.txt")).is_err());
    }
}
