//! ASCII OFF and a minimal OBJ subset (triangles only).

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::mesh::{Point, TriangleMesh};

fn parse_error(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

fn number<T: std::str::FromStr>(token: &str, line: usize) -> Result<T> {
    token
        .parse()
        .map_err(|_| parse_error(line, format!("cannot parse `{token}`")))
}

/// Non-empty lines with `#` comments stripped, numbered from 1.
fn content_lines(reader: impl Read) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (k, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if !body.is_empty() {
            out.push((k + 1, body.to_string()));
        }
    }
    Ok(out)
}

pub fn read_off(reader: impl Read) -> Result<TriangleMesh> {
    let lines = content_lines(reader)?;
    let mut it = lines.iter();
    let (first_no, first) = it.next().ok_or_else(|| parse_error(1, "empty file"))?;
    let mut header = first.split_whitespace();
    if header.next() != Some("OFF") {
        return Err(parse_error(*first_no, "missing OFF header"));
    }
    let rest: Vec<&str> = header.collect();
    let (counts_line, counts): (usize, Vec<&str>) = if rest.is_empty() {
        let (n, l) = it.next().ok_or_else(|| parse_error(*first_no, "missing counts line"))?;
        (*n, l.split_whitespace().collect())
    } else {
        (*first_no, rest)
    };
    if counts.len() < 2 {
        return Err(parse_error(counts_line, "counts line needs vertex and face counts"));
    }
    let nv: usize = number(counts[0], counts_line)?;
    let nf: usize = number(counts[1], counts_line)?;

    let mut vertices: Vec<Point> = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, l) = it.next().ok_or_else(|| parse_error(counts_line, "fewer vertex lines than declared"))?;
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() < 3 {
            return Err(parse_error(*n, "vertex line needs three coordinates"));
        }
        vertices.push([number(t[0], *n)?, number(t[1], *n)?, number(t[2], *n)?]);
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (n, l) = it.next().ok_or_else(|| parse_error(counts_line, "fewer face lines than declared"))?;
        let t: Vec<&str> = l.split_whitespace().collect();
        let arity: usize = number(t[0], *n)?;
        if arity != 3 {
            return Err(parse_error(*n, format!("only triangles are supported, got arity {arity}")));
        }
        if t.len() < 4 {
            return Err(parse_error(*n, "face line needs three vertex indices"));
        }
        faces.push([number(t[1], *n)?, number(t[2], *n)?, number(t[3], *n)?]);
    }
    if let Some((n, _)) = it.next() {
        return Err(parse_error(*n, "trailing data after the declared faces"));
    }
    TriangleMesh::new(vertices, faces)
}

pub fn read_obj(reader: impl Read) -> Result<TriangleMesh> {
    let mut vertices: Vec<Point> = Vec::new();
    let mut faces = Vec::new();
    for (n, l) in content_lines(reader)? {
        let mut t = l.split_whitespace();
        match t.next() {
            Some("v") => {
                let c: Vec<&str> = t.collect();
                if c.len() < 3 {
                    return Err(parse_error(n, "vertex record needs three coordinates"));
                }
                vertices.push([number(c[0], n)?, number(c[1], n)?, number(c[2], n)?]);
            }
            Some("f") => {
                let refs: Vec<&str> = t.collect();
                if refs.len() != 3 {
                    return Err(parse_error(n, format!("only triangles are supported, got {} vertices", refs.len())));
                }
                let mut face = [0usize; 3];
                for (k, r) in refs.iter().enumerate() {
                    let idx: i64 = number(r.split('/').next().unwrap_or(""), n)?;
                    if idx < 1 {
                        return Err(parse_error(n, format!("vertex index {idx}; only positive 1-based indices are supported")));
                    }
                    face[k] = idx as usize - 1;
                }
                faces.push(face);
            }
            _ => {}
        }
    }
    TriangleMesh::new(vertices, faces)
}

/// Loads `.off` or `.obj` by extension.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriangleMesh> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref() {
        Some("obj") => read_obj(file),
        Some("off") => read_off(file),
        _ => Err(Error::InvalidMesh(format!(
            "{}: unknown mesh format (expected .off or .obj)",
            path.display()
        ))),
    }
}

pub fn write_off(mesh: &TriangleMesh, mut w: impl Write) -> Result<()> {
    writeln!(w, "OFF")?;
    writeln!(w, "{} {} {}", mesh.vertex_count(), mesh.face_count(), mesh.edge_count())?;
    for p in mesh.vertices() {
        writeln!(w, "{:?} {:?} {:?}", p[0], p[1], p[2])?;
    }
    for f in mesh.faces() {
        writeln!(w, "3 {} {} {}", f[0], f[1], f[2])?;
    }
    Ok(())
}
