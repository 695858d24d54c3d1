//! Plain-text mesh format.
//!
//! ```text
//! vertices N
//! x y            (N lines)
//! elements M
//! v0 v1 v2       (M lines, counterclockwise)
//! boundary K
//! v0 v1 tag      (K lines; tag in dirichlet, inflow, outflow, wall)
//! periodic P     (optional)
//! master slave   (P lines of facet indices)
//! ```
//!
//! `#` starts a comment. Facet indices follow the canonical numbering: first
//! appearance over elements in order, then local facets `0, 1, 2`.

use std::fmt::Write as _;
use std::path::Path;

use super::{BoundaryTag, Mesh};
use crate::error::{Error, Result};

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let text = std::fs::read_to_string(path)?;
    read_mesh_str(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-empty line with comments stripped, as (1-based line number, tokens).
    fn next_tokens(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            let content = line.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = content.split_whitespace().collect();
            if !tokens.is_empty() {
                return Some((i + 1, tokens));
            }
        }
        None
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(line: usize, tok: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("cannot parse number `{tok}`")))
}

fn header(lines: &mut Lines<'_>, name: &str) -> Result<usize> {
    let (line, toks) = lines
        .next_tokens()
        .ok_or_else(|| parse_err(0, format!("missing `{name}` section")))?;
    if toks.len() != 2 || toks[0] != name {
        return Err(parse_err(line, format!("expected `{name} <count>`")));
    }
    num(line, toks[1])
}

fn row<'a>(lines: &mut Lines<'a>, len: usize, what: &str) -> Result<(usize, Vec<&'a str>)> {
    let (line, toks) = lines
        .next_tokens()
        .ok_or_else(|| parse_err(0, format!("file ends inside the {what} section")))?;
    if toks.len() != len {
        return Err(parse_err(line, format!("expected {len} fields in {what} row")));
    }
    Ok((line, toks))
}

pub fn read_mesh_str(text: &str) -> Result<Mesh> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let nv = header(&mut lines, "vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, t) = row(&mut lines, 2, "vertices")?;
        vertices.push([num(line, t[0])?, num(line, t[1])?]);
    }
    let ne = header(&mut lines, "elements")?;
    let mut elements = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (line, t) = row(&mut lines, 3, "elements")?;
        elements.push([num(line, t[0])?, num(line, t[1])?, num(line, t[2])?]);
    }
    let nb = header(&mut lines, "boundary")?;
    let mut boundary = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (line, t) = row(&mut lines, 3, "boundary")?;
        let tag = BoundaryTag::parse(t[2]).ok_or_else(|| parse_err(line, format!("unknown tag `{}`", t[2])))?;
        boundary.push((num(line, t[0])?, num(line, t[1])?, tag));
    }
    let mut periodic = Vec::new();
    if let Some((line, toks)) = lines.next_tokens() {
        if toks.len() != 2 || toks[0] != "periodic" {
            return Err(parse_err(line, "expected `periodic <count>` or end of file"));
        }
        let np: usize = num(line, toks[1])?;
        for _ in 0..np {
            let (line, t) = row(&mut lines, 2, "periodic")?;
            periodic.push((num(line, t[0])?, num(line, t[1])?));
        }
        if let Some((line, _)) = lines.next_tokens() {
            return Err(parse_err(line, "trailing content"));
        }
    }
    Mesh::from_parts(vertices, elements, &boundary, &periodic)
}

/// Canonical text form; `read_mesh_str(write_mesh_string(m)) == m`.
pub fn write_mesh_string(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "vertices {}", mesh.vertices.len());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{} {}", v[0], v[1]);
    }
    let _ = writeln!(s, "elements {}", mesh.elements.len());
    for e in &mesh.elements {
        let _ = writeln!(s, "{} {} {}", e[0], e[1], e[2]);
    }
    let tagged: Vec<_> = mesh
        .facets
        .iter()
        .filter(|f| !f.is_interior() && !matches!(f.tag, BoundaryTag::PeriodicMaster | BoundaryTag::PeriodicSlave))
        .collect();
    let _ = writeln!(s, "boundary {}", tagged.len());
    for f in tagged {
        let _ = writeln!(s, "{} {} {}", f.vertices[0], f.vertices[1], f.tag);
    }
    if !mesh.periodic_pairs.is_empty() {
        let _ = writeln!(s, "periodic {}", mesh.periodic_pairs.len());
        for (m, sl) in &mesh.periodic_pairs {
            let _ = writeln!(s, "{m} {sl}");
        }
    }
    s
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_mesh_string(mesh))?;
    Ok(())
}
