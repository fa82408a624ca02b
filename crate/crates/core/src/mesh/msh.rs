//! Gmsh MSH ASCII 2.2 reader and writer.
//!
//! Only triangles (type 2) and linear tetrahedra (type 4) carry mesh data.
//! Points (15) and lines (1) are skipped; any other element type is rejected.
//! The first element tag is the physical group, mapped onto a
//! [`BoundaryTag`] by a [`TagDictionary`]. Normals stored nowhere in the file
//! are recomputed from the owning tetrahedra.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::{BoundaryTag, Mesh, MeshError};

#[derive(Debug, Error)]
pub enum MshError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported MSH format version `{0}` (expected 2.2 ASCII)")]
    UnsupportedVersion(String),
    #[error("line {line}: unknown physical tag {tag} on a triangle")]
    UnknownPhysicalTag { line: usize, tag: i64 },
    #[error("line {line}: element type {type_id} ({name}) is not supported; only 4-node tetrahedra are accepted as volume elements")]
    UnsupportedElement { line: usize, type_id: u32, name: &'static str },
    #[error("element references undefined node {0}")]
    UndefinedNode(i64),
    #[error("missing section ${0}")]
    MissingSection(&'static str),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Physical-group ids for each boundary tag, plus the id written on volume
/// elements.
#[derive(Debug, Clone, PartialEq)]
pub struct TagDictionary {
    pub surfaces: HashMap<i64, BoundaryTag>,
    pub volume: i64,
}

impl Default for TagDictionary {
    fn default() -> Self {
        let surfaces = HashMap::from([
            (1, BoundaryTag::ClampedBase),
            (2, BoundaryTag::FreeWall),
            (3, BoundaryTag::ObservationSurface),
            (4, BoundaryTag::ReservoirWall),
        ]);
        TagDictionary { surfaces, volume: 10 }
    }
}

impl TagDictionary {
    fn physical_of(&self, tag: BoundaryTag) -> i64 {
        // smallest id mapping onto the tag keeps output deterministic
        self.surfaces.iter().filter(|(_, &t)| t == tag).map(|(&k, _)| k).min().unwrap_or(0)
    }
}

fn element_name(t: u32) -> &'static str {
    match t {
        1 => "line",
        2 => "triangle",
        3 => "quadrangle",
        4 => "tetrahedron",
        5 => "hexahedron",
        6 => "prism",
        7 => "pyramid",
        8 => "second-order line",
        9 => "second-order triangle",
        11 => "second-order tetrahedron",
        15 => "point",
        _ => "unknown",
    }
}

struct Lines<R> {
    inner: R,
    line: usize,
    buf: String,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<Option<&str>, MshError> {
        self.buf.clear();
        if self.inner.read_line(&mut self.buf)? == 0 {
            return Ok(None);
        }
        self.line += 1;
        Ok(Some(self.buf.trim()))
    }

    fn expect(&mut self, what: &str) -> Result<String, MshError> {
        let line = self.line + 1;
        self.next()?
            .map(str::to_string)
            .ok_or_else(|| MshError::Parse { line, message: format!("unexpected end of file, expected {what}") })
    }

    fn err(&self, message: impl Into<String>) -> MshError {
        MshError::Parse { line: self.line, message: message.into() }
    }
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, MshError> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| MshError::Parse { line, message: format!("expected {what}") })
}

/// Reads an MSH 2.2 ASCII mesh.
pub fn import_msh<R: BufRead>(reader: R, dict: &TagDictionary) -> Result<Mesh, MshError> {
    let mut lines = Lines { inner: reader, line: 0, buf: String::new() };
    let mut node_ids: HashMap<i64, usize> = HashMap::new();
    let mut nodes = Vec::new();
    let mut tets = Vec::new();
    let mut tris = Vec::new();
    let mut seen_format = false;
    let mut seen_nodes = false;
    let mut seen_elements = false;

    while let Some(l) = lines.next()? {
        let l = l.to_string();
        match l.as_str() {
            "" => continue,
            "$MeshFormat" => {
                let v = lines.expect("format line")?;
                let mut it = v.split_whitespace();
                let version = it.next().unwrap_or("");
                let file_type = it.next().unwrap_or("");
                if version != "2.2" || file_type != "0" {
                    return Err(MshError::UnsupportedVersion(v.clone()));
                }
                seen_format = true;
                skip_to_end(&mut lines, "$EndMeshFormat")?;
            }
            "$Nodes" => {
                let count: usize = parse_num(lines.expect("node count")?.split_whitespace().next(), lines.line, "node count")?;
                for _ in 0..count {
                    let l = lines.expect("node line")?;
                    let mut it = l.split_whitespace();
                    let ln = lines.line;
                    let id: i64 = parse_num(it.next(), ln, "node id")?;
                    let x: f64 = parse_num(it.next(), ln, "x coordinate")?;
                    let y: f64 = parse_num(it.next(), ln, "y coordinate")?;
                    let z: f64 = parse_num(it.next(), ln, "z coordinate")?;
                    node_ids.insert(id, nodes.len());
                    nodes.push([x, y, z]);
                }
                seen_nodes = true;
                skip_to_end(&mut lines, "$EndNodes")?;
            }
            "$Elements" => {
                let count: usize =
                    parse_num(lines.expect("element count")?.split_whitespace().next(), lines.line, "element count")?;
                for _ in 0..count {
                    let l = lines.expect("element line")?;
                    let ln = lines.line;
                    let fields: Vec<i64> = l
                        .split_whitespace()
                        .map(|t| t.parse::<i64>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| lines.err("element line must contain integers only"))?;
                    if fields.len() < 3 {
                        return Err(lines.err("truncated element line"));
                    }
                    let type_id = fields[1] as u32;
                    let ntags = fields[2] as usize;
                    let physical = if ntags > 0 { fields.get(3).copied().unwrap_or(0) } else { 0 };
                    let conn = fields.get(3 + ntags..).unwrap_or(&[]);
                    let resolve = |ids: &[i64]| -> Result<Vec<usize>, MshError> {
                        ids.iter().map(|id| node_ids.get(id).copied().ok_or(MshError::UndefinedNode(*id))).collect()
                    };
                    match type_id {
                        1 | 15 => {}
                        2 => {
                            if conn.len() != 3 {
                                return Err(lines.err("triangle needs 3 nodes"));
                            }
                            let tag = *dict
                                .surfaces
                                .get(&physical)
                                .ok_or(MshError::UnknownPhysicalTag { line: ln, tag: physical })?;
                            let v = resolve(conn)?;
                            tris.push(([v[0], v[1], v[2]], tag));
                        }
                        4 => {
                            if conn.len() != 4 {
                                return Err(lines.err("tetrahedron needs 4 nodes"));
                            }
                            let v = resolve(conn)?;
                            tets.push([v[0], v[1], v[2], v[3]]);
                        }
                        other => {
                            return Err(MshError::UnsupportedElement { line: ln, type_id: other, name: element_name(other) })
                        }
                    }
                }
                seen_elements = true;
                skip_to_end(&mut lines, "$EndElements")?;
            }
            s if s.starts_with('$') && !s.starts_with("$End") => {
                let end = format!("$End{}", &s[1..]);
                skip_to_end(&mut lines, &end)?;
            }
            _ => return Err(lines.err(format!("unexpected content `{l}`"))),
        }
    }
    if !seen_format {
        return Err(MshError::MissingSection("MeshFormat"));
    }
    if !seen_nodes {
        return Err(MshError::MissingSection("Nodes"));
    }
    if !seen_elements {
        return Err(MshError::MissingSection("Elements"));
    }

    // positive orientation, then drop geometry-only points
    for t in &mut tets {
        let [a, b, c, d] = t.map(|v| nodes[v]);
        if super::signed_volume(a, b, c, d) < 0.0 {
            t.swap(2, 3);
        }
    }
    let mut used = vec![false; nodes.len()];
    for &v in tets.iter().flatten() {
        used[v] = true;
    }
    let mut remap = vec![usize::MAX; nodes.len()];
    let mut kept = Vec::with_capacity(nodes.len());
    for (i, p) in nodes.into_iter().enumerate() {
        if used[i] {
            remap[i] = kept.len();
            kept.push(p);
        }
    }
    let tets = tets.into_iter().map(|t| t.map(|v| remap[v])).collect();
    let mut remapped_tris = Vec::with_capacity(tris.len());
    for (t, tag) in tris {
        if t.iter().any(|&v| remap[v] == usize::MAX) {
            return Err(MshError::Mesh(MeshError::TriangleNotAFace { tri: remapped_tris.len(), nodes: t }));
        }
        remapped_tris.push((t.map(|v| remap[v]), tag));
    }
    Ok(Mesh::from_parts(kept, tets, remapped_tris)?)
}

fn skip_to_end<R: BufRead>(lines: &mut Lines<R>, end: &str) -> Result<(), MshError> {
    loop {
        match lines.next()? {
            Some(l) if l == end => return Ok(()),
            Some(_) => continue,
            None => return Err(lines.err(format!("missing {end}"))),
        }
    }
}

/// Writes the mesh as MSH 2.2 ASCII, nodes numbered from 1 in mesh order,
/// triangles first, then tetrahedra.
pub fn write_msh<W: Write>(mesh: &Mesh, dict: &TagDictionary, mut w: W) -> io::Result<()> {
    writeln!(w, "$MeshFormat\n2.2 0 8\n$EndMeshFormat")?;
    writeln!(w, "$Nodes\n{}", mesh.nodes.len())?;
    for (i, p) in mesh.nodes.iter().enumerate() {
        writeln!(w, "{} {:?} {:?} {:?}", i + 1, p[0], p[1], p[2])?;
    }
    writeln!(w, "$EndNodes")?;
    writeln!(w, "$Elements\n{}", mesh.boundary.len() + mesh.tets.len())?;
    let mut id = 1;
    for tri in &mesh.boundary {
        let phys = dict.physical_of(tri.tag);
        let [a, b, c] = tri.nodes.map(|v| v + 1);
        writeln!(w, "{id} 2 2 {phys} {phys} {a} {b} {c}")?;
        id += 1;
    }
    for t in &mesh.tets {
        let [a, b, c, d] = t.map(|v| v + 1);
        writeln!(w, "{id} 4 2 {0} {0} {a} {b} {c} {d}", dict.volume)?;
        id += 1;
    }
    writeln!(w, "$EndElements")
}
