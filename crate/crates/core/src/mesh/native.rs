//! Line-oriented native mesh format.
//!
//! ```text
//! resinv-mesh 1 <nodes> <tets> <triangles>
//! v <index> <x> <y> <z>
//! t <index> <a> <b> <c> <d>
//! f <index> <a> <b> <c> <TagName>
//! ```
//! Coordinates are written in shortest round-trip form; normals are
//! recomputed on read. Lines starting with `#` after the header are comments.

use std::io::{self, BufRead, Write};

use super::msh::MshError;
use super::{BoundaryTag, Mesh};

const MAGIC: &str = "resinv-mesh";

pub fn write_native<W: Write>(mesh: &Mesh, mut w: W) -> io::Result<()> {
    writeln!(w, "{MAGIC} 1 {} {} {}", mesh.nodes.len(), mesh.tets.len(), mesh.boundary.len())?;
    for (i, p) in mesh.nodes.iter().enumerate() {
        writeln!(w, "v {i} {:?} {:?} {:?}", p[0], p[1], p[2])?;
    }
    for (i, t) in mesh.tets.iter().enumerate() {
        writeln!(w, "t {i} {} {} {} {}", t[0], t[1], t[2], t[3])?;
    }
    for (i, f) in mesh.boundary.iter().enumerate() {
        writeln!(w, "f {i} {} {} {} {}", f.nodes[0], f.nodes[1], f.nodes[2], f.tag)?;
    }
    Ok(())
}

pub fn to_native_string(mesh: &Mesh) -> String {
    let mut buf = Vec::new();
    write_native(mesh, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn read_native<R: BufRead>(reader: R) -> Result<Mesh, MshError> {
    let err = |line: usize, message: &str| MshError::Parse { line, message: message.to_string() };
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file"))?;
    let header = header?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 5 || h[0] != MAGIC || h[1] != "1" {
        return Err(err(1, "not a resinv-mesh version 1 file"));
    }
    let count = |s: &str| s.parse::<usize>().map_err(|_| err(1, "bad count in header"));
    let (nn, nt, nf) = (count(h[2])?, count(h[3])?, count(h[4])?);
    let mut nodes = Vec::with_capacity(nn);
    let mut tets = Vec::with_capacity(nt);
    let mut tris = Vec::with_capacity(nf);
    for (i, line) in lines {
        let ln = i + 1;
        let line = line?;
        let tok: Vec<&str> = line.split_whitespace().collect();
        if tok.is_empty() || tok[0].starts_with('#') {
            continue;
        }
        let idx = |k: usize| -> Result<usize, MshError> {
            tok.get(k).and_then(|t| t.parse().ok()).ok_or_else(|| err(ln, "expected an index"))
        };
        let expect_seq = |got: usize, want: usize| if got == want { Ok(()) } else { Err(err(ln, "records out of order")) };
        match tok[0] {
            "v" if tok.len() == 5 => {
                expect_seq(idx(1)?, nodes.len())?;
                let mut p = [0.0; 3];
                for c in 0..3 {
                    p[c] = tok[2 + c].parse().map_err(|_| err(ln, "bad coordinate"))?;
                }
                nodes.push(p);
            }
            "t" if tok.len() == 6 => {
                expect_seq(idx(1)?, tets.len())?;
                tets.push([idx(2)?, idx(3)?, idx(4)?, idx(5)?]);
            }
            "f" if tok.len() == 6 => {
                expect_seq(idx(1)?, tris.len())?;
                let tag: BoundaryTag = tok[5].parse().map_err(|e: super::MeshError| err(ln, &e.to_string()))?;
                tris.push(([idx(2)?, idx(3)?, idx(4)?], tag));
            }
            _ => return Err(err(ln, "unrecognized record")),
        }
    }
    if nodes.len() != nn || tets.len() != nt || tris.len() != nf {
        return Err(err(1, "record counts do not match header"));
    }
    Ok(Mesh::from_parts(nodes, tets, tris)?)
}
