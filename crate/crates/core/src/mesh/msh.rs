//! Gmsh MSH 2.2 ASCII reader.

use std::collections::HashMap;
use std::path::Path;

use super::{Mesh, MeshError, TaggedEdge};

pub fn read_msh(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    let text = std::fs::read_to_string(path)?;
    parse_msh(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            self.last = i + 1;
            let t = l.trim();
            if !t.is_empty() {
                return Some((i + 1, t));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str), MeshError> {
        self.next_line().ok_or_else(|| MeshError::Parse {
            line: self.last + 1,
            msg: format!("unexpected end of file, expected {what}"),
        })
    }
}

fn perr(line: usize, msg: impl Into<String>) -> MeshError {
    MeshError::Parse { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(line: usize, tok: Option<&str>, what: &str) -> Result<T, MeshError> {
    let tok = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| perr(line, format!("cannot parse {what} from '{tok}'")))
}

fn element_name(code: u32) -> &'static str {
    match code {
        3 => "4-node quadrangle",
        4 => "4-node tetrahedron",
        5 => "8-node hexahedron",
        6 => "6-node prism",
        7 => "5-node pyramid",
        8 => "3-node second order line",
        9 => "6-node second order triangle",
        10 => "9-node second order quadrangle",
        11 => "10-node second order tetrahedron",
        16 => "8-node second order quadrangle",
        _ => "unknown element type",
    }
}

/// Parse the text of an MSH 2.2 ASCII file.
///
/// Only 2-node lines, 3-node triangles and 1-node points are accepted; points
/// are ignored. The first element tag is taken as the physical tag.
pub fn parse_msh(text: &str) -> Result<Mesh, MeshError> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
    let mut seen_format = false;
    let mut node_index: HashMap<usize, usize> = HashMap::new();
    let mut nodes: Vec<[f64; 2]> = Vec::new();
    let mut triangles = Vec::new();
    let mut tags = Vec::new();
    let mut raw_edges: Vec<(usize, [usize; 2], i32)> = Vec::new();
    let mut raw_tris: Vec<(usize, [usize; 3], i32)> = Vec::new();

    while let Some((ln, line)) = lines.next_line() {
        match line {
            "$MeshFormat" => {
                let (ln, l) = lines.expect("format line")?;
                let mut it = l.split_whitespace();
                let version: String = num(ln, it.next(), "version")?;
                if !version.starts_with("2.") {
                    return Err(perr(ln, format!("unsupported MSH version {version}, expected 2.2")));
                }
                let file_type: u32 = num(ln, it.next(), "file type")?;
                if file_type != 0 {
                    return Err(perr(ln, "binary MSH files are not supported"));
                }
                close(&mut lines, "$EndMeshFormat")?;
                seen_format = true;
            }
            "$Nodes" => {
                if !seen_format {
                    return Err(perr(ln, "$Nodes before $MeshFormat"));
                }
                let (ln, l) = lines.expect("node count")?;
                let n: usize = num(ln, Some(l), "node count")?;
                nodes.reserve(n);
                for _ in 0..n {
                    let (ln, l) = lines.expect("node record")?;
                    let mut it = l.split_whitespace();
                    let id: usize = num(ln, it.next(), "node id")?;
                    let x: f64 = num(ln, it.next(), "x coordinate")?;
                    let y: f64 = num(ln, it.next(), "y coordinate")?;
                    let z: f64 = num(ln, it.next(), "z coordinate")?;
                    if z.abs() > 1e-12 {
                        return Err(MeshError::NonPlanar { line: ln, node: id, z });
                    }
                    if node_index.insert(id, nodes.len()).is_some() {
                        return Err(perr(ln, format!("duplicate node id {id}")));
                    }
                    nodes.push([x, y]);
                }
                close(&mut lines, "$EndNodes")?;
            }
            "$Elements" => {
                if !seen_format {
                    return Err(perr(ln, "$Elements before $MeshFormat"));
                }
                let (ln, l) = lines.expect("element count")?;
                let n: usize = num(ln, Some(l), "element count")?;
                for _ in 0..n {
                    let (ln, l) = lines.expect("element record")?;
                    let mut it = l.split_whitespace();
                    let _id: usize = num(ln, it.next(), "element id")?;
                    let code: u32 = num(ln, it.next(), "element type")?;
                    let ntags: usize = num(ln, it.next(), "tag count")?;
                    let mut etags = Vec::with_capacity(ntags);
                    for _ in 0..ntags {
                        etags.push(num::<i32>(ln, it.next(), "element tag")?);
                    }
                    let phys = etags.first().copied().unwrap_or(0);
                    let mut ids = Vec::new();
                    for tok in it {
                        ids.push(num::<usize>(ln, Some(tok), "node reference")?);
                    }
                    match code {
                        1 | 2 | 15 => {
                            let want = match code {
                                1 => 2,
                                2 => 3,
                                _ => 1,
                            };
                            if ids.len() != want {
                                return Err(perr(ln, format!("expected {want} nodes, found {}", ids.len())));
                            }
                            if code == 1 {
                                raw_edges.push((ln, [ids[0], ids[1]], phys));
                            } else if code == 2 {
                                raw_tris.push((ln, [ids[0], ids[1], ids[2]], phys));
                            }
                        }
                        _ => {
                            return Err(MeshError::UnsupportedElement {
                                line: ln,
                                code,
                                name: element_name(code),
                            })
                        }
                    }
                }
                close(&mut lines, "$EndElements")?;
            }
            s if s.starts_with('$') && !s.starts_with("$End") => {
                let end = format!("$End{}", &s[1..]);
                loop {
                    let (_, l) = lines.expect(&end)?;
                    if l == end {
                        break;
                    }
                }
            }
            _ => return Err(perr(ln, format!("unexpected content '{line}'"))),
        }
    }
    if !seen_format {
        return Err(perr(lines.last.max(1), "missing $MeshFormat section"));
    }
    let lookup = |ln: usize, id: usize| {
        node_index.get(&id).copied().ok_or_else(|| perr(ln, format!("unknown node id {id}")))
    };
    for (ln, ids, phys) in raw_tris {
        triangles.push([lookup(ln, ids[0])?, lookup(ln, ids[1])?, lookup(ln, ids[2])?]);
        tags.push(phys);
    }
    let mut edges = Vec::with_capacity(raw_edges.len());
    for (ln, ids, phys) in raw_edges {
        edges.push(TaggedEdge { nodes: [lookup(ln, ids[0])?, lookup(ln, ids[1])?], tag: phys });
    }
    Mesh::new(nodes, triangles, tags, edges)
}

fn close(lines: &mut Lines<'_>, end: &str) -> Result<(), MeshError> {
    let (ln, l) = lines.expect(end)?;
    if l != end {
        return Err(perr(ln, format!("expected {end}, found '{l}'")));
    }
    Ok(())
}
