//! `.tri` text format: first line `nv nf`, then `nf` lines `a b c`
//! (0-based, counterclockwise), LF line endings.

use std::fmt::Write as _;

use super::{Triangulation, TriangulationError};

pub fn write_tri(t: &Triangulation) -> String {
    let mut out = String::with_capacity(16 * t.num_faces() + 16);
    writeln!(out, "{} {}", t.num_vertices(), t.num_faces()).unwrap();
    for [a, b, c] in t.faces() {
        writeln!(out, "{a} {b} {c}").unwrap();
    }
    out
}

pub fn read_tri(text: &str) -> Result<Triangulation, TriangulationError> {
    let parse_err = |line: usize, msg: &str| TriangulationError::Parse(format!("line {line}: {msg}"));
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let nums: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|_| parse_err(hl + 1, "expected `nv nf`"))?;
    let [nv, nf] = nums[..] else {
        return Err(parse_err(hl + 1, "expected `nv nf`"));
    };
    let mut faces = Vec::with_capacity(nf);
    for (i, line) in lines {
        let f: Vec<usize> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| parse_err(i + 1, "expected three vertex indices"))?;
        let [a, b, c] = f[..] else {
            return Err(parse_err(i + 1, "expected three vertex indices"));
        };
        faces.push([a, b, c]);
    }
    if faces.len() != nf {
        return Err(TriangulationError::Parse(format!(
            "header announces {nf} faces, found {}",
            faces.len()
        )));
    }
    Triangulation::with_vertex_count(nv, &faces)
}
