//! Matrix Market coordinate format (real, general or symmetric).

use std::io::{BufRead, Write};

use crate::error::{BiotError, Result};
use crate::la::sparse::{SparseMatrix, TripletBuilder};

/// Writes `a` in coordinate form. With `symmetric`, only the lower triangle
/// is written and the header says so; the caller is responsible for `a`
/// actually being symmetric.
pub fn write_matrix_market<W: Write>(mut w: W, a: &SparseMatrix, symmetric: bool) -> Result<()> {
    let kind = if symmetric { "symmetric" } else { "general" };
    writeln!(w, "%%MatrixMarket matrix coordinate real {kind}")?;
    let keep = |i: usize, j: usize| !symmetric || j <= i;
    let mut nnz = 0;
    for i in 0..a.nrows() {
        nnz += a.row(i).0.iter().filter(|&&j| keep(i, j)).count();
    }
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), nnz)?;
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if keep(i, j) {
                writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
            }
        }
    }
    Ok(())
}

/// Reads a coordinate real matrix. Symmetric files are expanded to both
/// triangles.
pub fn read_matrix_market<R: BufRead>(r: R) -> Result<SparseMatrix> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| BiotError::Parse("empty Matrix Market file".into()))??;
    let h: Vec<String> = header.split_whitespace().map(|s| s.to_ascii_lowercase()).collect();
    if h.len() < 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" {
        return Err(BiotError::Parse(format!("bad header: {header}")));
    }
    if h[2] != "coordinate" {
        return Err(BiotError::Parse(format!("unsupported format {}", h[2])));
    }
    if h[3] != "real" && h[3] != "integer" {
        return Err(BiotError::Parse(format!("unsupported field {}", h[3])));
    }
    let symmetric = match h[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(BiotError::Parse(format!("unsupported symmetry {other}"))),
    };

    let mut size_line = None;
    for line in lines.by_ref() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        size_line = Some(t.to_string());
        break;
    }
    let size_line = size_line.ok_or_else(|| BiotError::Parse("missing size line".into()))?;
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| BiotError::Parse(format!("bad size line: {size_line}"))))
        .collect::<Result<_>>()?;
    if dims.len() != 3 {
        return Err(BiotError::Parse(format!("bad size line: {size_line}")));
    }
    let (m, n, nnz) = (dims[0], dims[1], dims[2]);
    let mut t = TripletBuilder::with_capacity(m, n, if symmetric { 2 * nnz } else { nnz });
    let mut seen = 0;
    for line in lines {
        let line = line?;
        let tl = line.trim();
        if tl.is_empty() || tl.starts_with('%') {
            continue;
        }
        let mut it = tl.split_whitespace();
        let parse_idx = |s: Option<&str>| -> Result<usize> {
            s.and_then(|s| s.parse::<usize>().ok())
                .filter(|&v| v >= 1)
                .ok_or_else(|| BiotError::Parse(format!("bad entry: {tl}")))
        };
        let i = parse_idx(it.next())? - 1;
        let j = parse_idx(it.next())? - 1;
        let v: f64 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| BiotError::Parse(format!("bad entry: {tl}")))?;
        if i >= m || j >= n {
            return Err(BiotError::Parse(format!("entry ({}, {}) out of range", i + 1, j + 1)));
        }
        t.push(i, j, v);
        if symmetric && i != j {
            t.push(j, i, v);
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(BiotError::Parse(format!("expected {nnz} entries, found {seen}")));
    }
    Ok(t.build())
}
