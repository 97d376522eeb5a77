//! Matrix Market coordinate I/O (`real`, `general` or `symmetric`).

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::CsrMatrix;
use crate::error::{AmgError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| AmgError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_matrix_market(&text).map_err(|(line, detail)| AmgError::MatrixMarket {
        path: path.to_path_buf(),
        line,
        detail,
    })
}

/// Parses Matrix Market text. Errors carry the 1-based line number.
pub fn parse_matrix_market(text: &str) -> std::result::Result<CsrMatrix, (usize, String)> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (hline, header) = lines.next().ok_or((1, "empty file".to_string()))?;
    let symmetry = parse_header(header).map_err(|e| (hline, e))?;

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    let mut last_line = hline;
    for (lineno, raw) in lines {
        last_line = lineno;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match size {
            None => {
                if fields.len() != 3 {
                    return Err((lineno, format!("expected `rows cols nnz`, got `{line}`")));
                }
                let parsed: Vec<usize> = fields
                    .iter()
                    .map(|f| f.parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| (lineno, format!("bad size line: {e}")))?;
                let (nr, nc, nnz) = (parsed[0], parsed[1], parsed[2]);
                if symmetry == Symmetry::Symmetric && nr != nc {
                    return Err((lineno, format!("symmetric matrix must be square, got {nr}x{nc}")));
                }
                triplets.reserve(nnz * 2);
                size = Some((nr, nc, nnz));
            }
            Some((nr, nc, nnz)) => {
                if fields.len() != 3 {
                    return Err((lineno, format!("expected `row col value`, got `{line}`")));
                }
                let i: usize = fields[0]
                    .parse()
                    .map_err(|e| (lineno, format!("bad row index: {e}")))?;
                let j: usize = fields[1]
                    .parse()
                    .map_err(|e| (lineno, format!("bad column index: {e}")))?;
                let v: f64 = fields[2]
                    .parse()
                    .map_err(|e| (lineno, format!("bad value: {e}")))?;
                if i == 0 || j == 0 || i > nr || j > nc {
                    return Err((lineno, format!("index ({i}, {j}) out of bounds for {nr}x{nc}")));
                }
                if triplets_read(&triplets, symmetry) >= nnz {
                    return Err((lineno, format!("more than {nnz} entries")));
                }
                triplets.push((i - 1, j - 1, v));
                if symmetry == Symmetry::Symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (nr, nc, nnz) = size.ok_or((last_line, "missing size line".to_string()))?;
    let got = triplets_read(&triplets, symmetry);
    if got != nnz {
        return Err((last_line, format!("expected {nnz} entries, found {got}")));
    }
    CsrMatrix::from_triplets(nr, nc, &triplets).map_err(|e| (last_line, e.to_string()))
}

fn triplets_read(triplets: &[(usize, usize, f64)], symmetry: Symmetry) -> usize {
    match symmetry {
        Symmetry::General => triplets.len(),
        // mirrored off-diagonals were pushed twice
        Symmetry::Symmetric => {
            let off = triplets.iter().filter(|t| t.0 != t.1).count();
            triplets.len() - off / 2
        }
    }
}

fn parse_header(header: &str) -> std::result::Result<Symmetry, String> {
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(format!("malformed header `{header}`"));
    }
    if tokens[1] != "matrix" || tokens[2] != "coordinate" {
        return Err(format!(
            "unsupported object/format `{} {}` (need `matrix coordinate`)",
            tokens[1], tokens[2]
        ));
    }
    if tokens[3] != "real" {
        return Err(format!("unsupported field `{}` (only `real`)", tokens[3]));
    }
    match tokens[4].as_str() {
        "general" => Ok(Symmetry::General),
        "symmetric" => Ok(Symmetry::Symmetric),
        other => Err(format!("unsupported symmetry `{other}`")),
    }
}

/// Writes `a` as `coordinate real general` with 17 significant digits.
pub fn write_matrix_market(a: &CsrMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| AmgError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    write_to(a, &mut w).map_err(io_err)?;
    w.flush().map_err(io_err)
}

fn write_to(a: &CsrMatrix, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for (i, j, v) in a.triplets() {
        writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v)?;
    }
    Ok(())
}
