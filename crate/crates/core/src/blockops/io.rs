//! Coordinate-format block files and block-operator manifests.
//!
//! A block file starts with a header line `rows cols nnz` followed by `nnz`
//! lines `i j value` with 1-based indices. Blank lines and lines starting
//! with `%` or `#` are ignored.
//!
//! A manifest describes one block operator:
//!
//! ```text
//! p 2
//! sizes 31 31
//! block 1 1 a11.coo
//! block 2 1 a21.coo
//! block 1 2 a12.coo
//! block 2 2 a22.coo
//! ```
//!
//! Block indices are 1-based; block paths are relative to the manifest.
//! Blocks that are not listed are absent.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::block::{Block, CsrMatrix};
use super::operator::BlockOperator;
use super::vector::BlockDims;
use crate::error::{Error, Result};

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('%') && !l.starts_with('#'))
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, tok: Option<&str>, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(path, line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(path, line, format!("cannot parse {what} from {tok:?}")))
}

pub fn parse_coordinate(path: &Path, text: &str) -> Result<CsrMatrix> {
    let mut lines = content_lines(text);
    let (hl, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "missing header `rows cols nnz`"))?;
    let mut toks = header.split_whitespace();
    let rows: usize = field(path, hl, toks.next(), "rows")?;
    let cols: usize = field(path, hl, toks.next(), "cols")?;
    let nnz: usize = field(path, hl, toks.next(), "nnz")?;
    let mut triplets = Vec::with_capacity(nnz);
    for (ln, line) in lines {
        let mut toks = line.split_whitespace();
        let i: usize = field(path, ln, toks.next(), "row index")?;
        let j: usize = field(path, ln, toks.next(), "column index")?;
        let v: f64 = field(path, ln, toks.next(), "value")?;
        if i == 0 || j == 0 || i > rows || j > cols {
            return Err(parse_err(
                path,
                ln,
                format!("index ({i}, {j}) outside 1..={rows} x 1..={cols}"),
            ));
        }
        triplets.push((i - 1, j - 1, v));
    }
    if triplets.len() != nnz {
        return Err(parse_err(
            path,
            hl,
            format!("header declares {nnz} entries, found {}", triplets.len()),
        ));
    }
    CsrMatrix::from_triplets(rows, cols, triplets)
}

pub fn read_coordinate(path: &Path) -> Result<CsrMatrix> {
    parse_coordinate(path, &read(path)?)
}

pub fn format_coordinate(m: &CsrMatrix) -> String {
    let mut out = format!("{} {} {}\n", m.nrows(), m.ncols(), m.nnz());
    for (i, j, v) in m.triplets() {
        writeln!(out, "{} {} {:.17e}", i + 1, j + 1, v).unwrap();
    }
    out
}

pub fn read_manifest(path: &Path) -> Result<BlockOperator> {
    let text = read(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut p: Option<usize> = None;
    let mut dims: Option<BlockDims> = None;
    let mut entries: Vec<(usize, usize, usize, PathBuf)> = Vec::new();
    for (ln, line) in content_lines(&text) {
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("p") => p = Some(field(path, ln, toks.next(), "p")?),
            Some("sizes") => {
                let sizes = toks
                    .map(|t| {
                        t.parse::<usize>()
                            .map_err(|_| parse_err(path, ln, format!("bad size {t:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                dims = Some(BlockDims::new(sizes).map_err(|e| parse_err(path, ln, e.to_string()))?);
            }
            Some("block") => {
                let a: usize = field(path, ln, toks.next(), "block row")?;
                let b: usize = field(path, ln, toks.next(), "block column")?;
                let file: String = field(path, ln, toks.next(), "block file")?;
                entries.push((ln, a, b, base.join(file)));
            }
            Some(other) => return Err(parse_err(path, ln, format!("unknown key {other:?}"))),
            None => {}
        }
    }
    let dims = dims.ok_or_else(|| parse_err(path, 1, "manifest lacks a `sizes` line"))?;
    if let Some(p) = p {
        if p != dims.p() {
            return Err(parse_err(path, 1, format!("p = {p} but {} sizes given", dims.p())));
        }
    }
    let mut op = BlockOperator::zeros(&dims);
    for (ln, a, b, file) in entries {
        if a == 0 || b == 0 || a > dims.p() || b > dims.p() {
            return Err(parse_err(
                path,
                ln,
                format!("block ({a}, {b}) outside 1..={}", dims.p()),
            ));
        }
        let m = read_coordinate(&file)?;
        op.set_block(a - 1, b - 1, Some(Block::Sparse(m)))
            .map_err(|e| parse_err(path, ln, e.to_string()))?;
    }
    Ok(op)
}

/// Writes every present block of `op` next to the manifest as `<stem>_<α>_<β>.coo`.
pub fn write_manifest(path: &Path, op: &BlockOperator) -> Result<()> {
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("block");
    let dims = op.dims();
    let mut manifest = format!("p {}\nsizes", dims.p());
    for n in dims.sizes() {
        write!(manifest, " {n}").unwrap();
    }
    manifest.push('\n');
    for (a, b, blk) in op.blocks() {
        let name = format!("{stem}_{}_{}.coo", a + 1, b + 1);
        let csr = match blk {
            Block::Sparse(m) => m.clone(),
            Block::Dense(m) => CsrMatrix::from_triplets(
                m.nrows(),
                m.ncols(),
                (0..m.nrows())
                    .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
                    .filter(|&(i, j)| m[(i, j)] != 0.0)
                    .map(|(i, j)| (i, j, m[(i, j)])),
            )?,
        };
        let file = dir.join(&name);
        fs::write(&file, format_coordinate(&csr)).map_err(|source| Error::Io { path: file, source })?;
        writeln!(manifest, "block {} {} {name}", a + 1, b + 1).unwrap();
    }
    fs::write(path, manifest).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_coordinate_text() {
        let m = parse_coordinate(Path::new("x"), "% comment\n2 2 3\n1 1 2.0\n2 2 2.0\n1 2 -1\n").unwrap();
        let d = m.to_dense();
        assert_eq!(d[(0, 1)], -1.0);
        assert_eq!(d[(1, 1)], 2.0);
    }

    #[test]
    fn coordinate_errors_carry_line_numbers() {
        let err = parse_coordinate(Path::new("a.coo"), "2 2 1\n3 1 1.0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_coordinate(Path::new("a.coo"), "2 2 2\n1 1 1.0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_coordinate(Path::new("a.coo"), "2 2 1\n1 x 1.0\n").unwrap_err();
        assert!(err.to_string().contains("column index"));
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let dims = BlockDims::new(vec![2, 1]).unwrap();
        let dense = nalgebra::DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.5, -1.0, 2.0, 0.0, 0.5, 0.0, 3.0]);
        let op = BlockOperator::from_dense(&dims, &dense).unwrap();
        let path = dir.path().join("a.manifest");
        write_manifest(&path, &op).unwrap();
        let back = read_manifest(&path).unwrap();
        assert_eq!(back.to_dense(), dense);
        assert!(back.block(1, 0).is_some());
    }

    #[test]
    fn manifest_rejects_inconsistent_p() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.manifest");
        fs::write(&path, "p 3\nsizes 1 1\n").unwrap();
        assert!(read_manifest(&path).is_err());
    }
}
