//! Matrix Market coordinate-format reader and writer (real, general/symmetric).

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use super::CsrMatrix;
use crate::Scalar;

#[derive(Debug, Error)]
pub enum MatrixMarketError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("line {line}: unsupported format `{format}` (only coordinate is supported)")]
    UnsupportedFormat { line: usize, format: String },
    #[error("line {line}: unsupported field `{field}`")]
    UnsupportedField { line: usize, field: String },
    #[error("line {line}: unsupported symmetry `{symmetry}`")]
    UnsupportedSymmetry { line: usize, symmetry: String },
    #[error("line {line}: malformed size line")]
    MalformedSize { line: usize },
    #[error("line {line}: malformed entry")]
    MalformedEntry { line: usize },
    #[error("line {line}: index ({row}, {col}) out of bounds for a {rows}x{cols} matrix")]
    IndexOutOfBounds {
        line: usize,
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("line {line}: symmetric matrix must be square")]
    NonSquareSymmetric { line: usize },
    #[error("expected {expected} entries, found {found}")]
    EntryCount { expected: usize, found: usize },
}

#[derive(Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
}

/// Reads a Matrix Market file into CSR storage.
///
/// Symmetric files are expanded to full storage, indices are shifted to
/// 0-based and duplicate entries are summed.
pub fn read_matrix_market<T: Scalar>(path: impl AsRef<Path>) -> Result<CsrMatrix<T>, MatrixMarketError> {
    let f = File::open(path)?;
    parse_matrix_market(BufReader::new(f))
}

pub fn parse_matrix_market<T: Scalar, R: BufRead>(reader: R) -> Result<CsrMatrix<T>, MatrixMarketError> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (hline, header) = match lines.next() {
        Some((n, l)) => (n, l?),
        None => {
            return Err(MatrixMarketError::MalformedHeader {
                line: 1,
                reason: "empty file".into(),
            })
        }
    };
    let symmetry = parse_header(hline, &header)?;

    let mut dims: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, T)> = Vec::new();
    let mut found = 0usize;
    for (lineno, line) in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let Some((rows, cols, nnz)) = dims else {
            let v: Vec<usize> = t
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| MatrixMarketError::MalformedSize { line: lineno })?;
            if v.len() != 3 {
                return Err(MatrixMarketError::MalformedSize { line: lineno });
            }
            if symmetry == Symmetry::Symmetric && v[0] != v[1] {
                return Err(MatrixMarketError::NonSquareSymmetric { line: lineno });
            }
            dims = Some((v[0], v[1], v[2]));
            triplets.reserve(if symmetry == Symmetry::Symmetric { 2 * v[2] } else { v[2] });
            continue;
        };

        let mut tok = t.split_whitespace();
        let bad = || MatrixMarketError::MalformedEntry { line: lineno };
        let i: usize = tok.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let j: usize = tok.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let v: f64 = tok.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        if tok.next().is_some() {
            return Err(bad());
        }
        if i == 0 || j == 0 || i > rows || j > cols {
            return Err(MatrixMarketError::IndexOutOfBounds {
                line: lineno,
                row: i,
                col: j,
                rows,
                cols,
            });
        }
        found += 1;
        if found > nnz {
            return Err(MatrixMarketError::EntryCount {
                expected: nnz,
                found,
            });
        }
        let v = T::lit(v);
        triplets.push((i - 1, j - 1, v));
        if symmetry == Symmetry::Symmetric && i != j {
            triplets.push((j - 1, i - 1, v));
        }
    }

    let Some((rows, cols, nnz)) = dims else {
        return Err(MatrixMarketError::MalformedSize { line: hline + 1 });
    };
    if found != nnz {
        return Err(MatrixMarketError::EntryCount {
            expected: nnz,
            found,
        });
    }
    Ok(CsrMatrix::from_triplets(rows, cols, &triplets).expect("indices validated"))
}

fn parse_header(line: usize, header: &str) -> Result<Symmetry, MatrixMarketError> {
    let tok: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    let malformed = |reason: &str| MatrixMarketError::MalformedHeader {
        line,
        reason: reason.to_owned(),
    };
    if tok.len() != 5 || tok[0] != "%%matrixmarket" {
        return Err(malformed("expected `%%MatrixMarket matrix <format> <field> <symmetry>`"));
    }
    if tok[1] != "matrix" {
        return Err(malformed("object must be `matrix`"));
    }
    match tok[2].as_str() {
        "coordinate" => {}
        "array" => {
            return Err(MatrixMarketError::UnsupportedFormat {
                line,
                format: tok[2].clone(),
            })
        }
        _ => return Err(malformed("unknown format")),
    }
    match tok[3].as_str() {
        "real" | "double" | "integer" => {}
        "complex" | "pattern" => {
            return Err(MatrixMarketError::UnsupportedField {
                line,
                field: tok[3].clone(),
            })
        }
        _ => return Err(malformed("unknown field")),
    }
    match tok[4].as_str() {
        "general" => Ok(Symmetry::General),
        "symmetric" => Ok(Symmetry::Symmetric),
        "skew-symmetric" | "hermitian" => Err(MatrixMarketError::UnsupportedSymmetry {
            line,
            symmetry: tok[4].clone(),
        }),
        _ => Err(malformed("unknown symmetry")),
    }
}

/// Writes `a` as a `coordinate real general` file with round-trip precision.
pub fn write_matrix_market<T: Scalar>(path: impl AsRef<Path>, a: &CsrMatrix<T>) -> io::Result<()> {
    use super::MatVec;
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for (i, j, v) in a.triplets() {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v.as_f64())?;
    }
    w.flush()
}
