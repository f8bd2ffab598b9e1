//! Matrix Market coordinate files.
//!
//! `symmetric` and `hermitian` files list one triangle; `general` files are
//! accepted when their entries are Hermitian. `pattern` files get unit
//! values. `array` storage and `skew-symmetric` matrices are rejected.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{DecayError, Result};
use crate::matrix::{Hermitian, SparseHermitianMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Hermitian,
}

fn parse_err(line: usize, msg: impl Into<String>) -> DecayError {
    DecayError::Parse { line, msg: msg.into() }
}

fn parse_header(line: &str) -> Result<(Field, Symmetry)> {
    let words: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(parse_err(1, format!("not a Matrix Market matrix header: {line:?}")));
    }
    if words[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported storage {:?}; only coordinate is read", words[2])));
    }
    let field = match words[3].as_str() {
        "real" | "integer" | "double" => Field::Real,
        "complex" => Field::Complex,
        "pattern" => Field::Pattern,
        other => return Err(parse_err(1, format!("unsupported field {other:?}"))),
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(parse_err(1, format!("unsupported symmetry {other:?}; the matrix must be Hermitian"))),
    };
    if symmetry == Symmetry::Hermitian && field != Field::Complex {
        return Err(parse_err(1, "hermitian symmetry needs complex entries"));
    }
    Ok((field, symmetry))
}

fn number<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| parse_err(line, format!("invalid {what} {tok:?}")))
}

/// Reads a Matrix Market coordinate file from `reader`.
pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<SparseHermitianMatrix> {
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let (field, symmetry) = parse_header(&header?)?;

    let mut size = None;
    let mut entries: Vec<(usize, usize, Complex64)> = Vec::new();
    let mut expected = 0usize;
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        match size {
            None => {
                let rows: usize = number(toks.next(), lineno, "row count")?;
                let cols: usize = number(toks.next(), lineno, "column count")?;
                expected = number(toks.next(), lineno, "entry count")?;
                if rows != cols {
                    return Err(parse_err(lineno, format!("matrix is {rows} x {cols}, not square")));
                }
                if rows == 0 {
                    return Err(parse_err(lineno, "matrix has order 0"));
                }
                size = Some(rows);
                entries.reserve(expected);
            }
            Some(n) => {
                let i: usize = number(toks.next(), lineno, "row index")?;
                let j: usize = number(toks.next(), lineno, "column index")?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(parse_err(lineno, format!("index ({i}, {j}) outside 1..={n}")));
                }
                let v = match field {
                    Field::Pattern => Complex64::new(1.0, 0.0),
                    Field::Real => Complex64::new(number(toks.next(), lineno, "value")?, 0.0),
                    Field::Complex => Complex64::new(
                        number(toks.next(), lineno, "real part")?,
                        number(toks.next(), lineno, "imaginary part")?,
                    ),
                };
                if toks.next().is_some() {
                    return Err(parse_err(lineno, "trailing tokens"));
                }
                if symmetry != Symmetry::General && j > i {
                    return Err(parse_err(lineno, format!("entry ({i}, {j}) is above the diagonal in a {symmetry:?} file")));
                }
                entries.push((i - 1, j - 1, v));
            }
        }
    }
    let n = size.ok_or_else(|| parse_err(1, "missing size line"))?;
    if entries.len() != expected {
        return Err(parse_err(0, format!("expected {expected} entries, found {}", entries.len())));
    }
    if symmetry == Symmetry::General {
        entries = lower_triangle_of_general(n, entries)?;
    }
    SparseHermitianMatrix::from_triangle(n, entries)
}

/// Checks that a `general` entry list is Hermitian and keeps its lower
/// triangle.
fn lower_triangle_of_general(
    n: usize,
    entries: Vec<(usize, usize, Complex64)>,
) -> Result<Vec<(usize, usize, Complex64)>> {
    let full = SparseHermitianMatrix::from_triangle(n, entries.iter().filter(|e| e.0 >= e.1).copied())?;
    let upper = SparseHermitianMatrix::from_triangle(n, entries.iter().filter(|e| e.0 < e.1).map(|&(i, j, v)| (j, i, v.conj())))?;
    for i in 0..n {
        for &(j, v) in full.row(i) {
            if i != j && (upper.entry(i, j) - v).norm() > 1e-12 * (1.0 + v.norm()) {
                return Err(DecayError::NotHermitian(format!("entries ({}, {}) and ({}, {}) disagree", i + 1, j + 1, j + 1, i + 1)));
            }
        }
        for &(j, v) in upper.row(i) {
            if i != j && full.entry(i, j) == Complex64::default() && v != Complex64::default() {
                return Err(DecayError::NotHermitian(format!("entry ({}, {}) has no mirror", j + 1, i + 1)));
            }
        }
    }
    Ok(entries.into_iter().filter(|e| e.0 >= e.1).collect())
}

pub fn read_matrix_market_file(path: impl AsRef<Path>) -> Result<SparseHermitianMatrix> {
    let file = fs::File::open(path.as_ref())
        .map_err(|e| DecayError::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_matrix_market(BufReader::new(file))
}

/// Lower triangle of `m` as a `symmetric` (real) or `hermitian` (complex)
/// coordinate file.
pub fn to_matrix_market<M: Hermitian + ?Sized>(m: &M) -> String {
    let real = m.is_real();
    let mut entries = Vec::new();
    m.for_each_entry(&mut |i, j, v| {
        if i >= j {
            entries.push((i, j, v));
        }
    });
    entries.sort_by_key(|&(i, j, _)| (j, i));
    let mut out = String::new();
    let kind = if real { "real symmetric" } else { "complex hermitian" };
    let _ = writeln!(out, "%%MatrixMarket matrix coordinate {kind}");
    let _ = writeln!(out, "{} {} {}", m.order(), m.order(), entries.len());
    for (i, j, v) in entries {
        if real {
            let _ = writeln!(out, "{} {} {:.17e}", i + 1, j + 1, v.re);
        } else {
            let _ = writeln!(out, "{} {} {:.17e} {:.17e}", i + 1, j + 1, v.re, v.im);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{make_test_matrix, BandedHermitianMatrix, TestMatrixKind};

    fn read(s: &str) -> Result<SparseHermitianMatrix> {
        read_matrix_market(s.as_bytes())
    }

    #[test]
    fn symmetric_real() {
        let m = read("%%MatrixMarket matrix coordinate real symmetric\n% comment\n3 3 4\n1 1 2\n2 1 -1\n2 2 2\n3 3 2\n").unwrap();
        assert_eq!(m.entry(0, 1), Complex64::new(-1.0, 0.0));
        assert_eq!(m.entry(1, 0), Complex64::new(-1.0, 0.0));
        assert_eq!(m.entry(2, 1), Complex64::default());
    }

    #[test]
    fn hermitian_complex_mirrors_conjugate() {
        let m = read("%%MatrixMarket matrix coordinate complex hermitian\n2 2 3\n1 1 2 0\n2 1 0 1\n2 2 2 0\n").unwrap();
        assert_eq!(m.entry(1, 0), Complex64::new(0.0, 1.0));
        assert_eq!(m.entry(0, 1), Complex64::new(0.0, -1.0));
    }

    #[test]
    fn general_hermitian_is_accepted_and_asymmetric_rejected() {
        let ok = read("%%MatrixMarket matrix coordinate real general\n2 2 4\n1 1 2\n1 2 -1\n2 1 -1\n2 2 2\n").unwrap();
        assert_eq!(ok.nnz(), 4);
        let bad = read("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 2\n1 2 -1\n2 2 2\n");
        assert!(matches!(bad, Err(DecayError::NotHermitian(_))));
    }

    #[test]
    fn rejected_inputs() {
        assert!(matches!(read(""), Err(DecayError::Parse { .. })));
        assert!(read("%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n").is_err());
        assert!(read("%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 1\n").is_err());
        assert!(read("%%MatrixMarket matrix coordinate real symmetric\n2 3 1\n1 1 1\n").is_err());
        assert!(read("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n3 1 1\n").is_err());
        assert!(read("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 1\n").is_err());
        assert!(read("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 1\n").is_err());
        assert!(read("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 1 x\n").is_err());
    }

    #[test]
    fn pattern_gets_unit_values() {
        let m = read("%%MatrixMarket matrix coordinate pattern symmetric\n3 3 2\n2 1\n3 2\n").unwrap();
        assert_eq!(m.entry(0, 1), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn round_trip() {
        let m = make_test_matrix(TestMatrixKind::Pentadiag, 7).unwrap();
        let back = read(&to_matrix_market(&m)).unwrap();
        assert_eq!(back.to_dense(), m.to_dense());
        let sub = [Complex64::new(-1.0, 0.25)];
        let c = BandedHermitianMatrix::toeplitz(5, 3.0, &sub).unwrap();
        let back = read(&to_matrix_market(&c)).unwrap();
        assert_eq!(back.to_dense(), c.to_dense());
    }
}
