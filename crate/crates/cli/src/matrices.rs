//! Matrix and factor descriptions given on the command line.

use std::path::Path;

use decay_core::market::read_matrix_market_file;
use decay_core::{make_test_matrix, BandedHermitianMatrix, Hermitian, SparseHermitianMatrix, TestMatrixKind};

use crate::error::CliError;

pub enum LoadedMatrix {
    Banded(BandedHermitianMatrix),
    Sparse(SparseHermitianMatrix),
}

impl LoadedMatrix {
    pub fn as_hermitian(&self) -> &dyn Hermitian {
        match self {
            LoadedMatrix::Banded(m) => m,
            LoadedMatrix::Sparse(m) => m,
        }
    }

    pub fn into_banded(self) -> Result<BandedHermitianMatrix, CliError> {
        match self {
            LoadedMatrix::Banded(m) => Ok(m),
            LoadedMatrix::Sparse(m) => Ok(BandedHermitianMatrix::from_sparse(&m)?),
        }
    }
}

fn parse_numbers(list: &str) -> Result<Vec<f64>, CliError> {
    list.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("`{s}` is not a number"))))
        .collect()
}

/// `tridiag`, `pentadiag`, `identity`, `tridiag:a,b,c`, `pentadiag:a,b,c,d,e`
/// or a path ending in `.mtx`. Stencils list the bands from the lowest
/// subdiagonal to the highest superdiagonal and must be symmetric.
pub fn load_matrix(desc: &str, n: usize) -> Result<LoadedMatrix, CliError> {
    let desc = desc.trim();
    if desc.ends_with(".mtx") {
        let path = Path::new(desc);
        if !path.exists() {
            return Err(CliError::Usage(format!("no such file: {desc}")));
        }
        return Ok(LoadedMatrix::Sparse(read_matrix_market_file(path)?));
    }
    let (name, params) = match desc.split_once(':') {
        Some((a, b)) => (a, Some(parse_numbers(b)?)),
        None => (desc, None),
    };
    let m = match (name, params) {
        ("tridiag", None) => make_test_matrix(TestMatrixKind::Tridiag, n)?,
        ("pentadiag", None) => make_test_matrix(TestMatrixKind::Pentadiag, n)?,
        ("identity", None) => BandedHermitianMatrix::identity(n)?,
        ("tridiag", Some(s)) if s.len() == 3 => BandedHermitianMatrix::from_stencil(n, &s)?,
        ("pentadiag", Some(s)) if s.len() == 5 => BandedHermitianMatrix::from_stencil(n, &s)?,
        ("tridiag" | "pentadiag", Some(s)) => {
            return Err(CliError::Usage(format!("{name} takes {} stencil values, got {}", if name == "tridiag" { 3 } else { 5 }, s.len())))
        }
        _ => return Err(CliError::Usage(format!("unknown matrix `{desc}`"))),
    };
    Ok(LoadedMatrix::Banded(m))
}

/// Splits a factor list: a token starting with a letter or path character
/// opens a new factor, numeric tokens extend the previous factor's stencil.
pub fn split_factors(list: &str) -> Result<Vec<String>, CliError> {
    let mut out: Vec<String> = Vec::new();
    for tok in list.split(',').map(str::trim) {
        let numeric = tok.parse::<f64>().is_ok();
        match (numeric, out.last_mut()) {
            (true, Some(last)) if last.contains(':') => {
                last.push(',');
                last.push_str(tok);
            }
            (true, _) => return Err(CliError::Usage(format!("stray number `{tok}` in the factor list"))),
            (false, _) if tok.is_empty() => return Err(CliError::Usage("empty factor in the factor list".into())),
            (false, _) => out.push(tok.to_string()),
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("no factors given".into()));
    }
    Ok(out)
}

pub fn load_factors(list: &str, n: usize) -> Result<Vec<BandedHermitianMatrix>, CliError> {
    split_factors(list)?.iter().map(|s| load_matrix(s, n)?.into_banded()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_list_attaches_numbers_to_the_previous_factor() {
        let f = split_factors("tridiag:-1,4,-1,pentadiag, identity").unwrap();
        assert_eq!(f, ["tridiag:-1,4,-1", "pentadiag", "identity"]);
        assert!(split_factors("1,tridiag").is_err());
        assert!(split_factors("tridiag,2").is_err());
    }

    #[test]
    fn stencil_length_is_checked() {
        assert!(load_matrix("tridiag:-1,4", 10).is_err());
        assert!(load_matrix("hexadiag", 10).is_err());
        let m = load_matrix("pentadiag:-0.5,-1,4,-1,-0.5", 10).unwrap().into_banded().unwrap();
        assert_eq!(m.bandwidth(), 2);
    }
}
