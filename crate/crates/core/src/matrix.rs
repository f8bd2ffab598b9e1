//! Matrix arguments: banded and general sparse Hermitian storage, the two
//! standard test matrices, spectral enclosures, and Kronecker-sum index
//! arithmetic.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, DecayError, Result};
use crate::oracle;

const HERMITIAN_TOL: f64 = 1e-14;

/// Read access shared by every Hermitian matrix representation.
pub trait Hermitian {
    fn order(&self) -> usize;

    /// Visits every stored entry of both triangles, diagonal included.
    fn for_each_entry(&self, f: &mut dyn FnMut(usize, usize, Complex64));

    fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.order();
        let mut m = DMatrix::zeros(n, n);
        self.for_each_entry(&mut |i, j, v| m[(i, j)] += v);
        m
    }

    fn max_diagonal(&self) -> f64 {
        let mut best = f64::NEG_INFINITY;
        self.for_each_entry(&mut |i, j, v| {
            if i == j {
                best = best.max(v.re);
            }
        });
        best
    }

    /// Union of the Gershgorin discs, intersected with the real line.
    fn gershgorin(&self) -> (f64, f64) {
        let n = self.order();
        let mut centre = vec![0.0; n];
        let mut radius = vec![0.0; n];
        self.for_each_entry(&mut |i, j, v| {
            if i == j {
                centre[i] += v.re;
            } else {
                radius[i] += v.norm();
            }
        });
        let lo = (0..n).map(|i| centre[i] - radius[i]).fold(f64::INFINITY, f64::min);
        let hi = (0..n).map(|i| centre[i] + radius[i]).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    fn is_real(&self) -> bool {
        let mut real = true;
        self.for_each_entry(&mut |_, _, v| real &= v.im == 0.0);
        real
    }
}

/// A β-banded Hermitian matrix stored by its lower diagonals.
///
/// `lower[o][j]` holds entry `(j + o, j)`; the upper triangle is implied by
/// conjugate symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedHermitianMatrix {
    n: usize,
    lower: Vec<Vec<Complex64>>,
}

impl BandedHermitianMatrix {
    /// Builds the matrix from its lower diagonals; `bands[0]` is the main
    /// diagonal (length `n`), `bands[o]` has length `n - o`.
    pub fn from_lower_bands(n: usize, bands: Vec<Vec<Complex64>>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("matrix order must be positive"));
        }
        if bands.is_empty() {
            return Err(invalid("at least the main diagonal is required"));
        }
        if bands.len() > n {
            return Err(invalid(format!("bandwidth {} exceeds order {n}", bands.len() - 1)));
        }
        for (o, band) in bands.iter().enumerate() {
            if band.len() != n - o {
                return Err(invalid(format!(
                    "diagonal at offset {o} has length {}, expected {}",
                    band.len(),
                    n - o
                )));
            }
        }
        if let Some(v) = bands[0].iter().find(|v| v.im.abs() > HERMITIAN_TOL * (1.0 + v.re.abs())) {
            return Err(DecayError::NotHermitian(format!("diagonal entry {v} is not real")));
        }
        let mut lower = bands;
        for v in lower[0].iter_mut() {
            v.im = 0.0;
        }
        Ok(Self { n, lower })
    }

    /// Hermitian Toeplitz band matrix from its symbol: `diagonal` on the main
    /// diagonal and `sub[o-1]` on the o-th subdiagonal.
    pub fn toeplitz(n: usize, diagonal: f64, sub: &[Complex64]) -> Result<Self> {
        let mut bands = vec![vec![Complex64::new(diagonal, 0.0); n]];
        for (o, &v) in sub.iter().enumerate() {
            let len = n
                .checked_sub(o + 1)
                .filter(|&l| l > 0)
                .ok_or_else(|| invalid(format!("order {n} too small for bandwidth {}", sub.len())))?;
            bands.push(vec![v; len]);
        }
        Self::from_lower_bands(n, bands)
    }

    /// Toeplitz matrix from the full stencil listed from the lowest
    /// subdiagonal to the highest superdiagonal, e.g. `[-1, 4, -1]`.
    pub fn from_stencil(n: usize, stencil: &[f64]) -> Result<Self> {
        if stencil.len() % 2 == 0 {
            return Err(invalid("stencil must have odd length 2β+1"));
        }
        let beta = stencil.len() / 2;
        for o in 1..=beta {
            let (lo, hi) = (stencil[beta - o], stencil[beta + o]);
            if (lo - hi).abs() > HERMITIAN_TOL * (1.0 + lo.abs()) {
                return Err(DecayError::NotHermitian(format!(
                    "stencil is not symmetric at offset {o}: {lo} vs {hi}"
                )));
            }
        }
        let sub: Vec<Complex64> = (1..=beta).map(|o| Complex64::new(stencil[beta - o], 0.0)).collect();
        if n <= beta {
            return Err(invalid(format!("order {n} too small for bandwidth {beta}")));
        }
        Self::toeplitz(n, stencil[beta], &sub)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::toeplitz(n, 1.0, &[])
    }

    /// Copies a sparse matrix into band storage; β is its actual bandwidth.
    pub fn from_sparse(m: &SparseHermitianMatrix) -> Result<Self> {
        let n = m.order();
        let beta = m.bandwidth();
        let mut bands: Vec<Vec<Complex64>> = (0..=beta).map(|o| vec![Complex64::default(); n - o]).collect();
        for i in 0..n {
            for &(j, v) in m.row(i) {
                if i >= j {
                    bands[i - j][j] = v;
                }
            }
        }
        Self::from_lower_bands(n, bands)
    }

    pub fn bandwidth(&self) -> usize {
        self.lower.len() - 1
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let o = hi - lo;
        if o >= self.lower.len() || hi >= self.n {
            return Complex64::default();
        }
        let v = self.lower[o][lo];
        if i >= j {
            v
        } else {
            v.conj()
        }
    }

    pub fn to_sparse(&self) -> SparseHermitianMatrix {
        let mut triplets = Vec::new();
        for (o, band) in self.lower.iter().enumerate() {
            for (j, &v) in band.iter().enumerate() {
                if v != Complex64::default() || o == 0 {
                    triplets.push((j + o, j, v));
                }
            }
        }
        SparseHermitianMatrix::from_triangle(self.n, triplets)
            .expect("band storage is Hermitian by construction")
    }
}

impl Hermitian for BandedHermitianMatrix {
    fn order(&self) -> usize {
        self.n
    }

    fn for_each_entry(&self, f: &mut dyn FnMut(usize, usize, Complex64)) {
        for (o, band) in self.lower.iter().enumerate() {
            for (j, &v) in band.iter().enumerate() {
                f(j + o, j, v);
                if o > 0 {
                    f(j, j + o, v.conj());
                }
            }
        }
    }
}

/// Hermitian matrix with an arbitrary symmetric sparsity pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHermitianMatrix {
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl SparseHermitianMatrix {
    /// Builds the matrix from one triangle (or any mix where every
    /// off-diagonal pair appears once). The mirrored entry is the conjugate.
    /// Repeated positions are summed.
    pub fn from_triangle(
        n: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Complex64)>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(invalid("matrix order must be positive"));
        }
        let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); n];
        for (i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(DecayError::OutOfRange(format!("entry ({i}, {j}) in a matrix of order {n}")));
            }
            if i == j {
                if v.im.abs() > HERMITIAN_TOL * (1.0 + v.re.abs()) {
                    return Err(DecayError::NotHermitian(format!("diagonal entry ({i}, {i}) = {v}")));
                }
                rows[i].push((i, Complex64::new(v.re, 0.0)));
            } else {
                rows[i].push((j, v));
                rows[j].push((i, v.conj()));
            }
        }
        for row in rows.iter_mut() {
            row.sort_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, Complex64)> = Vec::with_capacity(row.len());
            for &(j, v) in row.iter() {
                match merged.last_mut() {
                    Some((lj, lv)) if *lj == j => *lv += v,
                    _ => merged.push((j, v)),
                }
            }
            *row = merged;
        }
        Ok(Self { rows })
    }

    pub fn row(&self, i: usize) -> &[(usize, Complex64)] {
        &self.rows[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match self.rows[i].binary_search_by_key(&j, |&(c, _)| c) {
            Ok(p) => self.rows[i][p].1,
            Err(_) => Complex64::default(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn bandwidth(&self) -> usize {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }
}

impl Hermitian for SparseHermitianMatrix {
    fn order(&self) -> usize {
        self.rows.len()
    }

    fn for_each_entry(&self, f: &mut dyn FnMut(usize, usize, Complex64)) {
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                f(i, j, v);
            }
        }
    }
}

/// The two test matrices used throughout: `tridiag(-1, 4, -1)` and
/// `pentadiag(-0.5, -1, 4, -1, -0.5)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestMatrixKind {
    Tridiag,
    Pentadiag,
}

impl TestMatrixKind {
    pub fn stencil(self) -> &'static [f64] {
        match self {
            TestMatrixKind::Tridiag => &[-1.0, 4.0, -1.0],
            TestMatrixKind::Pentadiag => &[-0.5, -1.0, 4.0, -1.0, -0.5],
        }
    }

    fn min_order(self) -> usize {
        match self {
            TestMatrixKind::Tridiag => 3,
            TestMatrixKind::Pentadiag => 5,
        }
    }
}

pub fn make_test_matrix(kind: TestMatrixKind, n: usize) -> Result<BandedHermitianMatrix> {
    if n < kind.min_order() {
        return Err(invalid(format!("{kind:?} needs n >= {}, got {n}", kind.min_order())));
    }
    BandedHermitianMatrix::from_stencil(n, kind.stencil())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumSource {
    Exact,
    Gershgorin,
}

/// An enclosure `[lambda_min, lambda_max]` of the spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralInterval {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub source: SpectrumSource,
}

impl SpectralInterval {
    pub fn new(lambda_min: f64, lambda_max: f64, source: SpectrumSource) -> Result<Self> {
        if !(lambda_min.is_finite() && lambda_max.is_finite()) || lambda_min > lambda_max {
            return Err(invalid(format!("invalid spectral interval [{lambda_min}, {lambda_max}]")));
        }
        Ok(Self { lambda_min, lambda_max, source })
    }

    /// Quarter width: the shifted matrix `M - lambda_min I` has spectrum in `[0, 4ρ]`.
    pub fn rho(&self) -> f64 {
        (self.lambda_max - self.lambda_min) / 4.0
    }

    pub fn kappa(&self) -> f64 {
        self.lambda_max / self.lambda_min
    }

    pub fn shifted(&self, delta: f64) -> Self {
        Self { lambda_min: self.lambda_min + delta, lambda_max: self.lambda_max + delta, source: self.source }
    }

    pub fn require_positive_definite(&self) -> Result<()> {
        if self.lambda_min > 0.0 {
            Ok(())
        } else {
            Err(DecayError::NotPositiveDefinite { lambda_min: self.lambda_min })
        }
    }
}

pub fn spectral_interval<M: Hermitian + ?Sized>(m: &M, mode: SpectrumSource) -> Result<SpectralInterval> {
    match mode {
        SpectrumSource::Exact => {
            let ev = oracle::hermitian_eigenvalues(&m.to_dense())?;
            SpectralInterval::new(ev[0], ev[ev.len() - 1], SpectrumSource::Exact)
        }
        SpectrumSource::Gershgorin => {
            let (lo, hi) = m.gershgorin();
            SpectralInterval::new(lo, hi, SpectrumSource::Gershgorin)
        }
    }
}

/// How multi-indices map onto the linear index of a Kronecker sum.
///
/// With `LastFastest` the sum is `M_1 ⊗ I ⊗ … + … + I ⊗ … ⊗ M_d` in factor
/// order and the last component varies fastest. `FirstFastest` lists the same
/// grid with the first component varying fastest, i.e. the column-stacking
/// `vec` convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IndexOrder {
    #[default]
    LastFastest,
    FirstFastest,
}

/// Grid coordinates `(k_1, …, k_d)`, one 0-based index per factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn components(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }
}

/// `A = M_1 ⊕ M_2 (⊕ M_3 …)` over banded Hermitian factors.
#[derive(Debug, Clone, PartialEq)]
pub struct KroneckerSum {
    factors: Vec<BandedHermitianMatrix>,
    order: IndexOrder,
}

/// Largest Kronecker sum that may be assembled densely.
pub const MAX_DENSE_KRONECKER: usize = 4096;

impl KroneckerSum {
    pub fn new(factors: Vec<BandedHermitianMatrix>) -> Result<Self> {
        if factors.len() < 2 {
            return Err(invalid(format!("a Kronecker sum needs at least 2 factors, got {}", factors.len())));
        }
        Ok(Self { factors, order: IndexOrder::default() })
    }

    pub fn with_order(mut self, order: IndexOrder) -> Self {
        self.order = order;
        self
    }

    pub fn factors(&self) -> &[BandedHermitianMatrix] {
        &self.factors
    }

    pub fn index_order(&self) -> IndexOrder {
        self.order
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(Hermitian::order).collect()
    }

    /// Linear-index step of each component.
    pub fn strides(&self) -> Vec<usize> {
        let dims = self.dims();
        let d = dims.len();
        let mut strides = vec![1usize; d];
        match self.order {
            IndexOrder::LastFastest => {
                for l in (0..d - 1).rev() {
                    strides[l] = strides[l + 1] * dims[l + 1];
                }
            }
            IndexOrder::FirstFastest => {
                for l in 1..d {
                    strides[l] = strides[l - 1] * dims[l - 1];
                }
            }
        }
        strides
    }

    pub fn linearize(&self, k: &MultiIndex) -> Result<usize> {
        let dims = self.dims();
        if k.0.len() != dims.len() {
            return Err(invalid(format!("multi-index has {} components, expected {}", k.0.len(), dims.len())));
        }
        let mut lin = 0;
        for ((&c, &n), &s) in k.0.iter().zip(&dims).zip(&self.strides()) {
            if c >= n {
                return Err(DecayError::OutOfRange(format!("component {c} >= factor order {n}")));
            }
            lin += c * s;
        }
        Ok(lin)
    }

    pub fn delinearize(&self, lin: usize) -> Result<MultiIndex> {
        let total = Hermitian::order(self);
        if lin >= total {
            return Err(DecayError::OutOfRange(format!("linear index {lin} >= {total}")));
        }
        let dims = self.dims();
        let comps = self.strides().iter().zip(&dims).map(|(&s, &n)| (lin / s) % n).collect();
        Ok(MultiIndex(comps))
    }

    /// Dense assembly, limited to [`MAX_DENSE_KRONECKER`] rows.
    pub fn assemble(&self) -> Result<DMatrix<Complex64>> {
        let total = Hermitian::order(self);
        if total > MAX_DENSE_KRONECKER {
            return Err(DecayError::Unsupported(format!(
                "dense Kronecker assembly of order {total} exceeds {MAX_DENSE_KRONECKER}"
            )));
        }
        Ok(self.to_dense())
    }
}

impl Hermitian for KroneckerSum {
    fn order(&self) -> usize {
        self.factors.iter().map(Hermitian::order).product()
    }

    fn for_each_entry(&self, f: &mut dyn FnMut(usize, usize, Complex64)) {
        let strides = self.strides();
        let total = Hermitian::order(self);
        let mut diag = vec![Complex64::default(); total];
        for col in 0..total {
            let t = self.delinearize(col).expect("in range");
            for (l, m) in self.factors.iter().enumerate() {
                let tl = t.0[l];
                let beta = m.bandwidth();
                let lo = tl.saturating_sub(beta);
                let hi = (tl + beta).min(m.order() - 1);
                for r in lo..=hi {
                    let v = m.entry(r, tl);
                    if r == tl {
                        diag[col] += v;
                    } else if v != Complex64::default() {
                        let row = col + r * strides[l] - tl * strides[l];
                        f(row, col, v);
                    }
                }
            }
        }
        for (i, v) in diag.into_iter().enumerate() {
            f(i, i, v);
        }
    }
}
