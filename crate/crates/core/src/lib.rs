//! Entrywise decay bounds for Hermitian matrix functions.
//!
//! The crate bounds `|f(M)_{kt}|` for banded or sparse Hermitian positive
//! definite `M` and for `f(A)` where `A` is a Kronecker sum of banded factors.
//! Two families of functions are covered: Laplace–Stieltjes functions
//! (`f(x) = ∫ e^{-xτ} dα(τ)`, e.g. `x^{-1/2}`, `(1-e^{-x})/x`) and
//! Cauchy–Stieltjes functions (`f(x) = ∫ dγ(ω)/(x-ω)` over `(-∞, 0]`).
//!
//! Every bound can be checked against the dense oracles in [`oracle`].
//!
//! Indices are 0-based throughout the library.

pub mod bounds;
pub mod error;
pub mod graph;
pub mod kron;
pub mod market;
pub mod matrix;
pub mod measures;
pub mod oracle;
pub mod quadrature;
pub mod report;

pub use bounds::{BandedContext, BoundKind, EntryBound, ExpEnvelopeParams, LaplacePieces};
pub use error::{DecayError, Result};
pub use graph::{DistanceVector, PatternGraph};
pub use kron::{KronBound, KroneckerContext};
pub use matrix::{
    make_test_matrix, spectral_interval, BandedHermitianMatrix, Hermitian, IndexOrder,
    KroneckerSum, MultiIndex, SparseHermitianMatrix, SpectralInterval, SpectrumSource,
    TestMatrixKind,
};
pub use measures::{CauchyMeasure, LaplaceMeasure};
pub use oracle::{DenseOracle, SeriesFunction, SeriesOracle};
pub use quadrature::{QuadConfig, QuadratureResult};
pub use report::{DecayBoundReport, ReportRow};

pub use num_complex::Complex64;
