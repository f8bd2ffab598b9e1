//! Reference computations used to validate the bounds.
//!
//! [`DenseOracle`] evaluates `f(M) = U f(Λ) U*` from a dense Hermitian
//! eigendecomposition. Its absolute accuracy is a small multiple of
//! `n · eps · max |f(λ)|`, so entries far from the diagonal that are below
//! that floor are noise.
//!
//! [`SeriesOracle`] covers real symmetric Z-matrices (non-positive
//! off-diagonal entries). Writing `M = c (I - P)` with `P >= 0` entrywise,
//! every supported `f(M)` is a power series in `P` with non-negative
//! coefficients, so each entry is a sum of non-negative terms and is computed
//! to high *relative* accuracy no matter how small it is.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, DecayError, Result};
use crate::matrix::{Hermitian, KroneckerSum, MultiIndex};
use crate::quadrature::{split_segments, QuadConfig, integrate_segments};

const HERMITIAN_CHECK: f64 = 1e-12;

fn check_hermitian(m: &DMatrix<Complex64>) -> Result<()> {
    if !m.is_square() {
        return Err(invalid("matrix is not square"));
    }
    let scale = m.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > HERMITIAN_CHECK * scale {
                return Err(DecayError::NotHermitian(format!("entries ({i}, {j}) and ({j}, {i}) differ")));
            }
        }
    }
    Ok(())
}

fn is_real(m: &DMatrix<Complex64>) -> bool {
    m.iter().all(|v| v.im == 0.0)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    let mut ev: Vec<f64> = if is_real(m) {
        m.map(|v| v.re).symmetric_eigenvalues().iter().copied().collect()
    } else {
        m.clone().symmetric_eigenvalues().iter().copied().collect()
    };
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// `M = U diag(λ) U*` with ascending eigenvalues and unitary `U`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

impl EigenDecomposition {
    pub fn new(m: &DMatrix<Complex64>) -> Result<Self> {
        check_hermitian(m)?;
        let (values, vectors) = if is_real(m) {
            let e = SymmetricEigen::new(m.map(|v| v.re));
            (e.eigenvalues, e.eigenvectors.map(|v| Complex64::new(v, 0.0)))
        } else {
            let e = SymmetricEigen::new(m.clone());
            (e.eigenvalues, e.eigenvectors)
        };
        let mut perm: Vec<usize> = (0..values.len()).collect();
        perm.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let eigenvalues = perm.iter().map(|&p| values[p]).collect();
        let eigenvectors = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| vectors[(i, perm[j])]);
        Ok(Self { eigenvalues, eigenvectors })
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    fn values_of<F: Fn(f64) -> Complex64>(&self, f: F) -> Result<Vec<Complex64>> {
        self.eigenvalues
            .iter()
            .map(|&l| {
                let v = f(l);
                if v.re.is_finite() && v.im.is_finite() {
                    Ok(v)
                } else {
                    Err(DecayError::UndefinedAtEigenvalue(l))
                }
            })
            .collect()
    }
}

/// Dense reference evaluator for one Hermitian matrix; the decomposition is
/// computed once and shared by all queries.
#[derive(Debug, Clone)]
pub struct DenseOracle {
    matrix: DMatrix<Complex64>,
    eig: EigenDecomposition,
}

impl DenseOracle {
    pub fn new<M: Hermitian + ?Sized>(m: &M) -> Result<Self> {
        Self::from_dense(m.to_dense())
    }

    pub fn from_dense(matrix: DMatrix<Complex64>) -> Result<Self> {
        let eig = EigenDecomposition::new(&matrix)?;
        Ok(Self { matrix, eig })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn eigen(&self) -> &EigenDecomposition {
        &self.eig
    }

    pub fn order(&self) -> usize {
        self.matrix.nrows()
    }

    /// `f(M)` for real-valued `f`, symmetrized.
    pub fn matrix_function<F: Fn(f64) -> f64>(&self, f: F) -> Result<DMatrix<Complex64>> {
        let out = self.matrix_function_complex(|x| Complex64::new(f(x), 0.0))?;
        Ok((&out + out.adjoint()).map(|v| v * 0.5))
    }

    /// `f(M)` for complex-valued `f` (e.g. `f(x) = (x + iζ)^{-1/2}`).
    pub fn matrix_function_complex<F: Fn(f64) -> Complex64>(&self, f: F) -> Result<DMatrix<Complex64>> {
        let fv = self.eig.values_of(f)?;
        let u = &self.eig.eigenvectors;
        let mut scaled = u.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= fv[j];
        }
        Ok(scaled * u.adjoint())
    }

    /// Column `t` of `f(M)`.
    pub fn function_column<F: Fn(f64) -> Complex64>(&self, t: usize, f: F) -> Result<DVector<Complex64>> {
        self.check_index(t)?;
        let fv = self.eig.values_of(f)?;
        let u = &self.eig.eigenvectors;
        let coeffs = DVector::from_fn(u.ncols(), |i, _| fv[i] * u[(t, i)].conj());
        Ok(u * coeffs)
    }

    pub fn function_entry<F: Fn(f64) -> Complex64>(&self, k: usize, t: usize, f: F) -> Result<Complex64> {
        self.check_index(k)?;
        self.check_index(t)?;
        let fv = self.eig.values_of(f)?;
        let u = &self.eig.eigenvectors;
        Ok((0..u.ncols()).map(|i| fv[i] * u[(k, i)] * u[(t, i)].conj()).sum())
    }

    /// Entry `(k, t)` of `exp(-τ M)`; no validation, used in inner loops.
    pub(crate) fn exp_entry(&self, tau: f64, k: usize, t: usize) -> Complex64 {
        let u = &self.eig.eigenvectors;
        self.eig
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &l)| (-tau * l).exp() * u[(k, i)] * u[(t, i)].conj())
            .sum()
    }

    /// Absolute accuracy of entries of `f(M)` computed here, given
    /// `max |f(λ)|` over the spectrum.
    pub fn noise_floor(&self, max_abs_f: f64) -> f64 {
        64.0 * self.order() as f64 * f64::EPSILON * max_abs_f
    }

    /// Solves `(M - shift I) x = e_t`.
    pub fn resolvent_column(&self, shift: Complex64, t: usize) -> Result<DVector<Complex64>> {
        self.check_index(t)?;
        let scale = self.eig.eigenvalues.iter().fold(1.0f64, |a, l| a.max(l.abs()));
        let gap = self.eig.eigenvalues.iter().map(|&l| (Complex64::new(l, 0.0) - shift).norm()).fold(f64::INFINITY, f64::min);
        if gap <= 1e-12 * scale {
            return Err(DecayError::SingularShift(shift.to_string()));
        }
        let n = self.order();
        let shifted = &self.matrix - DMatrix::<Complex64>::identity(n, n) * shift;
        let mut rhs = DVector::zeros(n);
        rhs[t] = Complex64::new(1.0, 0.0);
        shifted.lu().solve(&rhs).ok_or_else(|| DecayError::SingularShift(shift.to_string()))
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.order() {
            Ok(())
        } else {
            Err(DecayError::OutOfRange(format!("index {i} in a matrix of order {}", self.order())))
        }
    }
}

/// `X_t = -∫_0^∞ exp(-τ M_1) E_t exp(-τ (M_2^T - ω I)) dτ` by quadrature,
/// where `E_t = e_{t_1} e_{t_2}^T`.
///
/// Row `k_1`, column `k_2` of the result is entry `(k_1, k_2)` of the
/// Kronecker column `(ω I - A)^{-1} e_t` for `A = M_1 ⊕ M_2`.
pub fn lancaster_column(a: &KroneckerSum, omega: f64, t: &MultiIndex, cfg: &QuadConfig) -> Result<DMatrix<Complex64>> {
    if a.factors().len() != 2 {
        return Err(DecayError::Unsupported("the Lancaster representation needs exactly two factors".into()));
    }
    if omega > 0.0 {
        return Err(invalid(format!("omega must be <= 0, got {omega}")));
    }
    a.linearize(t)?;
    let o1 = DenseOracle::new(&a.factors()[0])?;
    let o2 = DenseOracle::new(&a.factors()[1])?;
    for o in [&o1, &o2] {
        if o.eigen().lambda_min() <= 0.0 {
            return Err(DecayError::NotPositiveDefinite { lambda_min: o.eigen().lambda_min() });
        }
    }
    let decay = o1.eigen().lambda_min() + o2.eigen().lambda_min() - omega;
    let segments = split_segments(0.0, f64::INFINITY, &[], 0.0, 1.0 / decay);
    let (t1, t2) = (t.0[0], t.0[1]);
    let (n1, n2) = (o1.order(), o2.order());
    let mut x = DMatrix::zeros(n1, n2);
    let mut first_err = None;
    for k1 in 0..n1 {
        for k2 in 0..n2 {
            let entry = |tau: f64| -> Complex64 {
                -(tau * omega).exp() * o1.exp_entry(tau, k1, t1) * o2.exp_entry(tau, k2, t2)
            };
            let re = integrate_segments(|tau| entry(tau).re, &segments, cfg);
            let im = if is_real(o1.matrix()) && is_real(o2.matrix()) {
                crate::quadrature::QuadratureResult::ZERO
            } else {
                integrate_segments(|tau| entry(tau).im, &segments, cfg)
            };
            if !(re.converged && im.converged) && first_err.is_none() {
                first_err = Some(format!("entry ({k1}, {k2}): error estimate {:e}", re.error_estimate + im.error_estimate));
            }
            x[(k1, k2)] = Complex64::new(re.value, im.value);
        }
    }
    match first_err {
        Some(msg) => Err(DecayError::Quadrature(msg)),
        None => Ok(x),
    }
}

/// Functions with a non-negative power series in `P` for `M = c (I - P)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeriesFunction {
    /// `exp(-τ M)`.
    Exp { tau: f64 },
    /// `M^{-σ}`, `σ > 0` (`σ = 1` is the inverse, `σ = 1/2` the inverse square root).
    InvPow { sigma: f64 },
    /// `M^{-1} (I - exp(-M))`.
    Phi1,
}

/// High-relative-accuracy oracle for real symmetric Z-matrices.
#[derive(Debug, Clone)]
pub struct SeriesOracle {
    /// Rows of `P = I - M / c`.
    rows: Vec<Vec<(usize, f64)>>,
    c: f64,
}

const SERIES_REL_TOL: f64 = 1e-18;
const SERIES_MAX_TERMS: usize = 200_000;
const SERIES_STABLE_TERMS: usize = 8;

impl SeriesOracle {
    /// Fails unless `M` is real with non-positive off-diagonal entries and a
    /// positive diagonal.
    pub fn new<M: Hermitian + ?Sized>(m: &M) -> Result<Self> {
        let n = m.order();
        let c = m.max_diagonal();
        if !(c > 0.0) {
            return Err(DecayError::Unsupported("series oracle needs a positive diagonal".into()));
        }
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut bad = None;
        let mut diag = vec![0.0; n];
        m.for_each_entry(&mut |i, j, v| {
            if v.im != 0.0 || (i != j && v.re > 0.0) {
                bad = Some((i, j));
            }
            if i == j {
                diag[i] += v.re;
            } else if v.re != 0.0 {
                rows[i].push((j, -v.re / c));
            }
        });
        if let Some((i, j)) = bad {
            return Err(DecayError::Unsupported(format!(
                "series oracle needs a real Z-matrix; entry ({i}, {j}) violates this"
            )));
        }
        for (i, row) in rows.iter_mut().enumerate() {
            let d = 1.0 - diag[i] / c;
            if d != 0.0 {
                row.push((i, d));
            }
            row.sort_by_key(|&(j, _)| j);
        }
        Ok(Self { rows, c })
    }

    pub fn order(&self) -> usize {
        self.rows.len()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (i, row) in self.rows.iter().enumerate() {
            out[i] = row.iter().map(|&(j, p)| p * v[j]).sum();
        }
    }

    fn reachable_from(&self, t: usize) -> Vec<usize> {
        let mut seen = vec![false; self.order()];
        let mut queue = VecDeque::from([t]);
        seen[t] = true;
        let mut out = Vec::new();
        while let Some(i) = queue.pop_front() {
            out.push(i);
            for &(j, _) in &self.rows[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        out
    }

    /// Column `t` of `f(M)`.
    pub fn column(&self, f: SeriesFunction, t: usize) -> Result<Vec<f64>> {
        let n = self.order();
        if t >= n {
            return Err(DecayError::OutOfRange(format!("index {t} in a matrix of order {n}")));
        }
        let c = self.c;
        let coefficients = Coefficients::new(f, c)?;
        let reachable = self.reachable_from(t);
        let mut v = vec![0.0; n];
        v[t] = 1.0;
        let mut next = vec![0.0; n];
        let mut acc = vec![0.0; n];
        let mut stable = 0;
        for k in 0..SERIES_MAX_TERMS {
            let a = coefficients.at(k);
            for i in 0..n {
                acc[i] += a * v[i];
            }
            if k >= coefficients.min_terms {
                let small = reachable.iter().all(|&i| acc[i] > 0.0 && a * v[i] <= SERIES_REL_TOL * acc[i]);
                stable = if small { stable + 1 } else { 0 };
                if stable >= SERIES_STABLE_TERMS {
                    return Ok(acc);
                }
            }
            self.apply(&v, &mut next);
            std::mem::swap(&mut v, &mut next);
        }
        Err(DecayError::Quadrature(format!("series oracle did not converge in {SERIES_MAX_TERMS} terms")))
    }
}

struct Coefficients {
    f: SeriesFunction,
    c: f64,
    min_terms: usize,
}

impl Coefficients {
    fn new(f: SeriesFunction, c: f64) -> Result<Self> {
        let min_terms = match f {
            SeriesFunction::Exp { tau } => {
                if !(tau >= 0.0) {
                    return Err(invalid(format!("tau must be >= 0, got {tau}")));
                }
                (tau * c).ceil() as usize + 1
            }
            SeriesFunction::InvPow { sigma } => {
                if !(sigma > 0.0) {
                    return Err(invalid(format!("sigma must be > 0, got {sigma}")));
                }
                1
            }
            SeriesFunction::Phi1 => c.ceil() as usize + 1,
        };
        Ok(Self { f, c, min_terms })
    }

    fn at(&self, k: usize) -> f64 {
        let kf = k as f64;
        match self.f {
            SeriesFunction::Exp { tau } => {
                let lam = tau * self.c;
                if lam == 0.0 {
                    return if k == 0 { 1.0 } else { 0.0 };
                }
                (-lam + kf * lam.ln() - ln_gamma(kf + 1.0)).exp()
            }
            SeriesFunction::InvPow { sigma } => {
                // c^{-σ} (σ)_k / k!
                (-sigma * self.c.ln() + ln_gamma(sigma + kf) - ln_gamma(sigma) - ln_gamma(kf + 1.0)).exp()
            }
            SeriesFunction::Phi1 => poisson_upper_tail(self.c, k + 1) / self.c,
        }
    }
}

/// `P[X >= m]` for `X ~ Poisson(lam)`, summed from the tail so it keeps full
/// relative accuracy when tiny.
fn poisson_upper_tail(lam: f64, m: usize) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let ln_lam = lam.ln();
    let mut sum = 0.0;
    let mut j = m as f64;
    loop {
        let term = (-lam + j * ln_lam - ln_gamma(j + 1.0)).exp();
        sum += term;
        if j > lam && term <= 1e-20 * sum {
            break;
        }
        j += 1.0;
    }
    sum.min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{make_test_matrix, BandedHermitianMatrix, TestMatrixKind};

    fn re(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn identity_function_reproduces_matrix() {
        let m = make_test_matrix(TestMatrixKind::Pentadiag, 30).unwrap();
        let o = DenseOracle::new(&m).unwrap();
        let f = o.matrix_function(|x| x).unwrap();
        let diff = (&f - o.matrix()).camax();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn eigen_residual_and_orthogonality() {
        let sub = [Complex64::new(-1.0, 0.3)];
        let m = BandedHermitianMatrix::toeplitz(25, 4.0, &sub).unwrap();
        let o = DenseOracle::new(&m).unwrap();
        let u = &o.eigen().eigenvectors;
        let lam = DMatrix::from_diagonal(&DVector::from_iterator(25, o.eigen().eigenvalues.iter().map(|&l| re(l))));
        let resid = (o.matrix() * u - u * lam).camax();
        assert!(resid <= 1e-10 * o.matrix().camax(), "{resid}");
        let ortho = (u.adjoint() * u - DMatrix::identity(25, 25)).camax();
        assert!(ortho <= 1e-12, "{ortho}");
        assert!(o.eigen().eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn inverse_two_ways() {
        let m = make_test_matrix(TestMatrixKind::Tridiag, 60).unwrap();
        let o = DenseOracle::new(&m).unwrap();
        let inv = o.matrix_function(|x| 1.0 / x).unwrap();
        let direct = o.matrix().clone().try_inverse().unwrap();
        assert!((inv - direct).camax() <= 1e-10);
    }

    #[test]
    fn square_and_semigroup() {
        let m = make_test_matrix(TestMatrixKind::Pentadiag, 50).unwrap();
        let o = DenseOracle::new(&m).unwrap();
        let sq = o.matrix_function(|x| x * x).unwrap();
        assert!((sq - o.matrix() * o.matrix()).camax() <= 1e-10 * 30.0);
        let e1 = o.matrix_function(|x| (-0.3 * x).exp()).unwrap();
        let e2 = o.matrix_function(|x| (-0.9 * x).exp()).unwrap();
        let e12 = o.matrix_function(|x| (-1.2 * x).exp()).unwrap();
        assert!((e1 * e2 - e12).camax() <= 1e-9);
    }

    #[test]
    fn output_is_hermitian() {
        let sub = [Complex64::new(-1.0, 0.7), Complex64::new(0.2, 0.1)];
        let m = BandedHermitianMatrix::toeplitz(20, 5.0, &sub).unwrap();
        let o = DenseOracle::new(&m).unwrap();
        let f = o.matrix_function(|x| x.sqrt()).unwrap();
        assert!((&f - f.adjoint()).camax() <= 1e-12);
    }

    #[test]
    fn undefined_function_is_an_error() {
        let m = BandedHermitianMatrix::from_stencil(5, &[-1.0, 1.0, -1.0]).unwrap();
        let o = DenseOracle::new(&m).unwrap();
        assert!(matches!(o.matrix_function(|x| x.powf(-0.5)), Err(DecayError::UndefinedAtEigenvalue(_))));
    }

    #[test]
    fn resolvent_at_zero_matches_closed_form_inverse() {
        // inverse of tridiag(-1, 4, -1) of order 5: (M^{-1})_{ij} = U_{i-1}(2) U_{5-j}(2) / U_5(2)
        // for i <= j, with Chebyshev U_k(2) = 1, 4, 15, 56, 209, 780.
        let u = [1.0, 4.0, 15.0, 56.0, 209.0, 780.0];
        let m = make_test_matrix(TestMatrixKind::Tridiag, 5).unwrap();
        let o = DenseOracle::new(&m).unwrap();
        for t in 0..5 {
            let col = o.resolvent_column(Complex64::default(), t).unwrap();
            for k in 0..5 {
                let (i, j) = (k.min(t), k.max(t));
                let exact = u[i] * u[4 - j] / u[5];
                assert!((col[k].re - exact).abs() < 1e-14, "({k},{t})");
            }
        }
    }

    #[test]
    fn resolvent_shifts() {
        let m = make_test_matrix(TestMatrixKind::Tridiag, 8).unwrap();
        let o = DenseOracle::new(&m).unwrap();
        let col = o.resolvent_column(Complex64::new(0.0, 1.0), 3).unwrap();
        assert!(col.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
        let l1 = o.eigen().lambda_min();
        assert!(matches!(o.resolvent_column(re(l1), 3), Err(DecayError::SingularShift(_))));
    }

    #[test]
    fn lancaster_identity_factors() {
        let id = BandedHermitianMatrix::identity(4).unwrap();
        let a = KroneckerSum::new(vec![id.clone(), id]).unwrap();
        let x = lancaster_column(&a, 0.0, &MultiIndex(vec![1, 2]), &QuadConfig::new(1e-12)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if (i, j) == (1, 2) { -0.5 } else { 0.0 };
                assert!((x[(i, j)].re - expected).abs() < 1e-10);
                assert_eq!(x[(i, j)].im, 0.0);
            }
        }
    }

    #[test]
    fn series_matches_eigen_where_resolvable() {
        for kind in [TestMatrixKind::Tridiag, TestMatrixKind::Pentadiag] {
            let m = make_test_matrix(kind, 60).unwrap();
            let dense = DenseOracle::new(&m).unwrap();
            let series = SeriesOracle::new(&m).unwrap();
            let cases: [(SeriesFunction, Box<dyn Fn(f64) -> f64>); 4] = [
                (SeriesFunction::Exp { tau: 4.0 }, Box::new(|x: f64| (-4.0 * x).exp())),
                (SeriesFunction::InvPow { sigma: 1.0 }, Box::new(|x: f64| 1.0 / x)),
                (SeriesFunction::InvPow { sigma: 0.5 }, Box::new(|x: f64| x.powf(-0.5))),
                (SeriesFunction::Phi1, Box::new(|x: f64| (1.0 - (-x).exp()) / x)),
            ];
            for (sf, f) in cases.iter() {
                let s = series.column(*sf, 37).unwrap();
                let d = dense.function_column(37, |x| re(f(x))).unwrap();
                let fmax = dense.eigen().eigenvalues.iter().map(|&l| f(l).abs()).fold(0.0, f64::max);
                for k in 0..60 {
                    let tol = 1e-12 * d[k].re.abs() + dense.noise_floor(fmax);
                    assert!((s[k] - d[k].re).abs() <= tol, "{sf:?} k={k}: {} vs {}", s[k], d[k].re);
                }
            }
        }
    }

    #[test]
    fn series_rejects_positive_off_diagonal() {
        let m = BandedHermitianMatrix::from_stencil(6, &[1.0, 4.0, 1.0]).unwrap();
        assert!(matches!(SeriesOracle::new(&m), Err(DecayError::Unsupported(_))));
    }

    #[test]
    fn poisson_tail_sums_to_one() {
        assert!((poisson_upper_tail(4.0, 0) - 1.0).abs() < 1e-15);
        let p1 = 1.0 - (-4.0f64).exp();
        assert!((poisson_upper_tail(4.0, 1) - p1).abs() < 1e-15);
    }
}
