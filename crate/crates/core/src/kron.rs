//! Bounds and exact identities for functions of Kronecker sums
//! `A = M_1 ⊕ M_2 (⊕ M_3)`.
//!
//! Since the terms of a Kronecker sum commute,
//! `exp(-τA) = exp(-τM_1) ⊗ exp(-τM_2) ⊗ …`, so entries of `exp(-τA)` are
//! products of factor entries and the per-factor envelopes multiply. Bounds
//! for Laplace–Stieltjes and Cauchy–Stieltjes functions integrate that
//! product envelope over `τ`.

use num_complex::Complex64;

use crate::bounds::{ln_envelope, ExpEnvelopeParams, DEFAULT_BOUND_TOL};
use crate::error::{invalid, DecayError, Result};
use crate::matrix::{spectral_interval, Hermitian, KroneckerSum, MultiIndex, SpectralInterval, SpectrumSource};
use crate::measures::{laplace_transform_of_cauchy_abs, CauchyMeasure, LaplaceMeasure};
use crate::oracle::DenseOracle;
use crate::quadrature::{integrate_segments, split_segments, QuadConfig, QuadratureResult};

/// A Kronecker sum with the per-factor spectral data the bounds need.
#[derive(Debug, Clone)]
pub struct KroneckerContext {
    sum: KroneckerSum,
    spectra: Vec<SpectralInterval>,
    betas: Vec<f64>,
    pub quad: QuadConfig,
    /// Allow component distances below 2 in the integral bounds.
    pub extended: bool,
}

impl KroneckerContext {
    pub fn new(sum: KroneckerSum, source: SpectrumSource) -> Result<Self> {
        let spectra = sum.factors().iter().map(|m| spectral_interval(m, source)).collect::<Result<Vec<_>>>()?;
        let betas = sum.factors().iter().map(|m| m.bandwidth().max(1) as f64).collect();
        Ok(Self { sum, spectra, betas, quad: QuadConfig::relative(DEFAULT_BOUND_TOL), extended: false })
    }

    pub fn with_quad(mut self, quad: QuadConfig) -> Self {
        self.quad = quad;
        self
    }

    pub fn with_extended(mut self, extended: bool) -> Self {
        self.extended = extended;
        self
    }

    pub fn sum(&self) -> &KroneckerSum {
        &self.sum
    }

    pub fn factor_spectra(&self) -> &[SpectralInterval] {
        &self.spectra
    }

    pub fn factor_bandwidths(&self) -> &[f64] {
        &self.betas
    }

    /// `d_ℓ = |k_ℓ - t_ℓ| / β_ℓ` for every factor.
    pub fn distances(&self, k: &MultiIndex, t: &MultiIndex) -> Result<Vec<f64>> {
        self.sum.linearize(k)?;
        self.sum.linearize(t)?;
        Ok(k.0.iter().zip(&t.0).zip(&self.betas).map(|((&a, &b), &beta)| a.abs_diff(b) as f64 / beta).collect())
    }

    fn off_diagonal_distances(&self, k: &MultiIndex, t: &MultiIndex) -> Result<Vec<f64>> {
        if k == t {
            return Err(invalid("k = t is not covered by the bound"));
        }
        self.distances(k, t)
    }

    /// `Σ_ℓ (-λ_min,ℓ τ + ln Φ(ρ_ℓ τ, d_ℓ))`.
    fn ln_product_envelope(&self, tau: f64, d: &[f64]) -> f64 {
        self.spectra.iter().zip(d).map(|(s, &dl)| -s.lambda_min * tau + ln_envelope(s.rho() * tau, dl)).sum()
    }

    fn breakpoints(&self, d: &[f64]) -> Vec<f64> {
        let mut b = Vec::new();
        for (s, &dl) in self.spectra.iter().zip(d) {
            let rho = s.rho();
            if rho > 0.0 {
                b.extend([dl / (2.0 * rho), dl * dl / (4.0 * rho), 1.0 / rho]);
            }
        }
        b
    }

    fn check_integral_domain(&self, d: &[f64]) -> Result<bool> {
        for s in &self.spectra {
            s.require_positive_definite()?;
        }
        let extended = d.iter().any(|&dl| dl < 2.0);
        if extended && !self.extended {
            return Err(DecayError::Domain(format!(
                "Kronecker integral bounds need |k_i - t_i|/β_i >= 2 for every component, got distances {d:?}"
            )));
        }
        Ok(extended)
    }

    fn lambda_min_total(&self) -> f64 {
        self.spectra.iter().map(|s| s.lambda_min).sum()
    }
}

/// One Kronecker bound value.
#[derive(Debug, Clone, PartialEq)]
pub struct KronBound {
    pub value: f64,
    pub distances: Vec<f64>,
    pub error_estimate: f64,
    pub converged: bool,
    /// Some component lies outside the distance range the theory states.
    pub extended: bool,
}

impl KronBound {
    fn from_quadrature(r: QuadratureResult, extra: f64, distances: Vec<f64>, extended: bool) -> Self {
        Self {
            value: r.value + extra,
            distances,
            error_estimate: r.error_estimate,
            converged: r.converged,
            extended,
        }
    }
}

/// `Π_ℓ e^{-τ λ_min,ℓ} Φ(ρ_ℓ τ, d_ℓ)`, a bound on `|exp(-τA)_{kt}|`.
///
/// Components with `d_ℓ` below the covered range contribute the capped
/// factor `e^{-τ λ_min,ℓ}` and mark the result extended.
pub fn exp_kron_bound(ctx: &KroneckerContext, tau: f64, k: &MultiIndex, t: &MultiIndex) -> Result<KronBound> {
    let d = ctx.off_diagonal_distances(k, t)?;
    let mut extended = false;
    for (s, &dl) in ctx.spectra.iter().zip(&d) {
        let p = ExpEnvelopeParams::new(s, 1.0, tau)?;
        extended |= dl < p.covered_from();
    }
    Ok(KronBound {
        value: ctx.ln_product_envelope(tau, &d).exp(),
        distances: d,
        error_estimate: 0.0,
        converged: true,
        extended,
    })
}

/// `∫ Π_ℓ e^{-λ_min,ℓ τ} Φ(ρ_ℓ τ, d_ℓ) dα(τ)`.
pub fn laplace_kron_bound(
    ctx: &KroneckerContext,
    measure: &LaplaceMeasure,
    k: &MultiIndex,
    t: &MultiIndex,
) -> Result<KronBound> {
    let d = ctx.off_diagonal_distances(k, t)?;
    let extended = ctx.check_integral_domain(&d)?;
    let atoms: f64 = measure.atoms().iter().map(|&(tau, c)| c * ctx.ln_product_envelope(tau, &d).exp()).sum();
    if !measure.has_density() {
        return Ok(KronBound::from_quadrature(QuadratureResult::ZERO, atoms, d, extended));
    }
    let segs = split_segments(
        0.0,
        measure.support_end(),
        &ctx.breakpoints(&d),
        measure.singular_exponent().min(0.0),
        1.0 / ctx.lambda_min_total(),
    );
    let r = integrate_segments(
        |tau| (measure.ln_density(tau) + ctx.ln_product_envelope(tau, &d)).exp(),
        &segs,
        &ctx.quad,
    );
    Ok(KronBound::from_quadrature(r, atoms, d, extended))
}

/// [`laplace_kron_bound`] restricted to three factors.
pub fn laplace_kron_bound_3d(
    ctx: &KroneckerContext,
    measure: &LaplaceMeasure,
    k: &MultiIndex,
    t: &MultiIndex,
) -> Result<KronBound> {
    if ctx.sum.factors().len() != 3 {
        return Err(invalid(format!("expected 3 factors, got {}", ctx.sum.factors().len())));
    }
    laplace_kron_bound(ctx, measure, k, t)
}

/// `g(τ)` in closed form when the measure has one and is non-negative,
/// otherwise the absolute transform by quadrature.
fn abs_transform(measure: &CauchyMeasure, tau: f64) -> f64 {
    let inner = QuadConfig::relative(1e-12).with_max_panels(50_000);
    laplace_transform_of_cauchy_abs(measure, tau, &inner).unwrap_or(f64::NAN)
}

/// `∫_0^∞ Π_ℓ e^{-λ_min,ℓ τ} Φ(ρ_ℓ τ, d_ℓ) |g|(τ) dτ` with
/// `|g|(τ) = ∫ e^{τω} |dγ(ω)|`.
pub fn cauchy_kron_bound(
    ctx: &KroneckerContext,
    measure: &CauchyMeasure,
    k: &MultiIndex,
    t: &MultiIndex,
) -> Result<KronBound> {
    let d = ctx.off_diagonal_distances(k, t)?;
    let extended = ctx.check_integral_domain(&d)?;
    let segs = split_segments(
        0.0,
        f64::INFINITY,
        &ctx.breakpoints(&d),
        measure.g_singular_exponent().min(0.0),
        1.0 / ctx.lambda_min_total(),
    );
    let r = integrate_segments(
        |tau| {
            let ln_e = ctx.ln_product_envelope(tau, &d);
            if ln_e == f64::NEG_INFINITY {
                return 0.0;
            }
            abs_transform(measure, tau) * ln_e.exp()
        },
        &segs,
        &ctx.quad,
    );
    if r.value.is_nan() {
        return Err(DecayError::Divergent(format!("|g|(τ) for measure {} could not be evaluated", measure.name())));
    }
    Ok(KronBound::from_quadrature(r, 0.0, d, extended))
}

/// Hölder split of [`cauchy_kron_bound`]:
/// `Π_ℓ (∫ E_ℓ(τ)^m |g|(τ) dτ)^{1/m}` for `m` factors (Cauchy–Schwarz when
/// `m = 2`). Never smaller than the direct integral.
pub fn cauchy_kron_bound_split(
    ctx: &KroneckerContext,
    measure: &CauchyMeasure,
    k: &MultiIndex,
    t: &MultiIndex,
) -> Result<KronBound> {
    let d = ctx.off_diagonal_distances(k, t)?;
    let extended = ctx.check_integral_domain(&d)?;
    let m = d.len() as f64;
    let mut value = 1.0;
    let mut err_rel = 0.0;
    let mut converged = true;
    for (s, &dl) in ctx.spectra.iter().zip(&d) {
        let rho = s.rho();
        let breaks: Vec<f64> = if rho > 0.0 { vec![dl / (2.0 * rho), dl * dl / (4.0 * rho), 1.0 / rho] } else { vec![] };
        let segs = split_segments(0.0, f64::INFINITY, &breaks, measure.g_singular_exponent().min(0.0), 1.0 / (m * s.lambda_min));
        let r = integrate_segments(
            |tau| {
                let ln_e = m * (-s.lambda_min * tau + ln_envelope(rho * tau, dl));
                if ln_e == f64::NEG_INFINITY {
                    0.0
                } else {
                    abs_transform(measure, tau) * ln_e.exp()
                }
            },
            &segs,
            &ctx.quad,
        );
        value *= r.value.powf(1.0 / m);
        err_rel += r.relative_error() / m;
        converged &= r.converged;
    }
    Ok(KronBound { value, distances: d, error_estimate: err_rel * value, converged, extended })
}

/// Dense reference computations for a Kronecker sum through the factor
/// eigendecompositions.
#[derive(Debug, Clone)]
pub struct KronOracle {
    sum: KroneckerSum,
    factors: Vec<DenseOracle>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Sin,
    Cos,
}

impl KronOracle {
    pub fn new(sum: &KroneckerSum) -> Result<Self> {
        let factors = sum.factors().iter().map(DenseOracle::new).collect::<Result<Vec<_>>>()?;
        Ok(Self { sum: sum.clone(), factors })
    }

    pub fn factors(&self) -> &[DenseOracle] {
        &self.factors
    }

    /// `exp(-τA)_{kt}` as the product of factor entries.
    pub fn exp_entry(&self, tau: f64, k: &MultiIndex, t: &MultiIndex) -> Result<Complex64> {
        self.sum.linearize(k)?;
        self.sum.linearize(t)?;
        Ok(self
            .factors
            .iter()
            .zip(k.0.iter().zip(&t.0))
            .map(|(o, (&a, &b))| o.exp_entry(tau, a, b))
            .product())
    }

    /// `sin(A)_{kt}` or `cos(A)_{kt}` from the two-factor addition formulas.
    pub fn sincos_entry(&self, which: Trig, k: &MultiIndex, t: &MultiIndex) -> Result<Complex64> {
        if self.factors.len() != 2 {
            return Err(DecayError::Unsupported(format!(
                "trigonometric identities need 2 factors, got {}",
                self.factors.len()
            )));
        }
        self.sum.linearize(k)?;
        self.sum.linearize(t)?;
        let entry = |l: usize, f: fn(f64) -> f64| -> Result<Complex64> {
            self.factors[l].function_entry(k.0[l], t.0[l], |x| Complex64::new(f(x), 0.0))
        };
        let (s1, c1) = (entry(0, f64::sin)?, entry(0, f64::cos)?);
        let (s2, c2) = (entry(1, f64::sin)?, entry(1, f64::cos)?);
        Ok(match which {
            Trig::Sin => s1 * c2 + c1 * s2,
            Trig::Cos => c1 * c2 - s1 * s2,
        })
    }

    /// Column `t` of `f(A)` in the linear order of the sum, computed as
    /// `(U_1 ⊗ … ⊗ U_d) f(Λ) (U_1 ⊗ … ⊗ U_d)^* e_t` one mode at a time.
    pub fn function_column<F: Fn(f64) -> Complex64>(&self, t: &MultiIndex, f: F) -> Result<Vec<Complex64>> {
        self.sum.linearize(t)?;
        let dims = self.sum.dims();
        let strides = self.sum.strides();
        let total: usize = dims.iter().product();
        let mut coeffs = vec![Complex64::default(); total];
        for (lin, c) in coeffs.iter_mut().enumerate() {
            let mut lam = 0.0;
            let mut w = Complex64::new(1.0, 0.0);
            for l in 0..dims.len() {
                let i = (lin / strides[l]) % dims[l];
                let eig = self.factors[l].eigen();
                lam += eig.eigenvalues[i];
                w *= eig.eigenvectors[(t.0[l], i)].conj();
            }
            let fv = f(lam);
            if !(fv.re.is_finite() && fv.im.is_finite()) {
                return Err(DecayError::UndefinedAtEigenvalue(lam));
            }
            *c = fv * w;
        }
        let mut fiber = Vec::new();
        for l in 0..dims.len() {
            let u = &self.factors[l].eigen().eigenvectors;
            let (n, s) = (dims[l], strides[l]);
            for base in 0..total {
                if (base / s) % n != 0 {
                    continue;
                }
                fiber.clear();
                fiber.extend((0..n).map(|i| coeffs[base + i * s]));
                for r in 0..n {
                    coeffs[base + r * s] = (0..n).map(|i| u[(r, i)] * fiber[i]).sum();
                }
            }
        }
        Ok(coeffs)
    }

    /// Absolute accuracy of [`KronOracle::function_column`] given `max |f|`.
    pub fn noise_floor(&self, max_abs_f: f64) -> f64 {
        64.0 * Hermitian::order(&self.sum) as f64 * f64::EPSILON * max_abs_f
    }

    /// Smallest and largest eigenvalue of `A`: sums of the factor extremes.
    pub fn eigenvalue_range(&self) -> (f64, f64) {
        let lo = self.factors.iter().map(|o| o.eigen().lambda_min()).sum();
        let hi = self.factors.iter().map(|o| o.eigen().lambda_max()).sum();
        (lo, hi)
    }
}

/// `exp(-τA)_{kt}`; builds the factor oracles on every call, so prefer
/// [`KronOracle::exp_entry`] in loops.
pub fn exp_kron_entry_exact(sum: &KroneckerSum, tau: f64, k: &MultiIndex, t: &MultiIndex) -> Result<Complex64> {
    KronOracle::new(sum)?.exp_entry(tau, k, t)
}

/// `sin(A)_{kt}` or `cos(A)_{kt}` for a two-factor sum.
pub fn sincos_kron_exact(sum: &KroneckerSum, k: &MultiIndex, t: &MultiIndex, which: Trig) -> Result<Complex64> {
    KronOracle::new(sum)?.sincos_entry(which, k, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{make_test_matrix, BandedHermitianMatrix, IndexOrder, TestMatrixKind};
    use crate::measures::{cauchy_catalog, laplace_catalog};

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex(v.to_vec())
    }

    fn sum2(kind: TestMatrixKind, n: usize) -> KroneckerSum {
        let m = make_test_matrix(kind, n).unwrap();
        KroneckerSum::new(vec![m.clone(), m]).unwrap()
    }

    #[test]
    fn exp_at_zero_is_identity() {
        let s = sum2(TestMatrixKind::Tridiag, 6);
        let o = KronOracle::new(&s).unwrap();
        assert!((o.exp_entry(0.0, &mi(&[2, 3]), &mi(&[2, 3])).unwrap().re - 1.0).abs() < 1e-14);
        assert!(o.exp_entry(0.0, &mi(&[2, 3]), &mi(&[2, 4])).unwrap().norm() < 1e-14);
    }

    #[test]
    fn function_column_matches_assembled_oracle() {
        for order in [IndexOrder::LastFastest, IndexOrder::FirstFastest] {
            let a = BandedHermitianMatrix::from_stencil(4, &[-1.0, 3.0, -1.0]).unwrap();
            let b = make_test_matrix(TestMatrixKind::Pentadiag, 5).unwrap();
            let s = KroneckerSum::new(vec![a, b]).unwrap().with_order(order);
            let ko = KronOracle::new(&s).unwrap();
            let dense = DenseOracle::from_dense(s.assemble().unwrap()).unwrap();
            let t = mi(&[1, 3]);
            let col = ko.function_column(&t, |x| Complex64::new(x.powf(-0.5), 0.0)).unwrap();
            let lin = s.linearize(&t).unwrap();
            let reference = dense.function_column(lin, |x| Complex64::new(x.powf(-0.5), 0.0)).unwrap();
            for i in 0..col.len() {
                assert!((col[i] - reference[i]).norm() < 1e-12, "{order:?} {i}");
            }
        }
    }

    #[test]
    fn sincos_with_zero_second_factor() {
        let m1 = make_test_matrix(TestMatrixKind::Tridiag, 5).unwrap();
        let zero = BandedHermitianMatrix::from_stencil(4, &[0.0]).unwrap();
        let s = KroneckerSum::new(vec![m1.clone(), zero]).unwrap();
        let o1 = DenseOracle::new(&m1).unwrap();
        for (k, t) in [([1, 2], [3, 2]), ([1, 2], [3, 1])] {
            let v = sincos_kron_exact(&s, &mi(&k), &mi(&t), Trig::Sin).unwrap();
            let expected = if k[1] == t[1] {
                o1.function_entry(k[0], t[0], |x| Complex64::new(x.sin(), 0.0)).unwrap()
            } else {
                Complex64::default()
            };
            assert!((v - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn sincos_needs_two_factors() {
        let m = make_test_matrix(TestMatrixKind::Tridiag, 3).unwrap();
        let s = KroneckerSum::new(vec![m.clone(), m.clone(), m]).unwrap();
        assert!(matches!(
            sincos_kron_exact(&s, &mi(&[0, 0, 0]), &mi(&[1, 1, 1]), Trig::Cos),
            Err(DecayError::Unsupported(_))
        ));
    }

    #[test]
    fn exp_bound_caps_equal_components() {
        let ctx = KroneckerContext::new(sum2(TestMatrixKind::Tridiag, 20), SpectrumSource::Exact).unwrap();
        let b = exp_kron_bound(&ctx, 1.0, &mi(&[15, 4]), &mi(&[3, 4])).unwrap();
        assert!(b.extended);
        let s = ctx.factor_spectra()[0];
        let single = crate::bounds::exp_bound_at(&s, 1.0, 12.0).unwrap();
        assert!((b.value - single * (-s.lambda_min).exp()).abs() <= 1e-14 * b.value);
        assert!(exp_kron_bound(&ctx, 1.0, &mi(&[3, 4]), &mi(&[3, 4])).is_err());
    }

    #[test]
    fn laplace_exp_atom_is_exp_kron_bound() {
        let ctx = KroneckerContext::new(sum2(TestMatrixKind::Pentadiag, 12), SpectrumSource::Exact).unwrap();
        let m = laplace_catalog("exp").unwrap();
        let (k, t) = (mi(&[10, 9]), mi(&[2, 1]));
        let a = laplace_kron_bound(&ctx, &m, &k, &t).unwrap().value;
        let b = exp_kron_bound(&ctx, 1.0, &k, &t).unwrap().value;
        assert_eq!(a, b);
    }

    #[test]
    fn strict_domain_needs_all_components() {
        let ctx = KroneckerContext::new(sum2(TestMatrixKind::Tridiag, 10), SpectrumSource::Exact).unwrap();
        let m = laplace_catalog("phi1").unwrap();
        assert!(matches!(laplace_kron_bound(&ctx, &m, &mi(&[9, 2]), &mi(&[1, 1])), Err(DecayError::Domain(_))));
        let ext = ctx.clone().with_extended(true);
        let b = laplace_kron_bound(&ext, &m, &mi(&[9, 2]), &mi(&[1, 1])).unwrap();
        assert!(b.extended && b.value > 0.0);
    }

    #[test]
    fn factor_swap_symmetry() {
        let ctx = KroneckerContext::new(sum2(TestMatrixKind::Tridiag, 12), SpectrumSource::Exact).unwrap();
        let m = laplace_catalog("inv_sqrt").unwrap();
        let a = laplace_kron_bound(&ctx, &m, &mi(&[9, 2]), &mi(&[1, 6])).unwrap().value;
        let b = laplace_kron_bound(&ctx, &m, &mi(&[2, 9]), &mi(&[6, 1])).unwrap().value;
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn split_dominates_direct() {
        let ctx = KroneckerContext::new(sum2(TestMatrixKind::Tridiag, 12), SpectrumSource::Exact).unwrap();
        let m = cauchy_catalog("inv_sqrt").unwrap();
        for (k, t) in [([9, 2], [1, 6]), ([11, 8], [2, 2])] {
            let (k, t) = (mi(&k), mi(&t));
            let ext = ctx.clone().with_extended(true);
            let direct = cauchy_kron_bound(&ext, &m, &k, &t).unwrap();
            let split = cauchy_kron_bound_split(&ext, &m, &k, &t).unwrap();
            assert!(split.value >= direct.value * (1.0 - 1e-8), "{} < {}", split.value, direct.value);
        }
    }

    #[test]
    fn cauchy_and_laplace_paths_agree_for_inv_sqrt() {
        let ctx = KroneckerContext::new(sum2(TestMatrixKind::Pentadiag, 12), SpectrumSource::Exact).unwrap();
        let lm = laplace_catalog("inv_sqrt").unwrap();
        let cm = cauchy_catalog("inv_sqrt").unwrap();
        let (k, t) = (mi(&[11, 0]), mi(&[2, 7]));
        let a = laplace_kron_bound(&ctx, &lm, &k, &t).unwrap();
        let b = cauchy_kron_bound(&ctx, &cm, &k, &t).unwrap();
        assert!((a.value - b.value).abs() <= 1e-8 * a.value);
    }
}
