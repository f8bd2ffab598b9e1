//! Entrywise decay bounds for functions of one banded (or sparse) Hermitian
//! positive definite matrix.
//!
//! Every bound is a function of a distance `d`, which is `|k - t| / β` for a
//! `β`-banded matrix or the geodesic distance in the sparsity graph. The
//! building blocks are
//!
//! * the exponential envelope `Φ(ρτ, d)` bounding `|exp(-τ M̂)_{kt}|` for
//!   `M̂ = M - λ_min I` with spectrum in `[0, 4ρ]`;
//! * the Demko kernel `C q^d` for `|M^{-1}_{kt}|` and its shifted variants;
//! * the Freund kernel `C(ζ) R^{-d}` for complex shifts.
//!
//! Laplace–Stieltjes bounds integrate the exponential envelope against
//! `dα(τ)`; Cauchy–Stieltjes bounds integrate the resolvent kernels against
//! `|dγ(ω)|`.

use std::f64::consts::{LN_10, PI};

use num_complex::Complex64;

use crate::error::{invalid, DecayError, Result};
use crate::matrix::{Hermitian, SpectralInterval, SpectrumSource};
use crate::measures::{CauchyMeasure, LaplaceMeasure};
use crate::quadrature::{integrate_segments, split_segments, QuadConfig, QuadratureResult};

/// Relative tolerance used for bound integrals unless overridden.
pub const DEFAULT_BOUND_TOL: f64 = 1e-10;

/// Parameters of the exponential envelope for `exp(-τ M)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpEnvelopeParams {
    pub rho: f64,
    pub tau: f64,
    pub beta: f64,
    pub lambda_min: f64,
}

impl ExpEnvelopeParams {
    pub fn new(spectrum: &SpectralInterval, beta: f64, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(invalid(format!("tau must be positive, got {tau}")));
        }
        check_beta(beta)?;
        Ok(Self { rho: spectrum.rho(), tau, beta, lambda_min: spectrum.lambda_min })
    }

    /// `ρτ`.
    pub fn x(&self) -> f64 {
        self.rho * self.tau
    }

    /// Smallest distance covered by a non-trivial regime.
    pub fn covered_from(&self) -> f64 {
        let x = self.x();
        if x >= 1.0 {
            2.0 * x.sqrt()
        } else {
            2.0 * x
        }
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("bandwidth must be positive, got {beta}")))
    }
}

/// `ln Φ(x, d)` with `x = ρτ`, including the cap at 1.
///
/// Beyond `d = 2x` (when `x >= 1`) the value is also capped by the regime-i
/// value at `d = 2x`, which keeps the envelope nonincreasing in `d`.
pub(crate) fn ln_envelope(x: f64, d: f64) -> f64 {
    if d <= 0.0 {
        return 0.0;
    }
    if x <= 0.0 {
        return if d > 1.0 { f64::NEG_INFINITY } else { 0.0 };
    }
    let mut best: f64 = 0.0;
    if d >= 2.0 * x {
        let regime_ii = LN_10 - x + (d - 1.0) * x.ln() + d - d * d.ln();
        best = best.min(regime_ii);
        if x >= 1.0 {
            best = best.min(LN_10 - 0.8 * x);
        }
    }
    if x >= 1.0 && d >= 2.0 * x.sqrt() && d <= 2.0 * x {
        best = best.min(LN_10 - d * d / (5.0 * x));
    }
    best
}

/// `Φ(x, d)` for `x = ρτ >= 0`, `d >= 0`; equals 1 at `d = 0`.
pub fn envelope(x: f64, d: f64) -> f64 {
    ln_envelope(x, d).exp()
}

/// The exponential decay envelope at distance `d > 0`.
pub fn phi(params: &ExpEnvelopeParams, d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(invalid(format!("phi needs a positive distance, got {d}")));
    }
    Ok(envelope(params.x(), d))
}

/// Bound on `|exp(-τ M)_{kt}|` at distance `d > 0`.
pub fn exp_bound_at(spectrum: &SpectralInterval, tau: f64, d: f64) -> Result<f64> {
    let p = ExpEnvelopeParams::new(spectrum, 1.0, tau)?;
    if !(d > 0.0) {
        return Err(invalid("k = t is not covered by the bound"));
    }
    Ok((-tau * spectrum.lambda_min + ln_envelope(p.x(), d)).exp())
}

/// Bound on `|exp(-τ M)_{kt}|` for a `β`-banded `M`.
pub fn exp_entry_bound(spectrum: &SpectralInterval, beta: f64, tau: f64, k: usize, t: usize) -> Result<f64> {
    check_beta(beta)?;
    if k == t {
        return Err(invalid("k = t is not covered by the bound"));
    }
    exp_bound_at(spectrum, tau, k.abs_diff(t) as f64 / beta)
}

/// Resolvent quantities for `(M - ωI)^{-1}`, `ω <= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventParams {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub omega: f64,
    pub kappa: f64,
    pub q: f64,
    pub c: f64,
    pub c0: f64,
}

impl ResolventParams {
    pub fn new(spectrum: &SpectralInterval, omega: f64) -> Result<Self> {
        spectrum.require_positive_definite()?;
        if omega > 0.0 {
            return Err(invalid(format!("omega must be <= 0, got {omega}")));
        }
        Ok(Self::unchecked(spectrum.lambda_min, spectrum.lambda_max, omega))
    }

    fn unchecked(lambda_min: f64, lambda_max: f64, omega: f64) -> Self {
        let (a, b) = (lambda_min - omega, lambda_max - omega);
        let kappa = b / a;
        let sk = kappa.sqrt();
        let q = if kappa <= 1.0 { 0.0 } else { (sk - 1.0) / (sk + 1.0) };
        let c0 = (1.0 + sk).powi(2) / (2.0 * b);
        Self { lambda_min, lambda_max, omega, kappa, q, c: c0.max(1.0 / a), c0 }
    }

    /// `C q^d`.
    pub fn kernel(&self, d: f64) -> f64 {
        self.c * self.q.powf(d)
    }

    fn ln_kernel(&self, d: f64) -> f64 {
        if d == 0.0 {
            self.c.ln()
        } else {
            self.c.ln() + d * self.q.ln()
        }
    }
}

/// Demko bound on `|M^{-1}_{kt}|` at distance `d >= 0`.
///
/// The matrix is scaled by `1 / diag_scale` before the constants are formed
/// and the result multiplied back by `1 / diag_scale`.
pub fn demko_bound(spectrum: &SpectralInterval, diag_scale: f64, d: f64) -> Result<f64> {
    if !(diag_scale > 0.0) {
        return Err(invalid(format!("diagonal scale must be positive, got {diag_scale}")));
    }
    if !(d >= 0.0) {
        return Err(invalid(format!("distance must be >= 0, got {d}")));
    }
    spectrum.require_positive_definite()?;
    let scaled = ResolventParams::unchecked(spectrum.lambda_min / diag_scale, spectrum.lambda_max / diag_scale, 0.0);
    Ok(scaled.kernel(d) / diag_scale)
}

/// Freund quantities for `(M - ωI - iζI)^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreundParams {
    pub zeta: f64,
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub alpha: f64,
    pub r: f64,
    pub c: f64,
}

impl FreundParams {
    pub fn new(spectrum: &SpectralInterval, zeta: f64, omega: f64) -> Result<Self> {
        if spectrum.lambda_max <= spectrum.lambda_min {
            return Err(DecayError::DegenerateSpectrum {
                lambda_min: spectrum.lambda_min,
                lambda_max: spectrum.lambda_max,
            });
        }
        Self::from_endpoints(spectrum.lambda_min - omega, spectrum.lambda_max - omega, zeta)
    }

    fn from_endpoints(a: f64, b: f64, zeta: f64) -> Result<Self> {
        let lambda1 = Complex64::new(a, -zeta);
        let lambda2 = Complex64::new(b, -zeta);
        let gap = (lambda2 - lambda1).norm();
        if gap == 0.0 {
            return Err(DecayError::DegenerateSpectrum { lambda_min: a, lambda_max: b });
        }
        if a <= 0.0 && zeta == 0.0 {
            return Err(DecayError::NotPositiveDefinite { lambda_min: a });
        }
        let alpha = (lambda1.norm() + lambda2.norm()) / gap;
        let r = alpha + (alpha * alpha - 1.0).max(0.0).sqrt();
        let c = 2.0 * r / gap * 4.0 * r * r / (r * r - 1.0).powi(2);
        Ok(Self { zeta, lambda1, lambda2, alpha, r, c })
    }

    /// `C(ζ) R^{-d}`.
    pub fn kernel(&self, d: f64) -> f64 {
        self.c * self.r.powf(-d)
    }

    fn ln_kernel(&self, d: f64) -> f64 {
        self.c.ln() - d * self.r.ln()
    }
}

/// Bound on `|(M - iζI)^{-1}_{kt}|` at distance `d > 0`.
pub fn freund_resolvent_bound(spectrum: &SpectralInterval, zeta: f64, d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(invalid("k = t is not covered by the bound"));
    }
    Ok(FreundParams::new(spectrum, zeta, 0.0)?.kernel(d))
}

/// Closed-form bound on `|M^{-1/2}_{kt}|` at distance `d > 0`:
/// `(2/π)(C(0) + C₂) q₀^d` evaluated for `M / s` and rescaled by `s^{-1/2}`.
pub fn invsqrt_closed_bound(spectrum: &SpectralInterval, diag_scale: f64, d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(invalid("k = t is not covered by the bound"));
    }
    if !(diag_scale > 0.0) {
        return Err(invalid(format!("diagonal scale must be positive, got {diag_scale}")));
    }
    spectrum.require_positive_definite()?;
    let s = diag_scale;
    let p = ResolventParams::unchecked(spectrum.lambda_min / s, spectrum.lambda_max / s, 0.0);
    Ok(s.powf(-0.5) * 2.0 / PI * (p.c + invsqrt_c2(p.kappa)) * p.q.powf(d))
}

/// Tail constant of the closed inverse square root bound: the largest of
/// the candidate expressions, the last of which is what the tail integral
/// `∫_1^∞ C(η) η^{-1/2} dη / 2` needs with the exponent-2 Demko constant.
pub fn invsqrt_c2(kappa: f64) -> f64 {
    let sk = kappa.sqrt();
    [1.0, (1.0 + 0.5 * sk).sqrt(), (1.0 + sk).sqrt() / 2.0, (1.0 + sk).powi(2) / 2.0]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Contributions of the three `τ` ranges of a Laplace–Stieltjes bound.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LaplacePieces {
    /// `τ ∈ [0, d/(2ρ)]`: superexponential regime.
    pub i: f64,
    /// `τ ∈ [d/(2ρ), d²/(4ρ)]`: Gaussian regime.
    pub ii: f64,
    /// `τ >= d²/(4ρ)`: trivial envelope.
    pub iii: f64,
}

impl LaplacePieces {
    pub fn total(&self) -> f64 {
        self.i + self.ii + self.iii
    }
}

/// One bound value with its numerical provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryBound {
    pub value: f64,
    pub pieces: Option<LaplacePieces>,
    pub error_estimate: f64,
    pub converged: bool,
    /// Evaluated outside the distance range the underlying theorem states.
    pub extended: bool,
}

impl EntryBound {
    fn exact(value: f64, extended: bool) -> Self {
        Self { value, pieces: None, error_estimate: 0.0, converged: true, extended }
    }

    fn from_quadrature(r: QuadratureResult, extra: f64, extended: bool) -> Self {
        Self {
            value: r.value + extra,
            pieces: None,
            error_estimate: r.error_estimate,
            converged: r.converged,
            extended,
        }
    }

    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            if self.error_estimate == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.error_estimate / self.value.abs()
        }
    }
}

/// Everything a single-matrix bound needs besides the function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandedContext {
    pub spectrum: SpectralInterval,
    pub beta: f64,
    /// Largest diagonal entry, used to scale Demko-type constants.
    pub diag_scale: f64,
    pub quad: QuadConfig,
    /// Evaluate Laplace–Stieltjes bounds below distance 2 as well.
    pub extended: bool,
}

impl BandedContext {
    pub fn new(spectrum: SpectralInterval, beta: f64, diag_scale: f64) -> Result<Self> {
        check_beta(beta)?;
        if !(diag_scale > 0.0) {
            return Err(invalid(format!("diagonal scale must be positive, got {diag_scale}")));
        }
        Ok(Self { spectrum, beta, diag_scale, quad: QuadConfig::relative(DEFAULT_BOUND_TOL), extended: false })
    }

    /// Spectral interval, bandwidth and diagonal scale taken from `m`.
    pub fn from_matrix<M: Hermitian + ?Sized>(m: &M, source: SpectrumSource) -> Result<Self> {
        let spectrum = crate::matrix::spectral_interval(m, source)?;
        let mut beta = 0usize;
        m.for_each_entry(&mut |i, j, v| {
            if v != Complex64::default() {
                beta = beta.max(i.abs_diff(j));
            }
        });
        Self::new(spectrum, beta.max(1) as f64, m.max_diagonal())
    }

    pub fn with_quad(mut self, quad: QuadConfig) -> Self {
        self.quad = quad;
        self
    }

    pub fn with_extended(mut self, extended: bool) -> Self {
        self.extended = extended;
        self
    }

    /// `|k - t| / β`.
    pub fn band_distance(&self, k: usize, t: usize) -> f64 {
        k.abs_diff(t) as f64 / self.beta
    }
}

fn check_distance(d: f64) -> Result<()> {
    if d >= 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("distance must be finite and >= 0, got {d}")))
    }
}

/// Laplace–Stieltjes bound `∫ e^{-λ_min τ} Φ(ρτ, d) dα(τ)` at distance `d`.
///
/// Requires `d >= 2` unless the context is extended.
pub fn laplace_entry_bound(ctx: &BandedContext, measure: &LaplaceMeasure, d: f64) -> Result<EntryBound> {
    check_distance(d)?;
    let extended = d < 2.0;
    if extended && !ctx.extended {
        return Err(DecayError::Domain(format!(
            "Laplace–Stieltjes bounds need |k - t|/β >= 2, got distance {d}"
        )));
    }
    ctx.spectrum.require_positive_definite()?;
    let lmin = ctx.spectrum.lambda_min;
    let rho = ctx.spectrum.rho();
    let ln_kernel = |tau: f64| -lmin * tau + ln_envelope(rho * tau, d);

    if rho == 0.0 {
        // f(cI) is diagonal; only d <= 1 sees the (capped) envelope.
        if d > 1.0 {
            return Ok(EntryBound { pieces: Some(LaplacePieces::default()), ..EntryBound::exact(0.0, extended) });
        }
    }
    let (b1, b2) = if rho == 0.0 {
        (0.0, 0.0)
    } else {
        let b1 = d / (2.0 * rho);
        (b1, b1.max(d * d / (4.0 * rho)))
    };
    let support = measure.support_end();
    let tail_scale = 1.0 / lmin;
    let piece = |lo: f64, hi: f64, exponent: f64| -> QuadratureResult {
        let hi = hi.min(support);
        if !measure.has_density() || !(hi > lo) {
            return QuadratureResult::ZERO;
        }
        let mut breaks = Vec::new();
        if rho > 0.0 {
            breaks.push(1.0 / rho);
        }
        let segs = split_segments(lo, hi, &breaks, exponent, tail_scale.max(lo));
        integrate_segments(|tau| (measure.ln_density(tau) + ln_kernel(tau)).exp(), &segs, &ctx.quad)
    };
    let e0 = measure.singular_exponent().min(0.0);
    let r1 = piece(0.0, b1, e0);
    let r2 = piece(b1, b2, if b1 == 0.0 { e0 } else { 0.0 });
    let r3 = piece(b2, f64::INFINITY, if b2 == 0.0 { e0 } else { 0.0 });
    let mut pieces = LaplacePieces { i: r1.value, ii: r2.value, iii: r3.value };
    for &(tau0, c) in measure.atoms() {
        let v = c * ln_kernel(tau0).exp();
        if tau0 <= b1 {
            pieces.i += v;
        } else if tau0 <= b2 {
            pieces.ii += v;
        } else {
            pieces.iii += v;
        }
    }
    let all = r1.combine(r2).combine(r3);
    Ok(EntryBound {
        value: pieces.total(),
        pieces: Some(pieces),
        error_estimate: all.error_estimate,
        converged: all.converged,
        extended,
    })
}

/// Bound on `|f(M + iζI)_{kt}|` for a Laplace–Stieltjes `f`; since
/// `|e^{-iζτ}| = 1` it is the unshifted bound.
pub fn laplace_entry_bound_shifted(
    ctx: &BandedContext,
    measure: &LaplaceMeasure,
    _zeta: f64,
    d: f64,
) -> Result<EntryBound> {
    laplace_entry_bound(ctx, measure, d)
}

/// Integrates `kernel(η) |v(-η)|` over the Cauchy support and adds the atoms.
fn cauchy_integral<K: Fn(f64) -> f64>(
    ctx: &BandedContext,
    measure: &CauchyMeasure,
    ln_kernel: K,
) -> EntryBound {
    let atoms: f64 = measure.atoms().iter().map(|&(eta, c)| c.abs() * ln_kernel(eta).exp()).sum();
    if !measure.has_density() {
        return EntryBound::exact(atoms, false);
    }
    let eta0 = measure.support_start();
    let s = &ctx.spectrum;
    let mut breaks = vec![s.lambda_min, s.lambda_max];
    breaks.extend_from_slice(measure.kinks());
    let segs = split_segments(eta0, f64::INFINITY, &breaks, measure.singular_exponent(), s.lambda_max + eta0);
    let r = integrate_segments(
        |eta| {
            let v = measure.abs_density_eta(eta);
            if v == 0.0 {
                0.0
            } else {
                (v.ln() + ln_kernel(eta)).exp()
            }
        },
        &segs,
        &ctx.quad,
    );
    EntryBound::from_quadrature(r, atoms, false)
}

/// Cauchy–Stieltjes bound `∫ C(ω) q(ω)^d |dγ(ω)|` at distance `d >= 0`.
///
/// `C(ω)` is homogeneous of degree -1 and `q(ω)` of degree 0 in the
/// spectrum, so scaling by the diagonal cancels exactly and is skipped.
pub fn cauchy_entry_bound(ctx: &BandedContext, measure: &CauchyMeasure, d: f64) -> Result<EntryBound> {
    check_distance(d)?;
    ctx.spectrum.require_positive_definite()?;
    let (lmin, lmax) = (ctx.spectrum.lambda_min, ctx.spectrum.lambda_max);
    if lmin == lmax && d > 0.0 {
        return Ok(EntryBound::exact(0.0, false));
    }
    Ok(cauchy_integral(ctx, measure, |eta| ResolventParams::unchecked(lmin, lmax, -eta).ln_kernel(d)))
}

/// Bound on `|f(M + iζI)_{kt}|` for a Cauchy–Stieltjes `f`, integrating the
/// Freund kernel of `M + ηI + iζI` against `|dγ|`.
pub fn cauchy_shifted_bound(ctx: &BandedContext, measure: &CauchyMeasure, zeta: f64, d: f64) -> Result<EntryBound> {
    if !(d > 0.0) {
        return Err(invalid("k = t is not covered by the bound"));
    }
    ctx.spectrum.require_positive_definite()?;
    let (lmin, lmax) = (ctx.spectrum.lambda_min, ctx.spectrum.lambda_max);
    FreundParams::from_endpoints(lmin, lmax, zeta)?;
    Ok(cauchy_integral(ctx, measure, |eta| match FreundParams::from_endpoints(lmin + eta, lmax + eta, zeta) {
        Ok(p) => p.ln_kernel(d),
        Err(_) => f64::NAN,
    }))
}

/// A bound selected at run time.
#[derive(Debug, Clone)]
pub enum BoundKind {
    Exp { tau: f64 },
    Demko,
    Freund { zeta: f64 },
    Laplace(LaplaceMeasure),
    LaplaceShifted { measure: LaplaceMeasure, zeta: f64 },
    Cauchy(CauchyMeasure),
    CauchyShifted { measure: CauchyMeasure, zeta: f64 },
    InvSqrtClosed,
}

impl BoundKind {
    /// Whether distance `d` is inside the range the bound is stated for.
    pub fn is_valid_at(&self, d: f64) -> bool {
        match self {
            BoundKind::Demko | BoundKind::Cauchy(_) => d >= 0.0,
            BoundKind::Laplace(_) | BoundKind::LaplaceShifted { .. } => d >= 2.0,
            _ => d > 0.0,
        }
    }

    pub fn evaluate(&self, ctx: &BandedContext, d: f64) -> Result<EntryBound> {
        check_distance(d)?;
        match self {
            BoundKind::Exp { tau } => {
                let p = ExpEnvelopeParams::new(&ctx.spectrum, ctx.beta, *tau)?;
                Ok(EntryBound::exact(exp_bound_at(&ctx.spectrum, *tau, d)?, d < p.covered_from()))
            }
            BoundKind::Demko => Ok(EntryBound::exact(demko_bound(&ctx.spectrum, ctx.diag_scale, d)?, false)),
            BoundKind::Freund { zeta } => Ok(EntryBound::exact(freund_resolvent_bound(&ctx.spectrum, *zeta, d)?, false)),
            BoundKind::Laplace(m) => laplace_entry_bound(ctx, m, d),
            BoundKind::LaplaceShifted { measure, zeta } => laplace_entry_bound_shifted(ctx, measure, *zeta, d),
            BoundKind::Cauchy(m) => cauchy_entry_bound(ctx, m, d),
            BoundKind::CauchyShifted { measure, zeta } => cauchy_shifted_bound(ctx, measure, *zeta, d),
            BoundKind::InvSqrtClosed => {
                Ok(EntryBound::exact(invsqrt_closed_bound(&ctx.spectrum, ctx.diag_scale, d)?, false))
            }
        }
    }

    /// Short label for reports.
    pub fn label(&self) -> String {
        match self {
            BoundKind::Exp { tau } => format!("exp(tau={tau})"),
            BoundKind::Demko => "demko".into(),
            BoundKind::Freund { zeta } => format!("freund(zeta={zeta})"),
            BoundKind::Laplace(m) => format!("laplace:{}", m.name()),
            BoundKind::LaplaceShifted { measure, zeta } => format!("laplace:{}(zeta={zeta})", measure.name()),
            BoundKind::Cauchy(m) => format!("cauchy:{}", m.name()),
            BoundKind::CauchyShifted { measure, zeta } => format!("cauchy:{}(zeta={zeta})", measure.name()),
            BoundKind::InvSqrtClosed => "invsqrt_closed".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{cauchy_catalog, laplace_catalog};

    fn interval(a: f64, b: f64) -> SpectralInterval {
        SpectralInterval::new(a, b, SpectrumSource::Exact).unwrap()
    }

    /// Regime formulas written out independently of `ln_envelope`.
    fn regime_ii(x: f64, d: f64) -> f64 {
        10.0 * (-x).exp() / x * (std::f64::consts::E * x / d).powf(d)
    }

    fn regime_i(x: f64, d: f64) -> f64 {
        10.0 * (-d * d / (5.0 * x)).exp()
    }

    fn params(x: f64) -> ExpEnvelopeParams {
        ExpEnvelopeParams { rho: x, tau: 1.0, beta: 1.0, lambda_min: 0.0 }
    }

    #[test]
    fn phi_at_regime_boundary_takes_minimum() {
        let expected = regime_i(4.0, 8.0).min(regime_ii(4.0, 8.0)).min(1.0);
        let got = phi(&params(4.0), 8.0).unwrap();
        assert!((got - expected).abs() <= 1e-14 * expected, "{got} vs {expected}");
        assert!((got - 10.0 * (-3.2f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn phi_trivial_near_diagonal() {
        assert_eq!(phi(&params(4.0), 2.0).unwrap(), 1.0);
    }

    #[test]
    fn phi_far_tail_is_tiny_and_decreasing() {
        let p = params(1.0);
        let expected = 10.0 * (-1.0f64).exp() * (std::f64::consts::E / 100.0).powi(100);
        let got = phi(&p, 100.0).unwrap();
        assert!(got > 0.0);
        assert!((got - expected).abs() <= 1e-12 * expected);
        assert!(got < phi(&p, 99.0).unwrap());
    }

    #[test]
    fn phi_rejects_diagonal() {
        assert!(phi(&params(1.0), 0.0).is_err());
        assert!(phi(&params(1.0), -1.0).is_err());
    }

    #[test]
    fn phi_matches_branch_formulas() {
        for &x in &[0.3, 1.0, 2.5, 4.0, 9.0] {
            for i in 1..200 {
                let d = i as f64 * 0.25;
                let mut v: f64 = 1.0;
                if d >= 2.0 * x {
                    v = v.min(regime_ii(x, d));
                    if x >= 1.0 {
                        v = v.min(regime_i(x, 2.0 * x));
                    }
                }
                if x >= 1.0 && d >= 2.0 * x.sqrt() && d <= 2.0 * x {
                    v = v.min(regime_i(x, d));
                }
                let got = envelope(x, d);
                assert!((got - v).abs() <= 1e-12 * v, "x={x} d={d}: {got} vs {v}");
            }
        }
    }

    #[test]
    fn exp_bound_next_to_diagonal_is_cap() {
        let s = interval(2.0, 6.0);
        let b = exp_entry_bound(&s, 1.0, 4.0, 11, 10).unwrap();
        assert!((b - (-8.0f64).exp()).abs() < 1e-18);
        assert!(exp_entry_bound(&s, 1.0, 4.0, 3, 3).is_err());
    }

    #[test]
    fn exp_bound_shift_invariance() {
        let s = interval(2.0, 6.0);
        let delta = 0.75;
        let shifted = interval(2.0 + delta, 6.0 + delta);
        for d in 1..40 {
            let a = exp_bound_at(&s, 4.0, d as f64).unwrap();
            let b = exp_bound_at(&shifted, 4.0, d as f64).unwrap();
            assert!((b - a * (-4.0 * delta).exp()).abs() <= 1e-14 * a);
        }
    }

    #[test]
    fn demko_identity_is_diagonal() {
        let s = interval(3.0, 3.0);
        assert_eq!(demko_bound(&s, 3.0, 1.0).unwrap(), 0.0);
        assert!((demko_bound(&s, 3.0, 0.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn demko_constants() {
        let s = interval(2.0, 6.0);
        let k = 3.0f64;
        let q = (k.sqrt() - 1.0) / (k.sqrt() + 1.0);
        let c = (0.5f64).max((1.0 + k.sqrt()).powi(2) / 12.0);
        for d in [0.0, 1.0, 7.0] {
            let b = demko_bound(&s, 4.0, d).unwrap();
            assert!((b - c * q.powf(d)).abs() <= 1e-14 * b);
        }
        assert!(demko_bound(&interval(-1.0, 2.0), 1.0, 1.0).is_err());
    }

    #[test]
    fn freund_closed_form() {
        let p = FreundParams::new(&interval(2.0, 6.0), 0.0, 0.0).unwrap();
        assert!((p.alpha - 2.0).abs() < 1e-15);
        assert!((p.r - (2.0 + 3f64.sqrt())).abs() < 1e-14);
        assert!(freund_resolvent_bound(&interval(2.0, 6.0), 0.0, 0.0).is_err());
        assert!(matches!(
            FreundParams::new(&interval(2.0, 2.0), 0.0, 0.0),
            Err(DecayError::DegenerateSpectrum { .. })
        ));
    }

    #[test]
    fn freund_kernel_tightens_with_zeta() {
        let s = interval(2.0, 6.0);
        let r0 = FreundParams::new(&s, 0.0, 0.0).unwrap().r;
        let r1 = FreundParams::new(&s, 1e3, 0.0).unwrap().r;
        assert!(r1 > r0);
        let mut prev = f64::INFINITY;
        for zeta in [0.0, 0.5, 1.0, 5.0, 50.0] {
            let b = freund_resolvent_bound(&s, zeta, 3.0).unwrap();
            assert!(b < prev);
            prev = b;
        }
    }

    #[test]
    fn resolvent_q_improves_with_shift() {
        let s = interval(2.0, 6.0);
        let q0 = ResolventParams::new(&s, 0.0).unwrap().q;
        for w in [-0.1, -1.0, -10.0, -1e4] {
            let p = ResolventParams::new(&s, w).unwrap();
            assert!(p.q <= q0 && p.q > 0.0 && p.q < 1.0);
        }
        assert!(ResolventParams::new(&s, 0.5).is_err());
    }

    #[test]
    fn invsqrt_closed_diagonal_matrix() {
        let s = interval(2.0, 2.0);
        assert_eq!(invsqrt_closed_bound(&s, 2.0, 1.0).unwrap(), 0.0);
        assert!(invsqrt_closed_bound(&interval(0.0, 2.0), 2.0, 1.0).is_err());
    }

    fn ctx() -> BandedContext {
        BandedContext::new(interval(2.0, 6.0), 1.0, 4.0).unwrap()
    }

    #[test]
    fn laplace_exp_atom_equals_exp_bound() {
        let m = laplace_catalog("exp").unwrap();
        for d in [2.0, 3.0, 8.0, 20.0] {
            let b = laplace_entry_bound(&ctx(), &m, d).unwrap();
            let e = exp_bound_at(&ctx().spectrum, 1.0, d).unwrap();
            assert_eq!(b.value, e);
        }
    }

    #[test]
    fn laplace_strict_domain() {
        let m = laplace_catalog("inv").unwrap();
        assert!(matches!(laplace_entry_bound(&ctx(), &m, 1.0), Err(DecayError::Domain(_))));
        let b = laplace_entry_bound(&ctx().with_extended(true), &m, 1.0).unwrap();
        assert!(b.extended && b.value > 0.0);
    }

    #[test]
    fn laplace_shifted_is_identical() {
        let m = laplace_catalog("inv_sqrt").unwrap();
        for zeta in [0.0, 1.0, -3.0] {
            let a = laplace_entry_bound(&ctx(), &m, 5.0).unwrap();
            let b = laplace_entry_bound_shifted(&ctx(), &m, zeta, 5.0).unwrap();
            assert_eq!(a.value.to_bits(), b.value.to_bits());
        }
    }

    #[test]
    fn laplace_inv_pieces_sum_to_direct_integral() {
        // Independent evaluation: plain quadrature of the whole integrand.
        let m = laplace_catalog("inv").unwrap();
        let c = ctx();
        let d = 6.0;
        let b = laplace_entry_bound(&c, &m, d).unwrap();
        let rho = c.spectrum.rho();
        let direct = crate::quadrature::integrate_semi_infinite(
            |t| (-2.0 * t).exp() * envelope(rho * t, d),
            0.0,
            &QuadConfig::new(1e-13),
        );
        assert!((b.value - direct.value).abs() <= 1e-8 * direct.value, "{} vs {}", b.value, direct.value);
        let p = b.pieces.unwrap();
        assert!(p.i > 0.0 && p.ii >= 0.0 && p.iii > 0.0);
    }

    #[test]
    fn cauchy_identity_spectrum_is_zero_off_diagonal() {
        let c = BandedContext::new(interval(3.0, 3.0), 1.0, 3.0).unwrap();
        let m = cauchy_catalog("inv_sqrt").unwrap();
        assert_eq!(cauchy_entry_bound(&c, &m, 2.0).unwrap().value, 0.0);
    }

    #[test]
    fn cauchy_inv_atom_is_demko() {
        let m = cauchy_catalog("inv").unwrap();
        for d in [0.0, 1.0, 5.0] {
            let a = cauchy_entry_bound(&ctx(), &m, d).unwrap().value;
            let b = demko_bound(&ctx().spectrum, 4.0, d).unwrap();
            assert!((a - b).abs() <= 1e-14 * b);
        }
    }

    #[test]
    fn cauchy_log1p_below_envelope() {
        // q(η) <= q(1) on the support, so the bound is at most
        // q(1)^d ∫_1^∞ C(η) / η dη.
        let m = cauchy_catalog("log1p_over_z").unwrap();
        let c = ctx();
        let d = 6.0;
        let b = cauchy_entry_bound(&c, &m, d).unwrap();
        let q1 = ResolventParams::new(&c.spectrum, -1.0).unwrap().q;
        let mass = crate::quadrature::integrate_semi_infinite(
            |eta| ResolventParams::new(&c.spectrum, -eta).unwrap().c / eta,
            1.0,
            &QuadConfig::new(1e-12),
        );
        assert!(b.converged);
        assert!(b.value <= q1.powf(d) * mass.value * (1.0 + 1e-9));
    }

    #[test]
    fn cauchy_shifted_needs_off_diagonal() {
        let m = cauchy_catalog("inv_sqrt").unwrap();
        assert!(cauchy_shifted_bound(&ctx(), &m, 1.0, 0.0).is_err());
        let b = cauchy_shifted_bound(&ctx(), &m, 0.0, 3.0).unwrap();
        assert!(b.value.is_finite() && b.value > 0.0);
    }

    #[test]
    fn c2_is_the_largest_candidate() {
        for k in [1.0f64, 3.0, 100.0] {
            let sk: f64 = k.sqrt();
            assert!(invsqrt_c2(k) >= (1.0 + sk).powi(2) / 2.0);
            assert!(invsqrt_c2(k) >= (1.0 + 0.5 * sk).sqrt());
        }
    }
}
