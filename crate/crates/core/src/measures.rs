//! Laplace–Stieltjes and Cauchy–Stieltjes representations of scalar functions.
//!
//! A Laplace–Stieltjes function is `f(x) = ∫_0^∞ e^{-xτ} w(τ) dτ + Σ c_i e^{-x τ_i}`
//! with `w >= 0` and `c_i > 0`. Densities are stored as `ln w` so bound
//! integrands can combine them with tiny envelopes without underflow.
//!
//! A Cauchy–Stieltjes function is `f(x) = ∫ v(ω) / (x - ω) dω` over
//! `ω <= -η_0 <= 0`, plus optional point masses. Internally densities are
//! parametrized by `η = -ω >= 0`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use statrs::function::erf::erf;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, DecayError, Result};
use crate::quadrature::{integrate_segments, split_segments, QuadConfig, QuadratureResult};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type ComplexFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// `dα(τ) = w(τ) dτ + Σ c_i δ(τ - τ_i)` on `[0, ∞)`.
#[derive(Clone)]
pub struct LaplaceMeasure {
    name: String,
    ln_density: Option<ScalarFn>,
    support_end: f64,
    singular_exponent: f64,
    atoms: Vec<(f64, f64)>,
    closed_form: ScalarFn,
}

impl fmt::Debug for LaplaceMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LaplaceMeasure")
            .field("name", &self.name)
            .field("has_density", &self.ln_density.is_some())
            .field("support_end", &self.support_end)
            .field("singular_exponent", &self.singular_exponent)
            .field("atoms", &self.atoms)
            .finish()
    }
}

impl LaplaceMeasure {
    /// A measure from its log-density on `(0, support_end)` (`ln w`, `-∞`
    /// where `w = 0`), its atoms `(τ_i, c_i)` and the function it represents.
    /// `singular_exponent` is the power-law exponent of `w` at `τ = 0`.
    pub fn new(
        name: impl Into<String>,
        ln_density: Option<ScalarFn>,
        support_end: f64,
        singular_exponent: f64,
        atoms: Vec<(f64, f64)>,
        closed_form: ScalarFn,
    ) -> Result<Self> {
        if !(support_end > 0.0) {
            return Err(invalid("density support must have positive length"));
        }
        if !(singular_exponent > -1.0) {
            return Err(invalid(format!("singular exponent {singular_exponent} is not integrable")));
        }
        if atoms.iter().any(|&(t, c)| !(t >= 0.0 && t.is_finite() && c > 0.0)) {
            return Err(invalid("atoms need a location >= 0 and a positive weight"));
        }
        if ln_density.is_none() && atoms.is_empty() {
            return Err(invalid("a measure needs a density or at least one atom"));
        }
        Ok(Self { name: name.into(), ln_density, support_end, singular_exponent, atoms, closed_form })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn has_density(&self) -> bool {
        self.ln_density.is_some()
    }

    /// Right end of the density support (`∞` for most catalog entries).
    pub fn support_end(&self) -> f64 {
        self.support_end
    }

    pub fn singular_exponent(&self) -> f64 {
        self.singular_exponent
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// `ln w(τ)`; `-∞` outside the support or without a density.
    pub fn ln_density(&self, tau: f64) -> f64 {
        match &self.ln_density {
            Some(lw) if tau > 0.0 && tau <= self.support_end => lw(tau),
            _ => f64::NEG_INFINITY,
        }
    }

    pub fn density(&self, tau: f64) -> f64 {
        self.ln_density(tau).exp()
    }

    /// The represented function, in closed form.
    pub fn f(&self, x: f64) -> f64 {
        (self.closed_form)(x)
    }

    /// `∫ e^{-xτ} dα(τ)` by quadrature.
    pub fn reconstruct(&self, x: f64, cfg: &QuadConfig) -> QuadratureResult {
        let atoms: f64 = self.atoms.iter().map(|&(t, c)| c * (-x * t).exp()).sum();
        let mut r = QuadratureResult::ZERO;
        if self.ln_density.is_some() {
            let segs = split_segments(0.0, self.support_end, &[], self.singular_exponent, 1.0 / x.max(1e-3));
            r = integrate_segments(|tau| (self.ln_density(tau) - x * tau).exp(), &segs, cfg);
        }
        r.value += atoms;
        r
    }
}

/// `γ` on `(-∞, -η_0]` with signed density `v` (as a function of `η = -ω`)
/// and point masses.
#[derive(Clone)]
pub struct CauchyMeasure {
    name: String,
    density: Option<ScalarFn>,
    support_start: f64,
    singular_exponent: f64,
    atoms: Vec<(f64, f64)>,
    closed_form: ScalarFn,
    laplace_g: Option<ScalarFn>,
    g_singular_exponent: f64,
    signed: bool,
    /// Points `η` where `|v|` has a kink; quadrature of `|v|` splits there.
    kinks: Vec<f64>,
    /// Majorant of `|v|` used beyond the last kink.
    abs_envelope: Option<ScalarFn>,
}

impl fmt::Debug for CauchyMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CauchyMeasure")
            .field("name", &self.name)
            .field("support_upper", &self.support_upper())
            .field("singular_exponent", &self.singular_exponent)
            .field("atoms", &self.atoms)
            .field("signed", &self.signed)
            .finish()
    }
}

impl CauchyMeasure {
    /// `density(η)` is `v(-η)` for `η >= support_start`; `atoms` are
    /// `(η_i, c_i)`. `laplace_g`, when given, is the closed form of
    /// `g(τ) = ∫ e^{τω} dγ(ω)`. `g_singular_exponent` describes `|g|` (or
    /// its absolute-value variant) near `τ = 0`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        density: Option<ScalarFn>,
        support_start: f64,
        singular_exponent: f64,
        atoms: Vec<(f64, f64)>,
        closed_form: ScalarFn,
        laplace_g: Option<ScalarFn>,
        g_singular_exponent: f64,
        signed: bool,
    ) -> Result<Self> {
        if !(support_start >= 0.0 && support_start.is_finite()) {
            return Err(invalid("Cauchy support must lie in (-∞, 0]"));
        }
        if !(singular_exponent > -1.0) || !(g_singular_exponent > -1.0) {
            return Err(invalid("singular exponents must be > -1"));
        }
        if atoms.iter().any(|&(e, c)| !(e >= 0.0 && e.is_finite() && c != 0.0)) {
            return Err(invalid("atoms need a location in (-∞, 0] and a nonzero weight"));
        }
        if density.is_none() && atoms.is_empty() {
            return Err(invalid("a measure needs a density or at least one atom"));
        }
        Ok(Self {
            name: name.into(),
            density,
            support_start,
            singular_exponent,
            atoms,
            closed_form,
            laplace_g,
            g_singular_exponent,
            signed,
            kinks: Vec::new(),
            abs_envelope: None,
        })
    }

    /// Declares the sign changes of a signed density so that integrals of
    /// `|v|` are split there instead of bisected blindly. Beyond the last
    /// kink `|v|` is replaced by `envelope`, which must dominate it; the
    /// bounds then stay upper bounds.
    pub fn with_kinks(mut self, mut kinks: Vec<f64>, envelope: ScalarFn) -> Self {
        kinks.retain(|k| k.is_finite() && *k > self.support_start);
        kinks.sort_by(f64::total_cmp);
        self.kinks = kinks;
        self.abs_envelope = Some(envelope);
        self
    }

    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Largest `ω` in the density support.
    pub fn support_upper(&self) -> f64 {
        -self.support_start
    }

    /// Smallest `η = -ω` in the density support.
    pub fn support_start(&self) -> f64 {
        self.support_start
    }

    pub fn singular_exponent(&self) -> f64 {
        self.singular_exponent
    }

    pub fn g_singular_exponent(&self) -> f64 {
        self.g_singular_exponent
    }

    pub fn has_density(&self) -> bool {
        self.density.is_some()
    }

    /// True when the density changes sign.
    pub fn is_signed(&self) -> bool {
        self.signed
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// `v(ω)`; zero outside the support.
    pub fn density(&self, omega: f64) -> f64 {
        self.density_eta(-omega)
    }

    /// `v(-η)`.
    pub fn density_eta(&self, eta: f64) -> f64 {
        match &self.density {
            Some(v) if eta >= self.support_start && eta > 0.0 => v(eta),
            _ => 0.0,
        }
    }

    /// The integrand of the absolute bounds: `|v(-η)|`, or its declared
    /// envelope past the last kink.
    pub fn abs_density_eta(&self, eta: f64) -> f64 {
        match (&self.abs_envelope, self.kinks.last()) {
            (Some(env), Some(&last)) if eta > last => env(eta),
            _ => self.density_eta(eta).abs(),
        }
    }

    pub fn f(&self, x: f64) -> f64 {
        (self.closed_form)(x)
    }

    pub fn has_closed_form_g(&self) -> bool {
        self.laplace_g.is_some()
    }

    /// `∫ v(ω) / (x - ω) dω + Σ c_i / (x + η_i)` by quadrature.
    pub fn reconstruct(&self, x: f64, cfg: &QuadConfig) -> QuadratureResult {
        let atoms: f64 = self.atoms.iter().map(|&(e, c)| c / (x + e)).sum();
        let mut r = QuadratureResult::ZERO;
        if self.density.is_some() {
            let segs = split_segments(self.support_start, f64::INFINITY, &[], self.singular_exponent, x + self.support_start + 1.0);
            r = integrate_segments(|eta| self.density_eta(eta) / (x + eta), &segs, cfg);
        }
        r.value += atoms;
        r
    }

    /// `∫ e^{-τη} k(η) dη + atoms` where `k` is `v` or `|v|`.
    fn transform(&self, tau: f64, absolute: bool, cfg: &QuadConfig) -> Result<f64> {
        if !(tau > 0.0) {
            return Err(DecayError::Divergent(format!(
                "g(τ) = ∫ e^{{τω}} dγ(ω) needs τ > 0 (got {tau}) for measure {}",
                self.name
            )));
        }
        let atoms: f64 = self
            .atoms
            .iter()
            .map(|&(e, c)| if absolute { c.abs() } else { c } * (-tau * e).exp())
            .sum();
        if self.density.is_none() {
            return Ok(atoms);
        }
        if let (Some(g), false) = (&self.laplace_g, absolute && self.signed) {
            return Ok(g(tau));
        }
        let breaks: &[f64] = if absolute { &self.kinks } else { &[] };
        let segs = split_segments(self.support_start, f64::INFINITY, breaks, self.singular_exponent, 1.0 / tau);
        let r = integrate_segments(
            |eta| {
                let v = if absolute { self.abs_density_eta(eta) } else { self.density_eta(eta) };
                if v == 0.0 {
                    0.0
                } else {
                    v * (-tau * eta).exp()
                }
            },
            &segs,
            cfg,
        );
        if !r.value.is_finite() {
            return Err(DecayError::Divergent(format!("g({tau}) for measure {} is not finite", self.name)));
        }
        if !r.converged {
            return Err(DecayError::Quadrature(format!(
                "g({tau}) for measure {}: error estimate {:e}",
                self.name, r.error_estimate
            )));
        }
        Ok(r.value + atoms)
    }
}

/// `g(τ) = ∫_{-∞}^0 e^{τω} dγ(ω)`, from the stored closed form when there is
/// one and by quadrature otherwise.
pub fn laplace_transform_of_cauchy(m: &CauchyMeasure, tau: f64, cfg: &QuadConfig) -> Result<f64> {
    m.transform(tau, false, cfg)
}

/// `∫_{-∞}^0 e^{τω} |dγ(ω)|`; equals [`laplace_transform_of_cauchy`] for
/// non-negative measures. This is the quantity the bounds integrate.
pub fn laplace_transform_of_cauchy_abs(m: &CauchyMeasure, tau: f64, cfg: &QuadConfig) -> Result<f64> {
    m.transform(tau, true, cfg)
}

fn arc(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> ScalarFn {
    Arc::new(f)
}

/// `ln(I_1(2√τ)/√τ) = ln Σ_j τ^j / (j! (j+1)!)`, summed in scaled form.
fn ln_bessel_i1_ratio(tau: f64) -> f64 {
    if tau <= 0.0 {
        return 0.0;
    }
    let ln_tau = tau.ln();
    let ln_term = |j: f64| j * ln_tau - ln_gamma(j + 1.0) - ln_gamma(j + 2.0);
    // Terms peak near j ≈ √τ.
    let peak = ln_term(tau.sqrt().floor());
    let mut sum = 0.0;
    let mut j = 0.0;
    loop {
        let t = (ln_term(j) - peak).exp();
        sum += t;
        if j > tau.sqrt() && t <= 1e-17 * sum {
            break;
        }
        j += 1.0;
    }
    peak + sum.ln()
}

/// Principal-branch extension of a catalog function to `z` off `(-∞, 0]`,
/// for oracles of `f(M + iζI)`. Accepts every Laplace and Cauchy catalog
/// name.
pub fn complex_closed_form(name: &str) -> Result<ComplexFn> {
    let (base, param) = split_name(name)?;
    let one = Complex64::new(1.0, 0.0);
    let f: ComplexFn = match (base, param) {
        ("inv", None) => Arc::new(move |z| one / z),
        ("exp", None) => Arc::new(|z: Complex64| (-z).exp()),
        ("phi1", None) => Arc::new(move |z: Complex64| if z.norm() == 0.0 { one } else { (one - (-z).exp()) / z }),
        ("inv_sqrt", None) => Arc::new(|z: Complex64| z.powf(-0.5)),
        ("inv_pow", Some(sigma)) if sigma > 0.0 => Arc::new(move |z: Complex64| z.powf(-sigma)),
        ("log1p_inv", None) => Arc::new(move |z: Complex64| (one + one / z).ln()),
        ("exp_inv", None) => Arc::new(move |z: Complex64| (one / z).exp()),
        ("expsqrt" | "expsqrt_t", Some(t)) if t > 0.0 => Arc::new(move |z: Complex64| (one - (-t * z.sqrt()).exp()) / z),
        ("log1p_over_z", None) => Arc::new(move |z: Complex64| if z.norm() == 0.0 { one } else { (one + z).ln() / z }),
        _ => return Err(DecayError::UnknownFunction(format!("{name} has no complex closed form"))),
    };
    Ok(f)
}

/// Parsed function name: `base` or `base:param`.
fn split_name(name: &str) -> Result<(&str, Option<f64>)> {
    match name.split_once(':') {
        None => Ok((name.trim(), None)),
        Some((base, p)) => {
            let v: f64 = p
                .trim()
                .parse()
                .map_err(|_| DecayError::UnknownFunction(format!("{name}: parameter {p:?} is not a number")))?;
            Ok((base.trim(), Some(v)))
        }
    }
}

/// Laplace–Stieltjes catalog: `inv`, `exp`, `phi1`, `inv_sqrt`, `inv_pow:σ`,
/// `log1p_inv` (`ln(1 + 1/x)`), `exp_inv` (`e^{1/x}`).
pub fn laplace_catalog(name: &str) -> Result<LaplaceMeasure> {
    let (base, param) = split_name(name)?;
    let no_param = |m: Result<LaplaceMeasure>| match param {
        Some(_) => Err(DecayError::UnknownFunction(format!("{base} takes no parameter"))),
        None => m,
    };
    match base {
        "inv" => no_param(LaplaceMeasure::new("inv", Some(arc(|_| 0.0)), f64::INFINITY, 0.0, vec![], arc(|x| 1.0 / x))),
        "exp" => no_param(LaplaceMeasure::new("exp", None, f64::INFINITY, 0.0, vec![(1.0, 1.0)], arc(|x| (-x).exp()))),
        "phi1" => no_param(LaplaceMeasure::new(
            "phi1",
            Some(arc(|_| 0.0)),
            1.0,
            0.0,
            vec![],
            arc(|x| if x == 0.0 { 1.0 } else { -(-x).exp_m1() / x }),
        )),
        "inv_sqrt" => no_param(inv_pow("inv_sqrt", 0.5)),
        "inv_pow" => {
            let sigma = param.ok_or_else(|| DecayError::UnknownFunction("inv_pow needs a parameter, e.g. inv_pow:0.5".into()))?;
            if !(sigma > 0.0) {
                return Err(invalid(format!("inv_pow needs σ > 0, got {sigma}")));
            }
            inv_pow(&format!("inv_pow:{sigma}"), sigma)
        }
        "log1p_inv" => no_param(LaplaceMeasure::new(
            "log1p_inv",
            Some(arc(|t: f64| (-(-t).exp_m1() / t).ln())),
            f64::INFINITY,
            0.0,
            vec![],
            arc(|x: f64| (1.0 / x).ln_1p()),
        )),
        "exp_inv" => no_param(LaplaceMeasure::new(
            "exp_inv",
            Some(arc(ln_bessel_i1_ratio)),
            f64::INFINITY,
            0.0,
            vec![(0.0, 1.0)],
            arc(|x: f64| (1.0 / x).exp()),
        )),
        _ => Err(DecayError::UnknownFunction(format!("{name} is not a Laplace–Stieltjes catalog entry"))),
    }
}

fn inv_pow(name: &str, sigma: f64) -> Result<LaplaceMeasure> {
    let ln_norm = ln_gamma(sigma);
    LaplaceMeasure::new(
        name,
        Some(arc(move |t: f64| (sigma - 1.0) * t.ln() - ln_norm)),
        f64::INFINITY,
        sigma - 1.0,
        vec![],
        arc(move |x: f64| x.powf(-sigma)),
    )
}

const EXPSQRT_KINKS: usize = 2000;

/// Cauchy–Stieltjes catalog: `inv` (point mass at 0), `inv_sqrt`,
/// `expsqrt:t` (`(1 - e^{-t√x})/x`), `log1p_over_z` (`ln(1+x)/x`).
pub fn cauchy_catalog(name: &str) -> Result<CauchyMeasure> {
    let (base, param) = split_name(name)?;
    let no_param = |m: Result<CauchyMeasure>| match param {
        Some(_) => Err(DecayError::UnknownFunction(format!("{base} takes no parameter"))),
        None => m,
    };
    match base {
        "inv" => no_param(CauchyMeasure::new("inv", None, 0.0, 0.0, vec![(0.0, 1.0)], arc(|x| 1.0 / x), None, 0.0, false)),
        "inv_sqrt" => no_param(CauchyMeasure::new(
            "inv_sqrt",
            Some(arc(|eta: f64| 1.0 / (std::f64::consts::PI * eta.sqrt()))),
            0.0,
            -0.5,
            vec![],
            arc(|x: f64| 1.0 / x.sqrt()),
            Some(arc(|tau: f64| 1.0 / (std::f64::consts::PI * tau).sqrt())),
            -0.5,
            false,
        )),
        "expsqrt" | "expsqrt_t" => {
            let t = param.ok_or_else(|| DecayError::UnknownFunction("expsqrt needs a parameter, e.g. expsqrt:1".into()))?;
            if !(t > 0.0) {
                return Err(invalid(format!("expsqrt needs t > 0, got {t}")));
            }
            // Sign changes of sin(t√η) at η = (jπ/t)²; far ones matter
            // less as |v| decays like 1/η.
            let kinks = (1..=EXPSQRT_KINKS).map(|j| (j as f64 * std::f64::consts::PI / t).powi(2)).collect();
            CauchyMeasure::new(
                format!("expsqrt:{t}"),
                Some(arc(move |eta: f64| (t * eta.sqrt()).sin() / (std::f64::consts::PI * eta))),
                0.0,
                -0.5,
                vec![],
                arc(move |x: f64| -(-t * x.sqrt()).exp_m1() / x),
                Some(arc(move |tau: f64| erf(t / (2.0 * tau.sqrt())))),
                -0.5,
                true,
            )
            .map(|m| m.with_kinks(kinks, arc(|eta: f64| 1.0 / (std::f64::consts::PI * eta))))
        }
        "log1p_over_z" => no_param(CauchyMeasure::new(
            "log1p_over_z",
            Some(arc(|eta: f64| 1.0 / eta)),
            1.0,
            0.0,
            vec![],
            arc(|x: f64| if x == 0.0 { 1.0 } else { x.ln_1p() / x }),
            None,
            -0.5,
            false,
        )),
        _ => Err(DecayError::UnknownFunction(format!("{name} is not a Cauchy–Stieltjes catalog entry"))),
    }
}

/// Every catalog entry with a representative parameter; used by tests and
/// the CLI listing.
pub fn laplace_catalog_names() -> &'static [&'static str] {
    &["inv", "exp", "phi1", "inv_sqrt", "inv_pow:0.25", "inv_pow:1.5", "log1p_inv", "exp_inv"]
}

pub fn cauchy_catalog_names() -> &'static [&'static str] {
    &["inv", "inv_sqrt", "expsqrt:1", "log1p_over_z"]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg() -> QuadConfig {
        QuadConfig::new(1e-12).with_max_panels(20_000)
    }

    #[test]
    fn inv_reconstructs_at_two() {
        let m = laplace_catalog("inv").unwrap();
        assert!((m.reconstruct(2.0, &cfg()).value - 0.5).abs() < 1e-8);
    }

    #[test]
    fn exp_is_a_single_atom() {
        let m = laplace_catalog("exp").unwrap();
        assert!(!m.has_density());
        assert_eq!(m.reconstruct(3.0, &cfg()).value, (-3.0f64).exp());
    }

    #[test]
    fn inv_sqrt_reconstructs_at_four() {
        let m = laplace_catalog("inv_sqrt").unwrap();
        assert!((m.reconstruct(4.0, &cfg()).value - 0.5).abs() < 1e-6);
        assert!((m.density(1.0) - 1.0 / PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn phi1_support_is_unit_interval() {
        let m = laplace_catalog("phi1").unwrap();
        assert_eq!(m.support_end(), 1.0);
        assert_eq!(m.density(0.5), 1.0);
        assert_eq!(m.density(1.5), 0.0);
    }

    #[test]
    fn catalog_errors() {
        assert!(matches!(laplace_catalog("cosh"), Err(DecayError::UnknownFunction(_))));
        assert!(laplace_catalog("inv_pow:0").is_err());
        assert!(laplace_catalog("inv_pow:-1").is_err());
        assert!(laplace_catalog("inv_pow").is_err());
        assert!(laplace_catalog("inv:2").is_err());
        assert!(cauchy_catalog("phi1").is_err());
        assert!(cauchy_catalog("expsqrt:0").is_err());
    }

    #[test]
    fn laplace_reconstruction_all_entries() {
        for name in laplace_catalog_names() {
            let m = laplace_catalog(name).unwrap();
            for x in [0.5, 1.0, 2.0, 5.0] {
                let r = m.reconstruct(x, &cfg());
                let f = m.f(x);
                assert!((r.value - f).abs() <= 1e-6 * f.abs(), "{name} at {x}: {} vs {f}", r.value);
            }
        }
    }

    #[test]
    fn cauchy_reconstruction_all_entries() {
        for name in cauchy_catalog_names() {
            let m = cauchy_catalog(name).unwrap();
            for x in [0.5, 1.0, 2.0, 5.0] {
                let r = m.reconstruct(x, &cfg().with_max_panels(100_000));
                let f = m.f(x);
                assert!((r.value - f).abs() <= 1e-6 * f.abs(), "{name} at {x}: {} vs {f}", r.value);
            }
        }
    }

    #[test]
    fn cauchy_examples() {
        let m = cauchy_catalog("inv_sqrt").unwrap();
        assert!((m.reconstruct(4.0, &cfg()).value - 0.5).abs() < 1e-6);
        let l = cauchy_catalog("log1p_over_z").unwrap();
        assert_eq!(l.support_upper(), -1.0);
        assert!((l.reconstruct(1.0, &cfg()).value - 2f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn g_closed_forms() {
        let m = cauchy_catalog("inv_sqrt").unwrap();
        assert!((laplace_transform_of_cauchy(&m, 1.0, &cfg()).unwrap() - 1.0 / PI.sqrt()).abs() < 1e-8);
        assert!((laplace_transform_of_cauchy(&m, 4.0, &cfg()).unwrap() - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-8);
    }

    #[test]
    fn g_by_quadrature_matches_exponential_integral() {
        // E1(1)
        let e1 = 0.219_383_934_395_520_3;
        let m = cauchy_catalog("log1p_over_z").unwrap();
        assert!(!m.has_closed_form_g());
        assert!((laplace_transform_of_cauchy(&m, 1.0, &cfg()).unwrap() - e1).abs() < 1e-6);
    }

    #[test]
    fn stored_g_agrees_with_quadrature() {
        for name in ["inv_sqrt", "expsqrt:1.5"] {
            let m = cauchy_catalog(name).unwrap();
            for tau in [0.3, 1.0, 3.0] {
                let closed = laplace_transform_of_cauchy(&m, tau, &cfg()).unwrap();
                // the absolute variant of a non-negative measure goes through quadrature only when signed
                let stripped = CauchyMeasure { laplace_g: None, ..m.clone() };
                let quad = laplace_transform_of_cauchy(&stripped, tau, &cfg().with_max_panels(100_000)).unwrap();
                assert!((closed - quad).abs() <= 1e-8 * closed.abs().max(1e-3), "{name} τ={tau}: {closed} vs {quad}");
            }
        }
    }

    #[test]
    fn absolute_transform_dominates_signed() {
        let m = cauchy_catalog("expsqrt:2").unwrap();
        for tau in [0.1, 1.0, 10.0] {
            let s = laplace_transform_of_cauchy(&m, tau, &cfg()).unwrap();
            let a = laplace_transform_of_cauchy_abs(&m, tau, &cfg().with_max_panels(100_000)).unwrap();
            assert!(a >= s.abs() * (1.0 - 1e-10));
        }
    }

    #[test]
    fn g_needs_positive_tau() {
        let m = cauchy_catalog("inv_sqrt").unwrap();
        assert!(matches!(laplace_transform_of_cauchy(&m, 0.0, &cfg()), Err(DecayError::Divergent(_))));
    }

    #[test]
    fn dual_class_inv_sqrt() {
        let l = laplace_catalog("inv_sqrt").unwrap();
        let c = cauchy_catalog("inv_sqrt").unwrap();
        for tau in [0.1, 1.0, 10.0] {
            let g = laplace_transform_of_cauchy(&c, tau, &cfg()).unwrap();
            assert!((g - l.density(tau)).abs() < 1e-8);
        }
    }

    #[test]
    fn exp_inv_density_series() {
        // I_1(2)/1 = 1.5906368546373291
        assert!((ln_bessel_i1_ratio(1.0).exp() - 1.590_636_854_637_329).abs() < 1e-14);
        assert!((ln_bessel_i1_ratio(1e-12).exp() - 1.0).abs() < 1e-11);
        // large arguments stay finite in log form
        assert!(ln_bessel_i1_ratio(1e6).is_finite());
    }

    #[test]
    fn expsqrt_absolute_density_uses_envelope_past_last_kink() {
        let m = cauchy_catalog("expsqrt:2").unwrap();
        let last = *m.kinks().last().unwrap();
        assert!((last - (EXPSQRT_KINKS as f64 * std::f64::consts::PI / 2.0).powi(2)).abs() < 1e-6 * last);
        for eta in [0.3, 5.0, 0.5 * last] {
            assert_eq!(m.abs_density_eta(eta), m.density_eta(eta).abs());
        }
        for eta in [1.01 * last, 10.0 * last] {
            assert!(m.abs_density_eta(eta) >= m.density_eta(eta).abs());
            assert_eq!(m.abs_density_eta(eta), 1.0 / (std::f64::consts::PI * eta));
        }
    }

    #[test]
    fn complex_forms_agree_on_the_real_axis() {
        for &name in laplace_catalog_names() {
            let (m, g) = (laplace_catalog(name).unwrap(), complex_closed_form(name).unwrap());
            for x in [0.3, 1.0, 4.5] {
                let z = g(Complex64::new(x, 0.0));
                assert!((z.re - m.f(x)).abs() <= 1e-14 * m.f(x).abs() && z.im.abs() <= 1e-15, "{name} at {x}");
            }
        }
        for &name in cauchy_catalog_names() {
            let (m, g) = (cauchy_catalog(name).unwrap(), complex_closed_form(name).unwrap());
            for x in [0.3, 1.0, 4.5] {
                let z = g(Complex64::new(x, 0.0));
                assert!((z.re - m.f(x)).abs() <= 1e-14 * m.f(x).abs() && z.im.abs() <= 1e-15, "{name} at {x}");
            }
        }
        assert!(complex_closed_form("inv_pow:-1").is_err());
        assert!(complex_closed_form("sinc").is_err());
    }
}
