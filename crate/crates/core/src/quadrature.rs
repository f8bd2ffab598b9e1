//! Adaptive Gauss–Kronrod integration on finite and semi-infinite intervals.
//!
//! Every integral is split into [`Segment`]s. A segment carries a change of
//! variables that removes a declared algebraic endpoint singularity or maps a
//! half-line onto `[0, 1)`. All panels of all segments share one global
//! priority queue keyed by the panel error estimate, so the tolerance applies
//! to the total.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Tolerances for one integration.
///
/// Convergence means `error_estimate <= max(abs_tol, rel_tol * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_PANELS: usize = 10_000;

impl Default for QuadConfig {
    fn default() -> Self {
        Self::new(DEFAULT_TOL)
    }
}

impl QuadConfig {
    /// Absolute-or-relative tolerance `tol`.
    pub fn new(tol: f64) -> Self {
        Self { abs_tol: tol, rel_tol: tol, max_panels: DEFAULT_MAX_PANELS }
    }

    /// Purely relative tolerance; used for bound integrals whose values span
    /// hundreds of orders of magnitude.
    pub fn relative(tol: f64) -> Self {
        Self { abs_tol: 0.0, rel_tol: tol, max_panels: DEFAULT_MAX_PANELS }
    }

    pub fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels.max(1);
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl QuadratureResult {
    pub const ZERO: QuadratureResult =
        QuadratureResult { value: 0.0, error_estimate: 0.0, evaluations: 0, converged: true };

    /// Sum of two independent integrations.
    pub fn combine(self, other: QuadratureResult) -> QuadratureResult {
        QuadratureResult {
            value: self.value + other.value,
            error_estimate: self.error_estimate + other.error_estimate,
            evaluations: self.evaluations + other.evaluations,
            converged: self.converged && other.converged,
        }
    }

    pub fn scale(self, c: f64) -> QuadratureResult {
        QuadratureResult { value: c * self.value, error_estimate: c.abs() * self.error_estimate, ..self }
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

/// One piece of an integration domain together with its variable map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    /// Plain `[a, b]`.
    Finite { a: f64, b: f64 },
    /// `[a, b]` with integrand `~ (x - a)^exponent`, `exponent > -1`; mapped
    /// by `x = a + (b - a) u^p`, `p = 1 / (1 + exponent)`.
    LeftSingular { a: f64, b: f64, exponent: f64 },
    /// `[a, ∞)` mapped by `x = a + scale · ((1 - u)^{-2} - 1)`; integrands
    /// decaying like `x^{-p}`, `p >= 3/2`, stay bounded in `u`.
    Tail { a: f64, scale: f64 },
}

impl Segment {
    fn domain(&self) -> (f64, f64) {
        match *self {
            Segment::Finite { a, b } => (a, b),
            Segment::LeftSingular { .. } | Segment::Tail { .. } => (0.0, 1.0),
        }
    }

    /// `(x(u), dx/du)`.
    #[inline]
    fn map(&self, u: f64) -> (f64, f64) {
        match *self {
            Segment::Finite { .. } => (u, 1.0),
            Segment::LeftSingular { a, b, exponent } => {
                let p = 1.0 / (1.0 + exponent);
                let up = u.powf(p);
                (a + (b - a) * up, (b - a) * p * up / u)
            }
            Segment::Tail { a, scale } => {
                let w = 1.0 - u;
                let w2 = w * w;
                (a + scale * (1.0 / w2 - 1.0), 2.0 * scale / (w2 * w))
            }
        }
    }

    fn is_empty(&self) -> bool {
        match *self {
            Segment::Finite { a, b } | Segment::LeftSingular { a, b, .. } => !(b > a),
            Segment::Tail { .. } => false,
        }
    }
}

/// `[a, b]`, using the singular map when `exponent < 0`.
pub fn segment_with_singularity(a: f64, b: f64, exponent: f64) -> Segment {
    if exponent < 0.0 {
        Segment::LeftSingular { a, b, exponent }
    } else {
        Segment::Finite { a, b }
    }
}

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Kronrod value and rescaled error estimate on `[lo, hi]`.
fn gauss_kronrod<F: Fn(f64) -> f64>(g: &F, lo: f64, hi: f64) -> (f64, f64) {
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = g(centre);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = g(centre - x);
        let f2 = g(centre + x);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

const POINTS_PER_PANEL: usize = 21;

#[derive(Debug, Clone, Copy)]
struct Panel {
    segment: usize,
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.segment.cmp(&self.segment))
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

/// Integrates `f` over the union of `segments`.
pub fn integrate_segments<F: Fn(f64) -> f64>(f: F, segments: &[Segment], cfg: &QuadConfig) -> QuadratureResult {
    let segments: Vec<Segment> = segments.iter().copied().filter(|s| !s.is_empty()).collect();
    if segments.is_empty() {
        return QuadratureResult::ZERO;
    }
    let eval_panel = |s: usize, lo: f64, hi: f64| -> Panel {
        let seg = segments[s];
        let g = |u: f64| {
            let (x, jac) = seg.map(u);
            if jac == 0.0 || !x.is_finite() || !jac.is_finite() {
                return 0.0;
            }
            let fx = f(x);
            if fx == 0.0 {
                0.0
            } else {
                fx * jac
            }
        };
        let (value, error) = gauss_kronrod(&g, lo, hi);
        Panel { segment: s, lo, hi, value, error }
    };

    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Panel> = Vec::new();
    let mut evaluations = 0;
    for s in 0..segments.len() {
        let (lo, hi) = segments[s].domain();
        heap.push(eval_panel(s, lo, hi));
        evaluations += POINTS_PER_PANEL;
    }

    let totals = |heap: &BinaryHeap<Panel>, frozen: &[Panel]| -> (f64, f64) {
        let mut all: Vec<&Panel> = heap.iter().chain(frozen.iter()).collect();
        all.sort_by(|a, b| a.segment.cmp(&b.segment).then(a.lo.total_cmp(&b.lo)));
        all.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
    };

    let (mut value, mut error) = totals(&heap, &frozen);
    let mut iterations = 0usize;
    loop {
        if !value.is_finite() || !error.is_finite() {
            return QuadratureResult { value, error_estimate: error, evaluations, converged: false };
        }
        if error <= cfg.target(value) {
            break;
        }
        if heap.len() + frozen.len() >= cfg.max_panels {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi) || (worst.hi - worst.lo) <= 4.0 * f64::EPSILON * mid.abs().max(1e-300)
        {
            frozen.push(worst);
            continue;
        }
        let left = eval_panel(worst.segment, worst.lo, mid);
        let right = eval_panel(worst.segment, mid, worst.hi);
        evaluations += 2 * POINTS_PER_PANEL;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        iterations += 1;
        if iterations % 64 == 0 {
            (value, error) = totals(&heap, &frozen);
        }
    }
    let (value, error) = totals(&heap, &frozen);
    QuadratureResult {
        value,
        error_estimate: error,
        evaluations,
        converged: value.is_finite() && error.is_finite() && error <= cfg.target(value),
    }
}

/// `∫_a^b f`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> QuadratureResult {
    integrate_segments(f, &[Segment::Finite { a, b }], cfg)
}

/// `∫_a^b f` for `f ~ (x - a)^exponent` near `a`, `exponent > -1`.
pub fn integrate_singular<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, exponent: f64, cfg: &QuadConfig) -> QuadratureResult {
    integrate_segments(f, &[segment_with_singularity(a, b, exponent)], cfg)
}

/// `∫_a^∞ f`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, a: f64, cfg: &QuadConfig) -> QuadratureResult {
    integrate_segments(f, &[Segment::Finite { a, b: a + 1.0 }, Segment::Tail { a: a + 1.0, scale: 1.0 }], cfg)
}

/// `∫_a^∞ f` with an algebraic singularity of the given exponent at `a`.
pub fn integrate_semi_infinite_singular<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    exponent: f64,
    cfg: &QuadConfig,
) -> QuadratureResult {
    integrate_segments(
        f,
        &[segment_with_singularity(a, a + 1.0, exponent), Segment::Tail { a: a + 1.0, scale: 1.0 }],
        cfg,
    )
}

/// Segments covering `[lo, hi]` (or `[lo, ∞)` when `hi` is infinite), split
/// at the interior `breaks`. The first segment carries the left-endpoint
/// singularity exponent; the tail uses `tail_scale`.
pub fn split_segments(lo: f64, hi: f64, breaks: &[f64], left_exponent: f64, tail_scale: f64) -> Vec<Segment> {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&b| b > lo && b < hi && b.is_finite()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if hi.is_finite() {
        pts.push(hi);
    } else if pts.is_empty() {
        pts.push(lo + tail_scale);
    }
    let mut segs = Vec::with_capacity(pts.len() + 1);
    let mut start = lo;
    for (i, &p) in pts.iter().enumerate() {
        segs.push(if i == 0 { segment_with_singularity(start, p, left_exponent) } else { Segment::Finite { a: start, b: p } });
        start = p;
    }
    if !hi.is_finite() {
        segs.push(Segment::Tail { a: start, scale: tail_scale });
    }
    segs
}
