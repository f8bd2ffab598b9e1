//! The `bound`, `compare`, `kron` and `oracle` subcommands.

use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;

use decay_core::bounds::EntryBound;
use decay_core::graph::{bound_with_distance, GraphBound};
use decay_core::kron::{cauchy_kron_bound, exp_kron_bound, laplace_kron_bound, KronBound, KronOracle};
use decay_core::measures::{cauchy_catalog, complex_closed_form, laplace_catalog, CauchyMeasure, LaplaceMeasure};
use decay_core::report::fmt_num;
use decay_core::{
    BandedContext, BoundKind, Complex64, DecayBoundReport, DecayError, DenseOracle, Hermitian, IndexOrder,
    KroneckerContext, KroneckerSum, MultiIndex, PatternGraph, QuadConfig, ReportRow, SeriesFunction, SeriesOracle,
    SpectrumSource,
};

use crate::args::{BoundArgs, BoundClass, DistanceMode, IndexOrderArg, KronArgs, KronClass, OracleArgs, OracleMode, QuadArgs};
use crate::error::{CliError, EXIT_NUMERICAL, EXIT_VIOLATION};
use crate::matrices::{load_factors, load_matrix};

/// Scalar function evaluated at the eigenvalues by the dense oracle.
pub type EigenFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// A bound together with the matching oracle functions.
pub struct Selection {
    pub kind: BoundKind,
    pub eigen_fn: EigenFn,
    /// Set when the series oracle evaluates the same function.
    pub series: Option<SeriesFunction>,
}

const DEFAULT_FUNCTION: &str = "inv_sqrt";
pub const CLOSED_FORM: &str = "inv_sqrt_closed";

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Series oracle counterpart of a catalog name, if any.
fn series_for(name: &str) -> Option<SeriesFunction> {
    match name.split_once(':') {
        None => match name {
            "inv" => Some(SeriesFunction::InvPow { sigma: 1.0 }),
            "inv_sqrt" | CLOSED_FORM => Some(SeriesFunction::InvPow { sigma: 0.5 }),
            "phi1" => Some(SeriesFunction::Phi1),
            "exp" => Some(SeriesFunction::Exp { tau: 1.0 }),
            _ => None,
        },
        Some(("inv_pow", p)) => p.trim().parse().ok().filter(|s: &f64| *s > 0.0).map(|sigma| SeriesFunction::InvPow { sigma }),
        Some(_) => None,
    }
}

fn shifted_closed_form(name: &str, zeta: f64) -> Result<EigenFn, CliError> {
    let g = complex_closed_form(name)?;
    Ok(Arc::new(move |x| g(Complex64::new(x, zeta))))
}

fn exp_fn(tau: f64) -> EigenFn {
    Arc::new(move |x| Complex64::new((-tau * x).exp(), 0.0))
}

fn check_tau(tau: f64) -> Result<(), CliError> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--tau must be positive, got {tau}")))
    }
}

pub fn select(class: BoundClass, function: Option<&str>, tau: f64, zeta: f64) -> Result<Selection, CliError> {
    if !zeta.is_finite() {
        return Err(usage("--zeta must be finite"));
    }
    let shifted = zeta != 0.0;
    let series_unless_shifted = |name: &str| if shifted { None } else { series_for(name) };
    match class {
        BoundClass::Exp => {
            if let Some(f) = function.filter(|&f| f != "exp") {
                return Err(usage(format!("--class exp bounds exp(-τM); --function {f} contradicts it")));
            }
            if shifted {
                return Err(usage("--class exp has no shifted variant; drop --zeta"));
            }
            check_tau(tau)?;
            Ok(Selection { kind: BoundKind::Exp { tau }, eigen_fn: exp_fn(tau), series: Some(SeriesFunction::Exp { tau }) })
        }
        BoundClass::Resolvent => {
            if let Some(f) = function.filter(|&f| f != "inv") {
                return Err(usage(format!("--class resolvent bounds (M - iζI)^(-1); --function {f} contradicts it")));
            }
            if shifted {
                let eigen_fn: EigenFn = Arc::new(move |x| Complex64::new(x, -zeta).inv());
                Ok(Selection { kind: BoundKind::Freund { zeta }, eigen_fn, series: None })
            } else {
                Ok(Selection { kind: BoundKind::Demko, eigen_fn: Arc::new(|x| Complex64::new(1.0 / x, 0.0)), series: series_for("inv") })
            }
        }
        BoundClass::Laplace => {
            let name = function.unwrap_or(DEFAULT_FUNCTION);
            if name == CLOSED_FORM {
                return Err(usage(format!("{CLOSED_FORM} is a Cauchy–Stieltjes bound; use --class cauchy")));
            }
            let measure = laplace_catalog(name)?;
            let kind = if shifted { BoundKind::LaplaceShifted { measure, zeta } } else { BoundKind::Laplace(measure) };
            Ok(Selection { kind, eigen_fn: shifted_closed_form(name, zeta)?, series: series_unless_shifted(name) })
        }
        BoundClass::Cauchy => {
            let name = function.unwrap_or(DEFAULT_FUNCTION);
            if name == CLOSED_FORM {
                if shifted {
                    return Err(usage(format!("{CLOSED_FORM} has no shifted variant; drop --zeta")));
                }
                return Ok(Selection {
                    kind: BoundKind::InvSqrtClosed,
                    eigen_fn: shifted_closed_form("inv_sqrt", 0.0)?,
                    series: series_for(name),
                });
            }
            let measure = cauchy_catalog(name)?;
            let kind = if shifted { BoundKind::CauchyShifted { measure, zeta } } else { BoundKind::Cauchy(measure) };
            Ok(Selection { kind, eigen_fn: shifted_closed_form(name, zeta)?, series: series_unless_shifted(name) })
        }
    }
}

pub fn quad_config(q: &QuadArgs) -> Result<QuadConfig, CliError> {
    if !(q.quad_tol > 0.0 && q.quad_tol < 1.0) {
        return Err(usage(format!("--quad-tol must lie in (0, 1), got {}", q.quad_tol)));
    }
    let cfg = QuadConfig::relative(q.quad_tol);
    Ok(match q.quad_max_panels {
        Some(p) => cfg.with_max_panels(p),
        None => cfg,
    })
}

/// Moduli of an oracle column and their absolute accuracy.
pub struct OracleColumn {
    pub values: Vec<f64>,
    pub floor: f64,
}

fn series_column<M: Hermitian + ?Sized>(m: &M, f: SeriesFunction, t: usize) -> Result<OracleColumn, DecayError> {
    let values = SeriesOracle::new(m)?.column(f, t)?;
    Ok(OracleColumn { values: values.into_iter().map(f64::abs).collect(), floor: 0.0 })
}

fn pick_series(mode: OracleMode, series: Option<SeriesFunction>) -> Result<Option<SeriesFunction>, CliError> {
    match (mode, series) {
        (OracleMode::Eigen, _) => Ok(None),
        (OracleMode::Series, None) => Err(usage("the series oracle does not cover this function; use --oracle eigen")),
        (_, s) => Ok(s),
    }
}

/// Series oracle when requested or applicable, else the dense one.
fn oracle_column(m: &dyn Hermitian, sel: &Selection, t: usize, mode: OracleMode) -> Result<OracleColumn, CliError> {
    if let Some(f) = pick_series(mode, sel.series)? {
        match series_column(m, f, t) {
            Ok(c) => return Ok(c),
            Err(e) if mode == OracleMode::Series => return Err(e.into()),
            Err(_) => {}
        }
    }
    let dense = DenseOracle::new(m)?;
    let column = dense.function_column(t, |x| (sel.eigen_fn)(x))?;
    let max_f = dense.eigen().eigenvalues.iter().map(|&l| (sel.eigen_fn)(l).norm()).fold(0.0, f64::max);
    Ok(OracleColumn { values: column.iter().map(|z| z.norm()).collect(), floor: dense.noise_floor(max_f) })
}

/// `None` where the bound is not stated, or not requested, at distance `d`.
fn entry_bound(kind: &BoundKind, ctx: &BandedContext, d: f64) -> Result<Option<EntryBound>, CliError> {
    if !(kind.is_valid_at(d) || (ctx.extended && d > 0.0)) {
        return Ok(None);
    }
    skip_domain(kind.evaluate(ctx, d))
}

fn skip_domain<T>(r: Result<T, DecayError>) -> Result<Option<T>, CliError> {
    match r {
        Ok(b) => Ok(Some(b)),
        Err(DecayError::Domain(_) | DecayError::InvalidArgument(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub struct ColumnOptions {
    pub distance: DistanceMode,
    pub drop_tol: f64,
    pub quad: Option<QuadConfig>,
    pub extended: bool,
    pub oracle: OracleMode,
}

/// Bound and oracle for every row of column `t` (0-based) of `f(M)`.
pub fn single_column(m: &dyn Hermitian, sel: &Selection, t: usize, opts: &ColumnOptions) -> Result<DecayBoundReport, CliError> {
    let n = m.order();
    if t >= n {
        return Err(usage(format!("--column {} exceeds the matrix order {n}", t + 1)));
    }
    let mut ctx = BandedContext::from_matrix(m, SpectrumSource::Exact)?.with_extended(opts.extended);
    if let Some(q) = opts.quad {
        ctx = ctx.with_quad(q);
    }
    let graph = match opts.distance {
        DistanceMode::Band => None,
        DistanceMode::Graph => Some(PatternGraph::from_matrix(m, opts.drop_tol).geodesic_from(t)?),
    };
    let oracle = oracle_column(m, sel, t, opts.oracle)?;
    let mut label = sel.kind.label();
    if graph.is_some() {
        label.push_str(" graph");
    }
    let mut report = DecayBoundReport::new(label, t);
    for k in 0..n {
        let (distance, bound) = match &graph {
            None => {
                let d = ctx.band_distance(k, t);
                (Some(d), entry_bound(&sel.kind, &ctx, d)?)
            }
            Some(dist) => match dist.get(k) {
                None => (None, None),
                Some(d) => {
                    let d = d as f64;
                    let b = if sel.kind.is_valid_at(d) || (opts.extended && d > 0.0) {
                        match skip_domain(bound_with_distance(&sel.kind, &ctx, dist, k))? {
                            Some(GraphBound::Bound(b)) => Some(b),
                            _ => None,
                        }
                    } else {
                        None
                    };
                    (Some(d), b)
                }
            },
        };
        let mut row = ReportRow::new(k, distance, bound.as_ref().map(|b| b.value), oracle.values[k]).with_floor(oracle.floor);
        if let Some(b) = &bound {
            row.extended = b.extended;
            row.converged = b.converged;
        }
        report.push(row);
    }
    Ok(report)
}

pub enum KronSelection {
    Laplace(LaplaceMeasure),
    Cauchy(CauchyMeasure),
    Exp { tau: f64 },
}

pub struct KronSetup {
    pub bound: KronSelection,
    pub eigen_fn: EigenFn,
    pub series: Option<SeriesFunction>,
}

pub fn select_kron(class: KronClass, function: Option<&str>, tau: f64) -> Result<KronSetup, CliError> {
    match class {
        KronClass::Exp => {
            if let Some(f) = function.filter(|&f| f != "exp") {
                return Err(usage(format!("--class exp bounds exp(-τA); --function {f} contradicts it")));
            }
            check_tau(tau)?;
            Ok(KronSetup { bound: KronSelection::Exp { tau }, eigen_fn: exp_fn(tau), series: Some(SeriesFunction::Exp { tau }) })
        }
        KronClass::Laplace | KronClass::Cauchy => {
            let name = function.unwrap_or(DEFAULT_FUNCTION);
            if name == CLOSED_FORM {
                return Err(usage(format!("{CLOSED_FORM} is not available for Kronecker sums")));
            }
            let bound = match class {
                KronClass::Laplace => KronSelection::Laplace(laplace_catalog(name)?),
                _ => KronSelection::Cauchy(cauchy_catalog(name)?),
            };
            Ok(KronSetup { bound, eigen_fn: shifted_closed_form(name, 0.0)?, series: series_for(name) })
        }
    }
}

/// Parses `t` (linear) or `t1,t2,...` (grid), both 1-based.
pub fn parse_kron_column(sum: &KroneckerSum, desc: &str) -> Result<MultiIndex, CliError> {
    let parts = desc
        .split(',')
        .map(|s| match s.trim().parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v - 1),
            _ => Err(usage(format!("--column: `{s}` is not a 1-based index"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if parts.len() == 1 {
        let n: usize = sum.dims().iter().product();
        if parts[0] >= n {
            return Err(usage(format!("--column {} exceeds the order {n}", parts[0] + 1)));
        }
        return Ok(sum.delinearize(parts[0])?);
    }
    let t = MultiIndex(parts);
    sum.linearize(&t)?;
    Ok(t)
}

fn kron_oracle(sum: &KroneckerSum, setup: &KronSetup, t: &MultiIndex, mode: OracleMode) -> Result<OracleColumn, CliError> {
    if let Some(f) = pick_series(mode, setup.series)? {
        match series_column(sum, f, sum.linearize(t)?) {
            Ok(c) => return Ok(c),
            Err(e) if mode == OracleMode::Series => return Err(e.into()),
            Err(_) => {}
        }
    }
    let oracle = KronOracle::new(sum)?;
    let column = oracle.function_column(t, |x| (setup.eigen_fn)(x))?;
    let (lo, hi) = oracle.eigenvalue_range();
    // Every supported function is monotone on the spectrum.
    let max_f = (setup.eigen_fn)(lo).norm().max((setup.eigen_fn)(hi).norm());
    Ok(OracleColumn { values: column.iter().map(|z| z.norm()).collect(), floor: oracle.noise_floor(max_f) })
}

pub fn kron_column(ctx: &KroneckerContext, setup: &KronSetup, t: &MultiIndex, mode: OracleMode) -> Result<DecayBoundReport, CliError> {
    let sum = ctx.sum();
    let lin_t = sum.linearize(t)?;
    let oracle = kron_oracle(sum, setup, t, mode)?;
    let label = match &setup.bound {
        KronSelection::Laplace(m) => format!("kron laplace:{}", m.name()),
        KronSelection::Cauchy(m) => format!("kron cauchy:{}", m.name()),
        KronSelection::Exp { tau } => format!("kron exp(tau={tau})"),
    };
    let mut report = DecayBoundReport::new(label, lin_t);
    for (lin_k, &value) in oracle.values.iter().enumerate() {
        let k = sum.delinearize(lin_k)?;
        let d = ctx.distances(&k, t)?;
        let bound: Option<KronBound> = if lin_k == lin_t {
            None
        } else {
            skip_domain(match &setup.bound {
                KronSelection::Laplace(m) => laplace_kron_bound(ctx, m, &k, t),
                KronSelection::Cauchy(m) => cauchy_kron_bound(ctx, m, &k, t),
                KronSelection::Exp { tau } => exp_kron_bound(ctx, *tau, &k, t),
            })?
        };
        let mut row = ReportRow::new(lin_k, None, bound.as_ref().map(|b| b.value), value).with_floor(oracle.floor);
        row.components = Some((k.0, d));
        if let Some(b) = &bound {
            row.extended = b.extended;
            row.converged = b.converged;
        }
        report.push(row);
    }
    Ok(report)
}

pub fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// Exit status for a finished report: non-converged rows first, then
/// violations when they are checked.
pub fn report_status(report: &DecayBoundReport, check_violations: bool) -> ExitCode {
    if !report.all_converged() {
        let bad = report.rows.iter().filter(|r| r.bound.is_some() && !r.converged).count();
        eprintln!("error: quadrature did not converge on {bad} rows");
        return ExitCode::from(EXIT_NUMERICAL);
    }
    if check_violations && report.violation_count() > 0 {
        for r in report.violations() {
            eprintln!("violation: k={} bound={} oracle={}", r.k + 1, r.bound.map(fmt_num).unwrap_or_default(), fmt_num(r.oracle));
        }
        return ExitCode::from(EXIT_VIOLATION);
    }
    ExitCode::SUCCESS
}

fn column_options(args: &BoundArgs) -> Result<ColumnOptions, CliError> {
    if !(args.pattern_drop_tol >= 0.0) {
        return Err(usage("--pattern-drop-tol must be >= 0"));
    }
    Ok(ColumnOptions {
        distance: args.distance,
        drop_tol: args.pattern_drop_tol,
        quad: Some(quad_config(&args.quad)?),
        extended: args.quad.extended,
        oracle: args.quad.oracle,
    })
}

fn bound_report(args: &BoundArgs) -> Result<DecayBoundReport, CliError> {
    let sel = select(args.class, args.function.as_deref(), args.tau, args.zeta)?;
    let opts = column_options(args)?;
    let m = load_matrix(&args.matrix, args.n)?;
    if args.column == 0 {
        return Err(usage("--column is 1-based"));
    }
    single_column(m.as_hermitian(), &sel, args.column - 1, &opts)
}

pub fn run_bound(args: &BoundArgs) -> Result<ExitCode, CliError> {
    let report = bound_report(args)?;
    write_output(args.quad.out.as_deref(), &report.to_csv())?;
    eprintln!("{}", report.summary_line());
    Ok(report_status(&report, args.quad.self_check))
}

pub fn run_compare(args: &BoundArgs) -> Result<ExitCode, CliError> {
    let report = bound_report(args)?;
    if let Some(out) = &args.quad.out {
        write_output(Some(out), &report.to_csv())?;
    }
    println!("{}", report.summary_line());
    Ok(report_status(&report, true))
}

pub fn run_kron(args: &KronArgs) -> Result<ExitCode, CliError> {
    let setup = select_kron(args.class, args.function.as_deref(), args.tau)?;
    let quad = quad_config(&args.quad)?;
    let order = match args.index_order {
        IndexOrderArg::LastFastest => IndexOrder::LastFastest,
        IndexOrderArg::FirstFastest => IndexOrder::FirstFastest,
    };
    let sum = KroneckerSum::new(load_factors(&args.factors, args.n)?)?.with_order(order);
    let t = parse_kron_column(&sum, &args.column)?;
    let ctx = KroneckerContext::new(sum, SpectrumSource::Exact)?.with_quad(quad).with_extended(args.quad.extended);
    let report = kron_column(&ctx, &setup, &t, args.quad.oracle)?;
    write_output(args.quad.out.as_deref(), &report.to_csv())?;
    eprintln!("{}", report.summary_line());
    Ok(report_status(&report, args.quad.self_check))
}

pub fn run_oracle(args: &OracleArgs) -> Result<ExitCode, CliError> {
    let f = shifted_closed_form(&args.function, args.zeta)?;
    let m = load_matrix(&args.matrix, args.n)?;
    let m = m.as_hermitian();
    if args.column == 0 || args.column > m.order() {
        return Err(usage(format!("--column must lie in 1..={}", m.order())));
    }
    let column = DenseOracle::new(m)?.function_column(args.column - 1, |x| f(x))?;
    let mut csv = String::from("k,re,im\n");
    for (k, z) in column.iter().enumerate() {
        csv.push_str(&format!("{},{},{}\n", k + 1, fmt_num(z.re), fmt_num(z.im)));
    }
    write_output(args.out.as_deref(), &csv)?;
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contradictory_flags_are_usage_errors() {
        assert!(matches!(select(BoundClass::Exp, Some("inv_sqrt"), 4.0, 0.0), Err(CliError::Usage(_))));
        assert!(matches!(select(BoundClass::Resolvent, Some("phi1"), 4.0, 0.0), Err(CliError::Usage(_))));
        assert!(matches!(select(BoundClass::Laplace, Some(CLOSED_FORM), 4.0, 0.0), Err(CliError::Usage(_))));
        assert!(matches!(select(BoundClass::Laplace, Some("nope"), 4.0, 0.0), Err(CliError::Usage(_))));
        assert!(matches!(select(BoundClass::Exp, None, 0.0, 0.0), Err(CliError::Usage(_))));
    }

    #[test]
    fn shifts_select_the_shifted_bounds() {
        assert!(matches!(select(BoundClass::Resolvent, None, 4.0, 0.5).unwrap().kind, BoundKind::Freund { .. }));
        assert!(matches!(select(BoundClass::Cauchy, Some("inv"), 4.0, 0.5).unwrap().kind, BoundKind::CauchyShifted { .. }));
        let s = select(BoundClass::Laplace, Some("inv_pow:1.5"), 4.0, 0.0).unwrap();
        assert_eq!(s.series, Some(SeriesFunction::InvPow { sigma: 1.5 }));
        assert!(select(BoundClass::Laplace, Some("inv"), 4.0, 1.0).unwrap().series.is_none());
    }

    #[test]
    fn kron_column_accepts_linear_and_grid_indices() {
        let m = decay_core::make_test_matrix(decay_core::TestMatrixKind::Tridiag, 20).unwrap();
        let sum = KroneckerSum::new(vec![m.clone(), m]).unwrap();
        assert_eq!(parse_kron_column(&sum, "94").unwrap().0, vec![4, 13]);
        assert_eq!(parse_kron_column(&sum, "5,14").unwrap().0, vec![4, 13]);
        assert!(parse_kron_column(&sum, "0").is_err());
        assert!(parse_kron_column(&sum, "401").is_err());
        assert!(parse_kron_column(&sum, "21,1").is_err());
    }
}
