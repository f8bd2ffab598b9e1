//! Bound-versus-oracle comparison tables.

use std::fmt::Write as _;

/// One entry of a compared column. Indices are 0-based here and written
/// 1-based to CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub k: usize,
    /// Grid coordinates and per-component distances for Kronecker sums.
    pub components: Option<(Vec<usize>, Vec<f64>)>,
    /// `None` when unreachable in the pattern graph.
    pub distance: Option<f64>,
    /// `None` when the bound's precondition fails at this entry.
    pub bound: Option<f64>,
    pub oracle: f64,
    /// Absolute accuracy of `oracle`.
    pub floor: f64,
    pub extended: bool,
    pub converged: bool,
}

impl ReportRow {
    pub fn new(k: usize, distance: Option<f64>, bound: Option<f64>, oracle: f64) -> Self {
        Self { k, components: None, distance, bound, oracle, floor: 0.0, extended: false, converged: true }
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    /// `bound / |oracle|` when the oracle value is resolved above its floor.
    pub fn ratio(&self) -> Option<f64> {
        let b = self.bound?;
        let v = self.oracle.abs();
        (v > self.floor && v > 0.0).then(|| b / v)
    }

    /// `bound < |oracle| (1 - slack) - floor`.
    pub fn violates(&self, slack: f64) -> bool {
        match self.bound {
            Some(b) => b < self.oracle.abs() * (1.0 - slack) - self.floor,
            None => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioStats {
    pub min: f64,
    pub median: f64,
    pub max: f64,
    pub count: usize,
}

/// A compared column: bound and oracle per row plus summary statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayBoundReport {
    pub label: String,
    pub column: usize,
    pub rows: Vec<ReportRow>,
    /// Relative slack allowed before a row counts as a violation.
    pub slack: f64,
}

/// Relative slack of the dominance check.
pub const DEFAULT_SLACK: f64 = 1e-10;

impl DecayBoundReport {
    pub fn new(label: impl Into<String>, column: usize) -> Self {
        Self { label: label.into(), column, rows: Vec::new(), slack: DEFAULT_SLACK }
    }

    pub fn push(&mut self, row: ReportRow) {
        self.rows.push(row);
    }

    pub fn violations(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(move |r| r.violates(self.slack))
    }

    pub fn violation_count(&self) -> usize {
        self.violations().count()
    }

    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.bound.is_none() || r.converged)
    }

    pub fn bounded_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.bound.is_some()).count()
    }

    pub fn ratio_stats(&self) -> Option<RatioStats> {
        let mut ratios: Vec<f64> = self.rows.iter().filter_map(ReportRow::ratio).collect();
        if ratios.is_empty() {
            return None;
        }
        ratios.sort_by(f64::total_cmp);
        let n = ratios.len();
        let median = if n % 2 == 1 { ratios[n / 2] } else { 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]) };
        Some(RatioStats { min: ratios[0], median, max: ratios[n - 1], count: n })
    }

    /// One line: label, row counts, ratio statistics, violations.
    pub fn summary_line(&self) -> String {
        let stats = match self.ratio_stats() {
            Some(s) => format!("ratio min={:.6e} median={:.6e} max={:.6e} (n={})", s.min, s.median, s.max, s.count),
            None => "ratio n/a".to_string(),
        };
        format!(
            "{} column={} rows={} bounded={} {} violations={}",
            self.label,
            self.column + 1,
            self.rows.len(),
            self.bounded_rows(),
            stats,
            self.violation_count()
        )
    }

    /// RFC 4180 CSV with 17 significant digits. Single-matrix reports use
    /// `k,distance,bound,oracle,ratio`; Kronecker reports insert the grid
    /// coordinates and component distances after `k`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let dims = self.rows.iter().find_map(|r| r.components.as_ref().map(|c| c.0.len()));
        match dims {
            None => out.push_str("k,distance,bound,oracle,ratio\n"),
            Some(d) => {
                out.push('k');
                for l in 1..=d {
                    let _ = write!(out, ",k{l}");
                }
                for l in 1..=d {
                    let _ = write!(out, ",d{l}");
                }
                out.push_str(",bound,oracle,ratio\n");
            }
        }
        for r in &self.rows {
            let _ = write!(out, "{}", r.k + 1);
            match (&r.components, dims) {
                (Some((ks, ds)), Some(_)) => {
                    for k in ks {
                        let _ = write!(out, ",{}", k + 1);
                    }
                    for d in ds {
                        let _ = write!(out, ",{}", fmt_num(*d));
                    }
                }
                _ => {
                    let _ = write!(out, ",{}", r.distance.map(fmt_num).unwrap_or_default());
                }
            }
            let _ = writeln!(
                out,
                ",{},{},{}",
                r.bound.map(fmt_num).unwrap_or_default(),
                fmt_num(r.oracle),
                r.ratio().map(fmt_num).unwrap_or_default()
            );
        }
        out
    }
}

/// 17 significant digits in scientific notation.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}
