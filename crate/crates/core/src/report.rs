//! CSV output for per-trial records and sweep summaries, and the readers
//! the plot command uses to load them back.
//!
//! Floats are written with 10 significant digits in `%g` style, booleans
//! as `0`/`1`, missing values as empty fields. Nothing is quoted, so no
//! field may contain a comma.

use std::fmt::Write as _;

use crate::algorithms::AlgorithmKind;
use crate::error::{Error, Result};
use crate::harness::{reference_runtime, ExperimentConfig, Figure1Row, Figure2Table, RunRecord, SummaryStats};

pub const TRIAL_HEADER: &str =
    "experiment_id,algorithm,n,p,d,k_star,F,s,lambda_max,seed,evaluations,censored,final_fitness";
pub const FIGURE1_HEADER: &str =
    "n,p,count,censored_count,mean,median,stddev,normalized_mean,normalized_median,median_unreliable";
pub const FIGURE2_HEADER: &str =
    "n,algorithm,lambda,p,count,censored_count,mean,median,stddev,normalized_median,median_unreliable";

/// Algorithm label of the `n ln n / p` rows in the comparison summary.
pub const REFERENCE_LABEL: &str = "reference";

/// Formats like C's `%.10g`.
pub fn format_float(x: f64) -> String {
    const DIGITS: i32 = 10;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let m = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt_float(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// One line of the per-trial CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub experiment_id: String,
    pub algorithm: String,
    pub n: usize,
    pub p: f64,
    pub d: f64,
    pub k_star: f64,
    /// Controller columns are empty for static algorithms.
    pub factor: Option<f64>,
    pub s: Option<f64>,
    /// `λ_max` for the SA variant, the static λ otherwise.
    pub lambda_max: f64,
    pub seed: u64,
    pub evaluations: u64,
    pub censored: bool,
    pub final_fitness: f64,
}

impl TrialRow {
    pub fn new(config: &ExperimentConfig, record: &RunRecord) -> Self {
        let (factor, s, lambda_max) = match config.algorithm {
            AlgorithmKind::SaCommaReset(p) => (Some(p.factor), Some(p.s), p.lambda_max),
            other => (None, None, other.initial_lambda()),
        };
        Self {
            experiment_id: config.experiment_id.clone(),
            algorithm: config.algorithm.name().to_string(),
            n: config.n,
            p: config.p,
            d: config.d,
            k_star: config.k_star,
            factor,
            s,
            lambda_max,
            seed: record.seed,
            evaluations: record.evaluations,
            censored: record.censored,
            final_fitness: record.final_fitness,
        }
    }

    pub fn to_csv_line(&self) -> String {
        [
            self.experiment_id.clone(),
            self.algorithm.clone(),
            self.n.to_string(),
            format_float(self.p),
            format_float(self.d),
            format_float(self.k_star),
            opt_float(self.factor),
            opt_float(self.s),
            format_float(self.lambda_max),
            self.seed.to_string(),
            self.evaluations.to_string(),
            flag(self.censored).to_string(),
            format_float(self.final_fitness),
        ]
        .join(",")
    }

    fn parse(line: &str, lineno: usize) -> Result<Self> {
        let f = Fields::split(line, 13, lineno)?;
        Ok(Self {
            experiment_id: f.text(0),
            algorithm: f.text(1),
            n: f.parse(2)?,
            p: f.parse(3)?,
            d: f.parse(4)?,
            k_star: f.parse(5)?,
            factor: f.optional(6)?,
            s: f.optional(7)?,
            lambda_max: f.parse(8)?,
            seed: f.parse(9)?,
            evaluations: f.parse(10)?,
            censored: f.flag(11)?,
            final_fitness: f.parse(12)?,
        })
    }
}

struct Fields<'a> {
    cells: Vec<&'a str>,
    lineno: usize,
}

impl<'a> Fields<'a> {
    fn split(line: &'a str, expected: usize, lineno: usize) -> Result<Self> {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != expected {
            return Err(Error::arg(format!(
                "line {lineno}: expected {expected} fields, found {}",
                cells.len()
            )));
        }
        Ok(Self { cells, lineno })
    }

    fn text(&self, i: usize) -> String {
        self.cells[i].to_string()
    }

    fn parse<T: std::str::FromStr>(&self, i: usize) -> Result<T> {
        self.cells[i]
            .parse()
            .map_err(|_| Error::arg(format!("line {}: bad value {:?} in column {}", self.lineno, self.cells[i], i + 1)))
    }

    fn optional<T: std::str::FromStr>(&self, i: usize) -> Result<Option<T>> {
        if self.cells[i].is_empty() {
            Ok(None)
        } else {
            self.parse(i).map(Some)
        }
    }

    fn flag(&self, i: usize) -> Result<bool> {
        match self.cells[i] {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(Error::arg(format!("line {}: expected 0/1, got {other:?}", self.lineno))),
        }
    }
}

fn body_lines<'a>(text: &'a str, header: &str) -> Result<impl Iterator<Item = (usize, &'a str)>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == header => Ok(lines.enumerate().map(|(i, l)| (i + 2, l)).filter(|(_, l)| !l.is_empty())),
        Some(h) => Err(Error::arg(format!("unexpected CSV header {h:?}"))),
        None => Err(Error::arg("empty CSV input")),
    }
}

pub fn trials_csv(rows: &[TrialRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(TRIAL_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    out
}

/// Per-trial rows for a set of experiments, in config then replication order.
pub fn trial_rows<'a, I>(results: I) -> Vec<TrialRow>
where
    I: IntoIterator<Item = (&'a ExperimentConfig, &'a [RunRecord])>,
{
    results
        .into_iter()
        .flat_map(|(c, recs)| recs.iter().map(move |r| TrialRow::new(c, r)))
        .collect()
}

pub fn read_trials_csv(text: &str) -> Result<Vec<TrialRow>> {
    body_lines(text, TRIAL_HEADER)?
        .map(|(i, l)| TrialRow::parse(l, i))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummaryKind {
    /// Normalized SA runtime per (n, p).
    PSweep,
    /// Median runtime per (n, algorithm) plus reference rows.
    AlgorithmComparison,
}

impl SummaryKind {
    pub fn header(self) -> &'static str {
        match self {
            SummaryKind::PSweep => FIGURE1_HEADER,
            SummaryKind::AlgorithmComparison => FIGURE2_HEADER,
        }
    }
}

/// One summary line of either sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryLine {
    pub n: usize,
    pub algorithm: Option<String>,
    pub lambda: Option<u64>,
    pub p: f64,
    pub count: u64,
    pub censored_count: u64,
    pub mean: f64,
    pub median: f64,
    pub stddev: f64,
    pub normalized_mean: Option<f64>,
    pub normalized_median: Option<f64>,
    pub median_unreliable: bool,
}

impl SummaryLine {
    fn from_stats(n: usize, algorithm: Option<String>, lambda: Option<u64>, p: f64, s: &SummaryStats) -> Self {
        Self {
            n,
            algorithm,
            lambda,
            p,
            count: s.count,
            censored_count: s.censored_count,
            mean: s.mean,
            median: s.median,
            stddev: s.stddev,
            normalized_mean: s.normalized_mean,
            normalized_median: s.normalized_median,
            median_unreliable: s.median_unreliable,
        }
    }

    pub fn is_reference(&self) -> bool {
        self.algorithm.as_deref() == Some(REFERENCE_LABEL)
    }

    fn to_csv_line(&self, kind: SummaryKind) -> String {
        match kind {
            SummaryKind::PSweep => [
                self.n.to_string(),
                format_float(self.p),
                self.count.to_string(),
                self.censored_count.to_string(),
                format_float(self.mean),
                format_float(self.median),
                format_float(self.stddev),
                opt_float(self.normalized_mean),
                opt_float(self.normalized_median),
                flag(self.median_unreliable).into(),
            ]
            .join(","),
            SummaryKind::AlgorithmComparison => [
                self.n.to_string(),
                self.algorithm.clone().unwrap_or_default(),
                self.lambda.map(|l| l.to_string()).unwrap_or_default(),
                format_float(self.p),
                self.count.to_string(),
                self.censored_count.to_string(),
                format_float(self.mean),
                format_float(self.median),
                format_float(self.stddev),
                opt_float(self.normalized_median),
                flag(self.median_unreliable).into(),
            ]
            .join(","),
        }
    }

    fn parse(kind: SummaryKind, line: &str, lineno: usize) -> Result<Self> {
        match kind {
            SummaryKind::PSweep => {
                let f = Fields::split(line, 10, lineno)?;
                Ok(Self {
                    n: f.parse(0)?,
                    algorithm: None,
                    lambda: None,
                    p: f.parse(1)?,
                    count: f.parse(2)?,
                    censored_count: f.parse(3)?,
                    mean: f.parse(4)?,
                    median: f.parse(5)?,
                    stddev: f.parse(6)?,
                    normalized_mean: f.optional(7)?,
                    normalized_median: f.optional(8)?,
                    median_unreliable: f.flag(9)?,
                })
            }
            SummaryKind::AlgorithmComparison => {
                let f = Fields::split(line, 11, lineno)?;
                Ok(Self {
                    n: f.parse(0)?,
                    algorithm: Some(f.text(1)),
                    lambda: f.optional(2)?,
                    p: f.parse(3)?,
                    count: f.parse(4)?,
                    censored_count: f.parse(5)?,
                    mean: f.parse(6)?,
                    median: f.parse(7)?,
                    stddev: f.parse(8)?,
                    normalized_mean: None,
                    normalized_median: f.optional(9)?,
                    median_unreliable: f.flag(10)?,
                })
            }
        }
    }
}

pub fn summary_csv(kind: SummaryKind, lines: &[SummaryLine]) -> String {
    let mut out = String::new();
    out.push_str(kind.header());
    out.push('\n');
    for l in lines {
        let _ = writeln!(out, "{}", l.to_csv_line(kind));
    }
    out
}

pub fn read_summary_csv(text: &str) -> Result<(SummaryKind, Vec<SummaryLine>)> {
    let header = text.lines().next().unwrap_or_default();
    let kind = [SummaryKind::PSweep, SummaryKind::AlgorithmComparison]
        .into_iter()
        .find(|k| k.header() == header)
        .ok_or_else(|| Error::arg(format!("unexpected CSV header {header:?}")))?;
    let lines = body_lines(text, kind.header())?
        .map(|(i, l)| SummaryLine::parse(kind, l, i))
        .collect::<Result<_>>()?;
    Ok((kind, lines))
}

pub fn figure1_summary(rows: &[Figure1Row]) -> Vec<SummaryLine> {
    rows.iter()
        .map(|r| SummaryLine::from_stats(r.n, None, None, r.p, &r.stats))
        .collect()
}

/// Summary rows per (n, algorithm) followed, per n, by a reference row
/// holding `n ln n / p` in its mean and median columns.
pub fn figure2_summary(table: &Figure2Table) -> Vec<SummaryLine> {
    let mut out = Vec::new();
    for &(n, reference) in &table.references {
        let mut p = None;
        let mut lambda = None;
        for r in table.rows.iter().filter(|r| r.n == n) {
            out.push(SummaryLine::from_stats(n, Some(r.algorithm.to_string()), Some(r.lambda), r.p, &r.stats));
            p = Some(r.p);
            lambda = Some(r.lambda);
        }
        let p = p.expect("every n has rows");
        debug_assert_eq!(reference, reference_runtime(n, p));
        out.push(SummaryLine {
            n,
            algorithm: Some(REFERENCE_LABEL.into()),
            lambda,
            p,
            count: 0,
            censored_count: 0,
            mean: reference,
            median: reference,
            stddev: 0.0,
            normalized_mean: None,
            normalized_median: Some(1.0),
            median_unreliable: false,
        });
    }
    out
}
