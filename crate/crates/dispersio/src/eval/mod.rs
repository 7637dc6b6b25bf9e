//! Evaluation of predictor sets against gold lexical datasets.
//!
//! Loads gold word lists (reaction times or ratings), builds predictor
//! matrices from measure profiles, fits single- and two-predictor
//! least-squares models, and aggregates adjusted-R² comparisons across
//! datasets.

mod bootstrap;
mod matrix;
mod ols;
mod summary;

pub use bootstrap::{
    bootstrap_model_compare, DEFAULT_BOOTSTRAP_ITERATIONS, MIN_BOOTSTRAP_ITERATIONS,
};
pub use matrix::{
    build_predictor_matrix, parse_predictor_spec, PredictorColumn, PredictorMatrix,
    PredictorTerm,
};
pub use ols::{adjusted_r2, fit_ols, RegressionReport};
pub use summary::{
    log_vs_raw_table, robustness_flags, summarize_reports, two_predictor_gain, write_plot_csv,
    write_summary_csv, BaselineInfo, ComparisonRecord, ComparisonSummary, EvalReport, PlotRow,
    ReportFlags, RobustnessFlags, Scenario, SummaryRow, SummaryTables, POSITIVE_DELTA_BOLD,
    ROBUST_GAIN_THRESHOLD, SIGNIFICANCE_LEVEL,
};

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::measures::MeasureParseError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{origin}:{line}: {msg}")]
    Parse {
        origin: String,
        line: usize,
        msg: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("duplicate word '{0}' in gold dataset")]
    DuplicateWord(String),
    #[error("gold dataset has {n} item(s); at least {min} required")]
    TooFewItems { n: usize, min: usize },
    #[error("need more rows than predictors plus intercept (n = {n}, p = {p})")]
    TooFewRows { n: usize, p: usize },
    #[error("gold values have zero variance")]
    ZeroVarianceGold,
    #[error("predictor columns '{0}' and '{1}' are collinear")]
    Collinear(String, String),
    #[error("predictor spec: {0}")]
    BadPredictorSpec(String),
    #[error(transparent)]
    Measure(#[from] MeasureParseError),
    #[error("no counts table for level '{0}'")]
    UnknownLevel(String),
    #[error("bootstrap iterations must be at least {min}, got {got}")]
    TooFewIterations { min: usize, got: usize },
    #[error("resampling stayed degenerate after {0} redraws")]
    DegenerateResamples(usize),
    #[error("at least {min} datasets required, got {got}")]
    TooFewDatasets { min: usize, got: usize },
    #[error("report: {0}")]
    BadReport(String),
}

/// Prediction task behind a gold dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// Lexical decision time (milliseconds).
    Ldt,
    /// Subjective familiarity rating.
    Familiarity,
    /// Rated lexical complexity.
    Complexity,
}

impl Task {
    pub fn parse(name: &str) -> Option<Task> {
        match name {
            "ldt" => Some(Task::Ldt),
            "familiarity" => Some(Task::Familiarity),
            "complexity" => Some(Task::Complexity),
            _ => None,
        }
    }

    /// Direction of the gold value with respect to word rarity. Metadata
    /// only: R² is blind to it.
    pub fn polarity(self) -> Polarity {
        match self {
            // rare words are decided slowly and rated complex
            Task::Ldt | Task::Complexity => Polarity::RareHigh,
            // rare words feel unfamiliar
            Task::Familiarity => Polarity::RareLow,
        }
    }
}

/// Whether rarer words get higher or lower gold values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    RareHigh,
    RareLow,
}

/// A gold dataset: unique words with one numeric value each.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldDataset {
    pub name: String,
    pub task: Task,
    pub polarity: Polarity,
    pub items: Vec<(String, f64)>,
}

/// Minimum items for a single-predictor fit (n > p + 1 with p = 1).
pub const MIN_GOLD_ITEMS: usize = 3;

/// Loads a gold TSV (`word<TAB>value` with that exact header).
///
/// Words are optionally lowercased to match corpus normalization and must
/// be unique afterwards; values must be finite.
pub fn load_gold(
    path: &Path,
    name: &str,
    task: Task,
    lowercase: bool,
) -> Result<GoldDataset, EvalError> {
    let text = fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_gold(&text, &path.display().to_string(), name, task, lowercase)
}

fn parse_gold(
    text: &str,
    origin: &str,
    name: &str,
    task: Task,
    lowercase: bool,
) -> Result<GoldDataset, EvalError> {
    let items = parse_word_value_tsv(text, origin, "word\tvalue", lowercase)?;
    if items.len() < MIN_GOLD_ITEMS {
        return Err(EvalError::TooFewItems {
            n: items.len(),
            min: MIN_GOLD_ITEMS,
        });
    }
    let mut seen = HashMap::new();
    for (word, _) in &items {
        if seen.insert(word.clone(), ()).is_some() {
            return Err(EvalError::DuplicateWord(word.clone()));
        }
    }
    Ok(GoldDataset {
        name: name.to_string(),
        task,
        polarity: task.polarity(),
        items,
    })
}

/// Loads raw reaction-time observations (`word<TAB>rt_ms`, one observation
/// per line, repeated words allowed).
pub fn load_raw_rt(path: &Path, lowercase: bool) -> Result<Vec<(String, f64)>, EvalError> {
    let text = fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_word_value_tsv(&text, &path.display().to_string(), "word\trt_ms", lowercase)
}

fn parse_word_value_tsv(
    text: &str,
    origin: &str,
    header: &str,
    lowercase: bool,
) -> Result<Vec<(String, f64)>, EvalError> {
    let parse_err = |line: usize, msg: String| EvalError::Parse {
        origin: origin.to_string(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first == header => {}
        Some((_, first)) => {
            return Err(parse_err(1, format!("expected header '{header}', found '{first}'")))
        }
        None => return Err(parse_err(1, "empty file".to_string())),
    }
    let mut items = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let (word, value) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(line_no, "expected two TAB-separated fields".to_string()))?;
        let value: f64 = value
            .parse()
            .map_err(|e| parse_err(line_no, format!("invalid value '{value}': {e}")))?;
        if !value.is_finite() {
            return Err(parse_err(line_no, format!("non-finite value '{value}'")));
        }
        let word = if lowercase {
            word.to_lowercase()
        } else {
            word.to_string()
        };
        if word.is_empty() {
            return Err(parse_err(line_no, "empty word".to_string()));
        }
        items.push((word, value));
    }
    Ok(items)
}

/// Default lower reaction-time cutoff (milliseconds).
pub const RT_DEFAULT_MIN_MS: f64 = 200.0;
/// Default upper reaction-time cutoff (milliseconds).
pub const RT_DEFAULT_MAX_MS: f64 = 2000.0;

/// Collapses raw reaction-time observations into per-word means, keeping
/// only times within `[lo, hi]` (inclusive). Words with no surviving
/// observations are dropped. Output is sorted by word.
pub fn aggregate_raw_rt(
    name: &str,
    rows: &[(String, f64)],
    lo: f64,
    hi: f64,
) -> GoldDataset {
    let mut sums: HashMap<&str, (f64, u64)> = HashMap::new();
    for (word, rt) in rows {
        if *rt >= lo && *rt <= hi {
            let slot = sums.entry(word.as_str()).or_insert((0.0, 0));
            slot.0 += rt;
            slot.1 += 1;
        }
    }
    let mut items: Vec<(String, f64)> = sums
        .into_iter()
        .map(|(word, (sum, count))| (word.to_string(), sum / count as f64))
        .collect();
    items.sort_by(|a, b| a.0.cmp(&b.0));
    GoldDataset {
        name: name.to_string(),
        task: Task::Ldt,
        polarity: Task::Ldt.polarity(),
        items,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gold_parse_three_rows() {
        let text = "word\tvalue\nalpha\t512.5\nbeta\t633\ngamma\t710.25\n";
        let gold = parse_gold(text, "mem", "toy", Task::Ldt, true).unwrap();
        assert_eq!(gold.items.len(), 3);
        assert_eq!(gold.items[0], ("alpha".to_string(), 512.5));
        assert_eq!(gold.polarity, Polarity::RareHigh);
    }

    #[test]
    fn gold_duplicate_word_rejected() {
        let text = "word\tvalue\na\t1\nb\t2\nA\t3\n";
        // lowercasing makes 'A' collide with 'a'
        assert!(matches!(
            parse_gold(text, "mem", "toy", Task::Ldt, true).unwrap_err(),
            EvalError::DuplicateWord(w) if w == "a"
        ));
    }

    #[test]
    fn gold_empty_file_rejected() {
        assert!(parse_gold("word\tvalue\n", "mem", "toy", Task::Ldt, true).is_err());
        assert!(parse_gold("", "mem", "toy", Task::Ldt, true).is_err());
    }

    #[test]
    fn gold_non_numeric_value_reports_line() {
        let text = "word\tvalue\na\t1\nb\tNOPE\n";
        match parse_gold(text, "mem", "toy", Task::Ldt, true).unwrap_err() {
            EvalError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn rt_aggregation_filters_then_averages() {
        let rows = vec![
            ("w".to_string(), 300.0),
            ("w".to_string(), 250.0),
            ("w".to_string(), 2500.0),
        ];
        let gold = aggregate_raw_rt("toy", &rows, RT_DEFAULT_MIN_MS, RT_DEFAULT_MAX_MS);
        assert_eq!(gold.items.len(), 1);
        assert_abs_diff_eq!(gold.items[0].1, 275.0, epsilon = 1e-12);
    }

    #[test]
    fn rt_aggregation_drops_fully_filtered_words() {
        let rows = vec![("w".to_string(), 100.0), ("w".to_string(), 2500.0)];
        let gold = aggregate_raw_rt("toy", &rows, RT_DEFAULT_MIN_MS, RT_DEFAULT_MAX_MS);
        assert!(gold.items.is_empty());
    }

    #[test]
    fn rt_bounds_are_inclusive() {
        let rows = vec![("w".to_string(), 200.0), ("w".to_string(), 2000.0)];
        let gold = aggregate_raw_rt("toy", &rows, RT_DEFAULT_MIN_MS, RT_DEFAULT_MAX_MS);
        assert_abs_diff_eq!(gold.items[0].1, 1100.0, epsilon = 1e-12);
    }

    #[test]
    fn task_polarity() {
        assert_eq!(Task::Familiarity.polarity(), Polarity::RareLow);
        assert_eq!(Task::Complexity.polarity(), Polarity::RareHigh);
    }
}
