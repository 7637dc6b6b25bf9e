//! Dispersion measure kernels over sparse per-part occurrence vectors.
//!
//! All kernels consume only the parts where a word occurs; parts without
//! occurrences enter each formula analytically (a sorted-rank offset for the
//! Gini index, the level's cached proportion sums for the deviation-based
//! measures), so cost scales with the number of occupied parts, not with
//! the part count.
//!
//! Raw dispersion values lie in `[0, 1]`, high = evenly spread. A word that
//! occurs in every part with constant per-part relative frequency scores 1
//! on every measure.

mod profile;

pub use profile::{
    compute_profiles, compute_profiles_seq, write_measure_table, MeasureProfile,
};

use std::fmt;

use thiserror::Error;

use crate::corpus::PartitionLevel;

/// The supported measures: seven dispersion measures, two derived linear
/// companions (idf, vc), and smoothed frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MeasureId {
    /// Share of parts containing the word.
    Range,
    /// One minus the mean absolute difference of normalized relative
    /// frequencies, halved.
    Gini,
    /// One minus the coefficient of variation of per-part relative
    /// frequency, scaled by `1/sqrt(n-1)`.
    JuillandD,
    /// One minus a quarter of the squared distance between the word's
    /// occurrence shares and the part proportions.
    LyneD3,
    /// One minus half the L1 distance between occurrence shares and part
    /// proportions.
    GriesDp,
    /// Squared sum of square-rooted normalized relative frequencies over n.
    RosengrenS,
    /// Normalized entropy of the normalized relative frequencies.
    CarrollD2,
    /// Inverse document frequency, `-smoothed_log(range)`.
    Idf,
    /// Variation coefficient, `sqrt(n-1) * (1 - juilland_d)`.
    Vc,
    /// Laplace-smoothed corpus frequency `(total + 1) / (K + 1)`.
    Freq,
}

impl MeasureId {
    pub const ALL: [MeasureId; 10] = [
        MeasureId::Range,
        MeasureId::Gini,
        MeasureId::JuillandD,
        MeasureId::LyneD3,
        MeasureId::GriesDp,
        MeasureId::RosengrenS,
        MeasureId::CarrollD2,
        MeasureId::Idf,
        MeasureId::Vc,
        MeasureId::Freq,
    ];

    /// The seven dispersion measures proper (excludes idf, vc, freq).
    pub const DISPERSION: [MeasureId; 7] = [
        MeasureId::Range,
        MeasureId::Gini,
        MeasureId::JuillandD,
        MeasureId::LyneD3,
        MeasureId::GriesDp,
        MeasureId::RosengrenS,
        MeasureId::CarrollD2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasureId::Range => "range",
            MeasureId::Gini => "gini",
            MeasureId::JuillandD => "juilland_d",
            MeasureId::LyneD3 => "lyne_d3",
            MeasureId::GriesDp => "gries_dp",
            MeasureId::RosengrenS => "rosengren_s",
            MeasureId::CarrollD2 => "carroll_d2",
            MeasureId::Idf => "idf",
            MeasureId::Vc => "vc",
            MeasureId::Freq => "freq",
        }
    }

    /// Whether the smoothed-log transform applies. `idf` and `vc` are
    /// already logarithmic / unbounded and take no further transform.
    pub fn supports_log(self) -> bool {
        !matches!(self, MeasureId::Idf | MeasureId::Vc)
    }

    pub fn parse(name: &str) -> Result<Self, MeasureParseError> {
        MeasureId::ALL
            .into_iter()
            .find(|id| id.name() == name)
            .ok_or_else(|| MeasureParseError::UnknownMeasure(name.to_string()))
    }
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Value transform: raw, or the log transform (smoothed log for dispersion
/// measures, Laplace log for frequency).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Transform {
    Raw,
    Log,
}

/// A measure plus transform, e.g. `range:log`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MeasureKey {
    pub id: MeasureId,
    pub transform: Transform,
}

impl MeasureKey {
    pub fn raw(id: MeasureId) -> Self {
        MeasureKey {
            id,
            transform: Transform::Raw,
        }
    }

    pub fn log(id: MeasureId) -> Self {
        MeasureKey {
            id,
            transform: Transform::Log,
        }
    }

    /// Parses `name` or `name:log`.
    pub fn parse(text: &str) -> Result<Self, MeasureParseError> {
        let (name, transform) = match text.split_once(':') {
            None => (text, Transform::Raw),
            Some((name, "log")) => (name, Transform::Log),
            Some((_, other)) => {
                return Err(MeasureParseError::UnknownTransform(other.to_string()))
            }
        };
        let id = MeasureId::parse(name)?;
        if transform == Transform::Log && !id.supports_log() {
            return Err(MeasureParseError::AlreadyLogarithmic(id));
        }
        Ok(MeasureKey { id, transform })
    }
}

impl fmt::Display for MeasureKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.transform {
            Transform::Raw => write!(f, "{}", self.id),
            Transform::Log => write!(f, "{}:log", self.id),
        }
    }
}

#[derive(Debug, Error)]
pub enum MeasureParseError {
    #[error("unknown measure '{0}' (valid: range, gini, juilland_d, lyne_d3, gries_dp, rosengren_s, carroll_d2, idf, vc, freq)")]
    UnknownMeasure(String),
    #[error("unknown transform '{0}' (valid: log)")]
    UnknownTransform(String),
    #[error("measure '{0}' is already logarithmic; ':log' does not apply")]
    AlreadyLogarithmic(MeasureId),
}

/// Per-part derived quantities for one word, occupied parts only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedEntry {
    pub part: u32,
    /// Occurrences in this part.
    pub count: u64,
    /// Share of the word's occurrences in this part (sums to 1).
    pub occ_share: f64,
    /// Occurrences over the part's tokens.
    pub rel_freq: f64,
    /// Relative frequency normalized per word (sums to 1).
    pub norm_freq: f64,
}

/// Sparse derived vectors for one word against one level.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedVectors {
    parts: usize,
    total: u64,
    rel_freq_sum: f64,
    entries: Vec<DerivedEntry>,
}

impl DerivedVectors {
    /// Builds the derived vectors from a sparse count row. The row must be
    /// non-empty with in-range part indices (guaranteed for rows taken from
    /// a validated counts table).
    pub fn new(counts: &[(u32, u64)], level: &PartitionLevel) -> Self {
        assert!(!counts.is_empty(), "word has no occurrences");
        let total: u64 = counts.iter().map(|&(_, c)| c).sum();
        let mut rel_freq_sum = 0.0;
        let mut entries: Vec<DerivedEntry> = counts
            .iter()
            .map(|&(part, count)| {
                let rel_freq = count as f64 / level.token_counts()[part as usize] as f64;
                rel_freq_sum += rel_freq;
                DerivedEntry {
                    part,
                    count,
                    occ_share: count as f64 / total as f64,
                    rel_freq,
                    norm_freq: 0.0,
                }
            })
            .collect();
        for entry in &mut entries {
            entry.norm_freq = entry.rel_freq / rel_freq_sum;
        }
        DerivedVectors {
            parts: level.part_count(),
            total,
            rel_freq_sum,
            entries,
        }
    }

    pub fn part_count(&self) -> usize {
        self.parts
    }

    /// Total occurrences of the word.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn rel_freq_sum(&self) -> f64 {
        self.rel_freq_sum
    }

    pub fn entries(&self) -> &[DerivedEntry] {
        &self.entries
    }

    /// Number of parts the word occurs in.
    pub fn occupied_parts(&self) -> usize {
        self.entries.len()
    }
}

/// Share of parts containing the word, in `[1/n, 1]`.
pub fn range(d: &DerivedVectors) -> f64 {
    d.occupied_parts() as f64 / d.part_count() as f64
}

/// One minus the normalized mean absolute difference of the per-word
/// normalized relative frequencies, in `[1/n, 1]`.
///
/// Uses the sorted-rank identity: for ascending values x(1..=n),
/// `sum_ij |x_i - x_j| = 2 * sum_i (2i - n - 1) * x(i)`. The implicit zeros
/// occupy the lowest ranks and contribute nothing, so only the occupied
/// parts are sorted: `O(m log m)` for m occupied parts.
pub fn gini(d: &DerivedVectors) -> f64 {
    let n = d.part_count() as f64;
    let mut values: Vec<f64> = d.entries().iter().map(|e| e.norm_freq).collect();
    values.sort_unstable_by(f64::total_cmp);
    let zero_ranks = d.part_count() - values.len();
    let mut pair_sum = 0.0;
    for (offset, value) in values.iter().enumerate() {
        let rank = (zero_ranks + offset + 1) as f64;
        pair_sum += (2.0 * rank - n - 1.0) * value;
    }
    // pair_sum is half the double sum; G = 1 - double_sum / (2n)
    (1.0 - pair_sum / n).clamp(0.0, 1.0)
}

/// One minus the coefficient of variation of per-part relative frequency
/// over all n parts (zeros included), scaled by `1/sqrt(n-1)`; in `[0, 1]`.
pub fn juilland_d(d: &DerivedVectors) -> f64 {
    let n = d.part_count() as f64;
    let sum = d.rel_freq_sum();
    let sum_sq: f64 = d.entries().iter().map(|e| e.rel_freq * e.rel_freq).sum();
    let mean = sum / n;
    let variance = (sum_sq / n - mean * mean).max(0.0);
    let cv = variance.sqrt() / mean;
    (1.0 - cv / (n - 1.0).sqrt()).clamp(0.0, 1.0)
}

/// One minus a quarter of the squared Euclidean distance between the
/// occurrence shares and the part proportions; in `[0.5, 1]`.
pub fn lyne_d3(d: &DerivedVectors, level: &PartitionLevel) -> f64 {
    // Parts without occurrences contribute s_i^2; start from the cached
    // total and swap in the occupied parts' actual terms.
    let mut sq_dist = level.proportion_sq_sum();
    for e in d.entries() {
        let s = level.proportion(e.part as usize);
        sq_dist += (e.occ_share - s) * (e.occ_share - s) - s * s;
    }
    (1.0 - sq_dist / 4.0).clamp(0.0, 1.0)
}

/// One minus half the L1 distance between the occurrence shares and the
/// part proportions; in `[0, 1]`.
pub fn gries_dp(d: &DerivedVectors, level: &PartitionLevel) -> f64 {
    let mut abs_dist = 0.0;
    let mut covered = 0.0;
    for e in d.entries() {
        let s = level.proportion(e.part as usize);
        abs_dist += (e.occ_share - s).abs();
        covered += s;
    }
    // parts without occurrences contribute |0 - s_i| = s_i
    abs_dist += (1.0 - covered).max(0.0);
    (1.0 - abs_dist / 2.0).clamp(0.0, 1.0)
}

/// Squared sum of square-rooted normalized relative frequencies over n;
/// in `[1/n, 1]`.
pub fn rosengren_s(d: &DerivedVectors) -> f64 {
    let root_sum: f64 = d.entries().iter().map(|e| e.norm_freq.sqrt()).sum();
    (root_sum * root_sum / d.part_count() as f64).clamp(0.0, 1.0)
}

/// Entropy of the normalized relative frequencies over `log n`, with the
/// `0 log 0 = 0` convention; in `[0, 1]`. The log base cancels.
pub fn carroll_d2(d: &DerivedVectors) -> f64 {
    let entropy: f64 = d
        .entries()
        .iter()
        .map(|e| -e.norm_freq * e.norm_freq.ln())
        .sum();
    (entropy / (d.part_count() as f64).ln()).clamp(0.0, 1.0)
}

/// Log of `(d*n + 1) / (n + 1)`: a smoothed log transform that keeps
/// `d = 0` finite. Strictly increasing in `d`; 0 at `d = 1`.
pub fn smoothed_log(value: f64, parts: usize) -> f64 {
    let n = parts as f64;
    ((value * n + 1.0) / (n + 1.0)).ln()
}

/// Inverse document frequency through the smoothed log, so words absent
/// from the corpus (range 0) still get a finite value.
pub fn idf(range_value: f64, parts: usize) -> f64 {
    -smoothed_log(range_value, parts)
}

/// Plain `-log(range)`; only finite for words present in the corpus.
pub fn idf_unsmoothed(range_value: f64) -> f64 {
    -range_value.ln()
}

/// Variation coefficient of per-part relative frequency, recovered from
/// the Juilland value as `sqrt(n-1) * (1 - d)`.
pub fn variation_coefficient(juilland: f64, parts: usize) -> f64 {
    ((parts - 1) as f64).sqrt() * (1.0 - juilland)
}

/// Laplace-smoothed corpus frequency `(total + 1) / (K + 1)`, finite for
/// absent words.
pub fn laplace_frequency(total: u64, corpus_tokens: u64) -> f64 {
    (total + 1) as f64 / (corpus_tokens + 1) as f64
}

/// Log of the Laplace-smoothed corpus frequency.
pub fn laplace_log_frequency(total: u64, corpus_tokens: u64) -> f64 {
    laplace_frequency(total, corpus_tokens).ln()
}
