//! Corpus ingestion and per-level sparse count tables.
//!
//! A corpus is a set of documents, each assigned to exactly one part per
//! partition level (e.g. `video` -> `channel` -> `category`, finest first).
//! Ingestion tokenizes documents on whitespace, accumulates per-part word
//! counts, and yields one [`CountsTable`] per declared level. Tables can be
//! persisted to a line-oriented text artifact and reloaded losslessly.

mod format;

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("manifest: {0}")]
    Validation(String),
    #[error("document '{doc_id}': cannot read {path}: {source}")]
    DocumentRead {
        doc_id: String,
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{origin}:{line}: {msg}")]
    Parse {
        origin: String,
        line: usize,
        msg: String,
    },
    #[error("level '{level}': {msg}")]
    InvalidLevel { level: String, msg: String },
    #[error("counts table: {0}")]
    InvalidCounts(String),
    #[error("aggregation: {0}")]
    Aggregation(String),
}

/// One document entry of a [`PartitionManifest`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub doc_id: String,
    /// Content path, resolved against the manifest location when parsed
    /// from disk.
    pub path: PathBuf,
    /// Part key per level, aligned with `PartitionManifest::levels`.
    pub level_keys: Vec<String>,
}

/// Declares the corpus documents and their part membership per level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionManifest {
    /// Level names, finest first.
    pub levels: Vec<String>,
    pub entries: Vec<ManifestEntry>,
}

impl PartitionManifest {
    /// Parses the TSV form (`doc_id<TAB>path<TAB><level1><TAB>...`).
    ///
    /// Relative content paths are resolved against the manifest's directory.
    pub fn from_tsv_path(path: &Path) -> Result<Self, CorpusError> {
        let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        Self::from_tsv(&text, &path.display().to_string(), base)
    }

    /// Parses manifest TSV text. `origin` labels parse errors; `base`
    /// resolves relative content paths.
    pub fn from_tsv(text: &str, origin: &str, base: &Path) -> Result<Self, CorpusError> {
        let parse_err = |line: usize, msg: String| CorpusError::Parse {
            origin: origin.to_string(),
            line,
            msg,
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty manifest".to_string()))?;
        let columns: Vec<&str> = header.split('\t').collect();
        if columns.len() < 3 || columns[0] != "doc_id" || columns[1] != "path" {
            return Err(parse_err(
                1,
                "header must be 'doc_id<TAB>path<TAB><level>...' with at least one level"
                    .to_string(),
            ));
        }
        let levels: Vec<String> = columns[2..].iter().map(|s| s.to_string()).collect();
        let mut entries = Vec::new();
        for (idx, line) in lines {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != columns.len() {
                return Err(parse_err(
                    idx + 1,
                    format!(
                        "expected {} fields, found {} (missing level key?)",
                        columns.len(),
                        fields.len()
                    ),
                ));
            }
            entries.push(ManifestEntry {
                doc_id: fields[0].to_string(),
                path: base.join(fields[1]),
                level_keys: fields[2..].iter().map(|s| s.to_string()).collect(),
            });
        }
        let manifest = PartitionManifest { levels, entries };
        manifest.validate()?;
        Ok(manifest)
    }

    /// Checks structural invariants: non-empty, unique document ids, a key
    /// for every level, and at least two distinct parts per level.
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.levels.is_empty() {
            return Err(CorpusError::Validation("no levels declared".to_string()));
        }
        if self.entries.is_empty() {
            return Err(CorpusError::Validation("no documents".to_string()));
        }
        let mut seen_levels = HashMap::new();
        for name in &self.levels {
            if name.is_empty() || name.chars().any(char::is_whitespace) {
                return Err(CorpusError::Validation(format!(
                    "level name '{name}' must be non-empty and contain no whitespace"
                )));
            }
            if seen_levels.insert(name, ()).is_some() {
                return Err(CorpusError::Validation(format!(
                    "duplicate level name '{name}'"
                )));
            }
        }
        let mut seen_docs = HashMap::new();
        for entry in &self.entries {
            if seen_docs.insert(&entry.doc_id, ()).is_some() {
                return Err(CorpusError::Validation(format!(
                    "duplicate document id '{}'",
                    entry.doc_id
                )));
            }
            if entry.level_keys.len() != self.levels.len() {
                return Err(CorpusError::Validation(format!(
                    "document '{}' has {} level keys, expected {}",
                    entry.doc_id,
                    entry.level_keys.len(),
                    self.levels.len()
                )));
            }
            for (level, key) in self.levels.iter().zip(&entry.level_keys) {
                if key.is_empty() || key.contains('\t') || key.contains('\n') {
                    return Err(CorpusError::Validation(format!(
                        "document '{}': invalid part key for level '{level}'",
                        entry.doc_id
                    )));
                }
            }
        }
        for (i, level) in self.levels.iter().enumerate() {
            let distinct: HashMap<&str, ()> = self
                .entries
                .iter()
                .map(|e| (e.level_keys[i].as_str(), ()))
                .collect();
            if distinct.len() < 2 {
                return Err(CorpusError::Validation(format!(
                    "level '{level}' has {} part(s); at least 2 required",
                    distinct.len()
                )));
            }
        }
        Ok(())
    }

    /// Derives the part-key mapping from a finer level onto a coarser one,
    /// checking that every fine part maps to a single coarse part.
    pub fn level_mapping(
        &self,
        fine: &str,
        coarse: &str,
    ) -> Result<BTreeMap<String, String>, CorpusError> {
        let fi = self.level_index(fine)?;
        let ci = self.level_index(coarse)?;
        let mut mapping = BTreeMap::new();
        for entry in &self.entries {
            let from = &entry.level_keys[fi];
            let to = &entry.level_keys[ci];
            match mapping.get(from) {
                None => {
                    mapping.insert(from.clone(), to.clone());
                }
                Some(prev) if prev == to => {}
                Some(prev) => {
                    return Err(CorpusError::Aggregation(format!(
                        "fine part '{from}' maps to both '{prev}' and '{to}'"
                    )));
                }
            }
        }
        Ok(mapping)
    }

    fn level_index(&self, name: &str) -> Result<usize, CorpusError> {
        self.levels
            .iter()
            .position(|l| l == name)
            .ok_or_else(|| CorpusError::Validation(format!("unknown level '{name}'")))
    }
}

/// One partition granularity: part identities and token mass.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionLevel {
    name: String,
    /// Sorted, unique part keys; the part index used everywhere is the
    /// position in this list.
    part_keys: Vec<String>,
    /// Tokens per part.
    token_counts: Vec<u64>,
    /// Total tokens across parts.
    total_tokens: u64,
    /// Part proportions (token share per part, sums to 1).
    proportions: Vec<f64>,
    /// Cached sum of squared proportions, used by measure kernels to fold
    /// in parts where a word does not occur.
    proportion_sq_sum: f64,
}

impl PartitionLevel {
    pub fn new(
        name: impl Into<String>,
        part_keys: Vec<String>,
        token_counts: Vec<u64>,
    ) -> Result<Self, CorpusError> {
        let name = name.into();
        let invalid = |msg: String| CorpusError::InvalidLevel {
            level: name.clone(),
            msg,
        };
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(CorpusError::InvalidLevel {
                level: name.clone(),
                msg: "name must be non-empty and contain no whitespace".to_string(),
            });
        }
        if part_keys.len() < 2 {
            return Err(invalid(format!(
                "{} part(s); at least 2 required",
                part_keys.len()
            )));
        }
        if part_keys.len() != token_counts.len() {
            return Err(invalid("part keys and token counts differ in length".to_string()));
        }
        for pair in part_keys.windows(2) {
            if pair[0] >= pair[1] {
                return Err(invalid(format!(
                    "part keys must be sorted and unique ('{}' >= '{}')",
                    pair[0], pair[1]
                )));
            }
        }
        for key in &part_keys {
            if key.is_empty() || key.contains('\t') || key.contains('\n') {
                return Err(invalid(format!("invalid part key '{key}'")));
            }
        }
        let total_tokens: u64 = token_counts.iter().sum();
        if total_tokens == 0 {
            return Err(invalid("no tokens in any part".to_string()));
        }
        let proportions: Vec<f64> = token_counts
            .iter()
            .map(|&k| k as f64 / total_tokens as f64)
            .collect();
        let proportion_sq_sum = proportions.iter().map(|s| s * s).sum();
        Ok(PartitionLevel {
            name,
            part_keys,
            token_counts,
            total_tokens,
            proportions,
            proportion_sq_sum,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of parts.
    pub fn part_count(&self) -> usize {
        self.part_keys.len()
    }

    pub fn part_keys(&self) -> &[String] {
        &self.part_keys
    }

    pub fn token_counts(&self) -> &[u64] {
        &self.token_counts
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn proportions(&self) -> &[f64] {
        &self.proportions
    }

    pub fn proportion(&self, part: usize) -> f64 {
        self.proportions[part]
    }

    pub fn proportion_sq_sum(&self) -> f64 {
        self.proportion_sq_sum
    }

    /// Part keys with zero tokens (legal, but they dilute dispersion).
    pub fn empty_parts(&self) -> impl Iterator<Item = &str> {
        self.part_keys
            .iter()
            .zip(&self.token_counts)
            .filter(|(_, &k)| k == 0)
            .map(|(key, _)| key.as_str())
    }
}

/// Sparse per-part occurrence counts for one word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordRow {
    word: String,
    /// `(part index, count)` pairs, ascending part index, counts >= 1.
    entries: Vec<(u32, u64)>,
    /// Total occurrences across parts.
    total: u64,
}

impl WordRow {
    pub fn word(&self) -> &str {
        &self.word
    }

    pub fn entries(&self) -> &[(u32, u64)] {
        &self.entries
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

/// Sparse word-by-part counts for one partition level.
///
/// Vocabulary is kept sorted by code point so persisted tables are
/// byte-reproducible regardless of how the counts were accumulated.
#[derive(Debug, Clone, PartialEq)]
pub struct CountsTable {
    level: PartitionLevel,
    rows: Vec<WordRow>,
}

impl CountsTable {
    /// Builds a table from raw rows, sorting the vocabulary and validating
    /// each sparse row against the level.
    pub fn from_rows(
        level: PartitionLevel,
        rows: Vec<(String, Vec<(u32, u64)>)>,
    ) -> Result<Self, CorpusError> {
        let mut built = Vec::with_capacity(rows.len());
        for (word, entries) in rows {
            if word.is_empty() || word.chars().any(char::is_whitespace) {
                return Err(CorpusError::InvalidCounts(format!(
                    "invalid word '{word}'"
                )));
            }
            if entries.is_empty() {
                return Err(CorpusError::InvalidCounts(format!(
                    "word '{word}' has an empty sparse row"
                )));
            }
            let mut total = 0u64;
            let mut prev: Option<u32> = None;
            for &(part, count) in &entries {
                if (part as usize) >= level.part_count() {
                    return Err(CorpusError::InvalidCounts(format!(
                        "word '{word}': part index {part} out of range (n = {})",
                        level.part_count()
                    )));
                }
                if count == 0 {
                    return Err(CorpusError::InvalidCounts(format!(
                        "word '{word}': zero count at part {part}"
                    )));
                }
                if count > level.token_counts()[part as usize] {
                    return Err(CorpusError::InvalidCounts(format!(
                        "word '{word}': count {count} exceeds the {} tokens of part '{}'",
                        level.token_counts()[part as usize],
                        level.part_keys()[part as usize]
                    )));
                }
                if let Some(p) = prev {
                    if part <= p {
                        return Err(CorpusError::InvalidCounts(format!(
                            "word '{word}': part indices must be strictly increasing"
                        )));
                    }
                }
                prev = Some(part);
                total += count;
            }
            built.push(WordRow {
                word,
                entries,
                total,
            });
        }
        built.sort_by(|a, b| a.word.cmp(&b.word));
        for pair in built.windows(2) {
            if pair[0].word == pair[1].word {
                return Err(CorpusError::InvalidCounts(format!(
                    "duplicate word '{}'",
                    pair[0].word
                )));
            }
        }
        Ok(CountsTable { level, rows: built })
    }

    pub fn level(&self) -> &PartitionLevel {
        &self.level
    }

    pub fn rows(&self) -> &[WordRow] {
        &self.rows
    }

    /// Looks a word up by binary search over the sorted vocabulary.
    pub fn row(&self, word: &str) -> Option<&WordRow> {
        self.rows
            .binary_search_by(|r| r.word.as_str().cmp(word))
            .ok()
            .map(|i| &self.rows[i])
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.rows.iter().map(|r| r.word.as_str())
    }

    pub fn word_count(&self) -> usize {
        self.rows.len()
    }

    /// Sum of per-word totals; at most the level's token total, equal when
    /// every token was counted.
    pub fn counted_tokens(&self) -> u64 {
        self.rows.iter().map(|r| r.total).sum()
    }
}

/// Tokenizer configuration for [`ingest`].
#[derive(Debug, Clone, Copy)]
pub struct IngestOptions {
    /// Lowercase tokens before counting (default on).
    pub lowercase: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions { lowercase: true }
    }
}

/// Per-document token counts, ready for [`build_counts`].
#[derive(Debug, Clone)]
pub struct DocCounts {
    pub doc_id: String,
    /// Part key per level, aligned with the level-name list handed to
    /// [`build_counts`].
    pub level_keys: Vec<String>,
    pub counts: Vec<(String, u64)>,
}

impl DocCounts {
    pub fn tokens(&self) -> u64 {
        self.counts.iter().map(|(_, c)| c).sum()
    }
}

/// Result of building count tables: one table per level plus warnings
/// (currently only zero-token parts).
#[derive(Debug)]
pub struct IngestOutcome {
    pub tables: Vec<CountsTable>,
    pub warnings: Vec<String>,
}

/// Splits whitespace-delimited text into token counts.
pub fn count_tokens(text: &str, lowercase: bool) -> Vec<(String, u64)> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    for token in text.split_whitespace() {
        let token = if lowercase {
            token.to_lowercase()
        } else {
            token.to_string()
        };
        *counts.entry(token).or_insert(0) += 1;
    }
    counts.into_iter().collect()
}

/// Reads and tokenizes every manifest document, then builds one counts
/// table per level. Documents are processed concurrently when the
/// `parallel` feature is enabled; the result does not depend on scheduling.
pub fn ingest(
    manifest: &PartitionManifest,
    options: &IngestOptions,
) -> Result<IngestOutcome, CorpusError> {
    manifest.validate()?;
    let read_one = |entry: &ManifestEntry| -> Result<DocCounts, CorpusError> {
        let text = fs::read_to_string(&entry.path).map_err(|source| CorpusError::DocumentRead {
            doc_id: entry.doc_id.clone(),
            path: entry.path.clone(),
            source,
        })?;
        Ok(DocCounts {
            doc_id: entry.doc_id.clone(),
            level_keys: entry.level_keys.clone(),
            counts: count_tokens(&text, options.lowercase),
        })
    };
    #[cfg(feature = "parallel")]
    let docs: Vec<DocCounts> = manifest
        .entries
        .par_iter()
        .map(read_one)
        .collect::<Result<_, _>>()?;
    #[cfg(not(feature = "parallel"))]
    let docs: Vec<DocCounts> = manifest
        .entries
        .iter()
        .map(read_one)
        .collect::<Result<_, _>>()?;
    build_counts(&manifest.levels, &docs)
}

/// Builds one [`CountsTable`] per level from per-document counts.
///
/// Accumulation is purely additive and the final tables sort their parts
/// and vocabulary, so the outcome is independent of document order.
pub fn build_counts(
    levels: &[String],
    docs: &[DocCounts],
) -> Result<IngestOutcome, CorpusError> {
    if levels.is_empty() {
        return Err(CorpusError::Validation("no levels declared".to_string()));
    }
    if docs.is_empty() {
        return Err(CorpusError::Validation("no documents".to_string()));
    }
    for doc in docs {
        if doc.level_keys.len() != levels.len() {
            return Err(CorpusError::Validation(format!(
                "document '{}' has {} level keys, expected {}",
                doc.doc_id,
                doc.level_keys.len(),
                levels.len()
            )));
        }
    }
    let mut tables = Vec::with_capacity(levels.len());
    let mut warnings = Vec::new();
    for (li, level_name) in levels.iter().enumerate() {
        let mut keys: Vec<&str> = docs.iter().map(|d| d.level_keys[li].as_str()).collect();
        keys.sort_unstable();
        keys.dedup();
        let index: HashMap<&str, u32> = keys
            .iter()
            .enumerate()
            .map(|(i, &k)| (k, i as u32))
            .collect();
        let mut token_counts = vec![0u64; keys.len()];
        let mut word_parts: BTreeMap<&str, BTreeMap<u32, u64>> = BTreeMap::new();
        for doc in docs {
            let part = index[doc.level_keys[li].as_str()];
            token_counts[part as usize] += doc.tokens();
            for (word, count) in &doc.counts {
                *word_parts
                    .entry(word.as_str())
                    .or_default()
                    .entry(part)
                    .or_insert(0) += count;
            }
        }
        let level = PartitionLevel::new(
            level_name.clone(),
            keys.into_iter().map(String::from).collect(),
            token_counts,
        )?;
        for part in level.empty_parts() {
            warnings.push(format!(
                "level '{level_name}': part '{part}' has zero tokens"
            ));
        }
        let rows: Vec<(String, Vec<(u32, u64)>)> = word_parts
            .into_iter()
            .map(|(word, parts)| (word.to_string(), parts.into_iter().collect()))
            .collect();
        tables.push(CountsTable::from_rows(level, rows)?);
    }
    Ok(IngestOutcome { tables, warnings })
}

/// Merges a fine-grained table into coarser parts.
///
/// `mapping` must cover every fine part key. Per-word totals are unchanged;
/// coarse token counts are the sums of the mapped fine parts.
pub fn aggregate(
    fine: &CountsTable,
    mapping: &BTreeMap<String, String>,
    coarse_level_name: &str,
) -> Result<CountsTable, CorpusError> {
    let fine_level = fine.level();
    let mut coarse_keys: Vec<&str> = Vec::with_capacity(mapping.len());
    let mut fine_to_coarse_key: Vec<&str> = Vec::with_capacity(fine_level.part_count());
    for key in fine_level.part_keys() {
        let target = mapping.get(key).ok_or_else(|| {
            CorpusError::Aggregation(format!("fine part '{key}' is not mapped"))
        })?;
        fine_to_coarse_key.push(target.as_str());
        coarse_keys.push(target.as_str());
    }
    coarse_keys.sort_unstable();
    coarse_keys.dedup();
    let coarse_index: HashMap<&str, u32> = coarse_keys
        .iter()
        .enumerate()
        .map(|(i, &k)| (k, i as u32))
        .collect();
    let fine_to_coarse: Vec<u32> = fine_to_coarse_key
        .iter()
        .map(|k| coarse_index[k])
        .collect();

    let mut token_counts = vec![0u64; coarse_keys.len()];
    for (i, &k) in fine_level.token_counts().iter().enumerate() {
        token_counts[fine_to_coarse[i] as usize] += k;
    }
    let level = PartitionLevel::new(
        coarse_level_name,
        coarse_keys.into_iter().map(String::from).collect(),
        token_counts,
    )?;

    let rows: Vec<(String, Vec<(u32, u64)>)> = fine
        .rows()
        .iter()
        .map(|row| {
            let mut merged: BTreeMap<u32, u64> = BTreeMap::new();
            for &(part, count) in row.entries() {
                *merged.entry(fine_to_coarse[part as usize]).or_insert(0) += count;
            }
            (row.word().to_string(), merged.into_iter().collect())
        })
        .collect();
    CountsTable::from_rows(level, rows)
}
