//! Batch measure computation over word lists, including the absent-word
//! rule, plus the TSV measure-table writer.
//!
//! Words absent from the counts table are a defined case, not an error:
//! every raw dispersion value is 0, every smoothed-log value is
//! `log(1/(n+1))` (the transform of 0), idf and vc take the corresponding
//! linear values, and frequency falls back to its Laplace floor.

use std::io::{self, Write};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::corpus::{CountsTable, PartitionLevel, WordRow};
use crate::fmt::format_significant;

use super::{
    carroll_d2, gini, gries_dp, idf, juilland_d, laplace_frequency, laplace_log_frequency,
    lyne_d3, range, rosengren_s, smoothed_log, variation_coefficient, DerivedVectors, MeasureId,
    MeasureKey, Transform,
};

/// Per-word values for a selected set of measure keys, in request order.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureProfile {
    pub word: String,
    pub level: String,
    pub values: Vec<(MeasureKey, f64)>,
}

impl MeasureProfile {
    pub fn value(&self, key: MeasureKey) -> Option<f64> {
        self.values
            .iter()
            .find(|(k, _)| *k == key)
            .map(|&(_, v)| v)
    }
}

fn raw_dispersion(d: &DerivedVectors, level: &PartitionLevel, id: MeasureId) -> f64 {
    match id {
        MeasureId::Range => range(d),
        MeasureId::Gini => gini(d),
        MeasureId::JuillandD => juilland_d(d),
        MeasureId::LyneD3 => lyne_d3(d, level),
        MeasureId::GriesDp => gries_dp(d, level),
        MeasureId::RosengrenS => rosengren_s(d),
        MeasureId::CarrollD2 => carroll_d2(d),
        MeasureId::Idf | MeasureId::Vc | MeasureId::Freq => {
            unreachable!("not a dispersion measure")
        }
    }
}

fn present_value(d: &DerivedVectors, row: &WordRow, level: &PartitionLevel, key: MeasureKey) -> f64 {
    let n = level.part_count();
    match key.id {
        MeasureId::Idf => idf(range(d), n),
        MeasureId::Vc => variation_coefficient(juilland_d(d), n),
        MeasureId::Freq => match key.transform {
            Transform::Raw => laplace_frequency(row.total(), level.total_tokens()),
            Transform::Log => laplace_log_frequency(row.total(), level.total_tokens()),
        },
        id => {
            let raw = raw_dispersion(d, level, id);
            match key.transform {
                Transform::Raw => raw,
                Transform::Log => smoothed_log(raw, n),
            }
        }
    }
}

/// Value assigned to a word with no occurrences at this level.
pub fn absent_value(key: MeasureKey, level: &PartitionLevel) -> f64 {
    let n = level.part_count();
    match key.id {
        MeasureId::Idf => idf(0.0, n),
        MeasureId::Vc => variation_coefficient(0.0, n),
        MeasureId::Freq => match key.transform {
            Transform::Raw => laplace_frequency(0, level.total_tokens()),
            Transform::Log => laplace_log_frequency(0, level.total_tokens()),
        },
        _ => match key.transform {
            Transform::Raw => 0.0,
            Transform::Log => smoothed_log(0.0, n),
        },
    }
}

fn profile_for(table: &CountsTable, word: &str, keys: &[MeasureKey]) -> MeasureProfile {
    let level = table.level();
    let values = match table.row(word) {
        Some(row) => {
            let d = DerivedVectors::new(row.entries(), level);
            keys.iter()
                .map(|&key| (key, present_value(&d, row, level, key)))
                .collect()
        }
        None => keys
            .iter()
            .map(|&key| (key, absent_value(key, level)))
            .collect(),
    };
    MeasureProfile {
        word: word.to_string(),
        level: level.name().to_string(),
        values,
    }
}

/// Computes one profile per requested word, in input order. Words are
/// independent, so the batch runs data-parallel when the `parallel`
/// feature is enabled; the output does not depend on scheduling.
pub fn compute_profiles<S: AsRef<str> + Sync>(
    table: &CountsTable,
    words: &[S],
    keys: &[MeasureKey],
) -> Vec<MeasureProfile> {
    assert!(!keys.is_empty(), "measure selection must not be empty");
    #[cfg(feature = "parallel")]
    {
        words
            .par_iter()
            .map(|w| profile_for(table, w.as_ref(), keys))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        compute_profiles_seq(table, words, keys)
    }
}

/// Sequential variant of [`compute_profiles`], independent of the
/// `parallel` feature. Produces identical output.
pub fn compute_profiles_seq<S: AsRef<str>>(
    table: &CountsTable,
    words: &[S],
    keys: &[MeasureKey],
) -> Vec<MeasureProfile> {
    assert!(!keys.is_empty(), "measure selection must not be empty");
    words
        .iter()
        .map(|w| profile_for(table, w.as_ref(), keys))
        .collect()
}

/// Writes profiles as TSV: header `word<TAB><measure[:log]>...`, values
/// with 6 significant digits.
pub fn write_measure_table<W: Write>(
    writer: &mut W,
    keys: &[MeasureKey],
    profiles: &[MeasureProfile],
) -> io::Result<()> {
    let mut header = String::from("word");
    for key in keys {
        header.push('\t');
        header.push_str(&key.to_string());
    }
    writeln!(writer, "{header}")?;
    for profile in profiles {
        let mut line = profile.word.clone();
        for &(_, value) in &profile.values {
            line.push('\t');
            line.push_str(&format_significant(value, 6));
        }
        writeln!(writer, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PartitionLevel;
    use approx::assert_abs_diff_eq;

    fn table_10_20_70() -> CountsTable {
        let level = PartitionLevel::new(
            "channel",
            vec!["x".into(), "y".into(), "z".into()],
            vec![10, 20, 70],
        )
        .unwrap();
        CountsTable::from_rows(
            level,
            vec![
                ("alpha".to_string(), vec![(0, 1), (1, 2), (2, 7)]),
                ("beta".to_string(), vec![(0, 5)]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn absent_word_raw_measures_are_zero() {
        let table = table_10_20_70();
        let keys: Vec<MeasureKey> = MeasureId::DISPERSION
            .into_iter()
            .map(MeasureKey::raw)
            .collect();
        let profile = &compute_profiles(&table, &["missing"], &keys)[0];
        for &(_, v) in &profile.values {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn absent_word_log_measures_hit_the_floor() {
        let table = table_10_20_70();
        let keys: Vec<MeasureKey> = MeasureId::DISPERSION
            .into_iter()
            .map(MeasureKey::log)
            .collect();
        let profile = &compute_profiles(&table, &["missing"], &keys)[0];
        let floor = (1.0f64 / 4.0).ln();
        for &(_, v) in &profile.values {
            assert_abs_diff_eq!(v, floor, epsilon = 1e-12);
        }
    }

    #[test]
    fn absent_word_idf_vc_freq() {
        let table = table_10_20_70();
        let keys = [
            MeasureKey::raw(MeasureId::Idf),
            MeasureKey::raw(MeasureId::Vc),
            MeasureKey::raw(MeasureId::Freq),
            MeasureKey::log(MeasureId::Freq),
        ];
        let profile = &compute_profiles(&table, &["missing"], &keys)[0];
        assert_abs_diff_eq!(profile.values[0].1, 4.0f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(profile.values[1].1, 2.0f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(profile.values[2].1, 1.0 / 101.0, epsilon = 1e-15);
        assert_abs_diff_eq!(profile.values[3].1, (1.0f64 / 101.0).ln(), epsilon = 1e-12);
    }

    #[test]
    fn proportional_word_raw_profile_is_all_ones() {
        let table = table_10_20_70();
        let keys: Vec<MeasureKey> = MeasureId::DISPERSION
            .into_iter()
            .map(MeasureKey::raw)
            .collect();
        let profile = &compute_profiles(&table, &["alpha"], &keys)[0];
        for &(_, v) in &profile.values {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn profiles_keep_input_order() {
        let table = table_10_20_70();
        let keys = [MeasureKey::raw(MeasureId::Range)];
        let words = ["beta", "missing", "alpha"];
        let profiles = compute_profiles(&table, &words, &keys);
        let got: Vec<&str> = profiles.iter().map(|p| p.word.as_str()).collect();
        assert_eq!(got, words);
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let table = table_10_20_70();
        let keys: Vec<MeasureKey> = MeasureId::ALL.into_iter().map(MeasureKey::raw).collect();
        let words = ["alpha", "beta", "missing"];
        assert_eq!(
            compute_profiles(&table, &words, &keys),
            compute_profiles_seq(&table, &words, &keys)
        );
    }

    #[test]
    fn measure_table_layout() {
        let table = table_10_20_70();
        let keys = [
            MeasureKey::raw(MeasureId::Range),
            MeasureKey::log(MeasureId::Range),
        ];
        let profiles = compute_profiles(&table, &["beta"], &keys);
        let mut out = Vec::new();
        write_measure_table(&mut out, &keys, &profiles).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "word\trange\trange:log");
        let row = lines.next().unwrap();
        assert!(row.starts_with("beta\t0.333333\t"), "{row}");
    }
}
