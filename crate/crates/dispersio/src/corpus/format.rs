//! Persistence of [`CountsTable`] as a line-oriented UTF-8 text artifact.
//!
//! ```text
//! #dispersio-counts v1 level=<name> n=<parts> K=<tokens>
//! <part key><TAB><part key>...
//! <tokens><TAB><tokens>...
//! <word><TAB>i1:v1,i2:v2,...
//! ```
//!
//! Part indices within a word line are ascending and refer to positions in
//! the part-key line. All numbers are plain decimal. Words are written in
//! vocabulary (code point) order, so saving is reproducible byte for byte.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{CorpusError, CountsTable, PartitionLevel};

const MAGIC: &str = "#dispersio-counts";
const VERSION: &str = "v1";

impl CountsTable {
    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        let file = File::create(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut writer = BufWriter::new(file);
        self.write_to(&mut writer)
            .and_then(|()| writer.flush())
            .map_err(|source| CorpusError::Io {
                path: path.to_path_buf(),
                source,
            })
    }

    pub fn write_to<W: Write>(&self, writer: &mut W) -> io::Result<()> {
        let level = self.level();
        writeln!(
            writer,
            "{MAGIC} {VERSION} level={} n={} K={}",
            level.name(),
            level.part_count(),
            level.total_tokens()
        )?;
        writeln!(writer, "{}", level.part_keys().join("\t"))?;
        let counts: Vec<String> = level
            .token_counts()
            .iter()
            .map(u64::to_string)
            .collect();
        writeln!(writer, "{}", counts.join("\t"))?;
        for row in self.rows() {
            let entries: Vec<String> = row
                .entries()
                .iter()
                .map(|(part, count)| format!("{part}:{count}"))
                .collect();
            writeln!(writer, "{}\t{}", row.word(), entries.join(","))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let file = File::open(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_from(BufReader::new(file), &path.display().to_string())
    }

    /// Parses the artifact; `origin` labels parse errors.
    pub fn read_from<R: Read>(reader: R, origin: &str) -> Result<Self, CorpusError> {
        let parse_err = |line: usize, msg: String| CorpusError::Parse {
            origin: origin.to_string(),
            line,
            msg,
        };
        let mut lines = BufReader::new(reader).lines().enumerate();
        let mut next_line = |expect: &str| match lines.next() {
            Some((idx, Ok(line))) => Ok((idx + 1, line)),
            Some((idx, Err(e))) => Err(parse_err(idx + 1, e.to_string())),
            None => Err(CorpusError::Parse {
                origin: origin.to_string(),
                line: 0,
                msg: format!("unexpected end of file, expected {expect}"),
            }),
        };

        let (line_no, header) = next_line("header")?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 || fields[0] != MAGIC || fields[1] != VERSION {
            return Err(parse_err(
                line_no,
                format!("expected '{MAGIC} {VERSION} level=<name> n=<n> K=<K>'"),
            ));
        }
        let field = |prefix: &str, value: &str| -> Result<String, CorpusError> {
            value
                .strip_prefix(prefix)
                .map(str::to_string)
                .ok_or_else(|| parse_err(line_no, format!("expected '{prefix}<value>'")))
        };
        let level_name = field("level=", fields[2])?;
        let n: usize = field("n=", fields[3])?
            .parse()
            .map_err(|e| parse_err(line_no, format!("invalid part count: {e}")))?;
        let total: u64 = field("K=", fields[4])?
            .parse()
            .map_err(|e| parse_err(line_no, format!("invalid token total: {e}")))?;

        let (line_no, keys_line) = next_line("part keys")?;
        let part_keys: Vec<String> = keys_line.split('\t').map(str::to_string).collect();
        if part_keys.len() != n {
            return Err(parse_err(
                line_no,
                format!("expected {n} part keys, found {}", part_keys.len()),
            ));
        }

        let (line_no, counts_line) = next_line("token counts")?;
        let token_counts: Vec<u64> = counts_line
            .split('\t')
            .map(|field| {
                field
                    .parse::<u64>()
                    .map_err(|e| parse_err(line_no, format!("invalid token count '{field}': {e}")))
            })
            .collect::<Result<_, _>>()?;
        if token_counts.len() != n {
            return Err(parse_err(
                line_no,
                format!("expected {n} token counts, found {}", token_counts.len()),
            ));
        }
        if token_counts.iter().sum::<u64>() != total {
            return Err(parse_err(
                line_no,
                format!("token counts sum to {} but header says K={total}",
                    token_counts.iter().sum::<u64>()),
            ));
        }
        let level = PartitionLevel::new(level_name, part_keys, token_counts)?;

        let mut rows: Vec<(String, Vec<(u32, u64)>)> = Vec::new();
        for (idx, line) in lines {
            let line = line.map_err(|e| parse_err(idx + 1, e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            let line_no = idx + 1;
            let (word, entries_field) = line.split_once('\t').ok_or_else(|| {
                parse_err(line_no, "expected '<word><TAB>i:v,...'".to_string())
            })?;
            let mut entries = Vec::new();
            for piece in entries_field.split(',') {
                let (part, count) = piece.split_once(':').ok_or_else(|| {
                    parse_err(line_no, format!("expected 'index:count', found '{piece}'"))
                })?;
                let part: u32 = part.parse().map_err(|e| {
                    parse_err(line_no, format!("invalid part index '{part}': {e}"))
                })?;
                let count: u64 = count.parse().map_err(|e| {
                    parse_err(line_no, format!("invalid count '{count}': {e}"))
                })?;
                entries.push((part, count));
            }
            if let Some(prev) = rows.last() {
                // cheap duplicate guard for the common sorted case; the
                // final from_rows sort catches out-of-order duplicates
                if prev.0 == word {
                    return Err(parse_err(line_no, format!("duplicate word '{word}'")));
                }
            }
            rows.push((word.to_string(), entries));
        }
        CountsTable::from_rows(level, rows)
    }
}
