//! Tab-separated text formats: queries, labels, and the small id/value tables
//! other modules read and write.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Label, LabelRecord, LabelSource, QueryRecord};
use crate::error::{Error, Result};

pub const QUERIES_HEADER: &str = "id\ttext";
pub const LABELS_HEADER: &str = "id\tlabel\tsource\tvotes";

/// Yields `(1-based line number, line)` for every non-blank line, skipping a
/// leading header line when it matches `header` exactly.
pub fn data_lines<'a>(
    text: &'a str,
    header: &'a str,
) -> impl Iterator<Item = (usize, &'a str)> + 'a {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(move |(i, l)| !(*i == 1 && *l == header))
        .filter(|(_, l)| !l.trim().is_empty())
}

pub fn parse_id(line: usize, field: &str) -> Result<u64> {
    field
        .trim()
        .parse::<u64>()
        .map_err(|_| Error::parse(line, format!("invalid id {field:?}")))
}

pub fn parse_queries(text: &str) -> Result<Vec<QueryRecord>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, row) in data_lines(text, QUERIES_HEADER) {
        let mut fields = row.split('\t');
        let id = parse_id(line, fields.next().unwrap_or(""))?;
        let text = fields
            .next()
            .ok_or_else(|| Error::parse(line, "expected 2 columns"))?;
        if fields.next().is_some() {
            return Err(Error::parse(line, "tab inside query text"));
        }
        if text.trim().is_empty() {
            return Err(Error::EmptyText { line });
        }
        if !seen.insert(id) {
            return Err(Error::DuplicateId(id));
        }
        out.push(QueryRecord {
            id,
            text: text.to_string(),
        });
    }
    Ok(out)
}

pub fn load_queries(path: impl AsRef<Path>) -> Result<Vec<QueryRecord>> {
    parse_queries(&fs::read_to_string(path)?)
}

pub fn format_queries(queries: &[QueryRecord]) -> String {
    let mut out = String::from(QUERIES_HEADER);
    out.push('\n');
    for q in queries {
        let _ = writeln!(out, "{}\t{}", q.id, q.text);
    }
    out
}

pub fn parse_labels(text: &str) -> Result<Vec<LabelRecord>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, row) in data_lines(text, LABELS_HEADER) {
        let fields: Vec<&str> = row.split('\t').collect();
        if fields.len() < 3 || fields.len() > 4 {
            return Err(Error::parse(line, "expected id, label, source, votes"));
        }
        let id = parse_id(line, fields[0])?;
        let label: Label = fields[1]
            .trim()
            .parse()
            .map_err(|e: String| Error::parse(line, e))?;
        let source: LabelSource = fields[2]
            .trim()
            .parse()
            .map_err(|e: String| Error::parse(line, e))?;
        let votes = match fields.get(3).map(|v| v.trim()) {
            None | Some("") => None,
            Some(v) => Some(
                v.parse::<u8>()
                    .map_err(|_| Error::parse(line, format!("invalid vote count {v:?}")))?,
            ),
        };
        if !seen.insert(id) {
            return Err(Error::DuplicateId(id));
        }
        let record = LabelRecord::new(id, label, source, votes)
            .map_err(|e| Error::parse(line, e))?;
        out.push(record);
    }
    Ok(out)
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<LabelRecord>> {
    parse_labels(&fs::read_to_string(path)?)
}

pub fn format_labels(labels: &[LabelRecord]) -> String {
    let mut out = String::from(LABELS_HEADER);
    out.push('\n');
    for r in labels {
        let votes = r.votes.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{}\t{}\t{}\t{}", r.id, r.label, r.source, votes);
    }
    out
}
