//! OLID-format tab-separated records.
//!
//! ```text
//! id<TAB>tweet<TAB>subtask_a<TAB>subtask_b<TAB>subtask_c
//! 1<TAB>@USER nice<TAB>NOT<TAB>NULL<TAB>NULL
//! ```

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{read_to_string, Error, Result};

pub const OLID_HEADER: &str = "id\ttweet\tsubtask_a\tsubtask_b\tsubtask_c";
pub const ABSENT: &str = "NULL";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Subtask {
    A,
    B,
    C,
}

impl Subtask {
    pub const ALL: [Subtask; 3] = [Subtask::A, Subtask::B, Subtask::C];

    pub fn class_names(self) -> &'static [&'static str] {
        match self {
            Subtask::A => &["NOT", "OFF"],
            Subtask::B => &["TIN", "UNT"],
            Subtask::C => &["IND", "GRP", "OTH"],
        }
    }

    pub fn num_classes(self) -> usize {
        self.class_names().len()
    }

    pub fn class_index(self, name: &str) -> Option<usize> {
        self.class_names().iter().position(|c| *c == name)
    }
}

impl fmt::Display for Subtask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subtask::A => "A",
            Subtask::B => "B",
            Subtask::C => "C",
        })
    }
}

impl FromStr for Subtask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Subtask::A),
            "B" => Ok(Subtask::B),
            "C" => Ok(Subtask::C),
            _ => Err(Error::Config(format!("unknown subtask `{s}` (expected A, B or C)"))),
        }
    }
}

/// One labelled tweet. Labels are class indices into
/// [`Subtask::class_names`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TweetRecord {
    pub id: String,
    pub text: String,
    pub label_a: usize,
    pub label_b: Option<usize>,
    pub label_c: Option<usize>,
}

impl TweetRecord {
    pub fn label(&self, subtask: Subtask) -> Option<usize> {
        match subtask {
            Subtask::A => Some(self.label_a),
            Subtask::B => self.label_b,
            Subtask::C => self.label_c,
        }
    }

    fn check_hierarchy(&self) -> std::result::Result<(), String> {
        let off = self.label_a == 1;
        let tin = self.label_b == Some(0);
        if self.label_b.is_some() && !off {
            return Err(format!("record {}: subtask B label requires subtask A = OFF", self.id));
        }
        if self.label_c.is_some() && !tin {
            return Err(format!("record {}: subtask C label requires subtask B = TIN", self.id));
        }
        Ok(())
    }

    pub fn to_tsv_line(&self) -> String {
        let name = |s: Subtask, l: Option<usize>| l.map_or(ABSENT, |i| s.class_names()[i]);
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.id,
            self.text,
            Subtask::A.class_names()[self.label_a],
            name(Subtask::B, self.label_b),
            name(Subtask::C, self.label_c)
        )
    }
}

fn parse_label(subtask: Subtask, raw: &str, source: &str, line: usize) -> Result<Option<usize>> {
    if raw == ABSENT {
        return Ok(None);
    }
    subtask
        .class_index(raw)
        .map(Some)
        .ok_or_else(|| Error::parse(source, line, format!("`{raw}` is not a subtask {subtask} label")))
}

pub fn parse_tsv(text: &str, source_name: &str) -> Result<Vec<TweetRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end_matches('\r') == OLID_HEADER => {}
        _ => {
            return Err(Error::parse(
                source_name,
                1,
                format!("expected header `{}`", OLID_HEADER.replace('\t', "<TAB>")),
            ))
        }
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.is_empty() {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != 5 {
            return Err(Error::parse(
                source_name,
                line,
                format!("expected 5 tab-separated columns, found {}", cols.len()),
            ));
        }
        let label_a = parse_label(Subtask::A, cols[2], source_name, line)?
            .ok_or_else(|| Error::parse(source_name, line, "subtask A label is required"))?;
        let rec = TweetRecord {
            id: cols[0].to_string(),
            text: cols[1].to_string(),
            label_a,
            label_b: parse_label(Subtask::B, cols[3], source_name, line)?,
            label_c: parse_label(Subtask::C, cols[4], source_name, line)?,
        };
        if rec.id.is_empty() {
            return Err(Error::parse(source_name, line, "empty id"));
        }
        rec.check_hierarchy().map_err(Error::Data)?;
        if !seen.insert(rec.id.clone()) {
            return Err(Error::Data(format!(
                "duplicate id `{}` ({source_name} line {line})",
                rec.id
            )));
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn ingest_tsv(path: &Path) -> Result<Vec<TweetRecord>> {
    parse_tsv(&read_to_string(path)?, &path.display().to_string())
}

pub fn write_tsv(records: &[TweetRecord]) -> String {
    let mut out = String::from(OLID_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.to_tsv_line());
        out.push('\n');
    }
    out
}

/// Concatenates datasets, rejecting ids that appear more than once.
pub fn combine(datasets: Vec<Vec<TweetRecord>>) -> Result<Vec<TweetRecord>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for r in datasets.into_iter().flatten() {
        if !seen.insert(r.id.clone()) {
            return Err(Error::Data(format!("duplicate id `{}` across datasets", r.id)));
        }
        out.push(r);
    }
    Ok(out)
}

/// `(id, text)` pairs from either an OLID file or a two-column file whose
/// header starts with `id<TAB>`.
pub fn read_texts(path: &Path) -> Result<Vec<(String, String)>> {
    let source = path.display().to_string();
    let text = read_to_string(path)?;
    let header = text.lines().next().unwrap_or("").trim_end_matches('\r');
    if header == OLID_HEADER {
        return Ok(parse_tsv(&text, &source)?.into_iter().map(|r| (r.id, r.text)).collect());
    }
    let cols: Vec<&str> = header.split('\t').collect();
    if cols.len() != 2 || cols[0] != "id" {
        return Err(Error::parse(
            &source,
            1,
            "expected an OLID header or a two-column `id<TAB>text` header",
        ));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate().skip(1) {
        let raw = raw.trim_end_matches('\r');
        if raw.is_empty() {
            continue;
        }
        let (id, body) = raw
            .split_once('\t')
            .ok_or_else(|| Error::parse(&source, i + 1, "expected `id<TAB>text`"))?;
        if body.contains('\t') {
            return Err(Error::parse(&source, i + 1, "too many columns"));
        }
        if !seen.insert(id.to_string()) {
            return Err(Error::Data(format!("duplicate id `{id}` ({source} line {})", i + 1)));
        }
        out.push((id.to_string(), body.to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(body: &str) -> Result<Vec<TweetRecord>> {
        parse_tsv(&format!("{OLID_HEADER}\n{body}"), "t.tsv")
    }

    #[test]
    fn documented_rows() {
        let r = parse("1\t@USER nice\tNOT\tNULL\tNULL\n2\t@USER ugh\tOFF\tUNT\tNULL\n").unwrap();
        assert_eq!(r[0].label_a, 0);
        assert_eq!((r[0].label_b, r[0].label_c), (None, None));
        assert_eq!((r[1].label_a, r[1].label_b, r[1].label_c), (1, Some(1), None));
    }

    #[test]
    fn hierarchy_violation_names_the_id() {
        let err = parse("3\tx\tNOT\tTIN\tNULL\n").unwrap_err();
        assert!(matches!(err, Error::Data(ref m) if m.contains("record 3")), "{err}");
        assert!(parse("4\tx\tOFF\tUNT\tIND\n").is_err());
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let err = parse("1\ta\tNOT\tNULL\tNULL\n2\tb\tNOT\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(matches!(
            parse("1\ta\tMAYBE\tNULL\tNULL\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(parse_tsv("id\ttext\n", "x").is_err());
    }

    #[test]
    fn duplicate_ids_rejected() {
        assert!(parse("1\ta\tNOT\tNULL\tNULL\n1\tb\tNOT\tNULL\tNULL\n").is_err());
        let a = parse("1\ta\tNOT\tNULL\tNULL\n").unwrap();
        assert!(combine(vec![a.clone(), a]).is_err());
    }

    #[test]
    fn write_round_trips() {
        let r = parse("1\ta b\tOFF\tTIN\tGRP\n2\tc\tNOT\tNULL\tNULL\n").unwrap();
        assert_eq!(parse_tsv(&write_tsv(&r), "w").unwrap(), r);
    }
}
