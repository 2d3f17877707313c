//! Text formats for concept classes (`.cls`) and point sets (`.set`).
//!
//! Class file grammar (one item per line; `#` starts a comment line, blank
//! lines are ignored):
//!
//! ```text
//! vcclass 1              magic and format version
//! m <size>               domain size, positive
//! labels <l0> .. <lm-1>  optional; exactly m distinct whitespace-free tokens
//! dedup <0|1>            optional; defaults to 0
//! count <k>              number of concept records that follow
//! <bits>                 k records, each a 0/1 string of length exactly m
//! ```
//!
//! Header lines must appear in the order shown. Set files use the same
//! conventions with a single record:
//!
//! ```text
//! vcset 1
//! m <size>
//! <bits>
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::domain::{ConceptClass, Domain};
use crate::error::{Error, Result};
use crate::pointset::PointSet;

pub const CLASS_FORMAT_VERSION: u32 = 1;
pub const SET_FORMAT_VERSION: u32 = 1;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self { inner: text.lines().enumerate(), last: 0 }
    }

    fn next_content(&mut self) -> Option<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            let line = line.trim();
            self.last = i + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            return Some((i + 1, line));
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next_content().ok_or_else(|| Error::Parse {
            line: self.last + 1,
            message: format!("unexpected end of input, expected {what}"),
        })
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn keyed<'a>(line_no: usize, line: &'a str, key: &str) -> Result<&'a str> {
    let mut parts = line.splitn(2, char::is_whitespace);
    match (parts.next(), parts.next()) {
        (Some(k), Some(rest)) if k == key => Ok(rest.trim()),
        (Some(k), None) if k == key => Ok(""),
        _ => Err(parse_err(line_no, format!("expected `{key} ...`, found {line:?}"))),
    }
}

fn parse_num<T: std::str::FromStr>(line_no: usize, s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| parse_err(line_no, format!("invalid {what}: {s:?}")))
}

fn parse_bits(line_no: usize, line: &str, m: usize) -> Result<PointSet> {
    if line.len() != m {
        return Err(parse_err(line_no, format!("record has length {} but m = {m}", line.len())));
    }
    PointSet::from_bit_str(line).ok_or_else(|| parse_err(line_no, "record must contain only 0 and 1"))
}

pub fn parse_class(text: &str) -> Result<ConceptClass> {
    let mut lines = Lines::new(text);
    let (n, magic) = lines.expect("header")?;
    let version: u32 = parse_num(n, keyed(n, magic, "vcclass")?, "version")?;
    if version != CLASS_FORMAT_VERSION {
        return Err(parse_err(n, format!("unsupported class format version {version}")));
    }
    let (n, line) = lines.expect("`m`")?;
    let m: usize = parse_num(n, keyed(n, line, "m")?, "domain size")?;
    if m == 0 {
        return Err(parse_err(n, "domain size must be positive"));
    }

    let (mut n, mut line) = lines.expect("`count`")?;
    let mut domain = Domain::new(m)?;
    if line.starts_with("labels") {
        let labels: Vec<String> =
            keyed(n, line, "labels")?.split_whitespace().map(str::to_owned).collect();
        if labels.len() != m {
            return Err(parse_err(n, format!("{} labels for m = {m}", labels.len())));
        }
        domain = Domain::with_labels(labels).map_err(|e| parse_err(n, e.to_string()))?;
        (n, line) = lines.expect("`count`")?;
    }
    let mut dedup = false;
    if line.starts_with("dedup") {
        dedup = match keyed(n, line, "dedup")? {
            "0" => false,
            "1" => true,
            other => return Err(parse_err(n, format!("dedup must be 0 or 1, found {other:?}"))),
        };
        (n, line) = lines.expect("`count`")?;
    }
    let count: usize = parse_num(n, keyed(n, line, "count")?, "count")?;

    let mut concepts = Vec::with_capacity(count);
    for _ in 0..count {
        let (n, line) = lines.expect("concept record")?;
        concepts.push(parse_bits(n, line, m)?);
    }
    if let Some((n, _)) = lines.next_content() {
        return Err(parse_err(n, format!("more records than count = {count}")));
    }
    let class = ConceptClass::new(domain, concepts).with_dedup_flag(dedup);
    class.ensure_valid()?;
    Ok(class)
}

pub fn write_class(class: &ConceptClass) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "vcclass {CLASS_FORMAT_VERSION}");
    let _ = writeln!(out, "m {}", class.m());
    if let Some(labels) = class.domain().labels() {
        let _ = writeln!(out, "labels {}", labels.join(" "));
    }
    if class.is_dedup() {
        out.push_str("dedup 1\n");
    }
    let _ = writeln!(out, "count {}", class.len());
    for c in class.concepts() {
        out.push_str(&c.to_bit_string());
        out.push('\n');
    }
    out
}

pub fn parse_set(text: &str) -> Result<PointSet> {
    let mut lines = Lines::new(text);
    let (n, magic) = lines.expect("header")?;
    let version: u32 = parse_num(n, keyed(n, magic, "vcset")?, "version")?;
    if version != SET_FORMAT_VERSION {
        return Err(parse_err(n, format!("unsupported set format version {version}")));
    }
    let (n, line) = lines.expect("`m`")?;
    let m: usize = parse_num(n, keyed(n, line, "m")?, "domain size")?;
    let (n, line) = lines.expect("set record")?;
    let set = parse_bits(n, line, m)?;
    if let Some((n, _)) = lines.next_content() {
        return Err(parse_err(n, "trailing content after set record"));
    }
    Ok(set)
}

pub fn write_set(set: &PointSet) -> String {
    format!("vcset {SET_FORMAT_VERSION}\nm {}\n{}\n", set.len(), set.to_bit_string())
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_class(path: &Path) -> Result<ConceptClass> {
    parse_class(&read_text(path)?)
}

pub fn read_set(path: &Path) -> Result<PointSet> {
    parse_set(&read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_labels_and_comments() {
        let text = "# toy\nvcclass 1\nm 3\nlabels a b c\ncount 2\n\n101\n010\n";
        let class = parse_class(text).unwrap();
        assert_eq!(class.m(), 3);
        assert_eq!(class.len(), 2);
        assert_eq!(class.domain().labels().unwrap(), ["a", "b", "c"]);
        assert_eq!(write_class(&class), "vcclass 1\nm 3\nlabels a b c\ncount 2\n101\n010\n");
    }

    #[test]
    fn rejects_length_mismatch() {
        let err = parse_class("vcclass 1\nm 3\ncount 1\n10\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err:?}");
    }

    #[test]
    fn rejects_count_mismatch_and_bad_version() {
        assert!(parse_class("vcclass 1\nm 2\ncount 2\n10\n").is_err());
        assert!(parse_class("vcclass 1\nm 2\ncount 1\n10\n01\n").is_err());
        assert!(parse_class("vcclass 2\nm 2\ncount 0\n").is_err());
        assert!(parse_class("vcclass 1\nm 2\nlabels a\ncount 0\n").is_err());
        assert!(parse_class("vcclass 1\nm 2\ncount 1\n1x\n").is_err());
    }

    #[test]
    fn dedup_flag_is_checked() {
        assert!(parse_class("vcclass 1\nm 2\ndedup 1\ncount 2\n10\n10\n").is_err());
        let class = parse_class("vcclass 1\nm 2\ndedup 1\ncount 2\n10\n01\n").unwrap();
        assert!(class.is_dedup());
    }

    #[test]
    fn set_round_trip() {
        let set = PointSet::from_points(5, [1, 4]).unwrap();
        assert_eq!(parse_set(&write_set(&set)).unwrap(), set);
        assert!(parse_set("vcset 1\nm 5\n0100\n").is_err());
    }
}
