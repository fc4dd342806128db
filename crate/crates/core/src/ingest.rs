//! Dataset parsers and the canonical event file.
//!
//! Supported inputs:
//!
//! * `rating`: `user item rating unix_ts` (MovieLens/Netflix style; tab,
//!   whitespace or `::` separated). One day per time unit.
//! * `wallpost`: `poster wall unix_ts`. Posts on one's own wall are dropped.
//! * `citation`: SNAP-style `from to` edge list plus a `paper YYYY-MM-DD`
//!   dates file. One month per time unit, counted from January of the
//!   origin year; the link time is the citing paper's date.
//! * `canonical`: the crate's own `source\ttarget\ttime` file.
//!
//! Blank lines and lines starting with `#` or `%` are ignored everywhere.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{LinkEvent, Time};

pub const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Rating,
    Wallpost,
    Citation,
    Canonical,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Rating => "rating",
            Format::Wallpost => "wallpost",
            Format::Citation => "citation",
            Format::Canonical => "canonical",
        })
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rating" => Ok(Format::Rating),
            "wallpost" => Ok(Format::Wallpost),
            "citation" => Ok(Format::Citation),
            "canonical" => Ok(Format::Canonical),
            other => Err(Error::InvalidParameter(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    Day,
    Month,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub format: Format,
    pub time_unit: TimeUnit,
    /// Unix day that maps to time 0 (day-unit formats).
    pub origin_day: i64,
    /// Year whose January maps to month 0 (citation).
    pub origin_year: i32,
    /// Prepended to every source id. Rating data defaults to `u:` so users
    /// and items never share an id.
    pub source_prefix: String,
    /// Largest tolerated fraction of malformed lines.
    pub max_malformed: f64,
    /// Largest tolerated fraction of citation edges dropped for lack of a date.
    pub max_undated: f64,
}

impl DatasetSpec {
    pub fn new(format: Format) -> Self {
        DatasetSpec {
            format,
            time_unit: match format {
                Format::Citation => TimeUnit::Month,
                _ => TimeUnit::Day,
            },
            origin_day: 0,
            origin_year: 1993,
            source_prefix: match format {
                Format::Rating => "u:".to_string(),
                _ => String::new(),
            },
            max_malformed: 0.01,
            max_undated: 0.05,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub lines: usize,
    pub accepted: usize,
    pub skipped_malformed: usize,
    pub dropped_self: usize,
    pub dropped_undated: usize,
    /// Malformed lines of the dates file (citation only).
    pub skipped_malformed_dates: usize,
    pub nodes: usize,
    pub span: Option<(Time, Time)>,
    /// 1-based line numbers of the first malformed lines.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub malformed_line_numbers: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Parsed {
    pub events: Vec<LinkEvent>,
    pub report: IngestReport,
}

const MAX_REPORTED_LINES: usize = 20;

fn is_ignored(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#') || t.starts_with('%')
}

/// Splits on `::`, tab, or runs of whitespace, in that order of preference.
fn split_fields(line: &str) -> Vec<&str> {
    let line = line.trim();
    if line.contains("::") {
        line.split("::").map(str::trim).collect()
    } else if line.contains('\t') {
        line.split('\t').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Rejection is fatal only beyond one line of slack and the given fraction.
fn check_budget(
    what: &'static str,
    bad: usize,
    total: usize,
    frac: f64,
    lines: &[usize],
) -> Result<()> {
    let allowed = ((frac * total as f64).floor() as usize).max(1);
    if bad > allowed {
        return Err(Error::TooManyRejected {
            what,
            bad,
            total,
            lines: lines.to_vec(),
        });
    }
    Ok(())
}

fn finish(events: Vec<LinkEvent>, mut report: IngestReport) -> Parsed {
    report.accepted = events.len();
    report.span = events
        .iter()
        .map(|e| e.time)
        .fold(None, |acc, t| match acc {
            None => Some((t, t)),
            Some((lo, hi)) => Some((lo.min(t), hi.max(t))),
        });
    let mut nodes: HashSet<&str> = HashSet::new();
    for e in &events {
        nodes.insert(&e.source);
        nodes.insert(&e.target);
    }
    report.nodes = nodes.len();
    Parsed { events, report }
}

enum LineOutcome {
    Event(LinkEvent),
    Malformed,
    SelfLink,
}

fn parse_timestamped<I, S>(lines: I, spec: &DatasetSpec, arity: usize) -> Result<Parsed>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut report = IngestReport::default();
    let mut events = Vec::new();
    for (i, line) in lines.into_iter().enumerate() {
        let line = line.as_ref();
        if is_ignored(line) {
            continue;
        }
        report.lines += 1;
        let outcome = (|| {
            let f = split_fields(line);
            if f.len() != arity || f[..2].iter().any(|s| s.is_empty()) {
                return LineOutcome::Malformed;
            }
            let Ok(ts) = f[arity - 1].parse::<i64>() else {
                return LineOutcome::Malformed;
            };
            let time = ts.div_euclid(SECONDS_PER_DAY) - spec.origin_day;
            if time < 0 {
                return LineOutcome::Malformed;
            }
            let source = format!("{}{}", spec.source_prefix, f[0]);
            if source == f[1] {
                return LineOutcome::SelfLink;
            }
            LineOutcome::Event(LinkEvent::new(source, f[1], time))
        })();
        match outcome {
            LineOutcome::Event(e) => events.push(e),
            LineOutcome::SelfLink => report.dropped_self += 1,
            LineOutcome::Malformed => {
                report.skipped_malformed += 1;
                if report.malformed_line_numbers.len() < MAX_REPORTED_LINES {
                    report.malformed_line_numbers.push(i + 1);
                }
            }
        }
    }
    check_budget(
        "malformed lines",
        report.skipped_malformed,
        report.lines,
        spec.max_malformed,
        &report.malformed_line_numbers,
    )?;
    Ok(finish(events, report))
}

/// `user item rating unix_ts`; the rating value is ignored.
pub fn parse_rating<I, S>(lines: I, spec: &DatasetSpec) -> Result<Parsed>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    parse_timestamped(lines, spec, 4)
}

/// `poster wall unix_ts`.
pub fn parse_wallpost<I, S>(lines: I, spec: &DatasetSpec) -> Result<Parsed>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    parse_timestamped(lines, spec, 3)
}

/// Month index of a `YYYY-MM-DD` date relative to January of `origin_year`.
pub fn month_index(date: &str, origin_year: i32) -> Option<Time> {
    let mut parts = date.split('-');
    let year: i32 = parts.next()?.parse().ok()?;
    let month: i32 = parts.next()?.parse().ok()?;
    let day: i32 = parts.next()?.parse().ok()?;
    if parts.next().is_some() || !(1..=12).contains(&month) || !(1..=31).contains(&day) {
        return None;
    }
    Some(((year - origin_year) * 12 + (month - 1)) as Time)
}

pub fn parse_citation<E, D, S, T>(
    edge_lines: E,
    date_lines: D,
    spec: &DatasetSpec,
) -> Result<Parsed>
where
    E: IntoIterator<Item = S>,
    S: AsRef<str>,
    D: IntoIterator<Item = T>,
    T: AsRef<str>,
{
    let mut report = IngestReport::default();
    let mut dates: HashMap<String, Time> = HashMap::new();
    for line in date_lines {
        let line = line.as_ref();
        if is_ignored(line) {
            continue;
        }
        let f = split_fields(line);
        match (
            f.as_slice(),
            f.get(1).and_then(|d| month_index(d, spec.origin_year)),
        ) {
            ([id, _], Some(month)) => {
                let entry = dates.entry(id.to_string()).or_insert(month);
                *entry = (*entry).min(month);
            }
            _ => report.skipped_malformed_dates += 1,
        }
    }

    let mut events = Vec::new();
    for (i, line) in edge_lines.into_iter().enumerate() {
        let line = line.as_ref();
        if is_ignored(line) {
            continue;
        }
        report.lines += 1;
        let f = split_fields(line);
        if f.len() != 2 {
            report.skipped_malformed += 1;
            if report.malformed_line_numbers.len() < MAX_REPORTED_LINES {
                report.malformed_line_numbers.push(i + 1);
            }
            continue;
        }
        let source = format!("{}{}", spec.source_prefix, f[0]);
        if source == f[1] {
            report.dropped_self += 1;
            continue;
        }
        match dates.get(f[0]) {
            Some(&month) if month >= 0 => events.push(LinkEvent::new(source, f[1], month)),
            _ => report.dropped_undated += 1,
        }
    }
    check_budget(
        "malformed lines",
        report.skipped_malformed,
        report.lines,
        spec.max_malformed,
        &report.malformed_line_numbers,
    )?;
    check_budget(
        "undated citation edges",
        report.dropped_undated,
        report.lines,
        spec.max_undated,
        &[],
    )?;
    Ok(finish(events, report))
}

/// Canonical order: time ascending, then source, then target.
pub fn canonical_sort(events: &mut [LinkEvent]) {
    events.sort_by(|a, b| a.canonical_cmp(b));
}

/// Serializes events as canonical text, sorting a copy first.
pub fn to_canonical_string(events: &[LinkEvent]) -> Result<String> {
    if events.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut sorted = events.to_vec();
    canonical_sort(&mut sorted);
    let mut out = String::with_capacity(sorted.len() * 24);
    for (index, e) in sorted.iter().enumerate() {
        let bad_id = |s: &str| s.contains(['\t', '\n', '\r']);
        if bad_id(&e.source) || bad_id(&e.target) {
            return Err(Error::InvalidEvent {
                index,
                reason: "node id contains a tab or line break".into(),
            });
        }
        e.check().map_err(|r| Error::InvalidEvent {
            index,
            reason: r.to_string(),
        })?;
        out.push_str(&e.source);
        out.push('\t');
        out.push_str(&e.target);
        out.push('\t');
        out.push_str(&e.time.to_string());
        out.push('\n');
    }
    Ok(out)
}

pub fn write_canonical(path: impl AsRef<Path>, events: &[LinkEvent]) -> Result<()> {
    let path = path.as_ref();
    let text = to_canonical_string(events)?;
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Parses canonical text. `origin` names the source in error messages.
pub fn parse_canonical(text: &str, origin: &str) -> Result<Vec<LinkEvent>> {
    let mut events = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let malformed = |reason: &str| Error::Malformed {
            path: origin.to_string(),
            line: i + 1,
            reason: reason.to_string(),
        };
        let fields: Vec<&str> = line.split('\t').collect();
        let [source, target, time] = fields.as_slice() else {
            return Err(malformed("expected 3 tab-separated fields"));
        };
        let time: Time = time
            .parse()
            .ok()
            .filter(|t: &Time| *t >= 0 && time.bytes().all(|b| b.is_ascii_digit()))
            .ok_or_else(|| malformed("time is not a non-negative integer"))?;
        let ev = LinkEvent::new(*source, *target, time);
        ev.check().map_err(malformed)?;
        events.push(ev);
    }
    Ok(events)
}

pub fn read_to_string(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn read_canonical(path: impl AsRef<Path>) -> Result<Vec<LinkEvent>> {
    let path = path.as_ref();
    parse_canonical(&read_to_string(path)?, &path.display().to_string())
}

/// Parses any supported format from in-memory text.
pub fn parse(spec: &DatasetSpec, inputs: &[String], dates: Option<&str>) -> Result<Parsed> {
    let lines = inputs.iter().flat_map(|s| s.lines());
    match spec.format {
        Format::Rating => parse_rating(lines, spec),
        Format::Wallpost => parse_wallpost(lines, spec),
        Format::Citation => {
            let dates = dates.ok_or_else(|| {
                Error::InvalidParameter("citation format needs a dates file".into())
            })?;
            parse_citation(lines, dates.lines(), spec)
        }
        Format::Canonical => {
            let mut events = Vec::new();
            let mut report = IngestReport::default();
            for (k, text) in inputs.iter().enumerate() {
                events.extend(parse_canonical(text, &format!("input #{}", k + 1))?);
                report.lines += text.lines().count();
            }
            Ok(finish(events, report))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_malformed_line_is_tolerated() {
        let spec = DatasetSpec::new(Format::Rating);
        let p = parse_rating(["1\t1193\t5\t978300760", "2::10::3::0", "3 4 5"], &spec).unwrap();
        assert_eq!(p.report.skipped_malformed, 1);
        assert_eq!(p.report.malformed_line_numbers, vec![3]);
        assert_eq!(
            p.report.accepted + p.report.skipped_malformed,
            p.report.lines
        );
    }

    #[test]
    fn rating_fields() {
        let spec = DatasetSpec::new(Format::Rating);
        let p = parse_rating(["1\t1193\t5\t978300760", "2::10::3::0"], &spec).unwrap();
        assert_eq!(
            p.events,
            vec![
                LinkEvent::new("u:1", "1193", 11322),
                LinkEvent::new("u:2", "10", 0)
            ]
        );
        assert_eq!(p.report.accepted, 2);
    }

    #[test]
    fn negative_day_after_origin_shift_is_malformed() {
        let mut spec = DatasetSpec::new(Format::Rating);
        spec.origin_day = 11322;
        let p = parse_rating(["1\t1193\t5\t978300760", "1\t7\t5\t0"], &spec).unwrap();
        assert_eq!(p.events, vec![LinkEvent::new("u:1", "1193", 0)]);
        assert_eq!(p.report.skipped_malformed, 1);
    }

    #[test]
    fn wallpost_lines() {
        let spec = DatasetSpec::new(Format::Wallpost);
        let p = parse_wallpost(["42 42 1199133531", "7 42 1199133531"], &spec).unwrap();
        assert_eq!(p.events, vec![LinkEvent::new("7", "42", 13878)]);
        assert_eq!(p.report.dropped_self, 1);
        let empty = parse_wallpost(Vec::<&str>::new(), &spec).unwrap();
        assert!(empty.events.is_empty());
        assert_eq!(empty.report.span, None);
    }

    #[test]
    fn month_indices() {
        assert_eq!(month_index("1993-01-15", 1993), Some(0));
        assert_eq!(month_index("1994-03-01", 1993), Some(14));
        assert_eq!(month_index("1994-13-01", 1993), None);
        assert_eq!(month_index("junk", 1993), None);
    }

    #[test]
    fn too_many_malformed_is_fatal() {
        let spec = DatasetSpec::new(Format::Wallpost);
        let lines = ["1 2 100", "x", "y", "2 3 100"];
        match parse_wallpost(lines, &spec) {
            Err(Error::TooManyRejected { bad, lines, .. }) => {
                assert_eq!(bad, 2);
                assert_eq!(lines, vec![2, 3]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn canonical_round_trip_sorts() {
        let ev = vec![
            LinkEvent::new("b", "c", 5),
            LinkEvent::new("a", "c", 5),
            LinkEvent::new("z", "y", 1),
        ];
        let text = to_canonical_string(&ev).unwrap();
        assert_eq!(text, "z\ty\t1\na\tc\t5\nb\tc\t5\n");
        let back = parse_canonical(&text, "mem").unwrap();
        let mut sorted = ev.clone();
        canonical_sort(&mut sorted);
        assert_eq!(back, sorted);
    }

    #[test]
    fn canonical_errors_carry_line_numbers() {
        let err = parse_canonical("a\tb\t1\na\tb\n", "f.tsv").unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 2, .. }), "{err}");
        let err = parse_canonical("a\tb\t-3\n", "f.tsv").unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 1, .. }));
        let err = parse_canonical("a\ta\t3\n", "f.tsv").unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 1, .. }));
        assert!(matches!(to_canonical_string(&[]), Err(Error::EmptyDataset)));
    }
}
