use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};

use super::table::CellSource;

/// RFC 3986 unreserved characters are kept; every other byte is `%HH`.
const IRI_SAFE: &AsciiSet = &NON_ALPHANUMERIC
    .remove(b'-')
    .remove(b'.')
    .remove(b'_')
    .remove(b'~');

/// Named pure text transforms usable as `fn(name, $(column))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Trim,
    Lowercase,
    /// Normalizes common day/month/year layouts to `YYYY-MM-DD`.
    Date,
}

impl Transform {
    /// `None` when the value cannot be transformed (treated like an empty cell).
    pub fn apply(self, value: &str) -> Option<String> {
        match self {
            Transform::Trim => Some(value.trim().to_owned()),
            Transform::Lowercase => Some(value.to_lowercase()),
            Transform::Date => normalize_date(value.trim()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Transform::Trim => "trim",
            Transform::Lowercase => "lowercase",
            Transform::Date => "date",
        }
    }
}

impl FromStr for Transform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "trim" => Ok(Transform::Trim),
            "lowercase" => Ok(Transform::Lowercase),
            "date" => Ok(Transform::Date),
            other => Err(format!("unknown function {other:?}")),
        }
    }
}

pub fn normalize_date(value: &str) -> Option<String> {
    const LAYOUTS: [&str; 6] = [
        "%Y-%m-%d", "%Y/%m/%d", "%d/%m/%Y", "%d-%m-%Y", "%d.%m.%Y", "%Y%m%d",
    ];
    let date_part = value.split(['T', ' ']).next().unwrap_or(value);
    LAYOUTS
        .iter()
        .find_map(|layout| NaiveDate::parse_from_str(date_part, layout).ok())
        .map(|d| d.format("%Y-%m-%d").to_string())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    Literal(String),
    Column(String),
    Function {
        transform: Transform,
        column: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    Iri,
    Literal,
}

/// Concatenation of literal text and column references.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    segments: Vec<Segment>,
}

impl Template {
    pub fn new(segments: Vec<Segment>) -> Result<Self, String> {
        if segments.is_empty() {
            return Err("template has no segments".into());
        }
        for s in &segments {
            match s {
                Segment::Column(c) | Segment::Function { column: c, .. } if c.is_empty() => {
                    return Err("empty column name".into())
                }
                _ => {}
            }
        }
        Ok(Template { segments })
    }

    /// Parses `text$(column)fn(name, $(column))...`.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut segments = Vec::new();
        let mut literal = String::new();
        let mut rest = text;
        while !rest.is_empty() {
            if let Some(after) = rest.strip_prefix("$(") {
                let end = after.find(')').ok_or("unterminated $(")?;
                flush(&mut literal, &mut segments);
                segments.push(Segment::Column(after[..end].trim().to_owned()));
                rest = &after[end + 1..];
            } else if let Some(after) = rest.strip_prefix("fn(") {
                let (name, tail) = after.split_once(',').ok_or("expected ',' in fn(...)")?;
                let transform: Transform = name.trim().parse()?;
                let tail = tail.trim_start();
                let tail = tail
                    .strip_prefix("$(")
                    .ok_or("fn argument must be $(column)")?;
                let end = tail.find(')').ok_or("unterminated $(")?;
                let column = tail[..end].trim().to_owned();
                let tail = tail[end + 1..].trim_start();
                rest = tail.strip_prefix(')').ok_or("unterminated fn(")?;
                flush(&mut literal, &mut segments);
                segments.push(Segment::Function { transform, column });
            } else {
                let c = rest.chars().next().expect("non-empty");
                literal.push(c);
                rest = &rest[c.len_utf8()..];
            }
        }
        flush(&mut literal, &mut segments);
        Template::new(segments)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_constant(&self) -> bool {
        self.segments
            .iter()
            .all(|s| matches!(s, Segment::Literal(_)))
    }

    pub fn columns(&self) -> impl Iterator<Item = &str> + '_ {
        self.segments.iter().filter_map(|s| match s {
            Segment::Column(c) | Segment::Function { column: c, .. } => Some(c.as_str()),
            Segment::Literal(_) => None,
        })
    }

    /// A template that is a single bare column reference.
    fn is_single_reference(&self) -> bool {
        matches!(
            self.segments.as_slice(),
            [Segment::Column(_) | Segment::Function { .. }]
        )
    }

    /// Expands the template over one row. `None` means the row is skipped:
    /// a referenced column is absent or its (transformed) value is empty.
    ///
    /// In IRI position substituted values are percent-encoded, except when
    /// the whole template is one column reference, whose value must already
    /// be a full IRI.
    pub fn expand(&self, row: &impl CellSource, position: Position) -> Option<String> {
        let encode = position == Position::Iri && !self.is_single_reference();
        let mut out = String::new();
        for segment in &self.segments {
            let value = match segment {
                Segment::Literal(text) => {
                    out.push_str(text);
                    continue;
                }
                Segment::Column(column) => row.cell(column)?.to_owned(),
                Segment::Function { transform, column } => transform.apply(row.cell(column)?)?,
            };
            if value.is_empty() {
                return None;
            }
            if encode {
                out.extend(utf8_percent_encode(&value, IRI_SAFE));
            } else {
                out.push_str(&value);
            }
        }
        Some(out)
    }

    /// Replaces a leading literal `from` with `to` (CURIE expansion).
    pub(crate) fn replace_prefix(&mut self, from_len: usize, to: &str) {
        if let Some(Segment::Literal(text)) = self.segments.first_mut() {
            *text = format!("{to}{}", &text[from_len..]);
        }
    }
}

fn flush(literal: &mut String, segments: &mut Vec<Segment>) {
    if !literal.is_empty() {
        segments.push(Segment::Literal(std::mem::take(literal)));
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.segments {
            match s {
                Segment::Literal(t) => f.write_str(t)?,
                Segment::Column(c) => write!(f, "$({c})")?,
                Segment::Function { transform, column } => {
                    write!(f, "fn({}, $({column}))", transform.name())?
                }
            }
        }
        Ok(())
    }
}

/// Expands `template` for IRI or literal use.
pub fn expand_template(
    template: &Template,
    row: &impl CellSource,
    position: Position,
) -> Option<String> {
    template.expand(row, position)
}
