//! Parser for the mapping language: a flat YAML subset.
//!
//! ```text
//! prefixes:
//!   ex: http://ex.org/
//! mappings:
//!   object:
//!     sources: [objects]
//!     g: ex:record/$(ID)
//!     s: ex:obj/$(ID)
//!     po:
//!       - [a, ex:Object~iri]
//!       - [ex:title, $(Title), @it]
//!       - [ex:date, fn(date, $(Date)), xsd:date]
//! ```

use std::collections::{BTreeMap, HashSet};

use crate::rdf::{Iri, Literal, Term, RDF_TYPE};

use super::template::{Segment, Template};
use super::MappingError;

pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const XSD_NS: &str = "http://www.w3.org/2001/XMLSchema#";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjectSpec {
    IriTemplate(Template),
    LiteralTemplate {
        template: Template,
        datatype: Option<Iri>,
        language: Option<String>,
    },
    Constant(Term),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleMap {
    pub name: String,
    pub source: String,
    pub subject: Template,
    pub graph: Option<Template>,
    pub pairs: Vec<(Iri, ObjectSpec)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MappingDocument {
    pub prefixes: BTreeMap<String, String>,
    pub triple_maps: Vec<TripleMap>,
}

/// Resolves `prefix:local`, `<iri>`, a scheme-qualified IRI (`http://...`)
/// or `a` (the rdf:type alias). `rdf:` and `xsd:` are always available.
pub fn resolve_curie(text: &str, prefixes: &BTreeMap<String, String>) -> Result<Iri, MappingError> {
    let syntax = |message: String| MappingError::Syntax { line: 0, message };
    let text = text.trim();
    if text == "a" {
        return Ok(Iri::new(RDF_TYPE).expect("constant IRI"));
    }
    if let Some(inner) = text.strip_prefix('<').and_then(|t| t.strip_suffix('>')) {
        return Iri::new(inner).map_err(|e| syntax(e.to_string()));
    }
    let (label, local) = text
        .split_once(':')
        .ok_or_else(|| syntax(format!("{text:?} is not a CURIE (no colon)")))?;
    if text.contains(char::is_whitespace) {
        return Err(syntax(format!("{text:?} contains whitespace")));
    }
    let namespace = lookup_prefix(label, prefixes);
    let full = match namespace {
        Some(ns) => format!("{ns}{local}"),
        None if local.starts_with("//") => text.to_owned(),
        None => return Err(MappingError::UnknownPrefix(label.to_owned())),
    };
    Iri::new(full).map_err(|e| syntax(e.to_string()))
}

fn lookup_prefix<'a>(label: &str, prefixes: &'a BTreeMap<String, String>) -> Option<&'a str> {
    prefixes.get(label).map(String::as_str).or(match label {
        "rdf" => Some(RDF_NS),
        "xsd" => Some(XSD_NS),
        _ => None,
    })
}

#[derive(PartialEq)]
enum Section {
    None,
    Prefixes,
    Mappings,
}

struct MapBuilder {
    name: String,
    line: usize,
    source: Option<String>,
    subject: Option<Template>,
    graph: Option<Template>,
    pairs: Vec<(Iri, ObjectSpec)>,
    in_po: bool,
}

impl MapBuilder {
    fn finish(self) -> Result<TripleMap, MappingError> {
        let err = |message: &str| MappingError::Syntax {
            line: self.line,
            message: format!("mapping {}: {message}", self.name),
        };
        Ok(TripleMap {
            source: self.source.clone().ok_or_else(|| err("missing sources"))?,
            subject: self.subject.clone().ok_or_else(|| err("missing s"))?,
            name: self.name,
            graph: self.graph,
            pairs: self.pairs,
        })
    }
}

pub fn parse_mapping(text: &str) -> Result<MappingDocument, MappingError> {
    let mut doc = MappingDocument::default();
    let mut names = HashSet::new();
    let mut section = Section::None;
    let mut current: Option<MapBuilder> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let syntax = |message: String| MappingError::Syntax {
            line: line_no,
            message,
        };
        let line = raw.trim_end();
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if line.starts_with('\t') {
            return Err(syntax("tabs are not allowed for indentation".into()));
        }
        let indent = line.len() - trimmed.len();
        if indent % 2 != 0 {
            return Err(syntax(
                "indentation must be a multiple of two spaces".into(),
            ));
        }
        let with_line = |e: MappingError| match e {
            MappingError::Syntax { message, .. } => MappingError::Syntax {
                line: line_no,
                message,
            },
            other => other,
        };

        match indent {
            0 => match trimmed {
                "prefixes:" if section == Section::None => section = Section::Prefixes,
                "mappings:" if section != Section::Mappings => section = Section::Mappings,
                other => return Err(syntax(format!("unexpected top-level line {other:?}"))),
            },
            2 if section == Section::Prefixes => {
                let (label, ns) = trimmed
                    .split_once(':')
                    .ok_or_else(|| syntax("expected `label: namespace`".into()))?;
                let ns = ns.trim();
                if label.is_empty() || label.contains(char::is_whitespace) {
                    return Err(syntax(format!("invalid prefix label {label:?}")));
                }
                Iri::new(ns).map_err(|e| syntax(e.to_string()))?;
                if doc
                    .prefixes
                    .insert(label.to_owned(), ns.to_owned())
                    .is_some()
                {
                    return Err(syntax(format!("duplicate prefix {label:?}")));
                }
            }
            2 if section == Section::Mappings => {
                let name = trimmed
                    .strip_suffix(':')
                    .filter(|n| !n.is_empty() && !n.contains(':'))
                    .ok_or_else(|| syntax("expected `name:`".into()))?;
                if !names.insert(name.to_owned()) {
                    return Err(MappingError::DuplicateMapping(name.to_owned()));
                }
                if let Some(done) = current.take() {
                    doc.triple_maps.push(done.finish()?);
                }
                current = Some(MapBuilder {
                    name: name.to_owned(),
                    line: line_no,
                    source: None,
                    subject: None,
                    graph: None,
                    pairs: Vec::new(),
                    in_po: false,
                });
            }
            4 if section == Section::Mappings => {
                let map = current
                    .as_mut()
                    .ok_or_else(|| syntax("field outside a mapping".into()))?;
                map.in_po = false;
                let (key, value) = trimmed
                    .split_once(':')
                    .ok_or_else(|| syntax("expected `key: value`".into()))?;
                let value = value.trim();
                match key {
                    "sources" => {
                        let inner = value
                            .strip_prefix('[')
                            .and_then(|v| v.strip_suffix(']'))
                            .map(str::trim)
                            .filter(|v| !v.is_empty() && !v.contains(','))
                            .ok_or_else(|| syntax("sources must be `[table-name]`".into()))?;
                        map.source = Some(inner.to_owned());
                    }
                    "s" => {
                        map.subject = Some(iri_template(value, &doc.prefixes).map_err(with_line)?)
                    }
                    "g" => map.graph = Some(iri_template(value, &doc.prefixes).map_err(with_line)?),
                    "po" if value.is_empty() => map.in_po = true,
                    other => return Err(syntax(format!("unknown field {other:?}"))),
                }
            }
            6 if section == Section::Mappings => {
                let map = current
                    .as_mut()
                    .filter(|m| m.in_po)
                    .ok_or_else(|| syntax("list item outside po:".into()))?;
                let item = trimmed
                    .strip_prefix("- [")
                    .and_then(|v| v.strip_suffix(']'))
                    .ok_or_else(|| syntax("po item must be `- [predicate, object]`".into()))?;
                map.pairs
                    .push(po_item(item, &doc.prefixes).map_err(with_line)?);
            }
            _ => return Err(syntax("unexpected indentation".into())),
        }
    }
    if let Some(done) = current.take() {
        doc.triple_maps.push(done.finish()?);
    }
    Ok(doc)
}

/// Parses an IRI-producing template, expanding a leading CURIE.
fn iri_template(text: &str, prefixes: &BTreeMap<String, String>) -> Result<Template, MappingError> {
    let syntax = |message: String| MappingError::Syntax { line: 0, message };
    let text = text.trim();
    if let Some(inner) = text.strip_prefix('<').and_then(|t| t.strip_suffix('>')) {
        return Template::parse(inner).map_err(syntax);
    }
    let mut template = Template::parse(text).map_err(syntax)?;
    if let Some(Segment::Literal(first)) = template.segments().first() {
        if let Some((label, local)) = first.split_once(':') {
            if !label.contains(['/', '$', '(', ' ']) {
                match lookup_prefix(label, prefixes) {
                    Some(ns) => {
                        let ns = ns.to_owned();
                        template.replace_prefix(label.len() + 1, &ns);
                    }
                    None if local.starts_with("//") => {}
                    None => return Err(MappingError::UnknownPrefix(label.to_owned())),
                }
            }
        }
    }
    Ok(template)
}

/// Splits on commas that are not nested inside parentheses.
fn split_top_level(text: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(text[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(text[start..].trim());
    parts
}

fn looks_like_annotation(part: &str) -> bool {
    part.starts_with('@')
        || (part.contains(':')
            && !part.contains(char::is_whitespace)
            && !part.contains("$(")
            && !part.ends_with("~iri"))
}

fn po_item(
    item: &str,
    prefixes: &BTreeMap<String, String>,
) -> Result<(Iri, ObjectSpec), MappingError> {
    let syntax = |message: String| MappingError::Syntax { line: 0, message };
    let parts = split_top_level(item);
    if parts.len() < 2 {
        return Err(syntax("po item needs a predicate and an object".into()));
    }
    let predicate = resolve_curie(parts[0], prefixes)?;
    let (object_parts, annotation) =
        if parts.len() >= 3 && looks_like_annotation(parts[parts.len() - 1]) {
            (&parts[1..parts.len() - 1], Some(parts[parts.len() - 1]))
        } else {
            (&parts[1..], None)
        };
    let object = object_parts.join(", ");
    if object.is_empty() {
        return Err(syntax("empty object".into()));
    }

    if let Some(iri_text) = object.strip_suffix("~iri") {
        if annotation.is_some() {
            return Err(syntax("IRI objects take no datatype or language".into()));
        }
        let template = iri_template(iri_text, prefixes)?;
        if template.is_constant() {
            let text = template.to_string();
            let iri = Iri::new(text).map_err(|e| syntax(e.to_string()))?;
            return Ok((predicate, ObjectSpec::Constant(Term::Iri(iri))));
        }
        return Ok((predicate, ObjectSpec::IriTemplate(template)));
    }

    let unquoted = object
        .strip_prefix('"')
        .and_then(|o| o.strip_suffix('"'))
        .unwrap_or(&object);
    let template = Template::parse(unquoted).map_err(syntax)?;
    let (datatype, language) = match annotation {
        None => (None, None),
        Some(lang) if lang.starts_with('@') => (None, Some(lang[1..].to_owned())),
        Some(dt) => (Some(resolve_curie(dt, prefixes)?), None),
    };
    if template.is_constant() {
        let lexical = template.to_string();
        let literal = match (&datatype, &language) {
            (Some(dt), _) => Literal::typed(lexical, dt.clone()),
            (None, Some(lang)) => {
                Literal::lang(lexical, lang.clone()).map_err(|e| syntax(e.to_string()))?
            }
            (None, None) => Literal::string(lexical),
        };
        return Ok((predicate, ObjectSpec::Constant(Term::Literal(literal))));
    }
    if let Some(lang) = &language {
        Literal::lang("", lang.clone()).map_err(|e| syntax(e.to_string()))?;
    }
    Ok((
        predicate,
        ObjectSpec::LiteralTemplate {
            template,
            datatype,
            language,
        },
    ))
}
