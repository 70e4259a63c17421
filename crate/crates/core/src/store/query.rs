//! Text form of basic graph patterns and CSV rendering of their solutions.
//!
//! One pattern per line: subject, predicate, object and an optional graph,
//! each an N-Triples term or a `?variable`, optionally ending in `.`. A
//! pattern without a graph term matches every graph.

use crate::rdf::{Cursor, SyntaxError, Term};

use super::pattern::{GraphPattern, PatternTerm, QuadPattern, Solution};

fn parse_variable(c: &mut Cursor<'_>) -> Result<String, SyntaxError> {
    c.bump();
    let start = c.rest();
    let mut len = 0;
    while let Some(ch) = c.peek() {
        if ch.is_alphanumeric() || ch == '_' {
            len += ch.len_utf8();
            c.bump();
        } else {
            break;
        }
    }
    if len == 0 {
        return Err(c.error("empty variable name"));
    }
    Ok(start[..len].to_owned())
}

fn is_variable_start(c: &Cursor<'_>) -> bool {
    matches!(c.peek(), Some('?' | '$'))
}

fn parse_position(c: &mut Cursor<'_>, what: &str) -> Result<PatternTerm, SyntaxError> {
    if is_variable_start(c) {
        return parse_variable(c).map(PatternTerm::Variable);
    }
    let term = match what {
        "subject" => c.parse_subject()?.into(),
        "predicate" => Term::Iri(c.parse_predicate()?),
        _ => c.parse_term()?,
    };
    Ok(PatternTerm::Term(term))
}

/// Parses pattern text into a conjunctive query.
pub fn parse_bgp(text: &str) -> Result<Vec<QuadPattern>, SyntaxError> {
    let mut c = Cursor::new(text);
    let mut patterns = Vec::new();
    c.skip_ws_and_comments();
    while !c.at_end() {
        let subject = parse_position(&mut c, "subject")?;
        c.skip_inline_ws();
        let predicate = parse_position(&mut c, "predicate")?;
        c.skip_inline_ws();
        let object = parse_position(&mut c, "object")?;
        c.skip_inline_ws();
        let graph = if is_variable_start(&c) {
            GraphPattern::Variable(parse_variable(&mut c)?)
        } else if c.peek() == Some('<') {
            GraphPattern::Named(c.parse_iri()?)
        } else {
            GraphPattern::Any
        };
        c.skip_inline_ws();
        let dotted = c.peek() == Some('.');
        if dotted {
            c.bump();
            c.skip_inline_ws();
        }
        if !dotted && !matches!(c.peek(), None | Some('\n' | '\r' | '#')) {
            return Err(c.error("expected '.' or end of line after pattern"));
        }
        patterns.push(QuadPattern {
            subject,
            predicate,
            object,
            graph,
        });
        c.skip_ws_and_comments();
    }
    if patterns.is_empty() {
        return Err(c.error("no patterns"));
    }
    Ok(patterns)
}

/// Variables in order of first appearance.
pub fn pattern_variables(patterns: &[QuadPattern]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for v in patterns.iter().flat_map(QuadPattern::variables) {
        if !out.iter().any(|o| o == v) {
            out.push(v.to_owned());
        }
    }
    out
}

/// Header of variable names, then one row per solution with each value in
/// N-Triples form. Empty when there are no solutions.
pub fn solutions_csv(patterns: &[QuadPattern], solutions: &[Solution]) -> String {
    if solutions.is_empty() {
        return String::new();
    }
    let vars = pattern_variables(patterns);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(&vars).expect("writing to memory");
    for s in solutions {
        let row: Vec<String> = vars
            .iter()
            .map(|v| s.get(v).map(Term::to_string).unwrap_or_default())
            .collect();
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("utf-8 fields")
}
