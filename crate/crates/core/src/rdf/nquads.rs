//! N-Triples / N-Quads reader and canonical writer.
//!
//! The writer emits one quad per line, sorted by the serialized forms of
//! (graph, subject, predicate, object), so equal datasets always produce
//! identical bytes.

use std::fmt::Write as _;

use thiserror::Error;

use super::dataset::Dataset;
use super::term::{
    is_blank_label, is_language_tag, BlankNode, Iri, Literal, Quad, Subject, Term, RDF_LANG_STRING,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at line {line}, column {column}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Character cursor with line/column tracking, shared with the update parser.
pub(crate) struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Cursor {
            text,
            pos: 0,
            line: 1,
            column: 1,
        }
    }

    pub(crate) fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    pub(crate) fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    pub(crate) fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }

    /// Skips spaces and tabs on the current line.
    pub(crate) fn skip_inline_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.bump();
        }
    }

    /// Skips whitespace (including newlines) and `#` comments.
    pub(crate) fn skip_ws_and_comments(&mut self) {
        loop {
            match self.peek() {
                Some(' ' | '\t' | '\r' | '\n') => {
                    self.bump();
                }
                Some('#') => self.skip_comment(),
                _ => break,
            }
        }
    }

    fn skip_comment(&mut self) {
        while let Some(c) = self.peek() {
            if c == '\n' || c == '\r' {
                break;
            }
            self.bump();
        }
    }

    pub(crate) fn expect(&mut self, c: char) -> Result<(), SyntaxError> {
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'")))
        }
    }

    /// Consumes `word` case-insensitively if it is next in the input.
    pub(crate) fn eat_keyword(&mut self, word: &str) -> bool {
        let rest = self.rest();
        if rest.len() >= word.len() && rest[..word.len()].eq_ignore_ascii_case(word) {
            let boundary = rest[word.len()..].chars().next();
            if boundary.is_none_or(|c| !c.is_alphanumeric() && c != '_') {
                for _ in word.chars() {
                    self.bump();
                }
                return true;
            }
        }
        false
    }

    fn read_hex(&mut self, digits: usize) -> Result<char, SyntaxError> {
        let mut value = 0u32;
        for _ in 0..digits {
            let c = self
                .peek()
                .filter(char::is_ascii_hexdigit)
                .ok_or_else(|| self.error("bad unicode escape"))?;
            self.bump();
            value = value * 16 + c.to_digit(16).unwrap_or(0);
        }
        char::from_u32(value).ok_or_else(|| self.error("unicode escape is not a scalar value"))
    }

    fn read_uchar(&mut self) -> Result<char, SyntaxError> {
        match self.bump() {
            Some('u') => self.read_hex(4),
            Some('U') => self.read_hex(8),
            _ => Err(self.error("bad escape")),
        }
    }

    pub(crate) fn parse_iri(&mut self) -> Result<Iri, SyntaxError> {
        let (line, column) = (self.line, self.column);
        self.expect('<')?;
        let mut value = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated IRI")),
                Some('>') => break,
                Some('\\') => value.push(self.read_uchar()?),
                Some(c) if c <= ' ' || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') => {
                    return Err(self.error(format!("character {c:?} not allowed in IRI")));
                }
                Some(c) => value.push(c),
            }
        }
        Iri::new(value).map_err(|e| SyntaxError {
            line,
            column,
            message: e.to_string(),
        })
    }

    fn parse_blank(&mut self) -> Result<BlankNode, SyntaxError> {
        self.expect('_')?;
        self.expect(':')?;
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '#' | ';' | ',') {
                break;
            }
            self.bump();
        }
        let mut label = &self.text[start..self.pos];
        // a trailing dot terminates the statement, not the label
        while label.ends_with('.') {
            label = &label[..label.len() - 1];
            self.pos -= 1;
            self.column -= 1;
        }
        if !is_blank_label(label) {
            return Err(self.error(format!("invalid blank node label {label:?}")));
        }
        Ok(BlankNode::new(label).expect("label checked"))
    }

    fn parse_literal(&mut self) -> Result<Literal, SyntaxError> {
        self.expect('"')?;
        let mut lexical = String::new();
        loop {
            if matches!(self.peek(), None | Some('\n' | '\r')) {
                return Err(self.error("unterminated string literal"));
            }
            match self.bump() {
                None => unreachable!(),
                Some('"') => break,
                Some('\\') => {
                    let c = match self.peek() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{C}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u' | 'U') => {
                            lexical.push(self.read_uchar()?);
                            continue;
                        }
                        _ => return Err(self.error("bad escape sequence")),
                    };
                    self.bump();
                    lexical.push(c);
                }
                Some(c) => lexical.push(c),
            }
        }
        match self.peek() {
            Some('@') => {
                self.bump();
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                    self.bump();
                }
                let tag = &self.text[start..self.pos];
                if !is_language_tag(tag) {
                    return Err(self.error(format!("invalid language tag {tag:?}")));
                }
                Ok(Literal::lang(lexical, tag).expect("tag checked"))
            }
            Some('^') => {
                self.bump();
                self.expect('^')?;
                let datatype = self.parse_iri()?;
                if datatype.as_str() == RDF_LANG_STRING {
                    return Err(self.error("language-tagged string without a language tag"));
                }
                Ok(Literal::typed(lexical, datatype))
            }
            _ => Ok(Literal::string(lexical)),
        }
    }

    pub(crate) fn parse_term(&mut self) -> Result<Term, SyntaxError> {
        match self.peek() {
            Some('<') => self.parse_iri().map(Term::Iri),
            Some('_') => self.parse_blank().map(Term::Blank),
            Some('"') => self.parse_literal().map(Term::Literal),
            Some('?' | '$') => Err(self.error("variables are not allowed here")),
            Some(c) => Err(self.error(format!("unexpected character {c:?}"))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    pub(crate) fn parse_subject(&mut self) -> Result<Subject, SyntaxError> {
        let (line, column) = (self.line, self.column);
        self.parse_term()?.to_subject().ok_or(SyntaxError {
            line,
            column,
            message: "literal in subject position".into(),
        })
    }

    pub(crate) fn parse_predicate(&mut self) -> Result<Iri, SyntaxError> {
        if self.peek() != Some('<') {
            return Err(self.error("predicate must be an IRI"));
        }
        self.parse_iri()
    }

    /// Parses `subject predicate object` separated by inline whitespace.
    pub(crate) fn parse_triple_terms(&mut self) -> Result<(Subject, Iri, Term), SyntaxError> {
        let subject = self.parse_subject()?;
        self.skip_inline_ws();
        let predicate = self.parse_predicate()?;
        self.skip_inline_ws();
        let object = self.parse_term()?;
        Ok((subject, predicate, object))
    }
}

/// Parses N-Quads (and therefore N-Triples) text. LF and CRLF line endings
/// are both accepted.
pub fn parse_nquads(text: &str) -> Result<Dataset, SyntaxError> {
    let text = text.strip_prefix('\u{FEFF}').unwrap_or(text);
    let mut cur = Cursor::new(text);
    let mut dataset = Dataset::new();
    loop {
        cur.skip_ws_and_comments();
        if cur.at_end() {
            break;
        }
        let (subject, predicate, object) = cur.parse_triple_terms()?;
        cur.skip_inline_ws();
        let graph = match cur.peek() {
            Some('<') => Some(cur.parse_iri()?),
            Some('_') => return Err(cur.error("blank node graph labels are not supported")),
            Some('.') => None,
            _ => return Err(cur.error("expected graph label or '.'")),
        };
        cur.skip_inline_ws();
        cur.expect('.')?;
        cur.skip_inline_ws();
        match cur.peek() {
            None | Some('\n') | Some('\r') | Some('#') => {}
            Some(_) => return Err(cur.error("expected end of line after '.'")),
        }
        dataset.insert(Quad {
            subject,
            predicate,
            object,
            graph,
        });
    }
    Ok(dataset)
}

/// Canonical N-Quads: sorted lines, LF endings, trailing newline, and the
/// empty string for an empty dataset.
pub fn serialize_nquads(dataset: &Dataset) -> String {
    let mut lines: Vec<([String; 4], &Quad)> =
        dataset.iter().map(|q| (q.canonical_key(), q)).collect();
    lines.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out = String::new();
    for ([graph, subject, predicate, object], _) in lines {
        let _ = write!(out, "{subject} {predicate} {object}");
        if !graph.is_empty() {
            out.push(' ');
            out.push_str(&graph);
        }
        out.push_str(" .\n");
    }
    out
}

/// Sorts quads into canonical order.
pub fn canonical_order<'a>(quads: impl IntoIterator<Item = &'a Quad>) -> Vec<&'a Quad> {
    let mut keyed: Vec<_> = quads.into_iter().map(|q| (q.canonical_key(), q)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.into_iter().map(|(_, q)| q).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_triple() {
        let ds = parse_nquads("<http://ex.org/s> <http://ex.org/p> \"v\" .").unwrap();
        assert_eq!(ds.len(), 1);
        let q = ds.iter().next().unwrap();
        assert_eq!(q.graph, None);
        assert_eq!(q.object, Term::Literal(Literal::string("v")));
    }

    #[test]
    fn named_graph() {
        let ds =
            parse_nquads("<http://ex.org/s> <http://ex.org/p> \"v\" <http://ex.org/g> .").unwrap();
        assert_eq!(
            ds.iter().next().unwrap().graph.as_ref().unwrap().as_str(),
            "http://ex.org/g"
        );
    }

    #[test]
    fn relative_predicate_rejected() {
        let err = parse_nquads("<http://ex.org/s> <p> \"v\" .").unwrap_err();
        assert_eq!(err.line, 1);
        assert_eq!(err.column, 19);
    }

    #[test]
    fn syntax_errors_are_located() {
        let text = "<http://a/s> <http://a/p> <http://a/o> .\n\n<http://a/s> <http://a/p> \"x\"";
        let err = parse_nquads(text).unwrap_err();
        assert_eq!(err.line, 3);
        assert!(parse_nquads("<http://a/s> <http://a/p> \"x\\q\" .").is_err());
        assert!(parse_nquads("\"lit\" <http://a/p> <http://a/o> .").is_err());
        assert!(parse_nquads(
            "<http://a/s> <http://a/p> <http://a/o> . <http://a/s> <http://a/p> <http://a/o> ."
        )
        .is_err());
    }

    #[test]
    fn crlf_comments_and_blank_nodes() {
        let text = "# header\r\n_:b1 <http://a/p> _:b2 . # trailing\r\n<http://a/s> <http://a/p> \"x\"@en-GB .\r\n";
        let ds = parse_nquads(text).unwrap();
        assert_eq!(ds.len(), 2);
    }

    #[test]
    fn blank_node_followed_by_dot() {
        let ds = parse_nquads("<http://a/s> <http://a/p> _:b1.").unwrap();
        assert_eq!(ds.iter().next().unwrap().object.to_string(), "_:b1");
    }

    #[test]
    fn unicode_escapes_decode() {
        let ds = parse_nquads("<http://a/\\u00E9> <http://a/p> \"\\U0001F600\\u0041\" .").unwrap();
        let q = ds.iter().next().unwrap();
        assert_eq!(q.subject.to_string(), "<http://a/é>");
        assert_eq!(q.object.as_literal().unwrap().lexical(), "😀A");
    }

    #[test]
    fn empty_dataset_serializes_to_empty_text() {
        assert_eq!(serialize_nquads(&Dataset::new()), "");
    }

    #[test]
    fn serialization_is_order_independent() {
        let a = "<http://a/s> <http://a/p> \"1\" <http://a/g> .\n";
        let b = "<http://a/s> <http://a/p> \"2\" .\n";
        let x = parse_nquads(&format!("{a}{b}")).unwrap();
        let y = parse_nquads(&format!("{b}{a}")).unwrap();
        assert_eq!(serialize_nquads(&x), serialize_nquads(&y));
        // default graph sorts first
        assert_eq!(serialize_nquads(&x), format!("{b}{a}"));
    }

    #[test]
    fn explicit_string_datatype_is_canonicalized() {
        let ds = parse_nquads(
            "<http://a/s> <http://a/p> \"v\"^^<http://www.w3.org/2001/XMLSchema#string> .",
        )
        .unwrap();
        assert_eq!(serialize_nquads(&ds), "<http://a/s> <http://a/p> \"v\" .\n");
    }

    #[test]
    fn escapes_survive() {
        let lit = Literal::string("q\" b\\ n\n t\t r\r");
        let ds: Dataset = [Quad::new(
            Iri::new("http://a/s").unwrap(),
            Iri::new("http://a/p").unwrap(),
            lit,
            None,
        )]
        .into_iter()
        .collect();
        assert_eq!(parse_nquads(&serialize_nquads(&ds)).unwrap(), ds);
    }
}
