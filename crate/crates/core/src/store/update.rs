//! Reversible deltas and the ground `INSERT DATA` / `DELETE DATA` update
//! language used to serialize them.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::rdf::{canonical_order, Cursor, Dataset, Iri, Quad, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UpdateError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("quad appears in both DELETE DATA and INSERT DATA: {0}")]
    Overlap(Quad),
}

/// A pair of disjoint quad sets: what to remove and what to add.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Delta {
    deletes: Dataset,
    inserts: Dataset,
}

impl Delta {
    pub fn new(deletes: Dataset, inserts: Dataset) -> Result<Self, UpdateError> {
        if let Some(q) = deletes.intersection(&inserts).into_iter().next() {
            return Err(UpdateError::Overlap(q));
        }
        Ok(Delta { deletes, inserts })
    }

    pub fn inserting(inserts: Dataset) -> Self {
        Delta {
            deletes: Dataset::new(),
            inserts,
        }
    }

    pub fn deleting(deletes: Dataset) -> Self {
        Delta {
            deletes,
            inserts: Dataset::new(),
        }
    }

    pub fn deletes(&self) -> &Dataset {
        &self.deletes
    }

    pub fn inserts(&self) -> &Dataset {
        &self.inserts
    }

    pub fn is_empty(&self) -> bool {
        self.deletes.is_empty() && self.inserts.is_empty()
    }

    pub fn quads(&self) -> impl Iterator<Item = &Quad> + '_ {
        self.deletes.iter().chain(self.inserts.iter())
    }

    /// Swaps inserts and deletes.
    pub fn invert(&self) -> Delta {
        Delta {
            deletes: self.inserts.clone(),
            inserts: self.deletes.clone(),
        }
    }
}

pub fn invert_delta(delta: &Delta) -> Delta {
    delta.invert()
}

/// Parses a `;`-separated sequence of `INSERT DATA { ... }` and
/// `DELETE DATA { ... }` operations. Block bodies hold ground triples in
/// N-Triples syntax and `GRAPH <iri> { ... }` groups. Keywords are
/// case-insensitive; variables and prefixed names are rejected.
pub fn parse_update(text: &str) -> Result<Delta, UpdateError> {
    let mut cur = Cursor::new(text);
    let mut deletes = Dataset::new();
    let mut inserts = Dataset::new();
    cur.skip_ws_and_comments();
    if cur.at_end() {
        return Ok(Delta::default());
    }
    loop {
        cur.skip_ws_and_comments();
        let target = if cur.eat_keyword("INSERT") {
            &mut inserts
        } else if cur.eat_keyword("DELETE") {
            &mut deletes
        } else {
            return Err(cur.error("expected INSERT or DELETE").into());
        };
        cur.skip_ws_and_comments();
        if !cur.eat_keyword("DATA") {
            return Err(cur.error("expected DATA").into());
        }
        cur.skip_ws_and_comments();
        cur.expect('{')?;
        parse_quad_data(&mut cur, target)?;
        cur.skip_ws_and_comments();
        match cur.peek() {
            None => break,
            Some(';') => {
                cur.bump();
                cur.skip_ws_and_comments();
                // a trailing separator is tolerated
                if cur.at_end() {
                    break;
                }
            }
            Some(_) => return Err(cur.error("expected ';' or end of update").into()),
        }
    }
    Delta::new(deletes, inserts)
}

fn parse_quad_data(cur: &mut Cursor<'_>, out: &mut Dataset) -> Result<(), SyntaxError> {
    loop {
        cur.skip_ws_and_comments();
        match cur.peek() {
            Some('}') => {
                cur.bump();
                return Ok(());
            }
            None => return Err(cur.error("unterminated block")),
            _ => {}
        }
        if cur.eat_keyword("GRAPH") {
            cur.skip_ws_and_comments();
            let graph = cur.parse_iri()?;
            cur.skip_ws_and_comments();
            cur.expect('{')?;
            parse_triples(cur, Some(&graph), out)?;
            continue;
        }
        parse_triple(cur, None, out)?;
    }
}

fn parse_triples(
    cur: &mut Cursor<'_>,
    graph: Option<&Iri>,
    out: &mut Dataset,
) -> Result<(), SyntaxError> {
    loop {
        cur.skip_ws_and_comments();
        match cur.peek() {
            Some('}') => {
                cur.bump();
                return Ok(());
            }
            None => return Err(cur.error("unterminated GRAPH block")),
            _ => parse_triple(cur, graph, out)?,
        }
    }
}

fn parse_triple(
    cur: &mut Cursor<'_>,
    graph: Option<&Iri>,
    out: &mut Dataset,
) -> Result<(), SyntaxError> {
    let subject = cur.parse_subject()?;
    cur.skip_ws_and_comments();
    let predicate = cur.parse_predicate()?;
    cur.skip_ws_and_comments();
    let object = cur.parse_term()?;
    cur.skip_ws_and_comments();
    // the final triple of a block may omit its dot
    if cur.peek() == Some('.') {
        cur.bump();
    } else if cur.peek() != Some('}') {
        return Err(cur.error("expected '.'"));
    }
    out.insert(Quad {
        subject,
        predicate,
        object,
        graph: graph.cloned(),
    });
    Ok(())
}

/// Canonical text: one `DELETE DATA` block (when there are deletes) followed
/// by one `INSERT DATA` block (when there are inserts). Default-graph triples
/// come first, then one `GRAPH` group per named graph; everything in
/// canonical order.
pub fn serialize_update(delta: &Delta) -> String {
    let mut parts = Vec::new();
    if !delta.deletes.is_empty() {
        parts.push(format!("DELETE DATA {{ {}}}", block_body(&delta.deletes)));
    }
    if !delta.inserts.is_empty() {
        parts.push(format!("INSERT DATA {{ {}}}", block_body(&delta.inserts)));
    }
    parts.join("; ")
}

fn block_body(quads: &Dataset) -> String {
    let mut groups: BTreeMap<String, Vec<&Quad>> = BTreeMap::new();
    for q in canonical_order(quads) {
        let key = q.graph.as_ref().map(Iri::to_string).unwrap_or_default();
        groups.entry(key).or_default().push(q);
    }
    let mut out = String::new();
    for (graph, quads) in groups {
        if !graph.is_empty() {
            out.push_str(&format!("GRAPH {graph} {{ "));
        }
        for q in quads {
            out.push_str(&format!("{} {} {} . ", q.subject, q.predicate, q.object));
        }
        if !graph.is_empty() {
            out.push_str("} ");
        }
    }
    out
}
