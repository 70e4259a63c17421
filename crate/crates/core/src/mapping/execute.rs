use std::collections::HashMap;

use crate::rdf::{Dataset, Iri, Literal, Quad, Subject, Term};

use super::dsl::{MappingDocument, ObjectSpec, TripleMap};
use super::table::{Row, Table};
use super::template::{Position, Template};
use super::MappingError;

/// Runs every triple map over its source table. Rows are processed in
/// order; a quad whose subject, graph or object expansion is skipped is
/// simply not emitted.
pub fn execute_mapping(doc: &MappingDocument, tables: &[Table]) -> Result<Dataset, MappingError> {
    let by_name: HashMap<&str, &Table> = tables.iter().map(|t| (t.name(), t)).collect();
    for map in &doc.triple_maps {
        if !by_name.contains_key(map.source.as_str()) {
            return Err(MappingError::MissingTable(map.source.clone()));
        }
    }
    let mut out = Dataset::new();
    for map in &doc.triple_maps {
        let table = by_name[map.source.as_str()];
        for (i, row) in table.rows().enumerate() {
            emit_row(map, &row, i + 1, &mut out)?;
        }
    }
    Ok(out)
}

fn expand_iri(
    map: &TripleMap,
    template: &Template,
    row: &Row<'_>,
    row_no: usize,
) -> Result<Option<Iri>, MappingError> {
    let Some(text) = template.expand(row, Position::Iri) else {
        return Ok(None);
    };
    Iri::new(text.clone())
        .map(Some)
        .map_err(|_| MappingError::InvalidExpandedIri {
            map: map.name.clone(),
            row: row_no,
            text,
        })
}

fn emit_row(
    map: &TripleMap,
    row: &Row<'_>,
    row_no: usize,
    out: &mut Dataset,
) -> Result<(), MappingError> {
    let Some(subject) = expand_iri(map, &map.subject, row, row_no)? else {
        return Ok(());
    };
    let graph = match &map.graph {
        Some(g) => match expand_iri(map, g, row, row_no)? {
            Some(g) => Some(g),
            None => return Ok(()),
        },
        None => None,
    };
    for (predicate, value) in &map.pairs {
        let object = match value {
            ObjectSpec::Constant(term) => Some(term.clone()),
            ObjectSpec::IriTemplate(t) => expand_iri(map, t, row, row_no)?.map(Term::Iri),
            ObjectSpec::LiteralTemplate {
                template,
                datatype,
                language,
            } => template.expand(row, Position::Literal).map(|lexical| {
                let literal = match (datatype, language) {
                    (Some(dt), _) => Literal::typed(lexical, dt.clone()),
                    (None, Some(lang)) => {
                        Literal::lang(lexical, lang.clone()).expect("tag validated at parse time")
                    }
                    (None, None) => Literal::string(lexical),
                };
                Term::Literal(literal)
            }),
        };
        if let Some(object) = object {
            out.insert(Quad {
                subject: Subject::Iri(subject.clone()),
                predicate: predicate.clone(),
                object,
                graph: graph.clone(),
            });
        }
    }
    Ok(())
}
