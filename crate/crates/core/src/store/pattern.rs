use std::collections::BTreeMap;

use crate::rdf::{Iri, Quad, Subject, Term};

use super::Store;

/// One variable-to-term assignment.
pub type Solution = BTreeMap<String, Term>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternTerm {
    Term(Term),
    Variable(String),
    Any,
}

impl PatternTerm {
    pub fn var(name: &str) -> Self {
        PatternTerm::Variable(name.to_owned())
    }
}

impl From<Term> for PatternTerm {
    fn from(t: Term) -> Self {
        PatternTerm::Term(t)
    }
}

impl From<Iri> for PatternTerm {
    fn from(i: Iri) -> Self {
        PatternTerm::Term(Term::Iri(i))
    }
}

/// Graph position of a pattern. A variable only ever binds named graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphPattern {
    Any,
    Default,
    Named(Iri),
    Variable(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadPattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
    pub graph: GraphPattern,
}

impl QuadPattern {
    pub fn any() -> Self {
        QuadPattern {
            subject: PatternTerm::Any,
            predicate: PatternTerm::Any,
            object: PatternTerm::Any,
            graph: GraphPattern::Any,
        }
    }

    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for p in [&self.subject, &self.predicate, &self.object] {
            if let PatternTerm::Variable(v) = p {
                out.push(v.as_str());
            }
        }
        if let GraphPattern::Variable(v) = &self.graph {
            out.push(v.as_str());
        }
        out
    }

    /// Replaces variables already bound in `solution` by their values.
    fn substitute(&self, solution: &Solution) -> QuadPattern {
        let sub = |p: &PatternTerm| match p {
            PatternTerm::Variable(v) => solution
                .get(v)
                .map(|t| PatternTerm::Term(t.clone()))
                .unwrap_or_else(|| p.clone()),
            other => other.clone(),
        };
        let graph = match &self.graph {
            GraphPattern::Variable(v) => match solution.get(v) {
                Some(Term::Iri(g)) => GraphPattern::Named(g.clone()),
                // bound to something that can never name a graph
                Some(_) => GraphPattern::Default,
                None => self.graph.clone(),
            },
            other => other.clone(),
        };
        QuadPattern {
            subject: sub(&self.subject),
            predicate: sub(&self.predicate),
            object: sub(&self.object),
            graph,
        }
    }

    /// Unifies the pattern with one quad, extending `solution`.
    pub fn unify(&self, quad: &Quad, solution: &Solution) -> Option<Solution> {
        if let (GraphPattern::Variable(_), None) = (&self.graph, &quad.graph) {
            return None;
        }
        let mut out = solution.clone();
        let subject: Term = quad.subject.clone().into();
        let predicate = Term::Iri(quad.predicate.clone());
        for (p, value) in [
            (&self.subject, &subject),
            (&self.predicate, &predicate),
            (&self.object, &quad.object),
        ] {
            bind(p, value, &mut out)?;
        }
        match (&self.graph, &quad.graph) {
            (GraphPattern::Any, _) => {}
            (GraphPattern::Default, None) => {}
            (GraphPattern::Default, Some(_)) => return None,
            (GraphPattern::Named(g), Some(h)) if g == h => {}
            (GraphPattern::Named(_), _) => return None,
            (GraphPattern::Variable(v), Some(h)) => bind(
                &PatternTerm::Variable(v.clone()),
                &Term::Iri(h.clone()),
                &mut out,
            )?,
            (GraphPattern::Variable(_), None) => return None,
        }
        Some(out)
    }
}

fn bind(pattern: &PatternTerm, value: &Term, solution: &mut Solution) -> Option<()> {
    match pattern {
        PatternTerm::Any => Some(()),
        PatternTerm::Term(t) => (t == value).then_some(()),
        PatternTerm::Variable(v) => match solution.get(v) {
            Some(existing) => (existing == value).then_some(()),
            None => {
                solution.insert(v.clone(), value.clone());
                Some(())
            }
        },
    }
}

/// Deterministic order: by the canonical serialization of bound terms.
pub(crate) fn sort_solutions(solutions: &mut [Solution]) {
    solutions.sort_by_cached_key(|s| {
        s.iter()
            .map(|(k, v)| (k.clone(), v.to_string()))
            .collect::<Vec<_>>()
    });
}

impl Store {
    fn candidates<'a>(&'a self, pattern: &QuadPattern) -> Box<dyn Iterator<Item = &'a Quad> + 'a> {
        let subject = match &pattern.subject {
            PatternTerm::Term(t) => match t.to_subject() {
                Some(s) => Some(s),
                // literal subject can never match
                None => return Box::new(std::iter::empty()),
            },
            _ => None,
        };
        let predicate = match &pattern.predicate {
            PatternTerm::Term(Term::Iri(p)) => Some(p.clone()),
            PatternTerm::Term(_) => return Box::new(std::iter::empty()),
            _ => None,
        };
        match (subject, predicate, &pattern.graph) {
            (Some(s), Some(p), _) => Box::new(self.subject_predicate_quads(&s, &p)),
            (Some(s), None, _) => Box::new(self.subject_quads(&s)),
            (None, _, GraphPattern::Named(g)) => Box::new(self.graph(Some(g))),
            (None, _, GraphPattern::Default) => Box::new(self.graph(None)),
            _ => Box::new(self.iter()),
        }
    }

    fn match_with(&self, pattern: &QuadPattern, solution: &Solution) -> Vec<Solution> {
        let bound = pattern.substitute(solution);
        self.candidates(&bound)
            .filter_map(|q| bound.unify(q, solution))
            .collect()
    }

    /// All quads unifying with `pattern`, as variable bindings.
    pub fn match_pattern(&self, pattern: &QuadPattern) -> Vec<Solution> {
        let mut out = self.match_with(pattern, &Solution::new());
        sort_solutions(&mut out);
        out
    }

    /// Quads matching the pattern (ignoring variable bindings).
    pub fn matching_quads<'a>(
        &'a self,
        pattern: &'a QuadPattern,
    ) -> impl Iterator<Item = &'a Quad> + 'a {
        let empty = Solution::new();
        self.candidates(pattern)
            .filter(move |q| pattern.unify(q, &empty).is_some())
    }

    /// Conjunctive query: joins per-pattern bindings on shared variables.
    pub fn bgp_query(&self, patterns: &[QuadPattern]) -> Vec<Solution> {
        let mut solutions = vec![Solution::new()];
        for pattern in patterns {
            solutions = solutions
                .iter()
                .flat_map(|s| self.match_with(pattern, s))
                .collect();
            if solutions.is_empty() {
                break;
            }
        }
        sort_solutions(&mut solutions);
        solutions
    }
}

pub fn bgp_query(store: &Store, patterns: &[QuadPattern]) -> Vec<Solution> {
    store.bgp_query(patterns)
}

/// Convenience for building a subject-position pattern from an IRI.
pub fn subject_term(iri: &Iri) -> PatternTerm {
    PatternTerm::Term(Subject::Iri(iri.clone()).into())
}
