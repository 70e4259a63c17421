use std::collections::{BTreeMap, BTreeSet};

use super::{AuditProfile, CheckResult, FairReport, Outcome};
use crate::provenance::Provenance;
use crate::rdf::{parse_nquads, serialize_nquads, Dataset, Iri, Quad, Subject, Term};
use crate::store::{GraphPattern, PatternTerm, QuadPattern, Store};
use crate::vocab::{Role, Vocabulary};
use crate::workflow::{format_allowed, Workflow};

struct Ctx<'a> {
    store: &'a Store,
    provenance: &'a Provenance,
    workflow: &'a Workflow,
    vocab: &'a Vocabulary,
    profile: &'a AuditProfile,
    /// Record graphs by topic.
    records: BTreeMap<Iri, Vec<Iri>>,
}

struct Results<'s> {
    subject: &'s Iri,
    out: Vec<CheckResult>,
}

impl Results<'_> {
    fn push(&mut self, id: &'static str, outcome: Outcome, evidence: impl Into<String>) {
        self.out.push(CheckResult {
            check_id: id,
            subject: self.subject.clone(),
            outcome,
            evidence: evidence.into(),
        });
    }

    fn found(&mut self, id: &'static str, quad: Option<&Quad>, missing: impl FnOnce() -> String) {
        match quad {
            Some(q) => self.push(id, Outcome::Pass, q.to_string()),
            None => self.push(id, Outcome::Fail, missing()),
        }
    }

    fn na(&mut self, id: &'static str, why: &str) {
        self.push(id, Outcome::NotApplicable, why);
    }
}

fn is_open_web_iri(iri: &Iri, schemes: &[String]) -> bool {
    schemes.iter().any(|s| s.eq_ignore_ascii_case(iri.scheme())) && iri.host().is_some()
}

impl<'a> Ctx<'a> {
    fn term(&self, role: Role) -> &'a Iri {
        self.vocab.term(role)
    }

    fn first(&self, s: &Iri, role: Role, graph: Option<&Iri>) -> Option<&'a Quad> {
        let subject = Subject::Iri(s.clone());
        let mut quads = self
            .store
            .subject_predicate_quads(&subject, self.term(role));
        match graph {
            Some(g) => quads.find(|q| q.graph.as_ref() == Some(g)),
            None => quads.next(),
        }
    }

    fn first_iri(&self, s: &Iri, role: Role, graph: Option<&Iri>) -> Option<&'a Quad> {
        let subject = Subject::Iri(s.clone());
        self.store
            .subject_predicate_quads(&subject, self.term(role))
            .find(|q| {
                q.object.as_iri().is_some() && graph.is_none_or(|g| q.graph.as_ref() == Some(g))
            })
    }

    fn in_records(&self, obj: &Iri, s: &Iri, role: Role) -> Option<&'a Quad> {
        self.records
            .get(obj)
            .into_iter()
            .flatten()
            .find_map(|g| self.first(s, role, Some(g)))
    }

    fn missing(&self, s: &Iri, role: Role) -> String {
        format!("no {} {} quad", s, self.term(role))
    }

    fn object_checks(&self, obj: &Iri, digital: bool) -> Vec<CheckResult> {
        let mut r = Results {
            subject: obj,
            out: Vec::new(),
        };
        if is_open_web_iri(obj, &["http".into(), "https".into()]) {
            r.push(
                "OBJ-F1",
                Outcome::Pass,
                format!("{obj} is a resolvable IRI"),
            );
        } else {
            r.push(
                "OBJ-F1",
                Outcome::Fail,
                format!("{obj} is not an http(s) IRI"),
            );
        }
        let rdf_type = Vocabulary::rdf_type();
        let described = self
            .store
            .subject_quads(&Subject::Iri(obj.clone()))
            .find(|q| q.predicate != rdf_type);
        r.found("OBJ-F2", described, || {
            format!("{obj} has no descriptive quads")
        });

        if !digital {
            for id in [
                "OBJ-A1", "OBJ-A2", "OBJ-A3", "OBJ-A4", "OBJ-I1", "OBJ-R1", "OBJ-R2",
            ] {
                r.na(id, "physical object without digital files");
            }
            return r.out;
        }
        r.found(
            "OBJ-A1",
            self.first(obj, Role::StorageLocation, None),
            || self.missing(obj, Role::StorageLocation),
        );
        let subject = Subject::Iri(obj.clone());
        let access = self
            .store
            .subject_predicate_quads(&subject, self.term(Role::AccessUrl))
            .find(|q| {
                q.object
                    .as_iri()
                    .is_some_and(|u| is_open_web_iri(u, &self.profile.access_schemes))
            });
        r.found("OBJ-A2", access, || {
            format!(
                "no {obj} {} quad with an open-scheme IRI",
                self.term(Role::AccessUrl)
            )
        });

        let assets: Vec<_> = self.workflow.assets_of(obj).collect();
        match assets.first() {
            Some(a) => r.push(
                "OBJ-A3",
                Outcome::Pass,
                format!("{} asset versions, e.g. {}", assets.len(), a.id),
            ),
            None => r.push(
                "OBJ-A3",
                Outcome::Fail,
                format!("no asset versions of {obj}"),
            ),
        }
        r.found(
            "OBJ-A4",
            self.first(obj, Role::BackupLocation, None),
            || self.missing(obj, Role::BackupLocation),
        );

        if assets.is_empty() {
            r.na("OBJ-I1", "no asset versions to inspect");
        } else {
            let technique = self.workflow.technique_for(obj);
            let bad: Vec<String> = assets
                .iter()
                .filter(|a| !format_allowed(a, &self.profile.constraints, technique))
                .map(|a| format!("{} ({})", a.id, a.format))
                .collect();
            if bad.is_empty() {
                let formats: BTreeSet<&str> = assets.iter().map(|a| a.format.as_str()).collect();
                r.push(
                    "OBJ-I1",
                    Outcome::Pass,
                    format!(
                        "formats {}",
                        formats.into_iter().collect::<Vec<_>>().join(", ")
                    ),
                );
            } else {
                r.push(
                    "OBJ-I1",
                    Outcome::Fail,
                    format!("disallowed formats: {}", bad.join(", ")),
                );
            }
        }

        let dated = self
            .workflow
            .counterpart(obj)
            .and_then(|cho| self.workflow.phases(cho).next().map(|p| (cho, p)));
        match dated {
            Some((cho, p)) => {
                let end = p.end.map_or("open".to_owned(), |e| e.to_string());
                r.push(
                    "OBJ-R1",
                    Outcome::Pass,
                    format!("{} of {cho}: {} .. {end}", p.kind, p.start),
                );
            }
            None => r.push(
                "OBJ-R1",
                Outcome::Fail,
                format!("no dated workflow phase for {obj}"),
            ),
        }
        r.found("OBJ-R2", self.first_iri(obj, Role::Licence, None), || {
            format!(
                "no {obj} {} quad with an IRI object",
                self.term(Role::Licence)
            )
        });
        r.out
    }

    fn metadata_checks(&self, obj: &Iri) -> Vec<CheckResult> {
        let mut r = Results {
            subject: obj,
            out: Vec::new(),
        };
        let graphs = self.records.get(obj).cloned().unwrap_or_default();
        let record_quads: Vec<&Quad> = graphs
            .iter()
            .flat_map(|g| self.store.graph(Some(g)))
            .collect();
        let no_record = || format!("no metadata record has {obj} as primary topic");
        let own = record_quads
            .iter()
            .copied()
            .find(|q| q.subject.as_iri() == Some(obj));
        r.found("MET-F1", own, no_record);
        r.found(
            "MET-F2",
            self.in_records(obj, obj, Role::Registration),
            || self.missing(obj, Role::Registration),
        );
        r.found(
            "MET-A1",
            self.in_records(obj, obj, Role::AccessRights),
            || self.missing(obj, Role::AccessRights),
        );

        let on_record_or_object = |role: Role| -> Vec<&Quad> {
            record_quads
                .iter()
                .copied()
                .filter(|q| &q.predicate == self.term(role))
                .filter(|q| {
                    q.subject
                        .as_iri()
                        .is_some_and(|s| s == obj || graphs.contains(s))
                })
                .collect()
        };
        let schema = on_record_or_object(Role::ConformsTo);
        r.found("MET-I1", schema.first().copied(), || {
            format!(
                "no {} quad on {obj} or its record",
                self.term(Role::ConformsTo)
            )
        });
        let formats: BTreeSet<&Term> = on_record_or_object(Role::HasFormat)
            .into_iter()
            .map(|q| &q.object)
            .collect();
        if formats.len() >= 2 {
            let listed: Vec<String> = formats.iter().map(|t| t.to_string()).collect();
            r.push(
                "MET-I2",
                Outcome::Pass,
                format!("serializations {}", listed.join(", ")),
            );
        } else {
            r.push(
                "MET-I2",
                Outcome::Fail,
                format!("{} serialization(s) listed, need 2", formats.len()),
            );
        }
        let authority = record_quads.iter().copied().find(|q| {
            q.object
                .as_iri()
                .is_some_and(|o| self.profile.is_authority(o))
        });
        r.found("MET-I3", authority, || {
            "no link into an authority file".to_owned()
        });

        r.found(
            "MET-R1",
            self.in_records(obj, obj, Role::RightsHolder),
            || self.missing(obj, Role::RightsHolder),
        );
        r.found("MET-R2", self.in_records(obj, obj, Role::Licence), || {
            self.missing(obj, Role::Licence)
        });
        match (
            self.in_records(obj, obj, Role::Keeper),
            self.in_records(obj, obj, Role::Creator),
        ) {
            (Some(k), Some(c)) => r.push("MET-R3", Outcome::Pass, format!("{k}\n{c}")),
            (k, _) => {
                let role = if k.is_none() {
                    Role::Keeper
                } else {
                    Role::Creator
                };
                r.push("MET-R3", Outcome::Fail, self.missing(obj, role));
            }
        }
        r.out
    }

    fn record_checks(&self, g: &Iri) -> Vec<CheckResult> {
        let mut r = Results {
            subject: g,
            out: Vec::new(),
        };
        let primary_topic = self.term(Role::PrimaryTopic);
        let topic = self
            .store
            .subject_predicate_quads(&Subject::Iri(g.clone()), primary_topic)
            .find(|q| q.graph.as_ref() == Some(g))
            .and_then(|q| q.object.as_iri());

        match topic {
            Some(t) if t != g && is_open_web_iri(g, &["http".into(), "https".into()]) => {
                r.push("REC-F1", Outcome::Pass, format!("record {g} describes {t}"))
            }
            Some(_) => r.push(
                "REC-F1",
                Outcome::Fail,
                format!("{g} is not a distinct http(s) IRI"),
            ),
            None => r.push(
                "REC-F1",
                Outcome::Fail,
                format!("{g} declares no {primary_topic}"),
            ),
        }

        let quads: Dataset = self.store.graph(Some(g)).cloned().collect();
        match parse_nquads(&serialize_nquads(&quads)) {
            Ok(back) if back == quads => r.push(
                "REC-A1",
                Outcome::Pass,
                format!("{} quads round-trip as N-Quads", quads.len()),
            ),
            Ok(_) => r.push(
                "REC-A1",
                Outcome::Fail,
                "N-Quads round trip changed the record",
            ),
            Err(e) => r.push(
                "REC-A1",
                Outcome::Fail,
                format!("record does not parse: {e}"),
            ),
        }

        let pattern = QuadPattern {
            subject: PatternTerm::var("s"),
            predicate: PatternTerm::var("p"),
            object: PatternTerm::var("o"),
            graph: GraphPattern::Named(g.clone()),
        };
        let solutions = self.store.bgp_query(&[pattern]).len();
        if solutions > 0 {
            r.push(
                "REC-A2",
                Outcome::Pass,
                format!("?s ?p ?o in {g} returns {solutions} solutions"),
            );
        } else {
            r.push(
                "REC-A2",
                Outcome::Fail,
                format!("?s ?p ?o in {g} returns nothing"),
            );
        }

        match topic {
            Some(t) => {
                let subject = Subject::Iri(t.clone());
                let (present, missing): (Vec<&Iri>, Vec<&Iri>) =
                    self.profile.required_fields.iter().partition(|p| {
                        self.store
                            .subject_predicate_quads(&subject, p)
                            .any(|q| q.graph.as_ref() == Some(g))
                    });
                let total = self.profile.required_fields.len();
                let coverage = if total == 0 {
                    1.0
                } else {
                    present.len() as f64 / total as f64
                };
                let mut evidence = format!("{}/{} required fields", present.len(), total);
                if !missing.is_empty() {
                    let names: Vec<String> = missing.iter().map(|m| m.to_string()).collect();
                    evidence.push_str(&format!(" (missing {})", names.join(", ")));
                }
                let outcome = if coverage + 1e-9 >= self.profile.quality_threshold {
                    Outcome::Pass
                } else {
                    Outcome::Fail
                };
                r.push("REC-I1", outcome, evidence);
            }
            None => r.push("REC-I1", Outcome::Fail, "record has no topic to cover"),
        }

        match topic.and_then(|t| self.provenance.chain(t).map(|c| (t, c))) {
            Some((t, chain)) => {
                let first = &chain.snapshots[0];
                let attributed = chain.snapshots.iter().all(|s| !s.attributed_to.is_empty());
                match (&first.primary_source, attributed) {
                    (Some(src), true) => r.push(
                        "REC-R1",
                        Outcome::Pass,
                        format!(
                            "{} snapshots of {t}; created {} by {} from {src}",
                            chain.snapshots.len(),
                            first.generated_at,
                            first.attributed_to[0]
                        ),
                    ),
                    (None, _) => r.push(
                        "REC-R1",
                        Outcome::Fail,
                        format!("creation snapshot of {t} names no primary source"),
                    ),
                    (_, false) => r.push(
                        "REC-R1",
                        Outcome::Fail,
                        format!("a snapshot of {t} names no agent"),
                    ),
                }
                let latest = chain.latest();
                match latest.attributed_to.first() {
                    Some(a) => r.push(
                        "REC-R2",
                        Outcome::Pass,
                        format!("{} attributed to {a}", latest.iri),
                    ),
                    None => r.push(
                        "REC-R2",
                        Outcome::Fail,
                        format!("{} names no agent", latest.iri),
                    ),
                }
            }
            None => {
                r.push(
                    "REC-R1",
                    Outcome::Fail,
                    "no provenance chain for the record's topic",
                );
                r.push(
                    "REC-R2",
                    Outcome::Fail,
                    "no provenance chain for the record's topic",
                );
            }
        }

        r.found("REC-R3", self.first_iri(g, Role::Licence, Some(g)), || {
            format!(
                "no {g} {} quad with an IRI object",
                self.term(Role::Licence)
            )
        });
        r.out
    }
}

/// Evaluates every registry check: object and object-metadata checks for
/// each CHO and DCHO, record checks for each named graph.
pub fn run_audit(
    store: &Store,
    provenance: &Provenance,
    workflow: &Workflow,
    vocab: &Vocabulary,
    profile: &AuditProfile,
) -> FairReport {
    let rdf_type = Vocabulary::rdf_type();
    let cho_class = Term::Iri(vocab.term(Role::ChoClass).clone());
    let dcho_class = Term::Iri(vocab.term(Role::DchoClass).clone());
    let mut objects: BTreeMap<Iri, bool> = BTreeMap::new();
    for q in store.iter().filter(|q| q.predicate == rdf_type) {
        let Some(s) = q.subject.as_iri() else {
            continue;
        };
        if q.object == dcho_class {
            objects.insert(s.clone(), true);
        } else if q.object == cho_class {
            objects.entry(s.clone()).or_insert(false);
        }
    }

    let primary_topic = vocab.term(Role::PrimaryTopic);
    let mut records: BTreeMap<Iri, Vec<Iri>> = BTreeMap::new();
    for q in store.iter().filter(|q| &q.predicate == primary_topic) {
        if let (Some(g), Some(s), Some(t)) = (&q.graph, q.subject.as_iri(), q.object.as_iri()) {
            if g == s {
                records.entry(t.clone()).or_default().push(g.clone());
            }
        }
    }

    let ctx = Ctx {
        store,
        provenance,
        workflow,
        vocab,
        profile,
        records,
    };
    let mut results = Vec::new();
    for (obj, digital) in &objects {
        results.extend(ctx.object_checks(obj, *digital));
        results.extend(ctx.metadata_checks(obj));
    }
    for g in store.named_graphs() {
        results.extend(ctx.record_checks(&g));
    }
    FairReport::from_results(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_catalog() {
        let report = run_audit(
            &Store::new(),
            &Provenance::new(),
            &Workflow::new(),
            &Vocabulary::default(),
            &AuditProfile::default(),
        );
        assert!(report.results.is_empty());
        assert!(report.summary.values().all(|t| *t == Default::default()));
        assert_eq!(report.summary.len(), 12);
    }
}
