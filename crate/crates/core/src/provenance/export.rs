use std::collections::BTreeMap;

use super::{snapshot_iri, ProvChain, ProvError, Provenance, Snapshot, SnapshotKind, Timestamp};
use crate::rdf::{Dataset, Iri, Literal, Quad, Subject, Term, RDF_TYPE};
use crate::store::{parse_update, serialize_update, Delta};

pub const SNAPSHOT_SEGMENT: &str = "/prov/se/";
pub const PROV_GRAPH_SUFFIX: &str = "/prov";

const PROV: &str = "http://www.w3.org/ns/prov#";
const OCO_UPDATE_QUERY: &str = "https://w3id.org/oc/ontology/hasUpdateQuery";
const XSD_DATE_TIME: &str = "http://www.w3.org/2001/XMLSchema#dateTime";

fn prov(local: &str) -> Iri {
    Iri::new(format!("{PROV}{local}")).expect("static IRI")
}

pub fn prov_graph_iri(entity: &Iri) -> Iri {
    Iri::new(format!("{}{PROV_GRAPH_SUFFIX}", entity.as_str())).expect("suffix keeps the IRI valid")
}

fn time_literal(t: Timestamp) -> Term {
    Term::Literal(Literal::typed(
        t.to_string(),
        Iri::new(XSD_DATE_TIME).expect("static IRI"),
    ))
}

fn snapshot_quads(s: &Snapshot, graph: &Iri, out: &mut Dataset) {
    let mut add = |p: Iri, o: Term| {
        out.insert(Quad::new(s.iri.clone(), p, o, Some(graph.clone())));
    };
    add(
        Iri::new(RDF_TYPE).expect("static IRI"),
        Term::Iri(prov("Entity")),
    );
    add(prov("specializationOf"), Term::Iri(s.entity.clone()));
    add(prov("generatedAtTime"), time_literal(s.generated_at));
    if let Some(t) = s.invalidated_at {
        add(prov("invalidatedAtTime"), time_literal(t));
    }
    for agent in &s.attributed_to {
        add(prov("wasAttributedTo"), Term::Iri(agent.clone()));
    }
    if let Some(src) = &s.primary_source {
        add(prov("hadPrimarySource"), Term::Iri(src.clone()));
    }
    if let Some(prev) = &s.derived_from {
        add(prov("wasDerivedFrom"), Term::Iri(prev.clone()));
    }
    if let Some(other) = &s.merged_from {
        add(prov("wasDerivedFrom"), Term::Iri(other.clone()));
    }
    if !s.update_query.is_empty() {
        add(
            Iri::new(OCO_UPDATE_QUERY).expect("static IRI"),
            Term::Literal(Literal::string(serialize_update(&s.update_query))),
        );
    }
}

impl ProvChain {
    pub fn to_dataset(&self) -> Dataset {
        let graph = prov_graph_iri(&self.entity);
        let mut out = Dataset::new();
        for s in &self.snapshots {
            snapshot_quads(s, &graph, &mut out);
        }
        out
    }
}

impl Provenance {
    /// The entity's provenance named graph.
    pub fn export_prov_graph(&self, entity: &Iri) -> Result<Dataset, ProvError> {
        self.chain(entity)
            .map(ProvChain::to_dataset)
            .ok_or_else(|| ProvError::NoSuchEntity(entity.clone()))
    }

    /// Every chain, one named graph per entity.
    pub fn to_dataset(&self) -> Dataset {
        let mut out = Dataset::new();
        for chain in self.chains() {
            out.extend(chain.to_dataset());
        }
        out
    }

    /// Rebuilds chains from exported provenance graphs and validates them.
    pub fn from_dataset(dataset: &Dataset) -> Result<Provenance, ProvError> {
        let mut by_snapshot: BTreeMap<Iri, Vec<&Quad>> = BTreeMap::new();
        for q in dataset.iter() {
            let Subject::Iri(s) = &q.subject else {
                return Err(malformed(&q.subject.to_string(), "blank-node snapshot"));
            };
            by_snapshot.entry(s.clone()).or_default().push(q);
        }
        let mut chains: BTreeMap<Iri, Vec<Snapshot>> = BTreeMap::new();
        for (iri, quads) in by_snapshot {
            let snapshot = read_snapshot(&iri, &quads)?;
            chains
                .entry(snapshot.entity.clone())
                .or_default()
                .push(snapshot);
        }
        let mut prov = Provenance::new();
        for (entity, mut snapshots) in chains {
            snapshots.sort_by_key(|s| s.index);
            let last = snapshots.len();
            for s in snapshots.iter_mut() {
                s.kind = if s.index == 1 {
                    SnapshotKind::Creation
                } else if s.index as usize == last && s.invalidated_at == Some(s.generated_at) {
                    SnapshotKind::Deletion
                } else if s.merged_from.is_some() {
                    SnapshotKind::Merge
                } else {
                    SnapshotKind::Modification
                };
            }
            let chain = ProvChain { entity, snapshots };
            chain
                .validate()
                .map_err(|reason| malformed(chain.entity.as_str(), &reason))?;
            prov.insert_chain(chain);
        }
        Ok(prov)
    }
}

fn malformed(entity: &str, reason: &str) -> ProvError {
    ProvError::MalformedChain {
        entity: entity.to_owned(),
        reason: reason.to_owned(),
    }
}

fn read_snapshot(iri: &Iri, quads: &[&Quad]) -> Result<Snapshot, ProvError> {
    let err = |reason: &str| malformed(iri.as_str(), reason);
    let (entity_text, index_text) = iri
        .as_str()
        .rsplit_once(SNAPSHOT_SEGMENT)
        .ok_or_else(|| err("not a snapshot IRI"))?;
    let index: u32 = index_text.parse().map_err(|_| err("bad snapshot index"))?;
    if index == 0 {
        return Err(err("bad snapshot index"));
    }
    let entity = Iri::new(entity_text).map_err(|_| err("bad entity IRI"))?;
    let graph = prov_graph_iri(&entity);

    let mut specialization = None;
    let mut generated = None;
    let mut invalidated = None;
    let mut agents = Vec::new();
    let mut source = None;
    let mut derived = Vec::new();
    let mut delta = Delta::default();
    let mut typed = false;
    for q in quads {
        if q.graph.as_ref() != Some(&graph) {
            return Err(err("snapshot outside its provenance graph"));
        }
        let p = q.predicate.as_str();
        let local = p.strip_prefix(PROV);
        let iri_object = || {
            q.object
                .as_iri()
                .cloned()
                .ok_or_else(|| err("expected an IRI object"))
        };
        let time_object = || -> Result<Timestamp, ProvError> {
            let lit = q
                .object
                .as_literal()
                .ok_or_else(|| err("expected a timestamp"))?;
            lit.lexical().parse().map_err(|_| err("bad timestamp"))
        };
        match (p, local) {
            (RDF_TYPE, _) => {
                typed |= q
                    .object
                    .as_iri()
                    .is_some_and(|o| o.as_str() == format!("{PROV}Entity"))
            }
            (_, Some("specializationOf")) => specialization = Some(iri_object()?),
            (_, Some("generatedAtTime")) => generated = Some(time_object()?),
            (_, Some("invalidatedAtTime")) => invalidated = Some(time_object()?),
            (_, Some("wasAttributedTo")) => agents.push(iri_object()?),
            (_, Some("hadPrimarySource")) => source = Some(iri_object()?),
            (_, Some("wasDerivedFrom")) => derived.push(iri_object()?),
            (OCO_UPDATE_QUERY, _) => {
                let text = q
                    .object
                    .as_literal()
                    .ok_or_else(|| err("update query is not a literal"))?;
                delta = parse_update(text.lexical())
                    .map_err(|e| err(&format!("bad update query: {e}")))?;
            }
            _ => return Err(err(&format!("unexpected property {p}"))),
        }
    }
    if !typed {
        return Err(err("missing prov:Entity type"));
    }
    if specialization.as_ref() != Some(&entity) {
        return Err(err("specializationOf does not match the snapshot IRI"));
    }
    let predecessor = (index > 1).then(|| snapshot_iri(&entity, index - 1));
    let derived_from = derived
        .iter()
        .find(|d| Some(*d) == predecessor.as_ref())
        .cloned();
    let mut others = derived
        .into_iter()
        .filter(|d| Some(d) != predecessor.as_ref());
    let merged_from = others.next();
    if others.next().is_some() {
        return Err(err("too many derivation links"));
    }
    agents.sort();
    Ok(Snapshot {
        iri: iri.clone(),
        entity,
        index,
        generated_at: generated.ok_or_else(|| err("missing generatedAtTime"))?,
        invalidated_at: invalidated,
        attributed_to: agents,
        primary_source: source,
        derived_from,
        merged_from,
        update_query: delta,
        kind: SnapshotKind::Modification,
    })
}
