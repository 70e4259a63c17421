use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use super::{find_check, Facet, FairReport, Level, Outcome};
use crate::rdf::{serialize_nquads, Dataset, Iri, Literal, Quad};
use crate::vocab::{Vocabulary, DCT, HC};

pub const EARL: &str = "http://www.w3.org/ns/earl#";
pub const REPORT_GRAPH: &str = "urn:heritage-catalog:fair-report";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
    Rdf,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown report format {0:?} (expected text, csv or rdf)")]
pub struct UnknownFormat(pub String);

impl FromStr for ReportFormat {
    type Err = UnknownFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(ReportFormat::Text),
            "csv" => Ok(ReportFormat::Csv),
            "rdf" | "nquads" => Ok(ReportFormat::Rdf),
            _ => Err(UnknownFormat(s.to_owned())),
        }
    }
}

pub fn render_report(report: &FairReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => render_text(report),
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Rdf => serialize_nquads(&report_dataset(report)),
    }
}

fn render_text(report: &FairReport) -> String {
    let mut out = String::new();
    for level in Level::ALL {
        let _ = writeln!(out, "== {}", level.name());
        for facet in Facet::ALL {
            let t = report
                .summary
                .get(&(level, facet))
                .copied()
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "  [{}] pass={} fail={} not_applicable={}",
                facet.letter(),
                t.pass,
                t.fail,
                t.not_applicable
            );
            for r in &report.results {
                let check = find_check(r.check_id).expect("registered check");
                if check.level == level && check.facet == facet && r.outcome != Outcome::Pass {
                    let evidence = r.evidence.replace('\n', "; ");
                    let _ = writeln!(
                        out,
                        "    {} {} {}: {}",
                        r.outcome,
                        r.check_id,
                        r.subject.as_str(),
                        evidence
                    );
                }
            }
        }
    }
    out
}

fn render_csv(report: &FairReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["check_id", "subject", "outcome", "evidence"])
        .expect("writing to memory");
    for r in &report.results {
        w.write_record([
            r.check_id,
            r.subject.as_str(),
            r.outcome.name(),
            &r.evidence,
        ])
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv of utf-8 fields")
}

fn iri(text: String) -> Iri {
    Iri::new(text).expect("well-formed report IRI")
}

/// One EARL assertion per result, all in the report graph.
pub fn report_dataset(report: &FairReport) -> Dataset {
    let graph = Some(iri(REPORT_GRAPH.into()));
    let earl = |local: &str| iri(format!("{EARL}{local}"));
    let mut out = Dataset::new();
    for (n, r) in report.results.iter().enumerate() {
        let node = iri(format!("{REPORT_GRAPH}:result:{}", n + 1));
        let outcome = match r.outcome {
            Outcome::Pass => "passed",
            Outcome::Fail => "failed",
            Outcome::NotApplicable => "inapplicable",
        };
        let mut add = |p: Iri, o: crate::rdf::Term| {
            out.insert(Quad::new(node.clone(), p, o, graph.clone()));
        };
        add(Vocabulary::rdf_type(), earl("Assertion").into());
        add(earl("test"), iri(format!("{HC}{}", r.check_id)).into());
        add(earl("subject"), r.subject.clone().into());
        add(earl("outcome"), earl(outcome).into());
        add(
            iri(format!("{DCT}description")),
            Literal::string(r.evidence.clone()).into(),
        );
    }
    out
}
