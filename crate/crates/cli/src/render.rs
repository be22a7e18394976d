use std::collections::BTreeMap;

use clap::ValueEnum;
use krivine_core::{IdentityId, IdentityReport};
use serde::Serialize;

use crate::constants::{Computed, ConstantId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// One output object. Every number that carries precision is a decimal
/// string with exactly `digits` significant digits.
#[derive(Clone, Debug, Serialize)]
pub struct Record {
    pub target: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub digits_agreed: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms_used: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
    pub paper_anchor: String,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, String>,
}

impl Record {
    pub fn from_constant(id: ConstantId, computed: Computed, digits: u32, runtime_ms: Option<u64>) -> Self {
        Record {
            target: id.name().to_string(),
            value: Some(computed.value.to_decimal(digits)),
            lhs: None,
            rhs: None,
            residual: None,
            tolerance: None,
            digits_agreed: None,
            passed: None,
            terms_used: computed.terms_used,
            runtime_ms,
            paper_anchor: id.formula().to_string(),
            params: computed.params.into_iter().collect(),
        }
    }

    pub fn from_report(report: IdentityReport, digits: u32, timing: bool) -> Self {
        let mut params = report.params;
        let anchor = params
            .remove("formula")
            .unwrap_or_else(|| report.id.formula().to_string());
        let terms_used = params.remove("terms_used").and_then(|t| t.parse().ok());
        Record {
            target: report.id.to_string(),
            value: None,
            lhs: report.lhs.map(|v| v.to_decimal(digits)),
            rhs: report.rhs.map(|v| v.to_decimal(digits)),
            residual: report.residual.map(|v| v.to_decimal(digits)),
            tolerance: Some(report.tolerance.to_decimal(digits)),
            digits_agreed: Some(report.digits_agreed),
            passed: Some(report.passed),
            terms_used,
            runtime_ms: timing.then_some(report.runtime_ms),
            paper_anchor: anchor,
            params,
        }
    }
}

pub fn json_one(record: &Record) -> String {
    let mut s = serde_json::to_string_pretty(record).expect("record serializes");
    s.push('\n');
    s
}

pub fn json_many(records: &[Record]) -> String {
    let mut s = serde_json::to_string_pretty(records).expect("records serialize");
    s.push('\n');
    s
}

pub fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

pub fn finish_csv(writer: csv::Writer<Vec<u8>>) -> String {
    let bytes = writer.into_inner().expect("in-memory writer flushes");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

pub fn csv_records(records: &[Record]) -> String {
    let timing = records.iter().any(|r| r.runtime_ms.is_some());
    let mut w = csv_writer();
    let mut header = vec![
        "target",
        "value",
        "lhs",
        "rhs",
        "residual",
        "digits_agreed",
        "passed",
        "terms_used",
    ];
    if timing {
        header.push("runtime_ms");
    }
    header.push("paper_anchor");
    w.write_record(&header).expect("in-memory write");
    for r in records {
        let opt = |v: &Option<String>| v.clone().unwrap_or_default();
        let mut row = vec![
            r.target.clone(),
            opt(&r.value),
            opt(&r.lhs),
            opt(&r.rhs),
            opt(&r.residual),
            r.digits_agreed.map(|d| d.to_string()).unwrap_or_default(),
            r.passed.map(|p| p.to_string()).unwrap_or_default(),
            r.terms_used.map(|t| t.to_string()).unwrap_or_default(),
        ];
        if timing {
            row.push(r.runtime_ms.map(|t| t.to_string()).unwrap_or_default());
        }
        row.push(r.paper_anchor.clone());
        w.write_record(&row).expect("in-memory write");
    }
    finish_csv(w)
}

pub fn text_constant(r: &Record) -> String {
    let mut out = format!("{} = {}\n", r.target, r.value.as_deref().unwrap_or(""));
    if let Some(t) = r.terms_used {
        out.push_str(&format!("  terms_used: {t}\n"));
    }
    for (k, v) in &r.params {
        out.push_str(&format!("  {k}: {v}\n"));
    }
    if let Some(ms) = r.runtime_ms {
        out.push_str(&format!("  runtime_ms: {ms}\n"));
    }
    out
}

/// Short form of a long decimal string for human-readable residuals.
fn short(value: &str) -> String {
    match value.parse::<f64>() {
        Ok(0.0) => "0".to_string(),
        Ok(v) => format!("{v:.2e}"),
        Err(_) => value.to_string(),
    }
}

pub fn text_reports(records: &[Record]) -> String {
    let width = records.iter().map(|r| r.target.len()).max().unwrap_or(0);
    let mut out = String::new();
    let mut passed = 0;
    for r in records {
        let ok = r.passed == Some(true);
        if ok {
            passed += 1;
        }
        let status = if ok { "PASS" } else { "FAIL" };
        out.push_str(&format!("{status}  {:<width$}", r.target));
        match (&r.residual, r.params.get("error")) {
            (Some(res), _) => {
                out.push_str(&format!(
                    "  residual={}  tolerance={}  digits_agreed={}",
                    short(res),
                    short(r.tolerance.as_deref().unwrap_or("")),
                    r.digits_agreed.unwrap_or(0)
                ));
            }
            (None, Some(err)) => out.push_str(&format!("  error: {err}")),
            (None, None) => {}
        }
        if let Some(ms) = r.runtime_ms {
            out.push_str(&format!("  runtime_ms={ms}"));
        }
        out.push('\n');
    }
    out.push_str(&format!("{passed}/{} identities passed\n", records.len()));
    out
}

pub fn list(format: Format) -> String {
    let constants: Vec<(&str, &str)> = ConstantId::ALL.iter().map(|c| (c.name(), c.formula())).collect();
    let identities: Vec<(String, &str)> = IdentityId::all().iter().map(|i| (i.to_string(), i.formula())).collect();
    match format {
        Format::Text => {
            let width = identities.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
            let mut out = String::from("Constants:\n");
            for (name, formula) in &constants {
                out.push_str(&format!("  {name:<width$}  {formula}\n"));
            }
            out.push_str("Identities:\n");
            for (name, formula) in &identities {
                out.push_str(&format!("  {name:<width$}  {formula}\n"));
            }
            out
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Entry<'a> {
                name: &'a str,
                paper_anchor: &'a str,
            }
            #[derive(Serialize)]
            struct Listing<'a> {
                constants: Vec<Entry<'a>>,
                identities: Vec<Entry<'a>>,
            }
            let listing = Listing {
                constants: constants
                    .iter()
                    .map(|(n, f)| Entry { name: n, paper_anchor: f })
                    .collect(),
                identities: identities
                    .iter()
                    .map(|(n, f)| Entry { name: n, paper_anchor: f })
                    .collect(),
            };
            let mut s = serde_json::to_string_pretty(&listing).expect("listing serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut w = csv_writer();
            w.write_record(["kind", "name", "paper_anchor"]).expect("in-memory write");
            for (name, formula) in &constants {
                w.write_record(["constant", name, formula]).expect("in-memory write");
            }
            for (name, formula) in &identities {
                w.write_record(["identity", name.as_str(), formula]).expect("in-memory write");
            }
            finish_csv(w)
        }
    }
}
