//! JSONL records and CSV summaries.
//!
//! Records carry no precision or thread count, so reports from runs that
//! differ only in those settings compare byte for byte.

use std::collections::BTreeMap;
use std::path::Path;

use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};
use wb_core::hecke::LeviTransform;
use wb_core::sym::{Laurent, SymLaurent};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub suite: String,
    pub id: String,
    pub lhs: Value,
    pub rhs: Value,
    pub equal: bool,
    /// The rerun at precision + 8 produced the same payload.
    pub stable: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub windows: Vec<i64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub retries: Vec<u32>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub ledger: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Record {
    pub fn new(suite: &str, id: impl Into<String>, lhs: Value, rhs: Value, equal: bool) -> Self {
        Record {
            suite: suite.into(),
            id: id.into(),
            lhs,
            rhs,
            equal,
            stable: true,
            windows: Vec::new(),
            retries: Vec::new(),
            ledger: BTreeMap::new(),
            error: None,
        }
    }

    /// A case that could not be computed.
    pub fn failed(suite: &str, id: impl Into<String>, err: &anyhow::Error) -> Self {
        let mut r = Record::new(suite, id, Value::Null, Value::Null, false);
        r.error = Some(format!("{err:#}"));
        r
    }

    pub fn windows(mut self, w: impl IntoIterator<Item = i64>) -> Self {
        self.windows.extend(w);
        self
    }

    pub fn retries(mut self, r: impl IntoIterator<Item = u32>) -> Self {
        self.retries.extend(r);
        self
    }

    pub fn note(mut self, key: &str, v: impl Serialize) -> Self {
        self.ledger.insert(key.into(), serde_json::to_value(v).expect("serializable"));
        self
    }

    pub fn passed(&self) -> bool {
        self.equal && self.stable && self.error.is_none()
    }

    /// Everything but `stable` agrees.
    fn same_payload(&self, o: &Record) -> bool {
        Record { stable: o.stable, ..self.clone() } == *o
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub records: Vec<Record>,
}

impl Report {
    /// Marks each record stable when the rerun has the same payload.
    pub fn mark_stability(&mut self, rerun: &Report) {
        if rerun.records.len() != self.records.len() {
            self.records.iter_mut().for_each(|r| r.stable = false);
            return;
        }
        for (a, b) in self.records.iter_mut().zip(&rerun.records) {
            a.stable = a.same_payload(b);
        }
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(Record::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.passed())
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> anyhow::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["suite", "id", "equal", "stable", "error"])?;
        for r in &self.records {
            w.write_record([r.suite.as_str(), r.id.as_str(), &r.equal.to_string(), &r.stable.to_string(), r.error.as_deref().unwrap_or("")])?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    /// Writes `report.jsonl` and `summary.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> anyhow::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.jsonl"), self.to_jsonl())?;
        std::fs::write(dir.join("summary.csv"), self.to_csv()?)?;
        Ok(())
    }
}

pub fn rat(x: &BigRational) -> Value {
    Value::String(x.to_string())
}

/// A Laurent polynomial in `Q = q^-s`.
pub fn in_q(x: &Laurent) -> Value {
    Value::String(x.to_string_in("Q"))
}

/// Coefficients are Laurent in `u = q^(1/2)`.
fn in_u(x: &Laurent) -> Value {
    Value::String(x.to_string_in("u"))
}

fn key(exps: &[i64]) -> String {
    exps.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",")
}

/// `{exponent vector: coefficient}`.
pub fn sym(x: &SymLaurent) -> Value {
    let map: serde_json::Map<String, Value> = x.terms().iter().map(|(e, c)| (key(e), in_u(c))).collect();
    Value::Object(map)
}

/// `{"t0|t1": coefficient}` with one dominant weight per block.
pub fn levi(x: &LeviTransform) -> Value {
    let map: serde_json::Map<String, Value> =
        x.terms.iter().map(|(ts, c)| (ts.iter().map(|t| key(t)).collect::<Vec<_>>().join("|"), in_u(c))).collect();
    json!({ "blocks": x.blocks, "terms": map })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stability_compares_payloads() {
        let a = Report { records: vec![Record::new("s", "x", json!(1), json!(1), true)] };
        let mut b = a.clone();
        b.mark_stability(&a);
        assert!(b.passed());
        let mut c = a.clone();
        c.records[0].lhs = json!(2);
        b.mark_stability(&c);
        assert!(!b.passed());
        assert_eq!(a.to_csv().unwrap(), "suite,id,equal,stable,error\ns,x,true,true,\n");
        assert_eq!(a.to_jsonl(), "{\"suite\":\"s\",\"id\":\"x\",\"lhs\":1,\"rhs\":1,\"equal\":true,\"stable\":true}\n");
    }
}
