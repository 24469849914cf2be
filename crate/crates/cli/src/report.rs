use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{Command, Format};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    /// Reported without asserting anything.
    Info,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
            Status::Info => "info",
        }
    }
}

/// One row of output: an ideal, a lemma family, a B-set check, ...
#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ideal: Option<String>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbit_size: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub canonical_form: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub commutative: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Vec<(usize, usize, usize)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structure_constants_digest: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub millis: Option<u64>,
}

impl Record {
    pub fn new(kind: &'static str, status: Status) -> Self {
        Record {
            kind,
            ideal: None,
            status,
            orbit_size: None,
            canonical_form: None,
            rank: None,
            commutative: None,
            witnesses: None,
            structure_constants_digest: None,
            detail: None,
            millis: None,
        }
    }

    pub fn skipped(kind: &'static str, ideal: Option<String>, reason: String) -> Self {
        Record { ideal, detail: Some(reason), ..Record::new(kind, Status::Skipped) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: Command,
    pub ring: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition: Option<String>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub checks: Vec<Check>,
    pub records: Vec<Record>,
    pub passed: bool,
    /// SHA-256 of checks and records with timings removed.
    pub digest: String,
}

impl Report {
    pub fn finish(&mut self) {
        self.passed = self.checks.iter().all(|c| c.passed) && self.records.iter().all(|r| r.status != Status::Fail);
        let stripped: Vec<Record> = self.records.iter().cloned().map(|r| Record { millis: None, ..r }).collect();
        let body = serde_json::to_vec(&(&self.checks, &stripped)).expect("report serializes");
        self.digest = hex::encode(Sha256::digest(&body));
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("report serializes") + "\n",
            Format::Csv => self.render_csv(),
            Format::Table => self.render_table(),
        }
    }

    fn rows(&self) -> (Vec<&'static str>, Vec<Vec<String>>) {
        let header = vec!["kind", "ideal", "status", "orbit_size", "canonical_form", "rank", "commutative", "witnesses", "detail"];
        let opt = |x: Option<String>| x.unwrap_or_default();
        let rows = self
            .records
            .iter()
            .map(|r| {
                vec![
                    r.kind.to_string(),
                    opt(r.ideal.clone()),
                    r.status.as_str().to_string(),
                    opt(r.orbit_size.map(|x| x.to_string())),
                    opt(r.canonical_form.clone()),
                    opt(r.rank.map(|x| x.to_string())),
                    opt(r.commutative.map(|x| x.to_string())),
                    opt(r.witnesses.as_ref().map(|w| format!("{w:?}"))),
                    opt(r.detail.clone()),
                ]
            })
            .collect();
        (header, rows)
    }

    fn render_csv(&self) -> String {
        let (header, rows) = self.rows();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&header).expect("in-memory write");
        for row in rows {
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    fn render_table(&self) -> String {
        let (header, rows) = self.rows();
        let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: Vec<String>| {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(header.iter().map(|h| h.to_string()).collect());
        for row in rows {
            out += &line(row);
        }
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            out += &format!("{mark}  {}", c.name);
            if let Some(d) = &c.detail {
                out += &format!(" ({d})");
            }
            out += "\n";
        }
        out += if self.passed { "overall: PASS\n" } else { "overall: FAIL\n" };
        out
    }
}
