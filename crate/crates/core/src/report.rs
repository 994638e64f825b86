//! Verification reports: the JSON document written by `lpw verify`, its text
//! table and the per-suite CSV ratio tables.

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::verify::SuiteResult;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Serde adapter writing non-finite floats as the strings `"inf"`, `"-inf"`
/// and `"nan"`, which plain JSON numbers cannot carry.
pub mod num {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(v) => Ok(v),
            Repr::Text(s) => match s.as_str() {
                "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got \"{other}\""))),
            },
        }
    }
}

/// A float that survives a JSON round trip even when infinite.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Num(#[serde(with = "num")] pub f64);

impl From<f64> for Num {
    fn from(v: f64) -> Self {
        Num(v)
    }
}

impl Num {
    /// The value exactly as it appears in the JSON report.
    pub fn json(&self) -> String {
        serde_json::to_string(self).expect("floats always serialize")
    }
}

pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub pass: bool,
    pub config: RunConfig,
    pub suites: Vec<SuiteResult>,
}

impl Report {
    pub fn new(config: RunConfig, suites: Vec<SuiteResult>) -> Self {
        Report { version: REPORT_VERSION, pass: suites.iter().all(|s| s.pass), config, suites }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Report = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("report line {} column {}: {e}", e.line(), e.column())))?;
        if r.version != REPORT_VERSION {
            return Err(Error::Parse(format!("report version {} is not supported", r.version)));
        }
        Ok(r)
    }

    /// Fixed-width table of suite, min ratio, max ratio and verdict.
    pub fn table(&self) -> String {
        let cell = |v: Option<Num>| v.map_or_else(|| "-".to_string(), |n| n.json());
        let rows: Vec<[String; 4]> = self
            .suites
            .iter()
            .map(|s| [s.name.clone(), cell(s.min), cell(s.max), if s.pass { "pass" } else { "FAIL" }.to_string()])
            .collect();
        let header = ["suite".to_string(), "min".to_string(), "max".to_string(), "result".to_string()];
        let mut width = header.clone().map(|h| h.len());
        for r in &rows {
            for (w, c) in width.iter_mut().zip(r) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        for r in std::iter::once(&header).chain(&rows) {
            let line = format!("{:<a$}  {:>b$}  {:>c$}  {}", r[0], r[1], r[2], r[3], a = width[0], b = width[1], c = width[2]);
            let _ = writeln!(out, "{}", line.trim_end());
        }
        out
    }
}

/// CSV of every series of one suite: `series,ratio,label,value`.
pub fn suite_csv(s: &SuiteResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["series", "ratio", "label", "value"]).map_err(csv_err)?;
    for series in &s.series {
        for (label, v) in &series.points {
            let ratio = if series.ratio { "1" } else { "0" };
            w.write_record([series.name.as_str(), ratio, label.as_str(), v.json().trim_matches('"')]).map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Invalid(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Invalid(format!("csv: {e}"))
}
