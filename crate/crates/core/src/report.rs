//! Exact-versus-asymptotic comparison records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::arith::Rational;

/// The exact side of a comparison.
///
/// `Float` is used only for reciprocal sums whose exact denominator is too
/// large to carry (see [`crate::analytics::EXACT_SUM_LIMIT`]); such reports
/// say so through [`CountReport::exact_is_float`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ExactValue {
    Integer(u64),
    Rational(Rational),
    Float(f64),
}

impl ExactValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            ExactValue::Integer(n) => *n as f64,
            ExactValue::Rational(r) => r.to_f64(),
            ExactValue::Float(v) => *v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub label: String,
    pub exact: ExactValue,
    pub main_term: f64,
    pub abs_error: f64,
    /// `None` when the main term is zero.
    pub rel_error: Option<f64>,
    pub params: BTreeMap<String, Value>,
}

pub const CSV_SCHEMA: &str = "count-report/1";
pub const CSV_COLUMNS: [&str; 8] = [
    "schema",
    "label",
    "exact",
    "exact_value",
    "main_term",
    "abs_error",
    "rel_error",
    "params",
];

impl CountReport {
    pub fn new(label: impl Into<String>, exact: ExactValue, main_term: f64) -> Self {
        let e = exact.to_f64();
        let abs_error = (e - main_term).abs();
        let rel_error = (main_term != 0.0).then(|| abs_error / main_term.abs());
        CountReport {
            label: label.into(),
            exact,
            main_term,
            abs_error,
            rel_error,
            params: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn exact_f64(&self) -> f64 {
        self.exact.to_f64()
    }

    pub fn exact_is_float(&self) -> bool {
        matches!(self.exact, ExactValue::Float(_))
    }

    /// One CSV record in [`CSV_COLUMNS`] order.
    pub fn csv_record(&self) -> Vec<String> {
        let exact = match &self.exact {
            ExactValue::Integer(n) => n.to_string(),
            ExactValue::Rational(r) => r.to_string(),
            ExactValue::Float(v) => fmt_f64(*v),
        };
        vec![
            CSV_SCHEMA.to_string(),
            self.label.clone(),
            exact,
            fmt_f64(self.exact_f64()),
            fmt_f64(self.main_term),
            fmt_f64(self.abs_error),
            self.rel_error.map(fmt_f64).unwrap_or_default(),
            serde_json::to_string(&self.params).expect("params serialize"),
        ]
    }

    /// CSV text (header plus one row per report).
    pub fn to_csv(reports: &[CountReport]) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS).expect("in-memory write");
        for r in reports {
            w.write_record(r.csv_record()).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}

/// 17 significant digits, enough to round-trip any double.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        let s = format!("{v:.16e}");
        // Normalize through parse so integers print cleanly.
        let back: f64 = s.parse().unwrap_or(v);
        if back == back.trunc() && back.abs() < 1e15 {
            format!("{back:.1}")
        } else {
            s
        }
    } else {
        v.to_string()
    }
}
