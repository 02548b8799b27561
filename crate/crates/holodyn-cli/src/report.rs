//! Structured text reports: UTF-8, key-sorted, one record per line, in
//! either plain text (`key=value` pairs) or JSON-object-per-line form.

use std::collections::BTreeMap;
use std::fmt::Display;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Debug, Default)]
pub struct Record {
    fields: BTreeMap<String, String>,
}

impl Record {
    pub fn new() -> Self {
        Record::default()
    }

    pub fn set(mut self, key: &str, value: impl Display) -> Self {
        self.fields.insert(key.to_string(), value.to_string());
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.get(key).map(|s| s.as_str())
    }

    fn escape(s: &str) -> String {
        s.replace('\\', "\\\\").replace('"', "\\\"")
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self
                .fields
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(" "),
            Format::Json => {
                let body = self
                    .fields
                    .iter()
                    .map(|(k, v)| format!("\"{}\":\"{}\"", Self::escape(k), Self::escape(v)))
                    .collect::<Vec<_>>()
                    .join(",");
                format!("{{{body}}}")
            }
        }
    }
}

pub fn render_all(records: &[Record], format: Format) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.render(format));
        out.push('\n');
    }
    out
}

/// Format a complex number compactly for reports.
pub fn fmt_complex(z: num_complex::Complex64) -> String {
    format!("{:.12e}{:+.12e}i", z.re, z.im)
}
