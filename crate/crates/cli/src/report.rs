use std::collections::BTreeMap;

use roybounds::IntervalBound;
use serde::Serialize;
use serde_json::Value;

use crate::args::Format;

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub source: String,
    pub rows: usize,
    pub weight_total: f64,
    pub filters: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: Vec<String>,
    pub subcommand: String,
    pub input: InputDigest,
    pub seed: Option<u64>,
    pub status: String,
    pub diagnostics: Vec<String>,
    pub bounds: BTreeMap<String, IntervalBound>,
    pub details: BTreeMap<String, Value>,
}

impl Report {
    pub fn new(command: Vec<String>, subcommand: &str) -> Self {
        Report {
            command,
            subcommand: subcommand.into(),
            input: InputDigest { source: "none".into(), rows: 0, weight_total: 0.0, filters: vec![] },
            seed: None,
            status: "ok".into(),
            diagnostics: vec![],
            bounds: BTreeMap::new(),
            details: BTreeMap::new(),
        }
    }

    pub fn bound(&mut self, name: &str, b: IntervalBound) {
        self.bounds.insert(name.into(), b);
    }

    pub fn detail<T: Serialize>(&mut self, name: &str, v: &T) {
        let v = serde_json::to_value(v).unwrap_or(Value::Null);
        self.details.insert(name.into(), v);
    }

    pub fn reject(&mut self, msg: impl Into<String>) {
        self.status = "rejected".into();
        self.diagnostics.push(msg.into());
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        self.diagnostics.push(msg.into());
    }

    pub fn is_rejected(&self) -> bool {
        self.status == "rejected"
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Csv => self.render_csv(),
        }
    }

    fn render_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(["name", "lo", "hi", "sharp", "label"]).expect("in-memory write");
        for (name, b) in &self.bounds {
            w.write_record([name.as_str(), &num(b.lo), &num(b.hi), &b.sharp.to_string(), &b.label])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

pub fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        v.to_string()
    }
}
