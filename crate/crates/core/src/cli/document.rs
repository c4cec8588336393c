use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

use super::spec::MapSpecDocument;
use crate::error::{Error, Result};

/// A flat numeric table; nested arrays and objects of a row are spread over
/// columns `field_0`, `field_1`, … and `field_key`.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

fn flatten(prefix: &str, v: Value, out: &mut Vec<(String, Value)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}_{k}") };
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                flatten(&key(&k), v, out);
            }
        }
        Value::Array(a) => {
            for (i, v) in a.into_iter().enumerate() {
                flatten(&key(&i.to_string()), v, out);
            }
        }
        v => out.push((prefix.to_string(), v)),
    }
}

impl Table {
    pub fn from_rows<T: Serialize>(name: &str, rows: &[T]) -> Table {
        let mut columns = Vec::new();
        let mut out = Vec::new();
        for r in rows {
            let mut cells = Vec::new();
            flatten("", serde_json::to_value(r).expect("rows serialise"), &mut cells);
            if columns.is_empty() {
                columns = cells.iter().map(|c| c.0.clone()).collect();
            }
            out.push(cells.into_iter().map(|c| c.1).collect());
        }
        Table { name: name.to_string(), columns, rows: out }
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Value>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let io = |e: csv::Error| Error::Io(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns).map_err(io)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| match v {
                Value::Null => String::new(),
                Value::String(s) => s.clone(),
                v => v.to_string(),
            }))
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub measured: Value,
    pub expected: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Inputs {
    pub specs: Vec<MapSpecDocument>,
    pub perm: Option<String>,
    pub depth: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultDocument {
    pub command: String,
    pub version: String,
    pub inputs: Inputs,
    pub values: Map<String, Value>,
    pub tables: Vec<Table>,
    pub assertions: Vec<Assertion>,
    pub passed: bool,
}

impl ResultDocument {
    pub fn new(command: &str, inputs: Inputs) -> Self {
        ResultDocument {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            inputs,
            values: Map::new(),
            tables: Vec::new(),
            assertions: Vec::new(),
            passed: true,
        }
    }

    pub fn value(&mut self, name: &str, v: impl Serialize) {
        self.values.insert(name.to_string(), serde_json::to_value(v).expect("values serialise"));
    }

    pub fn table<T: Serialize>(&mut self, name: &str, rows: &[T]) {
        self.tables.push(Table::from_rows(name, rows));
    }

    pub fn assert(&mut self, name: &str, passed: bool, measured: impl Serialize, expected: impl Into<String>) {
        self.passed &= passed;
        self.assertions.push(Assertion {
            name: name.to_string(),
            passed,
            measured: serde_json::to_value(measured).expect("values serialise"),
            expected: expected.into(),
        });
    }

    pub fn get_table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialise")
    }
}
