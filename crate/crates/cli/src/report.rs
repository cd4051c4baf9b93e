//! Report rendering. JSON keeps field order as built; CSV flattens nested
//! objects into dotted column names.

use std::io::{self, Write};

use serde_json::{Map, Value};

use crate::config::Format;

/// A finished command result.
pub struct Report {
    pub json: Value,
    pub csv: Csv,
    /// Set when an acceptance band or criterion failed.
    pub failed: bool,
}

pub enum Csv {
    /// Already rendered.
    Raw(String),
    Table { columns: Vec<String>, rows: Vec<Vec<String>> },
}

impl Report {
    pub fn new(json: Value, csv: Csv) -> Self {
        Report { json, csv, failed: false }
    }

    /// One JSON object, one CSV row.
    pub fn single(object: Value) -> Self {
        let csv = table(&[], std::slice::from_ref(&object));
        Report::new(object, csv)
    }

    /// A JSON array of objects and the matching CSV table. `empty_columns`
    /// is the header used when there are no rows.
    pub fn rows(rows: Vec<Value>, empty_columns: &[&str]) -> Self {
        let csv = table(empty_columns, &rows);
        Report::new(Value::Array(rows), csv)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("values always serialize");
                s.push('\n');
                s
            }
            Format::Csv => match &self.csv {
                Csv::Raw(s) => s.clone(),
                Csv::Table { columns, rows } => csv_lines(columns, rows),
            },
        }
    }

    pub fn write_to(&self, format: Format, out: &mut dyn Write) -> io::Result<()> {
        out.write_all(self.render(format).as_bytes())?;
        out.flush()
    }
}

fn flatten_into(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten_into(&key(k), v, out);
            }
        }
        other => out.push((prefix.to_string(), cell(other))),
    }
}

fn cell(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(";"),
        Value::Object(_) => serde_json::to_string(value).expect("values always serialize"),
        other => other.to_string(),
    }
}

/// Flattens objects into a table; columns are the union in first-seen
/// order and missing cells stay empty.
pub fn table(empty_columns: &[&str], rows: &[Value]) -> Csv {
    let flat: Vec<Vec<(String, String)>> = rows
        .iter()
        .map(|r| {
            let mut out = Vec::new();
            flatten_into("", r, &mut out);
            out
        })
        .collect();
    let mut columns: Vec<String> = Vec::new();
    for row in &flat {
        for (k, _) in row {
            if !columns.contains(k) {
                columns.push(k.clone());
            }
        }
    }
    if flat.is_empty() {
        columns = empty_columns.iter().map(|s| s.to_string()).collect();
    }
    let rows = flat
        .into_iter()
        .map(|row| {
            let mut cells = vec![String::new(); columns.len()];
            for (k, v) in row {
                let i = columns.iter().position(|c| *c == k).expect("column collected above");
                cells[i] = v;
            }
            cells
        })
        .collect();
    Csv::Table { columns, rows }
}

fn csv_lines(columns: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns).expect("writing to memory");
    for row in rows {
        w.write_record(row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("cells are UTF-8")
}

/// Adds `key: value` at the front of an object.
pub fn prepend(value: Value, key: &str, first: Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut out = Map::new();
            out.insert(key.to_string(), first);
            out.extend(map);
            Value::Object(out)
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn empty_reports() {
        let r = Report::rows(Vec::new(), &["index", "a1"]);
        assert_eq!(r.render(Format::Json), "[]\n");
        assert_eq!(r.render(Format::Csv), "index,a1\n");
    }

    #[test]
    fn nested_fields_flatten_in_order() {
        let r = Report::rows(
            vec![
                json!({"n": 3, "joint": {"kind": "exact", "value": "10/9"}}),
                json!({"n": 8, "joint": {"kind": "sampled", "mean": 1.5}}),
            ],
            &[],
        );
        assert_eq!(
            r.render(Format::Csv),
            "n,joint.kind,joint.value,joint.mean\n3,exact,10/9,\n8,sampled,,1.5\n"
        );
    }

    #[test]
    fn quoting_and_lists() {
        let r = Report::single(json!({"label": "(2,1)", "warnings": ["x", "y \"z\""]}));
        assert_eq!(r.render(Format::Csv), "label,warnings\n\"(2,1)\",\"x;y \"\"z\"\"\"\n");
        let back: Value = serde_json::from_str(&r.render(Format::Json)).unwrap();
        assert_eq!(back, r.json);
    }

    #[test]
    fn prepend_keeps_order() {
        let v = prepend(json!({"b": 1, "a": 2}), "z", json!(0));
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"z":0,"b":1,"a":2}"#);
    }
}
