//! Self-describing analysis reports: one ordered document rendered either
//! as structured text or JSON. Reports are byte-stable for fixed inputs and
//! seeds; wall-clock timings are only included on request.

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "tbgroup.report.v1";

#[derive(Debug, Clone)]
pub struct Report {
    doc: Map<String, Value>,
}

impl Report {
    pub fn new(kind: &str) -> Self {
        let mut doc = Map::new();
        doc.insert("schema".into(), Value::String(SCHEMA.into()));
        doc.insert("kind".into(), Value::String(kind.into()));
        Self { doc }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.doc.insert(key.to_string(), value.into());
        self
    }

    pub fn set_value(&mut self, key: &str, value: Value) -> &mut Self {
        self.doc.insert(key.to_string(), value);
        self
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(&Value::Object(self.doc.clone()))
            .expect("report is valid JSON");
        out.push('\n');
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.doc {
            render(&mut out, key, value, 0);
        }
        out
    }
}

fn render(out: &mut String, key: &str, value: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match value {
        Value::Object(map) => {
            out.push_str(&format!("{pad}{key}:\n"));
            for (k, v) in map {
                render(out, k, v, indent + 1);
            }
        }
        Value::Array(items) if items.iter().any(Value::is_object) => {
            out.push_str(&format!("{pad}{key}:\n"));
            for (i, item) in items.iter().enumerate() {
                render(out, &format!("[{i}]"), item, indent + 1);
            }
        }
        Value::Array(items) => {
            let rendered: Vec<String> = items.iter().map(scalar).collect();
            out.push_str(&format!("{pad}{key}: [{}]\n", rendered.join(", ")));
        }
        other => {
            out.push_str(&format!("{pad}{key}: {}\n", scalar(other)));
        }
    }
}

fn scalar(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Helper for building ordered JSON objects in place.
pub fn object(entries: Vec<(&str, Value)>) -> Value {
    let mut map = Map::new();
    for (k, v) in entries {
        map.insert(k.to_string(), v);
    }
    Value::Object(map)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex::encode(hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_rendering_is_ordered_and_stable() {
        let mut r = Report::new("demo");
        r.set("alpha", 1);
        r.set_value("nested", object(vec![("x", 2.into()), ("y", Value::String("z".into()))]));
        r.set_value("list", Value::Array(vec![1.into(), 2.into()]));
        let text = r.to_text();
        let expected = "schema: tbgroup.report.v1\nkind: demo\nalpha: 1\nnested:\n  x: 2\n  y: z\nlist: [1, 2]\n";
        assert_eq!(text, expected);
        assert_eq!(text, r.to_text());
    }

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
