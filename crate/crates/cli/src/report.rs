//! The JSON report every command prints. Objects serialize with sorted keys,
//! so a fixed invocation always yields the same bytes unless timings are on.

use std::time::Duration;

use prodone_core::{Certificate, GroupSpec};
use serde_json::{json, Map, Value};

pub struct Report {
    command: String,
    input: Map<String, Value>,
    group: Option<Value>,
    results: Value,
    elapsed: Option<Duration>,
}

impl Report {
    pub fn new(command: &str, group: Option<&GroupSpec>) -> Self {
        Report {
            command: command.to_string(),
            input: Map::new(),
            group: group.map(GroupSpec::to_json),
            results: Value::Null,
            elapsed: None,
        }
    }

    pub fn input(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.input.insert(key.to_string(), value.into());
        self
    }

    pub fn results(mut self, results: Value) -> Self {
        self.results = results;
        self
    }

    pub fn set_elapsed(&mut self, elapsed: Duration) {
        self.elapsed = Some(elapsed);
    }

    pub fn to_value(&self) -> Value {
        let mut out = Map::new();
        out.insert("command".into(), Value::String(self.command.clone()));
        out.insert("input".into(), Value::Object(self.input.clone()));
        if let Some(g) = &self.group {
            out.insert("group".into(), g.clone());
        }
        out.insert("results".into(), self.results.clone());
        if let Some(d) = self.elapsed {
            out.insert("timing".into(), json!({ "elapsed_ms": d.as_secs_f64() * 1000.0 }));
        }
        Value::Object(out)
    }

    pub fn render(&self, pretty: bool) -> String {
        let value = self.to_value();
        if pretty {
            table(&value)
        } else {
            value.to_string()
        }
    }
}

/// Tag for a value that is exact with no qualification.
pub fn exact() -> Value {
    json!({ "kind": "exact" })
}

/// Tag for a value computed exactly over a bounded scan.
pub fn exact_within_bound(bound: u32) -> Value {
    json!({ "kind": "exact_within_bound", "bound": bound })
}

pub fn atom_certificate(c: &Certificate) -> Value {
    match c {
        Certificate::Exact => exact(),
        Certificate::CompleteUpToLength(l) => json!({ "kind": "complete_up_to_length", "length": l }),
    }
}

/// One `path  value` line per leaf; arrays of scalars stay on one line.
fn table(value: &Value) -> String {
    let mut rows = Vec::new();
    flatten("", value, &mut rows);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    let join = |key: &str| {
        if prefix.is_empty() {
            key.to_string()
        } else {
            format!("{prefix}.{key}")
        }
    };
    match value {
        Value::Object(map) if !map.is_empty() => {
            for (k, v) in map {
                flatten(&join(k), v, rows);
            }
        }
        Value::Array(items) if items.iter().any(|v| v.is_object() || v.is_array()) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), v, rows);
            }
        }
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_sorted() {
        let r = Report::new("x", None)
            .input("zeta", 1)
            .input("alpha", 2)
            .results(json!({"b": 1, "a": 2}));
        assert_eq!(
            r.render(false),
            r#"{"command":"x","input":{"alpha":2,"zeta":1},"results":{"a":2,"b":1}}"#
        );
    }

    #[test]
    fn table_flattens_nested_values() {
        let r = Report::new("x", None).results(json!({"a": [1, 2], "b": [{"c": true}], "d": "text"}));
        let rows: Vec<Vec<String>> = r
            .render(true)
            .lines()
            .map(|l| l.split_whitespace().map(str::to_string).collect())
            .collect();
        for want in [["results.a", "[1,2]"], ["results.b.0.c", "true"], ["results.d", "text"]] {
            assert!(rows.iter().any(|r| r == &want), "{want:?}");
        }
    }
}
