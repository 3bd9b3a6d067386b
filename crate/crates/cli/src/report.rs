//! Machine-readable reports and their text rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Unknown,
    /// The item's inputs violate a precondition (e.g. a non-GProj diagram).
    Invalid,
}

impl Status {
    pub fn tag(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Unknown => "UNKNOWN",
            Status::Invalid => "INVALID",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Item {
    pub id: String,
    pub suite: String,
    pub label: String,
    pub status: Status,
    pub detail: Value,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub unknown: usize,
    pub invalid: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub seed: u64,
    pub budget: usize,
    pub window: (i64, i64),
    /// Set when the scenario itself could not be loaded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub items: Vec<Item>,
    pub summary: Summary,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
}

/// Exit codes; when several apply, input errors win over failures, and
/// failures over unknown verdicts.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const UNKNOWN: i32 = 3;
}

impl Summary {
    pub fn of(items: &[Item]) -> Summary {
        let mut s = Summary::default();
        for i in items {
            match i.status {
                Status::Pass => s.pass += 1,
                Status::Fail => s.fail += 1,
                Status::Unknown => s.unknown += 1,
                Status::Invalid => s.invalid += 1,
            }
        }
        s
    }

    pub fn exit_code(&self) -> i32 {
        if self.invalid > 0 {
            exit::INPUT
        } else if self.fail > 0 {
            exit::FAILURE
        } else if self.unknown > 0 {
            exit::UNKNOWN
        } else {
            exit::PASS
        }
    }
}

impl Report {
    pub fn failed_to_load(scenario: &str, error: String) -> Report {
        Report {
            scenario: scenario.to_string(),
            seed: 0,
            budget: 0,
            window: (0, 0),
            error: Some(error),
            items: Vec::new(),
            summary: Summary::default(),
            exit_code: exit::INPUT,
            wall_ms: None,
        }
    }

    pub fn item(&self, id: &str) -> Option<&Item> {
        self.items.iter().find(|i| i.id == id)
    }

    /// One line per item, then the summary.
    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(e) = &self.error {
            let _ = writeln!(out, "error: {e}");
        }
        for i in &self.items {
            let _ = writeln!(out, "{:<8} {:<28} {}", i.status.tag(), i.id, i.label);
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "{} passed, {} failed, {} unknown, {} invalid (exit {})",
            s.pass, s.fail, s.unknown, s.invalid, self.exit_code
        );
        out
    }
}

/// Text rendering of one item. Objects print their keys in sorted order,
/// matrices one row per line.
pub fn explain(report: &Report, id: &str) -> Option<String> {
    let item = report.item(id)?;
    let mut out = format!("{} [{}] {}\n", item.id, item.status.tag(), item.label);
    let _ = writeln!(out, "scenario {} seed {} budget {}", report.scenario, report.seed, report.budget);
    render_value(&mut out, &item.detail, 1);
    Some(out)
}

fn is_matrix(v: &Value) -> bool {
    match v.as_array() {
        Some(rows) => !rows.is_empty() && rows.iter().all(|r| r.as_array().is_some_and(|r| r.iter().all(Value::is_number))),
        None => false,
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render_value(out: &mut String, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            for k in keys {
                let val = &map[k];
                if is_matrix(val) {
                    let _ = writeln!(out, "{pad}{k}:");
                    for row in val.as_array().into_iter().flatten() {
                        let cells: Vec<String> = row.as_array().into_iter().flatten().map(scalar).collect();
                        let _ = writeln!(out, "{pad}  [{}]", cells.join(" "));
                    }
                } else if val.is_object() || val.as_array().is_some_and(|a| a.iter().any(|x| x.is_object())) {
                    let _ = writeln!(out, "{pad}{k}:");
                    render_value(out, val, depth + 1);
                } else {
                    let _ = writeln!(out, "{pad}{k}: {}", scalar(val));
                }
            }
        }
        Value::Array(items) => {
            for (n, x) in items.iter().enumerate() {
                let _ = writeln!(out, "{pad}- [{n}]");
                render_value(out, x, depth + 1);
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{}", scalar(other));
        }
    }
}
