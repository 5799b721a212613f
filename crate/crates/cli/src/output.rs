//! Report envelope, JSON emission with 17 significant digits, and a markdown
//! rendering of the same document.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub seed: u64,
    pub tol: f64,
    pub budget: usize,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub op: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<Value>,
    pub tool_version: String,
}

/// Pretty JSON whose floats are written as `d.dddddddddddddddde±x`, i.e. 17
/// significant digits, which round-trips every `f64` exactly.
struct Sig17(PrettyFormatter<'static>);

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json(v: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(PrettyFormatter::new()));
    v.serialize(&mut ser).expect("in-memory write");
    let mut s = String::from_utf8(buf).expect("JSON is UTF-8");
    s.push('\n');
    s
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("—".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.replace('|', "\\|")),
        _ => None,
    }
}

fn fmt_num(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format!("{:.6e}", n.as_f64().unwrap_or(f64::NAN)),
        _ => scalar(v).unwrap_or_else(|| "…".into()),
    }
}

fn table(rows: &[Value], out: &mut String) {
    let mut cols: Vec<String> = Vec::new();
    for r in rows {
        if let Some(o) = r.as_object() {
            for (k, v) in o {
                if scalar(v).is_some() && !cols.contains(k) {
                    cols.push(k.clone());
                }
            }
        }
    }
    if cols.is_empty() {
        return;
    }
    out.push_str(&format!("| {} |\n", cols.join(" | ")));
    out.push_str(&format!("|{}\n", " --- |".repeat(cols.len())));
    for r in rows {
        let cells: Vec<String> = cols.iter().map(|c| r.get(c).map(fmt_num).unwrap_or_default()).collect();
        out.push_str(&format!("| {} |\n", cells.join(" | ")));
    }
    out.push('\n');
}

fn section(title: &str, v: &Value, depth: usize, out: &mut String) {
    let hashes = "#".repeat(depth.min(6));
    match v {
        Value::Object(o) => {
            out.push_str(&format!("{hashes} {title}\n\n"));
            for (k, x) in o {
                if let Some(s) = scalar(x) {
                    out.push_str(&format!("- **{k}**: {}\n", if x.is_f64() { fmt_num(x) } else { s }));
                }
            }
            out.push('\n');
            for (k, x) in o {
                if scalar(x).is_none() {
                    section(k, x, depth + 1, out);
                }
            }
        }
        Value::Array(a) if a.iter().all(Value::is_object) && !a.is_empty() => {
            out.push_str(&format!("{hashes} {title}\n\n"));
            table(a, out);
            for (i, x) in a.iter().enumerate() {
                let nested = x.as_object().is_some_and(|o| o.values().any(|v| scalar(v).is_none()));
                if nested && depth < 3 {
                    let label = x
                        .get("axiom")
                        .or_else(|| x.get("criterion"))
                        .or_else(|| x.get("inequality"))
                        .and_then(Value::as_str)
                        .map(str::to_owned)
                        .unwrap_or_else(|| format!("{title} {}", i + 1));
                    section(&label, x, depth + 1, out);
                }
            }
        }
        Value::Array(a) => {
            let items: Vec<String> = a.iter().map(|x| scalar(x).unwrap_or_else(|| "…".into())).collect();
            out.push_str(&format!("- **{title}**: [{}]\n\n", items.join(", ")));
        }
        other => out.push_str(&format!("- **{title}**: {}\n", fmt_num(other))),
    }
}

/// Human-readable summary; the JSON form remains the certificate.
pub fn to_markdown(v: &Value) -> String {
    let mut out = String::new();
    let cmd = v
        .pointer("/manifest/command")
        .and_then(Value::as_str)
        .unwrap_or("report");
    section(&format!("qconv {cmd}"), v, 1, &mut out);
    out
}
