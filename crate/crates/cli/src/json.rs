//! Canonical JSON layout: objects one key per line, arrays of numbers and of
//! number pairs inline, so each matrix row sits on one line.

use serde_json::Value;

pub fn canonical(v: &Value) -> String {
    let mut out = String::new();
    write(v, 0, &mut out);
    out.push('\n');
    out
}

fn flat(v: &Value) -> bool {
    match v {
        Value::Array(items) => items.iter().all(|x| !matches!(x, Value::Array(_) | Value::Object(_))),
        Value::Object(_) => false,
        _ => true,
    }
}

fn inline(v: &Value) -> bool {
    match v {
        Value::Array(items) => items.iter().all(flat),
        Value::Object(m) => m.is_empty(),
        _ => true,
    }
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write(v: &Value, level: usize, out: &mut String) {
    if inline(v) {
        out.push_str(&serde_json::to_string(v).expect("json value"));
        return;
    }
    match v {
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                indent(level + 1, out);
                write(x, level + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            indent(level, out);
            out.push(']');
        }
        Value::Object(m) => {
            out.push_str("{\n");
            for (i, (k, x)) in m.iter().enumerate() {
                indent(level + 1, out);
                out.push_str(&serde_json::to_string(k).expect("json key"));
                out.push_str(": ");
                write(x, level + 1, out);
                out.push_str(if i + 1 < m.len() { ",\n" } else { "\n" });
            }
            indent(level, out);
            out.push('}');
        }
        _ => unreachable!(),
    }
}
