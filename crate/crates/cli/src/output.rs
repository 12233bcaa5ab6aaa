//! JSON rendering with every float written to 17 significant digits.

use std::fmt::Write;

use nalgebra::{DMatrix, DVector};
use serde_json::{Map, Value};

pub fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn vector(v: &DVector<f64>) -> Value {
    Value::Array(v.iter().map(|&x| number(x)).collect())
}

pub fn matrix(m: &DMatrix<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| number(m[(i, j)])).collect()))
            .collect(),
    )
}

fn write_float(out: &mut String, x: f64) {
    write!(out, "{x:.16e}").expect("write to string");
}

fn write_string(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).expect("string serialization"));
}

fn indent(out: &mut String, pretty: bool, level: usize) {
    if pretty {
        out.push('\n');
        out.push_str(&"  ".repeat(level));
    }
}

fn write_value(out: &mut String, v: &Value, pretty: bool, level: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) => write!(out, "{i}").expect("write to string"),
            (_, Some(u), _) => write!(out, "{u}").expect("write to string"),
            (_, _, Some(f)) => write_float(out, f),
            _ => out.push_str("null"),
        },
        Value::String(s) => write_string(out, s),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            let scalar = items.iter().all(|x| !x.is_array() && !x.is_object());
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                    if pretty && scalar {
                        out.push(' ');
                    }
                }
                if !scalar {
                    indent(out, pretty, level + 1);
                }
                write_value(out, item, pretty, level + 1);
            }
            if !scalar {
                indent(out, pretty, level);
            }
            out.push(']');
        }
        Value::Object(map) => write_object(out, map, pretty, level),
    }
}

fn write_object(out: &mut String, map: &Map<String, Value>, pretty: bool, level: usize) {
    if map.is_empty() {
        out.push_str("{}");
        return;
    }
    out.push('{');
    for (k, (key, val)) in map.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        indent(out, pretty, level + 1);
        write_string(out, key);
        out.push(':');
        if pretty {
            out.push(' ');
        }
        write_value(out, val, pretty, level + 1);
    }
    indent(out, pretty, level);
    out.push('}');
}

/// Serializes `v`; compact when `pretty` is false.
pub fn render(v: &Value, pretty: bool) -> String {
    let mut out = String::new();
    write_value(&mut out, v, pretty, 0);
    out
}
