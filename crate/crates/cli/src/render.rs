//! Text rendering of reports.

use serde_json::Value;
use xtorsion::simplex_paths::Q;

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            Some(format!("[{}]", a.iter().filter_map(scalar).collect::<Vec<_>>().join(", ")))
        }
        _ => None,
    }
}

fn write(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            let width = map.keys().map(|k| k.chars().count()).max().unwrap_or(0);
            for (k, x) in map {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}{k:<width$}  {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}\n"));
                        write(x, indent + 1, out);
                    }
                }
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}{i}  {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{i}\n"));
                        write(x, indent + 1, out);
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other).unwrap_or_default())),
    }
}

/// Indented `key  value` lines mirroring the JSON report.
pub fn text(v: &Value) -> String {
    let mut out = String::new();
    write(v, 0, &mut out);
    out.trim_end().to_string()
}

fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..cols).map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0)).collect();
    rows.iter()
        .map(|r| {
            r.iter().enumerate().map(|(c, s)| format!("{s:>w$}", w = widths[c])).collect::<Vec<_>>().join("  ").trim_end().to_string()
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn paths_table(taus: &[String], intervals: &[(Q, Q)], evaluations: &[(Q, Vec<Q>)]) -> String {
    let mut out = format!("taus  {}\n\nlayout\n", taus.join(" "));
    let rows: Vec<Vec<String>> = intervals
        .iter()
        .enumerate()
        .map(|(i, (a, b))| vec![format!("I_{}", i + 1), format!("[{a},"), format!("{b}]")])
        .collect();
    out.push_str(&table(&rows));
    out.push_str("\n\nevaluations\n");
    let dim = evaluations.first().map_or(0, |(_, p)| p.len());
    let mut rows = vec![std::iter::once("tau".to_string()).chain((0..dim).map(|j| format!("θ_{j}"))).collect::<Vec<_>>()];
    rows.extend(evaluations.iter().map(|(t, p)| std::iter::once(t.to_string()).chain(p.iter().map(ToString::to_string)).collect()));
    out.push_str(&table(&rows));
    out
}
