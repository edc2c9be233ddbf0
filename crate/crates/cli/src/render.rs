use std::fmt::Write as _;

use serde_json::Value;

use crate::args::Format;

/// Rows for table and CSV output.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    /// Two columns, one row per leaf of `v`, keyed by its dotted path.
    pub fn flatten(v: &Value) -> Self {
        let mut rows = Vec::new();
        flatten_into(v, String::new(), &mut rows);
        Self { columns: vec!["key".into(), "value".into()], rows }
    }
}

fn flatten_into(v: &Value, path: String, rows: &mut Vec<Vec<String>>) {
    let join = |k: &str| if path.is_empty() { k.to_string() } else { format!("{path}.{k}") };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten_into(x, join(k), rows);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object()) => {
            for (i, x) in a.iter().enumerate() {
                flatten_into(x, join(&i.to_string()), rows);
            }
        }
        _ => rows.push(vec![path, cell(v)]),
    }
}

pub fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

pub fn table_text(t: &Table) -> String {
    let widths: Vec<usize> = (0..t.columns.len())
        .map(|c| t.rows.iter().map(|r| r.get(c).map_or(0, |s| s.chars().count())).chain([t.columns[c].chars().count()]).max().unwrap_or(0))
        .collect();
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (i, w) in widths.iter().enumerate() {
            let c = cells.get(i).map_or("", String::as_str);
            let pad = w - c.chars().count();
            if i + 1 == widths.len() {
                s.push_str(c);
            } else {
                let _ = write!(s, "{c}{}  ", " ".repeat(pad));
            }
        }
        s.trim_end().to_string()
    };
    let mut out = line(&t.columns);
    out.push('\n');
    out.push_str(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
    out.push('\n');
    for r in &t.rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}

pub fn table_csv(t: &Table) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.columns)?;
    for r in &t.rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

/// Renders a full report. JSON keys are sorted, so equal inputs give equal bytes.
pub fn render(report: &Value, table: Option<&Table>, format: Format) -> Result<String, csv::Error> {
    let fallback;
    let t = match table {
        Some(t) => t,
        None => {
            fallback = Table::flatten(report);
            &fallback
        }
    };
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(report).expect("JSON values serialize") + "\n",
        Format::Table => table_text(t),
        Format::Csv => table_csv(t)?,
    })
}
