use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use epistasis_core::numfmt::format_number;
use serde_json::{Map, Value};

use crate::{Failure, Format, GlobalArgs};

/// Rounds every non-integer number like the TSV writers do, so JSON and
/// TSV agree digit for digit.
pub fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            let x = n.as_f64().expect("finite JSON number");
            let rounded: f64 = format_number(x).parse().expect("formatted number parses");
            serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_floats).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

pub fn prepare_out_dir(g: &GlobalArgs) -> Result<&Path, Failure> {
    fs::create_dir_all(&g.out_dir)
        .map_err(|e| Failure::config(format!("output directory {}: {e}", g.out_dir.display())))?;
    Ok(&g.out_dir)
}

/// Creates `dir/name` and hands a buffered writer to `body`.
pub fn write_file(
    dir: &Path,
    name: &str,
    body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
) -> Result<PathBuf, Failure> {
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    body(&mut w).with_context(|| format!("writing {}", path.display()))?;
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), v, out);
            }
        }
        Value::Null => out.push((prefix.to_string(), "NA".into())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Number(n) if n.is_f64() => {
            out.push((prefix.to_string(), format_number(n.as_f64().expect("f64 number"))))
        }
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn render(summary: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(summary).expect("JSON values serialise");
            s.push('\n');
            s
        }
        Format::Tsv => {
            let mut rows = Vec::new();
            flatten("", summary, &mut rows);
            let mut s = String::from("key\tvalue\n");
            for (k, v) in rows {
                s.push_str(&format!("{k}\t{v}\n"));
            }
            s
        }
    }
}

/// Writes `<stem>.json` or `<stem>.tsv` into the output directory and
/// echoes it to stdout.
pub fn emit_summary(g: &GlobalArgs, stem: &str, summary: Map<String, Value>) -> Result<(), Failure> {
    let dir = prepare_out_dir(g)?;
    let summary = round_floats(Value::Object(summary));
    let text = render(&summary, g.format);
    let ext = match g.format {
        Format::Json => "json",
        Format::Tsv => "tsv",
    };
    write_file(dir, &format!("{stem}.{ext}"), |w| w.write_all(text.as_bytes()))?;
    print!("{text}");
    Ok(())
}
