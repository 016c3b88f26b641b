//! JSON and CSV writers.

use std::io::Write;

use serde_json::{json, Value};

use daniell::{Error, Result};

use crate::commands::Record;
use crate::{Cli, Format};

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(_) | Value::Bool(_) | Value::Null => Some(v.to_string()),
        Value::Array(a) if a.len() == 2 && a.iter().all(Value::is_number) => Some(format!("{}/{}", a[0], a[1])),
        _ => None,
    }
}

fn render(cli: &Cli, r: &Record) -> Result<Vec<u8>> {
    match cli.format {
        Format::Json => {
            let doc = json!({
                "command": r.command,
                "config": r.config,
                "result": r.result,
                "pass": r.pass,
            });
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Malformed(e.to_string()))?;
            s.push('\n');
            Ok(s.into_bytes())
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let err = |e: csv::Error| Error::Malformed(e.to_string());
            match &r.table {
                Some((header, rows)) => {
                    w.write_record(header).map_err(err)?;
                    for row in rows {
                        w.write_record(row).map_err(err)?;
                    }
                }
                None => {
                    w.write_record(["key", "value"]).map_err(err)?;
                    w.write_record(["command", r.command]).map_err(err)?;
                    w.write_record(["seed", &cli.seed.to_string()]).map_err(err)?;
                    if let Value::Object(m) = &r.result {
                        for (k, v) in m {
                            if let Some(s) = scalar(v) {
                                w.write_record([k.as_str(), &s]).map_err(err)?;
                            }
                        }
                    }
                    w.write_record(["pass", &r.pass.to_string()]).map_err(err)?;
                }
            }
            w.into_inner().map_err(|e| Error::Malformed(e.to_string()))
        }
    }
}

pub fn write(cli: &Cli, r: &Record) -> Result<()> {
    let bytes = render(cli, r)?;
    let io = |e: std::io::Error| Error::Domain(format!("cannot write {}: {e}", cli.output));
    if cli.output == "-" {
        std::io::stdout().write_all(&bytes).map_err(io)
    } else {
        std::fs::write(&cli.output, bytes).map_err(io)
    }
}
