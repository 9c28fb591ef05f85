//! CSV and JSON emitters.
//!
//! Floats carry 12 significant digits: `{:.11e}` in CSV, and the value
//! rounded to 12 digits in JSON. CSV starts with comment lines naming the
//! tool version and the SHA-256 of the config, followed by a header row in
//! struct field order.

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Provenance written into the CSV comment header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub config_hash: String,
    /// Extra `key=value` settings that change the output.
    pub settings: Vec<(String, String)>,
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `x` rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x.is_finite() {
        format!("{x:.11e}").parse().unwrap_or(x)
    } else {
        x
    }
}

fn objects<T: Serialize>(rows: &[T]) -> CliResult<Vec<serde_json::Map<String, Value>>> {
    rows.iter()
        .map(|r| match serde_json::to_value(r)? {
            Value::Object(m) => Ok(m),
            _ => Err(CliError::Output(
                "row does not serialize to an object".into(),
            )),
        })
        .collect()
}

fn csv_field(v: &Value) -> CliResult<String> {
    Ok(match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) => u.to_string(),
            (None, Some(i), _) => i.to_string(),
            (None, None, Some(f)) => format!("{f:.11e}"),
            _ => return Err(CliError::Output(format!("unrepresentable number {n}"))),
        },
        Value::String(s) => s.clone(),
        _ => {
            return Err(CliError::Output(
                "nested values cannot be written as CSV".into(),
            ))
        }
    })
}

pub fn write_csv<T: Serialize, W: Write>(
    rows: &[T],
    prov: &Provenance,
    mut out: W,
) -> CliResult<()> {
    writeln!(out, "# irscov {VERSION} config-hash={}", prov.config_hash)?;
    if !prov.settings.is_empty() {
        let s: Vec<String> = prov
            .settings
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        writeln!(out, "# {}", s.join(" "))?;
    }
    let objs = objects(rows)?;
    let mut w = csv::Writer::from_writer(out);
    if let Some(first) = objs.first() {
        w.write_record(first.keys())?;
    }
    for o in &objs {
        let fields = o.values().map(csv_field).collect::<CliResult<Vec<_>>>()?;
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n
                .as_f64()
                .map(round12)
                .and_then(serde_json::Number::from_f64)
            {
                *n = r;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(m) => m.values_mut().for_each(round_value),
        _ => {}
    }
}

pub fn write_json<T: Serialize, W: Write>(rows: &[T], mut out: W) -> CliResult<()> {
    let mut v = serde_json::to_value(rows)?;
    round_value(&mut v);
    serde_json::to_writer_pretty(&mut out, &v)?;
    writeln!(out)?;
    Ok(())
}

pub fn write<T: Serialize, W: Write>(
    rows: &[T],
    format: Format,
    prov: &Provenance,
    out: W,
) -> CliResult<()> {
    match format {
        Format::Csv => write_csv(rows, prov, out),
        Format::Json => write_json(rows, out),
    }
}

/// Parses rows written by [`write_csv`].
pub fn read_csv<T: DeserializeOwned, R: Read>(input: R) -> CliResult<Vec<T>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    r.deserialize()
        .map(|row| row.map_err(CliError::from))
        .collect()
}
