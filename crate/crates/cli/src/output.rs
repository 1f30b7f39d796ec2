//! CSV and JSON encoding and the output sink.

use anyhow::{Context, Result};
use serde_json::Value;
use std::io::Write;
use std::path::Path;

pub const SCHEMA: &str = "1";

/// A float with 17 significant digits, locale independent.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// CSV text from a header and rows of already formatted fields.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner().context("flushing CSV")?)?)
}

/// Pretty JSON with the schema tag added at the top level.
pub fn json(mut body: Value) -> Result<String> {
    if let Value::Object(m) = &mut body {
        m.insert("schema".into(), Value::from(SCHEMA));
    }
    let mut s = serde_json::to_string_pretty(&body)?;
    s.push('\n');
    Ok(s)
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(0.125), "1.2500000000000000e-1");
    }

    #[test]
    fn csv_quotes_when_needed() {
        let s = csv(&["a", "b"], vec![vec!["x,y".into(), "z".into()]]).unwrap();
        assert_eq!(s, "a,b\n\"x,y\",z\n");
    }
}
