use std::fs;
use std::path::Path;

use kneadlab::numeric::{fmt_decimal, fmt_rational};
use kneadlab::{Rational, TruncatedSeries};
use serde_json::Value;

/// Number rendering: exact fractions, or fixed-point with `--decimal k`.
#[derive(Clone, Copy, Debug)]
pub struct Fmt {
    pub decimal: Option<usize>,
}

impl Fmt {
    pub fn q(&self, r: &Rational) -> String {
        match self.decimal {
            Some(k) => fmt_decimal(r, k),
            None => fmt_rational(r),
        }
    }

    pub fn f(&self, x: f64) -> String {
        match self.decimal {
            Some(k) => format!("{x:.k$}"),
            None => format!("{x}"),
        }
    }

    pub fn poly(&self, s: &TruncatedSeries) -> String {
        s.to_poly_string(self.decimal)
    }

    pub fn coeffs(&self, s: &TruncatedSeries) -> Vec<String> {
        s.coeffs().iter().map(|c| self.q(c)).collect()
    }
}

pub struct Table {
    pub file: &'static str,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: &'static str, header: &[&str]) -> Self {
        Table { file, header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }
}

/// What a command produced. `failure` names the failing check, if any.
pub struct Report {
    pub command: &'static str,
    pub doc: Value,
    pub text: String,
    pub tables: Vec<Table>,
    pub failure: Option<String>,
}

impl Report {
    pub fn new(command: &'static str, doc: Value, text: String) -> Self {
        Report { command, doc, text, tables: Vec::new(), failure: None }
    }

    pub fn document(&self) -> Value {
        let mut doc = self.doc.clone();
        if let Value::Object(map) = &mut doc {
            map.insert("command".into(), Value::from(self.command));
            map.insert("passed".into(), Value::from(self.failure.is_none()));
            if let Some(f) = &self.failure {
                map.insert("failure".into(), Value::from(f.as_str()));
            }
        }
        doc
    }

    /// Writes `<command>.json` and every CSV table into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(&self.document()).expect("json values serialize");
        fs::write(dir.join(format!("{}.json", self.command)), json + "\n")?;
        for t in &self.tables {
            let mut w = csv::Writer::from_path(dir.join(t.file)).map_err(std::io::Error::other)?;
            w.write_record(&t.header).map_err(std::io::Error::other)?;
            for r in &t.rows {
                w.write_record(r).map_err(std::io::Error::other)?;
            }
            w.flush()?;
        }
        Ok(())
    }
}
